#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "stathyp/constants.hpp"

namespace stathyp {

using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;
using Direction = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class InvariantViolation : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class DegenerateGeodesic : public GeometryError {
public:
    using GeometryError::GeometryError;
};

// B(a,b) = -a0 b0 + sum_i ai bi
inline double minkowski(const Coords& a, const Coords& b) {
    if (a.size() != b.size()) throw DimensionMismatch("minkowski: size mismatch");
    const Eigen::Index n = a.size() - 1;
    return -a[0] * b[0] + a.tail(n).dot(b.tail(n));
}

namespace detail {

inline void check_dim(int n) {
    if (n < 2 || n > kMaxDim)
        throw DimensionMismatch("dimension must lie in [2," + std::to_string(kMaxDim) + "], got " +
                                std::to_string(n));
}

// log(sinh r), r > 0, without overflow
inline double log_sinh(double r) {
    if (r > 20.0) return r - M_LN2 + std::log1p(-std::exp(-2.0 * r));
    return std::log(std::sinh(r));
}

// asinh(exp(s)) without overflow
inline double asinh_exp(double s) {
    if (s > 20.0) return s + std::log1p(std::sqrt(1.0 + std::exp(-2.0 * s)));
    return std::asinh(std::exp(s));
}

inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -INFINITY) return a;
    return a + std::log1p(std::exp(b - a));
}

// sin(phi/2) for the angle phi between unit vectors
inline double half_angle_sin(const Direction& u, const Direction& v) {
    return std::min(1.0, 0.5 * (u - v).norm());
}

inline Direction first_axis(int n) {
    Direction e = Direction::Zero(n);
    e[0] = 1.0;
    return e;
}

}  // namespace detail

// A point of H^n, stored as (distance from the model origin e0, unit direction).
// Hyperboloid coordinates (cosh r, sinh r * u) are derived; the polar form keeps
// full relative precision for far points, where raw coordinates would not.
class ModelPoint {
public:
    static ModelPoint origin(int n) {
        detail::check_dim(n);
        return ModelPoint(0.0, detail::first_axis(n));
    }

    static ModelPoint polar(double radius, const Direction& dir) {
        detail::check_dim(static_cast<int>(dir.size()));
        if (!(radius >= 0.0) || !std::isfinite(radius))
            throw InvariantViolation("ModelPoint: radius must be finite and >= 0");
        const double nrm = dir.norm();
        if (!(nrm > 0.0)) {
            if (radius == 0.0) return origin(static_cast<int>(dir.size()));
            throw InvariantViolation("ModelPoint: zero direction");
        }
        return ModelPoint(radius, dir / nrm);
    }

    // Validates B(c,c) = -1 (relative to c0^2 for far points) and c0 > 0.
    static ModelPoint from_coords(const Coords& c) {
        const int n = static_cast<int>(c.size()) - 1;
        detail::check_dim(n);
        if (!(c[0] > 0.0)) throw InvariantViolation("ModelPoint: x0 must be positive");
        const double defect = std::abs(minkowski(c, c) + 1.0);
        if (defect > tol::geom * std::max(1.0, c[0] * c[0]))
            throw InvariantViolation("ModelPoint: B(x,x) != -1 (defect " + std::to_string(defect) + ")");
        Direction v = c.tail(n);
        const double nv = v.norm();
        if (nv == 0.0) return origin(n);
        return ModelPoint(std::asinh(nv), v / nv);
    }

    int dim() const { return static_cast<int>(u_.size()); }
    double radius() const { return r_; }
    const Direction& direction() const { return u_; }

    Coords coords() const {
        Coords c(dim() + 1);
        c[0] = std::cosh(r_);
        c.tail(dim()) = std::sinh(r_) * u_;
        return c;
    }

    // exp(-radius) * coords(); bounded for every radius
    Coords scaled_coords() const {
        const double e = std::exp(-2.0 * r_);
        Coords c(dim() + 1);
        c[0] = 0.5 * (1.0 + e);
        c.tail(dim()) = (0.5 * -std::expm1(-2.0 * r_)) * u_;
        return c;
    }

    // Poincare ball coordinates tanh(r/2) u
    Direction ball() const { return std::tanh(0.5 * r_) * u_; }

private:
    ModelPoint(double r, Direction u) : r_(r), u_(std::move(u)) {}
    double r_;
    Direction u_;
};

// A point of the sphere at infinity, represented by the null vector (1, u), |u| = 1.
class BoundaryDirection {
public:
    static BoundaryDirection from_unit(const Direction& u) {
        detail::check_dim(static_cast<int>(u.size()));
        const double nrm = u.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw InvariantViolation("BoundaryDirection: zero direction");
        return BoundaryDirection(u / nrm);
    }

    // Validates nullity within 1e-9 (relative to c0^2), then rescales to c0 = 1.
    static BoundaryDirection from_coords(const Coords& c) {
        const int n = static_cast<int>(c.size()) - 1;
        detail::check_dim(n);
        if (!(c[0] > 0.0)) throw InvariantViolation("BoundaryDirection: c0 must be positive");
        if (std::abs(minkowski(c, c)) > tol::geom * c[0] * c[0])
            throw InvariantViolation("BoundaryDirection: vector is not null");
        return from_unit(c.tail(n));
    }

    int dim() const { return static_cast<int>(u_.size()); }
    const Direction& unit() const { return u_; }

    Coords coords() const {
        Coords c(dim() + 1);
        c[0] = 1.0;
        c.tail(dim()) = u_;
        return c;
    }

private:
    explicit BoundaryDirection(Direction u) : u_(std::move(u)) {}
    Direction u_;
};

inline void require_same_dim(int a, int b) {
    if (a != b)
        throw DimensionMismatch("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

// sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(phi/2); equal to
// arccosh(-B(x,y)) but free of cancellation for near and far pairs alike.
inline double distance(const ModelPoint& x, const ModelPoint& y) {
    require_same_dim(x.dim(), y.dim());
    const double r1 = x.radius(), r2 = y.radius();
    const double s = detail::half_angle_sin(x.direction(), y.direction());
    const double dr = 0.5 * (r1 - r2);
    if (r1 < 300.0 && r2 < 300.0) {
        const double sd = std::sinh(dr);
        const double v = sd * sd + std::sinh(r1) * std::sinh(r2) * s * s;
        return 2.0 * std::asinh(std::sqrt(v));
    }
    double la = -INFINITY, lb = -INFINITY;
    if (dr != 0.0) la = 2.0 * detail::log_sinh(std::abs(dr));
    if (s > 0.0 && r1 > 0.0 && r2 > 0.0) lb = detail::log_sinh(r1) + detail::log_sinh(r2) + 2.0 * std::log(s);
    const double ls = detail::log_add_exp(la, lb);
    if (ls == -INFINITY) return 0.0;
    return 2.0 * detail::asinh_exp(0.5 * ls);
}

// log(-B(x, (1,xi))): the Busemann-type quantity of x toward xi, stable at any radius.
inline double log_horo(const ModelPoint& x, const BoundaryDirection& xi) {
    require_same_dim(x.dim(), xi.dim());
    const double r = x.radius();
    if (r == 0.0) return 0.0;
    const double q = 0.5 * (x.direction() - xi.unit()).squaredNorm();
    if (q == 0.0) return -r;
    return detail::log_add_exp(-r, detail::log_sinh(r) + std::log(q));
}

// Euclidean distance of two boundary points on the unit sphere.
inline double chord(const BoundaryDirection& a, const BoundaryDirection& b) {
    require_same_dim(a.dim(), b.dim());
    return (a.unit() - b.unit()).norm();
}

}  // namespace stathyp
