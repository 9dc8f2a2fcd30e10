#pragma once

#include <complex>
#include <limits>

#include "stathyp/hyperboloid.hpp"

// Upper half-plane adapter (n = 2). Correspondence with the hyperboloid:
//   z = x + iy  ->  ( (|z|^2+1)/(2y), (|z|^2-1)/(2y), x/y ),   i -> e0,
//   real xi     ->  ( 1, (xi^2-1)/(xi^2+1), 2 xi/(xi^2+1) ),    inf -> (1,1,0), 0 -> (1,-1,0).
// A matrix g in SL2(R) acts on H(z) = [[t+X, Y], [Y, t-X]] by H -> g H g^T.

namespace stathyp {

struct HalfPlanePoint {
    double re = 0.0;
    double im = 1.0;
};

struct HalfPlaneBoundary {
    double value = 0.0;
    bool infinite = false;
    static HalfPlaneBoundary infinity() { return {0.0, true}; }
    static HalfPlaneBoundary real(double v) { return {v, false}; }
};

inline ModelPoint to_model(const HalfPlanePoint& z) {
    if (!(z.im > 0.0) || !std::isfinite(z.im) || !std::isfinite(z.re))
        throw InvariantViolation("HalfPlanePoint: im must be positive and finite");
    const double q = z.re / z.im;
    Direction v(2);
    v << 0.5 * (z.re * q + z.im - 1.0 / z.im), q;
    const double nv = v.norm();
    if (nv == 0.0) return ModelPoint::origin(2);
    return ModelPoint::polar(std::asinh(nv), v / nv);
}

inline HalfPlanePoint to_half_plane(const ModelPoint& p) {
    if (p.dim() != 2) throw DimensionMismatch("half-plane adapter requires n = 2");
    const double r = p.radius();
    const double ux = p.direction()[0], uy = p.direction()[1];
    // t - X = e^{-r} + sinh r (1 - ux), with 1 - ux formed without cancellation
    const double one_minus = ux > 0.0 ? uy * uy / (1.0 + ux) : 1.0 - ux;
    const double tm = std::exp(-r) + std::sinh(r) * one_minus;
    const double y = 1.0 / tm;
    return {std::sinh(r) * uy * y, y};
}

inline BoundaryDirection to_boundary(const HalfPlaneBoundary& b) {
    Direction u(2);
    if (b.infinite) {
        u << 1.0, 0.0;
    } else if (std::abs(b.value) <= 1.0) {
        const double x = b.value, d = 1.0 + x * x;
        u << (x * x - 1.0) / d, 2.0 * x / d;
    } else {
        const double w = 1.0 / b.value, d = 1.0 + w * w;
        u << (1.0 - w * w) / d, 2.0 * w / d;
    }
    return BoundaryDirection::from_unit(u);
}

inline HalfPlaneBoundary to_half_plane(const BoundaryDirection& b) {
    if (b.dim() != 2) throw DimensionMismatch("half-plane adapter requires n = 2");
    const double X = b.unit()[0], Y = b.unit()[1];
    if (X < 0.0) return HalfPlaneBoundary::real(Y / (1.0 - X));
    if (Y == 0.0) return HalfPlaneBoundary::infinity();
    return HalfPlaneBoundary::real((1.0 + X) / Y);
}

// Projective pair (p, q) with xi = p/q for a boundary point of H^2.
inline Eigen::Vector2d projective_pair(const BoundaryDirection& b) {
    if (b.dim() != 2) throw DimensionMismatch("half-plane adapter requires n = 2");
    const double X = b.unit()[0], Y = b.unit()[1];
    if (X >= 0.0) {
        const double p = std::sqrt(1.0 + X);
        return {p, Y / p};
    }
    const double q = std::sqrt(1.0 - X);
    return {Y / q, q};
}

inline HalfPlanePoint mobius(const Eigen::Matrix2d& g, const HalfPlanePoint& z) {
    const double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    const double det = a * d - b * c;
    // long products are nearly singular in floating point; only a clearly negative
    // determinant is an error
    if (det < -1e-9 * (std::abs(a * d) + std::abs(b * c)) || !std::isfinite(det))
        throw InvariantViolation("mobius: determinant must be positive");
    const std::complex<double> w(z.re, z.im);
    const std::complex<double> r = (a * w + b) / (c * w + d);
    return {r.real(), r.imag()};
}

inline double half_plane_distance(const HalfPlanePoint& z, const HalfPlanePoint& w) {
    const double dx = z.re - w.re, dy = z.im - w.im;
    return 2.0 * std::asinh(0.5 * std::sqrt(dx * dx + dy * dy) / std::sqrt(z.im * w.im));
}

}  // namespace stathyp
