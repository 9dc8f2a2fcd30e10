#pragma once

#include <optional>

#include "stathyp/halfplane.hpp"

namespace stathyp {

using LorentzMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim + 1, kMaxDim + 1>;
using Sl2 = Eigen::Matrix2d;

inline LorentzMatrix minkowski_j(int n) {
    LorentzMatrix j = LorentzMatrix::Identity(n + 1, n + 1);
    j(0, 0) = -1.0;
    return j;
}

// Columns are the images of the basis I, diag(1,-1), [[0,1],[1,0]] of symmetric
// matrices under S -> g S g^T, read back as (t, X, Y).
inline LorentzMatrix lorentz_from_sl2(const Sl2& g) {
    auto coords_of = [](const Eigen::Matrix2d& s) {
        return Eigen::Vector3d(0.5 * (s(0, 0) + s(1, 1)), 0.5 * (s(0, 0) - s(1, 1)), s(0, 1));
    };
    Eigen::Matrix2d basis[3];
    basis[0] << 1, 0, 0, 1;
    basis[1] << 1, 0, 0, -1;
    basis[2] << 0, 1, 1, 0;
    LorentzMatrix m(3, 3);
    for (int j = 0; j < 3; ++j) m.col(j) = coords_of(g * basis[j] * g.transpose());
    return m;
}

// Isometry of H^n as a Lorentz matrix stored as exp(log_scale) * scaled, so long
// products never overflow. For n = 2 an SL2 element may back the isometry; it is then
// authoritative: kept as exp(sl2_log) * sl2 with the representative divided by its largest
// entry after every product, and the Lorentz matrix is derived from it. Rounding in a
// 2x2 product costs ~eps ||g||^2 = eps e^d relative to the Lorentz form, against
// eps e^{2d} for a Lorentz product, and integer products stay exact up to 2^53.
class Isometry {
public:
    static Isometry identity(int n) {
        detail::check_dim(n);
        if (n == 2) return from_sl2(Sl2::Identity());
        Isometry g;
        g.m_ = LorentzMatrix::Identity(n + 1, n + 1);
        return g;
    }

    static Isometry from_lorentz(const LorentzMatrix& m) {
        const int n = static_cast<int>(m.rows()) - 1;
        detail::check_dim(n);
        if (m.cols() != m.rows()) throw DimensionMismatch("Lorentz matrix must be square");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        const LorentzMatrix j = minkowski_j(n);
        const double defect = (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
        if (defect > tol::geom * scale * scale) throw InvariantViolation("Isometry: M^T J M != J");
        if (!(m(0, 0) > 0.0)) throw InvariantViolation("Isometry: does not preserve the future sheet");
        Isometry g;
        g.m_ = m;
        return g;
    }

    static Isometry from_sl2(const Sl2& g) {
        const double det = g.determinant();
        if (!(det > 0.0) || !std::isfinite(det))
            throw InvariantViolation("Isometry: 2x2 matrix must have positive determinant");
        Isometry out;
        out.sl2_ = g;
        out.sl2_log_ = -0.5 * std::log(det);
        out.sync_from_sl2();
        return out;
    }

    // Pure boost taking the origin to p.
    static Isometry translation_to(const ModelPoint& p) {
        const int n = p.dim();
        const double r = p.radius();
        const Direction& u = p.direction();
        if (n == 2) {
            // symmetric positive element exp(r/2 [[ux, uy], [uy, -ux]]), scaled by e^{-r/2}
            const double c = 0.5 * (1.0 + std::exp(-r)), s = 0.5 * -std::expm1(-r);
            Sl2 h;
            h << c + s * u[0], s * u[1], s * u[1], c - s * u[0];
            Isometry g;
            g.sl2_ = h;
            g.sl2_log_ = 0.5 * r;
            g.sync_from_sl2();
            return g;
        }
        Isometry g;
        g.m_ = LorentzMatrix(n + 1, n + 1);
        double c, s, e;
        if (r > 30.0) {
            c = 0.5 * (1.0 + std::exp(-2.0 * r));
            s = 0.5 * -std::expm1(-2.0 * r);
            e = std::exp(-r);
            g.log_scale_ = r;
        } else {
            c = std::cosh(r);
            s = std::sinh(r);
            e = 1.0;
        }
        g.m_(0, 0) = c;
        g.m_.block(0, 1, 1, n) = s * u.transpose();
        g.m_.block(1, 0, n, 1) = s * u;
        g.m_.block(1, 1, n, n) = e * LorentzMatrix::Identity(n, n) + (c - e) * (u * u.transpose());
        return g;
    }

    // Translation of length `length` along spatial axis `axis` (1-based) through the origin.
    static Isometry boost(int n, int axis, double length) {
        detail::check_dim(n);
        if (axis < 1 || axis > n) throw DimensionMismatch("boost: axis out of range");
        Direction u = Direction::Zero(n);
        u[axis - 1] = length >= 0.0 ? 1.0 : -1.0;
        return translation_to(ModelPoint::polar(std::abs(length), u));
    }

    // Rotation by `angle` in the spatial plane of axes a, b (1-based), fixing the origin.
    static Isometry rotation(int n, int a, int b, double angle) {
        detail::check_dim(n);
        if (a < 1 || b < 1 || a > n || b > n || a == b) throw DimensionMismatch("rotation: bad axes");
        if (n == 2) {
            // (X, Y) rotated by angle <-> SO(2) element of half the angle
            const double h = (a < b ? -0.5 : 0.5) * angle;
            Sl2 k;
            k << std::cos(h), std::sin(h), -std::sin(h), std::cos(h);
            return from_sl2(k);
        }
        Isometry g = identity(n);
        const double c = std::cos(angle), s = std::sin(angle);
        g.m_(a, a) = c;
        g.m_(a, b) = -s;
        g.m_(b, a) = s;
        g.m_(b, b) = c;
        return g;
    }

    int dim() const { return static_cast<int>(m_.rows()) - 1; }
    const LorentzMatrix& scaled_matrix() const { return m_; }
    double log_scale() const { return log_scale_; }
    LorentzMatrix matrix() const { return std::exp(log_scale_) * m_; }
    // Projective representative; the determinant-one element is exp(sl2_log()) * sl2().
    const std::optional<Sl2>& sl2() const { return sl2_; }
    double sl2_log() const { return sl2_log_; }

    Isometry operator*(const Isometry& o) const {
        require_same_dim(dim(), o.dim());
        Isometry g;
        if (sl2_ && o.sl2_) {
            g.sl2_ = (*sl2_) * (*o.sl2_);
            g.sl2_log_ = sl2_log_ + o.sl2_log_;
            g.sync_from_sl2();
            return g;
        }
        g.m_ = m_ * o.m_;
        g.log_scale_ = log_scale_ + o.log_scale_;
        const double mx = g.m_.cwiseAbs().maxCoeff();
        if (mx > 0x1p200) {
            g.m_ *= 0x1p-200;
            g.log_scale_ += 200.0 * M_LN2;
        }
        return g;
    }

    // J M^T J; same scale as M.
    Isometry inverse() const {
        Isometry g;
        if (sl2_) {
            const Sl2& a = *sl2_;
            Sl2 inv;
            inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
            g.sl2_ = inv;
            g.sl2_log_ = sl2_log_;
            g.sync_from_sl2();
            return g;
        }
        const LorentzMatrix j = minkowski_j(dim());
        g.m_ = j * m_.transpose() * j;
        g.log_scale_ = log_scale_;
        return g;
    }

    ModelPoint apply(const ModelPoint& x) const {
        require_same_dim(dim(), x.dim());
        const int n = dim();
        const Coords xs = x.scaled_coords();
        const Coords y = m_ * xs;  // true image is exp(s) * y
        const double s = x.radius() + log_scale_;
        if (!(y[0] > 0.0)) throw InvariantViolation("apply: image left the future sheet");
        const Direction v = y.tail(n);
        const double nv = v.norm();
        // drift is judged against the size of the computation, ||M|| |x~|, which bounds
        // the rounding error of y
        const double scale = m_.cwiseAbs().maxCoeff() * xs.cwiseAbs().sum();
        const double defect = std::abs((y[0] - nv) * (y[0] + nv) - std::exp(-2.0 * s));
        if (defect > tol::repair * scale * scale)
            throw InvariantViolation("apply: Minkowski drift beyond tolerance; re-orthogonalize upstream");
        if (nv == 0.0) return ModelPoint::origin(n);
        return ModelPoint::polar(detail::asinh_exp(s + std::log(nv)), v / nv);
    }

    BoundaryDirection apply(const BoundaryDirection& xi) const {
        require_same_dim(dim(), xi.dim());
        const int n = dim();
        const Coords v = m_ * xi.coords();
        const double nv = v.tail(n).norm();
        const double scale = m_.cwiseAbs().maxCoeff() * 2.0;
        if (!(v[0] > 0.0) || std::abs(v[0] - nv) * (v[0] + nv) > tol::repair * scale * scale)
            throw InvariantViolation("apply: boundary image not null; re-orthogonalize upstream");
        return BoundaryDirection::from_unit(v.tail(n) / nv);
    }

    HalfPlanePoint apply(const HalfPlanePoint& z) const {
        if (sl2_) return mobius(*sl2_, z);
        return to_half_plane(apply(to_model(z)));
    }

    // max |M^T J M - J| while unscaled; relative to ||M||^2 once scaled.
    double lorentz_defect() const {
        const LorentzMatrix j = minkowski_j(dim());
        if (log_scale_ == 0.0) return (m_.transpose() * j * m_ - j).cwiseAbs().maxCoeff();
        const double e = std::exp(-2.0 * log_scale_);
        const double nrm = m_.cwiseAbs().maxCoeff();
        return (m_.transpose() * j * m_ - e * j).cwiseAbs().maxCoeff() / (nrm * nrm);
    }

    // Lorentz-only products: B-Gram-Schmidt on the columns while entries are moderate.
    // Larger products carry ~||M||^2 eps of cancellation error that no re-orthogonalization
    // removes. SL2-backed isometries need nothing. Returns false when skipped.
    bool reorthogonalize() {
        if (sl2_) return true;
        if (log_scale_ != 0.0 || m_.cwiseAbs().maxCoeff() >= 1e3) return false;
        const int n = dim();
        Coords c0 = m_.col(0);
        c0 /= std::sqrt(-minkowski(c0, c0));
        m_.col(0) = c0;
        for (int k = 1; k <= n; ++k) {
            Coords c = m_.col(k);
            c += minkowski(c, m_.col(0)) * Coords(m_.col(0));
            for (int i = 1; i < k; ++i) c -= minkowski(c, m_.col(i)) * Coords(m_.col(i));
            c /= std::sqrt(minkowski(c, c));
            m_.col(k) = c;
        }
        return true;
    }

private:
    Isometry() = default;

    void sync_from_sl2() {
        const double mx = sl2_->cwiseAbs().maxCoeff();
        *sl2_ /= mx;
        sl2_log_ += std::log(mx);
        m_ = lorentz_from_sl2(*sl2_);
        log_scale_ = 2.0 * sl2_log_;
    }

    LorentzMatrix m_;
    double log_scale_ = 0.0;
    std::optional<Sl2> sl2_;
    double sl2_log_ = 0.0;
};

}  // namespace stathyp
