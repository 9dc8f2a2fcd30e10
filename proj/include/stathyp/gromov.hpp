#pragma once

#include <limits>

#include "stathyp/geodesic.hpp"

namespace stathyp {

inline constexpr double kInfiniteProduct = std::numeric_limits<double>::infinity();

inline double gromov_product(const ModelPoint& x, const ModelPoint& y, const ModelPoint& z) {
    const double dxy = distance(x, y), dxz = distance(x, z), dyz = distance(y, z);
    const double g = 0.5 * (dxy + dxz - dyz);
    return std::clamp(g, 0.0, std::min(dxy, dxz));
}

namespace detail {
// Boundary direction as seen from o, i.e. after moving o to the origin.
inline Direction seen_from(const ModelPoint& o, const BoundaryDirection& xi) {
    if (o.radius() == 0.0) return xi.unit();
    return Isometry::translation_to(o).inverse().apply(xi).unit();
}
}  // namespace detail

// Visual angle at o between the rays toward xi and eta.
inline double visual_angle(const ModelPoint& o, const BoundaryDirection& xi, const BoundaryDirection& eta) {
    require_same_dim(xi.dim(), eta.dim());
    return 2.0 * std::asin(detail::half_angle_sin(detail::seen_from(o, xi), detail::seen_from(o, eta)));
}

// -log sin(theta/2); kInfiniteProduct when xi = eta.
inline double gromov_product_boundary(const ModelPoint& o, const BoundaryDirection& xi,
                                      const BoundaryDirection& eta) {
    require_same_dim(xi.dim(), eta.dim());
    const double s = detail::half_angle_sin(detail::seen_from(o, xi), detail::seen_from(o, eta));
    if (s == 0.0) return kInfiniteProduct;
    return -std::log(s);
}

// lim_t (y, gamma_xi(t))_o = (s - log(e^{-s} + 2 sinh(s) sin^2(theta/2))) / 2, s = d(o,y),
// theta the angle at o between y and xi.
inline double gromov_product(const ModelPoint& o, const ModelPoint& y, const BoundaryDirection& xi) {
    require_same_dim(o.dim(), y.dim());
    ModelPoint yo = y;
    Direction xo = xi.unit();
    if (o.radius() != 0.0) {
        const Isometry h = Isometry::translation_to(o).inverse();
        yo = h.apply(y);
        xo = h.apply(xi).unit();
    }
    const double s = yo.radius();
    if (s == 0.0) return 0.0;
    const double q = detail::half_angle_sin(yo.direction(), xo);
    double l = -s;
    if (q > 0.0) l = detail::log_add_exp(-s, M_LN2 + detail::log_sinh(s) + 2.0 * std::log(q));
    return std::clamp(0.5 * (s - l), 0.0, s);
}

// Compared with tol::geom slack so the boundary case (xi on the ray through y, tau = 0)
// is not decided by rounding.
inline bool in_shadow(const ModelPoint& o, const ModelPoint& y, double tau, const BoundaryDirection& xi) {
    if (!(tau >= 0.0)) throw std::invalid_argument("in_shadow: tau must be >= 0");
    return gromov_product(o, y, xi) >= distance(o, y) - tau - tol::geom;
}

}  // namespace stathyp
