#pragma once

#include "stathyp/isometry.hpp"

namespace stathyp {

// Oriented unit-speed geodesic from `backward` to `forward`:
//   gamma(t) = (e^{t+s} l+ + e^{-(t+s)} l-) / |l+ - l-|,   l = (1, unit),
// with anchor gamma(0). Stable along the whole line.
class Geodesic {
public:
    static Geodesic from_endpoints(const BoundaryDirection& backward, const BoundaryDirection& forward,
                                   double shift = 0.0) {
        require_same_dim(backward.dim(), forward.dim());
        if (!(chord(backward, forward) > 0.0)) throw DegenerateGeodesic("geodesic endpoints coincide");
        return Geodesic(backward, forward, shift);
    }

    // Anchored at the point of the geodesic closest to `near`.
    static Geodesic anchored(const BoundaryDirection& backward, const BoundaryDirection& forward,
                             const ModelPoint& near) {
        Geodesic g = from_endpoints(backward, forward, 0.0);
        g.shift_ = g.closest_parameter(near);
        return g;
    }

    int dim() const { return fwd_.dim(); }
    const BoundaryDirection& backward() const { return bwd_; }
    const BoundaryDirection& forward() const { return fwd_; }
    double shift() const { return shift_; }

    ModelPoint point_at(double t) const {
        const double u = t + shift_;
        const double k = chord(fwd_, bwd_);
        const BoundaryDirection& big = u >= 0.0 ? fwd_ : bwd_;
        const BoundaryDirection& small = u >= 0.0 ? bwd_ : fwd_;
        const double a = std::abs(u);
        const Direction v = big.unit() + std::exp(-2.0 * a) * small.unit();
        const double nv = v.norm();
        if (nv == 0.0) return ModelPoint::origin(dim());
        return ModelPoint::polar(detail::asinh_exp(a - std::log(k) + std::log(nv)), v / nv);
    }

    ModelPoint anchor() const { return point_at(0.0); }

    // Parameter of the closest point to x: -B(x, gamma(t)) ~ e^{u} a + e^{-u} b.
    double closest_parameter(const ModelPoint& x) const {
        return 0.5 * (log_horo(x, bwd_) - log_horo(x, fwd_)) - shift_;
    }

    Geodesic reversed() const { return Geodesic(fwd_, bwd_, -shift_); }

private:
    Geodesic(BoundaryDirection b, BoundaryDirection f, double s) : bwd_(std::move(b)), fwd_(std::move(f)), shift_(s) {}
    BoundaryDirection bwd_, fwd_;
    double shift_;
};

struct GeodesicProjection {
    double distance;
    double parameter;
};

inline GeodesicProjection dist_to_geodesic(const ModelPoint& x, const Geodesic& g) {
    require_same_dim(x.dim(), g.dim());
    const double t = g.closest_parameter(x);
    return {distance(x, g.point_at(t)), t};
}

namespace detail {
// Unit null direction of e^{d} a - b (up to scale), given a and b at distance d.
inline BoundaryDirection null_combination(const ModelPoint& a, const ModelPoint& b, double d) {
    // a = e^{ra} a~, b = e^{rb} b~; form a~ - exp(rb - ra - d) b~
    const Coords ca = a.scaled_coords(), cb = b.scaled_coords();
    const double la = a.radius(), lb = b.radius() - d;
    const int n = a.dim();
    Direction v;
    if (la >= lb)
        v = ca.tail(n) - std::exp(lb - la) * cb.tail(n);
    else
        v = std::exp(la - lb) * ca.tail(n) - cb.tail(n);
    return BoundaryDirection::from_unit(v);
}
}  // namespace detail

// Geodesic with anchor x and gamma(d(x,y)) = y.
inline Geodesic geodesic_between(const ModelPoint& x, const ModelPoint& y) {
    require_same_dim(x.dim(), y.dim());
    const double d = distance(x, y);
    if (!(d > 1e-12)) throw DegenerateGeodesic("geodesic_between: points coincide");
    const BoundaryDirection back = detail::null_combination(x, y, d);
    const BoundaryDirection fwd = detail::null_combination(y, x, d);
    return Geodesic::anchored(back, fwd, x);
}

// Ray from x toward xi; the backward endpoint is the null vector 2a x - xi, a = -B(x, xi).
inline Geodesic ray_to_boundary(const ModelPoint& x, const BoundaryDirection& xi) {
    require_same_dim(x.dim(), xi.dim());
    const int n = x.dim();
    const double la = log_horo(x, xi) + x.radius() + M_LN2;  // log(2a e^{r})
    const Coords cx = x.scaled_coords();
    Direction v;
    if (la >= 0.0)
        v = cx.tail(n) - std::exp(-la) * xi.unit();
    else
        v = std::exp(la) * cx.tail(n) - xi.unit();
    return Geodesic::anchored(BoundaryDirection::from_unit(v), xi, x);
}

inline Geodesic transform(const Isometry& g, const Geodesic& gamma) {
    return Geodesic::anchored(g.apply(gamma.backward()), g.apply(gamma.forward()), g.apply(gamma.anchor()));
}

}  // namespace stathyp
