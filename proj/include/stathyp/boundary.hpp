#pragma once

#include <array>

#include "stathyp/gromov.hpp"
#include "stathyp/walk.hpp"

namespace stathyp {

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::size_t steps, double diameter)
        : std::runtime_error("no boundary convergence after " + std::to_string(steps) +
                             " steps (test-triple diameter " + std::to_string(diameter) + ")"),
          steps_(steps), diameter_(diameter) {}
    std::size_t steps() const { return steps_; }
    double last_diameter() const { return diameter_; }

private:
    std::size_t steps_;
    double diameter_;
};

class DegenerateTracking : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LimitResult {
    BoundaryDirection direction;
    std::size_t steps_used;
    double achieved_tol;
};

struct HarmonicSample {
    BoundaryDirection direction;
    std::size_t steps_used;
    double achieved_tol;
    std::uint64_t index;
};

struct SpherePoint {
    ModelPoint point;
    BoundaryDirection origin_direction;
    double radius;
};

// x and the two points at distance 1 from x along its first two frame axes.
inline std::array<ModelPoint, 3> test_triple(const ModelPoint& x) {
    const int n = x.dim();
    const Isometry h = Isometry::translation_to(x);
    return {x, h.apply(ModelPoint::polar(1.0, detail::first_axis(n))),
            h.apply(ModelPoint::polar(1.0, Direction(Direction::Unit(n, 1))))};
}

// Limit of (g_{start+1} ... g_{start+j}) x as j grows, i.e. the forward limit of the
// shifted path. Converged once the test-triple images have ball diameter < tol.
inline LimitResult forward_limit_from(SamplePath& path, std::size_t start, const ModelPoint& x, double tol,
                                      std::size_t max_steps) {
    if (!(tol > 0.0)) throw std::invalid_argument("forward_limit: tol must be positive");
    const auto triple = test_triple(x);
    Isometry p = Isometry::identity(x.dim());
    double diam = INFINITY;
    for (std::size_t j = 1; j <= max_steps; ++j) {
        p = p * path.element(start + j);
        if (j % kReorthPeriod == 0) p.reorthogonalize();
        std::array<Direction, 3> b;
        for (int i = 0; i < 3; ++i) b[i] = p.apply(triple[i]).ball();
        diam = std::max({(b[0] - b[1]).norm(), (b[0] - b[2]).norm(), (b[1] - b[2]).norm()});
        if (diam < tol) {
            const Direction c = b[0] + b[1] + b[2];
            return {BoundaryDirection::from_unit(c), j, diam};
        }
    }
    throw NonConvergence(max_steps, diam);
}

inline LimitResult forward_limit(SamplePath& path, const ModelPoint& x, double tol = kDefaultLimitTol,
                                 std::size_t max_steps = kDefaultMaxSteps) {
    return forward_limit_from(path, 0, x, tol, max_steps);
}

inline HarmonicSample sample_harmonic(const GroupDistribution& mu, const ModelPoint& x, const RngSpec& rng,
                                      std::uint64_t index, double tol = kDefaultLimitTol,
                                      std::size_t max_steps = kDefaultMaxSteps) {
    SamplePath path(mu, 0, rng, index);
    const LimitResult r = forward_limit(path, x, tol, max_steps);
    return {r.direction, r.steps_used, r.achieved_tol, index};
}

inline SpherePoint sphere_point(const ModelPoint& x, const BoundaryDirection& xi, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("sphere_point: radius must be positive");
    return {ray_to_boundary(x, xi).point_at(r), xi, r};
}

struct TrackedEndpoints {
    BoundaryDirection backward;  // lambda^-
    BoundaryDirection forward;   // lambda^+
};

inline TrackedEndpoints tracked_endpoints(BiInfinitePath& path, const ModelPoint& x, double tol,
                                          std::size_t max_steps) {
    const LimitResult plus = forward_limit_from(path.forward, 0, x, tol, max_steps);
    const LimitResult minus = forward_limit_from(path.backward, 0, x, tol, max_steps);
    if (chord(plus.direction, minus.direction) < tol)
        throw DegenerateTracking("tracked geodesic: forward and backward limits coincide");
    return {minus.direction, plus.direction};
}

// Geodesic from lambda^- to lambda^+, anchored at its closest point to x.
inline Geodesic tracked_geodesic(BiInfinitePath& path, const ModelPoint& x, double tol = kDefaultLimitTol,
                                 std::size_t max_steps = kDefaultMaxSteps) {
    const TrackedEndpoints e = tracked_endpoints(path, x, tol, max_steps);
    return Geodesic::anchored(e.backward, e.forward, x);
}

// d(x_k, gamma_omega) for k = 0..m, evaluated in shifted frames:
// d(w_k x, gamma) = d(x, w_k^{-1} gamma), whose endpoints obey
//   xi_k = g_{k+1} xi_{k+1}  (started from the converged limit of the path shifted by m),
//   eta_k = g_k^{-1} eta_{k-1}.
// Both recursions contract errors; evaluating w_k x directly does not.
inline std::vector<double> tracked_distances(BiInfinitePath& path, const ModelPoint& x, std::size_t m,
                                             double tol = kDefaultLimitTol,
                                             std::size_t max_steps = kDefaultMaxSteps) {
    std::vector<BoundaryDirection> xi;
    xi.reserve(m + 1);
    xi.push_back(forward_limit_from(path.forward, m, x, tol, max_steps).direction);
    for (std::size_t k = m; k-- > 0;) xi.push_back(path.forward.element(k + 1).apply(xi.back()));
    std::reverse(xi.begin(), xi.end());

    const GroupDistribution& mu = path.forward.distribution();
    std::vector<Isometry> inverses;
    for (const Atom& a : mu.atoms()) inverses.push_back(a.element.inverse());

    BoundaryDirection eta = forward_limit_from(path.backward, 0, x, tol, max_steps).direction;
    if (chord(eta, xi[0]) < tol) throw DegenerateTracking("tracked geodesic: forward and backward limits coincide");
    std::vector<double> d(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        if (k > 0) eta = inverses[path.forward.increment(k)].apply(eta);
        if (chord(eta, xi[k]) == 0.0) {
            d[k] = INFINITY;
            continue;
        }
        d[k] = dist_to_geodesic(x, Geodesic::from_endpoints(eta, xi[k])).distance;
    }
    return d;
}

}  // namespace stathyp
