#pragma once

#include <algorithm>
#include <numeric>

#include "stathyp/boundary.hpp"
#include "stathyp/gromov.hpp"
#include "stathyp/lattice.hpp"
#include "stathyp/stats.hpp"

namespace stathyp {

// Boundary directions seen from x: harmonic (limit of a fresh walk per index) or the
// uniform-angle control measure (uniform on the unit sphere of directions at x).
class DirectionSampler {
public:
    static DirectionSampler harmonic(GroupDistribution mu, const ModelPoint& x, double tol = kDefaultLimitTol,
                                     std::size_t max_steps = kDefaultMaxSteps) {
        require_same_dim(mu.dim(), x.dim());
        return DirectionSampler(std::move(mu), x, tol, max_steps);
    }
    static DirectionSampler uniform_angle(const ModelPoint& x) { return DirectionSampler(std::nullopt, x, 0.0, 0); }

    bool is_harmonic() const { return mu_.has_value(); }
    const ModelPoint& base() const { return x_; }

    std::optional<BoundaryDirection> operator()(const RngSpec& rng, std::uint64_t index) const {
        if (mu_) {
            try {
                return sample_harmonic(*mu_, x_, rng, index, tol_, max_steps_).direction;
            } catch (const NonConvergence&) {
                return std::nullopt;
            }
        }
        auto e = rng.stream(index);
        Direction u(x_.dim());
        for (int i = 0; i < x_.dim(); ++i) u[i] = standard_normal(e);
        return frame_.apply(BoundaryDirection::from_unit(u / u.norm()));
    }

private:
    DirectionSampler(std::optional<GroupDistribution> mu, const ModelPoint& x, double tol, std::size_t steps)
        : mu_(std::move(mu)), x_(x), frame_(Isometry::translation_to(x)), tol_(tol), max_steps_(steps) {}

    std::optional<GroupDistribution> mu_;
    ModelPoint x_;
    Isometry frame_;
    double tol_;
    std::size_t max_steps_;
};

using DirectionPair = std::pair<BoundaryDirection, BoundaryDirection>;

// Pair i draws its two directions from independent substreams.
inline std::optional<DirectionPair> sample_pair(const DirectionSampler& s, const RngSpec& rng, std::uint64_t i) {
    auto a = s(rng.derive(domain::pair_first), i);
    if (!a) return std::nullopt;
    auto b = s(rng.derive(domain::pair_second), i);
    if (!b) return std::nullopt;
    return DirectionPair{*a, *b};
}

inline std::vector<std::optional<DirectionPair>> sample_pairs(const DirectionSampler& s, std::size_t n,
                                                              const RngSpec& rng, unsigned threads) {
    std::vector<std::optional<DirectionPair>> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = sample_pair(s, rng, i); });
    return out;
}

struct CurvePoint {
    double parameter;
    MonteCarloEstimate estimate;
};
using ECurve = std::vector<CurvePoint>;

namespace detail {

inline void check_increasing(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string(what) + " must be non-empty");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
}

// Event grid on [a, b]: a, a + step, ..., and b itself.
inline std::vector<double> event_grid(double a, double b, double step) {
    std::vector<double> t;
    const auto k = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
    for (std::size_t i = 0; i <= k; ++i) t.push_back(a + static_cast<double>(i) * step);
    if (b - t.back() > 1e-9) t.push_back(b);
    return t;
}

// Estimates per parameter from per-sample value rows (nullopt row = failed sample).
inline std::vector<MonteCarloEstimate> summarize_rows(const std::vector<std::optional<std::vector<double>>>& rows,
                                                      std::size_t columns, std::uint64_t seed, std::uint64_t hash) {
    std::vector<MonteCarloEstimate> out;
    for (std::size_t c = 0; c < columns; ++c) {
        std::vector<std::optional<double>> slots(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i]) slots[i] = (*rows[i])[c];
        out.push_back(summarize(slots, seed, hash));
    }
    return out;
}

inline ECurve to_curve(const std::vector<double>& params, const std::vector<MonteCarloEstimate>& est) {
    ECurve c;
    for (std::size_t i = 0; i < params.size(); ++i) c.push_back({params[i], est[i]});
    return c;
}

// Geodesic segment [a, b] with distance queries clamped to the segment.
class Segment {
public:
    Segment(const ModelPoint& a, const ModelPoint& b) : a_(a), len_(distance(a, b)) {
        if (len_ >= tol::geom) g_ = geodesic_between(a, b);
    }
    double distance_to(const ModelPoint& p) const {
        if (!g_) return distance(p, a_);
        return distance(p, g_->point_at(std::clamp(g_->closest_parameter(p), 0.0, len_)));
    }

private:
    ModelPoint a_;
    double len_;
    std::optional<Geodesic> g_;
};

}  // namespace detail

// d(x'_r, x''_r)/r over pairs of harmonic rays; one set of pairs is shared by all radii.
inline ECurve estimate_E_curve(const DirectionSampler& s, const std::vector<double>& radii, std::size_t n,
                               const RngSpec& rng, const EstimatorOptions& opt = {}) {
    detail::check_increasing(radii, "radii");
    if (radii.front() <= 0.0) throw std::invalid_argument("radii must be positive");
    if (n < 2) throw std::invalid_argument("estimate_E: N must be >= 2");
    const ModelPoint& x = s.base();
    std::vector<std::optional<std::vector<double>>> rows(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const auto p = sample_pair(s, rng, i);
        if (!p) return;
        const Geodesic a = ray_to_boundary(x, p->first), b = ray_to_boundary(x, p->second);
        std::vector<double> v;
        for (double r : radii) v.push_back(distance(a.point_at(r), b.point_at(r)) / r);
        rows[i] = std::move(v);
    });
    auto est = detail::summarize_rows(rows, radii.size(), rng.master_seed(), opt.config_hash);
    check_failures(est.front().n_failures, n, "estimate_E");
    return detail::to_curve(radii, est);
}

inline MonteCarloEstimate estimate_E(const DirectionSampler& s, double r, std::size_t n, const RngSpec& rng,
                                     const EstimatorOptions& opt = {}) {
    return estimate_E_curve(s, {r}, n, rng, opt).front().estimate;
}

// d(x, w_n x)/n over N forward paths.
inline MonteCarloEstimate estimate_drift(const GroupDistribution& mu, const ModelPoint& x, std::size_t steps,
                                         std::size_t n, const RngSpec& rng, const EstimatorOptions& opt = {}) {
    if (steps < 1) throw std::invalid_argument("estimate_drift: n must be >= 1");
    const RngSpec paths = rng.derive(domain::paths);
    std::vector<std::optional<double>> slots(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        SamplePath p(mu, steps, paths, i);
        slots[i] = distance(x, p.position(steps, x)) / static_cast<double>(steps);
    });
    return summarize(slots, rng.master_seed(), opt.config_hash);
}

struct RecurrencePoint {
    double R;
    MonteCarloEstimate frequency;  // share of k in 0..n with d(x_k, gamma) < R/3
    MonteCarloEstimate lambda;     // share of paths with d(x_0, gamma) < R/3, i.e. h(Lambda_R)
};

inline std::vector<RecurrencePoint> recurrence_curve(const GroupDistribution& mu, const ModelPoint& x,
                                                     const std::vector<double>& R_values, std::size_t steps,
                                                     std::size_t n, const RngSpec& rng,
                                                     const EstimatorOptions& opt = {}) {
    detail::check_increasing(R_values, "R values");
    if (R_values.front() <= 0.0) throw std::invalid_argument("R must be positive");
    const RngSpec paths = rng.derive(domain::paths);
    std::vector<std::optional<std::vector<double>>> dist(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        try {
            BiInfinitePath p = sample_bi_infinite(mu, std::max<std::size_t>(steps, 1), paths, i);
            dist[i] = tracked_distances(p, x, steps, opt.tol, opt.max_steps);
        } catch (const NonConvergence&) {
        } catch (const DegenerateTracking&) {
        }
    });
    std::vector<RecurrencePoint> out;
    for (double R : R_values) {
        std::vector<std::optional<double>> freq(n), lam(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!dist[i]) continue;
            const auto& d = *dist[i];
            const auto hits = std::count_if(d.begin(), d.end(), [&](double v) { return v < R / 3.0; });
            freq[i] = static_cast<double>(hits) / static_cast<double>(d.size());
            lam[i] = d[0] < R / 3.0 ? 1.0 : 0.0;
        }
        out.push_back({R, summarize(freq, rng.master_seed(), opt.config_hash),
                       summarize(lam, rng.master_seed(), opt.config_hash)});
    }
    check_failures(out.front().lambda.n_failures, n, "recurrence");
    return out;
}

inline RecurrencePoint recurrence_frequency(const GroupDistribution& mu, const ModelPoint& x, double R,
                                            std::size_t steps, std::size_t n, const RngSpec& rng,
                                            const EstimatorOptions& opt = {}) {
    return recurrence_curve(mu, x, {R}, steps, n, rng, opt).front();
}

// Separation event: d(x'_t, x''_t) >= M on the event grid of [eta r, r]. The map
// t -> d(x'_t, x''_t) is 2-Lipschitz, so grid misclassification needs a margin below 2 delta.
inline bool separated(const Geodesic& a, const Geodesic& b, double M, double eta, double r, double delta) {
    for (double t : detail::event_grid(eta * r, r, delta))
        if (!(distance(a.point_at(t), b.point_at(t)) >= M)) return false;
    return true;
}

inline ECurve separation_curve(const DirectionSampler& s, double M, double eta, const std::vector<double>& radii,
                               std::size_t n, double delta, const RngSpec& rng, const EstimatorOptions& opt = {}) {
    if (!(M >= 0.0)) throw std::invalid_argument("separation: M must be >= 0");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("separation: eta must lie in (0,1)");
    if (!(delta > 0.0)) throw std::invalid_argument("separation: delta must be positive");
    detail::check_increasing(radii, "radii");
    if (radii.front() <= 0.0) throw std::invalid_argument("radii must be positive");
    const ModelPoint& x = s.base();
    std::vector<std::optional<std::vector<double>>> rows(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const auto p = sample_pair(s, rng, i);
        if (!p) return;
        const Geodesic a = ray_to_boundary(x, p->first), b = ray_to_boundary(x, p->second);
        std::vector<double> v;
        for (double r : radii) v.push_back(separated(a, b, M, eta, r, delta) ? 1.0 : 0.0);
        rows[i] = std::move(v);
    });
    auto est = detail::summarize_rows(rows, radii.size(), rng.master_seed(), opt.config_hash);
    check_failures(est.front().n_failures, n, "separation");
    return detail::to_curve(radii, est);
}

inline MonteCarloEstimate separation_probability(const DirectionSampler& s, double M, double eta, double r,
                                                 std::size_t n, double delta, const RngSpec& rng,
                                                 const EstimatorOptions& opt = {}) {
    return separation_curve(s, M, eta, {r}, n, delta, rng, opt).front().estimate;
}

// Thickness proportions of [x, x'_t] for many t from one pass of thick flags along the ray.
class RayThickness {
public:
    RayThickness(const Geodesic& ray, double t_max, const ThinOracle& oracle, double grid)
        : ray_(ray), oracle_(oracle), grid_(grid) {
        const auto flags = thick_flags(ray, 0.0, t_max, oracle, grid);
        step_ = t_max / static_cast<double>(flags.size());
        prefix_.assign(flags.size() + 1, 0);
        for (std::size_t k = 0; k < flags.size(); ++k) prefix_[k + 1] = prefix_[k] + flags[k];
    }

    double proportion(double t) const {
        const double cells = t / step_;
        const double k = std::round(cells);
        // same cells as thickness_proportion(ray, 0, t) when t is on the flag grid
        if (std::abs(cells - k) < 1e-9 && k >= 1 && std::abs(step_ - grid_) < 1e-12 &&
            k < static_cast<double>(prefix_.size()))
            return static_cast<double>(prefix_[static_cast<std::size_t>(k)]) / k;
        return thickness_proportion(ray_, 0.0, t, oracle_, grid_);
    }

private:
    Geodesic ray_;
    ThinOracle oracle_;
    double grid_, step_;
    std::vector<std::size_t> prefix_;
};

inline bool thick_event(const RayThickness& rt, double theta, double eta, double r, double delta) {
    for (double t : detail::event_grid(eta * r, r, delta))
        if (!(rt.proportion(t) >= theta)) return false;
    return true;
}

inline ECurve thickness_curve(const DirectionSampler& s, const ThinOracle& oracle, double theta, double eta,
                              const std::vector<double>& radii, std::size_t n, double delta, double grid,
                              const RngSpec& rng, const EstimatorOptions& opt = {}) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("thickness: theta must lie in (0,1)");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("thickness: eta must lie in (0,1)");
    if (!(delta > 0.0) || !(grid > 0.0)) throw std::invalid_argument("thickness: grid steps must be positive");
    detail::check_increasing(radii, "radii");
    if (radii.front() <= 0.0) throw std::invalid_argument("radii must be positive");
    const ModelPoint& x = s.base();
    const RngSpec first = rng.derive(domain::pair_first);
    std::vector<std::optional<std::vector<double>>> rows(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const auto xi = s(first, i);
        if (!xi) return;
        const RayThickness rt(ray_to_boundary(x, *xi), radii.back(), oracle, grid);
        std::vector<double> v;
        for (double r : radii) v.push_back(thick_event(rt, theta, eta, r, delta) ? 1.0 : 0.0);
        rows[i] = std::move(v);
    });
    auto est = detail::summarize_rows(rows, radii.size(), rng.master_seed(), opt.config_hash);
    check_failures(est.front().n_failures, n, "thickness");
    return detail::to_curve(radii, est);
}

inline MonteCarloEstimate thickness_probability(const DirectionSampler& s, const ThinOracle& oracle, double theta,
                                                double eta, double r, std::size_t n, const RngSpec& rng,
                                                double delta = kDefaultEventStep, double grid = kDefaultThickGrid,
                                                const EstimatorOptions& opt = {}) {
    return thickness_curve(s, oracle, theta, eta, {r}, n, delta, grid, rng, opt).front().estimate;
}

struct ShadowPoint {
    double distance;
    MonteCarloEstimate max_mass;  // estimate for the center with the largest mass
    std::vector<double> masses;   // per center, in center index order
};

// Shadow masses nu(shad_x(y, tau)) for centers y at each distance. Center directions and
// boundary samples are shared across distances.
inline std::vector<ShadowPoint> shadow_decay(const DirectionSampler& s, const std::vector<double>& distances,
                                             double tau, std::size_t n_dir, std::size_t n_boundary,
                                             const RngSpec& rng, const EstimatorOptions& opt = {}) {
    if (!(tau >= 0.0)) throw std::invalid_argument("shadow: tau must be >= 0");
    detail::check_increasing(distances, "distances");
    if (distances.front() < 0.0) throw std::invalid_argument("distances must be >= 0");
    if (n_dir < 1 || n_boundary < 2) throw std::invalid_argument("shadow: need N_dir >= 1, N_boundary >= 2");
    const ModelPoint& x = s.base();
    std::vector<std::optional<BoundaryDirection>> centers(n_dir), xis(n_boundary);
    const RngSpec rc = rng.derive(domain::shadow_centers), rb = rng.derive(domain::shadow_boundary);
    parallel_for(n_dir, opt.threads, [&](std::size_t j) { centers[j] = s(rc, j); });
    parallel_for(n_boundary, opt.threads, [&](std::size_t i) { xis[i] = s(rb, i); });
    const auto cfail = static_cast<std::size_t>(std::count(centers.begin(), centers.end(), std::nullopt));
    const auto bfail = static_cast<std::size_t>(std::count(xis.begin(), xis.end(), std::nullopt));
    check_failures(cfail, n_dir, "shadow centers");
    check_failures(bfail, n_boundary, "shadow boundary samples");

    std::vector<ShadowPoint> out;
    for (double d : distances) {
        ShadowPoint sp{d, {}, {}};
        std::vector<MonteCarloEstimate> est(n_dir);
        std::vector<bool> ok(n_dir, false);
        parallel_for(n_dir, opt.threads, [&](std::size_t j) {
            if (!centers[j]) return;
            const ModelPoint y = d > 0.0 ? sphere_point(x, *centers[j], d).point : x;
            std::vector<std::optional<double>> slots(n_boundary);
            for (std::size_t i = 0; i < n_boundary; ++i)
                if (xis[i]) slots[i] = in_shadow(x, y, tau, *xis[i]) ? 1.0 : 0.0;
            est[j] = summarize(slots, rng.master_seed(), opt.config_hash);
            ok[j] = true;
        });
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < n_dir; ++j) {
            if (!ok[j]) continue;
            sp.masses.push_back(est[j].mean);
            if (!best || est[j].mean > est[*best].mean) best = j;
        }
        sp.max_mass = est[*best];
        sp.max_mass.n_failures += cfail;
        out.push_back(std::move(sp));
    }
    return out;
}

struct ExceptionConfig {
    std::size_t n = 0;
    double R = 0.0, p = 0.0, rho = 0.0, D = 0.0, c = 0.0;
    double A_hat = 0.0, a = 0.0;
    std::size_t m_max = 0;  // 0 means 4n

    std::size_t horizon() const { return m_max == 0 ? 4 * n : m_max; }

    void validate() const {
        if (n < 1) throw std::invalid_argument("exceptions: n must be >= 1");
        if (!(R > 0.0)) throw std::invalid_argument("exceptions: R must be positive");
        if (!(0.0 < rho && rho < p && p < 1.0)) throw std::invalid_argument("exceptions: need 0 < rho < p < 1");
        if (!(D > 0.0)) throw std::invalid_argument("exceptions: D must be positive");
        if (!(c > 0.0)) throw std::invalid_argument("exceptions: c must be positive");
        if (!(0.0 < a && a < A_hat)) throw std::invalid_argument("exceptions: need 0 < a < A_hat");
        if (horizon() < n) throw std::invalid_argument("exceptions: need n <= m_max");
    }
};

struct ExceptionRates {
    MonteCarloEstimate e1, e2, e3;
    double C = 0.0;  // exact E[b^D]
};

// Exact C = sum_g mu(g) d(x, gx) 1[d(x, gx) > D].
inline double truncated_step_mean(const GroupDistribution& mu, const ModelPoint& x, double D) {
    double c = 0.0;
    for (const Atom& at : mu.atoms()) {
        const double s = distance(x, at.element.apply(x));
        if (s > D) c += at.weight * s;
    }
    return c;
}

// Memberships with "for some m >= n" truncated to m in [n, m_max]:
//   E1: (1/m) #{1 <= k <= m : d(x_k, gamma) < R/3} < p - rho,
//   E2: (1/m) sum_{i <= m} b_i^D > C + c,
//   E3: d(x, x_m) outside ((A - a) m, (A + a) m).
inline ExceptionRates exception_rates(const GroupDistribution& mu, const ModelPoint& x, const ExceptionConfig& cfg,
                                      std::size_t n, const RngSpec& rng, const EstimatorOptions& opt = {}) {
    cfg.validate();
    const std::size_t mmax = cfg.horizon();
    const double C = truncated_step_mean(mu, x, cfg.D);
    std::vector<double> step_len;
    for (const Atom& at : mu.atoms()) step_len.push_back(distance(x, at.element.apply(x)));
    const RngSpec paths = rng.derive(domain::paths);
    std::vector<std::optional<std::array<double, 3>>> rows(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        BiInfinitePath p = sample_bi_infinite(mu, mmax, paths, i);
        std::vector<double> d;
        try {
            d = tracked_distances(p, x, mmax, opt.tol, opt.max_steps);
        } catch (const NonConvergence&) {
            return;
        } catch (const DegenerateTracking&) {
            return;
        }
        bool e1 = false, e2 = false, e3 = false;
        double hits = 0.0, bsum = 0.0;
        for (std::size_t m = 1; m <= mmax; ++m) {
            hits += d[m] < cfg.R / 3.0 ? 1.0 : 0.0;
            const double s = step_len[p.forward.increment(m)];
            bsum += s > cfg.D ? s : 0.0;
            if (m < cfg.n) continue;
            const double md = static_cast<double>(m);
            e1 = e1 || hits / md < cfg.p - cfg.rho;
            e2 = e2 || bsum / md > C + cfg.c;
            const double dm = distance(x, p.forward.position(m, x));
            e3 = e3 || !((cfg.A_hat - cfg.a) * md < dm && dm < (cfg.A_hat + cfg.a) * md);
        }
        rows[i] = std::array<double, 3>{e1 ? 1.0 : 0.0, e2 ? 1.0 : 0.0, e3 ? 1.0 : 0.0};
    });
    std::array<std::vector<std::optional<double>>, 3> slots;
    for (auto& s : slots) s.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        if (rows[i])
            for (int k = 0; k < 3; ++k) slots[k][i] = (*rows[i])[k];
    ExceptionRates out;
    out.e1 = summarize(slots[0], rng.master_seed(), opt.config_hash);
    out.e2 = summarize(slots[1], rng.master_seed(), opt.config_hash);
    out.e3 = summarize(slots[2], rng.master_seed(), opt.config_hash);
    out.C = C;
    check_failures(out.e1.n_failures, n, "exceptions");
    return out;
}

// Every grid point of [x, x'] with parameter in [from, to] lies within C of [x, x''] u [x', x''].
inline bool tripod_check(const ModelPoint& x, const ModelPoint& x1, const ModelPoint& x2, double C, double delta,
                         double from = 0.0, double to = INFINITY) {
    if (!(C > 0.0) || !(delta > 0.0)) throw std::invalid_argument("tripod_check: need C > 0 and delta > 0");
    const double len = distance(x, x1);
    const double hi = std::min(to, len), lo = std::max(from, 0.0);
    const detail::Segment s0(x, x2), s1(x1, x2);
    auto near = [&](const ModelPoint& q) { return s0.distance_to(q) <= C || s1.distance_to(q) <= C; };
    if (len < tol::geom) return near(x);
    const Geodesic side = geodesic_between(x, x1);
    for (double t : detail::event_grid(lo, std::max(lo, hi), delta))
        if (!near(side.point_at(t))) return false;
    return true;
}

struct MechanismReport {
    std::size_t pairs = 0;       // successfully sampled pairs
    std::size_t qualifying = 0;  // passing separation, thickness and the tripod check
    std::size_t violations = 0;  // qualifying pairs with d(x', x'') < (2 - 4 eta) r - 2C
    std::size_t failures = 0;
    double min_margin = INFINITY;  // min over qualifying pairs of d(x', x'') - ((2 - 4 eta) r - 2C)
};

// Lower-bound mechanism: separation with M = 3C, thickness of both rays, and the tripod
// check along I = [x'_{eta r}, x'_{2 eta r}] force d(x'_r, x''_r) >= (2 - 4 eta) r - 2C.
inline MechanismReport mechanism_check(const DirectionSampler& s, const ThinOracle& oracle, double theta, double eta,
                                       double r, double C, std::size_t n, const RngSpec& rng,
                                       double delta = kDefaultEventStep, double grid = kDefaultThickGrid,
                                       const EstimatorOptions& opt = {}) {
    if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("mechanism: eta must lie in (0, 1/2)");
    const ModelPoint& x = s.base();
    const double bound = (2.0 - 4.0 * eta) * r - 2.0 * C;
    std::vector<std::optional<std::pair<bool, double>>> rows(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const auto p = sample_pair(s, rng, i);
        if (!p) return;
        const Geodesic a = ray_to_boundary(x, p->first), b = ray_to_boundary(x, p->second);
        const ModelPoint xa = a.point_at(r), xb = b.point_at(r);
        const double margin = distance(xa, xb) - bound;
        const bool qualifies = separated(a, b, 3.0 * C, eta, r, delta) &&
                               thick_event(RayThickness(a, r, oracle, grid), theta, eta, r, delta) &&
                               thick_event(RayThickness(b, r, oracle, grid), theta, eta, r, delta) &&
                               tripod_check(x, xa, xb, C, grid, eta * r, 2.0 * eta * r);
        rows[i] = std::make_pair(qualifies, margin);
    });
    MechanismReport rep;
    for (const auto& row : rows) {
        if (!row) {
            ++rep.failures;
            continue;
        }
        ++rep.pairs;
        if (!row->first) continue;
        ++rep.qualifying;
        rep.min_margin = std::min(rep.min_margin, row->second);
        if (row->second < 0.0) ++rep.violations;
    }
    check_failures(rep.failures, n, "mechanism");
    return rep;
}

}  // namespace stathyp
