#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stathyp/geodesic.hpp"

namespace stathyp {

// Standard fundamental domain of PSL2(Z): |re| <= 1/2, |z| >= 1, with re = -1/2 and the
// left half of the unit arc included, re = +1/2 and the right half excluded.
inline bool in_fundamental_domain(const HalfPlanePoint& z) {
    const double n2 = z.re * z.re + z.im * z.im;
    if (z.re < -0.5 || z.re >= 0.5) return false;
    if (n2 < 1.0) return false;
    return !(n2 == 1.0 && z.re > 0.0);
}

struct ModularReduction {
    HalfPlanePoint point;
    std::string word;  // "S T^-2" means point = S T^-2 . input
    Sl2 matrix = Sl2::Identity();
};

namespace detail {

inline void push_move(std::vector<std::pair<char, long>>& moves, char m, long k) {
    if (!moves.empty() && moves.back().first == m) {
        moves.back().second += k;
        if (m == 'S') moves.back().second %= 2;
        if (moves.back().second == 0) moves.pop_back();
    } else if (k != 0) {
        moves.emplace_back(m, k);
    }
}

inline std::string format_word(const std::vector<std::pair<char, long>>& moves) {
    std::string out;
    for (auto it = moves.rbegin(); it != moves.rend(); ++it) {
        if (!out.empty()) out += ' ';
        if (it->first == 'S') {
            out += 'S';
        } else {
            out += 'T';
            if (it->second != 1) out += "^" + std::to_string(it->second);
        }
    }
    return out;
}

// One reduction move on rows of a frame (left multiplication). Returns false when reduced.
template <class Moves>
inline bool modular_step(double& re, double& im, Sl2& m, Moves& moves) {
    const double k = std::floor(re + 0.5);
    if (k != 0.0) {
        re -= k;
        m.row(0) -= k * m.row(1);
        push_move(moves, 'T', -static_cast<long>(k));
        return true;
    }
    const double n2 = re * re + im * im;
    if (n2 < 1.0 || (n2 == 1.0 && re > 0.0)) {
        re = -re / n2;
        im = im / n2;
        const Eigen::RowVector2d top = m.row(0);
        m.row(0) = -m.row(1);
        m.row(1) = top;
        push_move(moves, 'S', 1);
        return true;
    }
    return false;
}

}  // namespace detail

inline ModularReduction reduce_modular(const HalfPlanePoint& z) {
    if (!(z.im > 0.0) || !std::isfinite(z.re) || !std::isfinite(z.im))
        throw InvariantViolation("reduce_modular: point must lie in the upper half-plane");
    ModularReduction out;
    std::vector<std::pair<char, long>> moves;
    double re = z.re, im = z.im;
    int guard = 0;
    while (detail::modular_step(re, im, out.matrix, moves)) {
        if (++guard > kModularMoveGuard) throw GeometryError("reduce_modular: move guard exceeded");
    }
    out.point = {re, im};
    out.word = detail::format_word(moves);
    return out;
}

struct ThickQuery {
    bool is_thick;
    double excursion_height;  // reduced height for the modular kind, NaN otherwise
};

// Thick-part oracle. Modular kind: thick iff reduced height <= h (h plays the role of 1/eps,
// a closed loop at reduced height y having length ~1/y).
class ThinOracle {
public:
    enum class Kind { ModularCusp, AllThick, Predicate };

    static ThinOracle modular_cusp(double h) {
        if (!(h > 0.0)) throw std::invalid_argument("modular-cusp oracle needs h > 0");
        ThinOracle o;
        o.kind_ = Kind::ModularCusp;
        o.h_ = h;
        return o;
    }
    static ThinOracle all_thick() {
        ThinOracle o;
        o.kind_ = Kind::AllThick;
        return o;
    }
    static ThinOracle predicate(std::function<bool(const ModelPoint&)> f) {
        ThinOracle o;
        o.kind_ = Kind::Predicate;
        o.pred_ = std::move(f);
        return o;
    }

    Kind kind() const { return kind_; }
    double h() const { return h_; }

    ThickQuery query(const ModelPoint& x) const {
        switch (kind_) {
        case Kind::ModularCusp: {
            const double y = reduce_modular(to_half_plane(x)).point.im;
            return {y <= h_, y};
        }
        case Kind::AllThick:
            return {true, std::numeric_limits<double>::quiet_NaN()};
        case Kind::Predicate:
            return {pred_(x), std::numeric_limits<double>::quiet_NaN()};
        }
        return {true, 0.0};
    }

private:
    ThinOracle() = default;
    Kind kind_ = Kind::AllThick;
    double h_ = 0.0;
    std::function<bool(const ModelPoint&)> pred_;
};

inline bool is_thick(const ThinOracle& oracle, const ModelPoint& x) { return oracle.query(x).is_thick; }

// Follows gamma(t) on the modular surface. The frame F with gamma(t) = F . i is advanced by
// right multiplication with diag(e^{d/2}, e^{-d/2}) and kept reduced by integer left moves,
// so far points are located along the geodesic instead of reduced from coordinates that
// have lost their precision near the real axis.
class ModularGeodesicTracker {
public:
    ModularGeodesicTracker(const Geodesic& gamma, double t0) {
        if (gamma.dim() != 2) throw DimensionMismatch("modular tracker requires n = 2");
        const Eigen::Vector2d fw = projective_pair(gamma.forward());
        const Eigen::Vector2d bw = projective_pair(gamma.backward());
        Sl2 f;
        f << fw[0], bw[0], fw[1], bw[1];
        if (f.determinant() < 0.0) f.col(1) = -f.col(1);
        const double det = f.determinant();
        if (!(det > 0.0)) throw DegenerateGeodesic("modular tracker: endpoints coincide");
        f /= std::sqrt(det);
        const double tf = gamma.closest_parameter(to_model(mobius(f, HalfPlanePoint{0.0, 1.0})));
        frame_ = f * diag(t0 - tf);
        t_ = t0;
        reduce();
    }

    double parameter() const { return t_; }
    HalfPlanePoint reduced_point() const { return {re_, im_}; }

    void advance(double dt) {
        frame_ = frame_ * diag(dt);
        t_ += dt;
        reduce();
    }

private:
    static Sl2 diag(double s) {
        Sl2 a = Sl2::Zero();
        a(0, 0) = std::exp(0.5 * s);
        a(1, 1) = std::exp(-0.5 * s);
        return a;
    }

    void point_from_frame() {
        const HalfPlanePoint z = mobius(frame_, HalfPlanePoint{0.0, 1.0});
        re_ = z.re;
        im_ = z.im;
    }

    // Moves update the point analytically, as in reduce_modular; recomputing it from the
    // frame after each move could bounce across the unit arc on rounding.
    void reduce() {
        frame_ /= std::sqrt(frame_.determinant());
        point_from_frame();
        std::vector<std::pair<char, long>> moves;
        int guard = 0;
        while (detail::modular_step(re_, im_, frame_, moves)) {
            if (++guard > kModularMoveGuard) throw GeometryError("modular tracker: move guard exceeded");
            moves.clear();
        }
    }

    Sl2 frame_;
    double t_ = 0.0, re_ = 0.0, im_ = 1.0;
};

// Thick flags at the midpoints t0 + (k + 1/2) delta of N = ceil((t1 - t0)/delta) cells.
inline std::vector<bool> thick_flags(const Geodesic& gamma, double t0, double t1, const ThinOracle& oracle,
                                     double delta = kDefaultThickGrid) {
    if (!(t1 > t0)) throw std::invalid_argument("thick_flags: need t1 > t0");
    if (!(delta > 0.0)) throw std::invalid_argument("thick_flags: need delta > 0");
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / delta - 1e-9));
    const double step = (t1 - t0) / static_cast<double>(n);
    std::vector<bool> flags(n);
    if (oracle.kind() == ThinOracle::Kind::AllThick) {
        flags.assign(n, true);
    } else if (oracle.kind() == ThinOracle::Kind::ModularCusp && gamma.dim() == 2) {
        ModularGeodesicTracker tr(gamma, t0 + 0.5 * step);
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) tr.advance(step);
            flags[k] = tr.reduced_point().im <= oracle.h();
        }
    } else {
        for (std::size_t k = 0; k < n; ++k)
            flags[k] = oracle.query(gamma.point_at(t0 + (static_cast<double>(k) + 0.5) * step)).is_thick;
    }
    return flags;
}

// Fraction of thick cells. Each thick/thin switch along the segment misclassifies at most
// one cell, so the error is at most (number of switches) / N.
inline double thickness_proportion(const Geodesic& gamma, double t0, double t1, const ThinOracle& oracle,
                                   double delta = kDefaultThickGrid) {
    const auto flags = thick_flags(gamma, t0, t1, oracle, delta);
    std::size_t thick = 0;
    for (bool f : flags) thick += f;
    return static_cast<double>(thick) / static_cast<double>(flags.size());
}

struct ExcursionReport {
    std::vector<std::pair<double, double>> intervals;
    double total_length = 0.0;
};

// Parameters of gamma inside the open ball B(c, rho): |t - t*| < acosh(cosh rho / cosh a).
inline std::optional<std::pair<double, double>> ball_interval(const Geodesic& gamma, const ModelPoint& c,
                                                              double rho) {
    const GeodesicProjection p = dist_to_geodesic(c, gamma);
    if (p.distance >= rho) return std::nullopt;
    const double w = std::acosh(std::cosh(rho) / std::cosh(p.distance));
    return std::make_pair(p.parameter - w, p.parameter + w);
}

// Parts of [t0, t1] outside B(c1, rho) u B(c2, rho).
inline ExcursionReport ball_excursions(const Geodesic& gamma, double t0, double t1, const ModelPoint& c1,
                                       const ModelPoint& c2, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("ball_excursions: need rho > 0");
    if (!(t1 >= t0)) throw std::invalid_argument("ball_excursions: need t1 >= t0");
    std::vector<std::pair<double, double>> inside;
    for (const ModelPoint* c : {&c1, &c2})
        if (auto iv = ball_interval(gamma, *c, rho)) inside.push_back(*iv);
    std::sort(inside.begin(), inside.end());
    ExcursionReport rep;
    double cur = t0;
    for (const auto& [a, b] : inside) {
        if (a > cur) rep.intervals.emplace_back(cur, std::min(a, t1));
        cur = std::max(cur, b);
        if (cur >= t1) break;
    }
    if (cur < t1) rep.intervals.emplace_back(cur, t1);
    std::erase_if(rep.intervals, [](const auto& iv) { return !(iv.second > iv.first); });
    for (const auto& [a, b] : rep.intervals) rep.total_length += b - a;
    return rep;
}

}  // namespace stathyp
