#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "stathyp/geodesic.hpp"
#include "stathyp/rng.hpp"

namespace stathyp {

class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Atom {
    std::string label;
    Isometry element;
    double weight;
};

// Finitely supported probability measure on Isometry(H^n). Copies share the atoms.
class GroupDistribution {
public:
    explicit GroupDistribution(std::vector<Atom> atoms) {
        if (atoms.empty()) throw InvalidDistribution("distribution: at least one atom required");
        std::set<std::string> labels;
        double total = 0.0;
        const int n = atoms.front().element.dim();
        for (const Atom& a : atoms) {
            if (!labels.insert(a.label).second)
                throw InvalidDistribution("distribution: duplicate atom label '" + a.label + "'");
            if (!(a.weight > 0.0) || !std::isfinite(a.weight))
                throw InvalidDistribution("distribution: weight of '" + a.label + "' must be positive");
            if (a.element.dim() != n) throw InvalidDistribution("distribution: atoms of mixed dimension");
            total += a.weight;
        }
        if (std::abs(total - 1.0) > tol::weights)
            throw InvalidDistribution("distribution: weights must sum to 1 within 1e-12 (sum = " +
                                      std::to_string(total) + ")");
        auto impl = std::make_shared<Impl>();
        double acc = 0.0;
        for (const Atom& a : atoms) {
            acc += a.weight;
            impl->cumulative.push_back(acc / total);
        }
        impl->cumulative.back() = 1.0;
        impl->atoms = std::move(atoms);
        impl_ = std::move(impl);
    }

    static GroupDistribution point_mass(const std::string& label, const Isometry& g) {
        return GroupDistribution({Atom{label, g, 1.0}});
    }

    static GroupDistribution uniform(const std::vector<std::pair<std::string, Isometry>>& elems) {
        std::vector<Atom> atoms;
        for (const auto& [label, g] : elems) atoms.push_back({label, g, 1.0 / static_cast<double>(elems.size())});
        return GroupDistribution(std::move(atoms));
    }

    std::size_t size() const { return impl_->atoms.size(); }
    const Atom& operator[](std::size_t i) const { return impl_->atoms[i]; }
    const std::vector<Atom>& atoms() const { return impl_->atoms; }
    int dim() const { return impl_->atoms.front().element.dim(); }

    std::uint32_t sample(RngSpec::Engine& e) const {
        const double u = uniform01(e);
        const auto& c = impl_->cumulative;
        const auto it = std::upper_bound(c.begin(), c.end(), u);
        return static_cast<std::uint32_t>(std::min<std::size_t>(it - c.begin(), c.size() - 1));
    }

private:
    struct Impl {
        std::vector<Atom> atoms;
        std::vector<double> cumulative;
    };
    std::shared_ptr<const Impl> impl_;
};

namespace detail {
inline std::string inverse_label(const std::string& label) {
    const std::string suffix = "^-1";
    if (label.size() > suffix.size() && label.compare(label.size() - suffix.size(), suffix.size(), suffix) == 0)
        return label.substr(0, label.size() - suffix.size());
    return label + suffix;
}
}  // namespace detail

// mu^(g) = mu(g^{-1}); atom i of the result is the inverse of atom i of mu.
inline GroupDistribution reflect(const GroupDistribution& mu) {
    std::vector<Atom> atoms;
    for (const Atom& a : mu.atoms()) atoms.push_back({detail::inverse_label(a.label), a.element.inverse(), a.weight});
    return GroupDistribution(std::move(atoms));
}

inline double step_moment(const GroupDistribution& mu, const ModelPoint& x) {
    double s = 0.0;
    for (const Atom& a : mu.atoms()) s += a.weight * distance(x, a.element.apply(x));
    return s;
}

// Translation length of a loxodromic element, 0 otherwise, and its fixed points.
struct Classification {
    double translation_length = 0.0;
    std::optional<BoundaryDirection> attracting, repelling;
};

// Uses g^1024 rather than eigenvalues: parabolic Jordan blocks perturb eigenvalues by
// ~eps^(1/(n+1)), while d(o, g^k o) grows only like 2 log k for them.
inline Classification classify(const Isometry& g) {
    Classification out;
    Isometry fwd = g, bwd = g.inverse();
    for (int i = 0; i < 10; ++i) {
        fwd = fwd * fwd;
        bwd = bwd * bwd;
    }
    const ModelPoint o = ModelPoint::origin(g.dim());
    const ModelPoint pf = fwd.apply(o), pb = bwd.apply(o);
    const double rate = pf.radius() / 1024.0;
    if (rate < 0.05) return out;
    out.translation_length = rate;
    out.attracting = BoundaryDirection::from_unit(pf.direction());
    out.repelling = BoundaryDirection::from_unit(pb.direction());
    return out;
}

// Non-elementarity diagnostic: searches words of length <= 4 for two loxodromics
// with distinct fixed-point pairs. Empty result means the hypothesis was confirmed.
inline std::vector<std::string> diagnostics(const GroupDistribution& mu) {
    std::vector<Isometry> words;
    std::vector<Isometry> layer;
    for (const Atom& a : mu.atoms()) layer.push_back(a.element);
    words = layer;
    for (int len = 2; len <= 4 && words.size() < 4000; ++len) {
        std::vector<Isometry> next;
        for (const Isometry& w : layer)
            for (const Atom& a : mu.atoms()) next.push_back(w * a.element);
        words.insert(words.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    std::vector<std::pair<BoundaryDirection, BoundaryDirection>> axes;
    for (const Isometry& w : words) {
        const Classification c = classify(w);
        if (c.translation_length <= 0.0 || !c.attracting || !c.repelling) continue;
        for (const auto& [a, r] : axes) {
            const bool same = (chord(a, *c.attracting) < 1e-6 && chord(r, *c.repelling) < 1e-6) ||
                              (chord(a, *c.repelling) < 1e-6 && chord(r, *c.attracting) < 1e-6);
            if (!same) return {};
        }
        if (axes.empty()) axes.emplace_back(*c.attracting, *c.repelling);
    }
    return {"distribution may be elementary: no two loxodromic elements with distinct axes among words of length <= 4"};
}

// Random product w_k = g_1 ... g_k. products/renorm_log cover k = 0..n; further
// increments are drawn on demand from the same stream (extend / increment).
class SamplePath {
public:
    SamplePath(GroupDistribution mu, std::size_t n, const RngSpec& rng, std::uint64_t index)
        : mu_(std::move(mu)), engine_(rng.stream(index)), seed_(rng.master_seed()), index_(index) {
        products_.push_back(Isometry::identity(mu_.dim()));
        extend(n);
    }

    std::size_t length() const { return products_.size() - 1; }
    const GroupDistribution& distribution() const { return mu_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

    // Atom index of g_k, k >= 1; draws further increments as needed.
    std::uint32_t increment(std::size_t k) {
        while (increments_.size() < k) increments_.push_back(mu_.sample(engine_));
        return increments_[k - 1];
    }
    const Isometry& element(std::size_t k) { return mu_[increment(k)].element; }
    const std::vector<std::uint32_t>& increments() const { return increments_; }

    const Isometry& product(std::size_t k) const { return products_.at(k); }
    // Accumulated log of the factors divided out of the 2x2 product:
    // the determinant-one product is e^{renorm_log(k)} * product(k).sl2().
    double renorm_log(std::size_t k) const { return products_.at(k).sl2_log(); }
    ModelPoint position(std::size_t k, const ModelPoint& x) const { return product(k).apply(x); }

    void extend(std::size_t n) {
        while (length() < n) {
            const std::size_t k = length() + 1;
            Isometry w = products_.back() * element(k);
            if (k % kReorthPeriod == 0) w.reorthogonalize();
            products_.push_back(std::move(w));
        }
    }

private:
    GroupDistribution mu_;
    RngSpec::Engine engine_;
    std::uint64_t seed_, index_;
    std::vector<std::uint32_t> increments_;
    std::vector<Isometry> products_;
};

inline SamplePath sample_path(const GroupDistribution& mu, std::size_t n, const RngSpec& rng, std::uint64_t index) {
    return SamplePath(mu, n, rng, index);
}

// Forward half under mu, backward half under reflect(mu), on independent domains.
// Position x_k = w_k x for k >= 0 and x_{-k} = (backward w_k) x.
struct BiInfinitePath {
    SamplePath forward;
    SamplePath backward;
    std::size_t window;

    ModelPoint position(long k, const ModelPoint& x) const {
        if (k >= 0) return forward.position(static_cast<std::size_t>(k), x);
        return backward.position(static_cast<std::size_t>(-k), x);
    }
};

inline BiInfinitePath sample_bi_infinite(const GroupDistribution& mu, std::size_t n, const RngSpec& rng,
                                         std::uint64_t index) {
    if (n < 1) throw std::invalid_argument("sample_bi_infinite: n must be >= 1");
    return BiInfinitePath{SamplePath(mu, n, rng.derive(domain::forward), index),
                          SamplePath(reflect(mu), n, rng.derive(domain::backward), index), n};
}

}  // namespace stathyp

namespace stathyp::builtin {

inline Sl2 sl2(double a, double b, double c, double d) {
    Sl2 g;
    g << a, b, c, d;
    return g;
}

// Uniform on {T, T^-1, S} in PSL(2,Z).
inline GroupDistribution psl2z_uniform_tts() {
    return GroupDistribution::uniform({{"T", Isometry::from_sl2(sl2(1, 1, 0, 1))},
                                       {"T^-1", Isometry::from_sl2(sl2(1, -1, 0, 1))},
                                       {"S", Isometry::from_sl2(sl2(0, -1, 1, 0))}});
}

// Point mass on z -> e^l z, translation length l along the imaginary axis.
inline GroupDistribution hyperbolic_pointmass(double length) {
    return GroupDistribution::point_mass(
        "A", Isometry::from_sl2(sl2(std::exp(0.5 * length), 0, 0, std::exp(-0.5 * length))));
}

inline GroupDistribution parabolic_pointmass() {
    return GroupDistribution::point_mass("T", Isometry::from_sl2(sl2(1, 1, 0, 1)));
}

}  // namespace stathyp::builtin
