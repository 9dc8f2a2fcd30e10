#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stathyp/selftest.hpp"

// Experiment harness: config parsing and validation, dispatch, results.csv and manifest.json.
namespace stathyp::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "stathyp 0.1.0";
inline const std::vector<std::string> kExperiments{"estimate-e", "separation",  "thickness", "shadow-decay",
                                                    "drift",      "recurrence",  "exceptions", "geom-selftest"};

enum ExitCode { kOk = 0, kIoError = 1, kInvalidConfig = 2, kEstimatorFailure = 3 };

inline std::string experiment_list() {
    std::string s;
    for (const auto& e : kExperiments) s += (s.empty() ? "" : ", ") + e;
    return s;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Builtin names expand to explicit atoms before anything is constructed, so a manifest
// echo rebuilds bit-identical distributions.
inline std::optional<json> expand_builtin(const std::string& name, std::string& err) {
    auto atom = [](const std::string& label, double a, double b, double c, double d, double w) {
        return json{{"label", label}, {"matrix", {{a, b}, {c, d}}}, {"weight", w}};
    };
    if (name == "psl2z-uniform-TTS")
        return json{{"atoms",
                     {atom("T", 1, 1, 0, 1, 1.0 / 3.0), atom("T^-1", 1, -1, 0, 1, 1.0 / 3.0),
                      atom("S", 0, -1, 1, 0, 1.0 / 3.0)}}};
    if (name == "parabolic-pointmass") return json{{"atoms", {atom("T", 1, 1, 0, 1, 1.0)}}};
    const std::string pre = "hyperbolic-pointmass(";
    if (name.rfind(pre, 0) == 0 && name.size() > pre.size() + 1 && name.back() == ')') {
        const std::string arg = name.substr(pre.size(), name.size() - pre.size() - 1);
        char* end = nullptr;
        const double l = std::strtod(arg.c_str(), &end);
        if (end != arg.c_str() + arg.size() || !std::isfinite(l) || !(l > 0.0)) {
            err = "distribution: hyperbolic-pointmass(l) needs a positive length, got '" + arg + "'";
            return std::nullopt;
        }
        return json{{"atoms", {atom("A", std::exp(0.5 * l), 0, 0, std::exp(-0.5 * l), 1.0)}}};
    }
    err = "distribution: unknown builtin '" + name +
          "' (valid: psl2z-uniform-TTS, hyperbolic-pointmass(l), parabolic-pointmass)";
    return std::nullopt;
}

inline std::optional<Isometry> isometry_from_json(const json& m, const std::string& where,
                                                  std::vector<std::string>& diags) {
    if (!m.is_array() || m.empty()) {
        diags.push_back(where + ": matrix must be a square array of numbers");
        return std::nullopt;
    }
    const std::size_t k = m.size();
    Eigen::MatrixXd a(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!m[i].is_array() || m[i].size() != k) {
            diags.push_back(where + ": matrix must be square");
            return std::nullopt;
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (!m[i][j].is_number()) {
                diags.push_back(where + ": matrix entries must be numbers");
                return std::nullopt;
            }
            a(i, j) = m[i][j].get<double>();
        }
    }
    try {
        if (k == 2) return Isometry::from_sl2(a);
        if (k >= 3 && k <= kMaxDim + 1) return Isometry::from_lorentz(a);
        diags.push_back(where + ": matrix must be 2x2 (SL2) or (n+1)x(n+1) Lorentz with 2 <= n <= " +
                        std::to_string(kMaxDim));
    } catch (const std::exception& e) {
        diags.push_back(where + ": " + e.what());
    }
    return std::nullopt;
}

// Reads and checks fields of a JSON object, collecting diagnostics and filling defaults
// into `out` (the normalized echo).
class Fields {
public:
    Fields(const json& in, json& out, std::string prefix, std::vector<std::string>& diags)
        : in_(in), out_(out), prefix_(std::move(prefix)), diags_(diags) {}

    bool has(const std::string& k) const { return in_.contains(k); }
    // Keys any accessor asked about; everything else in the input is unknown.
    const std::set<std::string>& known() const { return known_; }
    void know(const std::string& k) { known_.insert(k); }

    std::optional<double> number(const std::string& k, std::optional<double> def = std::nullopt) {
        know(k);
        if (!in_.contains(k)) {
            if (!def) {
                fail(k, "is required");
                return std::nullopt;
            }
            out_[k] = *def;
            return def;
        }
        if (!in_[k].is_number()) {
            fail(k, "must be a number");
            return std::nullopt;
        }
        const double v = in_[k].get<double>();
        if (!std::isfinite(v)) {
            fail(k, "must be finite");
            return std::nullopt;
        }
        out_[k] = in_[k];
        return v;
    }

    std::optional<std::size_t> count(const std::string& k, std::optional<std::size_t> def = std::nullopt,
                                     std::size_t min = 1) {
        know(k);
        if (!in_.contains(k)) {
            if (!def) {
                fail(k, "is required");
                return std::nullopt;
            }
            out_[k] = *def;
            return def;
        }
        if (!in_[k].is_number_integer() || in_[k].get<long long>() < static_cast<long long>(min)) {
            fail(k, "must be an integer >= " + std::to_string(min));
            return std::nullopt;
        }
        out_[k] = in_[k];
        return in_[k].get<std::size_t>();
    }

    // Non-empty, strictly increasing list of numbers >= lo (> lo when strict).
    std::optional<std::vector<double>> increasing(const std::string& k, double lo, bool strict) {
        know(k);
        if (!in_.contains(k)) {
            fail(k, "is required");
            return std::nullopt;
        }
        const json& a = in_[k];
        if (!a.is_array() || a.empty()) {
            fail(k, "must be a non-empty array of numbers");
            return std::nullopt;
        }
        std::vector<double> v;
        for (const auto& e : a) {
            if (!e.is_number()) {
                fail(k, "must be a non-empty array of numbers");
                return std::nullopt;
            }
            v.push_back(e.get<double>());
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i]) || (strict ? !(v[i] > lo) : !(v[i] >= lo))) {
                fail(k, std::string("entries must be ") + (strict ? "> " : ">= ") + fmt17(lo));
                return std::nullopt;
            }
            if (i > 0 && !(v[i] > v[i - 1])) {
                fail(k, "must be strictly increasing");
                return std::nullopt;
            }
        }
        out_[k] = a;
        return v;
    }

    void fail(const std::string& k, const std::string& msg) { diags_.push_back(prefix_ + k + ": " + msg); }
    void require(bool ok, const std::string& k, const std::string& msg) {
        if (!ok) fail(k, msg);
    }

private:
    const json& in_;
    json& out_;
    std::string prefix_;
    std::vector<std::string>& diags_;
    std::set<std::string> known_;
};

struct ExperimentConfig {
    std::string experiment;
    json echo;  // normalized config: builtins expanded, defaults filled
    std::optional<GroupDistribution> mu;
    ModelPoint base = ModelPoint::origin(2);
    std::uint64_t seed = 0;
    std::string output_dir;
    double tol = kDefaultLimitTol;
    std::size_t max_steps = kDefaultMaxSteps;

    const json& params() const { return echo.at("params"); }
    // Hash of everything that determines the results (output_dir excluded).
    std::uint64_t hash() const {
        json h = echo;
        h.erase("output_dir");
        return fnv1a(h.dump());
    }
};

namespace detail {

inline void parse_distribution(const json& in, ExperimentConfig& cfg, std::vector<std::string>& diags) {
    if (!in.contains("distribution")) {
        diags.push_back("distribution: is required");
        return;
    }
    json spec = in["distribution"];
    if (spec.is_string()) {
        std::string err;
        auto e = expand_builtin(spec.get<std::string>(), err);
        if (!e) {
            diags.push_back(err);
            return;
        }
        spec = *e;
    }
    if (!spec.is_object() || !spec.contains("atoms") || !spec["atoms"].is_array() || spec["atoms"].empty()) {
        diags.push_back("distribution: must be a builtin name or {\"atoms\": [{label, matrix, weight}, ...]}");
        return;
    }
    std::vector<Atom> atoms;
    bool ok = true;
    for (std::size_t i = 0; i < spec["atoms"].size(); ++i) {
        const json& a = spec["atoms"][i];
        const std::string where = "distribution.atoms[" + std::to_string(i) + "]";
        if (!a.is_object() || !a.contains("label") || !a["label"].is_string() || !a.contains("matrix") ||
            !a.contains("weight") || !a["weight"].is_number()) {
            diags.push_back(where + ": needs string label, matrix and numeric weight");
            ok = false;
            continue;
        }
        auto g = isometry_from_json(a["matrix"], where, diags);
        if (!g) {
            ok = false;
            continue;
        }
        atoms.push_back({a["label"].get<std::string>(), *g, a["weight"].get<double>()});
    }
    if (!ok) return;
    try {
        cfg.mu = GroupDistribution(std::move(atoms));
        cfg.echo["distribution"] = spec;
    } catch (const std::exception& e) {
        diags.push_back(std::string("distribution: ") + e.what());
    }
}

inline void parse_base_point(const json& in, ExperimentConfig& cfg, std::vector<std::string>& diags) {
    const int n = cfg.mu ? cfg.mu->dim() : 2;
    if (!in.contains("base_point")) {
        cfg.base = ModelPoint::origin(n);
        cfg.echo["base_point"] = n == 2 ? json{{"re", 0.0}, {"im", 1.0}} : json{{"coords", json::array()}};
        if (n != 2) {
            json c = json::array();
            c.push_back(1.0);
            for (int i = 0; i < n; ++i) c.push_back(0.0);
            cfg.echo["base_point"]["coords"] = c;
        }
        return;
    }
    const json& b = in["base_point"];
    try {
        if (b.is_object() && b.contains("re") && b.contains("im") && b["re"].is_number() && b["im"].is_number()) {
            if (n != 2) throw DimensionMismatch("half-plane base point needs a 2x2 distribution (n = 2)");
            cfg.base = to_model(HalfPlanePoint{b["re"].get<double>(), b["im"].get<double>()});
        } else if (b.is_object() && b.contains("coords") && b["coords"].is_array()) {
            Coords c(b["coords"].size());
            for (std::size_t i = 0; i < b["coords"].size(); ++i) c[i] = b["coords"][i].get<double>();
            cfg.base = ModelPoint::from_coords(c);
            if (cfg.base.dim() != n) throw DimensionMismatch("base point dimension differs from the distribution's");
        } else {
            diags.push_back("base_point: must be {\"re\", \"im\"} or {\"coords\": [x0, ..., xn]}");
            return;
        }
        cfg.echo["base_point"] = b;
    } catch (const std::exception& e) {
        diags.push_back(std::string("base_point: ") + e.what());
    }
}

inline void parse_measure(Fields& f, const json& p, json& out) {
    f.know("measure");
    std::string m = "harmonic";
    if (p.contains("measure")) m = p["measure"].is_string() ? p["measure"].get<std::string>() : "";
    if (m != "harmonic" && m != "uniform-angle") f.fail("measure", "must be \"harmonic\" or \"uniform-angle\"");
    out["measure"] = m;
}

inline void parse_params(const std::string& exp, const json& p, ExperimentConfig& cfg, std::vector<std::string>& d) {
    json out = json::object();
    Fields f(p, out, "params.", d);
    const int n = cfg.mu ? cfg.mu->dim() : 2;
    if (exp == "estimate-e") {
        f.increasing("radii", 0.0, true);
        f.count("N", std::nullopt, 2);
        parse_measure(f, p, out);
    } else if (exp == "drift") {
        f.increasing("n_values", 1.0, false);
        f.count("N");
        if (p.contains("n_values") && p["n_values"].is_array())
            for (const auto& v : p["n_values"])
                if (!v.is_number_integer()) f.fail("n_values", "entries must be integers");
    } else if (exp == "recurrence") {
        f.increasing("R_values", 0.0, true);
        f.count("n");
        f.count("N");
    } else if (exp == "separation") {
        if (auto M = f.number("M")) f.require(*M >= 0.0, "M", "M must be >= 0");
        if (auto eta = f.number("eta")) f.require(*eta > 0.0 && *eta < 1.0, "eta", "η must lie in (0,1)");
        f.increasing("radii", 0.0, true);
        f.count("N");
        if (auto dl = f.number("delta", kDefaultEventStep)) f.require(*dl > 0.0, "delta", "Δ must be > 0");
        parse_measure(f, p, out);
    } else if (exp == "thickness") {
        f.know("oracle");
        if (!p.contains("oracle") || !p["oracle"].is_object() || !p["oracle"].contains("kind")) {
            f.fail("oracle", "must be {\"kind\":\"modular-cusp\",\"h\":...} or {\"kind\":\"all-thick\"}");
        } else {
            const json& o = p["oracle"];
            const std::string kind = o["kind"].is_string() ? o["kind"].get<std::string>() : "";
            if (kind == "modular-cusp") {
                if (!o.contains("h") || !o["h"].is_number() || !(o["h"].get<double>() > 0.0))
                    f.fail("oracle.h", "h must be a number > 0");
                if (n != 2) f.fail("oracle", "modular-cusp needs n = 2");
            } else if (kind != "all-thick") {
                f.fail("oracle.kind", "must be \"modular-cusp\" or \"all-thick\"");
            }
            out["oracle"] = o;
        }
        if (auto th = f.number("theta")) f.require(*th > 0.0 && *th < 1.0, "theta", "θ must lie in (0,1)");
        if (auto eta = f.number("eta")) f.require(*eta > 0.0 && *eta < 1.0, "eta", "η must lie in (0,1)");
        f.increasing("radii", 0.0, true);
        f.count("N");
        if (auto dl = f.number("delta", kDefaultEventStep)) f.require(*dl > 0.0, "delta", "Δ must be > 0");
        if (auto g = f.number("grid", kDefaultThickGrid)) f.require(*g > 0.0, "grid", "grid must be > 0");
        parse_measure(f, p, out);
    } else if (exp == "shadow-decay") {
        f.increasing("distances", 0.0, false);
        if (auto t = f.number("tau")) f.require(*t >= 0.0, "tau", "τ must be >= 0");
        f.count("N_dir");
        f.count("N_boundary", std::nullopt, 2);
    } else if (exp == "exceptions") {
        f.increasing("n_values", 1.0, false);
        f.count("N");
        if (auto R = f.number("R")) f.require(*R > 0.0, "R", "R must be > 0");
        const auto pp = f.number("p"), rho = f.number("rho");
        if (pp && rho) f.require(0.0 < *rho && *rho < *pp && *pp < 1.0, "p", "need 0 < ρ < p < 1");
        if (auto D = f.number("D")) f.require(*D > 0.0, "D", "D must be > 0");
        if (auto c = f.number("c")) f.require(*c > 0.0, "c", "c must be > 0");
        f.count("m_max_factor", 4);
        f.know("A_hat");
        f.know("a");
        const bool auto_a = !p.contains("A_hat") || (p["A_hat"].is_string() && p["A_hat"] == "auto");
        if (auto_a) {
            out["A_hat"] = "auto";
            if (p.contains("a")) f.fail("a", "an absolute a needs a numeric A_hat; use a_fraction with \"auto\"");
        } else if (auto A = f.number("A_hat")) {
            f.require(*A > 0.0, "A_hat", "A_hat must be > 0 or \"auto\"");
            if (p.contains("a"))
                if (auto a = f.number("a")) f.require(*a > 0.0 && *a < *A, "a", "need 0 < a < A_hat");
        }
        if (!p.contains("a"))
            if (auto fr = f.number("a_fraction", 0.5))
                f.require(*fr > 0.0 && *fr < 1.0, "a_fraction", "a_fraction must lie in (0,1)");
        if (p.contains("n_values") && p["n_values"].is_array())
            for (const auto& v : p["n_values"])
                if (!v.is_number_integer()) f.fail("n_values", "entries must be integers");
    } else if (exp == "geom-selftest") {
        if (auto s = f.number("scale", 1.0)) f.require(*s > 0.0, "scale", "scale must be > 0");
    }
    for (auto it = p.begin(); it != p.end(); ++it)
        if (!f.known().count(it.key())) d.push_back("params." + it.key() + ": unknown parameter for " + exp);
    cfg.echo["params"] = out;
}

}  // namespace detail

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

// Parses and validates; on any diagnostic returns nullopt. `run` accepts exactly the configs
// for which this returns a value.
inline std::optional<ExperimentConfig> parse_config(const json& in, const std::string& experiment,
                                                    const Overrides& ov, std::vector<std::string>& diags) {
    if (!in.is_object()) {
        diags.push_back("config: top level must be a JSON object");
        return std::nullopt;
    }
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (cfg.experiment.empty()) {
        if (in.contains("experiment") && in["experiment"].is_string())
            cfg.experiment = in["experiment"].get<std::string>();
        else
            diags.push_back("experiment: not given on the command line or in the config");
    } else if (in.contains("experiment") && in["experiment"] != experiment) {
        diags.push_back("experiment: command line says '" + experiment + "' but the config says " +
                        in["experiment"].dump());
    }
    if (!cfg.experiment.empty() &&
        std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end()) {
        diags.push_back("experiment: unknown experiment '" + cfg.experiment + "' (valid: " + experiment_list() + ")");
        return std::nullopt;
    }
    cfg.echo["experiment"] = cfg.experiment;

    static const std::vector<std::string> top{"experiment", "distribution", "base_point", "seed",
                                              "output_dir", "tol",          "max_steps",  "params"};
    for (auto it = in.begin(); it != in.end(); ++it)
        if (std::find(top.begin(), top.end(), it.key()) == top.end())
            diags.push_back(it.key() + ": unknown top-level key");

    if (cfg.experiment != "geom-selftest" || in.contains("distribution")) detail::parse_distribution(in, cfg, diags);
    if (cfg.experiment != "geom-selftest" || in.contains("base_point")) detail::parse_base_point(in, cfg, diags);

    json scalars = json::object();
    Fields f(in, scalars, "", diags);
    if (ov.seed) {
        cfg.seed = *ov.seed;
    } else if (in.contains("seed")) {
        if (in["seed"].is_number_unsigned() || (in["seed"].is_number_integer() && in["seed"].get<long long>() >= 0))
            cfg.seed = in["seed"].get<std::uint64_t>();
        else
            diags.push_back("seed: must be a non-negative integer");
    }
    cfg.echo["seed"] = cfg.seed;
    if (auto t = f.number("tol", kDefaultLimitTol)) {
        f.require(*t > 0.0, "tol", "tol must be > 0");
        cfg.tol = *t;
    }
    if (auto m = f.count("max_steps", kDefaultMaxSteps)) cfg.max_steps = *m;
    cfg.echo["tol"] = cfg.tol;
    cfg.echo["max_steps"] = cfg.max_steps;
    if (ov.output_dir) {
        cfg.output_dir = *ov.output_dir;
    } else if (in.contains("output_dir")) {
        if (in["output_dir"].is_string())
            cfg.output_dir = in["output_dir"].get<std::string>();
        else
            diags.push_back("output_dir: must be a string");
    } else {
        cfg.output_dir = "out/" + cfg.experiment;
    }
    cfg.echo["output_dir"] = cfg.output_dir;

    const json params = in.contains("params") ? in["params"] : json::object();
    if (!params.is_object())
        diags.push_back("params: must be an object");
    else
        detail::parse_params(cfg.experiment, params, cfg, diags);
    if (!diags.empty()) return std::nullopt;
    return cfg;
}

inline std::vector<std::string> validate(const json& in, const std::string& experiment = "",
                                         const Overrides& ov = {}) {
    std::vector<std::string> diags;
    parse_config(in, experiment, ov, diags);
    return diags;
}

// Parse errors come back as a single diagnostic carrying the location.
inline std::optional<json> load_json(const std::string& path, std::vector<std::string>& diags) {
    std::ifstream f(path);
    if (!f) {
        diags.push_back(path + ": cannot open file");
        return std::nullopt;
    }
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        diags.push_back(path + ": " + e.what());
        return std::nullopt;
    }
}

struct ResultRow {
    std::string quantity;
    double parameter;
    MonteCarloEstimate estimate;
};

struct RunResult {
    std::vector<ResultRow> rows;
    json extra = json::object();  // experiment-specific manifest fields
    bool ok = true;               // false when a self-test suite failed
};

namespace detail {

inline DirectionSampler sampler_for(const ExperimentConfig& cfg) {
    if (cfg.params().value("measure", std::string("harmonic")) == "uniform-angle")
        return DirectionSampler::uniform_angle(cfg.base);
    return DirectionSampler::harmonic(*cfg.mu, cfg.base, cfg.tol, cfg.max_steps);
}

inline ThinOracle oracle_for(const json& o) {
    if (o.at("kind") == "modular-cusp") return ThinOracle::modular_cusp(o.at("h").get<double>());
    return ThinOracle::all_thick();
}

inline std::vector<double> doubles(const json& a) { return a.get<std::vector<double>>(); }

}  // namespace detail

// Runs the estimators for a validated config. Throws EstimatorError on estimator failure.
inline RunResult execute(const ExperimentConfig& cfg, unsigned threads) {
    const json& p = cfg.params();
    const RngSpec rng(cfg.seed);
    EstimatorOptions opt;
    opt.threads = threads;
    opt.tol = cfg.tol;
    opt.max_steps = cfg.max_steps;
    opt.config_hash = cfg.hash();
    RunResult res;
    auto add = [&](const std::string& q, double param, const MonteCarloEstimate& e) {
        res.rows.push_back({q, param, e});
    };
    const std::string& exp = cfg.experiment;
    try {
        if (exp == "estimate-e") {
            const auto radii = detail::doubles(p["radii"]);
            for (const auto& c : estimate_E_curve(detail::sampler_for(cfg), radii, p["N"], rng, opt))
                add("E", c.parameter, c.estimate);
        } else if (exp == "drift") {
            for (const auto& nv : p["n_values"]) {
                const auto steps = nv.get<std::size_t>();
                add("drift", static_cast<double>(steps), estimate_drift(*cfg.mu, cfg.base, steps, p["N"], rng, opt));
            }
        } else if (exp == "recurrence") {
            const auto pts = recurrence_curve(*cfg.mu, cfg.base, detail::doubles(p["R_values"]), p["n"], p["N"], rng, opt);
            for (const auto& r : pts) add("recurrence_frequency", r.R, r.frequency);
            for (const auto& r : pts) add("h_Lambda_R", r.R, r.lambda);
        } else if (exp == "separation") {
            for (const auto& c : separation_curve(detail::sampler_for(cfg), p["M"], p["eta"], detail::doubles(p["radii"]),
                                                  p["N"], p["delta"], rng, opt))
                add("separation", c.parameter, c.estimate);
        } else if (exp == "thickness") {
            for (const auto& c :
                 thickness_curve(detail::sampler_for(cfg), detail::oracle_for(p["oracle"]), p["theta"], p["eta"],
                                 detail::doubles(p["radii"]), p["N"], p["delta"], p["grid"], rng, opt))
                add("thickness", c.parameter, c.estimate);
        } else if (exp == "shadow-decay") {
            const auto pts = shadow_decay(detail::sampler_for(cfg), detail::doubles(p["distances"]), p["tau"],
                                          p["N_dir"], p["N_boundary"], rng, opt);
            json masses = json::object();
            for (const auto& s : pts) {
                add("max_shadow_mass", s.distance, s.max_mass);
                masses[fmt17(s.distance)] = s.masses;
            }
            res.extra["center_masses"] = masses;
        } else if (exp == "exceptions") {
            const auto factor = p["m_max_factor"].get<std::size_t>();
            double A = 0.0;
            if (p["A_hat"] == "auto") {
                // drift over the longest horizon, on its own substream family
                const std::size_t horizon = factor * p["n_values"].back().get<std::size_t>();
                const auto est = estimate_drift(*cfg.mu, cfg.base, horizon, p["N"], rng.derive(0xA11CE), opt);
                A = est.mean;
                if (!(A > 0.0)) throw EstimatorError("exceptions: estimated drift is not positive");
                res.extra["A_hat_estimate"] = {{"mean", A}, {"stderr", est.std_error}, {"horizon", horizon}};
            } else {
                A = p["A_hat"].get<double>();
            }
            const double a = p.contains("a") ? p["a"].get<double>() : p["a_fraction"].get<double>() * A;
            res.extra["A_hat"] = A;
            res.extra["a"] = a;
            for (const auto& nv : p["n_values"]) {
                ExceptionConfig ec;
                ec.n = nv.get<std::size_t>();
                ec.R = p["R"];
                ec.p = p["p"];
                ec.rho = p["rho"];
                ec.D = p["D"];
                ec.c = p["c"];
                ec.A_hat = A;
                ec.a = a;
                ec.m_max = factor * ec.n;
                const auto r = exception_rates(*cfg.mu, cfg.base, ec, p["N"], rng, opt);
                add("E1", static_cast<double>(ec.n), r.e1);
                add("E2", static_cast<double>(ec.n), r.e2);
                add("E3", static_cast<double>(ec.n), r.e3);
                res.extra["C"] = r.C;
            }
        } else if (exp == "geom-selftest") {
            json suites = json::array();
            for (const auto& t : run_selftest(p["scale"].get<double>(), cfg.seed)) {
                MonteCarloEstimate e;
                e.mean = t.worst;
                e.n_samples = t.samples;
                e.n_failures = t.passed ? 0 : 1;
                e.seed = cfg.seed;
                e.config_hash = opt.config_hash;
                add(t.key, t.tolerance, e);
                suites.push_back({{"key", t.key}, {"name", t.name}, {"passed", t.passed}});
                res.ok = res.ok && t.passed;
            }
            res.extra["suites"] = suites;
        }
    } catch (const std::invalid_argument& e) {
        throw EstimatorError(e.what());
    } catch (const GeometryError& e) {
        throw EstimatorError(e.what());
    }
    return res;
}

// Columns: quantity,parameter,mean,stderr,n,failures; reals with 17 significant digits.
inline std::string results_csv(const RunResult& r) {
    std::string s = "quantity,parameter,mean,stderr,n,failures\n";
    for (const auto& row : r.rows)
        s += row.quantity + "," + fmt17(row.parameter) + "," + fmt17(row.estimate.mean) + "," +
             fmt17(row.estimate.std_error) + "," + std::to_string(row.estimate.n_samples) + "," +
             std::to_string(row.estimate.n_failures) + "\n";
    return s;
}

inline json manifest(const ExperimentConfig& cfg, const RunResult& r, double seconds, unsigned threads) {
    json failures = json::object();
    for (const auto& row : r.rows) failures[row.quantity + "@" + fmt17(row.parameter)] = row.estimate.n_failures;
    json m{{"version", kVersion},
           {"experiment", cfg.experiment},
           {"config", cfg.echo},
           {"seed", cfg.seed},
           {"config_hash", hex(cfg.hash())},
           {"threads", threads},
           {"duration_seconds", seconds},
           {"failures", failures}};
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) m[it.key()] = it.value();
    return m;
}

// Worker count: explicit flag, then the THREADS environment variable, then 1.
inline unsigned resolve_threads(std::optional<unsigned> flag) {
    if (flag && *flag > 0) return *flag;
    if (const char* env = std::getenv("THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

// Full run: writes results.csv and manifest.json into cfg.output_dir from a single writer.
inline int run(const ExperimentConfig& cfg, unsigned threads, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    try {
        res = execute(cfg, threads);
    } catch (const EstimatorError& e) {
        err << "estimator failure: " << e.what() << "\n";
        return kEstimatorFailure;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream csv(std::filesystem::path(cfg.output_dir) / "results.csv", std::ios::binary);
        csv << results_csv(res);
        std::ofstream man(std::filesystem::path(cfg.output_dir) / "manifest.json", std::ios::binary);
        man << manifest(cfg, res, secs, threads).dump(2) << "\n";
        if (!csv || !man) throw std::runtime_error("write failed");
    } catch (const std::exception& e) {
        err << "cannot write outputs to " << cfg.output_dir << ": " << e.what() << "\n";
        return kIoError;
    }
    out << results_csv(res);
    if (!res.ok) {
        err << "self-test suites failed\n";
        return kEstimatorFailure;
    }
    return kOk;
}

}  // namespace stathyp::cli
