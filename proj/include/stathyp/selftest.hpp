#pragma once

#include <random>
#include <string>
#include <vector>

#include "stathyp/estimators.hpp"

// Invariant suites for geom and lattice, runnable from the CLI. Sample counts are the
// stated ones times `scale`.
namespace stathyp {

struct SelfTestResult {
    std::string key;  // CSV-safe identifier
    std::string name;
    bool passed;
    std::size_t samples;
    double worst;      // worst observed value of the checked quantity
    double tolerance;  // the bound it is checked against
};

namespace selftest {

using Rng = std::mt19937_64;

inline Direction unit(Rng& rng, int n) {
    std::normal_distribution<double> g;
    Direction u(n);
    do {
        for (int i = 0; i < n; ++i) u[i] = g(rng);
    } while (u.norm() == 0.0);
    return u / u.norm();
}

inline ModelPoint point(Rng& rng, int n, double rmax) {
    return ModelPoint::polar(std::uniform_real_distribution<double>(0.0, rmax)(rng), unit(rng, n));
}

inline Isometry isometry(Rng& rng, int n, double rmax) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    Isometry g = Isometry::translation_to(point(rng, n, rmax));
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) g = g * Isometry::rotation(n, a, b, ang(rng));
    return g;
}

inline std::size_t count(double base, double scale) {
    return static_cast<std::size_t>(std::max(1.0, std::round(base * scale)));
}

inline SelfTestResult triangle(Rng& rng, double scale) {
    const std::size_t n = count(1e5, scale);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int dim = 2 + static_cast<int>(i % 2);
        const ModelPoint x = point(rng, dim, 8.0), y = point(rng, dim, 8.0), z = point(rng, dim, 8.0);
        const double dxy = distance(x, y);
        worst = std::max({worst, std::abs(dxy - distance(y, x)), dxy - distance(x, z) - distance(z, y)});
    }
    return {"triangle_inequality", "distance symmetric, triangle inequality", worst <= 1e-9, n, worst, 1e-9};
}

inline SelfTestResult invariance(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int dim = 2 + static_cast<int>(i % 3);
        const Isometry g = isometry(rng, dim, 4.0);
        const ModelPoint x = point(rng, dim, 4.0), y = point(rng, dim, 4.0);
        worst = std::max(worst, std::abs(distance(g.apply(x), g.apply(y)) - distance(x, y)));
        if (distance(x, y) > 1e-3) {
            const Geodesic gam = geodesic_between(x, y);
            const ModelPoint p = point(rng, dim, 4.0);
            worst = std::max(worst, std::abs(dist_to_geodesic(g.apply(p), transform(g, gam)).distance -
                                             dist_to_geodesic(p, gam).distance));
        }
    }
    return {"isometry_invariance", "isometry invariance", worst <= 1e-9, n, worst, 1e-9};
}

inline SelfTestResult thin_triangles(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const ModelPoint x = point(rng, 2, 3.0), y = point(rng, 2, 3.0), z = point(rng, 2, 3.0);
        bad += !tripod_check(x, y, z, kThinTriangleC, 0.01);
    }
    return {"thin_triangles", "thin triangles C = 1.0", bad == 0, n, static_cast<double>(bad), 0.0};
}

inline SelfTestResult four_point(Rng& rng, double scale) {
    const std::size_t n = count(1e5, scale);
    double worst = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const ModelPoint x = point(rng, 2, 6.0), y = point(rng, 2, 6.0), z = point(rng, 2, 6.0),
                         w = point(rng, 2, 6.0);
        worst = std::max(worst, std::min(gromov_product(x, y, w), gromov_product(x, z, w)) - gromov_product(x, y, z));
    }
    return {"four_point", "four-point condition delta = 1.1", worst <= kFourPointDelta, n, worst, kFourPointDelta};
}

inline SelfTestResult boundary_product(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    double worst = 0.0;
    std::size_t used = 0;
    while (used < n) {
        const int dim = 2 + static_cast<int>(used % 2);
        const ModelPoint o = point(rng, dim, 2.0);
        const BoundaryDirection xi = BoundaryDirection::from_unit(unit(rng, dim));
        const BoundaryDirection eta = BoundaryDirection::from_unit(unit(rng, dim));
        if (visual_angle(o, xi, eta) <= 0.01) continue;
        const double finite =
            gromov_product(o, ray_to_boundary(o, xi).point_at(20.0), ray_to_boundary(o, eta).point_at(20.0));
        worst = std::max(worst, std::abs(finite - gromov_product_boundary(o, xi, eta)));
        ++used;
    }
    return {"boundary_product_limit", "boundary Gromov product = t = 20 limit", worst <= 1e-6, n, worst, 1e-6};
}

inline SelfTestResult asymptotic_gap(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    double worst = 0.0;
    std::size_t used = 0;
    while (used < n) {
        const ModelPoint o = point(rng, 2, 2.0);
        const BoundaryDirection xi = BoundaryDirection::from_unit(unit(rng, 2));
        const BoundaryDirection eta = BoundaryDirection::from_unit(unit(rng, 2));
        if (visual_angle(o, xi, eta) <= 0.1) continue;
        const double d = distance(ray_to_boundary(o, xi).point_at(20.0), ray_to_boundary(o, eta).point_at(20.0));
        worst = std::max(worst, std::abs(d - (40.0 - 2.0 * gromov_product_boundary(o, xi, eta))));
        ++used;
    }
    return {"ray_separation_gap", "ray separation 2t - 2(xi,eta) at t = 20", worst < 1e-4, n, worst, 1e-4};
}

inline HalfPlanePoint half_plane(Rng& rng) {
    std::uniform_real_distribution<double> re(-3.0, 3.0), lim(std::log(0.3), std::log(4.0));
    return {re(rng), std::exp(lim(rng))};
}

inline Sl2 modular_word(Rng& rng, int len) {
    Sl2 t, ti, s;
    t << 1, 1, 0, 1;
    ti << 1, -1, 0, 1;
    s << 0, -1, 1, 0;
    const Sl2 gens[3] = {t, ti, s};
    std::uniform_int_distribution<int> pick(0, 2);
    Sl2 g = Sl2::Identity();
    for (int i = 0; i < len; ++i) g = g * gens[pick(rng)];
    return g;
}

inline SelfTestResult reduction_idempotent(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = reduce_modular(half_plane(rng));
        const auto rr = reduce_modular(r.point);
        bad += !in_fundamental_domain(r.point) || rr.point.re != r.point.re || rr.point.im != r.point.im;
    }
    return {"reduction_idempotent", "modular reduction idempotent", bad == 0, n, static_cast<double>(bad), 0.0};
}

inline SelfTestResult thickness_invariance(Rng& rng, double scale) {
    const std::size_t n = count(1e4, scale);
    std::size_t bad = 0;
    std::uniform_real_distribution<double> hh(1.0, 3.0);
    std::uniform_int_distribution<int> len(0, 10);
    for (std::size_t i = 0; i < n; ++i) {
        const auto oracle = ThinOracle::modular_cusp(hh(rng));
        const HalfPlanePoint z = half_plane(rng);
        const auto a = oracle.query(to_model(z));
        const auto b = oracle.query(to_model(mobius(modular_word(rng, len(rng)), z)));
        // a point within rounding of the cutoff may legitimately land on either side
        if (std::abs(a.excursion_height - oracle.h()) < 1e-6) continue;
        bad += a.is_thick != b.is_thick;
    }
    return {"thickness_invariance", "thickness Gamma-invariant", bad == 0, n, static_cast<double>(bad), 0.0};
}

inline SelfTestResult excursion_inequality(Rng& rng, double scale) {
    const std::size_t n = count(1e3, scale);
    std::uniform_real_distribution<double> uR(0.5, 6.0), ud(0.0, 8.0), u01(0.0, 1.0);
    double worst = -INFINITY;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double R = uR(rng), d = ud(rng);
        auto shoot = [&](const ModelPoint& p, double len) {
            return ray_to_boundary(p, BoundaryDirection::from_unit(unit(rng, 2))).point_at(len);
        };
        const ModelPoint xj = point(rng, 2, 3.0);
        const ModelPoint xk = shoot(xj, 2.0 * d);
        const ModelPoint gj = shoot(xj, u01(rng) * R / 3.0), gk = shoot(xk, u01(rng) * R / 3.0);
        const double len = distance(gj, gk);
        worst = std::max(worst, len - (2.0 * R + 2.0 * d));
        if (len > 1e-9) {
            const auto rep = ball_excursions(geodesic_between(gj, gk), 0.0, len, xj, xk, 3.0 * R);
            bad += rep.total_length > len + 1e-12;
        }
    }
    return {"excursion_inequality", "segment length <= 2R + 2d", worst <= 1e-9 && bad == 0, n, worst, 1e-9};
}

inline SelfTestResult excursion_monotone(Rng& rng, double scale) {
    const std::size_t n = count(1e3, scale);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const ModelPoint a = point(rng, 2, 3.0), b = point(rng, 2, 3.0);
        if (distance(a, b) < 1e-3) continue;
        const Geodesic g = geodesic_between(a, b);
        const ModelPoint c1 = point(rng, 2, 3.0), c2 = point(rng, 2, 3.0);
        double prev = INFINITY;
        for (double rho : {0.1, 1.0, 10.0}) {
            const double L = ball_excursions(g, -6.0, 6.0, c1, c2, rho).total_length;
            bad += L > prev + 1e-12;
            prev = L;
        }
    }
    return {"excursion_monotone", "excursions monotone in rho", bad == 0, n, static_cast<double>(bad), 0.0};
}

}  // namespace selftest

inline std::vector<SelfTestResult> run_selftest(double scale = 1.0, std::uint64_t seed = 1) {
    selftest::Rng rng(seed);
    return {selftest::triangle(rng, scale),          selftest::invariance(rng, scale),
            selftest::thin_triangles(rng, scale),    selftest::four_point(rng, scale),
            selftest::boundary_product(rng, scale),  selftest::asymptotic_gap(rng, scale),
            selftest::reduction_idempotent(rng, scale), selftest::thickness_invariance(rng, scale),
            selftest::excursion_inequality(rng, scale), selftest::excursion_monotone(rng, scale)};
}

}  // namespace stathyp
