#include <gtest/gtest.h>

#include <random>

#include "stathyp/gromov.hpp"

using namespace stathyp;

namespace {

ModelPoint hp(double re, double im) { return to_model(HalfPlanePoint{re, im}); }

Direction random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Direction u(n);
    for (int i = 0; i < n; ++i) u[i] = g(rng);
    return u / u.norm();
}

ModelPoint random_point(std::mt19937_64& rng, int n, double rmax) {
    std::uniform_real_distribution<double> r(0.0, rmax);
    return ModelPoint::polar(r(rng), random_unit(rng, n));
}

Isometry random_isometry(std::mt19937_64& rng, int n, double rmax) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    Isometry g = Isometry::translation_to(random_point(rng, n, rmax));
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) g = g * Isometry::rotation(n, a, b, ang(rng));
    return g;
}

// Oracle: raw hyperboloid arithmetic, fine for moderate radii.
double raw_distance(const ModelPoint& x, const ModelPoint& y) {
    return std::acosh(std::max(1.0, -minkowski(x.coords(), y.coords())));
}

// Oracle: golden-section minimisation of t -> d(x, gamma(t)).
double golden_min(const std::function<double(double)>& f, double a, double b) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d; else a = c;
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST(Distance, Basics) {
    const ModelPoint i = hp(0, 1);
    EXPECT_EQ(distance(i, i), 0.0);
    EXPECT_NEAR(distance(i, hp(0, 2)), std::log(2.0), 1e-12);
    EXPECT_NEAR(distance(i, hp(1, 1)), std::acosh(1.5), 1e-12);
    EXPECT_NEAR(distance(i, hp(1, 1)), 0.962424, 1e-6);
}

TEST(Distance, MatchesLengthIntegralAlongConnectingArc) {
    // Geodesic through i and 1+i: circle centred 1/2, radius sqrt(5)/2. ds = |dz|/y.
    const double c = 0.5, rad = std::sqrt(5.0) / 2.0;
    const double a0 = std::atan2(1.0, -0.5), a1 = std::atan2(1.0, 0.5);
    const int m = 200000;
    double len = 0.0;
    for (int k = 0; k < m; ++k) {
        const double a = a0 + (a1 - a0) * (k + 0.5) / m;
        len += rad * std::abs(a1 - a0) / m / (rad * std::sin(a));
    }
    (void)c;
    EXPECT_NEAR(distance(hp(0, 1), hp(1, 1)), len, 1e-8);
}

TEST(Distance, DimensionMismatchThrows) {
    EXPECT_THROW(distance(ModelPoint::origin(2), ModelPoint::origin(3)), DimensionMismatch);
}

TEST(Distance, AgreesWithRawFormulaAndTriangleInequality) {
    std::mt19937_64 rng(1);
    for (int n : {2, 3, 5}) {
        for (int k = 0; k < 20000; ++k) {
            ModelPoint x = random_point(rng, n, 4), y = random_point(rng, n, 4), z = random_point(rng, n, 4);
            const double dxy = distance(x, y);
            EXPECT_NEAR(dxy, distance(y, x), 1e-12);
            EXPECT_NEAR(dxy, raw_distance(x, y), 1e-7 * std::max(1.0, dxy));
            EXPECT_GE(distance(x, z) + distance(z, y) - dxy, -1e-9);
        }
    }
}

TEST(Distance, FarPointsStayAccurate) {
    // Two points at radius 40 with angle theta: sinh(d/2) = sinh(40) sin(theta/2).
    Direction u(2), v(2);
    const double th = 1e-6;
    u << 1, 0;
    v << std::cos(th), std::sin(th);
    const double d = distance(ModelPoint::polar(40, u), ModelPoint::polar(40, v));
    EXPECT_NEAR(d, 2 * std::asinh(std::sinh(40.0) * std::sin(th / 2)), 1e-9);
    // radial pair far out
    EXPECT_NEAR(distance(ModelPoint::polar(500, u), ModelPoint::polar(503.25, u)), 3.25, 1e-9);
    EXPECT_NEAR(distance(ModelPoint::polar(1000, u), ModelPoint::polar(1000, Direction(-u))), 2000.0, 1e-9);
}

TEST(HalfPlane, RoundTripAndBasePoint) {
    const ModelPoint i = hp(0, 1);
    EXPECT_EQ(i.radius(), 0.0);
    const Coords c = i.coords();
    EXPECT_DOUBLE_EQ(c[0], 1.0);
    auto back = to_half_plane(hp(0, 2));
    EXPECT_NEAR(back.re, 0.0, 1e-12);
    EXPECT_NEAR(back.im, 2.0, 1e-12);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> re(-5, 5), lim(-4, 4);
    for (int k = 0; k < 1000; ++k) {
        HalfPlanePoint z{re(rng), std::exp(lim(rng))}, w{re(rng), std::exp(lim(rng))};
        auto z2 = to_half_plane(to_model(z));
        EXPECT_NEAR(z2.re, z.re, 1e-12 * std::max(1.0, std::abs(z.re) + z.im));
        EXPECT_NEAR(z2.im, z.im, 1e-12 * std::max(1.0, z.im));
        EXPECT_NEAR(half_plane_distance(z, w), distance(to_model(z), to_model(w)), 1e-9);
    }
    EXPECT_THROW(to_half_plane(ModelPoint::origin(3)), DimensionMismatch);
}

TEST(HalfPlane, BoundaryCorrespondence) {
    auto inf = to_boundary(HalfPlaneBoundary::infinity());
    EXPECT_DOUBLE_EQ(inf.unit()[0], 1.0);
    auto zero = to_boundary(HalfPlaneBoundary::real(0.0));
    EXPECT_DOUBLE_EQ(zero.unit()[0], -1.0);
    for (double x : {-7.5, -1.0, -0.2, 0.3, 1.0, 42.0}) {
        auto b = to_half_plane(to_boundary(HalfPlaneBoundary::real(x)));
        EXPECT_FALSE(b.infinite);
        EXPECT_NEAR(b.value, x, 1e-12 * std::max(1.0, std::abs(x)));
        auto pq = projective_pair(to_boundary(HalfPlaneBoundary::real(x)));
        EXPECT_NEAR(pq[0] / pq[1], x, 1e-12 * std::max(1.0, std::abs(x)));
    }
    EXPECT_TRUE(to_half_plane(inf).infinite);
}

TEST(ModelPointInvariant, RejectsOffSheet) {
    Coords c(3);
    c << 2.0, 0.5, 0.0;
    EXPECT_THROW(ModelPoint::from_coords(c), InvariantViolation);
    c << -1.0, 0.0, 0.0;
    EXPECT_THROW(ModelPoint::from_coords(c), InvariantViolation);
    c << std::sqrt(2.0), 1.0, 0.0;
    EXPECT_NEAR(ModelPoint::from_coords(c).radius(), std::asinh(1.0), 1e-15);
}

TEST(IsometryTest, MobiusExamples) {
    Sl2 t, s;
    t << 1, 1, 0, 1;
    s << 0, -1, 1, 0;
    const Isometry T = Isometry::from_sl2(t), S = Isometry::from_sl2(s);
    auto ti = to_half_plane(T.apply(hp(0, 1)));
    EXPECT_NEAR(ti.re, 1.0, 1e-12);
    EXPECT_NEAR(ti.im, 1.0, 1e-12);
    auto s2i = to_half_plane(S.apply(hp(0, 2)));
    EXPECT_NEAR(s2i.re, 0.0, 1e-12);
    EXPECT_NEAR(s2i.im, 0.5, 1e-12);
    auto id = Isometry::identity(2).apply(hp(0.3, 0.7));
    EXPECT_NEAR(distance(id, hp(0.3, 0.7)), 0.0, 1e-12);
    // Mobius action agrees with the Lorentz action.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 200; ++k) {
        Sl2 g;
        g << u(rng), u(rng), u(rng), u(rng);
        if (g.determinant() <= 0.1) continue;
        HalfPlanePoint z{u(rng), std::exp(u(rng))};
        auto w1 = mobius(g, z);
        auto w2 = to_half_plane(Isometry::from_sl2(g).apply(to_model(z)));
        EXPECT_NEAR(half_plane_distance(w1, w2), 0.0, 1e-9);
    }
}

TEST(IsometryTest, LorentzInvariantInverseAndSl2Consistency) {
    std::mt19937_64 rng(4);
    for (int n : {2, 3, 4}) {
        for (int k = 0; k < 200; ++k) {
            Isometry g = random_isometry(rng, n, 3);
            EXPECT_LT(g.lorentz_defect(), 1e-9);
            Isometry h = g * g.inverse();
            EXPECT_LT((h.matrix() - LorentzMatrix::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff(), 1e-9);
            if (n == 2) {
                ASSERT_TRUE(g.sl2().has_value());
                Sl2 s = *g.sl2() / std::sqrt(g.sl2()->determinant());
                EXPECT_LT((lorentz_from_sl2(s) - g.matrix()).cwiseAbs().maxCoeff(), 1e-9);
            }
            Isometry a = random_isometry(rng, n, 2), b = random_isometry(rng, n, 2);
            EXPECT_LT(((a * b) * g).matrix().cwiseAbs().maxCoeff() > 0 ?
                      (((a * b) * g).matrix() - (a * (b * g)).matrix()).cwiseAbs().maxCoeff() /
                          ((a * b) * g).matrix().cwiseAbs().maxCoeff() : 0.0, 1e-12);
        }
    }
    LorentzMatrix bad = LorentzMatrix::Identity(3, 3);
    bad(1, 1) = 2.0;
    EXPECT_THROW(Isometry::from_lorentz(bad), InvariantViolation);
}

TEST(IsometryTest, InvarianceOfDistanceAndProducts) {
    std::mt19937_64 rng(5);
    for (int n : {2, 3}) {
        for (int k = 0; k < 10000; ++k) {
            Isometry g = random_isometry(rng, n, 3);
            ModelPoint x = random_point(rng, n, 3), y = random_point(rng, n, 3), z = random_point(rng, n, 3);
            EXPECT_NEAR(distance(g.apply(x), g.apply(y)), distance(x, y), 1e-9);
            if (k % 10 == 0) {
                EXPECT_NEAR(gromov_product(g.apply(x), g.apply(y), g.apply(z)), gromov_product(x, y, z), 1e-9);
                BoundaryDirection xi = BoundaryDirection::from_unit(random_unit(rng, n));
                BoundaryDirection eta = BoundaryDirection::from_unit(random_unit(rng, n));
                EXPECT_NEAR(gromov_product_boundary(g.apply(x), g.apply(xi), g.apply(eta)),
                            gromov_product_boundary(x, xi, eta), 1e-9);
            }
        }
    }
}

TEST(IsometryTest, ScaledProductsDoNotOverflow) {
    const Isometry g = Isometry::boost(2, 1, 1.0);
    Isometry w = Isometry::identity(2);
    for (int k = 0; k < 1000; ++k) w = w * g;
    EXPECT_GT(w.log_scale(), 0.0);
    const ModelPoint x = ModelPoint::origin(2);
    EXPECT_NEAR(distance(x, w.apply(x)), 1000.0, 1e-9 * 1000.0);
}

TEST(GeodesicTest, BetweenVertical) {
    const Geodesic g = geodesic_between(hp(0, 1), hp(0, 4));
    EXPECT_TRUE(to_half_plane(g.forward()).infinite);
    auto b = to_half_plane(g.backward());
    EXPECT_NEAR(b.value, 0.0, 1e-12);
    EXPECT_NEAR(distance(g.point_at(std::log(4.0)), hp(0, 4)), 0.0, 1e-9);
    EXPECT_NEAR(distance(g.point_at(0.0), hp(0, 1)), 0.0, 1e-12);
    EXPECT_THROW(geodesic_between(hp(0, 1), hp(0, 1)), DegenerateGeodesic);
}

TEST(GeodesicTest, BetweenGenericHitsEndpointsByShooting) {
    const Geodesic g = geodesic_between(hp(0, 1), hp(1, 1));
    // circle centred 1/2 radius sqrt(5)/2 meets R at 1/2 -+ sqrt(5)/2
    const double lo = 0.5 - std::sqrt(5.0) / 2, hi = 0.5 + std::sqrt(5.0) / 2;
    EXPECT_NEAR(to_half_plane(g.backward()).value, lo, 1e-12);
    EXPECT_NEAR(to_half_plane(g.forward()).value, hi, 1e-12);
    // shooting: the point at t = +-40 in the half plane sits within 1e-6 of the endpoint
    auto p = to_half_plane(g.point_at(40.0)), q = to_half_plane(g.point_at(-40.0));
    EXPECT_NEAR(p.re, hi, 1e-6);
    EXPECT_NEAR(q.re, lo, 1e-6);
    EXPECT_NEAR(distance(g.point_at(std::acosh(1.5)), hp(1, 1)), 0.0, 1e-9);
}

TEST(GeodesicTest, UnitSpeedAndRandomBetween) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> t(-30, 30);
    for (int n : {2, 4}) {
        for (int k = 0; k < 1000; ++k) {
            ModelPoint x = random_point(rng, n, 5), y = random_point(rng, n, 5);
            Geodesic g = geodesic_between(x, y);
            EXPECT_NEAR(distance(g.point_at(0), x), 0.0, 1e-9);
            EXPECT_NEAR(distance(g.point_at(distance(x, y)), y), 0.0, 1e-9);
            const double s = t(rng), u = t(rng);
            EXPECT_NEAR(distance(g.point_at(s), g.point_at(u)), std::abs(s - u), 1e-9);
        }
    }
}

TEST(GeodesicTest, RayToBoundary) {
    const ModelPoint i = hp(0, 1);
    const Geodesic up = ray_to_boundary(i, to_boundary(HalfPlaneBoundary::infinity()));
    for (double t : {0.0, 1.0, 2.5}) {
        auto z = to_half_plane(up.point_at(t));
        EXPECT_NEAR(z.re, 0.0, 1e-12);
        EXPECT_NEAR(z.im, std::exp(t), 1e-12 * std::exp(t));
    }
    const Geodesic down = ray_to_boundary(i, to_boundary(HalfPlaneBoundary::real(0.0)));
    EXPECT_NEAR(to_half_plane(down.point_at(1.0)).im, std::exp(-1.0), 1e-12);
    // asymptotic rays from two anchors on one geodesic
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        ModelPoint x = random_point(rng, 3, 2);
        BoundaryDirection xi = BoundaryDirection::from_unit(random_unit(rng, 3));
        Geodesic g = ray_to_boundary(x, xi);
        ModelPoint x2 = g.point_at(-1.7);
        Geodesic g2 = ray_to_boundary(x2, xi);
        EXPECT_NEAR(distance(g.point_at(0), x), 0.0, 1e-9);
        EXPECT_LT(distance(g.point_at(30.0), g2.point_at(30.0 + 1.7)), 1e-6);
        EXPECT_LT(distance(g.point_at(30.0), g2.point_at(30.0)), 1.7 + 1e-9);
        // forward endpoint is xi
        EXPECT_LT(chord(g.forward(), xi), 1e-12);
    }
}

TEST(GeodesicTest, DistToGeodesic) {
    const Geodesic axis = geodesic_between(hp(0, 1), hp(0, 2));
    auto pr = dist_to_geodesic(hp(1, 1), axis);
    EXPECT_NEAR(pr.distance, std::asinh(1.0), 1e-12);
    auto f = [&](double t) { return distance(hp(1, 1), axis.point_at(t)); };
    EXPECT_NEAR(pr.distance, golden_min(f, -10, 10), 1e-8);
    EXPECT_NEAR(dist_to_geodesic(axis.point_at(3.3), axis).distance, 0.0, 1e-9);
    std::mt19937_64 rng(8);
    for (int k = 0; k < 1000; ++k) {
        ModelPoint x = random_point(rng, 3, 3), a = random_point(rng, 3, 3), b = random_point(rng, 3, 3);
        Geodesic g = geodesic_between(a, b);
        Isometry h = random_isometry(rng, 3, 3);
        auto p1 = dist_to_geodesic(x, g);
        EXPECT_NEAR(dist_to_geodesic(h.apply(x), transform(h, g)).distance, p1.distance, 1e-9);
        auto f2 = [&](double t) { return distance(x, g.point_at(t)); };
        EXPECT_NEAR(p1.distance, golden_min(f2, p1.parameter - 20, p1.parameter + 20), 1e-8);
    }
}

TEST(Gromov, Examples) {
    const ModelPoint x = hp(0, 1), y = hp(0, 2), z = hp(0, 0.5);
    EXPECT_NEAR(gromov_product(x, y, y), distance(x, y), 1e-12);
    EXPECT_NEAR(gromov_product(x, y, z), 0.0, 1e-12);
    Direction a(2), b(2);
    a << 1, 0;
    b << -1, 0;
    const ModelPoint o = ModelPoint::origin(2);
    EXPECT_NEAR(gromov_product_boundary(o, BoundaryDirection::from_unit(a), BoundaryDirection::from_unit(b)), 0.0, 1e-15);
    b << std::cos(M_PI / 3), std::sin(M_PI / 3);
    const auto xi = BoundaryDirection::from_unit(a), eta = BoundaryDirection::from_unit(b);
    EXPECT_NEAR(gromov_product_boundary(o, xi, eta), std::log(2.0), 1e-12);
    const double finite = gromov_product(o, ray_to_boundary(o, xi).point_at(20), ray_to_boundary(o, eta).point_at(20));
    EXPECT_NEAR(finite, std::log(2.0), 1e-6);
    EXPECT_EQ(gromov_product_boundary(o, xi, xi), kInfiniteProduct);
}

TEST(Gromov, FourPointCondition) {
    std::mt19937_64 rng(9);
    int bad = 0;
    for (int k = 0; k < 100000; ++k) {
        ModelPoint x = random_point(rng, 2, 6), y = random_point(rng, 2, 6), z = random_point(rng, 2, 6),
                   w = random_point(rng, 2, 6);
        if (gromov_product(x, y, z) < std::min(gromov_product(x, y, w), gromov_product(x, z, w)) - kFourPointDelta)
            ++bad;
    }
    EXPECT_EQ(bad, 0);
}

TEST(Gromov, BoundaryLimitsAtGenericBasePoints) {
    std::mt19937_64 rng(10);
    for (int k = 0; k < 10000; ++k) {
        ModelPoint o = random_point(rng, 3, 1.5);
        BoundaryDirection xi = BoundaryDirection::from_unit(random_unit(rng, 3));
        BoundaryDirection eta = BoundaryDirection::from_unit(random_unit(rng, 3));
        const double th = visual_angle(o, xi, eta);
        if (th <= 0.01) continue;
        Geodesic a = ray_to_boundary(o, xi), b = ray_to_boundary(o, eta);
        const double gp = gromov_product_boundary(o, xi, eta);
        EXPECT_NEAR(gromov_product(o, a.point_at(20), b.point_at(20)), gp, 1e-6);
        if (th > 0.1) EXPECT_LT(std::abs(distance(a.point_at(20), b.point_at(20)) - (40 - 2 * gp)), 1e-4);
    }
}

TEST(Shadow, Examples) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; ++k) {
        ModelPoint o = random_point(rng, 2, 1), y = random_point(rng, 2, 4);
        const double d = distance(o, y);
        BoundaryDirection xi = BoundaryDirection::from_unit(random_unit(rng, 2));
        EXPECT_TRUE(in_shadow(o, y, d, xi));
        EXPECT_TRUE(in_shadow(o, y, d + 1, xi));
        if (d < 1e-3) continue;
        Geodesic ray = geodesic_between(o, y);
        EXPECT_TRUE(in_shadow(o, y, 0.0, ray.forward()));
        EXPECT_NEAR(gromov_product(o, y, ray.forward()), d, 1e-9);
        EXPECT_NEAR(gromov_product(o, y, ray.backward()), 0.0, 1e-9);
        EXPECT_FALSE(in_shadow(o, y, 0.5 * d, ray.backward()));
        // limit definition: (y, gamma_xi(t))_o at t = 30
        const double lim = gromov_product(o, y, ray_to_boundary(o, xi).point_at(30));
        EXPECT_NEAR(gromov_product(o, y, xi), lim, 1e-9);
    }
}

TEST(ThinTriangles, SidesWithinOne) {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 300; ++k) {
        ModelPoint x = random_point(rng, 2, 4), y = random_point(rng, 2, 4), z = random_point(rng, 2, 4);
        Geodesic s = geodesic_between(x, y);
        const double L = distance(x, y);
        auto seg_dist = [](const ModelPoint& p, const ModelPoint& a, const ModelPoint& b) {
            Geodesic g = geodesic_between(a, b);
            double t = std::clamp(g.closest_parameter(p), 0.0, distance(a, b));
            return distance(p, g.point_at(t));
        };
        for (double t = 0; t <= L; t += 0.05) {
            ModelPoint p = s.point_at(t);
            EXPECT_LE(std::min(seg_dist(p, x, z), seg_dist(p, y, z)), kThinTriangleC);
        }
    }
}
