#include <gtest/gtest.h>

#include <map>

#include "stathyp/walk.hpp"

using namespace stathyp;
using builtin::sl2;

namespace {
bool projectively_equal(const Sl2& a, const Sl2& b) {
    return (a - b).cwiseAbs().maxCoeff() < 1e-12 || (a + b).cwiseAbs().maxCoeff() < 1e-12;
}
ModelPoint hp(double re, double im) { return to_model(HalfPlanePoint{re, im}); }
}  // namespace

TEST(Distribution, Invariants) {
    const Isometry g = Isometry::identity(2);
    EXPECT_THROW(GroupDistribution({}), InvalidDistribution);
    EXPECT_THROW(GroupDistribution({{"a", g, 0.5}, {"b", g, 0.4}}), InvalidDistribution);
    EXPECT_THROW(GroupDistribution({{"a", g, 0.5}, {"a", g, 0.5}}), InvalidDistribution);
    EXPECT_THROW(GroupDistribution({{"a", g, 1.5}, {"b", g, -0.5}}), InvalidDistribution);
    EXPECT_NO_THROW(builtin::psl2z_uniform_tts());
}

TEST(Reflect, Examples) {
    const auto mu = builtin::psl2z_uniform_tts();
    const auto r = reflect(mu);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_TRUE(projectively_equal(*r[0].element.sl2(), sl2(1, -1, 0, 1)));
    EXPECT_TRUE(projectively_equal(*r[1].element.sl2(), sl2(1, 1, 0, 1)));
    EXPECT_TRUE(projectively_equal(*r[2].element.sl2(), sl2(0, -1, 1, 0)));
    const auto rr = reflect(r);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(rr[i].label, mu[i].label);
        EXPECT_EQ(rr[i].weight, mu[i].weight);
        EXPECT_LT((rr[i].element.matrix() - mu[i].element.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
    const auto pm = reflect(builtin::hyperbolic_pointmass(1.0));
    EXPECT_NEAR(std::exp(pm[0].element.sl2_log()) * pm[0].element.sl2()->coeff(0, 0), std::exp(-0.5), 1e-15);
}

TEST(SamplePathTest, BasicsAndDeterminism) {
    const auto mu = builtin::psl2z_uniform_tts();
    const RngSpec rng(42);
    auto p0 = sample_path(mu, 0, rng, 3);
    EXPECT_EQ((p0.product(0).matrix() - LorentzMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);
    auto a = sample_path(mu, 200, rng, 7), b = sample_path(mu, 200, rng, 7);
    EXPECT_EQ(a.increments(), b.increments());
    auto c = sample_path(mu, 50, rng, 7);
    c.extend(200);
    EXPECT_EQ(a.increments(), c.increments());
    EXPECT_NE(a.increments(), sample_path(mu, 200, rng, 8).increments());

    const auto g = builtin::hyperbolic_pointmass(0.7);
    auto p = sample_path(g, 5, rng, 0);
    EXPECT_NEAR(distance(p.position(5, hp(0, 1)), hp(0, std::exp(3.5))), 0.0, 1e-9);
}

TEST(SamplePathTest, ProductRecursionAndRenormalization) {
    const auto mu = builtin::psl2z_uniform_tts();
    auto p = sample_path(mu, 10000, RngSpec(1), 0);
    Sl2 raw = Sl2::Identity();
    double raw_log = 0.0;
    const HalfPlanePoint z{0.1, 1.3};
    for (std::size_t k = 1; k <= 10000; ++k) {
        raw = raw * *mu[p.increment(k)].element.sl2();
        // independent renormalization by the Frobenius norm
        const double nrm = raw.norm();
        raw /= nrm;
        raw_log += std::log(nrm);
        if (k % 97 == 0 || k == 10000) {
            const HalfPlanePoint a = mobius(raw, z), b = mobius(*p.product(k).sl2(), z);
            EXPECT_NEAR(a.re, b.re, 1e-9 * std::max(1.0, std::abs(a.re))) << k;
            EXPECT_NEAR(a.im, b.im, 1e-9) << k;
            // scale bookkeeping: e^{renorm_log} * product == e^{raw_log} * raw
            const Sl2 rescaled = *p.product(k).sl2() * std::exp(p.renorm_log(k) - raw_log);
            EXPECT_LT((rescaled - raw).cwiseAbs().maxCoeff(), 1e-9 * k) << k;
        }
        if (k <= 40) {
            const Isometry step = p.product(k - 1) * mu[p.increment(k)].element;
            const double sc = step.scaled_matrix().cwiseAbs().maxCoeff();
            EXPECT_LT((step.scaled_matrix() - p.product(k).scaled_matrix()).cwiseAbs().maxCoeff(), 1e-6 * sc);
        }
    }
}

TEST(SamplePathTest, ReorthogonalizationBoundedWalk) {
    // elliptic generators by irrational angles: products stay bounded over 1e5 steps
    std::vector<Atom> atoms{{"R1", Isometry::rotation(3, 1, 2, 1.0), 0.5},
                            {"R2", Isometry::rotation(3, 2, 3, std::sqrt(2.0)), 0.5}};
    GroupDistribution mu(atoms);
    auto p = sample_path(mu, 100000, RngSpec(2), 0);
    for (std::size_t k = 0; k <= 100000; k += 1000) EXPECT_LT(p.product(k).lorentz_defect(), 1e-6);
    EXPECT_LT(p.product(100000).lorentz_defect(), 1e-6);
    // and a loxodromic-heavy walk in SL2 keeps the scale-relative defect small
    auto q = sample_path(builtin::psl2z_uniform_tts(), 20000, RngSpec(3), 0);
    EXPECT_LT(q.product(20000).lorentz_defect(), 1e-6);
}

TEST(BiInfinite, Basics) {
    const auto g = builtin::hyperbolic_pointmass(0.5);
    auto path = sample_bi_infinite(g, 6, RngSpec(5), 0);
    const ModelPoint x = hp(0.3, 1.2);
    EXPECT_NEAR(distance(path.position(0, x), x), 0.0, 1e-15);
    const Isometry A = g[0].element;
    for (long k = -6; k <= 6; ++k) {
        Isometry p = Isometry::identity(2);
        for (long j = 0; j < std::abs(k); ++j) p = p * (k > 0 ? A : A.inverse());
        EXPECT_NEAR(distance(path.position(k, x), p.apply(x)), 0.0, 1e-9);
    }
    EXPECT_THROW(sample_bi_infinite(g, 0, RngSpec(5), 0), std::invalid_argument);
}

TEST(BiInfinite, FirstStepMarginalChiSquare) {
    // weights 1/2, 1/3, 1/6; chi-square with 2 dof, p > 0.001 <=> stat < 13.82
    std::vector<Atom> atoms{{"T", Isometry::from_sl2(sl2(1, 1, 0, 1)), 0.5},
                            {"T^-1", Isometry::from_sl2(sl2(1, -1, 0, 1)), 1.0 / 3.0},
                            {"S", Isometry::from_sl2(sl2(0, -1, 1, 0)), 1.0 / 6.0}};
    GroupDistribution mu(atoms);
    std::array<double, 3> count{};
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        auto p = sample_bi_infinite(mu, 1, RngSpec(77), i);
        count[p.forward.increment(1)] += 1;
    }
    double chi = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double e = N * atoms[a].weight;
        chi += (count[a] - e) * (count[a] - e) / e;
    }
    EXPECT_LT(chi, 13.82);
}

TEST(StepMoment, Examples) {
    const ModelPoint i = hp(0, 1);
    EXPECT_EQ(step_moment(GroupDistribution::point_mass("e", Isometry::identity(2)), i), 0.0);
    EXPECT_NEAR(step_moment(builtin::hyperbolic_pointmass(1.0), i), 1.0, 1e-12);
    const double expected = 2.0 / 3.0 * std::acosh(1.5);
    EXPECT_NEAR(step_moment(builtin::psl2z_uniform_tts(), i), expected, 1e-12);
    EXPECT_NEAR(expected, 0.641616, 1e-6);
}

TEST(Diagnostics, NonElementarity) {
    EXPECT_TRUE(diagnostics(builtin::psl2z_uniform_tts()).empty());
    EXPECT_FALSE(diagnostics(builtin::hyperbolic_pointmass(1.0)).empty());
    EXPECT_FALSE(diagnostics(builtin::parabolic_pointmass()).empty());
}

TEST(Rng, StreamsAndUniform) {
    const RngSpec a(9);
    auto s1 = a.stream(3), s2 = a.stream(3), s3 = a.stream(4);
    EXPECT_EQ(s1(), s2());
    EXPECT_NE(s2(), s3());
    EXPECT_NE(a.derive(1).master_seed(), a.derive(2).master_seed());
    auto e = a.stream(0);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(e);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        mean += u;
    }
    EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}
