#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "deepls/estimators.hpp"
#include "deepls/metrics.hpp"

using namespace deepls;

namespace {

template <class F>
ErrorKind error_kind(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no deepls::Error thrown";
    return ErrorKind::io;
}

Points uniform_points(Eigen::Index n, std::uint64_t stream)
{
    Rng rng(7, make_stream(StreamTag::user, stream));
    Points x(1, n);
    for (Eigen::Index i = 0; i < n; ++i)
        x(0, i) = rng.uniform();
    return x;
}

// inverse CDF of q(x) = 2x on (0,1)
Points linear_points(Eigen::Index n, std::uint64_t stream)
{
    Points x = uniform_points(n, stream);
    x = x.array().sqrt().matrix();
    return x;
}

double coord(const Eigen::Ref<const Vector>& x) { return x[0]; }
double one(const Eigen::Ref<const Vector>&) { return 1.0; }
double twice(const Eigen::Ref<const Vector>& x) { return 2.0 * x[0]; }

} // namespace

TEST(Errors, ExactGivesZero)
{
    const auto problem = make_problem("elliptic", 3);
    const TestSet t = make_test_set(*problem, 1000);
    EXPECT_EQ(rel_l2_error(exact_field(*problem), t), 0.0);
    EXPECT_EQ(max_modulus_error(exact_field(*problem), t), 0.0);
}

TEST(Errors, DoubledSolutionGivesOne)
{
    const auto problem = make_problem("hyperbolic", 3);
    const TestSet t = make_test_set(*problem, 1000);
    const Vector twice_u = 2.0 * t.exact;
    EXPECT_NEAR(rel_l2_error(twice_u, t.exact), 1.0, 1e-15);
    EXPECT_NEAR(max_modulus_error(twice_u, t.exact), 1.0, 1e-15);
}

TEST(Errors, ConstantShift)
{
    const auto problem = make_problem("elliptic", 4);
    const TestSet t = make_test_set(*problem);
    const double c = 0.037;
    const double s = t.exact.squaredNorm();
    const Vector shifted = t.exact.array() + c;
    EXPECT_NEAR(rel_l2_error(shifted, t.exact), c * std::sqrt(10000.0) / std::sqrt(s), 1e-14);
}

TEST(Errors, MaxModulusShiftWithUnitMax)
{
    Vector u(4);
    u << 0.25, -1.0, 0.5, 0.0;
    const Vector phi = u.array() + 0.1;
    EXPECT_NEAR(max_modulus_error(phi, u), 0.1, 1e-15);
}

TEST(Errors, MaxModulusMonotoneUnderPointError)
{
    const auto problem = make_problem("parabolic", 3);
    const TestSet t = make_test_set(*problem, 500);
    Rng rng(3, make_stream(StreamTag::user, 1));
    Vector phi = t.exact.array() + 0.01 * t.exact.array().sin();
    for (int k = 0; k < 50; ++k) {
        // push |φ-u| up at a single point
        const Eigen::Index j = Eigen::Index(rng.index(500));
        Vector grown = phi;
        grown[j] += (phi[j] >= t.exact[j] ? 1.0 : -1.0) * rng.uniform();
        EXPECT_GE(max_modulus_error(grown, t.exact), max_modulus_error(phi, t.exact));
        phi = grown;
    }
}

TEST(Errors, ZeroIffEqual)
{
    Vector u = Vector::LinSpaced(20, -1.0, 1.0);
    Vector phi = u;
    EXPECT_EQ(rel_l2_error(phi, u), 0.0);
    phi[7] += 1e-12;
    EXPECT_GT(rel_l2_error(phi, u), 0.0);
    EXPECT_GT(max_modulus_error(phi, u), 0.0);
}

TEST(Errors, ZeroDenominator)
{
    const Vector zero = Vector::Zero(5);
    const Vector phi = Vector::Ones(5);
    EXPECT_EQ(error_kind([&] { rel_l2_error(phi, zero); }), ErrorKind::undefined_denominator);
    EXPECT_EQ(error_kind([&] { max_modulus_error(phi, zero); }), ErrorKind::undefined_denominator);
}

TEST(Errors, TestSetFixedPerProblem)
{
    const auto a = make_problem("elliptic", 5);
    const auto b = make_problem("elliptic", 5);
    const TestSet ta = make_test_set(*a);
    const TestSet tb = make_test_set(*b);
    EXPECT_EQ(ta.points.cols(), 10000);
    EXPECT_TRUE(ta.points == tb.points);
    EXPECT_TRUE(ta.exact == tb.exact);
    // other dimensions and problems get their own points
    const auto c = make_problem("hyperbolic", 5);
    const TestSet tc = make_test_set(*c);
    EXPECT_FALSE(tc.points.rows() == ta.points.rows() && tc.points == ta.points);
    for (Eigen::Index i = 0; i < ta.points.cols(); ++i)
        ASSERT_LT(ta.points.col(i).norm(), 1.0 + 1e-12);
}

TEST(ErrorReduction, TableValues)
{
    EXPECT_NEAR(error_reduction(8.784735e-3, 2.526952e-2), 65.24, 0.005);
    // Table 5 prints 53.54; its own error columns give 53.64
    EXPECT_NEAR(error_reduction(1.731916e-2, 3.735915e-2), 53.64, 0.005);
}

TEST(ErrorReduction, Identities)
{
    for (double x : {1e-6, 0.03, 1.0, 250.0}) {
        EXPECT_EQ(error_reduction(x, x), 0.0);
        EXPECT_EQ(error_reduction(0.0, x), 100.0);
    }
    EXPECT_LT(error_reduction(0.2, 0.1), 0.0);
    EXPECT_EQ(error_kind([] { error_reduction(0.1, 0.0); }), ErrorKind::contract);
    EXPECT_EQ(error_kind([] { error_reduction(0.1, -1.0); }), ErrorKind::contract);
}

TEST(Estimators, PlainTrivial)
{
    const Points x = uniform_points(1000, 1);
    EXPECT_EQ(plain_mc_estimate(one, one, x, 1.0), 1.0);
    EXPECT_EQ(plain_mc_estimate([](const Eigen::Ref<const Vector>&) { return 0.0; }, one, x, 1.0), 0.0);
    EXPECT_EQ(error_kind([] { plain_mc_estimate(one, one, Points(1, 0), 1.0); }), ErrorKind::contract);
}

TEST(Estimators, PlainLinearIntegral)
{
    const Points x = uniform_points(1000000, 2);
    EXPECT_NEAR(plain_mc_estimate(coord, one, x, 1.0), 0.5, 1e-3);
}

TEST(Estimators, ImportanceWithSameDensityIsPlain)
{
    const Points x = uniform_points(5000, 3);
    EXPECT_EQ(importance_estimate(coord, one, one, x, 1.0), plain_mc_estimate(coord, one, x, 1.0));
}

TEST(Estimators, ImportanceProportionalDensityIsExact)
{
    // w·p / q = 1/2 at every draw
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Points x = linear_points(s == 0 ? 1000000 : 1000, 10 + s);
        EXPECT_NEAR(importance_estimate(coord, one, twice, x, 1.0), 0.5, 1e-12);
    }
}

TEST(Estimators, Unbiased)
{
    // q(x) = (1 + x)/1.5 is not proportional to w·p, so individual estimates scatter
    const auto q = [](const Eigen::Ref<const Vector>& x) { return (1.0 + x[0]) / 1.5; };
    std::vector<double> est;
    for (std::uint64_t r = 0; r < 200; ++r) {
        Points x = uniform_points(1000, 100 + r);
        // inverse CDF of q: x = -1 + sqrt(1 + 3u)
        x = ((1.0 + 3.0 * x.array()).sqrt() - 1.0).matrix();
        est.push_back(importance_estimate(coord, one, q, x, 1.0));
    }
    double mean = 0.0;
    for (double e : est)
        mean += e;
    mean /= double(est.size());
    double var = 0.0;
    for (double e : est)
        var += (e - mean) * (e - mean);
    var /= double(est.size() - 1);
    const double se = std::sqrt(var / double(est.size()));
    EXPECT_GT(se, 0.0);
    EXPECT_LT(std::abs(mean - 0.5), 3.0 * se);
}

TEST(Estimators, VarianceRatio)
{
    std::vector<double> plain, importance;
    for (std::uint64_t r = 0; r < 200; ++r) {
        plain.push_back(plain_mc_estimate(coord, one, uniform_points(1000, 1000 + r), 1.0));
        importance.push_back(importance_estimate(coord, one, twice, linear_points(1000, 2000 + r), 1.0));
    }
    const auto variance = [](const std::vector<double>& v) {
        double m = 0.0, s = 0.0;
        for (double e : v)
            m += e;
        m /= double(v.size());
        for (double e : v)
            s += (e - m) * (e - m);
        return s / double(v.size() - 1);
    };
    const double vp = variance(plain);
    EXPECT_NEAR(vp, 1.0 / 12.0 / 1000.0, 0.3 / 12.0 / 1000.0);
    EXPECT_LT(variance(importance), 1e-3 * vp);
}

TEST(Estimators, SupportViolation)
{
    Points x(1, 3);
    x << 0.2, 0.0, 0.7;
    // q vanishes at 0 where w·p = 0 too: allowed
    EXPECT_NO_THROW(importance_estimate(coord, one, twice, x, 1.0));
    const auto shifted = [](const Eigen::Ref<const Vector>& p) { return p[0] + 1.0; };
    EXPECT_EQ(error_kind([&] { importance_estimate(shifted, one, twice, x, 1.0); }), ErrorKind::support_violation);
}
