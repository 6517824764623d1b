#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "deepls/problems.hpp"
#include "deepls/residual.hpp"
#include "deepls/samplers.hpp"

namespace deepls {

/// Seed of every test set; the stream id distinguishes problems and dimensions.
inline constexpr std::uint64_t test_set_seed = 20220601;

/// Fixed evaluation points with the exact solution cached.
struct TestSet {
    Points points;
    Vector exact;
};

/// `size` points from the baseline interior law (stratified annular on balls,
/// uniform on the square), drawn from a generator fixed per problem and
/// dimension so every model of the same problem is scored on identical points.
inline TestSet make_test_set(const PdeProblem& problem, Eigen::Index size = 10000, int annuli = 10,
                             std::uint64_t seed = test_set_seed)
{
    std::uint32_t name_hash = 2166136261u; // FNV-1a
    for (const char c : problem.name())
        name_hash = (name_hash ^ std::uint8_t(c)) * 16777619u;
    const std::uint64_t id = (std::uint64_t{name_hash} << 16) | std::uint64_t(problem.spatial_dim());
    Rng rng(seed, make_stream(StreamTag::test_set, id));
    TestSet t;
    t.points = sample_interior_baseline(problem.domain(), size, annuli, rng).points;
    t.exact = exact_field(problem)(t.points);
    return t;
}

/// ||φ - u||₂ / ||u||₂ over paired value vectors.
inline double rel_l2_error(const Vector& approx, const Vector& exact)
{
    require(approx.size() == exact.size() && exact.size() > 0, "rel_l2_error: size mismatch");
    const double denom = exact.norm();
    if (denom == 0.0)
        fail(ErrorKind::undefined_denominator, "rel_l2_error: exact solution vanishes on the test set");
    return (approx - exact).norm() / denom;
}

/// max|φ - u| / max|u| over paired value vectors.
inline double max_modulus_error(const Vector& approx, const Vector& exact)
{
    require(approx.size() == exact.size() && exact.size() > 0, "max_modulus_error: size mismatch");
    const double denom = exact.cwiseAbs().maxCoeff();
    if (denom == 0.0)
        fail(ErrorKind::undefined_denominator, "max_modulus_error: exact solution vanishes on the test set");
    return (approx - exact).cwiseAbs().maxCoeff() / denom;
}

inline double rel_l2_error(const BatchField& field, const TestSet& test)
{
    return rel_l2_error(field(test.points), test.exact);
}
inline double max_modulus_error(const BatchField& field, const TestSet& test)
{
    return max_modulus_error(field(test.points), test.exact);
}
inline double rel_l2_error(const SolutionNetwork& net, const TestSet& test)
{
    return rel_l2_error(net.forward(test.points), test.exact);
}
inline double max_modulus_error(const SolutionNetwork& net, const TestSet& test)
{
    return max_modulus_error(net.forward(test.points), test.exact);
}

/// Both accuracy ratios from one forward pass.
struct Accuracy {
    double rel_l2 = 0.0;
    double max_mod = 0.0;
};

inline Accuracy assess(const SolutionNetwork& net, const TestSet& test)
{
    const Vector phi = net.forward(test.points);
    return {rel_l2_error(phi, test.exact), max_modulus_error(phi, test.exact)};
}

/// 1 - err(AS)/err(basic), in percent.
inline double error_reduction(double as_err, double basic_err)
{
    if (!(basic_err > 0.0))
        fail(ErrorKind::contract, "error_reduction: baseline error must be positive");
    return 100.0 * (1.0 - as_err / basic_err);
}

} // namespace deepls
