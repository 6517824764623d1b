#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "deepls/batch.hpp"
#include "deepls/problems.hpp"

namespace deepls {

/// Any scalar field evaluated on a batch of points (one value per column).
using BatchField = std::function<Vector(const Points&)>;

inline BatchField network_field(const SolutionNetwork& net)
{
    return [&net](const Points& x) { return net.forward(x); };
}

/// The exact solution of `problem`, usable wherever a network is expected.
inline BatchField exact_field(const PdeProblem& problem)
{
    return [&problem](const Points& x) {
        Vector out(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out[j] = problem.exact(x.col(j));
        return out;
    };
}

/// Stencil probes for a range of batch points, concatenated. Probes of point
/// i occupy columns [offsets[i], offsets[i+1]).
struct ProbePlan {
    Points probes;
    std::vector<Eigen::Index> offsets;
};

inline const ProbeLayout& layout_for(const PdeProblem& problem, const SampleBatch& batch, Eigen::Index i)
{
    return batch.region == Region::interior ? problem.interior_layout() : problem.boundary_layout(batch.kind(i));
}

inline ProbePlan build_probe_plan(const PdeProblem& problem, const SampleBatch& batch, Eigen::Index first,
                                  Eigen::Index last, double h)
{
    ProbePlan plan;
    plan.offsets.reserve(std::size_t(last - first + 1));
    Eigen::Index total = 0;
    for (Eigen::Index i = first; i < last; ++i) {
        plan.offsets.push_back(total);
        total += Eigen::Index(layout_for(problem, batch, i).size());
    }
    plan.offsets.push_back(total);
    plan.probes.resize(batch.points.rows(), total);
    for (Eigen::Index i = first; i < last; ++i) {
        const auto& layout = layout_for(problem, batch, i);
        Eigen::Index col = plan.offsets[std::size_t(i - first)];
        for (const auto& o : layout.offsets()) {
            auto c = plan.probes.col(col++);
            c = batch.points.col(i);
            if (o.axis >= 0)
                c[o.axis] += o.steps * h;
        }
    }
    return plan;
}

/// Combines the probe values of point i into its residual (and, if `dres` is
/// non-empty, the partial derivatives with respect to those probe values).
inline double combine_residual(const PdeProblem& problem, const SampleBatch& batch, Eigen::Index i,
                               std::span<const double> probes, double h, std::span<double> dres)
{
    const auto p = batch.points.col(i);
    return batch.region == Region::interior ? problem.interior_residual(p, probes, h, dres)
                                            : problem.boundary_residual(p, batch.kind(i), probes, h, dres);
}

/// Signed discretized residuals (Dφ - f or Bφ - g) of `field` on every point.
inline Vector residuals(const PdeProblem& problem, const BatchField& field, const SampleBatch& batch,
                        const StencilConfig& stencil, Eigen::Index chunk = 512)
{
    Vector out(batch.size());
    for (Eigen::Index first = 0; first < batch.size(); first += chunk) {
        const Eigen::Index last = std::min(first + chunk, batch.size());
        const auto plan = build_probe_plan(problem, batch, first, last, stencil.h);
        const Vector values = field(plan.probes);
        for (Eigen::Index i = first; i < last; ++i) {
            const auto o = plan.offsets[std::size_t(i - first)];
            const auto n = plan.offsets[std::size_t(i - first + 1)] - o;
            out[i] = combine_residual(problem, batch, i, {values.data() + o, std::size_t(n)}, stencil.h, {});
        }
    }
    return out;
}

/// R_abs at a single point. The point must lie in the stated region.
inline double residual_abs(const PdeProblem& problem, const BatchField& field, const Vector& x, Region region,
                           const StencilConfig& stencil, BoundaryKind kind = BoundaryKind::dirichlet)
{
    const auto cls = problem.domain().classify(x);
    if ((region == Region::interior) != (cls == PointClass::interior) || cls == PointClass::outside)
        fail(ErrorKind::contract, "residual_abs: point is not in the " + std::string(to_string(region)));
    SampleBatch one;
    one.points = x;
    one.region = region;
    if (region == Region::boundary)
        one.kinds = {kind};
    return std::abs(residuals(problem, field, one, stencil)[0]);
}

inline double residual_abs(const PdeProblem& problem, const SolutionNetwork& net, const Vector& x, Region region,
                           const StencilConfig& stencil, BoundaryKind kind = BoundaryKind::dirichlet)
{
    return residual_abs(problem, network_field(net), x, region, stencil, kind);
}

} // namespace deepls
