#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepls/domain.hpp"
#include "deepls/network.hpp"

namespace deepls {

enum class SamplerKind { annular, uniform, boundary, mh, self_normalized, rar };

inline std::string to_string(SamplerKind k)
{
    switch (k) {
    case SamplerKind::annular: return "annular";
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::boundary: return "boundary";
    case SamplerKind::mh: return "mh";
    case SamplerKind::self_normalized: return "self_normalized";
    case SamplerKind::rar: return "rar";
    }
    return "unknown";
}

inline SamplerKind parse_sampler(const std::string& s)
{
    if (s == "annular") return SamplerKind::annular;
    if (s == "uniform") return SamplerKind::uniform;
    if (s == "mh") return SamplerKind::mh;
    if (s == "self_normalized") return SamplerKind::self_normalized;
    if (s == "rar") return SamplerKind::rar;
    fail(ErrorKind::config, "unknown sampler '" + s + "' (expected annular|mh|self_normalized|rar)");
}

/// Ordered collocation points with provenance. Boundary batches carry one
/// BoundaryKind per point; interior batches leave `kinds` empty.
struct SampleBatch {
    Points points;
    Region region = Region::interior;
    std::vector<BoundaryKind> kinds;
    SamplerKind sampler = SamplerKind::uniform;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;

    Eigen::Index size() const noexcept { return points.cols(); }
    int dim() const noexcept { return int(points.rows()); }

    BoundaryKind kind(Eigen::Index i) const
    {
        return kinds.empty() ? BoundaryKind::dirichlet : kinds[std::size_t(i)];
    }

    /// Batch made of the selected columns, in the given order.
    SampleBatch select(const std::vector<Eigen::Index>& idx) const
    {
        SampleBatch out;
        out.region = region;
        out.sampler = sampler;
        out.epoch = epoch;
        out.seed = seed;
        out.points.resize(points.rows(), Eigen::Index(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out.points.col(Eigen::Index(j)) = points.col(idx[j]);
            if (!kinds.empty())
                out.kinds.push_back(kinds[std::size_t(idx[j])]);
        }
        return out;
    }

    void append(const SampleBatch& other)
    {
        if (points.cols() == 0) {
            points = other.points;
            kinds = other.kinds;
            return;
        }
        require(other.points.rows() == points.rows(), "appending batch of different dimension");
        Points merged(other.points.rows(), points.cols() + other.points.cols());
        merged << points, other.points;
        if (!kinds.empty() || !other.kinds.empty()) {
            if (kinds.empty())
                kinds.assign(std::size_t(points.cols()), BoundaryKind::dirichlet);
            if (other.kinds.empty())
                kinds.insert(kinds.end(), std::size_t(other.points.cols()), BoundaryKind::dirichlet);
            else
                kinds.insert(kinds.end(), other.kinds.begin(), other.kinds.end());
        }
        points = std::move(merged);
    }
};

} // namespace deepls
