#pragma once

// Collocation-point samplers.
//
// Adaptive samplers target q(x) ∝ R_abs(x)^p relative to a proposal
// distribution (uniform annular on balls, uniform on the square). None of them
// needs the normalizing constant of q.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <vector>

#include "deepls/batch.hpp"
#include "deepls/problems.hpp"
#include "deepls/residual.hpp"
#include "deepls/rng.hpp"

namespace deepls {

namespace detail {

inline Vector random_direction(int d, Rng& rng)
{
    Vector g(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i)
            g[i] = rng.normal();
        norm = g.norm();
    } while (norm == 0.0);
    return g / norm;
}

/// Radius uniform in volume over the shell r_in < |x| < r_out in d dimensions.
inline double shell_radius(double r_in, double r_out, int d, double u)
{
    const double lo = std::pow(r_in, d), hi = std::pow(r_out, d);
    const double r = std::pow(lo + u * (hi - lo), 1.0 / d);
    return std::clamp(r, std::nextafter(r_in, 1.0), std::nextafter(r_out, 0.0));
}

} // namespace detail

/// N₁/N_a points uniform (by volume) in each shell {k/N_a < |x| < (k+1)/N_a},
/// shells in increasing k order.
inline SampleBatch sample_uniform_annular(Eigen::Index n, int annuli, int d, Rng& rng)
{
    if (annuli < 1 || n % annuli != 0)
        fail(ErrorKind::config, "uniform annular sampling needs annuli to divide the point count");
    require(d >= 1, "sample_uniform_annular: dimension must be positive");
    SampleBatch out;
    out.points.resize(d, n);
    out.sampler = SamplerKind::annular;
    out.seed = rng.seed();
    const Eigen::Index per_shell = n / annuli;
    for (int k = 0; k < annuli; ++k) {
        const double r_in = double(k) / annuli, r_out = double(k + 1) / annuli;
        for (Eigen::Index j = 0; j < per_shell; ++j) {
            const double r = detail::shell_radius(r_in, r_out, d, rng.uniform());
            out.points.col(k * per_shell + j) = r * detail::random_direction(d, rng);
        }
    }
    return out;
}

/// Independent draws from the annular mixture: pick a shell uniformly, then a
/// volume-uniform point inside it. Same marginal law as sample_uniform_annular,
/// but i.i.d. and in random order, which Markov-chain proposals require.
inline Vector draw_annular(int annuli, int d, Rng& rng)
{
    const auto k = double(rng.index(std::uint64_t(annuli)));
    const double r = detail::shell_radius(k / annuli, (k + 1.0) / annuli, d, rng.uniform());
    return r * detail::random_direction(d, rng);
}

/// Independent proposal points from the standard interior law of a domain:
/// annular for balls (times U(0,1) in time for the cylinder), uniform on the
/// unit square.
inline Vector draw_interior(const DomainDescriptor& domain, int annuli, Rng& rng)
{
    switch (domain.kind) {
    case DomainKind::unit_ball:
        return draw_annular(annuli, domain.spatial_dim, rng);
    case DomainKind::ball_time_cylinder: {
        Vector p(domain.point_dim());
        p.head(domain.spatial_dim) = draw_annular(annuli, domain.spatial_dim, rng);
        double t;
        do
            t = rng.uniform();
        while (t == 0.0);
        p[domain.spatial_dim] = t;
        return p;
    }
    case DomainKind::unit_square: {
        Vector p(2);
        do {
            p[0] = rng.uniform();
            p[1] = rng.uniform();
        } while (p[0] == 0.0 || p[1] == 0.0);
        return p;
    }
    }
    fail(ErrorKind::contract, "unknown domain kind");
}

inline SampleBatch sample_interior_iid(const DomainDescriptor& domain, Eigen::Index n, int annuli, Rng& rng)
{
    SampleBatch out;
    out.points.resize(domain.point_dim(), n);
    out.sampler = domain.kind == DomainKind::unit_square ? SamplerKind::uniform : SamplerKind::annular;
    out.seed = rng.seed();
    for (Eigen::Index j = 0; j < n; ++j)
        out.points.col(j) = draw_interior(domain, annuli, rng);
    return out;
}

/// Baseline (non-adaptive) interior batch: stratified annular for ball-based
/// domains, uniform on the unit square.
inline SampleBatch sample_interior_baseline(const DomainDescriptor& domain, Eigen::Index n, int annuli, Rng& rng)
{
    switch (domain.kind) {
    case DomainKind::unit_ball:
        return sample_uniform_annular(n, annuli, domain.spatial_dim, rng);
    case DomainKind::ball_time_cylinder: {
        auto spatial = sample_uniform_annular(n, annuli, domain.spatial_dim, rng);
        SampleBatch out = spatial;
        out.points.resize(domain.point_dim(), n);
        out.points.topRows(domain.spatial_dim) = spatial.points;
        for (Eigen::Index j = 0; j < n; ++j) {
            double t;
            do
                t = rng.uniform();
            while (t == 0.0);
            out.points(domain.spatial_dim, j) = t;
        }
        return out;
    }
    case DomainKind::unit_square:
        return sample_interior_iid(domain, n, annuli, rng);
    }
    fail(ErrorKind::contract, "unknown domain kind");
}

/// Boundary points: uniform on the unit sphere (normalized Gaussians) or on the
/// square's perimeter. Time-dependent problems pair sphere points with
/// t ~ U(0,1) and place the problem's initial-slice share at t = 0 with
/// volume-uniform x in the ball. Points are grouped by kind, in split order.
inline SampleBatch sample_boundary(Eigen::Index n2, const PdeProblem& problem, Rng& rng)
{
    require(n2 >= 1, "sample_boundary: at least one point is required");
    const auto& domain = problem.domain();
    const int d = domain.spatial_dim;
    SampleBatch out;
    out.region = Region::boundary;
    out.sampler = SamplerKind::boundary;
    out.seed = rng.seed();
    out.points.resize(domain.point_dim(), n2);
    Eigen::Index col = 0;
    for (const auto& [kind, count] : problem.boundary_split(n2)) {
        for (Eigen::Index j = 0; j < count; ++j, ++col) {
            auto p = out.points.col(col);
            if (domain.kind == DomainKind::unit_square) {
                const double s = rng.uniform(0.0, 4.0);
                const int side = std::min(int(s), 3);
                const double a = s - side;
                switch (side) {
                case 0: p << a, 0.0; break;
                case 1: p << 1.0, a; break;
                case 2: p << 1.0 - a, 1.0; break;
                default: p << 0.0, 1.0 - a; break;
                }
            } else if (kind == BoundaryKind::dirichlet) {
                p.head(d) = detail::random_direction(d, rng);
                if (domain.time_dependent())
                    p[d] = rng.uniform();
            } else {
                const double r = detail::shell_radius(0.0, 1.0, d, rng.uniform());
                p.head(d) = r * detail::random_direction(d, rng);
                p[d] = 0.0;
            }
            out.kinds.push_back(kind);
        }
    }
    if (!domain.time_dependent())
        out.kinds.clear();
    return out;
}

/// Fisher-Yates shuffle of the batch columns.
inline SampleBatch shuffled(const SampleBatch& batch, Rng& rng)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(batch.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.index(i)]);
    return batch.select(idx);
}

/// Draws `count` proposal points.
using Proposal = std::function<SampleBatch(Eigen::Index count, Rng& rng)>;

inline Proposal interior_proposal(const DomainDescriptor& domain, int annuli)
{
    return [domain, annuli](Eigen::Index n, Rng& rng) { return sample_interior_iid(domain, n, annuli, rng); };
}

/// Boundary proposals in random order (the split by kind is kept exact).
inline Proposal boundary_proposal(const PdeProblem& problem)
{
    return [&problem](Eigen::Index n, Rng& rng) { return shuffled(sample_boundary(n, problem, rng), rng); };
}

/// x ↦ R_abs(x)^p over a batch. `source` returns R_abs (non-negative).
struct ResidualDensity {
    std::function<Vector(const SampleBatch&)> source;
    double p = 1.0;
    Region region = Region::interior;

    Vector operator()(const SampleBatch& batch) const
    {
        Vector v = source(batch);
        if (!v.allFinite() || (v.array() < 0.0).any())
            fail(ErrorKind::divergence, "residual density produced a negative or non-finite value");
        if (p == 0.0)
            return Vector::Ones(v.size());
        if (p != 1.0)
            v = v.array().pow(p);
        return v;
    }
};

/// R_abs^p of the network's residual for `problem`.
inline ResidualDensity network_residual_density(const PdeProblem& problem, const SolutionNetwork& net,
                                                const StencilConfig& stencil, double p, Region region)
{
    require(p >= 0.0, "residual exponent p must be non-negative");
    return {[&problem, &net, stencil](const SampleBatch& b) {
                return Vector(residuals(problem, network_field(net), b, stencil).cwiseAbs());
            },
            p, region};
}

namespace detail {

struct MhStreams {
    Rng proposals;
    Rng uniforms;
    explicit MhStreams(Rng& rng) : proposals(rng(), 1), uniforms(rng(), 2) {}
};

/// Accept/reject rule shared by both Metropolis variants: a candidate whose
/// density is at least the current one is taken without consulting u;
/// otherwise it is kept unless ratio < u. A zero current density therefore
/// always accepts.
inline bool mh_accept(double candidate, double current, double u)
{
    if (candidate >= current)
        return true;
    return !(candidate / current < u);
}

inline void require_live_density(bool any_positive)
{
    if (!any_positive)
        fail(ErrorKind::degenerate_density, "Metropolis-Hastings: residual density is zero on every proposal");
}

} // namespace detail

/// Independence Metropolis-Hastings, one proposal at a time. The chain has
/// N + b states, the first being the first proposal; the first b states are
/// discarded as burn-in.
inline SampleBatch mh_sample(const ResidualDensity& density, Eigen::Index n, Eigen::Index burn_in,
                             const Proposal& proposal, Rng& rng)
{
    require(n >= 1 && burn_in >= 0, "mh_sample: need N >= 1 and b >= 0");
    detail::MhStreams streams(rng);
    const Eigen::Index total = n + burn_in;

    SampleBatch current = proposal(1, streams.proposals);
    current.region = density.region;
    double current_density = density(current)[0];
    bool any_positive = current_density > 0.0;

    SampleBatch out = current;
    out.points.resize(current.points.rows(), n);
    out.kinds.clear();
    auto record = [&](Eigen::Index state) {
        if (state < burn_in)
            return;
        out.points.col(state - burn_in) = current.points.col(0);
        if (!current.kinds.empty())
            out.kinds.push_back(current.kinds[0]);
    };
    record(0);
    for (Eigen::Index state = 1; state < total; ++state) {
        SampleBatch candidate = proposal(1, streams.proposals);
        candidate.region = density.region;
        const double cand_density = density(candidate)[0];
        const double u = streams.uniforms.uniform();
        any_positive = any_positive || cand_density > 0.0;
        if (detail::mh_accept(cand_density, current_density, u)) {
            current = std::move(candidate);
            current_density = cand_density;
        }
        record(state);
    }
    detail::require_live_density(any_positive);
    out.sampler = SamplerKind::mh;
    out.region = density.region;
    return out;
}

/// Vectorized Metropolis-Hastings: all N + b proposals and uniforms are drawn
/// up front and the densities evaluated in one batch; the accept/reject sweep
/// then copies rejected states (and their densities) forward. Returns the last
/// N states. Produces exactly the output of mh_sample for the same generator
/// when proposals are drawn i.i.d.
inline SampleBatch mh_sample_vectorized(const ResidualDensity& density, Eigen::Index n, Eigen::Index burn_in,
                                        const Proposal& proposal, Rng& rng)
{
    require(n >= 1 && burn_in >= 0, "mh_sample_vectorized: need N >= 1 and b >= 0");
    detail::MhStreams streams(rng);
    const Eigen::Index total = n + burn_in;

    SampleBatch chain = proposal(total, streams.proposals);
    chain.region = density.region;
    Vector re = density(chain);
    Vector u(total);
    for (Eigen::Index i = 1; i < total; ++i)
        u[i] = streams.uniforms.uniform();
    detail::require_live_density((re.array() > 0.0).any());

    for (Eigen::Index i = 0; i + 1 < total; ++i) {
        if (!detail::mh_accept(re[i + 1], re[i], u[i + 1])) {
            chain.points.col(i + 1) = chain.points.col(i);
            re[i + 1] = re[i];
            if (!chain.kinds.empty())
                chain.kinds[std::size_t(i + 1)] = chain.kinds[std::size_t(i)];
        }
    }
    std::vector<Eigen::Index> tail(static_cast<std::size_t>(n));
    std::iota(tail.begin(), tail.end(), burn_in);
    SampleBatch out = chain.select(tail);
    out.sampler = SamplerKind::mh;
    out.region = density.region;
    return out;
}

/// Self-normalized resampling: draw a proposal pool, weight each pool point by
/// R_abs^p, normalize by the weight sum and draw N points with replacement from
/// the resulting discrete distribution. If every weight is zero the first N
/// pool points are returned and a warning is logged.
inline SampleBatch self_normalized_sample(const ResidualDensity& density, Eigen::Index n, Rng& rng,
                                          Eigen::Index pool_size, const Proposal& proposal)
{
    require(n >= 1, "self_normalized_sample: N must be positive");
    if (pool_size < n)
        fail(ErrorKind::config, "pool_size must be at least the number of requested points");
    SampleBatch pool = proposal(pool_size, rng);
    pool.region = density.region;
    const Vector w = density(pool);

    std::vector<double> cumulative(static_cast<std::size_t>(pool_size));
    double running = 0.0;
    for (Eigen::Index i = 0; i < pool_size; ++i) {
        running += w[i];
        cumulative[std::size_t(i)] = running;
    }
    std::vector<Eigen::Index> picks(static_cast<std::size_t>(n));
    if (!(running > 0.0)) {
        std::clog << "warning: self-normalized sampling saw an all-zero residual; using the proposal pool\n";
        std::iota(picks.begin(), picks.end(), Eigen::Index{0});
    } else {
        for (auto& pick : picks) {
            const double target = rng.uniform() * running;
            const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
            // first index whose cumulative weight exceeds the target; it has w > 0
            pick = std::min<Eigen::Index>(Eigen::Index(it - cumulative.begin()), pool_size - 1);
        }
    }
    SampleBatch out = pool.select(picks);
    out.sampler = SamplerKind::self_normalized;
    return out;
}

/// Residual-based adaptive refinement with a fixed budget: draw `base_count`
/// proposal points and append copies of the `top_k` with the largest density
/// (ties broken by lower index first).
inline SampleBatch rar_sample(const ResidualDensity& density, Rng& rng, const Proposal& proposal,
                              Eigen::Index base_count = 10000, Eigen::Index top_k = 2000)
{
    require(base_count >= 1 && top_k >= 0 && top_k <= base_count, "rar_sample: need 0 <= top_k <= base_count");
    SampleBatch base = proposal(base_count, rng);
    base.region = density.region;
    const Vector w = density(base);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(base_count));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return w[a] > w[b]; });
    std::vector<Eigen::Index> all(static_cast<std::size_t>(base_count));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    all.insert(all.end(), order.begin(), order.begin() + top_k);
    SampleBatch out = base.select(all);
    out.sampler = SamplerKind::rar;
    return out;
}

} // namespace deepls
