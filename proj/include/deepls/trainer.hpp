#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deepls/adam.hpp"
#include "deepls/metrics.hpp"
#include "deepls/residual.hpp"
#include "deepls/samplers.hpp"
#include "deepls/schedule.hpp"

namespace deepls {

enum class LrMode { staircase, constant };

struct TrainingConfig {
    std::string problem = "elliptic";
    int dim = 10;
    Architecture network{3, 100, 0}; // input_dim derived from the problem

    std::uint64_t epochs = 20000;
    Eigen::Index n1 = 12000;
    Eigen::Index n2 = 12000;
    double lambda = 10.0;

    SamplerKind sampler = SamplerKind::annular;
    double p = 1.0;
    Eigen::Index burn_in = 0;
    int annuli = 10;
    Eigen::Index pool_size = 0; // 0: same as the requested count
    bool boundary_adaptive = true;
    Eigen::Index rar_base_count = 10000;
    Eigen::Index rar_top_k = 2000;

    StencilConfig stencil;
    AdamHyper adam;
    LrMode lr_mode = LrMode::staircase;
    double constant_lr = 1e-3;

    std::uint64_t seed = 0;
    std::uint64_t eval_every = 100;
    std::uint64_t checkpoint_every = 0; // 0: only the final network
    Eigen::Index test_size = 10000;

    bool adaptive() const noexcept { return sampler != SamplerKind::annular && sampler != SamplerKind::uniform; }

    void validate() const
    {
        auto check = [](bool ok, const char* what) {
            if (!ok)
                fail(ErrorKind::config, what);
        };
        check(epochs >= 1, "epochs must be >= 1");
        check(n1 >= 1 && n2 >= 1, "n1 and n2 must be >= 1");
        check(lambda >= 0.0, "lambda must be >= 0");
        check(p >= 0.0, "p must be >= 0");
        check(burn_in >= 0, "burn_in must be >= 0");
        check(annuli >= 1, "annuli must be >= 1");
        check(pool_size == 0 || pool_size >= n1, "pool_size must be 0 or >= n1");
        check(rar_base_count >= 1 && rar_top_k >= 0 && rar_top_k <= rar_base_count,
              "rar counts must satisfy 0 <= top_k <= base_count");
        check(eval_every >= 1, "eval_every must be >= 1");
        check(constant_lr > 0.0, "lr must be positive");
        check(test_size >= 1, "test_size must be >= 1");
        check(network.depth >= 1 && network.width >= 1, "network depth and width must be >= 1");
        stencil.validate();
        // the unit square is sampled uniformly, without annuli
        if (problem != "poisson2d") {
            check(test_size % annuli == 0, "test_size must be a multiple of annuli");
            if (sampler == SamplerKind::annular)
                check(n1 % annuli == 0, "annular sampling needs annuli to divide n1");
        }
    }

    double learning_rate(std::uint64_t k) const
    {
        return lr_mode == LrMode::constant ? constant_lr : deepls::learning_rate(k, epochs);
    }
};

/// Empirical loss J = 1/N₁ Σ r_i² + λ/N₂ Σ r_j² with its residuals and,
/// optionally, ∇J. The gradient is exact for the discretized residuals: each
/// residual's cotangent is spread over its stencil probes with the stencil
/// coefficients and pulled back through the network.
struct LossEvaluation {
    double loss = 0.0;
    double interior_term = 0.0;
    double boundary_term = 0.0;
    Vector interior_residuals;
    Vector boundary_residuals;
    Vector gradient; // empty unless requested
};

namespace detail {

inline double accumulate_batch(const SolutionNetwork& net, const PdeProblem& problem, const SampleBatch& batch,
                               const StencilConfig& stencil, double weight, Vector& residual_out,
                               Vector* grad, Eigen::Index chunk)
{
    residual_out.resize(batch.size());
    double sum_sq = 0.0;
    std::vector<double> dres;
    SolutionNetwork::Cache cache;
    for (Eigen::Index first = 0; first < batch.size(); first += chunk) {
        const Eigen::Index last = std::min(first + chunk, batch.size());
        const auto plan = build_probe_plan(problem, batch, first, last, stencil.h);
        const Vector values = net.forward(plan.probes, grad ? &cache : nullptr);
        Vector cotangent = grad ? Vector::Zero(values.size()) : Vector();
        for (Eigen::Index i = first; i < last; ++i) {
            const auto o = plan.offsets[std::size_t(i - first)];
            const auto n = std::size_t(plan.offsets[std::size_t(i - first + 1)] - o);
            dres.assign(grad ? n : 0, 0.0);
            const double r = combine_residual(problem, batch, i, {values.data() + o, n}, stencil.h, dres);
            if (!std::isfinite(r)) {
                std::ostringstream msg;
                msg << "non-finite " << to_string(batch.region) << " residual at point ["
                    << batch.points.col(i).transpose() << "]";
                fail(ErrorKind::divergence, msg.str());
            }
            residual_out[i] = r;
            sum_sq += r * r;
            if (grad)
                for (std::size_t k = 0; k < n; ++k)
                    cotangent[o + Eigen::Index(k)] = 2.0 * weight * r * dres[k];
        }
        if (grad)
            net.accumulate_gradient(plan.probes, cache, cotangent, *grad);
    }
    return sum_sq;
}

} // namespace detail

inline LossEvaluation compute_loss(const SolutionNetwork& net, const SampleBatch& interior,
                                   const SampleBatch& boundary, double lambda, const PdeProblem& problem,
                                   const StencilConfig& stencil, bool with_gradient = false,
                                   Eigen::Index chunk = 256)
{
    require(interior.size() > 0 && boundary.size() > 0, "compute_loss: batches must be non-empty");
    require(interior.region == Region::interior && boundary.region == Region::boundary,
            "compute_loss: batch regions are swapped");
    LossEvaluation out;
    if (with_gradient)
        out.gradient = Vector::Zero(Eigen::Index(net.parameter_count()));
    Vector* grad = with_gradient ? &out.gradient : nullptr;
    const double w1 = 1.0 / double(interior.size());
    const double w2 = lambda / double(boundary.size());
    out.interior_term = w1 * detail::accumulate_batch(net, problem, interior, stencil, w1, out.interior_residuals,
                                                      grad, chunk);
    out.boundary_term = w2 * detail::accumulate_batch(net, problem, boundary, stencil, w2, out.boundary_residuals,
                                                      grad, chunk);
    out.loss = out.interior_term + out.boundary_term;
    if (!std::isfinite(out.loss))
        fail(ErrorKind::divergence, "loss is not finite");
    return out;
}

/// J for an arbitrary field (no gradient), e.g. the exact solution.
inline double empirical_loss(const PdeProblem& problem, const BatchField& field, const SampleBatch& interior,
                             const SampleBatch& boundary, double lambda, const StencilConfig& stencil)
{
    require(interior.size() > 0 && boundary.size() > 0, "empirical_loss: batches must be non-empty");
    const Vector ri = residuals(problem, field, interior, stencil);
    const Vector rb = residuals(problem, field, boundary, stencil);
    return ri.squaredNorm() / double(ri.size()) + lambda * rb.squaredNorm() / double(rb.size());
}

struct HistoryRow {
    std::uint64_t epoch = 0;
    double time_s = 0.0; // training time only
    double loss = 0.0;
    double rel_l2 = 0.0;
    double max_mod = 0.0;
};

using TrainingHistory = std::vector<HistoryRow>;

/// Counters for verifying which code paths a run touched.
struct TrainingStats {
    std::uint64_t adaptive_batches = 0;
    std::uint64_t density_evaluations = 0; // points whose residual density was evaluated
};

struct TrainingResult {
    SolutionNetwork net{Architecture{1, 1, 1}};
    TrainingHistory history;
    TrainingStats stats;
    bool diverged = false;
    std::string failure;
};

struct TrainingHooks {
    std::function<void(std::uint64_t epoch, const SolutionNetwork&)> on_checkpoint;
    std::function<void(const HistoryRow&)> on_record;
};

namespace detail {

inline ResidualDensity counted(ResidualDensity density, std::uint64_t& counter)
{
    auto source = std::move(density.source);
    density.source = [source, &counter](const SampleBatch& b) {
        counter += std::uint64_t(b.size());
        return source(b);
    };
    return density;
}

inline SampleBatch adaptive_batch(SamplerKind kind, const ResidualDensity& density, Eigen::Index count,
                                  const Proposal& proposal, const TrainingConfig& cfg, Rng& rng)
{
    switch (kind) {
    case SamplerKind::mh:
        return mh_sample_vectorized(density, count, cfg.burn_in, proposal, rng);
    case SamplerKind::self_normalized:
        return self_normalized_sample(density, count, rng, std::max(cfg.pool_size, count), proposal);
    case SamplerKind::rar: {
        // same top-k share as the interior budget
        const double share = double(cfg.rar_top_k) / double(cfg.rar_base_count + cfg.rar_top_k);
        const auto top = Eigen::Index(std::llround(share * double(count)));
        return rar_sample(density, rng, proposal, count - top, top);
    }
    default:
        fail(ErrorKind::contract, "not an adaptive sampler");
    }
}

} // namespace detail

/// Initial network of a run; depends only on the seed and architecture, so
/// paired runs with the same seed start from identical parameters.
inline SolutionNetwork initial_network(const PdeProblem& problem, const TrainingConfig& cfg)
{
    Architecture arch = cfg.network;
    arch.input_dim = problem.point_dim();
    Rng rng(cfg.seed, make_stream(StreamTag::init));
    return SolutionNetwork::initialized(arch, rng);
}

/// Draws the epoch-k training batches for the current network.
inline std::pair<SampleBatch, SampleBatch> sample_epoch(const PdeProblem& problem, const SolutionNetwork& net,
                                                        const TrainingConfig& cfg, std::uint64_t epoch,
                                                        TrainingStats& stats)
{
    Rng interior_rng(cfg.seed, make_stream(StreamTag::interior, epoch));
    Rng boundary_rng(cfg.seed, make_stream(StreamTag::boundary, epoch));
    SampleBatch interior, boundary;
    if (!cfg.adaptive()) {
        interior = sample_interior_baseline(problem.domain(), cfg.n1, cfg.annuli, interior_rng);
        boundary = sample_boundary(cfg.n2, problem, boundary_rng);
    } else {
        ++stats.adaptive_batches;
        const auto density = detail::counted(
            network_residual_density(problem, net, cfg.stencil, cfg.p, Region::interior), stats.density_evaluations);
        if (cfg.sampler == SamplerKind::rar)
            interior = rar_sample(density, interior_rng, interior_proposal(problem.domain(), cfg.annuli),
                                  cfg.rar_base_count, cfg.rar_top_k);
        else
            interior = detail::adaptive_batch(cfg.sampler, density, cfg.n1,
                                              interior_proposal(problem.domain(), cfg.annuli), cfg, interior_rng);
        if (cfg.boundary_adaptive) {
            const auto bdensity = detail::counted(
                network_residual_density(problem, net, cfg.stencil, cfg.p, Region::boundary),
                stats.density_evaluations);
            boundary = detail::adaptive_batch(cfg.sampler, bdensity, cfg.n2, boundary_proposal(problem), cfg,
                                              boundary_rng);
        } else {
            boundary = sample_boundary(cfg.n2, problem, boundary_rng);
        }
    }
    interior.region = Region::interior;
    boundary.region = Region::boundary;
    interior.epoch = boundary.epoch = epoch;
    return {std::move(interior), std::move(boundary)};
}

/// Least-squares training with per-epoch (re)sampling of collocation points and
/// one Adam step per epoch. A non-finite loss or gradient stops the run; the
/// result then holds the last parameters that were still finite.
inline TrainingResult train(const PdeProblem& problem, const TrainingConfig& cfg, const TrainingHooks& hooks = {})
{
    cfg.validate();
    require(cfg.dim == problem.spatial_dim(), "train: config dim does not match the problem");
    TrainingResult result;
    result.net = initial_network(problem, cfg);
    const TestSet test = make_test_set(problem, cfg.test_size, cfg.annuli);
    AdamState adam(result.net.parameter_count(), cfg.adam);

    using clock = std::chrono::steady_clock;
    double elapsed = 0.0;
    for (std::uint64_t k = 0; k < cfg.epochs; ++k) {
        const auto start = clock::now();
        LossEvaluation eval;
        try {
            auto [interior, boundary] = sample_epoch(problem, result.net, cfg, k, result.stats);
            eval = compute_loss(result.net, interior, boundary, cfg.lambda, problem, cfg.stencil, true);
            Vector theta = result.net.parameters();
            adam_step(adam, theta, eval.gradient, cfg.learning_rate(k));
            if (!theta.allFinite())
                fail(ErrorKind::divergence, "parameters became non-finite");
            result.net.parameters() = std::move(theta);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::divergence)
                throw;
            result.diverged = true;
            result.failure = "epoch " + std::to_string(k) + ": " + e.what();
            return result;
        }
        elapsed += std::chrono::duration<double>(clock::now() - start).count();

        const bool last = k + 1 == cfg.epochs;
        if (k % cfg.eval_every == 0 || last) {
            const auto acc = assess(result.net, test);
            result.history.push_back({k, elapsed, eval.loss, acc.rel_l2, acc.max_mod});
            if (hooks.on_record)
                hooks.on_record(result.history.back());
        }
        if (hooks.on_checkpoint && ((cfg.checkpoint_every > 0 && (k + 1) % cfg.checkpoint_every == 0) || last))
            hooks.on_checkpoint(k, result.net);
    }
    return result;
}

} // namespace deepls
