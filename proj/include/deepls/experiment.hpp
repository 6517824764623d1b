#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "deepls/checkpoint.hpp"
#include "deepls/config.hpp"
#include "deepls/trainer.hpp"

namespace deepls {

namespace fs = std::filesystem;

// ---- CSV output ------------------------------------------------------------

inline std::string csv_number(double v) { return config_detail::fmt(v); }

inline std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os)
        fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    return os;
}

/// Training history without wall-clock time; byte-identical across repeated
/// runs with the same seed.
inline void write_history(std::ostream& os, const TrainingHistory& history)
{
    os << "epoch,loss,rel_l2,max_mod\n";
    for (const auto& row : history)
        os << row.epoch << ',' << csv_number(row.loss) << ',' << csv_number(row.rel_l2) << ','
           << csv_number(row.max_mod) << '\n';
}

inline void write_history_times(std::ostream& os, const TrainingHistory& history)
{
    os << "epoch,time_s\n";
    for (const auto& row : history)
        os << row.epoch << ',' << csv_number(row.time_s) << '\n';
}

/// Full `epoch,time_s,loss,rel_l2,max_mod` table.
inline void write_history_full(std::ostream& os, const TrainingHistory& history)
{
    os << "epoch,time_s,loss,rel_l2,max_mod\n";
    for (const auto& row : history)
        os << row.epoch << ',' << csv_number(row.time_s) << ',' << csv_number(row.loss) << ','
           << csv_number(row.rel_l2) << ',' << csv_number(row.max_mod) << '\n';
}

inline void write_points(std::ostream& os, const SampleBatch& batch)
{
    const bool with_kind = !batch.kinds.empty();
    for (int i = 0; i < batch.dim(); ++i)
        os << (i ? "," : "") << "x" << i;
    if (with_kind)
        os << ",kind";
    os << '\n';
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        for (int i = 0; i < batch.dim(); ++i)
            os << (i ? "," : "") << csv_number(batch.points(i, j));
        if (with_kind)
            os << ',' << to_string(batch.kind(j));
        os << '\n';
    }
}

/// Writes the run's deterministic history, its wall-clock companion and the
/// final network into `dir`.
inline void write_run_outputs(const fs::path& dir, const TrainingResult& result)
{
    fs::create_directories(dir);
    {
        auto os = open_output(dir / "history.csv");
        write_history(os, result.history);
    }
    {
        auto os = open_output(dir / "history_time.csv");
        write_history_times(os, result.history);
    }
    save_checkpoint((dir / "final.ckpt").string(), result.net);
}

// ---- statistics ------------------------------------------------------------

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (n - 1); 0 for a single value
    double min = 0.0;
    double cv = 0.0;     // stddev / mean
};

inline SummaryStats summarize(const std::vector<double>& v)
{
    SummaryStats s;
    s.count = v.size();
    if (v.empty())
        return s;
    double sum = 0.0;
    for (double x : v)
        sum += x;
    s.mean = sum / double(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - s.mean) * (x - s.mean);
    s.stddev = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
    s.min = *std::min_element(v.begin(), v.end());
    s.cv = s.mean != 0.0 ? s.stddev / s.mean : 0.0;
    return s;
}

inline double median(std::vector<double> v)
{
    require(!v.empty(), "median of an empty list");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- paired experiments ----------------------------------------------------

struct RunRecord {
    SamplerKind sampler = SamplerKind::annular;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double rel_l2 = 0.0;
    double max_mod = 0.0;
    double train_seconds = 0.0;
    std::uint64_t density_evaluations = 0;
};

struct ArmSummary {
    SamplerKind sampler = SamplerKind::annular;
    std::size_t failed = 0;
    SummaryStats rel_l2;
    SummaryStats max_mod;
};

/// Paired comparison of one arm against the first (baseline) arm.
struct ReductionRow {
    SamplerKind sampler = SamplerKind::annular;
    std::vector<std::uint64_t> seeds; // pairs where both runs finished
    std::vector<double> rel_l2;       // per pair, percent
    std::vector<double> max_mod;
    double median_rel_l2 = std::numeric_limits<double>::quiet_NaN();
    double median_max_mod = std::numeric_limits<double>::quiet_NaN();
    double of_means_rel_l2 = std::numeric_limits<double>::quiet_NaN(); // reduction of the arm means
    double of_means_max_mod = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
    std::vector<RunRecord> runs; // arm-major, seed order
    std::vector<ArmSummary> arms;
    std::vector<ReductionRow> reductions;
};

inline fs::path run_directory(const fs::path& root, SamplerKind arm, std::uint64_t seed)
{
    return root / "runs" / (to_string(arm) + "_seed" + std::to_string(seed));
}

inline void write_summary(std::ostream& os, const std::vector<ArmSummary>& arms)
{
    os << "arm,metric,trials,failed,mean,std,min,cv\n";
    for (const auto& a : arms)
        for (const auto& [name, s] : {std::pair{"rel_l2", a.rel_l2}, std::pair{"max_mod", a.max_mod}})
            os << to_string(a.sampler) << ',' << name << ',' << s.count << ',' << a.failed << ','
               << csv_number(s.mean) << ',' << csv_number(s.stddev) << ',' << csv_number(s.min) << ','
               << csv_number(s.cv) << '\n';
}

inline void write_reductions(std::ostream& os, const std::vector<ReductionRow>& rows)
{
    os << "arm,pair,rel_l2_reduction_pct,max_mod_reduction_pct\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.seeds.size(); ++i)
            os << to_string(r.sampler) << ",seed" << r.seeds[i] << ',' << csv_number(r.rel_l2[i]) << ','
               << csv_number(r.max_mod[i]) << '\n';
        os << to_string(r.sampler) << ",median," << csv_number(r.median_rel_l2) << ','
           << csv_number(r.median_max_mod) << '\n';
        os << to_string(r.sampler) << ",of_means," << csv_number(r.of_means_rel_l2) << ','
           << csv_number(r.of_means_max_mod) << '\n';
    }
}

inline ExperimentReport summarize_runs(const std::vector<SamplerKind>& arms, const std::vector<RunRecord>& runs)
{
    ExperimentReport report;
    report.runs = runs;
    const std::size_t trials = arms.empty() ? 0 : runs.size() / arms.size();
    for (std::size_t a = 0; a < arms.size(); ++a) {
        ArmSummary s;
        s.sampler = arms[a];
        std::vector<double> l2, mm;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& r = runs[a * trials + t];
            if (r.failed) {
                ++s.failed;
                continue;
            }
            l2.push_back(r.rel_l2);
            mm.push_back(r.max_mod);
        }
        s.rel_l2 = summarize(l2);
        s.max_mod = summarize(mm);
        report.arms.push_back(s);
    }
    for (std::size_t a = 1; a < arms.size(); ++a) {
        ReductionRow row;
        row.sampler = arms[a];
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& base = runs[t];
            const auto& run = runs[a * trials + t];
            if (base.failed || run.failed)
                continue;
            row.seeds.push_back(run.seed);
            row.rel_l2.push_back(error_reduction(run.rel_l2, base.rel_l2));
            row.max_mod.push_back(error_reduction(run.max_mod, base.max_mod));
        }
        if (!row.seeds.empty()) {
            row.median_rel_l2 = median(row.rel_l2);
            row.median_max_mod = median(row.max_mod);
        }
        const auto& b = report.arms[0];
        const auto& s = report.arms[a];
        if (b.rel_l2.count > 0 && s.rel_l2.count > 0) {
            row.of_means_rel_l2 = error_reduction(s.rel_l2.mean, b.rel_l2.mean);
            row.of_means_max_mod = error_reduction(s.max_mod.mean, b.max_mod.mean);
        }
        report.reductions.push_back(row);
    }
    return report;
}

/// Runs every arm on every seed (arm k, trial i uses seeds[i] for all k, so
/// arms start from the same network and see the same baseline draws). When
/// `output_dir` is non-empty, per-run histories and checkpoints plus
/// summary.csv, reductions.csv, runs.csv, timing.csv and config.ini are
/// written there. Diverged runs are kept in `runs`, flagged, and left out of
/// the aggregates.
inline ExperimentReport run_experiment(const RunConfig& cfg, std::ostream* log = nullptr)
{
    const auto& exp = cfg.experiment;
    if (exp.seeds.empty())
        fail(ErrorKind::config, "experiment.seeds is empty");
    if (exp.arms.empty())
        fail(ErrorKind::config, "experiment.arms is empty");
    if (exp.workers < 1)
        fail(ErrorKind::config, "experiment.workers must be >= 1");
    const auto problem = make_problem(cfg.train.problem, cfg.train.dim);
    for (auto arm : exp.arms) {
        TrainingConfig c = cfg.train;
        c.sampler = arm;
        c.validate();
    }

    const fs::path root = exp.output_dir;
    if (!root.empty()) {
        fs::create_directories(root);
        auto os = open_output(root / "config.ini");
        os << dump_config(cfg);
    }

    const std::size_t trials = exp.seeds.size();
    std::vector<RunRecord> runs(exp.arms.size() * trials);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        for (std::size_t job; (job = next++) < runs.size();) {
            RunRecord& rec = runs[job];
            rec.sampler = exp.arms[job / trials];
            rec.seed = exp.seeds[job % trials];
            try {
                TrainingConfig c = cfg.train;
                c.sampler = rec.sampler;
                c.seed = rec.seed;
                const auto result = train(*problem, c);
                rec.failed = result.diverged;
                rec.failure = result.failure;
                rec.density_evaluations = result.stats.density_evaluations;
                if (!result.history.empty()) {
                    rec.train_seconds = result.history.back().time_s;
                    if (!rec.failed) {
                        rec.rel_l2 = result.history.back().rel_l2;
                        rec.max_mod = result.history.back().max_mod;
                    }
                }
                if (!root.empty())
                    write_run_outputs(run_directory(root, rec.sampler, rec.seed), result);
                if (log) {
                    std::lock_guard lock(log_mutex);
                    *log << to_string(rec.sampler) << " seed " << rec.seed << ": "
                         << (rec.failed ? "FAILED " + rec.failure
                                        : "rel_l2 " + csv_number(rec.rel_l2) + " max_mod " + csv_number(rec.max_mod))
                         << '\n';
                }
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (!error)
                    error = std::current_exception();
                next = runs.size();
            }
        }
    };
    const int nthreads = std::min<int>(exp.workers, int(runs.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < nthreads; ++i)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);

    auto report = summarize_runs(exp.arms, runs);
    if (!root.empty()) {
        {
            auto os = open_output(root / "summary.csv");
            write_summary(os, report.arms);
        }
        {
            auto os = open_output(root / "reductions.csv");
            write_reductions(os, report.reductions);
        }
        {
            auto os = open_output(root / "runs.csv");
            os << "arm,seed,status,rel_l2,max_mod\n";
            for (const auto& r : report.runs)
                os << to_string(r.sampler) << ',' << r.seed << ',' << (r.failed ? "failed" : "ok") << ','
                   << csv_number(r.rel_l2) << ',' << csv_number(r.max_mod) << '\n';
        }
        {
            auto os = open_output(root / "timing.csv");
            os << "arm,seed,train_seconds\n";
            for (const auto& r : report.runs)
                os << to_string(r.sampler) << ',' << r.seed << ',' << csv_number(r.train_seconds) << '\n';
        }
    }
    return report;
}

// ---- ellipse-count demonstration ---------------------------------------------

/// Synthetic residual surface on the unit disk, peaked inside the ellipse
/// x²/0.18² + y²/0.16² = 1.
inline double demo_surface(double x, double y)
{
    return std::exp(-(x * x / (0.18 * 0.18) + y * y / (0.16 * 0.16))) + 0.01;
}

inline bool inside_demo_ellipse(double x, double y)
{
    return x * x / (0.18 * 0.18) + y * y / (0.16 * 0.16) < 1.0;
}

struct DemoCounts {
    int annular = 0;
    int mh = 0;
    int self_normalized = 0;
    SampleBatch annular_points, mh_points, self_normalized_points;
};

/// 500 points per sampler on the unit disk (10 annuli): stratified annular,
/// Metropolis-Hastings with p = 1 and b = 3500, self-normalized resampling
/// with p = 1 and a 500-point pool.
inline DemoCounts demo_table1(std::uint64_t seed, Eigen::Index n = 500, Eigen::Index burn_in = 3500)
{
    const int annuli = 10;
    const DomainDescriptor disk{DomainKind::unit_ball, 2};
    ResidualDensity density{[](const SampleBatch& b) {
                                Vector v(b.size());
                                for (Eigen::Index j = 0; j < b.size(); ++j)
                                    v[j] = demo_surface(b.points(0, j), b.points(1, j));
                                return v;
                            },
                            1.0, Region::interior};
    const auto proposal = interior_proposal(disk, annuli);

    DemoCounts out;
    Rng a(seed, make_stream(StreamTag::user, 0));
    Rng m(seed, make_stream(StreamTag::user, 1));
    Rng s(seed, make_stream(StreamTag::user, 2));
    out.annular_points = sample_uniform_annular(n, annuli, 2, a);
    out.mh_points = mh_sample_vectorized(density, n, burn_in, proposal, m);
    out.self_normalized_points = self_normalized_sample(density, n, s, n, proposal);
    auto count = [](const SampleBatch& b) {
        int c = 0;
        for (Eigen::Index j = 0; j < b.size(); ++j)
            c += inside_demo_ellipse(b.points(0, j), b.points(1, j));
        return c;
    };
    out.annular = count(out.annular_points);
    out.mh = count(out.mh_points);
    out.self_normalized = count(out.self_normalized_points);
    return out;
}

// ---- slice grids -------------------------------------------------------------

struct SliceSpec {
    int axis_a = 0;
    int axis_b = 1;
    Vector base;           // coordinates of the fixed axes; empty: all zero
    int resolution = 101;
};

/// Grid over axis_a × axis_b (spatial axes span [-1, 1], time and the Poisson
/// square span [0, 1]) with every other coordinate taken from `base`. Rows are
/// a,b,phi,exact,abs_err,inside; points outside the domain are kept and marked.
inline void write_slice(std::ostream& os, const PdeProblem& problem, const SolutionNetwork& net,
                        const SliceSpec& spec)
{
    const auto& domain = problem.domain();
    const int dim = domain.point_dim();
    if (spec.axis_a < 0 || spec.axis_a >= dim || spec.axis_b < 0 || spec.axis_b >= dim || spec.axis_a == spec.axis_b)
        fail(ErrorKind::config, "slice axes must be two distinct coordinates");
    if (spec.resolution < 2)
        fail(ErrorKind::config, "slice resolution must be >= 2");
    Vector base = spec.base.size() ? spec.base : Vector::Zero(dim);
    if (base.size() != dim)
        fail(ErrorKind::config, "slice base point has the wrong dimension");
    auto range = [&](int axis) {
        const bool unit = domain.kind == DomainKind::unit_square || (domain.time_dependent() && axis == dim - 1);
        return unit ? std::pair{0.0, 1.0} : std::pair{-1.0, 1.0};
    };
    const auto [a0, a1] = range(spec.axis_a);
    const auto [b0, b1] = range(spec.axis_b);
    const int n = spec.resolution;
    Points grid(dim, Eigen::Index(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto p = grid.col(Eigen::Index(i) * n + j);
            p = base;
            p[spec.axis_a] = a0 + (a1 - a0) * i / (n - 1);
            p[spec.axis_b] = b0 + (b1 - b0) * j / (n - 1);
        }
    const Vector phi = net.forward(grid);
    const Vector u = exact_field(problem)(grid);
    os << "x" << spec.axis_a << ",x" << spec.axis_b << ",phi,exact,abs_err,inside\n";
    for (Eigen::Index k = 0; k < grid.cols(); ++k) {
        const bool inside = domain.classify(grid.col(k)) != PointClass::outside;
        os << csv_number(grid(spec.axis_a, k)) << ',' << csv_number(grid(spec.axis_b, k)) << ','
           << csv_number(phi[k]) << ',' << csv_number(u[k]) << ',' << csv_number(std::abs(phi[k] - u[k])) << ','
           << int(inside) << '\n';
    }
}

} // namespace deepls
