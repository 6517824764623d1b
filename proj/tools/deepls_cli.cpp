// deepls: command-line front end.
//
//   deepls train          --config run.ini --out runs/a
//   deepls evaluate       --checkpoint runs/a/final.ckpt --problem elliptic --dim 10
//   deepls run-experiment --config desk.ini
//   deepls dump-points    --epoch 0 --out points
//   deepls demo-table1    --reps 20
//   deepls slice          --checkpoint runs/a/final.ckpt --out slice.csv
//
// Every config key is also a flag of the same name (--trainer.epochs 3000).

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "deepls/experiment.hpp"

namespace {

using namespace deepls;

struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;
    std::map<std::string, std::vector<CLI::Option*>> options;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--config", file, "INI file; flags override its values")->check(CLI::ExistingFile);
        for (const auto& key : config_keys())
            options[key.name].push_back(
                cmd.add_option("--" + key.name, values[key.name], key.help)
                    ->group("Config keys")
                    ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast));
    }

    RunConfig resolve() const
    {
        RunConfig cfg = file.empty() ? RunConfig{} : load_config(file);
        for (const auto& key : config_keys())
            for (const auto* opt : options.at(key.name))
                if (opt->count() > 0)
                    key.set(cfg, values.at(key.name));
        return cfg;
    }
};

void print_history_row(const HistoryRow& row)
{
    std::cerr << "epoch " << row.epoch << " loss " << csv_number(row.loss) << " rel_l2 " << csv_number(row.rel_l2)
              << " max_mod " << csv_number(row.max_mod) << '\n';
}

SolutionNetwork load_for(const PdeProblem& problem, const std::string& path)
{
    auto net = load_checkpoint(path);
    if (net.architecture().input_dim != problem.point_dim())
        fail(ErrorKind::config, "checkpoint input dimension " + std::to_string(net.architecture().input_dim) +
                                    " does not match " + problem.name() + " with " +
                                    std::to_string(problem.point_dim()) + " coordinates");
    return net;
}

int cmd_train(const RunConfig& cfg, const fs::path& out, bool quiet)
{
    cfg.train.validate();
    const auto problem = make_problem(cfg.train.problem, cfg.train.dim);
    fs::create_directories(out);
    {
        auto os = open_output(out / "config.ini");
        os << dump_config(cfg);
    }
    TrainingHooks hooks;
    if (cfg.train.checkpoint_every > 0)
        hooks.on_checkpoint = [&](std::uint64_t epoch, const SolutionNetwork& net) {
            save_checkpoint((out / ("epoch_" + std::to_string(epoch) + ".ckpt")).string(), net);
        };
    if (!quiet)
        hooks.on_record = print_history_row;
    const auto result = train(*problem, cfg.train, hooks);
    write_run_outputs(out, result);
    if (result.diverged)
        fail(ErrorKind::divergence, result.failure + " (last finite parameters saved to final.ckpt)");
    const auto& last = result.history.back();
    std::cout << "rel_l2,max_mod\n" << csv_number(last.rel_l2) << ',' << csv_number(last.max_mod) << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint)
{
    const auto problem = make_problem(cfg.train.problem, cfg.train.dim);
    const auto net = load_for(*problem, checkpoint);
    const auto test = make_test_set(*problem, cfg.train.test_size, cfg.train.annuli);
    const auto acc = assess(net, test);
    std::cout << "rel_l2,max_mod\n" << csv_number(acc.rel_l2) << ',' << csv_number(acc.max_mod) << '\n';
    return 0;
}

int cmd_experiment(const RunConfig& cfg)
{
    const auto report = run_experiment(cfg, &std::cerr);
    write_summary(std::cout, report.arms);
    if (!report.reductions.empty()) {
        std::cout << '\n';
        write_reductions(std::cout, report.reductions);
    }
    return 0;
}

int cmd_dump_points(const RunConfig& cfg, std::uint64_t epoch, const std::string& checkpoint, const fs::path& out)
{
    cfg.train.validate();
    const auto problem = make_problem(cfg.train.problem, cfg.train.dim);
    const auto net = checkpoint.empty() ? initial_network(*problem, cfg.train) : load_for(*problem, checkpoint);
    TrainingStats stats;
    const auto [interior, boundary] = sample_epoch(*problem, net, cfg.train, epoch, stats);
    {
        auto os = open_output(out / "interior.csv");
        write_points(os, interior);
    }
    {
        auto os = open_output(out / "boundary.csv");
        write_points(os, boundary);
    }
    std::cout << "interior " << interior.size() << " boundary " << boundary.size() << " -> " << out.string() << '\n';
    return 0;
}

int cmd_demo(std::uint64_t seed, int reps, const std::string& out)
{
    if (reps < 1)
        fail(ErrorKind::config, "--reps must be >= 1");
    std::cout << "seed,annular,mh,self_normalized\n";
    for (int r = 0; r < reps; ++r) {
        const auto c = demo_table1(seed + std::uint64_t(r));
        std::cout << seed + std::uint64_t(r) << ',' << c.annular << ',' << c.mh << ',' << c.self_normalized << '\n';
        if (r == 0 && !out.empty()) {
            for (const auto& [name, batch] : {std::pair{"annular", &c.annular_points}, std::pair{"mh", &c.mh_points},
                                              std::pair{"self_normalized", &c.self_normalized_points}}) {
                auto os = open_output(fs::path(out) / (std::string(name) + ".csv"));
                write_points(os, *batch);
            }
        }
    }
    return 0;
}

int cmd_slice(const RunConfig& cfg, const std::string& checkpoint, const std::vector<int>& axes,
              const std::vector<double>& base, int resolution, const std::string& out)
{
    const auto problem = make_problem(cfg.train.problem, cfg.train.dim);
    const auto net = load_for(*problem, checkpoint);
    SliceSpec spec;
    spec.axis_a = axes.at(0);
    spec.axis_b = axes.at(1);
    spec.resolution = resolution;
    if (!base.empty())
        spec.base = Eigen::Map<const Vector>(base.data(), Eigen::Index(base.size()));
    if (out.empty() || out == "-") {
        write_slice(std::cout, *problem, net, spec);
    } else {
        auto os = open_output(out);
        write_slice(os, *problem, net, spec);
    }
    return 0;
}

void print_error(std::string_view code, const std::string& msg)
{
    std::string flat = msg;
    for (char& c : flat)
        if (c == '\n')
            c = ' ';
    std::cerr << "ERROR code=" << code << " msg=" << flat << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deep least-squares PDE solver with adaptive collocation sampling", "deepls"};
    app.require_subcommand(1);
    ConfigFlags flags;

    auto* train_cmd = app.add_subcommand("train", "train one network and write its history and checkpoints");
    std::string train_out = "train_out";
    bool quiet = false;
    flags.attach(*train_cmd);
    train_cmd->add_option("--out", train_out, "output directory")->capture_default_str();
    train_cmd->add_flag("--quiet", quiet, "no progress lines on stderr");

    auto* eval_cmd = app.add_subcommand("evaluate", "print rel_l2,max_mod of a checkpoint on the fixed test set");
    std::string eval_ckpt;
    flags.attach(*eval_cmd);
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();

    auto* exp_cmd = app.add_subcommand("run-experiment", "paired multi-seed comparison of sampler arms");
    flags.attach(*exp_cmd);

    auto* dump_cmd = app.add_subcommand("dump-points", "write the collocation points of one epoch");
    std::uint64_t dump_epoch = 0;
    std::string dump_ckpt;
    std::string dump_out = "points";
    flags.attach(*dump_cmd);
    dump_cmd->add_option("--epoch", dump_epoch, "epoch index")->capture_default_str();
    dump_cmd->add_option("--checkpoint", dump_ckpt, "network driving adaptive densities (default: initial network)");
    dump_cmd->add_option("--out", dump_out, "output directory")->capture_default_str();

    auto* demo_cmd = app.add_subcommand("demo-table1", "count samples inside the ellipse of the synthetic surface");
    std::uint64_t demo_seed = 1;
    int demo_reps = 1;
    std::string demo_out;
    demo_cmd->add_option("--seed", demo_seed, "first seed")->capture_default_str();
    demo_cmd->add_option("--reps", demo_reps, "repetitions (seed, seed+1, ...)")->capture_default_str();
    demo_cmd->add_option("--out", demo_out, "directory for the first repetition's points");

    auto* slice_cmd = app.add_subcommand("slice", "2D grid of phi, u and |u - phi| through a checkpoint");
    std::string slice_ckpt;
    std::vector<int> slice_axes{0, 1};
    std::vector<double> slice_base;
    int slice_res = 101;
    std::string slice_out = "-";
    flags.attach(*slice_cmd);
    slice_cmd->add_option("--checkpoint", slice_ckpt, "checkpoint file")->required();
    slice_cmd->add_option("--axes", slice_axes, "the two varying coordinates")->expected(2)->delimiter(',')
        ->capture_default_str();
    slice_cmd->add_option("--base", slice_base, "values of all coordinates (varying ones ignored)")->delimiter(',');
    slice_cmd->add_option("--resolution", slice_res, "grid points per axis")->capture_default_str();
    slice_cmd->add_option("--out", slice_out, "CSV file, - for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        if (*demo_cmd)
            return cmd_demo(demo_seed, demo_reps, demo_out);
        const RunConfig cfg = flags.resolve();
        if (*train_cmd)
            return cmd_train(cfg, train_out, quiet);
        if (*eval_cmd)
            return cmd_evaluate(cfg, eval_ckpt);
        if (*exp_cmd)
            return cmd_experiment(cfg);
        if (*dump_cmd)
            return cmd_dump_points(cfg, dump_epoch, dump_ckpt, dump_out);
        if (*slice_cmd)
            return cmd_slice(cfg, slice_ckpt, slice_axes, slice_base, slice_res, slice_out);
    } catch (const Error& e) {
        print_error(to_string(e.kind()), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
