#pragma once

// Key-value run configuration. Files are INI: top-level keys plus sections
// [network] [trainer] [adam] [rar] [stencil] [metrics] [experiment]; a key in
// section S is addressed as "S.key" everywhere (files, CLI flags, dumps).

#include <charconv>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "deepls/trainer.hpp"

namespace deepls {

struct ExperimentSettings {
    std::vector<SamplerKind> arms{SamplerKind::annular, SamplerKind::self_normalized};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int workers = 1;
    std::string output_dir = "out";
};

struct RunConfig {
    TrainingConfig train;
    ExperimentSettings experiment;
};

namespace config_detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw)
{
    const std::string s = trim(raw);
    T v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        fail(ErrorKind::config, "key '" + key + "': cannot parse '" + raw + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw)
{
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    fail(ErrorKind::config, "key '" + key + "': expected a boolean, got '" + raw + "'");
}

inline std::vector<std::string> split_list(const std::string& raw)
{
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string fmt(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

template <class T>
std::string fmt_int(T v)
{
    return std::to_string(v);
}

} // namespace config_detail

struct ConfigKey {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

/// Every recognised key. Defaults are the field initializers.
inline const std::vector<ConfigKey>& config_keys()
{
    using namespace config_detail;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        auto number = [&k](std::string name, std::string help, auto member) {
            using T = std::remove_cvref_t<decltype(member(std::declval<RunConfig&>()))>;
            k.push_back({name, std::move(help),
                         [member, name](RunConfig& c, const std::string& v) { member(c) = parse_number<T>(name, v); },
                         [member](const RunConfig& c) {
                             const T v = member(const_cast<RunConfig&>(c));
                             if constexpr (std::is_floating_point_v<T>)
                                 return fmt(v);
                             else
                                 return fmt_int(v);
                         }});
        };
        k.push_back({"problem", "elliptic|parabolic|hyperbolic|poisson2d",
                     [](RunConfig& c, const std::string& v) { c.train.problem = trim(v); },
                     [](const RunConfig& c) { return c.train.problem; }});
        number("dim", "spatial dimension d", [](RunConfig& c) -> int& { return c.train.dim; });
        k.push_back({"sampler", "annular|mh|self_normalized|rar",
                     [](RunConfig& c, const std::string& v) { c.train.sampler = parse_sampler(trim(v)); },
                     [](const RunConfig& c) { return to_string(c.train.sampler); }});
        number("p", "residual exponent", [](RunConfig& c) -> double& { return c.train.p; });
        number("burn_in", "Metropolis-Hastings burn-in b", [](RunConfig& c) -> Eigen::Index& { return c.train.burn_in; });
        number("annuli", "number of annuli N_a", [](RunConfig& c) -> int& { return c.train.annuli; });
        number("pool_size", "self-normalized proposal pool (0: N)",
               [](RunConfig& c) -> Eigen::Index& { return c.train.pool_size; });
        k.push_back({"boundary_adaptive", "adaptive sampling on the boundary set too",
                     [](RunConfig& c, const std::string& v) {
                         c.train.boundary_adaptive = parse_bool("boundary_adaptive", v);
                     },
                     [](const RunConfig& c) { return std::string(c.train.boundary_adaptive ? "true" : "false"); }});
        number("seed", "seed of the run", [](RunConfig& c) -> std::uint64_t& { return c.train.seed; });

        number("network.depth", "hidden layers L", [](RunConfig& c) -> int& { return c.train.network.depth; });
        number("network.width", "hidden width m", [](RunConfig& c) -> int& { return c.train.network.width; });

        number("trainer.epochs", "epochs n", [](RunConfig& c) -> std::uint64_t& { return c.train.epochs; });
        number("trainer.n1", "interior points per epoch", [](RunConfig& c) -> Eigen::Index& { return c.train.n1; });
        number("trainer.n2", "boundary points per epoch", [](RunConfig& c) -> Eigen::Index& { return c.train.n2; });
        number("trainer.lambda", "boundary weight", [](RunConfig& c) -> double& { return c.train.lambda; });
        k.push_back({"trainer.lr", "staircase|constant",
                     [](RunConfig& c, const std::string& v) {
                         const auto s = trim(v);
                         if (s == "staircase")
                             c.train.lr_mode = LrMode::staircase;
                         else if (s == "constant")
                             c.train.lr_mode = LrMode::constant;
                         else
                             fail(ErrorKind::config, "trainer.lr must be staircase or constant");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.train.lr_mode == LrMode::staircase ? "staircase" : "constant");
                     }});
        number("trainer.constant_lr", "rate used when trainer.lr = constant",
               [](RunConfig& c) -> double& { return c.train.constant_lr; });
        number("trainer.eval_every", "epochs between metric rows",
               [](RunConfig& c) -> std::uint64_t& { return c.train.eval_every; });
        number("trainer.checkpoint_every", "epochs between checkpoints (0: final only)",
               [](RunConfig& c) -> std::uint64_t& { return c.train.checkpoint_every; });

        number("adam.beta1", "", [](RunConfig& c) -> double& { return c.train.adam.beta1; });
        number("adam.beta2", "", [](RunConfig& c) -> double& { return c.train.adam.beta2; });
        number("adam.epsilon", "", [](RunConfig& c) -> double& { return c.train.adam.eps; });

        number("rar.base_count", "uniform points per RAR batch",
               [](RunConfig& c) -> Eigen::Index& { return c.train.rar_base_count; });
        number("rar.top_k", "largest-residual points duplicated",
               [](RunConfig& c) -> Eigen::Index& { return c.train.rar_top_k; });

        number("stencil.h", "finite-difference step", [](RunConfig& c) -> double& { return c.train.stencil.h; });
        number("metrics.test_size", "test-set size", [](RunConfig& c) -> Eigen::Index& { return c.train.test_size; });

        k.push_back({"experiment.arms", "comma-separated samplers, first is the baseline",
                     [](RunConfig& c, const std::string& v) {
                         c.experiment.arms.clear();
                         for (const auto& s : split_list(v))
                             c.experiment.arms.push_back(parse_sampler(s));
                     },
                     [](const RunConfig& c) {
                         std::string out;
                         for (auto a : c.experiment.arms)
                             out += (out.empty() ? "" : ",") + to_string(a);
                         return out;
                     }});
        k.push_back({"experiment.seeds", "comma-separated seeds, one trial each",
                     [](RunConfig& c, const std::string& v) {
                         c.experiment.seeds.clear();
                         for (const auto& s : split_list(v))
                             c.experiment.seeds.push_back(parse_number<std::uint64_t>("experiment.seeds", s));
                     },
                     [](const RunConfig& c) {
                         std::string out;
                         for (auto s : c.experiment.seeds)
                             out += (out.empty() ? "" : ",") + std::to_string(s);
                         return out;
                     }});
        number("experiment.workers", "concurrent trials", [](RunConfig& c) -> int& { return c.experiment.workers; });
        k.push_back({"experiment.output_dir", "output directory",
                     [](RunConfig& c, const std::string& v) { c.experiment.output_dir = trim(v); },
                     [](const RunConfig& c) { return c.experiment.output_dir; }});
        return k;
    }();
    return keys;
}

inline const ConfigKey* find_config_key(const std::string& name)
{
    for (const auto& k : config_keys())
        if (k.name == name)
            return &k;
    return nullptr;
}

inline void set_config_value(RunConfig& cfg, const std::string& name, const std::string& value)
{
    const auto* key = find_config_key(name);
    if (!key)
        fail(ErrorKind::config, "unknown config key '" + name + "'");
    key->set(cfg, value);
}

inline void apply_ini(RunConfig& cfg, std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(ErrorKind::config, std::string("config parse error: ") + e.what());
    }
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            if (node.data().empty() && !find_config_key(name))
                continue; // empty [section]
            set_config_value(cfg, name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node)
            set_config_value(cfg, name + "." + key, leaf.data());
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::io, "cannot open config " + path);
    RunConfig cfg;
    apply_ini(cfg, in);
    return cfg;
}

/// Resolved configuration as INI; loading it back gives the same RunConfig.
inline std::string dump_config(const RunConfig& cfg)
{
    std::ostringstream os;
    std::string section;
    for (const auto& k : config_keys()) {
        const auto dot = k.name.find('.');
        const std::string s = dot == std::string::npos ? "" : k.name.substr(0, dot);
        if (s != section) {
            os << "\n[" << s << "]\n";
            section = s;
        }
        os << (dot == std::string::npos ? k.name : k.name.substr(dot + 1)) << " = " << k.get(cfg) << '\n';
    }
    return os.str();
}

} // namespace deepls
