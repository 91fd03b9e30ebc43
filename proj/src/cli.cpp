#include "radar/cli.hpp"

#include "radar/ants.hpp"
#include "radar/error.hpp"
#include "radar/format.hpp"
#include "radar/immune.hpp"
#include "radar/scaling.hpp"
#include "radar/smallworld.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace radar::cli {

namespace {

namespace fs = std::filesystem;
using experiments::Params;

Params load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read config file " + path.string());
    }
    try {
        return Params::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

std::ofstream open_output(const fs::path& dir, const std::string& file) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + (dir / file).string() + " for writing");
    }
    return out;
}

double num(const Params& p, const char* key) { return p.at(key).get<double>(); }
std::uint64_t count(const Params& p, const char* key) { return p.at(key).get<std::uint64_t>(); }

int run_immune_optimize(const CliConfig& c, std::ostream& out) {
    const auto& p = c.params;
    const immune::ArchitectureConstants consts{num(p, "A"), num(p, "B")};
    const auto opt = immune::optimize_architecture(consts, num(p, "M"), num(p, "tissue_constant"));
    immune::DesRow row;
    row.system_size = opt.architecture.system_size;
    row.module_volume = opt.architecture.module_volume;
    row.module_count = opt.architecture.module_count;
    row.seed = c.seed.value_or(0);
    row.outcome.detection_time = opt.times.t_detect;
    row.outcome.recruitment_time = opt.times.t_comm;
    row.outcome.total_time = opt.times.t_total;
    auto file = open_output(c.output_dir / "immune-optimize", "optimum.csv");
    immune::write_runs_csv(file, std::span<const immune::DesRow>(&row, 1));
    out << "V* = " << format_short(row.module_volume) << "  N* = " << format_short(row.module_count)
        << "  t_detect = " << format_short(opt.times.t_detect) << "  t_comm = " << format_short(opt.times.t_comm)
        << "  t_total = " << format_short(opt.times.t_total) << '\n';
    return kOk;
}

int run_immune_des(const CliConfig& c, std::ostream& out) {
    const auto& p = c.params;
    immune::ImmuneSimConfig config;
    config.system_size = num(p, "M");
    config.demand = num(p, "kappa");
    config.cell_density = num(p, "rho");
    config.contact_rate = num(p, "eta");
    config.crawl_speed = num(p, "crawl_speed");
    config.tissue_constant = num(p, "tissue_constant");
    config.inoculum = num(p, "inoculum");
    config.doubling_rate = num(p, "doubling_rate");
    const std::uint64_t seed = c.seed.value_or(1);
    double volume = num(p, "V");
    if (volume <= 0.0) {
        volume = immune::optimize_architecture(immune::constants_for(config), config.system_size,
                                               config.tissue_constant)
                     .architecture.module_volume;
    }
    config.module_volume = volume;

    std::vector<immune::DesRow> rows;
    double total = 0.0;
    const std::size_t replicates = std::max<std::uint64_t>(1, count(p, "replicates"));
    for (std::size_t r = 0; r < replicates; ++r) {
        config.rng_seed = seed + r;
        const auto o = immune::des_run(config);
        total += o.total_time;
        rows.push_back({config.system_size, volume, config.tissue_constant * config.system_size / volume,
                        config.rng_seed, o});
    }
    auto file = open_output(c.output_dir / "immune-des", "runs.csv");
    immune::write_runs_csv(file, rows);
    out << replicates << " runs at M = " << format_short(config.system_size) << ", V = " << format_short(volume)
        << ": mean t_total = " << format_short(total / static_cast<double>(replicates)) << '\n';
    return kOk;
}

int run_ants(const CliConfig& c, std::ostream& out) {
    const auto& p = c.params;
    ants::ForagingScenario sc;
    const auto layout = p.at("layout").get<std::string>();
    if (layout != "clustered" && layout != "dispersed") {
        throw UsageError("layout must be 'clustered' or 'dispersed'");
    }
    sc.layout = layout == "clustered" ? ants::SeedLayout::Clustered : ants::SeedLayout::Dispersed;
    sc.world_side = static_cast<int>(count(p, "world_side"));
    sc.cluster_count = static_cast<std::uint32_t>(count(p, "cluster_count"));
    sc.dispersed_cells = static_cast<std::uint32_t>(count(p, "dispersed_cells"));
    sc.seeds_per_ant = num(p, "seeds_per_ant");
    sc.field = {num(p, "decay"), num(p, "deposit")};

    const std::size_t n = count(p, "n_ants");
    ants::ColonyConfig config;
    config.n_ants = n;
    config.alpha_distribution = ants::ConstantAlpha{num(p, "alpha")};
    config.behaviour = {num(p, "threshold_per_ant") * static_cast<double>(n), num(p, "base_leave"),
                        num(p, "epsilon")};
    config.max_ticks = count(p, "max_ticks");
    config.record_trace = p.at("trace").get<bool>();

    const std::uint64_t seed = c.seed.value_or(1);
    const std::size_t replicates = std::max<std::uint64_t>(1, count(p, "replicates"));
    std::vector<ants::PerCapitaRow> rows;
    std::vector<ants::TraceRow> trace;
    for (std::size_t r = 0; r < replicates; ++r) {
        config.rng_seed = seed + r;
        auto result = ants::run_colony(ants::make_scenario_world(sc, n, config.rng_seed), sc.field, config);
        if (r == 0) {
            trace = std::move(result.trace);
        }
        out << "replicate " << r << ": " << result.stats.seeds_collected << " seeds, per-capita rate "
            << format_short(result.stats.per_capita_rate) << '\n';
        rows.push_back({n, r, config.rng_seed, std::move(result.stats)});
    }
    auto file = open_output(c.output_dir / "ants", "stats.csv");
    ants::write_stats_csv(file, rows);
    if (config.record_trace) {
        auto tfile = open_output(c.output_dir / "ants", "trace.csv");
        ants::write_trace_csv(tfile, trace);
    }
    return kOk;
}

int run_smallworld(const CliConfig& c, std::ostream& out) {
    const auto& p = c.params;
    const auto topo_name = p.at("topology").get<std::string>();
    if (topo_name != "ring" && topo_name != "torus") {
        throw UsageError("topology must be 'ring' or 'torus'");
    }
    const auto topology = topo_name == "ring" ? smallworld::Topology::Ring : smallworld::Topology::Torus;
    const auto policy_name = p.at("policy").get<std::string>();
    smallworld::DegreePolicy policy;
    if (policy_name == "constant") {
        policy = smallworld::ConstantDegree{static_cast<std::uint32_t>(count(p, "k"))};
    } else if (policy_name == "log") {
        policy = smallworld::LogDegree{num(p, "c")};
    } else if (policy_name == "logsquared") {
        policy = smallworld::LogSquaredDegree{num(p, "c")};
    } else {
        throw UsageError("policy must be 'constant', 'log' or 'logsquared'");
    }
    const auto sizes = p.at("sizes").get<std::vector<std::uint32_t>>();
    const auto result = smallworld::delivery_scaling(topology, sizes, policy, num(p, "r_exponent"),
                                                     count(p, "trials"), c.seed.value_or(1));
    auto file = open_output(c.output_dir / "smallworld", "results.csv");
    smallworld::write_results_csv(file, policy, result.sizes);
    for (const auto& s : result.sizes) {
        out << "n = " << s.n << "  k = " << s.k << "  mean hops = " << format_short(s.mean_hops) << " +/- "
            << format_short(s.stderr_hops) << '\n';
    }
    out << "r2 vs ln n = " << format_short(result.vs_log.r_squared)
        << "  r2 vs (ln n)^2 = " << format_short(result.vs_log_squared.r_squared) << '\n';
    return kOk;
}

int run_growth(const CliConfig& c, std::ostream& out) {
    const auto& p = c.params;
    const auto model = p.at("model").get<std::string>();
    auto file = open_output(c.output_dir / "growth", "trajectory.csv");
    if (model == "ontogenetic") {
        const scaling::GrowthParams g{num(p, "a"), num(p, "b"), num(p, "p"), num(p, "m0")};
        const auto t = scaling::integrate_growth(g, num(p, "t_end"), num(p, "dt"));
        scaling::write_trajectory_csv(file, t);
        out << "m(" << format_short(t.back().t) << ") = " << format_short(t.back().value)
            << "  asymptote = " << format_short(scaling::asymptotic_mass(g)) << '\n';
    } else if (model == "city") {
        const scaling::CityGrowthParams g{num(p, "a"), num(p, "b"), num(p, "gamma"), num(p, "n0")};
        const auto r = scaling::city_growth(g, num(p, "t_end"), num(p, "dt"));
        scaling::write_trajectory_csv(file, r.trajectory);
        if (r.blow_up_time) {
            out << "blow-up at t = " << format_short(*r.blow_up_time) << '\n';
        } else {
            out << "n(" << format_short(r.trajectory.back().t) << ") = " << format_short(r.trajectory.back().value)
                << '\n';
        }
    } else {
        throw UsageError("model must be 'ontogenetic' or 'city'");
    }
    return kOk;
}

std::vector<scaling::Point> read_points(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::vector<scaling::Point> points;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string xs, ys;
        std::getline(fields, xs, ',');
        std::getline(fields, ys, ',');
        char* xe = nullptr;
        char* ye = nullptr;
        const double x = std::strtod(xs.c_str(), &xe);
        const double y = std::strtod(ys.c_str(), &ye);
        const bool numeric = !xs.empty() && !ys.empty() && *xe == '\0' && *ye == '\0';
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw IoError("non-numeric row in " + path.string() + ": '" + line + "'");
        }
        first = false;
        points.push_back({x, y});
    }
    return points;
}

int run_fit(const CliConfig& c, std::ostream& out) {
    const auto points = read_points(c.target);
    const auto r = scaling::loglog_fit(points);
    out << "slope = " << format_double(r.slope) << '\n'
        << "intercept = " << format_double(r.intercept) << '\n'
        << "r_squared = " << format_double(r.r_squared) << '\n'
        << "slope_stderr = " << format_double(r.slope_stderr) << '\n'
        << "p_value = " << (r.p_value ? format_double(*r.p_value) : std::string("undefined")) << '\n'
        << "n_points = " << r.n_points << '\n';
    return kOk;
}

int run_named(const CliConfig& c, std::ostream& out) {
    experiments::RunOptions options;
    options.overrides = c.params;
    options.seed = c.seed;
    const auto report = experiments::run_experiment(c.target, options, c.output_dir);
    for (const auto& o : report.outcomes) {
        out << (o.pass ? "[pass] " : "[FAIL] ") << o.quantity << " measured=" << format_short(o.measured)
            << " target=" << format_short(o.target) << " tolerance=" << format_short(o.tolerance) << " ("
            << experiments::to_string(o.comparison) << ")\n";
    }
    if (c.verbosity >= 1) {
        for (const auto& [k, v] : report.notes) {
            out << "note " << k << " = " << format_short(v) << '\n';
        }
    }
    out << report.name << ": " << (report.passed() ? "all expectations passed" : "expectation failure") << '\n';
    return report.passed() ? kOk : kExpectationFailed;
}

}  // namespace

Params subcommand_defaults(const std::string& subcommand) {
    if (subcommand == "immune optimize") {
        return Params{{"A", 1.0}, {"B", 1.0}, {"M", 1000.0}, {"tissue_constant", 1.0}};
    }
    if (subcommand == "immune des") {
        return Params{{"M", 1e4},          {"V", 0.0},           {"kappa", 1.0},   {"rho", 1.0},
                      {"eta", 1.0},        {"crawl_speed", 1.0}, {"tissue_constant", 1.0},
                      {"inoculum", 1e5},   {"doubling_rate", 2.0}, {"replicates", 30}};
    }
    if (subcommand == "ants run") {
        return Params{{"layout", "clustered"},  {"world_side", 31},     {"cluster_count", 4},
                      {"dispersed_cells", 256}, {"seeds_per_ant", 40.0}, {"threshold_per_ant", 0.01},
                      {"decay", 0.02},          {"deposit", 1.0},        {"alpha", 2.0},
                      {"epsilon", 0.1},         {"base_leave", 0.01},    {"max_ticks", 2000},
                      {"n_ants", 32},           {"replicates", 1},       {"trace", false}};
    }
    if (subcommand == "smallworld run") {
        return Params{{"topology", "torus"}, {"sizes", {1024, 4096, 16384}}, {"policy", "logsquared"}, {"c", 1.0},
                      {"k", 1},              {"r_exponent", 2.0},            {"trials", 500}};
    }
    if (subcommand == "growth run") {
        return Params{{"model", "ontogenetic"}, {"a", 1.0},     {"b", 0.5},  {"p", 0.75}, {"gamma", 1.2},
                      {"m0", 1.0},              {"n0", 10.0},   {"t_end", 100.0}, {"dt", 0.01}};
    }
    return Params::object();
}

CliConfig parse_args(std::span<const std::string> args) {
    CLI::App app{"Scaling experiments for decentralized search and response", "radar"};
    app.require_subcommand(1);

    CliConfig config;
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", config_file, "JSON parameter file");
    app.add_option("--set", sets, "Override a parameter, key=value (dotted keys for nested groups)");
    app.add_option("--out", out_dir, "Output directory (default $RADAR_OUT or ./out)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed override");
    app.add_flag("-v,--verbose", config.verbosity, "Echo effective parameters (repeatable)");

    auto* list = app.add_subcommand("list", "List registered experiments");
    auto* run = app.add_subcommand("run", "Run a registered experiment");
    run->add_option("experiment", config.target, "Experiment name")->required();
    auto* immune = app.add_subcommand("immune", "Semi-modular immune search model");
    immune->require_subcommand(1);
    auto* immune_opt = immune->add_subcommand("optimize", "Optimal module volume and count for one M");
    auto* immune_des = immune->add_subcommand("des", "Discrete-event detect-then-recruit runs");
    auto* ants = app.add_subcommand("ants", "Pheromone foraging colony");
    ants->require_subcommand(1);
    auto* ants_run = ants->add_subcommand("run", "Run colonies and write foraging stats");
    auto* sw = app.add_subcommand("smallworld", "Lattice greedy routing");
    sw->require_subcommand(1);
    auto* sw_run = sw->add_subcommand("run", "Delivery-time scaling over sizes");
    auto* growth = app.add_subcommand("growth", "Growth ODEs");
    growth->require_subcommand(1);
    auto* growth_run = growth->add_subcommand("run", "Integrate a growth trajectory");
    auto* fit = app.add_subcommand("fit", "Log-log fit of the first two columns of a CSV file");
    fit->add_option("csv", config.target, "CSV file")->required();

    for (auto* sub : {list, run, immune, immune_opt, immune_des, ants, ants_run, sw, sw_run, growth, growth_run, fit}) {
        sub->fallthrough();
    }

    std::vector<const char*> argv{"radar"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (list->parsed()) config.subcommand = "list";
    else if (run->parsed()) config.subcommand = "run";
    else if (immune_opt->parsed()) config.subcommand = "immune optimize";
    else if (immune_des->parsed()) config.subcommand = "immune des";
    else if (ants_run->parsed()) config.subcommand = "ants run";
    else if (sw_run->parsed()) config.subcommand = "smallworld run";
    else if (growth_run->parsed()) config.subcommand = "growth run";
    else if (fit->parsed()) config.subcommand = "fit";

    if (*seed_opt) {
        config.seed = seed;
    }
    if (!out_dir.empty()) {
        config.output_dir = out_dir;
    } else if (const char* env = std::getenv("RADAR_OUT"); env != nullptr && *env != '\0') {
        config.output_dir = env;
    }

    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("--set expects key=value, got '" + s + "'");
        }
        config.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }

    config.params = config.subcommand == "run" ? experiments::find_experiment(config.target).parameters
                                               : subcommand_defaults(config.subcommand);
    if (!config_file.empty()) {
        config.config_file = config_file;
        experiments::merge_params(config.params, load_config(config_file));
    }
    for (const auto& [key, value] : config.overrides) {
        experiments::apply_override(config.params, key, value);
    }
    return config;
}

int execute(const CliConfig& c, std::ostream& out) {
    if (c.verbosity >= 1 && c.subcommand != "list" && c.subcommand != "fit") {
        out << "parameters: " << c.params.dump() << '\n';
    }
    if (c.subcommand == "list") {
        for (const auto& e : experiments::list_experiments()) {
            out << e.name << "  " << e.description << '\n';
        }
        return kOk;
    }
    if (c.subcommand == "run") return run_named(c, out);
    if (c.subcommand == "immune optimize") return run_immune_optimize(c, out);
    if (c.subcommand == "immune des") return run_immune_des(c, out);
    if (c.subcommand == "ants run") return run_ants(c, out);
    if (c.subcommand == "smallworld run") return run_smallworld(c, out);
    if (c.subcommand == "growth run") return run_growth(c, out);
    if (c.subcommand == "fit") return run_fit(c, out);
    throw UsageError("unknown subcommand '" + c.subcommand + "'");
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    try {
        const CliConfig config = parse_args(args);
        return execute(config, out);
    } catch (const CLI::CallForHelp&) {
        out << "usage: radar [--seed S] [--out DIR] [--set key=value]... [--config FILE] [-v] <command>\n"
               "commands: list | run <experiment> | immune optimize|des | ants run | smallworld run | growth run"
               " | fit <csv>\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const LookupError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const nlohmann::json::exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace radar::cli
