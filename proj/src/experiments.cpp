#include "radar/experiments.hpp"

#include "radar/ants.hpp"
#include "radar/error.hpp"
#include "radar/format.hpp"
#include "radar/immune.hpp"
#include "radar/plot.hpp"
#include "radar/scaling.hpp"
#include "radar/smallworld.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

namespace radar::experiments {

namespace {

namespace fs = std::filesystem;

struct Measured {
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, double>> notes;

    void set(std::string quantity, double v) { values.emplace_back(std::move(quantity), v); }
    void note(std::string quantity, double v) { notes.emplace_back(std::move(quantity), v); }
};

class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        }
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& file, const std::string& content) {
        const fs::path path = dir_ / file;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot open " + path.string() + " for writing");
        }
        out << content;
        if (!out) {
            throw IoError("failed writing " + path.string());
        }
        outputs_.push_back(path);
    }

    void plot(const std::string& file, const std::vector<plot::Series>& series, const plot::AxesSpec& axes) {
        const fs::path path = dir_ / file;
        plot::emit_plot(series, axes, path);
        outputs_.push_back(path);
    }

    std::vector<fs::path> take_outputs() { return std::move(outputs_); }

private:
    fs::path dir_;
    std::vector<fs::path> outputs_;
};

using ExpectationFn = std::function<std::vector<Expectation>(const Params&)>;
using RunFn = std::function<Measured(const Params&, std::uint64_t, OutputDir&)>;

struct Registered {
    ExperimentSpec spec;
    ExpectationFn expectations;
    RunFn run;
};

double num(const Params& p, const char* key) { return p.at(key).get<double>(); }

std::uint64_t count(const Params& p, const char* key) {
    const auto& v = p.at(key);
    if (v.is_number_float() ? v.get<double>() < 0.0 : (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(std::string(key) + " must be non-negative");
    }
    if (v.is_number_float()) {
        return static_cast<std::uint64_t>(v.get<double>());
    }
    return v.get<std::uint64_t>();
}

std::vector<double> num_list(const Params& p, const char* key) { return p.at(key).get<std::vector<double>>(); }

std::string scaling_row(const std::string& quantity, const scaling::RegressionResult& r) {
    return quantity + ',' + format_double(r.slope) + ',' + format_double(r.slope_stderr) + ',' +
           format_double(r.r_squared) + ',' + (r.p_value ? format_double(*r.p_value) : std::string("nan")) + '\n';
}

constexpr const char* kScalingHeader = "quantity,slope,stderr,r2,p_value\n";

// ---------------------------------------------------------------- growth

Params growth_defaults() {
    return Params{
        {"growth", {{"a", 1.0}, {"b", 0.5}, {"p", 0.75}, {"m0", 1.0}}},
        {"horizon_time_scales", 40.0},
        {"dt_fraction", 1e-3},
        {"samples", 100},
        {"city", {{"a", 1.0}, {"b", 0.1}, {"gamma", 1.2}, {"n0", 10.0}, {"t_end", 10.0}, {"dt", 1e-3}, {"refinement", 10}}},
    };
}

scaling::GrowthParams growth_params(const Params& p) {
    const auto& g = p.at("growth");
    return {num(g, "a"), num(g, "b"), num(g, "p"), num(g, "m0")};
}

std::vector<Expectation> growth_expectations(const Params& p) {
    const auto g = growth_params(p);
    const double asymptote = std::pow(g.a / g.b, 1.0 / (1.0 - g.p));
    std::vector<Expectation> e{
        {"final_mass", asymptote, 1e-3 * asymptote, Provenance::Paper, Comparison::Within},
        {"fixed_point_rel_residual", 1e-12, 0.0, Provenance::Property, Comparison::AtMost},
        {"blowup_refinement_rel_change", 0.01, 0.0, Provenance::Derived, Comparison::AtMost},
    };
    if (g.p == 0.75) {
        e.push_back({"rk4_vs_analytic_max_rel_error", 1e-6, 0.0, Provenance::Derived, Comparison::AtMost});
    }
    return e;
}

Measured run_growth(const Params& p, std::uint64_t, OutputDir& out) {
    Measured m;
    const auto g = growth_params(p);
    const double mass = scaling::asymptotic_mass(g);
    // Relaxation time of the linearised equation, valid for any p.
    const double time_scale = 1.0 / ((1.0 - g.p) * g.b);
    const double t_end = num(p, "horizon_time_scales") * time_scale;
    const double dt = num(p, "dt_fraction") * time_scale;
    const auto trajectory = scaling::integrate_growth(g, t_end, dt);
    m.set("final_mass", trajectory.back().value);

    const double flux = scaling::power_eval({g.a, g.p}, mass);
    m.set("fixed_point_rel_residual", std::abs(flux - g.b * mass) / (g.b * mass));

    const std::size_t samples = std::max<std::uint64_t>(1, count(p, "samples"));
    std::vector<plot::Series> series{{"RK4", {}, false}};
    if (g.p == 0.75) {
        series.push_back({"closed form", {}, false});
        double worst = 0.0;
        for (std::size_t i = 1; i <= samples; ++i) {
            const auto& s = trajectory[i * (trajectory.size() - 1) / samples];
            const double exact = scaling::growth_analytic(g, s.t);
            worst = std::max(worst, std::abs(s.value - exact) / exact);
            series[1].points.push_back({s.t, exact});
        }
        m.set("rk4_vs_analytic_max_rel_error", worst);
    }
    for (std::size_t i = 0; i <= samples; ++i) {
        const auto& s = trajectory[i * (trajectory.size() - 1) / samples];
        series[0].points.push_back({s.t, s.value});
    }

    std::ostringstream csv;
    scaling::write_trajectory_csv(csv, trajectory);
    out.write("growth.csv", csv.str());
    out.plot("growth.svg", series, {"Ontogenetic growth", "t", "mass", false, false});

    const auto& c = p.at("city");
    const scaling::CityGrowthParams city{num(c, "a"), num(c, "b"), num(c, "gamma"), num(c, "n0")};
    const double city_dt = num(c, "dt");
    const auto refinement = static_cast<double>(std::max<std::uint64_t>(1, count(c, "refinement")));
    const auto coarse = scaling::city_growth(city, num(c, "t_end"), city_dt);
    const auto fine = scaling::city_growth(city, num(c, "t_end"), city_dt / refinement);
    std::ostringstream city_csv;
    scaling::write_trajectory_csv(city_csv, coarse.trajectory);
    out.write("city.csv", city_csv.str());
    if (coarse.blow_up_time && fine.blow_up_time) {
        m.note("blowup_time", *coarse.blow_up_time);
        m.note("blowup_time_refined", *fine.blow_up_time);
        m.set("blowup_refinement_rel_change", std::abs(*coarse.blow_up_time - *fine.blow_up_time) / *fine.blow_up_time);
    } else {
        // No blow-up under these parameters: the check does not apply and reads as failed.
        m.set("blowup_refinement_rel_change", INFINITY);
    }
    plot::Series city_series{"n(t)", {}, false};
    const std::size_t stride = std::max<std::size_t>(1, coarse.trajectory.size() / 200);
    for (std::size_t i = 0; i < coarse.trajectory.size(); i += stride) {
        city_series.points.push_back({coarse.trajectory[i].t, coarse.trajectory[i].value});
    }
    out.plot("city.svg", {city_series}, {"City growth", "t", "n", false, true});
    return m;
}

// ---------------------------------------------------------------- immune

Params immune_exponent_defaults() {
    return Params{{"A", 1.0}, {"B", 1.0}, {"M_min", 1.0}, {"M_max", 1e6}, {"points_per_decade", 1},
                  {"tissue_constant", 1.0}};
}

std::vector<double> geometric_sizes(double lo, double hi, std::uint64_t per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) {
        throw UsageError("system-size range needs 0 < M_min < M_max and points_per_decade >= 1");
    }
    const auto steps =
        static_cast<std::size_t>(std::llround(std::log10(hi / lo) * static_cast<double>(per_decade)));
    std::vector<double> out;
    for (std::size_t i = 0; i <= steps; ++i) {
        out.push_back(lo * std::pow(10.0, static_cast<double>(i) / static_cast<double>(per_decade)));
    }
    return out;
}

std::vector<Expectation> immune_exponent_expectations(const Params&) {
    return {
        {"slope_T", 1.0 / 7.0, 1e-6, Provenance::Paper, Comparison::Within},
        {"slope_V_plus_slope_N", 1.0, 1e-9, Provenance::Property, Comparison::Within},
        {"slope_V", 3.0 / 7.0, 1e-6, Provenance::Derived, Comparison::Within},
        {"slope_N", 4.0 / 7.0, 1e-6, Provenance::Derived, Comparison::Within},
        {"optimizer_vs_stationary_max_rel_gap", 1e-9, 0.0, Provenance::Derived, Comparison::AtMost},
    };
}

Measured run_immune_exponents(const Params& p, std::uint64_t seed, OutputDir& out) {
    Measured m;
    const immune::ArchitectureConstants consts{num(p, "A"), num(p, "B")};
    const auto sizes = geometric_sizes(num(p, "M_min"), num(p, "M_max"), count(p, "points_per_decade"));
    const auto result = immune::scaling_exponents(consts, sizes, num(p, "tissue_constant"));

    m.set("slope_T", result.total.slope);
    m.set("slope_V_plus_slope_N", result.volume.slope + result.count.slope);
    m.set("slope_V", result.volume.slope);
    m.set("slope_N", result.count.slope);
    double gap = 0.0;
    for (const auto& o : result.optima) {
        gap = std::max(gap, std::abs(o.architecture.module_volume - o.stationary_volume) / o.stationary_volume);
    }
    m.set("optimizer_vs_stationary_max_rel_gap", gap);
    const auto& first = result.optima.front();
    m.note("balance_ratio_t_detect_over_t_comm", first.times.t_detect / first.times.t_comm);
    m.note("tissue_ratio_NV_over_M",
           first.architecture.module_count * first.architecture.module_volume / first.architecture.system_size);

    std::vector<immune::DesRow> rows;
    for (const auto& o : result.optima) {
        immune::DesRow r;
        r.system_size = o.architecture.system_size;
        r.module_volume = o.architecture.module_volume;
        r.module_count = o.architecture.module_count;
        r.seed = seed;
        r.outcome.detection_time = o.times.t_detect;
        r.outcome.recruitment_time = o.times.t_comm;
        r.outcome.total_time = o.times.t_total;
        rows.push_back(r);
    }
    std::ostringstream csv;
    immune::write_runs_csv(csv, rows);
    out.write("optima.csv", csv.str());
    out.write("scaling.csv", std::string(kScalingHeader) + scaling_row("V_star", result.volume) +
                                 scaling_row("N_star", result.count) + scaling_row("t_total", result.total));

    std::vector<plot::Series> series{{"V*", {}, true}, {"N*", {}, true}, {"t_total", {}, true}};
    for (const auto& o : result.optima) {
        series[0].points.push_back({o.architecture.system_size, o.architecture.module_volume});
        series[1].points.push_back({o.architecture.system_size, o.architecture.module_count});
        series[2].points.push_back({o.architecture.system_size, o.times.t_total});
    }
    out.plot("exponents.svg", series, {"Optimal semi-modular architecture", "M", "value"});
    return m;
}

Params immune_des_defaults() {
    return Params{
        {"immune",
         {{"kappa", 1.0},
          {"rho", 1.0},
          {"eta", 1.0},
          {"crawl_speed", 1.0},
          {"tissue_constant", 1.0},
          {"inoculum", 1e5},
          {"doubling_rate", 2.0}}},
        {"replicates", 200},
        {"volume_sweep", {{"M", 1e6}, {"V", {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}}}},
        {"mass_sweep", {{"M", {1e3, 1e4, 1e5, 1e6, 1e7, 1e8}}}},
        {"detection_draws", 100000},
        {"detection_V", 1000.0},
    };
}

immune::ImmuneSimConfig immune_config(const Params& p, std::uint64_t seed) {
    const auto& c = p.at("immune");
    immune::ImmuneSimConfig config;
    config.demand = num(c, "kappa");
    config.cell_density = num(c, "rho");
    config.contact_rate = num(c, "eta");
    config.crawl_speed = num(c, "crawl_speed");
    config.tissue_constant = num(c, "tissue_constant");
    config.inoculum = num(c, "inoculum");
    config.doubling_rate = num(c, "doubling_rate");
    config.rng_seed = seed;
    return config;
}

std::vector<Expectation> immune_des_expectations(const Params&) {
    return {
        {"detect_slope_vs_V", 1.0 / 3.0, 0.05, Provenance::Derived, Comparison::Within},
        {"recruit_slope_vs_V", -2.0, 0.1, Provenance::Derived, Comparison::Within},
        {"total_slope_vs_M", 1.0 / 7.0, 0.05, Provenance::Paper, Comparison::Within},
        {"mean_detection_over_three_quarter_R", 1.0, 0.01, Provenance::Derived, Comparison::Within},
    };
}

Measured run_immune_des(const Params& p, std::uint64_t seed, OutputDir& out) {
    Measured m;
    auto config = immune_config(p, seed);
    const std::size_t replicates = count(p, "replicates");

    config.system_size = num(p.at("volume_sweep"), "M");
    const auto volumes = num_list(p.at("volume_sweep"), "V");
    const auto sweep = immune::des_volume_sweep(config, volumes, replicates);
    m.set("detect_slope_vs_V", sweep.detection.slope);
    m.set("recruit_slope_vs_V", sweep.recruitment.slope);

    const auto consts = immune::constants_for(config);
    const auto masses = num_list(p.at("mass_sweep"), "M");
    const auto scaled = immune::des_scaling(consts, config, masses, replicates);
    m.set("total_slope_vs_M", scaled.total.slope);
    m.note("detect_slope_vs_M", scaled.detection.slope);
    m.note("recruit_slope_vs_M", scaled.recruitment.slope);

    // Serial recruitment against the closed form B M / V^2 at the largest M.
    {
        const auto& last = scaled.rows.back();
        const double closed = immune::communication_time(consts, last.system_size, last.module_volume);
        m.note("recruit_vs_closed_form_rel_error_at_max_M", std::abs(last.outcome.recruitment_time - closed) / closed);
    }

    const std::size_t draws = count(p, "detection_draws");
    config.module_volume = num(p, "detection_V");
    double sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        config.rng_seed = seed + i;
        sum += immune::des_run(config).detection_time;
    }
    const double expected_mean = 0.75 * immune::sphere_radius(config.module_volume) / config.crawl_speed;
    m.set("mean_detection_over_three_quarter_R", sum / static_cast<double>(draws) / expected_mean);

    std::ostringstream runs;
    immune::write_runs_csv(runs, scaled.rows);
    out.write("runs.csv", runs.str());
    std::ostringstream sweep_csv;
    immune::write_runs_csv(sweep_csv, sweep.rows);
    out.write("sweep.csv", sweep_csv.str());
    out.write("scaling.csv", std::string(kScalingHeader) + scaling_row("t_detect_vs_V", sweep.detection) +
                                 scaling_row("t_comm_vs_V", sweep.recruitment) +
                                 scaling_row("t_detect_vs_M", scaled.detection) +
                                 scaling_row("t_comm_vs_M", scaled.recruitment) +
                                 scaling_row("t_total_vs_M", scaled.total));

    std::vector<plot::Series> series{{"mean t_detect", {}, true}, {"mean t_comm", {}, true}, {"mean t_total", {}, true}};
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double d = 0.0, c = 0.0, t = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) {
            const auto& o = scaled.rows[i * replicates + r].outcome;
            d += o.detection_time;
            c += o.recruitment_time;
            t += o.total_time;
        }
        const double k = static_cast<double>(replicates);
        series[0].points.push_back({masses[i], d / k});
        series[1].points.push_back({masses[i], c / k});
        series[2].points.push_back({masses[i], t / k});
    }
    out.plot("des.svg", series, {"Simulated response time at the optimal module size", "M", "time"});
    return m;
}

// ---------------------------------------------------------------- ants

Params ant_symmetry_defaults() {
    return Params{{"world_side", 21},  {"pile_offset", 6},   {"pile_seeds", 100000}, {"n_ants", 20},
                  {"alpha", 2.0},      {"decay", 0.05},      {"deposit", 1.0},       {"epsilon", 0.1},
                  {"base_leave", 0.01}, {"threshold", 0.0},  {"max_ticks", 2000},    {"runs", 200},
                  {"concentration", 0.8}};
}

std::vector<Expectation> ant_symmetry_expectations(const Params&) {
    return {{"fraction_runs_concentrated", 0.7, 0.0, Provenance::Derived, Comparison::AtLeast}};
}

Measured run_ant_symmetry(const Params& p, std::uint64_t seed, OutputDir& out) {
    Measured m;
    const int side = static_cast<int>(count(p, "world_side"));
    const int offset = static_cast<int>(count(p, "pile_offset"));
    const auto pile = static_cast<std::uint32_t>(count(p, "pile_seeds"));
    const int c = side / 2;
    const ants::World world(side, side, false, {c, c}, {{{c - offset, c}, pile}, {{c + offset, c}, pile}});

    ants::ColonyConfig config;
    config.n_ants = count(p, "n_ants");
    config.alpha_distribution = ants::ConstantAlpha{num(p, "alpha")};
    config.behaviour = {num(p, "threshold"), num(p, "base_leave"), num(p, "epsilon")};
    config.max_ticks = count(p, "max_ticks");
    const ants::FieldParams field{num(p, "decay"), num(p, "deposit")};
    const double bar = num(p, "concentration");
    const std::size_t runs = count(p, "runs");

    std::ostringstream csv;
    csv << "run,seed,trips_west,trips_east,concentration\n";
    plot::Series series{"concentration per run", {}, false};
    std::size_t concentrated = 0;
    double total_conc = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        config.rng_seed = seed + r;
        const auto stats = ants::run_colony(world, field, config).stats;
        const auto west = stats.trips_per_pile[0];
        const auto east = stats.trips_per_pile[1];
        const double trips = static_cast<double>(west + east);
        const double conc = trips > 0.0 ? static_cast<double>(std::max(west, east)) / trips : 0.0;
        concentrated += conc >= bar ? 1 : 0;
        total_conc += conc;
        csv << r << ',' << config.rng_seed << ',' << west << ',' << east << ',' << format_double(conc) << '\n';
        series.points.push_back({static_cast<double>(r), conc});
    }
    const double k = static_cast<double>(std::max<std::size_t>(runs, 1));
    m.set("fraction_runs_concentrated", static_cast<double>(concentrated) / k);
    m.note("mean_concentration", total_conc / k);
    out.write("runs.csv", csv.str());
    out.plot("symmetry.svg", {series}, {"Trip concentration on the dominant pile", "run", "share of trips", false, false});
    return m;
}

Params ant_percapita_defaults() {
    return Params{{"sizes", {8, 32, 128, 512}},
                  {"replicates", 20},
                  {"world_side", 31},
                  {"cluster_count", 4},
                  {"dispersed_cells", 256},
                  {"seeds_per_ant", 40.0},
                  {"threshold_per_ant", 0.01},
                  {"decay", 0.02},
                  {"deposit", 1.0},
                  {"alpha", 2.0},
                  {"epsilon", 0.1},
                  {"base_leave", 0.01},
                  {"max_ticks", 2000},
                  {"baseline", true}};
}

std::vector<Expectation> ant_percapita_expectations(const Params& p) {
    std::vector<Expectation> e{{"recruitment_slope", 0.0, 0.15, Provenance::Derived, Comparison::Within}};
    if (p.at("baseline").get<bool>()) {
        e.push_back({"baseline_slope", 0.0, 0.2, Provenance::Derived, Comparison::Within});
    }
    return e;
}

Measured run_ant_percapita(const Params& p, std::uint64_t seed, OutputDir& out) {
    Measured m;
    std::vector<std::size_t> sizes;
    for (double s : num_list(p, "sizes")) {
        sizes.push_back(static_cast<std::size_t>(s));
    }
    const std::size_t replicates = count(p, "replicates");

    ants::ForagingScenario sc;
    sc.layout = ants::SeedLayout::Clustered;
    sc.world_side = static_cast<int>(count(p, "world_side"));
    sc.cluster_count = static_cast<std::uint32_t>(count(p, "cluster_count"));
    sc.dispersed_cells = static_cast<std::uint32_t>(count(p, "dispersed_cells"));
    sc.seeds_per_ant = num(p, "seeds_per_ant");
    sc.threshold_per_ant = num(p, "threshold_per_ant");
    sc.field = {num(p, "decay"), num(p, "deposit")};
    sc.colony.alpha_distribution = ants::ConstantAlpha{num(p, "alpha")};
    sc.colony.behaviour.base_leave_probability = num(p, "base_leave");
    sc.colony.behaviour.uniform_mix = num(p, "epsilon");
    sc.colony.max_ticks = count(p, "max_ticks");

    const auto recruit = ants::per_capita_scaling(sc, sizes, replicates, seed);
    m.set("recruitment_slope", recruit.fit.slope);
    std::ostringstream csv;
    ants::write_stats_csv(csv, recruit.rows);
    out.write("stats.csv", csv.str());

    const auto means = [&](const ants::PerCapitaScaling& res, const std::string& label) {
        plot::Series s{label, {}, true};
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            double sum = 0.0;
            for (std::size_t r = 0; r < replicates; ++r) {
                sum += res.rows[i * replicates + r].stats.per_capita_rate;
            }
            s.points.push_back({static_cast<double>(sizes[i]), sum / static_cast<double>(replicates)});
        }
        return s;
    };
    std::vector<plot::Series> series{means(recruit, "clustered, recruitment on")};

    if (p.at("baseline").get<bool>()) {
        auto base = sc;
        base.layout = ants::SeedLayout::Dispersed;
        base.colony.alpha_distribution = ants::ConstantAlpha{0.0};
        const auto baseline = ants::per_capita_scaling(base, sizes, replicates, seed);
        m.set("baseline_slope", baseline.fit.slope);
        std::ostringstream bcsv;
        ants::write_stats_csv(bcsv, baseline.rows);
        out.write("baseline_stats.csv", bcsv.str());
        series.push_back(means(baseline, "dispersed, alpha = 0"));
    }
    out.plot("percapita.svg", series, {"Per-capita foraging rate", "colony size", "seeds per ant per tick"});
    return m;
}

// ---------------------------------------------------------------- small world

Params smallworld_defaults() {
    return Params{{"size_exponents", {10, 12, 14, 16}},
                  {"trials", 1000},
                  {"c", 1.0},
                  {"r_exponent", 2.0},
                  {"paired_n", 16384}};
}

std::vector<Expectation> smallworld_expectations(const Params&) {
    return {
        {"densified_r2_vs_log", 0.95, 0.0, Provenance::Derived, Comparison::AtLeast},
        {"densified_r2_log_minus_log_squared", 0.0, 0.0, Provenance::Derived, Comparison::Above},
        {"constant_r2_vs_log_squared", 0.95, 0.0, Provenance::Derived, Comparison::AtLeast},
        {"constant_r2_log_squared_minus_log", 0.0, 0.0, Provenance::Derived, Comparison::Above},
        {"paired_mean_hops_constant_minus_densified", 0.0, 0.0, Provenance::Property, Comparison::Above},
    };
}

Measured run_smallworld(const Params& p, std::uint64_t seed, OutputDir& out) {
    Measured m;
    std::vector<std::uint32_t> sizes;
    for (double e : num_list(p, "size_exponents")) {
        if (e < 0.0 || e > 30.0) {
            throw UsageError("size exponents must lie in [0, 30]");
        }
        sizes.push_back(std::uint32_t{1} << static_cast<unsigned>(e));
    }
    const std::size_t trials = count(p, "trials");
    const double r = num(p, "r_exponent");
    const auto paired_n = static_cast<std::uint32_t>(count(p, "paired_n"));
    const auto paired = std::find(sizes.begin(), sizes.end(), paired_n);
    if (paired == sizes.end()) {
        throw UsageError("paired_n must be one of the simulated sizes");
    }
    const auto paired_index = static_cast<std::size_t>(paired - sizes.begin());

    const smallworld::DegreePolicy dense = smallworld::LogSquaredDegree{num(p, "c")};
    const smallworld::DegreePolicy sparse = smallworld::ConstantDegree{1};
    const auto d = smallworld::delivery_scaling(smallworld::Topology::Torus, sizes, dense, r, trials, seed);
    const auto s = smallworld::delivery_scaling(smallworld::Topology::Torus, sizes, sparse, r, trials, seed);

    m.set("densified_r2_vs_log", d.vs_log.r_squared);
    m.set("densified_r2_log_minus_log_squared", d.vs_log.r_squared - d.vs_log_squared.r_squared);
    m.set("constant_r2_vs_log_squared", s.vs_log_squared.r_squared);
    m.set("constant_r2_log_squared_minus_log", s.vs_log_squared.r_squared - s.vs_log.r_squared);
    m.set("paired_mean_hops_constant_minus_densified",
          s.sizes[paired_index].mean_hops - d.sizes[paired_index].mean_hops);
    m.note("densified_slope_per_ln_n", d.vs_log.slope);
    m.note("constant_slope_per_ln_n_squared", s.vs_log_squared.slope);

    std::ostringstream csv;
    smallworld::write_results_csv(csv, dense, d.sizes);
    std::ostringstream sparse_csv;
    smallworld::write_results_csv(sparse_csv, sparse, s.sizes);
    // Second table without its header line.
    const std::string sparse_rows = sparse_csv.str();
    out.write("results.csv", csv.str() + sparse_rows.substr(sparse_rows.find('\n') + 1));

    std::vector<plot::Series> series{{smallworld::policy_name(dense), {}, true},
                                     {smallworld::policy_name(sparse), {}, true}};
    for (const auto& row : d.sizes) {
        series[0].points.push_back({static_cast<double>(row.n), row.mean_hops});
    }
    for (const auto& row : s.sizes) {
        series[1].points.push_back({static_cast<double>(row.n), row.mean_hops});
    }
    out.plot("delivery.svg", series, {"Greedy routing on a 2D torus", "n", "mean hops", true, false});
    return m;
}

// ---------------------------------------------------------------- registry

Registered make(std::string name, std::string description, Params defaults, ExpectationFn expectations, RunFn run,
                std::uint64_t seed_base) {
    Registered r;
    r.spec.name = std::move(name);
    r.spec.description = std::move(description);
    r.spec.expected = expectations(defaults);
    r.spec.parameters = std::move(defaults);
    r.spec.seed_base = seed_base;
    r.expectations = std::move(expectations);
    r.run = std::move(run);
    return r;
}

const std::vector<Registered>& registry() {
    static const std::vector<Registered> entries = [] {
        std::vector<Registered> v;
        v.push_back(make("ant-percapita",
                         "per-capita foraging rate vs colony size with pheromone recruitment (slope near 0)",
                         ant_percapita_defaults(), ant_percapita_expectations, run_ant_percapita, 1));
        v.push_back(make("ant-symmetry", "two equidistant piles: recruitment concentrates trips on one pile",
                         ant_symmetry_defaults(), ant_symmetry_expectations, run_ant_symmetry, 1));
        v.push_back(make("growth-asymptote",
                         "RK4 growth vs closed form, asymptotic mass (a/b)^4 and city-growth blow-up",
                         growth_defaults(), growth_expectations, run_growth, 1));
        v.push_back(make("immune-des", "discrete-event detect-then-recruit simulation vs the closed forms",
                         immune_des_defaults(), immune_des_expectations, run_immune_des, 1));
        v.push_back(make("immune-exponents", "optimal module size and count vs system size; total time ~ M^(1/7)",
                         immune_exponent_defaults(), immune_exponent_expectations, run_immune_exponents, 1));
        v.push_back(make("smallworld-densify",
                         "greedy routing hops: k = c (ln n)^2 long links vs a single long link",
                         smallworld_defaults(), smallworld_expectations, run_smallworld, 1));
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.spec.name < b.spec.name; });
        return v;
    }();
    return entries;
}

const Registered& lookup(std::string_view name) {
    for (const auto& r : registry()) {
        if (r.spec.name == name) {
            return r;
        }
    }
    throw LookupError("unknown experiment '" + std::string(name) + "'");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------- overrides

double parse_double(std::string_view key, std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw UsageError("parameter '" + std::string(key) + "' expects a number, got '" + s + "'");
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("parameter '" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'");
    }
    return v;
}

Params parse_like(const Params& like, std::string_view key, std::string_view text) {
    switch (like.type()) {
        case Params::value_t::number_float: return parse_double(key, text);
        // Integer parameters are counts.
        case Params::value_t::number_unsigned:
        case Params::value_t::number_integer: return parse_int<std::uint64_t>(key, text);
        case Params::value_t::boolean:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw UsageError("parameter '" + std::string(key) + "' expects true or false, got '" + std::string(text) + "'");
        case Params::value_t::string: return std::string(text);
        default: throw UsageError("parameter '" + std::string(key) + "' cannot be set from text");
    }
}

bool compatible(const Params& slot, const Params& value) {
    if (slot.is_number_float()) {
        return value.is_number();
    }
    if (slot.is_number_integer()) {
        // Integer parameters are all counts.
        return value.is_number_integer() && (value.is_number_unsigned() || value.get<std::int64_t>() >= 0);
    }
    if (slot.is_array()) {
        if (!value.is_array()) {
            return false;
        }
        if (slot.empty()) {
            return true;
        }
        return std::all_of(value.begin(), value.end(), [&](const Params& v) { return compatible(slot.front(), v); });
    }
    return slot.type() == value.type();
}

}  // namespace

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::Paper: return "paper";
        case Provenance::Derived: return "derived";
        case Provenance::Property: return "property";
    }
    return "?";
}

std::string_view to_string(Comparison c) {
    switch (c) {
        case Comparison::Within: return "within";
        case Comparison::AtLeast: return "at_least";
        case Comparison::AtMost: return "at_most";
        case Comparison::Above: return "above";
    }
    return "?";
}

bool satisfies(const Expectation& e, double measured) {
    if (std::isnan(measured)) {
        return false;
    }
    switch (e.comparison) {
        case Comparison::Within: return std::abs(measured - e.target) <= e.tolerance;
        case Comparison::AtLeast: return measured >= e.target;
        case Comparison::AtMost: return measured <= e.target;
        case Comparison::Above: return measured > e.target;
    }
    return false;
}

bool ExperimentReport::passed() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.pass; });
}

std::string serialize_report(const ExperimentReport& r) {
    std::ostringstream out;
    out << "# experiment " << r.name << '\n';
    out << "# seed " << r.seed << '\n';
    out << "# started " << r.started << '\n';
    out << "# finished " << r.finished << '\n';
    for (const auto& [k, v] : r.notes) {
        out << "# note " << k << ' ' << format_double(v) << '\n';
    }
    for (const auto& path : r.outputs) {
        out << "# output " << path.string() << '\n';
    }
    for (const auto& o : r.outcomes) {
        out << o.quantity << ' ' << format_double(o.measured) << ' ' << format_double(o.target) << ' '
            << format_double(o.tolerance) << ' ' << (o.pass ? "pass" : "fail") << ' ' << to_string(o.comparison)
            << '\n';
    }
    return out.str();
}

ExperimentReport parse_report(std::string_view text) {
    ExperimentReport r;
    std::istringstream in{std::string(text)};
    std::string line;
    const auto bad = [&](const std::string& why) { return Error("malformed report line '" + line + "': " + why); };
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        if (line.front() == '#') {
            std::string hash, key;
            fields >> hash >> key;
            std::string rest;
            std::getline(fields >> std::ws, rest);
            if (key == "experiment") {
                r.name = rest;
            } else if (key == "seed") {
                r.seed = std::stoull(rest);
            } else if (key == "started") {
                r.started = rest;
            } else if (key == "finished") {
                r.finished = rest;
            } else if (key == "note") {
                const auto space = rest.rfind(' ');
                if (space == std::string::npos) {
                    throw bad("note needs a name and a value");
                }
                r.notes.emplace_back(rest.substr(0, space), std::strtod(rest.c_str() + space + 1, nullptr));
            } else if (key == "output") {
                r.outputs.emplace_back(rest);
            }
            continue;
        }
        Outcome o;
        std::string measured, target, tolerance, verdict, comparison;
        if (!(fields >> o.quantity >> measured >> target >> tolerance >> verdict >> comparison)) {
            throw bad("expected six fields");
        }
        o.measured = std::strtod(measured.c_str(), nullptr);
        o.target = std::strtod(target.c_str(), nullptr);
        o.tolerance = std::strtod(tolerance.c_str(), nullptr);
        o.pass = verdict == "pass";
        if (comparison == "within") o.comparison = Comparison::Within;
        else if (comparison == "at_least") o.comparison = Comparison::AtLeast;
        else if (comparison == "at_most") o.comparison = Comparison::AtMost;
        else if (comparison == "above") o.comparison = Comparison::Above;
        else throw bad("unknown comparison");
        r.outcomes.push_back(std::move(o));
    }
    return r;
}

std::vector<ExperimentInfo> list_experiments() {
    std::vector<ExperimentInfo> out;
    for (const auto& r : registry()) {
        out.push_back({r.spec.name, r.spec.description});
    }
    return out;
}

const ExperimentSpec& find_experiment(std::string_view name) { return lookup(name).spec; }

void apply_override(Params& params, std::string_view dotted_path, std::string_view text) {
    Params* node = &params;
    std::string_view rest = dotted_path;
    while (true) {
        const auto dot = rest.find('.');
        const std::string key(rest.substr(0, dot));
        if (key.empty() || !node->is_object() || !node->contains(key)) {
            throw UsageError("unknown parameter '" + std::string(dotted_path) + "'");
        }
        node = &(*node)[key];
        if (dot == std::string_view::npos) {
            break;
        }
        rest = rest.substr(dot + 1);
    }
    if (node->is_object()) {
        throw UsageError("parameter '" + std::string(dotted_path) + "' is a group, not a value");
    }
    if (node->is_array()) {
        const Params like = node->empty() ? Params(0.0) : node->front();
        Params list = Params::array();
        std::string_view items = text;
        while (!items.empty()) {
            const auto comma = items.find(',');
            list.push_back(parse_like(like, dotted_path, items.substr(0, comma)));
            if (comma == std::string_view::npos) {
                break;
            }
            items = items.substr(comma + 1);
        }
        *node = std::move(list);
        return;
    }
    *node = parse_like(*node, dotted_path, text);
}

void merge_params(Params& params, const Params& overlay) {
    if (!overlay.is_object()) {
        throw UsageError("parameter overlay must be an object");
    }
    for (const auto& [key, value] : overlay.items()) {
        if (!params.contains(key)) {
            throw UsageError("unknown parameter '" + key + "'");
        }
        auto& slot = params[key];
        if (slot.is_object()) {
            merge_params(slot, value);
        } else if (!compatible(slot, value)) {
            throw UsageError("parameter '" + key + "' has the wrong type");
        } else if (slot.is_number_float()) {
            slot = value.get<double>();
        } else {
            slot = value;
        }
    }
}

ExperimentReport run_experiment(std::string_view name, const RunOptions& options, const fs::path& output_dir) {
    const auto& entry = lookup(name);
    Params params = entry.spec.parameters;
    merge_params(params, options.overrides);

    ExperimentReport report;
    report.name = entry.spec.name;
    report.seed = options.seed.value_or(entry.spec.seed_base);
    report.started = utc_now();

    OutputDir out(output_dir / entry.spec.name);
    const Measured measured = entry.run(params, report.seed, out);
    for (const auto& e : entry.expectations(params)) {
        const auto it = std::find_if(measured.values.begin(), measured.values.end(),
                                     [&](const auto& kv) { return kv.first == e.quantity; });
        Outcome o;
        o.quantity = e.quantity;
        o.measured = it != measured.values.end() ? it->second : NAN;
        o.target = e.target;
        o.tolerance = e.tolerance;
        o.comparison = e.comparison;
        o.pass = satisfies(e, o.measured);
        report.outcomes.push_back(std::move(o));
    }
    report.notes = measured.notes;
    report.finished = utc_now();
    report.outputs = out.take_outputs();
    const fs::path report_path = out.dir() / "report";
    report.outputs.push_back(report_path);
    out.write("report", serialize_report(report));
    return report;
}

}  // namespace radar::experiments
