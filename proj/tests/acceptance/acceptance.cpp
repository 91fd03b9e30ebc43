// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [scratch-dir]

#include "radar/ants.hpp"
#include "radar/cli.hpp"
#include "radar/experiments.hpp"
#include "radar/format.hpp"
#include "radar/immune.hpp"
#include "radar/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace radar;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void info(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) { return format_short(v); }

double measured(const experiments::ExperimentReport& r, const std::string& quantity) {
    for (const auto& o : r.outcomes) {
        if (o.quantity == quantity) return o.measured;
    }
    for (const auto& [k, v] : r.notes) {
        if (k == quantity) return v;
    }
    return NAN;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv") {
            std::ifstream in(entry.path(), std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            out[entry.path().filename().string()] = s.str();
        }
    }
    return out;
}

// Mirrors the library's rule with an independent implementation.
std::vector<double> eq3(const std::vector<double>& tau, double alpha) {
    std::vector<double> w(tau.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        w[i] = alpha == 0.0 ? 1.0 : std::pow(tau[i], alpha);
        sum += w[i];
    }
    for (auto& x : w) x /= sum;
    return w;
}

fs::path g_scratch;

Verdict criterion1() {
    Verdict v;
    Rng rng(20240601);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double a = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        const double b = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        const double m = std::exp(rng.uniform(0.0, std::log(1e9)));
        const auto opt = immune::optimize_architecture({a, b}, m);
        // A/3 V^(-2/3) = 2 B M V^(-3)  =>  V = (6 B M / A)^(3/7)
        const double root = std::pow(6.0 * b * m / a, 3.0 / 7.0);
        worst = std::max(worst, std::abs(opt.architecture.module_volume - root) / root);
    }
    v.require(worst <= 1e-9, "max relative gap " + fmt(worst) + " > 1e-9");
    v.info("max relative gap " + fmt(worst));
    return v;
}

Verdict criterion2() {
    Verdict v;
    std::vector<double> ms;
    for (int e = 0; e <= 6; ++e) ms.push_back(std::pow(10.0, e));
    const auto s = immune::scaling_exponents({1.0, 1.0}, ms);
    v.require(std::abs(s.total.slope - 1.0 / 7.0) <= 1e-6, "slope_T");
    v.require(std::abs(s.volume.slope + s.count.slope - 1.0) <= 1e-9, "slope_V + slope_N");
    v.require(std::abs(s.volume.slope - 3.0 / 7.0) <= 1e-6, "slope_V vs derived 3/7");
    v.info("slope_T " + format_double(s.total.slope) + ", slope_V " + format_double(s.volume.slope) + ", slope_N " +
           format_double(s.count.slope));
    return v;
}

Verdict criterion3() {
    Verdict v;
    const auto r = experiments::run_experiment("immune-des", {}, g_scratch / "a");
    const double det = measured(r, "detect_slope_vs_V");
    const double rec = measured(r, "recruit_slope_vs_V");
    const double tot = measured(r, "total_slope_vs_M");
    const double mean = measured(r, "mean_detection_over_three_quarter_R");
    v.require(std::abs(det - 1.0 / 3.0) <= 0.05, "detection slope vs V");
    v.require(std::abs(rec + 2.0) <= 0.1, "recruitment slope vs V");
    v.require(std::abs(tot - 1.0 / 7.0) <= 0.05, "total slope vs M");
    v.require(std::abs(mean - 1.0) <= 0.01, "mean detection / (3/4 R/speed)");
    v.info("detect " + fmt(det) + ", recruit " + fmt(rec) + ", total " + fmt(tot) + ", mean ratio " + fmt(mean));
    return v;
}

Verdict criterion4() {
    Verdict v;
    v.require(ants::transition_probs(std::vector<double>{1, 1}, 1.0) == std::vector<double>{0.5, 0.5},
              "[1,1] alpha 1");
    v.require(ants::transition_probs(std::vector<double>{2, 1, 1}, 2.0) ==
                  std::vector<double>{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
              "[2,1,1] alpha 2");
    v.require(ants::transition_probs(std::vector<double>{5, 3, 9}, 0.0) ==
                  std::vector<double>{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
              "[5,3,9] alpha 0");

    Rng rng(4);
    double worst_sum = 0.0, worst_oracle = 0.0;
    for (int t = 0; t < 100000; ++t) {
        std::vector<double> tau(1 + rng.below(8));
        for (auto& x : tau) x = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.0, 10.0);
        if (std::all_of(tau.begin(), tau.end(), [](double x) { return x == 0.0; })) tau[0] = 1.0;
        const double alpha = rng.uniform(0.0, 6.0);
        const auto p = ants::transition_probs(tau, alpha);
        double s = 0.0;
        for (double x : p) {
            s += x;
            if (!(x >= 0.0 && x <= 1.0)) v.require(false, "probability outside [0,1]");
        }
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        const auto o = eq3(tau, alpha);
        for (std::size_t i = 0; i < p.size(); ++i) worst_oracle = std::max(worst_oracle, std::abs(p[i] - o[i]));
    }
    v.require(worst_sum <= 1e-12, "normalization " + fmt(worst_sum));
    v.require(worst_oracle <= 1e-12, "agreement with direct evaluation " + fmt(worst_oracle));

    int monotone_failures = 0;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> tau(2 + rng.below(4));
        for (auto& x : tau) x = rng.uniform(0.01, 10.0);
        const double alpha = rng.uniform(0.05, 6.0);
        const std::size_t j = rng.below(tau.size());
        const auto before = ants::transition_probs(tau, alpha);
        tau[j] += rng.uniform(0.01, 5.0);
        const auto after = ants::transition_probs(tau, alpha);
        monotone_failures += !(after[j] > before[j]);
    }
    v.require(monotone_failures == 0, std::to_string(monotone_failures) + " monotonicity violations");
    v.info("max |sum-1| " + fmt(worst_sum) + ", monotonicity violations " + std::to_string(monotone_failures));
    return v;
}

Verdict criterion5() {
    Verdict v;
    const auto& spec = experiments::find_experiment("ant-symmetry");
    v.require(spec.parameters.at("alpha").get<double>() == 2.0, "alpha is 2");
    v.require(spec.parameters.at("runs").get<int>() == 200, "200 runs");
    v.require(spec.parameters.at("concentration").get<double>() == 0.8, "80% concentration bar");
    const auto r = experiments::run_experiment("ant-symmetry", {}, g_scratch / "a");
    const double frac = measured(r, "fraction_runs_concentrated");
    v.require(frac >= 0.7, "fraction of concentrated runs " + fmt(frac));
    v.info("runs with >= 80% trips on one pile: " + fmt(frac));
    return v;
}

Verdict criterion6() {
    Verdict v;
    const auto& p = experiments::find_experiment("ant-percapita").parameters;
    v.require(p.at("sizes") == experiments::Params({8, 32, 128, 512}), "sizes 8..512");
    v.require(p.at("replicates").get<int>() == 20, "20 replicates");
    v.require(p.at("alpha").get<double>() > 0.0, "recruitment on");
    const auto r = experiments::run_experiment("ant-percapita", {}, g_scratch / "a");
    const double slope = measured(r, "recruitment_slope");
    v.require(std::abs(slope) <= 0.15, "slope " + fmt(slope));
    v.info("slope " + fmt(slope) + ", dispersed alpha=0 baseline " + fmt(measured(r, "baseline_slope")));
    return v;
}

Verdict criterion7() {
    Verdict v;
    const auto r = experiments::run_experiment("smallworld-densify", {}, g_scratch / "a");
    const double d_log = measured(r, "densified_r2_vs_log");
    const double d_gap = measured(r, "densified_r2_log_minus_log_squared");
    const double c_sq = measured(r, "constant_r2_vs_log_squared");
    const double c_gap = measured(r, "constant_r2_log_squared_minus_log");
    const double paired = measured(r, "paired_mean_hops_constant_minus_densified");
    v.require(d_gap > 0.0, "densified: ln n fit not better than (ln n)^2");
    v.require(c_gap > 0.0, "constant: (ln n)^2 fit not better than ln n");
    v.require(paired > 0.0, "paired hops at 2^14 not lower under densification");
    v.info("densified r2(ln n) " + fmt(d_log) + " gap " + fmt(d_gap) + "; constant r2((ln n)^2) " + fmt(c_sq) +
           " gap " + fmt(c_gap) + "; paired difference " + fmt(paired));
    return v;
}

Verdict criterion8() {
    Verdict v;
    const auto r = experiments::run_experiment("growth-asymptote", {}, g_scratch / "a");
    const double rk4 = measured(r, "rk4_vs_analytic_max_rel_error");
    const double final_mass = measured(r, "final_mass");
    const double blowup = measured(r, "blowup_refinement_rel_change");
    v.require(rk4 <= 1e-6, "RK4 vs closed form " + fmt(rk4));
    v.require(std::abs(final_mass - 16.0) <= 1e-3 * 16.0, "asymptote " + fmt(final_mass));
    v.require(blowup <= 0.01, "blow-up refinement " + fmt(blowup));
    v.info("rk4 error " + fmt(rk4) + ", final mass " + format_double(final_mass) + ", blow-up change " + fmt(blowup));
    return v;
}

Verdict criterion9() {
    Verdict v;
    // Rerun every registered experiment with the same seed into a second tree.
    for (const auto& e : experiments::list_experiments()) {
        if (!fs::exists(g_scratch / "a" / e.name)) {
            experiments::run_experiment(e.name, {}, g_scratch / "a");
        }
        experiments::run_experiment(e.name, {}, g_scratch / "b");
        const auto first = csv_files(g_scratch / "a" / e.name);
        const auto second = csv_files(g_scratch / "b" / e.name);
        v.require(!first.empty() && first == second, e.name + " CSVs differ between reruns");
    }

    const fs::path out = g_scratch / "cli";
    fs::create_directories(out);
    std::ofstream(out / "one.csv") << "x,y\n1,2\n";
    std::ofstream(out / "three.csv") << "x,y\n1,1\n2,4\n3,9\n";
    const std::string o = out.string();
    struct Row {
        std::vector<std::string> args;
        int code;
    };
    const std::vector<Row> matrix{
        {{"list"}, 0},
        {{"bogus"}, 2},
        {{"list", "--nope"}, 2},
        {{"run", "growth-asymptote", "--out", o}, 0},
        {{"run", "growth-asymptote", "--out", o, "--set", "horizon_time_scales=0.5"}, 1},
        {{"run", "nonexistent", "--out", o}, 2},
        {{"run", "immune-exponents", "--out", o, "--set", "M_max=bogus"}, 2},
        {{"run", "immune-exponents", "--out", (out / "one.csv" / "x").string()}, 3},
        {{"immune", "optimize", "--out", o}, 0},
        {{"immune", "optimize", "--out", o, "--set", "M=0"}, 2},
        {{"immune", "des", "--out", o, "--set", "replicates=5"}, 0},
        {{"immune", "des", "--out", o, "--set", "kappa=bogus"}, 2},
        {{"ants", "run", "--out", o, "--set", "max_ticks=100"}, 0},
        {{"ants", "run", "--out", o, "--set", "world_side=1"}, 2},
        {{"smallworld", "run", "--out", o, "--set", "sizes=100,400,900", "--set", "trials=200"}, 0},
        {{"smallworld", "run", "--out", o, "--set", "sizes=100,100,100", "--set", "trials=200"}, 3},
        {{"growth", "run", "--out", o}, 0},
        {{"growth", "run", "--out", o, "--set", "model=none"}, 2},
        {{"fit", (out / "three.csv").string()}, 0},
        {{"fit", (out / "one.csv").string()}, 3},
        {{"fit", (out / "missing.csv").string()}, 3},
    };
    int mismatches = 0;
    for (const auto& row : matrix) {
        std::ostringstream sink, err;
        const int code = cli::run(row.args, sink, err);
        if (code != row.code) {
            ++mismatches;
            std::string joined;
            for (const auto& a : row.args) joined += a + ' ';
            v.require(false, "'" + joined + "' exited " + std::to_string(code) + ", expected " +
                                 std::to_string(row.code));
        }
    }
    v.info(std::to_string(matrix.size() - mismatches) + "/" + std::to_string(matrix.size()) +
           " exit codes as expected; CSV reruns compared for " + std::to_string(experiments::list_experiments().size()) +
           " experiments");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    g_scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "radar-acceptance";
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "immune optimizer exactness", 1.0, criterion1},
        {2, "optimal-architecture scaling exponents", 1.0, criterion2},
        {3, "discrete-event simulation vs closed forms", 60.0, criterion3},
        {4, "pheromone transition rule suite", 10.0, criterion4},
        {5, "ant symmetry breaking", 120.0, criterion5},
        {6, "ant per-capita invariance", 600.0, criterion6},
        {7, "small-world densification", 600.0, criterion7},
        {8, "growth integration and blow-up", 5.0, criterion8},
        {9, "reproducibility and exit codes", 600.0, criterion9},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        v.require(secs <= c.budget_s, "runtime over budget");
        failures += !v.pass;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2f s / %.0f s", secs, c.budget_s);
        std::cout << "criterion " << c.id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << timing
                  << "]  " << v.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
