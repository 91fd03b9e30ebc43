#include "radar/error.hpp"
#include "radar/immune.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <vector>

using namespace radar;
using namespace radar::immune;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Setting d/dV (A V^(1/3) + B M V^-2) = A/3 V^(-2/3) - 2 B M V^-3 to zero
// and multiplying through by V^3 gives V^(7/3) = 6 B M / A.
double root_by_hand(double a, double b, double m) { return std::pow(6.0 * b * m / a, 3.0 / 7.0); }

double derivative(double a, double b, double m, double v) {
    return a / 3.0 * std::pow(v, -2.0 / 3.0) - 2.0 * b * m * std::pow(v, -3.0);
}

ImmuneSimConfig arithmetic_config() {
    // kappa M = 100, rho V = 10, eta V = 2.
    ImmuneSimConfig c;
    c.system_size = 100.0;
    c.demand = 1.0;
    c.module_volume = 10.0;
    c.cell_density = 1.0;
    c.contact_rate = 0.2;
    return c;
}

}  // namespace

TEST_SUITE("immune") {

TEST_CASE("detection_time examples") {
    CHECK(detection_time({1.0, 1.0}, 8.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(detection_time({1.0, 1.0}, 1.0) == 1.0);
    CHECK(detection_time({2.5, 1.0}, 1000.0) == doctest::Approx(25.0).epsilon(1e-15));
    CHECK_THROWS_AS(detection_time({1.0, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(detection_time({0.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("comm_lymphnodes examples") {
    CHECK(comm_lymphnodes(1.0, 100.0, 10.0, 1.0) == 10.0);
    CHECK(comm_lymphnodes(2.0, 5.0, 2.5, 4.0) == 1.0);
    CHECK(comm_lymphnodes(1.0, 200.0, 10.0, 1.0) == 2.0 * comm_lymphnodes(1.0, 100.0, 10.0, 1.0));
    CHECK_THROWS_AS(comm_lymphnodes(1.0, 100.0, -1.0, 1.0), DomainError);
}

TEST_CASE("communication_time examples") {
    CHECK(communication_time({1.0, 1.0}, 100.0, 5.0) == 4.0);
    CHECK(communication_time({1.0, 1.0}, 1.0, 1.0) == 1.0);
    CHECK(communication_time({1.0, 3.0}, 7.0, 6.0) == doctest::Approx(communication_time({1.0, 3.0}, 7.0, 3.0) / 4));
    CHECK_THROWS_AS(communication_time({1.0, 1.0}, 0.0, 1.0), DomainError);
}

TEST_CASE("total_time composition and limits") {
    const auto t = total_time({1.0, 1.0}, 100.0, 5.0);
    CHECK(t.t_detect == doctest::Approx(1.7099759466766968).epsilon(1e-15));
    CHECK(t.t_comm == 4.0);
    CHECK(t.t_total == t.t_detect + t.t_comm);
    CHECK(total_time({1.0, 1.0}, 100.0, 1e-6).t_total > 1e13);
    CHECK(total_time({1.0, 1.0}, 100.0, 1e30).t_total > 1e9);
}

TEST_CASE("optimize_architecture at A = B = M = 1") {
    const auto opt = optimize_architecture({1.0, 1.0}, 1.0);
    const double v = root_by_hand(1.0, 1.0, 1.0);
    CHECK(rel(opt.architecture.module_volume, v) <= 1e-9);
    CHECK(rel(opt.stationary_volume, v) <= 1e-15);
    CHECK(opt.architecture.module_count == 1.0 / opt.architecture.module_volume);
    CHECK(rel(opt.architecture.module_count, 1.0 / v) <= 1e-9);
    CHECK(opt.times.t_total == opt.times.t_detect + opt.times.t_comm);
}

TEST_CASE("optimize_architecture over random triples hits the stationary root") {
    std::uint64_t s = 99;
    const auto next = [&] {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < 200; ++i) {
        const double a = std::exp(8.0 * next() - 4.0);
        const double b = std::exp(8.0 * next() - 4.0);
        const double m = std::exp(20.0 * next() - 5.0);
        const auto opt = optimize_architecture({a, b}, m);
        const double v = root_by_hand(a, b, m);
        CHECK(rel(opt.architecture.module_volume, v) <= 1e-9);
        // The derivative at the optimum is tiny next to either of its terms.
        CHECK(std::abs(derivative(a, b, m, opt.architecture.module_volume)) <=
              1e-8 * a / 3.0 * std::pow(v, -2.0 / 3.0));
    }
}

TEST_CASE("optimize_architecture errors") {
    CHECK_THROWS_AS(optimize_architecture({0.0, 1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(optimize_architecture({1.0, -1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(optimize_architecture({1.0, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(optimize_architecture({1.0, 1.0}, 1.0, 0.0), DomainError);
}

TEST_CASE("property: the objective is unimodal on a log grid") {
    for (const double m : {1e-3, 1.0, 1e3, 1e6}) {
        const ArchitectureConstants c{0.7, 2.0};
        int sign_changes = 0;
        double prev = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double u = -20.0 + 40.0 * i / 4000.0;
            const double h = 1e-4;
            const double d = total_time(c, m, std::exp(u + h)).t_total - total_time(c, m, std::exp(u - h)).t_total;
            if (i > 0 && (d > 0) != (prev > 0)) {
                ++sign_changes;
            }
            prev = d;
        }
        CHECK(sign_changes == 1);
    }
}

TEST_CASE("property: balanced terms and tissue conservation across M") {
    const ArchitectureConstants c{1.3, 0.4};
    for (const double m : {1.0, 10.0, 1e3, 1e6, 1e9}) {
        const auto opt = optimize_architecture(c, m, 2.5);
        // A V^(1/3) / (B M V^-2) = A V^(7/3) / (B M) = 6 at the root.
        CHECK(opt.times.t_detect / opt.times.t_comm == doctest::Approx(6.0).epsilon(1e-8));
        CHECK(opt.architecture.module_count * opt.architecture.module_volume / m == doctest::Approx(2.5).epsilon(1e-14));
    }
}

TEST_CASE("property: common scaling of A and B keeps the argmin") {
    for (const double k : {1e-3, 0.5, 7.3, 1e4}) {
        const auto base = optimize_architecture({1.2, 0.8}, 500.0);
        const auto scaled = optimize_architecture({1.2 * k, 0.8 * k}, 500.0);
        CHECK(rel(scaled.architecture.module_volume, base.architecture.module_volume) <= 1e-9);
        CHECK(rel(scaled.times.t_total, k * base.times.t_total) <= 1e-9);
    }
}

TEST_CASE("scaling_exponents") {
    std::vector<double> ms;
    for (int e = 0; e <= 6; ++e) {
        ms.push_back(std::pow(10.0, e));
    }
    const auto s = scaling_exponents({1.0, 1.0}, ms);
    CHECK(std::abs(s.total.slope - 1.0 / 7.0) <= 1e-6);
    CHECK(std::abs(s.volume.slope - 3.0 / 7.0) <= 1e-6);
    CHECK(std::abs(s.count.slope - 4.0 / 7.0) <= 1e-6);
    CHECK(std::abs(s.volume.slope + s.count.slope - 1.0) <= 1e-9);
    CHECK(s.optima.size() == ms.size());

    const std::vector<double> two{1.0, 10.0};
    CHECK_THROWS_AS(scaling_exponents({1.0, 1.0}, two), InsufficientDataError);
    const std::vector<double> same{5.0, 5.0, 5.0};
    CHECK_THROWS_AS(scaling_exponents({1.0, 1.0}, same), DegenerateFitError);
}

TEST_CASE("sphere radius and constants_for") {
    CHECK(sphere_radius(4.0 / 3.0 * std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-15));
    ImmuneSimConfig c;
    c.crawl_speed = 2.0;
    c.demand = 3.0;
    c.cell_density = 0.5;
    c.contact_rate = 4.0;
    const auto k = constants_for(c);
    CHECK(k.detect_coeff == doctest::Approx(0.75 * std::cbrt(3.0 / (4.0 * std::numbers::pi)) / 2.0).epsilon(1e-15));
    CHECK(k.comm_coeff == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("simulate_response examples") {
    const auto c = arithmetic_config();
    const auto at_centre = simulate_response(c, 0.0);
    CHECK(at_centre.detection_time == 0.0);
    CHECK(at_centre.remote_modules_contacted == 9);
    CHECK(at_centre.recruitment_time == 4.5);
    CHECK(at_centre.responders_activated >= 100.0);

    const auto away = simulate_response(c, 3.0);
    CHECK(away.detection_time == 3.0);
    CHECK(away.total_time == 7.5);

    auto single = c;
    single.module_volume = 100.0;  // rho V = kappa M
    const auto one = simulate_response(single, 1.0);
    CHECK(one.remote_modules_contacted == 0);
    CHECK(one.recruitment_time == 0.0);

    CHECK_THROWS_AS(simulate_response(c, -1.0), DomainError);
}

TEST_CASE("des_run validation") {
    auto c = arithmetic_config();
    c.system_size = 0.5;  // kappa M < 1
    CHECK_THROWS_AS(des_run(c), ConfigError);
    c = arithmetic_config();
    c.crawl_speed = 0.0;
    CHECK_THROWS_AS(des_run(c), DomainError);
}

TEST_CASE("des_run: invariants and determinism") {
    auto c = arithmetic_config();
    const double r = sphere_radius(c.module_volume);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        c.rng_seed = seed;
        const auto o = des_run(c);
        CHECK(o.carrier_distance >= 0.0);
        CHECK(o.carrier_distance <= r);
        CHECK(o.total_time == o.detection_time + o.recruitment_time);
        CHECK(o.responders_activated >= c.demand * c.system_size);
        const auto again = des_run(c);
        CHECK(std::memcmp(&o, &again, sizeof o) == 0);
    }
    c.rng_seed = 1;
    const double d1 = des_run(c).carrier_distance;
    c.rng_seed = 2;
    CHECK(des_run(c).carrier_distance != d1);
}

TEST_CASE("des_run: mean distance is three quarters of the radius") {
    ImmuneSimConfig c;
    c.system_size = 1e4;
    c.module_volume = 1000.0;
    c.crawl_speed = 2.0;
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        c.rng_seed = static_cast<std::uint64_t>(i) + 1;
        sum += des_run(c).detection_time;
    }
    const double radius = std::cbrt(3.0 * 1000.0 / (4.0 * std::numbers::pi));
    CHECK(rel(sum / draws, 0.75 * radius / 2.0) <= 0.01);
}

TEST_CASE("property: recruitment converges to B M / V^2 as demand grows") {
    ImmuneSimConfig c;
    c.module_volume = 4.0;
    c.cell_density = 0.5;
    c.contact_rate = 3.0;
    c.demand = 2.0;
    const double b = c.demand / (c.cell_density * c.contact_rate);
    double previous = INFINITY;
    for (const double m : {10.0, 1e3, 1e5, 1e7}) {
        c.system_size = m;
        const double closed = b * m / (c.module_volume * c.module_volume);
        const double err = rel(simulate_response(c, 0.0).recruitment_time, closed);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 1e-5);
}

TEST_CASE("des sweeps") {
    ImmuneSimConfig c;
    c.system_size = 1e6;
    const std::vector<double> vols{1, 2, 4, 8, 16, 32, 64};
    const auto sweep = des_volume_sweep(c, vols, 30);
    CHECK(std::abs(sweep.detection.slope - 1.0 / 3.0) <= 0.05);
    CHECK(std::abs(sweep.recruitment.slope + 2.0) <= 0.1);
    CHECK(sweep.rows.size() == vols.size() * 30);
    CHECK(sweep.rows[31].seed == c.rng_seed + 1);

    const std::vector<double> ms{1e3, 1e4, 1e5, 1e6};
    const auto s = des_scaling(constants_for(c), c, ms, 30);
    CHECK(std::abs(s.total.slope - 1.0 / 7.0) <= 0.05);
    CHECK_THROWS_AS(des_scaling(constants_for(c), c, ms, 29), ConfigError);
    CHECK_THROWS_AS(des_volume_sweep(c, vols, 10), ConfigError);
}

TEST_CASE("runs csv") {
    std::ostringstream out;
    const std::vector<DesRow> rows{{100.0, 10.0, 10.0, 7, simulate_response(arithmetic_config(), 0.0)}};
    write_runs_csv(out, rows);
    CHECK(out.str() == "M,V,N,t_detect,t_comm,t_total,seed\n100,10,10,0,4.5,4.5,7\n");
}

}  // TEST_SUITE
