#include "radar/immune.hpp"

#include "radar/error.hpp"
#include "radar/format.hpp"
#include "radar/rng.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <queue>
#include <string>

namespace radar::immune {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite, got " + format_short(v));
    }
}

void validate(const ArchitectureConstants& c) {
    require_positive(c.detect_coeff, "detection coefficient A");
    require_positive(c.comm_coeff, "communication coefficient B");
}

// f(u) = A e^(u/3) + B M e^(-2u) with u = ln V. Returns f(u1) - f(u2) without
// subtracting two nearly equal totals: each term's difference goes through
// expm1, so comparisons stay meaningful right down to the minimum.
class LogVolumeObjective {
public:
    LogVolumeObjective(const ArchitectureConstants& c, double system_size)
        : a_(c.detect_coeff), bm_(c.comm_coeff * system_size) {}

    double difference(double u1, double u2) const {
        const double du = u1 - u2;
        return a_ * std::exp(u2 / 3.0) * std::expm1(du / 3.0) + bm_ * std::exp(-2.0 * u2) * std::expm1(-2.0 * du);
    }

private:
    double a_;
    double bm_;
};

constexpr double kGolden = 0.6180339887498948482;  // (sqrt 5 - 1) / 2
constexpr double kLogTolerance = 1e-12;
constexpr int kMaxIterations = 400;

double golden_section_log_volume(const LogVolumeObjective& f) {
    // Downhill bracket expansion from u in {0, 1}.
    double a = 0.0;
    double b = 1.0;
    if (f.difference(b, a) > 0.0) {
        std::swap(a, b);
    }
    double c = b + (1.0 + kGolden) * (b - a);
    int guard = 0;
    while (f.difference(c, b) < 0.0) {
        a = b;
        b = c;
        c = b + (1.0 + kGolden) * (b - a);
        if (++guard > kMaxIterations || !std::isfinite(c)) {
            throw NumericalError("could not bracket the optimal module volume");
        }
    }

    double lo = std::min(a, c);
    double hi = std::max(a, c);
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    for (int i = 0; i < kMaxIterations && hi - lo > kLogTolerance; ++i) {
        if (f.difference(x1, x2) < 0.0) {
            hi = x2;
            x2 = x1;
            x1 = hi - kGolden * (hi - lo);
        } else {
            lo = x1;
            x1 = x2;
            x2 = lo + kGolden * (hi - lo);
        }
    }
    return 0.5 * (lo + hi);
}

enum class EventKind { CarrierArrives, ContactComplete };

struct Event {
    double time;
    std::uint64_t sequence;
    EventKind kind;
};

struct LaterFirst {
    bool operator()(const Event& x, const Event& y) const {
        return x.time != y.time ? x.time > y.time : x.sequence > y.sequence;
    }
};

class EventQueue {
public:
    void schedule(double time, EventKind kind) { heap_.push({time, next_sequence_++, kind}); }
    bool empty() const { return heap_.empty(); }
    Event pop() {
        Event e = heap_.top();
        heap_.pop();
        return e;
    }

private:
    std::priority_queue<Event, std::vector<Event>, LaterFirst> heap_;
    std::uint64_t next_sequence_ = 0;
};

void validate(const ImmuneSimConfig& c) {
    require_positive(c.system_size, "system size M");
    require_positive(c.module_volume, "module volume V");
    require_positive(c.crawl_speed, "crawl speed");
    require_positive(c.cell_density, "cell density rho");
    require_positive(c.demand, "demand kappa");
    require_positive(c.contact_rate, "contact rate eta");
    require_positive(c.inoculum, "inoculum");
    require_positive(c.doubling_rate, "doubling rate");
    require_positive(c.tissue_constant, "tissue constant");
    if (c.demand * c.system_size < 1.0) {
        throw ConfigError("total responder demand kappa*M must be at least 1, got " +
                          format_short(c.demand * c.system_size));
    }
}

template <class Fn>
scaling::RegressionResult fit_means(const std::vector<double>& xs, const std::vector<DesRow>& rows,
                                    std::size_t replicates, Fn&& pick) {
    std::vector<scaling::Point> points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double sum = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) {
            sum += pick(rows[i * replicates + r].outcome);
        }
        points.push_back({xs[i], sum / static_cast<double>(replicates)});
    }
    return scaling::loglog_fit(points);
}

DesScaling fit_rows(const std::vector<double>& xs, std::vector<DesRow> rows, std::size_t replicates) {
    DesScaling out;
    out.detection = fit_means(xs, rows, replicates, [](const SimOutcome& o) { return o.detection_time; });
    out.recruitment = fit_means(xs, rows, replicates, [](const SimOutcome& o) { return o.recruitment_time; });
    out.total = fit_means(xs, rows, replicates, [](const SimOutcome& o) { return o.total_time; });
    out.rows = std::move(rows);
    return out;
}

void require_replicates(std::size_t replicates) {
    if (replicates < 30) {
        throw ConfigError("DES scaling needs at least 30 replicates, got " + std::to_string(replicates));
    }
}

}  // namespace

double detection_time(const ArchitectureConstants& consts, double volume) {
    validate(consts);
    require_positive(volume, "module volume V");
    return consts.detect_coeff * std::cbrt(volume);
}

double comm_lymphnodes(double kappa, double system_size, double volume, double density) {
    require_positive(kappa, "demand kappa");
    require_positive(system_size, "system size M");
    require_positive(volume, "module volume V");
    require_positive(density, "cell density rho");
    return kappa * system_size / (density * volume);
}

double communication_time(const ArchitectureConstants& consts, double system_size, double volume) {
    validate(consts);
    require_positive(system_size, "system size M");
    require_positive(volume, "module volume V");
    return consts.comm_coeff * system_size / (volume * volume);
}

TimeBreakdown total_time(const ArchitectureConstants& consts, double system_size, double volume) {
    TimeBreakdown t;
    t.t_detect = detection_time(consts, volume);
    t.t_comm = communication_time(consts, system_size, volume);
    t.t_total = t.t_detect + t.t_comm;
    return t;
}

OptimalArchitecture optimize_architecture(const ArchitectureConstants& consts, double system_size,
                                          double tissue_constant) {
    validate(consts);
    require_positive(system_size, "system size M");
    require_positive(tissue_constant, "tissue constant");

    const LogVolumeObjective objective(consts, system_size);
    const double volume = std::exp(golden_section_log_volume(objective));

    // d/dV [A V^(1/3) + B M V^(-2)] = 0  =>  V^(7/3) = 6 B M / A.
    const double stationary =
        std::pow(6.0 * consts.comm_coeff * system_size / consts.detect_coeff, 3.0 / 7.0);
    if (std::abs(volume - stationary) > 1e-8 * stationary) {
        throw NumericalError("golden-section optimum " + format_double(volume) +
                             " disagrees with the stationarity root " + format_double(stationary));
    }

    OptimalArchitecture out;
    out.architecture = {system_size, volume, tissue_constant * system_size / volume};
    out.times = total_time(consts, system_size, volume);
    out.stationary_volume = stationary;
    return out;
}

ScalingExponents scaling_exponents(const ArchitectureConstants& consts, std::span<const double> system_sizes,
                                   double tissue_constant) {
    if (system_sizes.size() < 3) {
        throw InsufficientDataError("scaling exponents need at least 3 system sizes");
    }
    ScalingExponents out;
    std::vector<scaling::Point> v_pts;
    std::vector<scaling::Point> n_pts;
    std::vector<scaling::Point> t_pts;
    for (double m : system_sizes) {
        auto opt = optimize_architecture(consts, m, tissue_constant);
        v_pts.push_back({m, opt.architecture.module_volume});
        n_pts.push_back({m, opt.architecture.module_count});
        t_pts.push_back({m, opt.times.t_total});
        out.optima.push_back(opt);
    }
    out.volume = scaling::loglog_fit(v_pts);
    out.count = scaling::loglog_fit(n_pts);
    out.total = scaling::loglog_fit(t_pts);
    return out;
}

double sphere_radius(double volume) {
    require_positive(volume, "volume");
    return std::cbrt(3.0 * volume / (4.0 * std::numbers::pi));
}

ArchitectureConstants constants_for(const ImmuneSimConfig& config) {
    validate(config);
    ArchitectureConstants c;
    c.detect_coeff = 0.75 * std::cbrt(3.0 / (4.0 * std::numbers::pi)) / config.crawl_speed;
    c.comm_coeff = config.demand / (config.cell_density * config.contact_rate);
    return c;
}

SimOutcome simulate_response(const ImmuneSimConfig& config, double carrier_distance) {
    validate(config);
    if (!(carrier_distance >= 0.0)) {
        throw DomainError("carrier distance must be non-negative");
    }

    const double required = config.demand * config.system_size;
    const double per_module = config.cell_density * config.module_volume;
    const double contact_time = 1.0 / (config.contact_rate * config.module_volume);

    SimOutcome out;
    out.carrier_distance = carrier_distance;
    EventQueue queue;
    queue.schedule(carrier_distance / config.crawl_speed, EventKind::CarrierArrives);
    while (!queue.empty()) {
        const Event e = queue.pop();
        switch (e.kind) {
            case EventKind::CarrierArrives:
                out.detection_time = e.time;
                out.responders_activated = per_module;
                break;
            case EventKind::ContactComplete:
                ++out.remote_modules_contacted;
                out.responders_activated =
                    static_cast<double>(out.remote_modules_contacted + 1) * per_module;
                break;
        }
        if (out.responders_activated < required) {
            queue.schedule(e.time + contact_time, EventKind::ContactComplete);
        } else {
            out.total_time = e.time;
        }
    }
    out.recruitment_time = out.total_time - out.detection_time;
    return out;
}

SimOutcome des_run(const ImmuneSimConfig& config) {
    validate(config);
    Rng rng(config.rng_seed);
    // Radial CDF of a uniform ball is (r/R)^3.
    const double distance = sphere_radius(config.module_volume) * std::cbrt(rng.uniform01());
    return simulate_response(config, distance);
}

DesScaling des_scaling(const ArchitectureConstants& consts, const ImmuneSimConfig& config_template,
                       std::span<const double> system_sizes, std::size_t replicates) {
    require_replicates(replicates);
    std::vector<double> xs(system_sizes.begin(), system_sizes.end());
    std::vector<DesRow> rows;
    rows.reserve(xs.size() * replicates);
    for (double m : xs) {
        const auto opt = optimize_architecture(consts, m, config_template.tissue_constant);
        ImmuneSimConfig config = config_template;
        config.system_size = m;
        config.module_volume = opt.architecture.module_volume;
        for (std::size_t r = 0; r < replicates; ++r) {
            config.rng_seed = config_template.rng_seed + r;
            rows.push_back({m, config.module_volume, opt.architecture.module_count, config.rng_seed, des_run(config)});
        }
    }
    return fit_rows(xs, std::move(rows), replicates);
}

DesScaling des_volume_sweep(const ImmuneSimConfig& config_template, std::span<const double> volumes,
                            std::size_t replicates) {
    require_replicates(replicates);
    std::vector<double> xs(volumes.begin(), volumes.end());
    std::vector<DesRow> rows;
    rows.reserve(xs.size() * replicates);
    for (double v : xs) {
        ImmuneSimConfig config = config_template;
        config.module_volume = v;
        const double count = config.tissue_constant * config.system_size / v;
        for (std::size_t r = 0; r < replicates; ++r) {
            config.rng_seed = config_template.rng_seed + r;
            rows.push_back({config.system_size, v, count, config.rng_seed, des_run(config)});
        }
    }
    return fit_rows(xs, std::move(rows), replicates);
}

void write_runs_csv(std::ostream& out, std::span<const DesRow> rows) {
    out << "M,V,N,t_detect,t_comm,t_total,seed\n";
    for (const auto& r : rows) {
        out << format_double(r.system_size) << ',' << format_double(r.module_volume) << ','
            << format_double(r.module_count) << ',' << format_double(r.outcome.detection_time) << ','
            << format_double(r.outcome.recruitment_time) << ',' << format_double(r.outcome.total_time) << ','
            << r.seed << '\n';
    }
}

}  // namespace radar::immune
