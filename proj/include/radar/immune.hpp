#pragma once

// Semi-modular search and response: lymph-node-like modules each search a
// local draining region, then recruit responders from other modules.
//
// Closed forms:
//   t_detect = A V^(1/3)           (crawl across the draining region)
//   t_comm   = B M / V^2           (serial recruitment through HEV-limited ports)
// and a two-phase discrete-event simulation whose mean behaviour reproduces them.

#include "radar/scaling.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace radar::immune {

struct ArchitectureConstants {
    double detect_coeff = 1.0;  ///< A
    double comm_coeff = 1.0;    ///< B
};

struct TimeBreakdown {
    double t_detect = 0.0;
    double t_comm = 0.0;
    double t_total = 0.0;
};

struct Architecture {
    double system_size = 0.0;    ///< M
    double module_volume = 0.0;  ///< V_LN
    double module_count = 0.0;   ///< N
};

struct OptimalArchitecture {
    Architecture architecture;
    TimeBreakdown times;
    /// Root of the stationarity condition, solved independently of the search.
    double stationary_volume = 0.0;
};

double detection_time(const ArchitectureConstants& consts, double volume);

/// kappa M / (rho V): modules whose resident responders must be pooled.
double comm_lymphnodes(double kappa, double system_size, double volume, double density);

double communication_time(const ArchitectureConstants& consts, double system_size, double volume);

TimeBreakdown total_time(const ArchitectureConstants& consts, double system_size, double volume);

/// Minimizes t_total over V > 0 by golden-section search on ln V and checks
/// the result against the stationarity root (A/3) V^(-2/3) = 2 B M V^(-3).
/// N = tissue_constant * M / V.
OptimalArchitecture optimize_architecture(const ArchitectureConstants& consts, double system_size,
                                          double tissue_constant = 1.0);

struct ScalingExponents {
    scaling::RegressionResult volume;  ///< ln V* vs ln M
    scaling::RegressionResult count;   ///< ln N* vs ln M
    scaling::RegressionResult total;   ///< ln t_total(V*) vs ln M
    std::vector<OptimalArchitecture> optima;
};

ScalingExponents scaling_exponents(const ArchitectureConstants& consts, std::span<const double> system_sizes,
                                   double tissue_constant = 1.0);

struct ImmuneSimConfig {
    double system_size = 1.0;     ///< M
    double module_volume = 1.0;   ///< V
    double crawl_speed = 1.0;     ///< antigen-carrier speed
    double cell_density = 1.0;    ///< rho, resident responders per unit volume
    double demand = 1.0;          ///< kappa, responders required per unit M
    double contact_rate = 1.0;    ///< eta, per-unit-volume recruitment rate
    double inoculum = 1e5;        ///< reported only
    double doubling_rate = 2.0;   ///< divisions per day, reported only
    double tissue_constant = 1.0;
    std::uint64_t rng_seed = 1;
};

struct SimOutcome {
    double detection_time = 0.0;
    double recruitment_time = 0.0;
    double total_time = 0.0;
    std::uint64_t remote_modules_contacted = 0;
    double responders_activated = 0.0;
    double carrier_distance = 0.0;
};

/// Radius of the sphere of volume V.
double sphere_radius(double volume);

/// Closed-form constants implied by a simulation config:
///   A = (3/4) (3 / (4 pi))^(1/3) / crawl_speed   (mean distance to centre of a ball)
///   B = kappa / (rho eta)
ArchitectureConstants constants_for(const ImmuneSimConfig& config);

/// Runs detection then recruitment with the antigen carrier at a fixed
/// distance from the module centre.
SimOutcome simulate_response(const ImmuneSimConfig& config, double carrier_distance);

/// Samples a carrier position uniformly in the draining sphere, then runs
/// simulate_response. Deterministic for a given rng_seed.
SimOutcome des_run(const ImmuneSimConfig& config);

struct DesRow {
    double system_size = 0.0;
    double module_volume = 0.0;
    double module_count = 0.0;
    std::uint64_t seed = 0;
    SimOutcome outcome;
};

struct DesScaling {
    scaling::RegressionResult detection;
    scaling::RegressionResult recruitment;
    scaling::RegressionResult total;
    std::vector<DesRow> rows;
};

/// For each M, sets V from optimize_architecture(consts, M), runs `replicates`
/// simulations with seeds config.rng_seed + replicate index, and fits slopes
/// of the mean times against M.
DesScaling des_scaling(const ArchitectureConstants& consts, const ImmuneSimConfig& config_template,
                       std::span<const double> system_sizes, std::size_t replicates);

/// Same, but M is held at the template value and V sweeps the given values;
/// slopes are against V.
DesScaling des_volume_sweep(const ImmuneSimConfig& config_template, std::span<const double> volumes,
                            std::size_t replicates);

/// `M,V,N,t_detect,t_comm,t_total,seed`
void write_runs_csv(std::ostream& out, std::span<const DesRow> rows);

}  // namespace radar::immune
