#pragma once

// Power laws, the ontogenetic and city growth ODEs, and the log-log
// regression used throughout the project to measure scaling exponents.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radar::scaling {

struct PowerLaw {
    double coefficient = 1.0;
    double exponent = 1.0;
};

/// c * x^e. Throws DomainError for x <= 0 or a non-positive coefficient.
double power_eval(const PowerLaw& law, double x);

/// dm/dt = a m^p - b m.
struct GrowthParams {
    double a = 1.0;
    double b = 1.0;
    double p = 0.75;
    double m0 = 1.0;
};

/// dn/dt = a n^gamma - b n.
struct CityGrowthParams {
    double a = 1.0;
    double b = 1.0;
    double gamma = 0.75;
    double n0 = 1.0;
};

struct Sample {
    double t = 0.0;
    double value = 0.0;
};

using Trajectory = std::vector<Sample>;

/// (a/b)^(1/(1-p)), the positive fixed point of the growth equation.
double asymptotic_mass(const GrowthParams& params);

/// Classical RK4 with fixed step dt. The final step is shortened so the
/// trajectory ends exactly at t_end. Samples include t = 0.
Trajectory integrate_growth(const GrowthParams& params, double t_end, double dt);

/// Closed-form solution for p = 3/4 (substitute u = m^(1/4), which turns the
/// equation linear):
///   m(t) = M (1 - (1 - (m0/M)^(1/4)) exp(-a t / (4 M^(1/4))))^4,  M = (a/b)^4.
double growth_analytic(const GrowthParams& params, double t);

/// Characteristic relaxation time 4 M^(1/4) / a of the p = 3/4 solution.
double growth_time_scale(const GrowthParams& params);

struct CityGrowthResult {
    Trajectory trajectory;
    /// Time of the first step whose value exceeded the ceiling or overflowed.
    std::optional<double> blow_up_time;
};

/// Integrates the city growth equation with RK4. ceiling defaults to 1e12 * n0.
CityGrowthResult city_growth(const CityGrowthParams& params, double t_end, double dt,
                             std::optional<double> ceiling = std::nullopt);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    /// Two-sided t-test of slope != 0; empty for exact fits (stderr == 0).
    std::optional<double> p_value;
    std::size_t n_points = 0;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
RegressionResult linear_fit(std::span<const Point> points);

/// OLS on (ln x, ln y). Requires at least three strictly positive points.
RegressionResult loglog_fit(std::span<const Point> points);

/// Ordered pairs (directed) or unordered pairs among n nodes.
std::uint64_t interaction_count(std::uint64_t n, bool directed);

/// Writes `t,value` rows with round-trip precision.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace radar::scaling
