#include "radar/scaling.hpp"

#include "radar/error.hpp"
#include "radar/format.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace radar::scaling {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite, got " + format_short(v));
    }
}

void validate_growth(const GrowthParams& p) {
    require_positive(p.a, "growth coefficient a");
    require_positive(p.b, "growth coefficient b");
    require_positive(p.m0, "initial mass m0");
    if (!(p.p > 0.0 && p.p < 1.0)) {
        throw ConfigError("metabolic exponent p must lie in (0, 1), got " + format_short(p.p));
    }
}

void validate_step(double t_end, double dt) {
    if (!(t_end > 0.0) || !(dt > 0.0)) {
        throw ConfigError("t_end and dt must be positive");
    }
    if (dt >= t_end) {
        throw ConfigError("dt (" + format_short(dt) + ") must be smaller than t_end (" + format_short(t_end) + ")");
    }
}

template <class Rhs>
double rk4_step(const Rhs& f, double y, double h) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::size_t step_count(double t_end, double dt) {
    // Tolerate t_end/dt landing a hair above an integer.
    const double ratio = t_end / dt;
    return static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
}

}  // namespace

double power_eval(const PowerLaw& law, double x) {
    require_positive(law.coefficient, "power-law coefficient");
    if (!(x > 0.0)) {
        throw DomainError("power law evaluated at non-positive x = " + format_short(x));
    }
    return law.coefficient * std::pow(x, law.exponent);
}

double asymptotic_mass(const GrowthParams& params) {
    if (params.p >= 1.0) {
        throw ConfigError("p >= 1: growth has no finite asymptote");
    }
    require_positive(params.a, "growth coefficient a");
    require_positive(params.b, "growth coefficient b");
    return std::pow(params.a / params.b, 1.0 / (1.0 - params.p));
}

double growth_time_scale(const GrowthParams& params) {
    return 4.0 * std::pow(asymptotic_mass(params), 0.25) / params.a;
}

Trajectory integrate_growth(const GrowthParams& params, double t_end, double dt) {
    validate_growth(params);
    validate_step(t_end, dt);

    const auto rhs = [&](double m) { return params.a * std::pow(m, params.p) - params.b * m; };
    const std::size_t steps = step_count(t_end, dt);

    Trajectory out;
    out.reserve(steps + 1);
    out.push_back({0.0, params.m0});
    double m = params.m0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * dt;
        const double t = (i == steps) ? t_end : static_cast<double>(i) * dt;
        m = rk4_step(rhs, m, t - t_prev);
        if (!std::isfinite(m)) {
            throw NumericalError("growth integration produced a non-finite mass at step " + std::to_string(i) +
                                 " (t = " + format_short(t) + ")");
        }
        out.push_back({t, m});
    }
    return out;
}

double growth_analytic(const GrowthParams& params, double t) {
    if (params.p != 0.75) {
        throw ConfigError("closed-form growth is only available for p = 3/4, got " + format_short(params.p));
    }
    validate_growth(params);
    const double mass = asymptotic_mass(params);
    const double u_ratio = std::pow(params.m0 / mass, 0.25);
    const double decay = std::exp(-params.a * t / (4.0 * std::pow(mass, 0.25)));
    return mass * std::pow(1.0 - (1.0 - u_ratio) * decay, 4.0);
}

CityGrowthResult city_growth(const CityGrowthParams& params, double t_end, double dt,
                             std::optional<double> ceiling) {
    require_positive(params.a, "city growth coefficient a");
    require_positive(params.b, "city growth coefficient b");
    require_positive(params.n0, "initial size n0");
    validate_step(t_end, dt);
    const double limit = ceiling.value_or(1e12 * params.n0);
    require_positive(limit, "blow-up ceiling");

    const auto rhs = [&](double n) { return params.a * std::pow(n, params.gamma) - params.b * n; };
    const std::size_t steps = step_count(t_end, dt);

    CityGrowthResult result;
    result.trajectory.push_back({0.0, params.n0});
    double n = params.n0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * dt;
        const double t = (i == steps) ? t_end : static_cast<double>(i) * dt;
        n = rk4_step(rhs, n, t - t_prev);
        if (!std::isfinite(n) || n > limit) {
            result.blow_up_time = t;
            break;
        }
        result.trajectory.push_back({t, n});
    }
    return result;
}

RegressionResult linear_fit(std::span<const Point> points) {
    const std::size_t n = points.size();
    if (n < 3) {
        throw InsufficientDataError("regression needs at least 3 points, got " + std::to_string(n));
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw DomainError("regression input contains a non-finite value");
        }
        mean_x += p.x;
        mean_y += p.y;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    double scale = 1.0;
    for (const auto& p : points) {
        const double dx = p.x - mean_x;
        const double dy = p.y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    }
    if (!(sxx > 0.0)) {
        throw DegenerateFitError("regressor has zero variance");
    }

    RegressionResult r;
    r.n_points = n;
    r.slope = sxy / sxx;
    r.intercept = mean_y - r.slope * mean_x;

    double sse = 0.0;
    for (const auto& p : points) {
        const double e = p.y - (r.intercept + r.slope * p.x);
        sse += e * e;
    }
    // Residuals at rounding level count as an exact fit.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (sse <= static_cast<double>(n) * noise * noise) {
        sse = 0.0;
    }

    r.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    const double dof = static_cast<double>(n - 2);
    r.slope_stderr = std::sqrt(sse / dof / sxx);
    if (r.slope_stderr > 0.0) {
        const double t_stat = std::abs(r.slope / r.slope_stderr);
        const boost::math::students_t dist(dof);
        r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t_stat)), 0.0, 1.0);
    }
    return r;
}

RegressionResult loglog_fit(std::span<const Point> points) {
    if (points.size() < 3) {
        throw InsufficientDataError("log-log fit needs at least 3 points, got " + std::to_string(points.size()));
    }
    std::vector<Point> logged;
    logged.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0)) {
            throw DomainError("log-log fit requires strictly positive coordinates, got (" + format_short(p.x) +
                              ", " + format_short(p.y) + ")");
        }
        logged.push_back({std::log(p.x), std::log(p.y)});
    }
    return linear_fit(logged);
}

std::uint64_t interaction_count(std::uint64_t n, bool directed) {
    if (n == 0) {
        return 0;
    }
    const std::uint64_t ordered = n * (n - 1);
    return directed ? ordered : ordered / 2;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,value\n";
    for (const auto& s : trajectory) {
        out << format_double(s.t) << ',' << format_double(s.value) << '\n';
    }
}

}  // namespace radar::scaling
