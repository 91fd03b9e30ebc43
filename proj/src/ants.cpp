#include "radar/ants.hpp"

#include "radar/error.hpp"
#include "radar/format.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace radar::ants {

namespace {

int wrap(int v, int n) {
    const int r = v % n;
    return r < 0 ? r + n : r;
}

// Signed step (-1, 0, +1) along one axis towards `to`, taking the wrap-around
// route on a torus when it is strictly shorter.
int axis_step(int from, int to, int n, bool torus) {
    if (from == to) {
        return 0;
    }
    const int direct = to - from;
    if (!torus) {
        return direct > 0 ? 1 : -1;
    }
    const int forward = wrap(direct, n);
    const int backward = n - forward;
    return forward <= backward ? 1 : -1;
}

std::size_t sample_index(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) {
            return i;
        }
    }
    return probs.size() - 1;
}

double draw_alpha(const AlphaDistribution& dist, std::size_t index, std::size_t n_ants, Rng& rng) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ConstantAlpha>) {
                return d.alpha;
            } else if constexpr (std::is_same_v<T, UniformAlpha>) {
                return rng.uniform(d.lo, d.hi);
            } else {
                const auto first = static_cast<std::size_t>(std::llround(d.fraction * static_cast<double>(n_ants)));
                return index < first ? d.alpha1 : d.alpha2;
            }
        },
        dist);
}

void validate_alpha(const AlphaDistribution& dist) {
    const bool ok = std::visit(
        [](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ConstantAlpha>) {
                return d.alpha >= 0.0;
            } else if constexpr (std::is_same_v<T, UniformAlpha>) {
                return d.lo >= 0.0 && d.hi >= d.lo;
            } else {
                return d.alpha1 >= 0.0 && d.alpha2 >= 0.0 && d.fraction >= 0.0 && d.fraction <= 1.0;
            }
        },
        dist);
    if (!ok) {
        throw ConfigError("alpha distribution parameters must be non-negative (and fraction in [0, 1])");
    }
}

}  // namespace

World::World(int width, int height, bool torus, Cell nest, std::vector<SeedPile> piles)
    : width_(width), height_(height), torus_(torus), nest_(nest), piles_(std::move(piles)) {
    if (width_ < 1 || height_ < 1) {
        throw ConfigError("world dimensions must be positive");
    }
    if (!in_bounds(nest_)) {
        throw ConfigError("nest lies outside the world");
    }
    const auto cells = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    seeds_.assign(cells, 0);
    pile_index_.assign(cells, -1);
    for (std::size_t i = 0; i < piles_.size(); ++i) {
        const auto& pile = piles_[i];
        if (!in_bounds(pile.cell)) {
            throw ConfigError("seed pile lies outside the world");
        }
        if (pile.cell == nest_) {
            throw ConfigError("seed pile cannot sit on the nest");
        }
        if (pile_index_[index(pile.cell)] != -1) {
            throw ConfigError("two seed piles share a cell");
        }
        seeds_[index(pile.cell)] = pile.count;
        pile_index_[index(pile.cell)] = static_cast<int>(i);
        seeds_placed_ += pile.count;
    }
    seeds_remaining_ = seeds_placed_;
}

bool World::take_seed(Cell c) {
    auto& count = seeds_[index(c)];
    if (count == 0) {
        return false;
    }
    --count;
    --seeds_remaining_;
    return true;
}

std::vector<Cell> World::neighbours(Cell c) const {
    static constexpr int dx[] = {1, -1, 0, 0};
    static constexpr int dy[] = {0, 0, -1, 1};
    std::vector<Cell> out;
    out.reserve(4);
    for (int k = 0; k < 4; ++k) {
        Cell n{c.x + dx[k], c.y + dy[k]};
        if (torus_) {
            n = {wrap(n.x, width_), wrap(n.y, height_)};
        } else if (!in_bounds(n)) {
            continue;
        }
        out.push_back(n);
    }
    return out;
}

Cell World::step_towards(Cell from, Cell to) const {
    if (const int sx = axis_step(from.x, to.x, width_, torus_); sx != 0) {
        return {torus_ ? wrap(from.x + sx, width_) : from.x + sx, from.y};
    }
    if (const int sy = axis_step(from.y, to.y, height_, torus_); sy != 0) {
        return {from.x, torus_ ? wrap(from.y + sy, height_) : from.y + sy};
    }
    return from;
}

PheromoneField::PheromoneField(int width, int height, FieldParams params)
    : width_(width), height_(height), params_(params) {
    if (width_ < 1 || height_ < 1) {
        throw ConfigError("pheromone field dimensions must be positive");
    }
    if (!(params_.decay_lambda >= 0.0 && params_.decay_lambda <= 1.0)) {
        throw ConfigError("decay lambda must lie in [0, 1]");
    }
    if (!(params_.deposit_q > 0.0)) {
        throw ConfigError("deposit amount q must be positive");
    }
    tau_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), 0.0);
}

std::size_t PheromoneField::index(Cell c) const {
    if (c.x < 0 || c.y < 0 || c.x >= width_ || c.y >= height_) {
        throw DomainError("cell (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                          ") lies outside the pheromone field");
    }
    return static_cast<std::size_t>(c.y) * width_ + c.x;
}

double PheromoneField::at(Cell c) const { return tau_[index(c)]; }

void PheromoneField::set(Cell c, double tau) {
    if (!(tau >= 0.0)) {
        throw DomainError("pheromone must be non-negative");
    }
    tau_[index(c)] = tau;
}

double PheromoneField::total() const { return std::accumulate(tau_.begin(), tau_.end(), 0.0); }

double PheromoneField::max() const { return *std::max_element(tau_.begin(), tau_.end()); }

void PheromoneField::decay() {
    const double keep = 1.0 - params_.decay_lambda;
    for (auto& t : tau_) {
        t *= keep;
    }
}

void PheromoneField::deposit(std::span<const Cell> path) {
    // Validate the whole path first so a bad cell leaves the field untouched.
    std::vector<std::size_t> idx;
    idx.reserve(path.size());
    for (const auto& c : path) {
        idx.push_back(index(c));
    }
    for (auto i : idx) {
        tau_[i] += params_.deposit_q;
    }
}

std::vector<double> transition_probs(std::span<const double> tau, double alpha) {
    if (tau.empty()) {
        throw DomainError("transition_probs needs at least one neighbour");
    }
    if (!(alpha >= 0.0)) {
        throw DomainError("alpha must be non-negative");
    }
    std::vector<double> weights(tau.size());
    double peak = 0.0;
    for (double t : tau) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw DomainError("pheromone levels must be finite and non-negative");
        }
        peak = std::max(peak, t);
    }
    if (peak == 0.0) {
        return std::vector<double>(tau.size(), 1.0 / static_cast<double>(tau.size()));
    }
    // Scaling by the peak keeps large alpha from overflowing; the ratio is unchanged.
    double sum = 0.0;
    for (std::size_t j = 0; j < tau.size(); ++j) {
        weights[j] = alpha == 0.0 ? 1.0 : std::pow(tau[j] / peak, alpha);
        sum += weights[j];
    }
    for (auto& w : weights) {
        w /= sum;
    }
    return weights;
}

bool activation_gate(double recent_return_rate, double threshold) {
    if (!(recent_return_rate >= 0.0)) {
        throw DomainError("return rate must be non-negative");
    }
    return recent_return_rate >= threshold;
}

StepEvents step_ant(Ant& ant, World& world, PheromoneField& field, double return_rate,
                    const BehaviourParams& behaviour, Rng& rng) {
    if (ant.carrying != (ant.state == AntState::ReturningWithFood)) {
        throw std::logic_error("ant carrying flag disagrees with its state");
    }
    StepEvents events;

    if (ant.state == AntState::AtNest) {
        const bool gate = activation_gate(return_rate, behaviour.activation_threshold);
        if (!gate && !rng.bernoulli(behaviour.base_leave_probability)) {
            return events;
        }
        ant.state = AntState::Exploring;
        events.left_nest = true;
    }

    if (ant.state == AntState::ReturningWithFood) {
        const Cell here = ant.position;
        field.deposit(std::span<const Cell>(&here, 1));
        ant.position = world.step_towards(ant.position, world.nest());
        if (ant.position == world.nest()) {
            ant.state = AntState::AtNest;
            ant.carrying = false;
            events.delivered = true;
            events.pile = ant.source_pile;
            ant.source_pile = -1;
        }
        return events;
    }

    // Exploring or FollowingTrail: one move by the mixed transition rule.
    const auto options = world.neighbours(ant.position);
    std::vector<double> tau(options.size());
    bool sensed = false;
    for (std::size_t j = 0; j < options.size(); ++j) {
        tau[j] = field.at(options[j]);
        sensed = sensed || tau[j] > 0.0;
    }
    auto probs = transition_probs(tau, ant.alpha);
    const double uniform = 1.0 / static_cast<double>(options.size());
    for (auto& p : probs) {
        p = (1.0 - behaviour.uniform_mix) * p + behaviour.uniform_mix * uniform;
    }
    ant.position = options[sample_index(probs, rng.uniform01())];
    ant.state = sensed ? AntState::FollowingTrail : AntState::Exploring;

    if (!(ant.position == world.nest()) && world.take_seed(ant.position)) {
        ant.state = AntState::ReturningWithFood;
        ant.carrying = true;
        ant.source_pile = world.pile_of(ant.position);
        events.picked_up = true;
        events.pile = ant.source_pile;
    }
    return events;
}

ColonyResult run_colony(World world, const FieldParams& field_params, const ColonyConfig& config) {
    if (config.n_ants < 1) {
        throw ConfigError("a colony needs at least one ant");
    }
    if (config.return_window < 1) {
        throw ConfigError("return-rate window must be at least one tick");
    }
    validate_alpha(config.alpha_distribution);
    const auto& b = config.behaviour;
    if (!(b.activation_threshold >= 0.0) || !(b.base_leave_probability >= 0.0 && b.base_leave_probability <= 1.0) ||
        !(b.uniform_mix >= 0.0 && b.uniform_mix <= 1.0)) {
        throw ConfigError("behaviour parameters out of range");
    }

    Rng rng(config.rng_seed);
    PheromoneField field(world.width(), world.height(), field_params);
    std::vector<Ant> colony(config.n_ants);
    for (std::size_t i = 0; i < colony.size(); ++i) {
        colony[i].position = world.nest();
        colony[i].alpha = draw_alpha(config.alpha_distribution, i, colony.size(), rng);
    }

    ColonyResult result;
    auto& stats = result.stats;
    stats.trips_per_pile.assign(world.piles().size(), 0);

    std::deque<std::uint64_t> window;
    std::uint64_t window_sum = 0;
    for (std::uint64_t tick = 0; tick < config.max_ticks; ++tick) {
        const double return_rate = static_cast<double>(window_sum) / static_cast<double>(config.return_window);
        std::uint64_t returns = 0;
        for (auto& ant : colony) {
            if (ant.state == AntState::ReturningWithFood) {
                ++stats.ticks_transporting;
            } else if (ant.state != AntState::AtNest) {
                ++stats.ticks_searching;
            }
            const auto ev = step_ant(ant, world, field, return_rate, b, rng);
            if (ev.left_nest && ant.state != AntState::AtNest) {
                ++stats.ticks_searching;
            }
            if (ev.delivered) {
                ++returns;
                if (ev.pile >= 0) {
                    ++stats.trips_per_pile[static_cast<std::size_t>(ev.pile)];
                }
            }
        }
        field.decay();

        stats.seeds_collected += returns;
        window.push_back(returns);
        window_sum += returns;
        if (window.size() > config.return_window) {
            window_sum -= window.front();
            window.pop_front();
        }
        if (config.record_trace) {
            const auto out = static_cast<std::size_t>(std::count_if(
                colony.begin(), colony.end(), [](const Ant& a) { return a.state != AntState::AtNest; }));
            result.trace.push_back({tick, out, returns, field.total()});
        }
    }

    const double ant_ticks = static_cast<double>(config.n_ants) * static_cast<double>(config.max_ticks);
    stats.per_capita_rate = ant_ticks > 0.0 ? static_cast<double>(stats.seeds_collected) / ant_ticks : 0.0;
    return result;
}

World make_scenario_world(const ForagingScenario& scenario, std::size_t n_ants, std::uint64_t seed) {
    const int side = scenario.world_side;
    const std::uint32_t cells =
        scenario.layout == SeedLayout::Clustered ? scenario.cluster_count : scenario.dispersed_cells;
    if (n_ants < 1 || side < 3 || cells < 1 || !(scenario.seeds_per_ant > 0.0)) {
        throw ConfigError("scenario needs a positive colony size, side >= 3, seed cells and seed abundance");
    }
    const auto free_cells = static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side) - 1;
    if (cells > free_cells) {
        throw ConfigError("scenario world is too small for its seed cells");
    }
    const Cell nest{side / 2, side / 2};
    const auto total = static_cast<std::uint64_t>(std::llround(scenario.seeds_per_ant * static_cast<double>(n_ants)));

    Rng rng(seed);
    std::vector<char> used(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0);
    used[static_cast<std::size_t>(nest.y) * side + nest.x] = 1;
    std::vector<SeedPile> piles;
    piles.reserve(cells);
    for (std::uint32_t i = 0; i < cells; ++i) {
        Cell c;
        do {
            c = {static_cast<int>(rng.below(static_cast<std::uint64_t>(side))),
                 static_cast<int>(rng.below(static_cast<std::uint64_t>(side)))};
        } while (used[static_cast<std::size_t>(c.y) * side + c.x]);
        used[static_cast<std::size_t>(c.y) * side + c.x] = 1;
        // Even split; the first (total mod cells) piles take one extra seed.
        const std::uint64_t count = total / cells + (i < total % cells ? 1 : 0);
        piles.push_back({c, static_cast<std::uint32_t>(count)});
    }
    return World(side, side, false, nest, std::move(piles));
}

PerCapitaScaling per_capita_scaling(const ForagingScenario& scenario, std::span<const std::size_t> sizes,
                                    std::size_t replicates, std::uint64_t seed_base) {
    if (!sizes.empty() && std::all_of(sizes.begin(), sizes.end(), [&](std::size_t s) { return s == sizes.front(); })) {
        throw DegenerateFitError("all colony sizes are identical; the slope is undefined");
    }
    if (sizes.size() < 3) {
        throw InsufficientDataError("per-capita scaling needs at least 3 colony sizes");
    }
    if (replicates < 20) {
        throw ConfigError("per-capita scaling needs at least 20 replicates, got " + std::to_string(replicates));
    }

    PerCapitaScaling out;
    std::vector<scaling::Point> points;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        double sum = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) {
            const std::uint64_t seed = seed_base + 1000 * s + r;
            ColonyConfig config = scenario.colony;
            config.n_ants = sizes[s];
            config.rng_seed = seed;
            config.behaviour.activation_threshold = scenario.threshold_per_ant * static_cast<double>(sizes[s]);
            config.record_trace = false;
            auto stats = run_colony(make_scenario_world(scenario, sizes[s], seed), scenario.field, config).stats;
            sum += stats.per_capita_rate;
            out.rows.push_back({sizes[s], r, seed, std::move(stats)});
        }
        points.push_back({static_cast<double>(sizes[s]), sum / static_cast<double>(replicates)});
    }
    out.fit = scaling::loglog_fit(points);
    return out;
}

void write_stats_csv(std::ostream& out, std::span<const PerCapitaRow> rows) {
    out << "n_ants,replicate,seeds_collected,per_capita_rate,ticks_transporting,ticks_searching,seed\n";
    for (const auto& r : rows) {
        out << r.n_ants << ',' << r.replicate << ',' << r.stats.seeds_collected << ','
            << format_double(r.stats.per_capita_rate) << ',' << r.stats.ticks_transporting << ','
            << r.stats.ticks_searching << ',' << r.seed << '\n';
    }
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
    out << "tick,ants_out,returns,total_pheromone\n";
    for (const auto& t : trace) {
        out << t.tick << ',' << t.ants_out << ',' << t.returns << ',' << format_double(t.total_pheromone) << '\n';
    }
}

}  // namespace radar::ants
