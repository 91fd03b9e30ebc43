#pragma once

// Central-place foraging on a grid with pheromone recruitment.
//
// Ants leave the nest when the colony's recent return rate clears a threshold
// (or at a small base rate), wander by the pheromone transition rule
// p_j = tau_j^alpha / sum_k tau_k^alpha mixed with a uniform component, carry
// one seed home along a shortest path and lay pheromone on the way back.

#include "radar/rng.hpp"
#include "radar/scaling.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace radar::ants {

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct SeedPile {
    Cell cell;
    std::uint32_t count = 0;
};

/// Grid, nest and seed piles. Seeds are tracked per cell; `pile_of` maps a
/// cell back to the pile it was seeded from (or -1).
class World {
public:
    World(int width, int height, bool torus, Cell nest, std::vector<SeedPile> piles);

    int width() const { return width_; }
    int height() const { return height_; }
    bool torus() const { return torus_; }
    Cell nest() const { return nest_; }
    std::span<const SeedPile> piles() const { return piles_; }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

    std::uint32_t seeds_at(Cell c) const { return seeds_[index(c)]; }
    int pile_of(Cell c) const { return pile_index_[index(c)]; }
    /// Removes one seed; returns false when the cell is empty.
    bool take_seed(Cell c);

    std::uint64_t seeds_placed() const { return seeds_placed_; }
    std::uint64_t seeds_remaining() const { return seeds_remaining_; }

    /// Four-neighbourhood in the order E, W, N, S; off-grid cells are omitted
    /// in bounded mode.
    std::vector<Cell> neighbours(Cell c) const;

    /// One step along the shortest Manhattan path towards `to`, x axis first.
    Cell step_towards(Cell from, Cell to) const;

private:
    int width_;
    int height_;
    bool torus_;
    Cell nest_;
    std::vector<SeedPile> piles_;
    std::vector<std::uint32_t> seeds_;
    std::vector<int> pile_index_;
    std::uint64_t seeds_placed_ = 0;
    std::uint64_t seeds_remaining_ = 0;
};

struct FieldParams {
    double decay_lambda = 0.05;  ///< fraction lost per tick, in [0, 1]
    double deposit_q = 1.0;      ///< amount laid per traversed cell
};

class PheromoneField {
public:
    PheromoneField(int width, int height, FieldParams params);

    int width() const { return width_; }
    int height() const { return height_; }
    const FieldParams& params() const { return params_; }

    double at(Cell c) const;
    void set(Cell c, double tau);
    double total() const;
    double max() const;

    /// tau <- tau (1 - lambda) everywhere.
    void decay();
    /// tau <- tau + q for every cell of the path; repeated cells accumulate.
    void deposit(std::span<const Cell> path);

private:
    std::size_t index(Cell c) const;

    int width_;
    int height_;
    FieldParams params_;
    std::vector<double> tau_;
};

/// p_j = tau_j^alpha / sum_k tau_k^alpha with 0^0 = 1; uniform when the sum
/// is zero. Throws DomainError on an empty list or a negative tau.
std::vector<double> transition_probs(std::span<const double> tau, double alpha);

/// True iff the recent return rate has reached the threshold.
bool activation_gate(double recent_return_rate, double threshold);

enum class AntState { AtNest, Exploring, FollowingTrail, ReturningWithFood };

struct Ant {
    AntState state = AntState::AtNest;
    Cell position;
    double alpha = 0.0;
    bool carrying = false;
    int source_pile = -1;  ///< pile the carried seed came from
};

struct BehaviourParams {
    double activation_threshold = 0.0;  ///< theta, returns per tick
    double base_leave_probability = 0.01;
    double uniform_mix = 0.1;           ///< epsilon
};

struct StepEvents {
    bool left_nest = false;
    bool picked_up = false;
    bool delivered = false;
    int pile = -1;
};

/// Advances one ant by one tick. Throws std::logic_error when the ant's
/// carrying flag disagrees with its state.
StepEvents step_ant(Ant& ant, World& world, PheromoneField& field, double return_rate,
                    const BehaviourParams& behaviour, Rng& rng);

struct ConstantAlpha {
    double alpha = 1.0;
};
struct UniformAlpha {
    double lo = 0.0;
    double hi = 1.0;
};
/// The first round(fraction * n) ants get alpha1, the rest alpha2.
struct TwoPointAlpha {
    double alpha1 = 0.0;
    double alpha2 = 1.0;
    double fraction = 0.5;
};
using AlphaDistribution = std::variant<ConstantAlpha, UniformAlpha, TwoPointAlpha>;

struct ColonyConfig {
    std::size_t n_ants = 1;
    AlphaDistribution alpha_distribution = ConstantAlpha{1.0};
    BehaviourParams behaviour;
    std::uint64_t rng_seed = 1;
    std::uint64_t max_ticks = 1000;
    std::size_t return_window = 50;
    bool record_trace = false;
};

struct ForagingStats {
    std::uint64_t seeds_collected = 0;
    double per_capita_rate = 0.0;
    std::uint64_t ticks_transporting = 0;
    std::uint64_t ticks_searching = 0;
    std::vector<std::uint64_t> trips_per_pile;
};

struct TraceRow {
    std::uint64_t tick = 0;
    std::size_t ants_out = 0;
    std::uint64_t returns = 0;
    double total_pheromone = 0.0;
};

struct ColonyResult {
    ForagingStats stats;
    std::vector<TraceRow> trace;
};

/// Synchronous ticks: every ant steps in index order, then the field decays.
/// The world is taken by value; the caller's copy keeps its seeds.
ColonyResult run_colony(World world, const FieldParams& field_params, const ColonyConfig& config);

/// Colony-size families for the per-capita experiment. The geometry is the
/// same at every size; only seed abundance scales with the colony.
enum class SeedLayout { Clustered, Dispersed };

struct ForagingScenario {
    SeedLayout layout = SeedLayout::Clustered;
    int world_side = 31;
    std::uint32_t cluster_count = 4;     ///< seed cells under Clustered
    std::uint32_t dispersed_cells = 256; ///< seed cells under Dispersed
    double seeds_per_ant = 20.0;
    double threshold_per_ant = 0.0;      ///< theta = threshold_per_ant * n
    FieldParams field;
    ColonyConfig colony;                 ///< n_ants, rng_seed and theta are overwritten
};

/// Builds the bounded square world for a colony of n ants under the scenario.
World make_scenario_world(const ForagingScenario& scenario, std::size_t n_ants, std::uint64_t seed);

struct PerCapitaRow {
    std::size_t n_ants = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    ForagingStats stats;
};

struct PerCapitaScaling {
    scaling::RegressionResult fit;
    std::vector<PerCapitaRow> rows;
};

/// Runs `replicates` colonies at each size (seed = seed_base + 1000 * size
/// index + replicate) and fits ln(mean per-capita rate) vs ln(n).
PerCapitaScaling per_capita_scaling(const ForagingScenario& scenario, std::span<const std::size_t> sizes,
                                    std::size_t replicates, std::uint64_t seed_base);

/// `n_ants,replicate,seeds_collected,per_capita_rate,ticks_transporting,ticks_searching,seed`
void write_stats_csv(std::ostream& out, std::span<const PerCapitaRow> rows);

/// `tick,ants_out,returns,total_pheromone`
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace radar::ants
