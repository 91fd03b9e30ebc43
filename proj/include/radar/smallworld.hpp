#pragma once

// Lattices with long-range contacts (Kleinberg construction) and greedy
// routing. Out-degree of the long-range part follows a DegreePolicy so the
// effect of densification, k = c (ln n)^2, can be compared against a fixed k.

#include "radar/rng.hpp"
#include "radar/scaling.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace radar::smallworld {

enum class Topology { Ring, Torus };

struct ConstantDegree {
    std::uint32_t k = 1;
};
struct LogDegree {
    double c = 1.0;
};
struct LogSquaredDegree {
    double c = 1.0;
};
using DegreePolicy = std::variant<ConstantDegree, LogDegree, LogSquaredDegree>;

/// k, ceil(c ln n) or ceil(c (ln n)^2).
std::uint32_t resolve_degree(const DegreePolicy& policy, std::uint32_t n);

std::string policy_name(const DegreePolicy& policy);

using NodeId = std::uint32_t;

/// Translation-invariant sampler of long-range contacts: target v is drawn
/// with probability proportional to d(u, v)^(-r) over all v != u.
class ContactSampler {
public:
    ContactSampler(Topology topology, std::uint32_t n, double r_exponent);

    NodeId sample(NodeId from, Rng& rng) const;

private:
    Topology topology_;
    std::uint32_t n_;
    std::uint32_t side_;
    std::vector<std::int64_t> offsets_;  // node offsets, excluding 0
    std::vector<double> cumulative_;     // running weight over offsets_
};

class LatticeGraph {
public:
    LatticeGraph(Topology topology, std::uint32_t n, double r_exponent, std::vector<std::vector<NodeId>> long_links);

    Topology topology() const { return topology_; }
    std::uint32_t size() const { return n_; }
    std::uint32_t side() const { return side_; }
    double r_exponent() const { return r_exponent_; }

    std::uint32_t distance(NodeId u, NodeId v) const;
    /// 2 ring or 4 torus neighbours, ascending id, duplicates removed.
    std::vector<NodeId> local_neighbours(NodeId u) const;
    std::span<const NodeId> long_links(NodeId u) const { return long_links_[u]; }
    std::uint32_t diameter() const;

private:
    Topology topology_;
    std::uint32_t n_;
    std::uint32_t side_;
    double r_exponent_;
    std::vector<std::vector<NodeId>> long_links_;
};

/// Lattice distance on a ring of n nodes or a side x side torus.
std::uint32_t lattice_distance(Topology topology, std::uint32_t n, NodeId u, NodeId v);

/// n >= 9 (perfect square for the torus). Each node receives exactly k(n)
/// distinct long-range contacts; duplicate draws are redrawn.
LatticeGraph build_graph(Topology topology, std::uint32_t n, const DegreePolicy& policy, double r_exponent,
                         std::uint64_t rng_seed);

struct RouteResult {
    std::uint32_t hops = 0;
    bool delivered = false;
    bool path_length_bound_hit = false;
};

/// Forwards to the neighbour (local or long-range) closest to the target,
/// smallest id on ties, until the target or hop_cap is reached.
RouteResult greedy_route(const LatticeGraph& graph, NodeId source, NodeId target, std::int64_t hop_cap);

struct SizeResult {
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    double mean_hops = 0.0;
    double stderr_hops = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> hops;  ///< per trial, in trial order
};

struct DeliveryScaling {
    std::vector<SizeResult> sizes;
    scaling::RegressionResult vs_log;          ///< mean hops = a ln n + b
    scaling::RegressionResult vs_log_squared;  ///< mean hops = a (ln n)^2 + b
};

/// Builds one graph per size (seed rng_seed + size index), routes `trials`
/// random distinct source-target pairs (pair stream seeded by rng_seed, so
/// equal seeds give the same pairs under any policy) and fits both models.
DeliveryScaling delivery_scaling(Topology topology, std::span<const std::uint32_t> sizes, const DegreePolicy& policy,
                                 double r_exponent, std::size_t trials, std::uint64_t rng_seed);

/// `n,policy,k,mean_hops,stderr,trials,seed`
void write_results_csv(std::ostream& out, const DegreePolicy& policy, std::span<const SizeResult> sizes);

}  // namespace radar::smallworld
