#include "radar/smallworld.hpp"

#include "radar/error.hpp"
#include "radar/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_set>

namespace radar::smallworld {

namespace {

std::uint32_t torus_side(std::uint32_t n) {
    const auto side = static_cast<std::uint32_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (static_cast<std::uint64_t>(side) * side != n) {
        throw ConfigError("torus size " + std::to_string(n) + " is not a perfect square");
    }
    return side;
}

std::uint32_t validate_size(Topology topology, std::uint32_t n) {
    if (n < 9) {
        throw ConfigError("lattice needs at least 9 nodes, got " + std::to_string(n));
    }
    return topology == Topology::Torus ? torus_side(n) : n;
}

std::uint32_t wrapped(std::uint32_t a, std::uint32_t b, std::uint32_t n) {
    const std::uint32_t d = a > b ? a - b : b - a;
    return std::min(d, n - d);
}

std::uint32_t ceil_to_degree(double value) {
    if (!(value >= 0.0) || value > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError("degree policy resolves to an invalid out-degree");
    }
    return static_cast<std::uint32_t>(std::ceil(value));
}

}  // namespace

std::uint32_t resolve_degree(const DegreePolicy& policy, std::uint32_t n) {
    const double ln_n = std::log(static_cast<double>(n));
    return std::visit(
        [&](const auto& p) -> std::uint32_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantDegree>) {
                return p.k;
            } else if constexpr (std::is_same_v<T, LogDegree>) {
                return ceil_to_degree(p.c * ln_n);
            } else {
                return ceil_to_degree(p.c * ln_n * ln_n);
            }
        },
        policy);
}

std::string policy_name(const DegreePolicy& policy) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantDegree>) {
                return "constant(" + std::to_string(p.k) + ")";
            } else if constexpr (std::is_same_v<T, LogDegree>) {
                return "log(" + format_short(p.c) + ")";
            } else {
                return "logsquared(" + format_short(p.c) + ")";
            }
        },
        policy);
}

std::uint32_t lattice_distance(Topology topology, std::uint32_t n, NodeId u, NodeId v) {
    if (topology == Topology::Ring) {
        return wrapped(u, v, n);
    }
    const std::uint32_t side = torus_side(n);
    return wrapped(u % side, v % side, side) + wrapped(u / side, v / side, side);
}

ContactSampler::ContactSampler(Topology topology, std::uint32_t n, double r_exponent)
    : topology_(topology), n_(n), side_(validate_size(topology, n)) {
    if (!(r_exponent >= 0.0) || !std::isfinite(r_exponent)) {
        throw ConfigError("distance-decay exponent must be finite and non-negative");
    }
    offsets_.reserve(n - 1);
    cumulative_.reserve(n - 1);
    double running = 0.0;
    for (std::uint32_t off = 1; off < n; ++off) {
        const auto d = static_cast<double>(lattice_distance(topology, n, 0, off));
        running += std::pow(d, -r_exponent);
        offsets_.push_back(off);
        cumulative_.push_back(running);
    }
}

NodeId ContactSampler::sample(NodeId from, Rng& rng) const {
    const double u = rng.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
        --it;
    }
    const auto off = static_cast<std::uint32_t>(offsets_[static_cast<std::size_t>(it - cumulative_.begin())]);
    if (topology_ == Topology::Ring) {
        return static_cast<NodeId>((static_cast<std::uint64_t>(from) + off) % n_);
    }
    const std::uint32_t x = (from % side_ + off % side_) % side_;
    const std::uint32_t y = (from / side_ + off / side_) % side_;
    return y * side_ + x;
}

LatticeGraph::LatticeGraph(Topology topology, std::uint32_t n, double r_exponent,
                           std::vector<std::vector<NodeId>> long_links)
    : topology_(topology), n_(n), side_(validate_size(topology, n)), r_exponent_(r_exponent),
      long_links_(std::move(long_links)) {
    if (long_links_.size() != n_) {
        throw ConfigError("long-link table does not match the node count");
    }
    for (NodeId u = 0; u < n_; ++u) {
        for (NodeId v : long_links_[u]) {
            if (v >= n_ || v == u) {
                throw ConfigError("long link from " + std::to_string(u) + " has an invalid target");
            }
        }
    }
}

std::uint32_t LatticeGraph::distance(NodeId u, NodeId v) const {
    if (topology_ == Topology::Ring) {
        return wrapped(u, v, n_);
    }
    return wrapped(u % side_, v % side_, side_) + wrapped(u / side_, v / side_, side_);
}

std::vector<NodeId> LatticeGraph::local_neighbours(NodeId u) const {
    std::vector<NodeId> out;
    if (topology_ == Topology::Ring) {
        out = {(u + 1) % n_, (u + n_ - 1) % n_};
    } else {
        const std::uint32_t x = u % side_;
        const std::uint32_t y = u / side_;
        out = {y * side_ + (x + 1) % side_, y * side_ + (x + side_ - 1) % side_, ((y + 1) % side_) * side_ + x,
               ((y + side_ - 1) % side_) * side_ + x};
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint32_t LatticeGraph::diameter() const {
    return topology_ == Topology::Ring ? n_ / 2 : 2 * (side_ / 2);
}

LatticeGraph build_graph(Topology topology, std::uint32_t n, const DegreePolicy& policy, double r_exponent,
                         std::uint64_t rng_seed) {
    validate_size(topology, n);
    const std::uint32_t k = resolve_degree(policy, n);
    if (k > n - 1) {
        throw ConfigError("out-degree " + std::to_string(k) + " exceeds the " + std::to_string(n - 1) +
                          " available targets");
    }
    const ContactSampler sampler(topology, n, r_exponent);
    Rng rng(rng_seed);
    std::vector<std::vector<NodeId>> links(n);
    std::unordered_set<NodeId> seen;
    for (NodeId u = 0; u < n; ++u) {
        auto& out = links[u];
        out.reserve(k);
        seen.clear();
        while (out.size() < k) {
            const NodeId v = sampler.sample(u, rng);
            if (seen.insert(v).second) {
                out.push_back(v);
            }
        }
    }
    return LatticeGraph(topology, n, r_exponent, std::move(links));
}

RouteResult greedy_route(const LatticeGraph& graph, NodeId source, NodeId target, std::int64_t hop_cap) {
    if (hop_cap < 0) {
        throw DomainError("hop cap must be non-negative");
    }
    if (source >= graph.size() || target >= graph.size()) {
        throw DomainError("route endpoints must be nodes of the graph");
    }
    RouteResult r;
    NodeId at = source;
    while (at != target) {
        if (static_cast<std::int64_t>(r.hops) >= hop_cap) {
            r.path_length_bound_hit = true;
            return r;
        }
        NodeId best = at;
        std::uint32_t best_d = graph.distance(at, target);
        const auto consider = [&](NodeId v) {
            const std::uint32_t d = graph.distance(v, target);
            if (d < best_d || (d == best_d && best != at && v < best)) {
                best = v;
                best_d = d;
            }
        };
        for (NodeId v : graph.local_neighbours(at)) {
            consider(v);
        }
        for (NodeId v : graph.long_links(at)) {
            consider(v);
        }
        // A lattice neighbour is always strictly closer, so best != at here.
        at = best;
        ++r.hops;
    }
    r.delivered = true;
    return r;
}

DeliveryScaling delivery_scaling(Topology topology, std::span<const std::uint32_t> sizes, const DegreePolicy& policy,
                                 double r_exponent, std::size_t trials, std::uint64_t rng_seed) {
    if (!sizes.empty() && std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s == sizes.front(); })) {
        throw DegenerateFitError("all sizes are identical; the delivery-time slope is undefined");
    }
    if (sizes.size() < 3) {
        throw InsufficientDataError("delivery scaling needs at least 3 sizes");
    }
    if (trials < 200) {
        throw ConfigError("delivery scaling needs at least 200 trials per size, got " + std::to_string(trials));
    }

    DeliveryScaling out;
    std::vector<scaling::Point> lin;
    std::vector<scaling::Point> sq;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const std::uint32_t n = sizes[i];
        const auto graph = build_graph(topology, n, policy, r_exponent, rng_seed + i);
        Rng pairs(rng_seed + 1000003ULL * (i + 1));

        SizeResult res;
        res.n = n;
        res.k = resolve_degree(policy, n);
        res.trials = trials;
        res.seed = rng_seed + i;
        res.hops.reserve(trials);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto s = static_cast<NodeId>(pairs.below(n));
            auto d = static_cast<NodeId>(pairs.below(n - 1));
            if (d >= s) {
                ++d;
            }
            const auto route = greedy_route(graph, s, d, graph.diameter());
            if (!route.delivered) {
                throw NumericalError("greedy routing failed to deliver within the lattice diameter");
            }
            res.hops.push_back(route.hops);
            sum += route.hops;
            sum_sq += static_cast<double>(route.hops) * route.hops;
        }
        const double count = static_cast<double>(trials);
        res.mean_hops = sum / count;
        const double var = std::max(0.0, (sum_sq - count * res.mean_hops * res.mean_hops) / (count - 1.0));
        res.stderr_hops = std::sqrt(var / count);

        const double ln_n = std::log(static_cast<double>(n));
        lin.push_back({ln_n, res.mean_hops});
        sq.push_back({ln_n * ln_n, res.mean_hops});
        out.sizes.push_back(std::move(res));
    }
    out.vs_log = scaling::linear_fit(lin);
    out.vs_log_squared = scaling::linear_fit(sq);
    return out;
}

void write_results_csv(std::ostream& out, const DegreePolicy& policy, std::span<const SizeResult> sizes) {
    out << "n,policy,k,mean_hops,stderr,trials,seed\n";
    const std::string name = policy_name(policy);
    for (const auto& s : sizes) {
        out << s.n << ',' << name << ',' << s.k << ',' << format_double(s.mean_hops) << ','
            << format_double(s.stderr_hops) << ',' << s.trials << ',' << s.seed << '\n';
    }
}

}  // namespace radar::smallworld
