#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "implink/cascade.hpp"
#include "implink/follow_network.hpp"
#include "implink/rng.hpp"
#include "implink/types.hpp"

namespace implink {

// Undirected weighted projection of the follow network: each directed edge
// contributes weight 1, so a reciprocated pair carries weight 2.
struct WeightedGraph {
    std::vector<std::size_t> offsets;
    std::vector<node_t> targets;
    std::vector<double> weights;
    std::vector<double> self_loop;  // aggregated internal weight, per node
    std::vector<double> strength;   // sum of incident weights, self loops twice
    double total_weight = 0.0;      // m: every undirected edge once + self loops

    std::size_t node_count() const { return self_loop.size(); }
};

inline WeightedGraph undirected_projection(const FollowNetwork& net) {
    const std::size_t n = net.node_count();
    WeightedGraph g;
    g.offsets.assign(n + 1, 0);
    g.self_loop.assign(n, 0.0);
    g.strength.assign(n, 0.0);
    for (node_t u = 0; u < n; ++u) {
        const auto out = net.followees(u);
        const auto in = net.followers(u);
        std::size_t i = 0, j = 0, count = 0;
        while (i < out.size() || j < in.size()) {
            if (j >= in.size() || (i < out.size() && out[i] < in[j])) {
                ++i, ++count;
            } else if (i >= out.size() || in[j] < out[i]) {
                ++j, ++count;
            } else {
                ++i, ++j, ++count;
            }
        }
        g.offsets[u + 1] = g.offsets[u] + count;
    }
    g.targets.resize(g.offsets[n]);
    g.weights.resize(g.offsets[n]);
    for (node_t u = 0; u < n; ++u) {
        const auto out = net.followees(u);
        const auto in = net.followers(u);
        std::size_t i = 0, j = 0, w = g.offsets[u];
        while (i < out.size() || j < in.size()) {
            node_t v;
            double weight;
            if (j >= in.size() || (i < out.size() && out[i] < in[j])) {
                v = out[i++];
                weight = 1.0;
            } else if (i >= out.size() || in[j] < out[i]) {
                v = in[j++];
                weight = 1.0;
            } else {
                v = out[i];
                ++i, ++j;
                weight = 2.0;
            }
            g.targets[w] = v;
            g.weights[w] = weight;
            ++w;
            g.strength[u] += weight;
        }
    }
    double twice_m = 0.0;
    for (node_t u = 0; u < n; ++u) twice_m += g.strength[u];
    g.total_weight = twice_m / 2.0;
    return g;
}

// Q = sum_c (e_c/m - gamma * (d_c/2m)^2) over communities of the projection.
inline double modularity(const WeightedGraph& g, std::span<const std::uint32_t> community,
                         double resolution = 1.0) {
    std::uint32_t c_count = 0;
    for (auto c : community) c_count = std::max(c_count, c + 1);
    std::vector<double> internal(c_count, 0.0), degree(c_count, 0.0);
    for (node_t u = 0; u < g.node_count(); ++u) {
        degree[community[u]] += g.strength[u];
        internal[community[u]] += g.self_loop[u];
        for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const node_t v = g.targets[k];
            if (community[u] == community[v]) internal[community[u]] += g.weights[k] / 2.0;
        }
    }
    const double m = g.total_weight;
    if (!(m > 0.0)) return 0.0;
    double q = 0.0;
    for (std::uint32_t c = 0; c < c_count; ++c) {
        const double frac = degree[c] / (2.0 * m);
        q += internal[c] / m - resolution * frac * frac;
    }
    return q;
}

struct Partition {
    std::vector<std::uint32_t> community;  // per node, dense 0..community_count-1
    std::uint32_t community_count = 0;
    double modularity = 0.0;
    // modularity trace: [0] = all-singletons baseline, then after each pass
    std::vector<double> pass_modularity;
};

namespace detail {

// One local-moving phase on g starting from the singleton partition;
// returns the node->community assignment (not renumbered). Node visit order
// is shuffled once per phase by rng.
inline bool local_moving(const WeightedGraph& g, std::vector<std::uint32_t>& comm,
                         double resolution, Xoshiro256ss& rng) {
    const std::size_t n = g.node_count();
    const double m = g.total_weight;
    std::vector<double> community_total(n);
    for (node_t u = 0; u < n; ++u) community_total[comm[u]] += g.strength[u];

    std::vector<node_t> order(n);
    std::iota(order.begin(), order.end(), node_t{0});
    rng.shuffle(order);

    std::vector<double> weight_to(n, 0.0);
    std::vector<std::uint32_t> touched;
    bool any_move = false;
    bool moved_this_sweep = true;
    while (moved_this_sweep) {
        moved_this_sweep = false;
        for (node_t u : order) {
            const std::uint32_t old_c = comm[u];
            touched.clear();
            for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
                const node_t v = g.targets[k];
                if (v == u) continue;
                const std::uint32_t c = comm[v];
                if (weight_to[c] == 0.0) touched.push_back(c);
                weight_to[c] += g.weights[k];
            }
            community_total[old_c] -= g.strength[u];
            const double k_u = g.strength[u];
            auto gain = [&](std::uint32_t c) {
                return weight_to[c] / m -
                       resolution * k_u * community_total[c] / (2.0 * m * m);
            };
            std::uint32_t best = old_c;
            double best_gain = gain(old_c);
            for (std::uint32_t c : touched) {
                const double cand = gain(c);
                if (cand > best_gain + 1e-12) {
                    best_gain = cand;
                    best = c;
                }
            }
            community_total[best] += k_u;
            if (best != old_c) {
                comm[u] = best;
                moved_this_sweep = true;
                any_move = true;
            }
            for (std::uint32_t c : touched) weight_to[c] = 0.0;
            weight_to[old_c] = 0.0;
        }
    }
    return any_move;
}

inline std::uint32_t renumber(std::vector<std::uint32_t>& comm) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    remap.reserve(comm.size());
    for (auto& c : comm) {
        const auto [it, inserted] =
            remap.try_emplace(c, static_cast<std::uint32_t>(remap.size()));
        c = it->second;
    }
    return static_cast<std::uint32_t>(remap.size());
}

inline WeightedGraph aggregate(const WeightedGraph& g,
                               std::span<const std::uint32_t> comm,
                               std::uint32_t c_count) {
    WeightedGraph agg;
    agg.self_loop.assign(c_count, 0.0);
    agg.strength.assign(c_count, 0.0);
    std::vector<std::unordered_map<std::uint32_t, double>> adj(c_count);
    for (node_t u = 0; u < g.node_count(); ++u) {
        const std::uint32_t cu = comm[u];
        agg.self_loop[cu] += g.self_loop[u];
        for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const std::uint32_t cv = comm[g.targets[k]];
            if (cu == cv) {
                agg.self_loop[cu] += g.weights[k] / 2.0;  // each edge seen twice
            } else {
                adj[cu][cv] += g.weights[k];
            }
        }
    }
    agg.offsets.assign(c_count + 1, 0);
    for (std::uint32_t c = 0; c < c_count; ++c) {
        agg.offsets[c + 1] = agg.offsets[c] + adj[c].size();
    }
    agg.targets.resize(agg.offsets[c_count]);
    agg.weights.resize(agg.offsets[c_count]);
    for (std::uint32_t c = 0; c < c_count; ++c) {
        std::size_t w = agg.offsets[c];
        std::vector<std::pair<std::uint32_t, double>> sorted(adj[c].begin(), adj[c].end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [v, weight] : sorted) {
            agg.targets[w] = v;
            agg.weights[w] = weight;
            ++w;
        }
    }
    for (std::uint32_t c = 0; c < c_count; ++c) {
        agg.strength[c] = 2.0 * agg.self_loop[c];
        for (std::size_t k = agg.offsets[c]; k < agg.offsets[c + 1]; ++k) {
            agg.strength[c] += agg.weights[k];
        }
    }
    agg.total_weight = g.total_weight;
    return agg;
}

}  // namespace detail

// Two-phase Louvain on the undirected weight-1 projection. Deterministic for
// a given (network, resolution, seed); terminates when a full pass moves no
// node. Isolated nodes keep singleton communities.
inline Partition louvain(const FollowNetwork& net, double resolution = 1.0,
                         std::uint64_t seed = 0) {
    if (net.node_count() == 0) {
        throw precondition_error("louvain: empty network");
    }
    const WeightedGraph base = undirected_projection(net);
    Partition part;
    part.community.resize(net.node_count());
    std::iota(part.community.begin(), part.community.end(), 0u);
    part.pass_modularity.push_back(modularity(base, part.community, resolution));

    WeightedGraph level_graph = base;
    std::vector<std::uint32_t> level_comm(level_graph.node_count());
    std::iota(level_comm.begin(), level_comm.end(), 0u);

    for (std::uint64_t pass = 0;; ++pass) {
        std::iota(level_comm.begin(), level_comm.end(), 0u);
        Xoshiro256ss rng(derive_seed(seed, 0x6c6f7576ULL, pass));
        const bool moved = detail::local_moving(level_graph, level_comm, resolution, rng);
        if (!moved) break;
        const std::uint32_t c_count = detail::renumber(level_comm);
        for (auto& c : part.community) c = level_comm[c];
        part.pass_modularity.push_back(modularity(base, part.community, resolution));
        if (c_count == level_graph.node_count()) break;
        level_graph = detail::aggregate(level_graph, level_comm, c_count);
        level_comm.assign(c_count, 0);
    }
    part.community_count = detail::renumber(part.community);
    part.modularity = modularity(base, part.community, resolution);
    return part;
}

// Share of reposts whose reposter sits in the author's community, per link
// type, pooled over cascades.
struct RatioCount {
    std::uint64_t intra = 0;
    std::uint64_t total = 0;
    bool defined() const { return total > 0; }
    double value() const { return static_cast<double>(intra) / static_cast<double>(total); }
};

struct IntraCommunityRatios {
    RatioCount explicit_links;
    RatioCount implicit_links;
};

inline IntraCommunityRatios intra_community_ratio(
    const std::vector<Cascade>& cascades, const std::vector<DiffusionGraph>& graphs,
    const Partition& partition) {
    IntraCommunityRatios out;
    for (std::size_t c = 0; c < cascades.size(); ++c) {
        const std::uint32_t author_comm = partition.community.at(cascades[c].author);
        const DiffusionGraph& dg = graphs[c];
        for (std::uint32_t i = 0; i < dg.size(); ++i) {
            RatioCount& rc = dg.explicit_link[i] ? out.explicit_links : out.implicit_links;
            ++rc.total;
            if (partition.community.at(cascades[c].reposts[i].user) == author_comm) {
                ++rc.intra;
            }
        }
    }
    return out;
}

}  // namespace implink
