#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "implink/follow_network.hpp"
#include "implink/stats.hpp"
#include "implink/types.hpp"

namespace implink {

enum class AdjacencyKind { followees, followers, mutual };

inline const char* adjacency_name(AdjacencyKind kind) {
    switch (kind) {
        case AdjacencyKind::followees: return "followees";
        case AdjacencyKind::followers: return "followers";
        default: return "mutual";
    }
}

// Metric values over a filtered user population.
struct MetricSample {
    std::vector<node_t> users;
    std::vector<double> values;
    std::size_t size() const { return users.size(); }
};

// (own value, mean value of qualifying neighbors) for every population member
// with at least one neighbor also in the population. Neighbors outside the
// population are ignored, not imputed.
inline std::vector<std::pair<double, double>> neighbor_average_pairs(
    const MetricSample& sample, const FollowNetwork& net, const MutualGraph& mutual,
    AdjacencyKind kind) {
    std::unordered_map<node_t, double> value_of;
    value_of.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        value_of.emplace(sample.users[i], sample.values[i]);
    }
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const node_t u = sample.users[i];
        std::span<const node_t> neighbors;
        switch (kind) {
            case AdjacencyKind::followees: neighbors = net.followees(u); break;
            case AdjacencyKind::followers: neighbors = net.followers(u); break;
            case AdjacencyKind::mutual: neighbors = mutual.neighbors(u); break;
        }
        stats::NeumaierSum sum;
        std::size_t count = 0;
        for (node_t v : neighbors) {
            const auto it = value_of.find(v);
            if (it != value_of.end()) {
                sum.add(it->second);
                ++count;
            }
        }
        if (count > 0) {
            pairs.emplace_back(sample.values[i], sum.value() / static_cast<double>(count));
        }
    }
    return pairs;
}

// Mutual graph induced on a population (node set re-indexed 0..k-1 in the
// order given). Distance analyses run on this subgraph so every node carries
// a metric value.
inline MutualGraph induce_mutual(const MutualGraph& mutual,
                                 std::span<const node_t> keep) {
    std::unordered_map<node_t, node_t> to_new;
    to_new.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        to_new.emplace(keep[i], static_cast<node_t>(i));
    }
    MutualGraph sub;
    sub.offsets.assign(keep.size() + 1, 0);
    std::vector<std::vector<node_t>> adj(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        for (node_t v : mutual.neighbors(keep[i])) {
            const auto it = to_new.find(v);
            if (it != to_new.end()) adj[i].push_back(it->second);
        }
    }
    for (std::size_t i = 0; i < keep.size(); ++i) {
        sub.offsets[i + 1] = sub.offsets[i] + adj[i].size();
    }
    sub.targets.reserve(sub.offsets.back());
    for (const auto& list : adj) {
        sub.targets.insert(sub.targets.end(), list.begin(), list.end());
    }
    return sub;
}

struct DistanceAverages {
    std::vector<std::pair<double, double>> pairs;
    double mean_share = 0.0;  // mean over users of |bucket_d| / (population - 1)
};

// (own value, mean value of users at exactly distance d) in the given mutual
// graph; values indexed by node. Users with empty buckets are excluded from
// pairs but still enter mean_share with share 0.
inline DistanceAverages distance_average_pairs(std::span<const double> values,
                                               const MutualGraph& mutual, hop_t d) {
    if (d < 1) throw std::invalid_argument("distance_average_pairs: d must be >= 1");
    DistanceAverages out;
    const std::size_t n = mutual.node_count();
    if (n < 2) return out;
    BfsScratch scratch;
    stats::NeumaierSum share_sum;
    for (node_t u = 0; u < n; ++u) {
        scratch.run_undirected(mutual.offsets, mutual.targets, u, d);
        const auto bucket = scratch.level_nodes(d);
        share_sum.add(static_cast<double>(bucket.size()) / static_cast<double>(n - 1));
        if (bucket.empty()) continue;
        stats::NeumaierSum sum;
        for (node_t v : bucket) sum.add(values[v]);
        out.pairs.emplace_back(values[u], sum.value() / static_cast<double>(bucket.size()));
    }
    out.mean_share = share_sum.value() / static_cast<double>(n);
    return out;
}

inline stats::Correlation spearman_with_p(
    std::span<const std::pair<double, double>> pairs) {
    std::vector<double> x(pairs.size()), y(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        x[i] = pairs[i].first;
        y[i] = pairs[i].second;
    }
    return stats::spearman(x, y);
}

// One exported correlation row (adjacency kinds and exact distances share the
// same shape).
struct CorrelationRow {
    std::string metric;
    std::string mode;  // "adjacency" | "distance"
    std::string key;   // adjacency name or distance value
    std::optional<double> rho;
    std::optional<double> p_value;
    std::size_t n_pairs = 0;
    std::optional<double> share;  // distance rows only
};

}  // namespace implink
