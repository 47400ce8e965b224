#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "implink/parsing.hpp"
#include "implink/types.hpp"

namespace implink {

struct NetworkLoadStats {
    std::uint64_t edge_records = 0;
    std::uint64_t self_loops_dropped = 0;
    std::uint64_t duplicate_edges_dropped = 0;
    std::uint64_t users_from_edges = 0;
    std::uint64_t users_added_by_cascades = 0;
};

class FollowNetwork;

// Interns external ids densely in first-seen order and collects raw follow
// records; build() produces the immutable indexed network.
class NetworkBuilder {
public:
    node_t intern(ext_id_t id) {
        const auto [it, inserted] =
            index_.try_emplace(id, static_cast<node_t>(ids_.size()));
        if (inserted) ids_.push_back(id);
        return it->second;
    }

    bool known(ext_id_t id) const { return index_.count(id) != 0; }
    std::size_t node_count() const { return ids_.size(); }

    // Call once after the edge file is consumed; users interned later (from
    // cascade files) are counted as cascade-only additions in the load stats.
    void snapshot_edge_users() {
        edge_users_ = ids_.size();
        edge_users_snapshotted_ = true;
    }

    // record semantics: (follower, followee). Self-loops dropped here;
    // duplicates dropped (and counted) at build time.
    void add_follow(ext_id_t follower, ext_id_t followee) {
        ++stats_.edge_records;
        if (follower == followee) {
            ++stats_.self_loops_dropped;
            return;
        }
        edges_.emplace_back(intern(follower), intern(followee));
    }

    FollowNetwork build() &&;

private:
    std::unordered_map<ext_id_t, node_t> index_;
    std::vector<ext_id_t> ids_;
    std::vector<std::pair<node_t, node_t>> edges_;  // (follower, followee)
    NetworkLoadStats stats_;
    std::size_t edge_users_ = 0;
    bool edge_users_snapshotted_ = false;
    friend class FollowNetwork;
};

// Immutable directed follow network with dense node indices and sorted CSR
// adjacency in both directions. followees(u) = users u follows (information
// sources); followers(u) = users who follow u (where u's activity can travel).
class FollowNetwork {
public:
    FollowNetwork() = default;

    std::size_t node_count() const { return user_ids_.size(); }
    std::size_t edge_count() const { return followee_targets_.size(); }

    ext_id_t user_id(node_t u) const { return user_ids_[check(u)]; }

    node_t node_of(ext_id_t id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) {
            throw std::out_of_range("unknown user id " + std::to_string(id));
        }
        return it->second;
    }
    bool has_user(ext_id_t id) const { return index_.count(id) != 0; }

    std::span<const node_t> followees(node_t u) const {
        check(u);
        return {followee_targets_.data() + followee_offsets_[u],
                followee_offsets_[u + 1] - followee_offsets_[u]};
    }
    std::span<const node_t> followers(node_t u) const {
        check(u);
        return {follower_targets_.data() + follower_offsets_[u],
                follower_offsets_[u + 1] - follower_offsets_[u]};
    }

    bool follows(node_t follower, node_t followee) const {
        const auto adj = followees(follower);
        return std::binary_search(adj.begin(), adj.end(), check(followee));
    }

    const NetworkLoadStats& load_stats() const { return stats_; }
    const std::vector<ext_id_t>& user_ids() const { return user_ids_; }

private:
    node_t check(node_t u) const {
        if (u >= user_ids_.size()) {
            throw std::out_of_range("node index " + std::to_string(u) +
                                    " out of range (node_count = " +
                                    std::to_string(user_ids_.size()) + ")");
        }
        return u;
    }

    std::vector<ext_id_t> user_ids_;
    std::unordered_map<ext_id_t, node_t> index_;
    std::vector<std::size_t> followee_offsets_;
    std::vector<node_t> followee_targets_;
    std::vector<std::size_t> follower_offsets_;
    std::vector<node_t> follower_targets_;
    NetworkLoadStats stats_;
    friend class NetworkBuilder;
};

inline FollowNetwork NetworkBuilder::build() && {
    FollowNetwork net;
    const std::size_t n = ids_.size();
    net.user_ids_ = std::move(ids_);
    net.index_ = std::move(index_);
    net.stats_ = stats_;
    net.stats_.users_from_edges = edge_users_snapshotted_ ? edge_users_ : n;
    net.stats_.users_added_by_cascades =
        edge_users_snapshotted_ ? n - edge_users_ : 0;

    // followee CSR: bucket by follower, then sort + dedupe each list.
    std::vector<std::size_t> counts(n + 1, 0);
    for (const auto& [from, to] : edges_) ++counts[from + 1];
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + counts[i + 1];
    std::vector<node_t> targets(edges_.size());
    {
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const auto& [from, to] : edges_) targets[cursor[from]++] = to;
    }
    edges_.clear();
    edges_.shrink_to_fit();

    net.followee_offsets_.assign(n + 1, 0);
    net.followee_targets_.reserve(targets.size());
    for (std::size_t u = 0; u < n; ++u) {
        const auto begin = targets.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
        const auto end = targets.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
        std::sort(begin, end);
        const auto unique_end = std::unique(begin, end);
        net.stats_.duplicate_edges_dropped +=
            static_cast<std::uint64_t>(end - unique_end);
        net.followee_targets_.insert(net.followee_targets_.end(), begin, unique_end);
        net.followee_offsets_[u + 1] = net.followee_targets_.size();
    }
    targets.clear();
    targets.shrink_to_fit();

    // follower CSR = exact transpose.
    net.follower_offsets_.assign(n + 1, 0);
    for (node_t to : net.followee_targets_) ++net.follower_offsets_[to + 1];
    for (std::size_t i = 0; i < n; ++i) {
        net.follower_offsets_[i + 1] += net.follower_offsets_[i];
    }
    net.follower_targets_.resize(net.followee_targets_.size());
    {
        std::vector<std::size_t> cursor(net.follower_offsets_.begin(),
                                        net.follower_offsets_.end() - 1);
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t k = net.followee_offsets_[u]; k < net.followee_offsets_[u + 1];
                 ++k) {
                net.follower_targets_[cursor[net.followee_targets_[k]]++] =
                    static_cast<node_t>(u);
            }
        }
    }
    // transpose buckets are filled in ascending source order, so already sorted
    return net;
}

// Edge list: one record per line, two integer fields (follower, followee),
// tab/space separated; blank lines and '#' comments skipped. swap_columns
// flips the convention for datasets that store (followee, follower).
inline void load_edges(std::istream& in, NetworkBuilder& builder,
                       bool swap_columns = false,
                       const std::string& source = "edges") {
    std::string line;
    std::size_t line_no = 0;
    std::string_view fields[3];
    while (detail::read_line(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        const std::size_t arity = detail::split_fields(line, fields, 2);
        if (arity != 2) {
            throw parse_error(source, line_no,
                              "expected 2 fields, got " + std::to_string(arity));
        }
        ext_id_t a = detail::parse_u64(fields[0], source, line_no);
        ext_id_t b = detail::parse_u64(fields[1], source, line_no);
        if (swap_columns) std::swap(a, b);
        builder.add_follow(a, b);
    }
}

inline FollowNetwork load_network(std::istream& in, bool swap_columns = false,
                                  const std::string& source = "edges") {
    NetworkBuilder builder;
    load_edges(in, builder, swap_columns, source);
    return std::move(builder).build();
}

// Canonical serialization: "follower<TAB>followee" external ids in ascending
// (follower, followee) order, so the output is independent of interning order
// and reloading it reproduces the byte-identical serialization.
inline void write_edge_list(const FollowNetwork& net, std::ostream& out) {
    std::vector<std::pair<ext_id_t, ext_id_t>> edges;
    edges.reserve(net.edge_count());
    for (node_t u = 0; u < net.node_count(); ++u) {
        for (node_t v : net.followees(u)) {
            edges.emplace_back(net.user_id(u), net.user_id(v));
        }
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& [follower, followee] : edges) {
        out << follower << '\t' << followee << '\n';
    }
}

// Reusable BFS state; reset is O(1) via epoch stamps, so one scratch instance
// serves thousands of per-cascade traversals.
class BfsScratch {
public:
    // BFS from source stepping u -> followers(u): the direction information
    // travels. Visit order and levels stay readable until the next run.
    void run(const FollowNetwork& net, node_t source) {
        run_impl(net.node_count(), source, -1, [&](node_t u, hop_t depth) {
            for (node_t v : net.followers(u)) {
                if (stamp_[v] != epoch_) visit(v, depth);
            }
        });
    }

    // Undirected BFS over a symmetric CSR (offsets/targets), optionally depth
    // limited. Used for mutual-graph distance queries.
    void run_undirected(std::span<const std::size_t> offsets,
                        std::span<const node_t> targets, node_t source,
                        hop_t max_depth = -1) {
        run_impl(offsets.size() - 1, source, max_depth, [&](node_t u, hop_t depth) {
            for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) {
                const node_t v = targets[k];
                if (stamp_[v] != epoch_) visit(v, depth);
            }
        });
    }

    hop_t distance_of(node_t v) const {
        return stamp_[v] == epoch_ ? level_[v] : unreachable_hops;
    }
    // nodes in visit order; level boundaries via level_starts
    std::span<const node_t> visited() const { return order_; }
    // nodes at exactly distance d (d=0 is the source)
    std::span<const node_t> level_nodes(hop_t d) const {
        const auto ud = static_cast<std::size_t>(d);
        if (d < 0 || ud + 1 >= level_starts_.size()) return {};
        return {order_.data() + level_starts_[ud], level_starts_[ud + 1] - level_starts_[ud]};
    }
    hop_t max_level() const { return static_cast<hop_t>(level_starts_.size()) - 2; }
    std::size_t reached_count() const { return order_.size(); }
    std::size_t unreached_count() const { return node_count_ - order_.size(); }

private:
    template <class Expand>
    void run_impl(std::size_t n, node_t source, hop_t max_depth, Expand&& expand) {
        prepare(n);
        node_count_ = n;
        visit(source, 0);
        level_starts_.assign(1, 0);
        std::size_t level_begin = 0;
        hop_t depth = 0;
        while (level_begin < order_.size()) {
            const std::size_t level_end = order_.size();
            level_starts_.push_back(level_end);
            ++depth;
            if (max_depth >= 0 && depth > max_depth) break;
            for (std::size_t h = level_begin; h < level_end; ++h) {
                expand(order_[h], depth);
            }
            level_begin = level_end;
        }
    }

    void prepare(std::size_t n) {
        if (stamp_.size() < n) {
            stamp_.assign(n, 0);
            level_.assign(n, 0);
        }
        ++epoch_;
        order_.clear();
    }
    void visit(node_t v, hop_t d) {
        stamp_[v] = epoch_;
        level_[v] = d;
        order_.push_back(v);
    }

    std::vector<std::uint32_t> stamp_;
    std::vector<hop_t> level_;
    std::vector<node_t> order_;
    std::vector<std::size_t> level_starts_;
    std::uint32_t epoch_ = 0;
    std::size_t node_count_ = 0;
};

// Full per-node influence distance from source (hops along follow ties in the
// direction information travels); unreachable_hops where no path exists.
inline std::vector<hop_t> influence_distance(const FollowNetwork& net, node_t source) {
    if (source >= net.node_count()) {
        throw std::out_of_range("influence_distance: source out of range");
    }
    BfsScratch scratch;
    scratch.run(net, source);
    std::vector<hop_t> dist(net.node_count(), unreachable_hops);
    for (node_t v : scratch.visited()) dist[v] = scratch.distance_of(v);
    return dist;
}

// Undirected graph of reciprocated follow ties.
struct MutualGraph {
    std::vector<std::size_t> offsets;
    std::vector<node_t> targets;

    std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t edge_count() const { return targets.size() / 2; }
    std::span<const node_t> neighbors(node_t u) const {
        if (u >= node_count()) {
            throw std::out_of_range("MutualGraph: node out of range");
        }
        return {targets.data() + offsets[u], offsets[u + 1] - offsets[u]};
    }
    std::size_t degree(node_t u) const { return neighbors(u).size(); }
};

// Edge (u,v) present iff u follows v and v follows u.
inline MutualGraph mutual_graph(const FollowNetwork& net) {
    const std::size_t n = net.node_count();
    MutualGraph mg;
    mg.offsets.assign(n + 1, 0);
    for (node_t u = 0; u < n; ++u) {
        const auto out = net.followees(u);
        const auto in = net.followers(u);
        std::size_t i = 0, j = 0, count = 0;
        while (i < out.size() && j < in.size()) {
            if (out[i] < in[j]) {
                ++i;
            } else if (in[j] < out[i]) {
                ++j;
            } else {
                ++count, ++i, ++j;
            }
        }
        mg.offsets[u + 1] = mg.offsets[u] + count;
    }
    mg.targets.resize(mg.offsets[n]);
    for (node_t u = 0; u < n; ++u) {
        const auto out = net.followees(u);
        const auto in = net.followers(u);
        std::size_t i = 0, j = 0, w = mg.offsets[u];
        while (i < out.size() && j < in.size()) {
            if (out[i] < in[j]) {
                ++i;
            } else if (in[j] < out[i]) {
                ++j;
            } else {
                mg.targets[w++] = out[i];
                ++i, ++j;
            }
        }
    }
    return mg;
}

// All nodes at shortest-path distance exactly d from u in the mutual graph,
// ascending. d >= 1.
inline std::vector<node_t> exact_distance_bucket(const MutualGraph& mg, node_t u,
                                                 hop_t d) {
    if (d < 1) throw std::invalid_argument("exact_distance_bucket: d must be >= 1");
    if (u >= mg.node_count()) {
        throw std::out_of_range("exact_distance_bucket: node out of range");
    }
    BfsScratch scratch;
    scratch.run_undirected(mg.offsets, mg.targets, u, d);
    const auto level = scratch.level_nodes(d);
    std::vector<node_t> bucket(level.begin(), level.end());
    std::sort(bucket.begin(), bucket.end());
    return bucket;
}

}  // namespace implink
