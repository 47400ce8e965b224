#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "implink/follow_network.hpp"
#include "implink/parallel.hpp"
#include "implink/parsing.hpp"
#include "implink/types.hpp"

namespace implink {

struct RepostEvent {
    node_t user;
    std::int64_t time;
};

// One original post plus its reposts, ordered by (timestamp, log position).
// Invariants: no repost by the author, at most one repost per user, every
// repost time >= post_time.
struct Cascade {
    ext_id_t tweet_id = 0;
    node_t author = invalid_node;
    std::int64_t post_time = 0;
    std::vector<RepostEvent> reposts;

    std::size_t size() const { return reposts.size(); }
};

struct CascadeLoadStats {
    std::uint64_t post_records = 0;
    std::uint64_t repost_records = 0;
    std::uint64_t posts_kept = 0;
    std::uint64_t reposts_kept = 0;
    std::uint64_t duplicate_posts_dropped = 0;
    std::uint64_t unknown_tweet_reposts_dropped = 0;
    std::uint64_t self_reposts_dropped = 0;
    std::uint64_t duplicate_user_reposts_dropped = 0;
    std::uint64_t pre_post_reposts_dropped = 0;
    std::uint64_t other_interactions_skipped = 0;  // activity-log adapter only
};

namespace detail {

struct RawRepost {
    node_t user;
    std::int64_t time;
    std::uint64_t log_index;
};

// Sort by (time, log order), drop duplicate users keeping the earliest event.
inline void finalize_reposts(std::vector<RawRepost>& raw, Cascade& cascade,
                             CascadeLoadStats& stats) {
    std::sort(raw.begin(), raw.end(), [](const RawRepost& a, const RawRepost& b) {
        return a.time != b.time ? a.time < b.time : a.log_index < b.log_index;
    });
    std::unordered_set<node_t> seen;
    seen.reserve(raw.size());
    cascade.reposts.reserve(raw.size());
    for (const RawRepost& r : raw) {
        if (!seen.insert(r.user).second) {
            ++stats.duplicate_user_reposts_dropped;
            continue;
        }
        cascade.reposts.push_back({r.user, r.time});
    }
    stats.reposts_kept += cascade.reposts.size();
}

}  // namespace detail

// Post file: tweet_id <TAB> author_id <TAB> unix_time.
// Repost file: tweet_id <TAB> user_id <TAB> unix_time.
// Cascade users are interned into the shared builder so that users absent
// from the edge file become isolated nodes of the final network.
inline std::vector<Cascade> load_cascades(std::istream& posts, std::istream& reposts,
                                          NetworkBuilder& builder,
                                          CascadeLoadStats* stats_out = nullptr,
                                          const std::string& posts_source = "posts",
                                          const std::string& reposts_source = "reposts") {
    CascadeLoadStats stats;
    std::vector<Cascade> cascades;
    std::unordered_map<ext_id_t, std::size_t> by_tweet;

    std::string line;
    std::string_view fields[4];
    std::size_t line_no = 0;
    while (detail::read_line(posts, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        if (detail::split_fields(line, fields, 3) != 3) {
            throw parse_error(posts_source, line_no, "expected 3 fields");
        }
        ++stats.post_records;
        const ext_id_t tweet = detail::parse_u64(fields[0], posts_source, line_no);
        const ext_id_t author = detail::parse_u64(fields[1], posts_source, line_no);
        const std::int64_t time = detail::parse_i64(fields[2], posts_source, line_no);
        if (by_tweet.count(tweet)) {
            ++stats.duplicate_posts_dropped;
            continue;
        }
        by_tweet.emplace(tweet, cascades.size());
        Cascade c;
        c.tweet_id = tweet;
        c.author = builder.intern(author);
        c.post_time = time;
        cascades.push_back(std::move(c));
    }
    stats.posts_kept = cascades.size();

    std::vector<std::vector<detail::RawRepost>> raw(cascades.size());
    line_no = 0;
    std::uint64_t log_index = 0;
    while (detail::read_line(reposts, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        if (detail::split_fields(line, fields, 3) != 3) {
            throw parse_error(reposts_source, line_no, "expected 3 fields");
        }
        ++stats.repost_records;
        const ext_id_t tweet = detail::parse_u64(fields[0], reposts_source, line_no);
        const ext_id_t user = detail::parse_u64(fields[1], reposts_source, line_no);
        const std::int64_t time = detail::parse_i64(fields[2], reposts_source, line_no);
        const auto it = by_tweet.find(tweet);
        if (it == by_tweet.end()) {
            ++stats.unknown_tweet_reposts_dropped;
            continue;
        }
        Cascade& cascade = cascades[it->second];
        if (time < cascade.post_time) {
            ++stats.pre_post_reposts_dropped;
            continue;
        }
        const node_t u = builder.intern(user);
        if (u == cascade.author) {
            ++stats.self_reposts_dropped;
            continue;
        }
        raw[it->second].push_back({u, time, log_index++});
    }
    for (std::size_t i = 0; i < cascades.size(); ++i) {
        detail::finalize_reposts(raw[i], cascades[i], stats);
    }
    if (stats_out) *stats_out = stats;
    return cascades;
}

// SNAP-style activity log: user_a <SP> user_b <SP> time <SP> interaction,
// "user_a reposted user_b". Records whose interaction differs from
// interaction_tag are skipped. One cascade per reposted author; the author's
// (unobserved) post time is taken as the earliest repost time.
inline std::vector<Cascade> load_activity_cascades(
    std::istream& activity, NetworkBuilder& builder,
    const std::string& interaction_tag = "RT", CascadeLoadStats* stats_out = nullptr,
    const std::string& source = "activity") {
    CascadeLoadStats stats;
    std::vector<Cascade> cascades;
    std::unordered_map<ext_id_t, std::size_t> by_author;
    std::vector<std::vector<detail::RawRepost>> raw;

    std::string line;
    std::string_view fields[5];
    std::size_t line_no = 0;
    std::uint64_t log_index = 0;
    while (detail::read_line(activity, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        if (detail::split_fields(line, fields, 4) != 4) {
            throw parse_error(source, line_no, "expected 4 fields");
        }
        if (fields[3] != interaction_tag) {
            ++stats.other_interactions_skipped;
            continue;
        }
        ++stats.repost_records;
        const ext_id_t reposter = detail::parse_u64(fields[0], source, line_no);
        const ext_id_t author = detail::parse_u64(fields[1], source, line_no);
        const std::int64_t time = detail::parse_i64(fields[2], source, line_no);
        if (reposter == author) {
            ++stats.self_reposts_dropped;
            continue;
        }
        auto [it, inserted] = by_author.try_emplace(author, cascades.size());
        if (inserted) {
            Cascade c;
            c.tweet_id = author;  // synthetic: one cascade per reposted author
            c.author = builder.intern(author);
            c.post_time = time;
            cascades.push_back(std::move(c));
            raw.emplace_back();
        }
        Cascade& cascade = cascades[it->second];
        cascade.post_time = std::min(cascade.post_time, time);
        raw[it->second].push_back({builder.intern(reposter), time, log_index++});
    }
    stats.post_records = cascades.size();
    stats.posts_kept = cascades.size();
    for (std::size_t i = 0; i < cascades.size(); ++i) {
        detail::finalize_reposts(raw[i], cascades[i], stats);
    }
    if (stats_out) *stats_out = stats;
    return cascades;
}

// Inferred propagation structure of one cascade. An edge (u, v) exists when v
// follows u and u's post/repost strictly precedes v's repost in the
// (timestamp, log order) total order; the author's post precedes everything.
// A repost is explicit iff it has at least one such in-edge.
struct DiffusionGraph {
    std::uint32_t cascade_index = 0;
    std::vector<std::uint8_t> explicit_link;             // per repost
    std::vector<std::uint8_t> follows_author;            // author in-edge present
    std::vector<hop_t> source_distance;                  // influence distance from author
    std::vector<std::vector<std::uint32_t>> predecessors;  // B sets, ascending repost idx
    std::size_t explicit_count = 0;
    std::size_t implicit_count = 0;

    std::size_t size() const { return explicit_link.size(); }
};

// distances: per-node influence distance from the cascade author (full network).
inline DiffusionGraph build_diffusion_graph(const Cascade& cascade,
                                            const FollowNetwork& net,
                                            const BfsScratch& distances) {
    const std::size_t k = cascade.reposts.size();
    DiffusionGraph dg;
    dg.explicit_link.assign(k, 0);
    dg.follows_author.assign(k, 0);
    dg.source_distance.assign(k, unreachable_hops);
    dg.predecessors.assign(k, {});

    std::unordered_map<node_t, std::uint32_t> position;
    position.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const node_t v = cascade.reposts[i].user;
        dg.source_distance[i] = distances.distance_of(v);
        dg.follows_author[i] = net.follows(v, cascade.author) ? 1 : 0;

        auto& preds = dg.predecessors[i];
        const auto fol = net.followees(v);
        // pick the cheaper membership direction
        if (fol.size() <= static_cast<std::size_t>(i) * 4) {
            for (node_t f : fol) {
                const auto it = position.find(f);
                if (it != position.end()) preds.push_back(it->second);
            }
            std::sort(preds.begin(), preds.end());
        } else {
            for (std::uint32_t j = 0; j < i; ++j) {
                if (net.follows(v, cascade.reposts[j].user)) preds.push_back(j);
            }
        }
        dg.explicit_link[i] = (dg.follows_author[i] || !preds.empty()) ? 1 : 0;
        dg.explicit_link[i] ? ++dg.explicit_count : ++dg.implicit_count;
        position.emplace(v, i);
    }
    return dg;
}

inline DiffusionGraph build_diffusion_graph(const Cascade& cascade,
                                            const FollowNetwork& net) {
    BfsScratch scratch;
    scratch.run(net, cascade.author);
    return build_diffusion_graph(cascade, net, scratch);
}

// B(v): earlier reposts by users v follows. The original post never appears
// (a repost can be explicit via the author yet have an empty B).
inline std::span<const std::uint32_t> predecessor_set(const DiffusionGraph& dg,
                                                      std::uint32_t repost) {
    return dg.predecessors.at(repost);
}

// F(w) = { v : w in B(v) }: reposts possibly influenced by w.
inline std::vector<std::vector<std::uint32_t>> successor_sets(const DiffusionGraph& dg) {
    std::vector<std::vector<std::uint32_t>> succ(dg.size());
    for (std::uint32_t v = 0; v < dg.size(); ++v) {
        for (std::uint32_t w : dg.predecessors[v]) succ[w].push_back(v);
    }
    return succ;
}

// E_t as explicit (source, target) node pairs, author edges included.
inline std::vector<std::pair<node_t, node_t>> diffusion_edges(const Cascade& cascade,
                                                              const DiffusionGraph& dg) {
    std::vector<std::pair<node_t, node_t>> edges;
    for (std::uint32_t i = 0; i < dg.size(); ++i) {
        const node_t v = cascade.reposts[i].user;
        if (dg.follows_author[i]) edges.emplace_back(cascade.author, v);
        for (std::uint32_t j : dg.predecessors[i]) {
            edges.emplace_back(cascade.reposts[j].user, v);
        }
    }
    return edges;
}

struct DistanceProfileRow {
    hop_t distance = 0;  // unreachable_hops for the no-follow-path row
    std::uint64_t users_at_distance = 0;
    std::uint64_t reposting_users = 0;
    std::uint64_t implicit_reposts = 0;
    std::uint64_t explicit_reposts = 0;
};

// Pooled over cascades; a user contributes to users_at_distance once per
// cascade in which they sit at that distance from its author.
struct DistanceProfile {
    std::vector<DistanceProfileRow> rows;  // finite distances, ascending
    DistanceProfileRow unreachable;        // distance == unreachable_hops
};

inline DistanceProfile distance_profile(const std::vector<Cascade>& cascades,
                                        const std::vector<DiffusionGraph>& graphs,
                                        const FollowNetwork& net,
                                        unsigned workers = 1) {
    const unsigned w = resolve_workers(workers);
    std::vector<DistanceProfile> partial(w);
    parallel_chunks(cascades.size(), w, [&](unsigned worker, std::size_t begin,
                                            std::size_t end) {
        BfsScratch scratch;
        DistanceProfile& acc = partial[worker];
        acc.unreachable.distance = unreachable_hops;
        for (std::size_t c = begin; c < end; ++c) {
            scratch.run(net, cascades[c].author);
            const hop_t max_d = scratch.max_level();
            if (acc.rows.size() < static_cast<std::size_t>(max_d)) {
                acc.rows.resize(static_cast<std::size_t>(max_d));
            }
            for (hop_t d = 1; d <= max_d; ++d) {
                auto& row = acc.rows[static_cast<std::size_t>(d - 1)];
                row.distance = d;
                row.users_at_distance += scratch.level_nodes(d).size();
            }
            acc.unreachable.users_at_distance += scratch.unreached_count();
            const DiffusionGraph& dg = graphs[c];
            for (std::uint32_t i = 0; i < dg.size(); ++i) {
                const hop_t d = dg.source_distance[i];
                DistanceProfileRow& row =
                    d == unreachable_hops ? acc.unreachable
                                          : acc.rows[static_cast<std::size_t>(d - 1)];
                ++row.reposting_users;
                dg.explicit_link[i] ? ++row.explicit_reposts : ++row.implicit_reposts;
            }
        }
    });

    DistanceProfile merged;
    merged.unreachable.distance = unreachable_hops;
    for (const auto& part : partial) {
        if (merged.rows.size() < part.rows.size()) merged.rows.resize(part.rows.size());
        for (std::size_t i = 0; i < part.rows.size(); ++i) {
            auto& row = merged.rows[i];
            row.distance = static_cast<hop_t>(i + 1);
            row.users_at_distance += part.rows[i].users_at_distance;
            row.reposting_users += part.rows[i].reposting_users;
            row.implicit_reposts += part.rows[i].implicit_reposts;
            row.explicit_reposts += part.rows[i].explicit_reposts;
        }
        merged.unreachable.users_at_distance += part.unreachable.users_at_distance;
        merged.unreachable.reposting_users += part.unreachable.reposting_users;
        merged.unreachable.implicit_reposts += part.unreachable.implicit_reposts;
        merged.unreachable.explicit_reposts += part.unreachable.explicit_reposts;
    }
    return merged;
}

}  // namespace implink
