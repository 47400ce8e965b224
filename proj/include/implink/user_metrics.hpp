#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "implink/cascade.hpp"
#include "implink/follow_network.hpp"
#include "implink/parallel.hpp"
#include "implink/types.hpp"

namespace implink {

// Per-user counts backing IAR / SAR / RER.
//   adopted          = distinct tweets the user reposted
//   exposed          = distinct tweets with at least one followee active
//                      (posted or reposted) at any observed time
//   adopted_exposed  = reposts preceded by followee activity, i.e. the user's
//                      explicit-labeled reposts
//   received         = reposts of the user's own tweets
//   received_explicit= those arriving via explicit links
struct UserMetrics {
    std::vector<std::uint32_t> adopted;
    std::vector<std::uint32_t> exposed;
    std::vector<std::uint32_t> adopted_exposed;
    std::vector<std::uint32_t> received;
    std::vector<std::uint32_t> received_explicit;

    std::size_t node_count() const { return adopted.size(); }
};

inline UserMetrics exposure_adoption_counts(const std::vector<Cascade>& cascades,
                                            const std::vector<DiffusionGraph>& graphs,
                                            const FollowNetwork& net,
                                            unsigned workers = 1) {
    const std::size_t n = net.node_count();
    const unsigned w = resolve_workers(workers);
    std::vector<UserMetrics> partial(w);

    parallel_chunks(cascades.size(), w, [&](unsigned worker, std::size_t begin,
                                            std::size_t end) {
        UserMetrics& acc = partial[worker];
        acc.adopted.assign(n, 0);
        acc.exposed.assign(n, 0);
        acc.adopted_exposed.assign(n, 0);
        acc.received.assign(n, 0);
        acc.received_explicit.assign(n, 0);
        std::vector<std::uint32_t> stamp(n, 0);
        std::uint32_t epoch = 0;
        for (std::size_t c = begin; c < end; ++c) {
            const Cascade& cascade = cascades[c];
            const DiffusionGraph& dg = graphs[c];
            acc.received[cascade.author] += cascade.reposts.size();
            acc.received_explicit[cascade.author] += dg.explicit_count;
            for (std::uint32_t i = 0; i < dg.size(); ++i) {
                ++acc.adopted[cascade.reposts[i].user];
                acc.adopted_exposed[cascade.reposts[i].user] += dg.explicit_link[i];
            }
            // each follower of any participant saw this tweet once
            ++epoch;
            auto mark = [&](node_t participant) {
                for (node_t f : net.followers(participant)) {
                    if (stamp[f] != epoch) {
                        stamp[f] = epoch;
                        ++acc.exposed[f];
                    }
                }
            };
            mark(cascade.author);
            for (const RepostEvent& r : cascade.reposts) mark(r.user);
        }
    });

    UserMetrics merged;
    merged.adopted.assign(n, 0);
    merged.exposed.assign(n, 0);
    merged.adopted_exposed.assign(n, 0);
    merged.received.assign(n, 0);
    merged.received_explicit.assign(n, 0);
    for (const UserMetrics& acc : partial) {
        if (acc.adopted.empty()) continue;  // worker saw no cascades
        for (std::size_t u = 0; u < n; ++u) {
            merged.adopted[u] += acc.adopted[u];
            merged.exposed[u] += acc.exposed[u];
            merged.adopted_exposed[u] += acc.adopted_exposed[u];
            merged.received[u] += acc.received[u];
            merged.received_explicit[u] += acc.received_explicit[u];
        }
    }
    return merged;
}

// IAR(u) = |adopted ∩ exposed| / |exposed|; undefined without exposure.
inline std::optional<double> iar(const UserMetrics& m, node_t u) {
    if (m.exposed[u] == 0) return std::nullopt;
    return static_cast<double>(m.adopted_exposed[u]) / static_cast<double>(m.exposed[u]);
}

// SAR(u) = 1 - |exposed ∩ adopted| / |adopted|: the user's implicit-repost
// fraction. Undefined for users who never reposted. The complement is taken
// in integers so SAR matches the implicit fraction bit-exactly.
inline std::optional<double> sar(const UserMetrics& m, node_t u) {
    if (m.adopted[u] == 0) return std::nullopt;
    return static_cast<double>(m.adopted[u] - m.adopted_exposed[u]) /
           static_cast<double>(m.adopted[u]);
}

// RER(u) = explicit reposts of u's tweets / all reposts of u's tweets.
inline std::optional<double> rer(const UserMetrics& m, node_t u) {
    if (m.received[u] == 0) return std::nullopt;
    return static_cast<double>(m.received_explicit[u]) /
           static_cast<double>(m.received[u]);
}

// Population funnels mirroring the reporting tables: reposting users (IAR/SAR
// side) and reposted authors (RER side), with the min-event and mutual-link
// stages. Populations are sorted by node index.
struct FilteredUsers {
    std::vector<node_t> repost_population;          // adopted >= min_events
    std::vector<node_t> repost_population_mutual;   // ... with >= 1 mutual tie
    std::vector<node_t> received_population;        // received >= min_events
    std::vector<node_t> received_population_mutual;
    std::uint64_t repost_original = 0;    // adopted >= 1
    std::uint64_t received_original = 0;  // received >= 1
    std::uint32_t min_events = 0;
};

inline FilteredUsers apply_filters(const UserMetrics& m, const MutualGraph& mutual,
                                   std::uint32_t min_events = 5) {
    FilteredUsers out;
    out.min_events = min_events;
    for (node_t u = 0; u < m.node_count(); ++u) {
        const bool has_mutual = mutual.degree(u) > 0;
        if (m.adopted[u] >= 1) ++out.repost_original;
        if (m.received[u] >= 1) ++out.received_original;
        if (m.adopted[u] >= min_events) {
            out.repost_population.push_back(u);
            if (has_mutual) out.repost_population_mutual.push_back(u);
        }
        if (m.received[u] >= min_events) {
            out.received_population.push_back(u);
            if (has_mutual) out.received_population_mutual.push_back(u);
        }
    }
    return out;
}

}  // namespace implink
