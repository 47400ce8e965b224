#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "implink/cascade.hpp"
#include "implink/follow_network.hpp"
#include "implink/louvain.hpp"
#include "implink/parallel.hpp"
#include "implink/rng.hpp"
#include "implink/stats.hpp"
#include "implink/types.hpp"

namespace implink {

// Exact-distance user pools around one cascade author. Pools for the finite
// distances come straight from the BFS levels; the unreachable pool is built
// lazily (it needs a full node scan).
class AuthorDistanceIndex {
public:
    AuthorDistanceIndex(const FollowNetwork& net, node_t author) : net_(&net) {
        scratch_.run(net, author);
    }

    hop_t distance(node_t v) const { return scratch_.distance_of(v); }

    std::span<const node_t> pool(hop_t d) const {
        if (d == unreachable_hops) {
            if (!unreachable_built_) {
                const std::size_t n = net_->node_count();
                unreachable_.reserve(scratch_.unreached_count());
                for (node_t v = 0; v < n; ++v) {
                    if (scratch_.distance_of(v) == unreachable_hops) {
                        unreachable_.push_back(v);
                    }
                }
                unreachable_built_ = true;
            }
            return unreachable_;
        }
        return scratch_.level_nodes(d);
    }

private:
    const FollowNetwork* net_;
    BfsScratch scratch_;
    mutable std::vector<node_t> unreachable_;
    mutable bool unreachable_built_ = false;
};

// Counterfactual cascade: same repost count, timestamps, and link-type
// sequence as the original, with reposters replaced so community structure is
// ignored while temporal order and topology constraints are preserved.
struct NullCascade {
    std::uint32_t cascade_index = 0;
    std::vector<node_t> substitute;      // per repost
    std::vector<node_t> referenced;      // mapped referenced user (explicit reposts)
    std::vector<std::uint8_t> fallback;  // 1 = candidate pool empty, original kept
    std::uint64_t fallback_count = 0;
};

namespace detail {

// Uniform draw from pool \ used; nullopt when empty. Rejection sampling with
// a filtered-copy fallback keeps the draw uniform for any pool/used overlap.
inline std::optional<node_t> draw_excluding(std::span<const node_t> pool,
                                            const std::unordered_set<node_t>& used,
                                            Xoshiro256ss& rng) {
    if (pool.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 32; ++attempt) {
        const node_t cand = pool[rng.bounded(pool.size())];
        if (!used.count(cand)) return cand;
    }
    std::vector<node_t> eligible;
    eligible.reserve(pool.size());
    for (node_t v : pool) {
        if (!used.count(v)) eligible.push_back(v);
    }
    if (eligible.empty()) return std::nullopt;
    return eligible[rng.bounded(eligible.size())];
}

}  // namespace detail

// Reposts are substituted in temporal order. Implicit reposts draw a user at
// the original reposter's exact influence distance from the author (or from
// the unreachable set); explicit reposts draw a referenced in-neighbor
// uniformly, map it through the substitutions made so far, and draw from the
// mapped user's followers. The author is never replaced; substitutes are used
// at most once per cascade; an empty pool keeps the original user.
// Every draw is a pure function of (seed, repost index).
inline NullCascade generate_null_cascade(const Cascade& cascade,
                                         const DiffusionGraph& dg,
                                         const FollowNetwork& net,
                                         const AuthorDistanceIndex& index,
                                         std::uint64_t seed) {
    const std::size_t k = cascade.reposts.size();
    NullCascade out;
    out.cascade_index = dg.cascade_index;
    out.substitute.resize(k);
    out.referenced.assign(k, invalid_node);
    out.fallback.assign(k, 0);

    std::unordered_set<node_t> used;
    used.reserve(k + 1);
    used.insert(cascade.author);

    for (std::uint32_t i = 0; i < k; ++i) {
        Xoshiro256ss rng(derive_seed(seed, 0x6e756c6cULL, i));
        std::optional<node_t> pick;
        if (!dg.explicit_link[i]) {
            pick = detail::draw_excluding(index.pool(dg.source_distance[i]), used, rng);
        } else {
            // referenced in-neighbor: one of B(i), or the author when followed
            const auto& preds = dg.predecessors[i];
            const std::uint64_t choices = preds.size() + (dg.follows_author[i] ? 1 : 0);
            const std::uint64_t r = rng.bounded(choices);
            const node_t referenced = r < preds.size()
                                          ? out.substitute[preds[r]]
                                          : cascade.author;
            out.referenced[i] = referenced;
            pick = detail::draw_excluding(net.followers(referenced), used, rng);
        }
        if (pick) {
            out.substitute[i] = *pick;
        } else {
            out.substitute[i] = cascade.reposts[i].user;
            out.fallback[i] = 1;
            ++out.fallback_count;
        }
        used.insert(out.substitute[i]);
    }
    return out;
}

inline NullCascade generate_null_cascade(const Cascade& cascade,
                                         const DiffusionGraph& dg,
                                         const FollowNetwork& net,
                                         std::uint64_t seed) {
    AuthorDistanceIndex index(net, cascade.author);
    return generate_null_cascade(cascade, dg, net, index, seed);
}

struct BootstrapRatios {
    IntraCommunityRatios observed;
    double null_mean_explicit = 0.0;
    double null_sd_explicit = 0.0;
    bool null_explicit_defined = false;
    double null_mean_implicit = 0.0;
    double null_sd_implicit = 0.0;
    bool null_implicit_defined = false;
    std::uint64_t fallback_substitutions = 0;
    std::uint32_t n_null = 0;
    std::uint32_t n_boot = 0;
    std::uint64_t seed = 0;
};

// Generates n_null null cascades per original, then bootstrap-resamples
// original cascade ids with replacement; each replicate pools the selected
// cascades' null reposts and recomputes the intra-community ratio per link
// type. Deterministic for fixed seed regardless of worker count.
inline BootstrapRatios bootstrap_intra_ratio(const std::vector<Cascade>& cascades,
                                             const std::vector<DiffusionGraph>& graphs,
                                             const Partition& partition,
                                             const FollowNetwork& net,
                                             std::uint32_t n_null = 10,
                                             std::uint32_t n_boot = 1000,
                                             std::uint64_t seed = 0,
                                             unsigned workers = 1) {
    if (cascades.empty()) {
        throw precondition_error("bootstrap_intra_ratio: empty cascade set");
    }
    if (n_null == 0 || n_boot == 0) {
        throw precondition_error("bootstrap_intra_ratio: n_null and n_boot must be >= 1");
    }

    BootstrapRatios out;
    out.observed = intra_community_ratio(cascades, graphs, partition);
    out.n_null = n_null;
    out.n_boot = n_boot;
    out.seed = seed;

    // per-cascade counts pooled over its n_null replicates
    struct Counts {
        std::uint64_t intra_expl = 0, total_expl = 0;
        std::uint64_t intra_impl = 0, total_impl = 0;
        std::uint64_t fallbacks = 0;
    };
    std::vector<Counts> per_cascade(cascades.size());
    parallel_for(cascades.size(), workers, [&](std::size_t c) {
        const AuthorDistanceIndex index(net, cascades[c].author);
        const std::uint32_t author_comm = partition.community[cascades[c].author];
        Counts& counts = per_cascade[c];
        for (std::uint32_t r = 0; r < n_null; ++r) {
            const NullCascade nc = generate_null_cascade(
                cascades[c], graphs[c], net, index, derive_seed(seed, c, r));
            counts.fallbacks += nc.fallback_count;
            for (std::uint32_t i = 0; i < nc.substitute.size(); ++i) {
                const bool intra =
                    partition.community[nc.substitute[i]] == author_comm;
                if (graphs[c].explicit_link[i]) {
                    ++counts.total_expl;
                    counts.intra_expl += intra;
                } else {
                    ++counts.total_impl;
                    counts.intra_impl += intra;
                }
            }
        }
    });
    for (const auto& counts : per_cascade) out.fallback_substitutions += counts.fallbacks;

    struct Replicate {
        double expl = 0.0;
        double impl = 0.0;
        bool expl_defined = false;
        bool impl_defined = false;
    };
    std::vector<Replicate> replicates(n_boot);
    parallel_for(n_boot, workers, [&](std::size_t b) {
        Xoshiro256ss rng(derive_seed(seed, 0x626f6f74ULL, b));
        Counts pooled;
        for (std::size_t draw = 0; draw < cascades.size(); ++draw) {
            const Counts& counts = per_cascade[rng.bounded(cascades.size())];
            pooled.intra_expl += counts.intra_expl;
            pooled.total_expl += counts.total_expl;
            pooled.intra_impl += counts.intra_impl;
            pooled.total_impl += counts.total_impl;
        }
        Replicate& rep = replicates[b];
        if (pooled.total_expl > 0) {
            rep.expl_defined = true;
            rep.expl = static_cast<double>(pooled.intra_expl) /
                       static_cast<double>(pooled.total_expl);
        }
        if (pooled.total_impl > 0) {
            rep.impl_defined = true;
            rep.impl = static_cast<double>(pooled.intra_impl) /
                       static_cast<double>(pooled.total_impl);
        }
    });

    auto summarize = [](std::span<const Replicate> reps, bool implicit, double& mean_out,
                        double& sd_out) -> bool {
        stats::NeumaierSum sum;
        std::size_t count = 0;
        for (const auto& rep : reps) {
            if (implicit ? rep.impl_defined : rep.expl_defined) {
                sum.add(implicit ? rep.impl : rep.expl);
                ++count;
            }
        }
        if (count == 0) return false;
        mean_out = sum.value() / static_cast<double>(count);
        if (count == 1) {
            sd_out = 0.0;
            return true;
        }
        stats::NeumaierSum sq;
        for (const auto& rep : reps) {
            if (implicit ? rep.impl_defined : rep.expl_defined) {
                const double d = (implicit ? rep.impl : rep.expl) - mean_out;
                sq.add(d * d);
            }
        }
        sd_out = std::sqrt(sq.value() / static_cast<double>(count - 1));
        return true;
    };
    out.null_explicit_defined =
        summarize(replicates, false, out.null_mean_explicit, out.null_sd_explicit);
    out.null_implicit_defined =
        summarize(replicates, true, out.null_mean_implicit, out.null_sd_implicit);
    return out;
}

}  // namespace implink
