#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <sstream>

#include "implink/null_model.hpp"
#include "oracles.hpp"

using namespace implink;
using Catch::Approx;

namespace {

std::string serialize_nulls(const std::vector<NullCascade>& nulls) {
    std::ostringstream out;
    for (const auto& nc : nulls) {
        out << nc.cascade_index << ':';
        for (std::size_t i = 0; i < nc.substitute.size(); ++i) {
            out << nc.substitute[i] << (nc.fallback[i] ? "*" : "") << ',';
        }
        out << ';';
    }
    return out.str();
}

}  // namespace

TEST_CASE("singleton pool forces the original reposter") {
    // author 1 has exactly one follower (2), who reposts
    const auto net = oracles::make_network({{2, 1}});
    const auto cascade = oracles::make_cascade(net, 9, 1, 0, {{2, 10}});
    const auto dg = build_diffusion_graph(cascade, net);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto nc = generate_null_cascade(cascade, dg, net, seed);
        REQUIRE(nc.substitute[0] == net.node_of(2));
        REQUIRE(nc.fallback_count == 0);  // pool was {2}, drawn normally
    }
}

TEST_CASE("implicit substitutes are drawn uniformly from the distance pool") {
    // author 1 -> followers 2,3 (d1); unreachable users 10..14; repost by 10
    const auto net =
        oracles::make_network({{2, 1}, {3, 1}}, {10, 11, 12, 13, 14});
    const auto cascade = oracles::make_cascade(net, 9, 1, 0, {{10, 5}});
    const auto dg = build_diffusion_graph(cascade, net);
    REQUIRE(dg.explicit_link[0] == 0);
    REQUIRE(dg.source_distance[0] == unreachable_hops);

    std::map<node_t, int> freq;
    const int draws = 10000;
    AuthorDistanceIndex index(net, cascade.author);
    for (int s = 0; s < draws; ++s) {
        const auto nc = generate_null_cascade(cascade, dg, net, index,
                                              static_cast<std::uint64_t>(s));
        ++freq[nc.substitute[0]];
    }
    REQUIRE(freq.size() == 5);  // all and only the unreachable users
    for (const auto& [node, count] : freq) {
        REQUIRE(net.user_id(node) >= 10);
        // binomial(10000, 1/5): sd ~ 40; allow 5 sigma
        REQUIRE(std::abs(count - draws / 5) < 200);
    }
}

TEST_CASE("implicit substitutes preserve the exact influence distance") {
    std::mt19937 rng(139);
    for (int rep = 0; rep < 10; ++rep) {
        const auto corpus = oracles::random_corpus(rng, 40, 0.06, 20, 12);
        for (std::size_t c = 0; c < corpus.cascades.size(); ++c) {
            const auto& cascade = corpus.cascades[c];
            const auto dg = build_diffusion_graph(cascade, corpus.net);
            AuthorDistanceIndex index(corpus.net, cascade.author);
            const auto nc = generate_null_cascade(cascade, dg, corpus.net, index,
                                                  derive_seed(1, c));
            for (std::uint32_t i = 0; i < nc.substitute.size(); ++i) {
                if (dg.explicit_link[i] || nc.fallback[i]) continue;
                REQUIRE(index.distance(nc.substitute[i]) == dg.source_distance[i]);
            }
        }
    }
}

TEST_CASE("explicit substitutes follow their mapped referenced user") {
    std::mt19937 rng(149);
    for (int rep = 0; rep < 10; ++rep) {
        const auto corpus = oracles::random_corpus(rng, 40, 0.08, 20, 12);
        for (std::size_t c = 0; c < corpus.cascades.size(); ++c) {
            const auto& cascade = corpus.cascades[c];
            const auto dg = build_diffusion_graph(cascade, corpus.net);
            const auto nc =
                generate_null_cascade(cascade, dg, corpus.net, derive_seed(2, c));
            for (std::uint32_t i = 0; i < nc.substitute.size(); ++i) {
                if (!dg.explicit_link[i] || nc.fallback[i]) continue;
                // the recorded reference is the author or a mapped predecessor
                const node_t ref = nc.referenced[i];
                REQUIRE(ref != invalid_node);
                bool valid_reference = ref == cascade.author;
                for (std::uint32_t j : dg.predecessors[i]) {
                    if (ref == nc.substitute[j]) valid_reference = true;
                }
                REQUIRE(valid_reference);
                REQUIRE(corpus.net.follows(nc.substitute[i], ref));
            }
        }
    }
}

TEST_CASE("null cascades keep length and timestamps; substitutes are unique") {
    std::mt19937 rng(151);
    const auto corpus = oracles::random_corpus(rng, 30, 0.1, 25, 10);
    for (std::size_t c = 0; c < corpus.cascades.size(); ++c) {
        const auto& cascade = corpus.cascades[c];
        const auto dg = build_diffusion_graph(cascade, corpus.net);
        const auto nc = generate_null_cascade(cascade, dg, corpus.net, derive_seed(3, c));
        REQUIRE(nc.substitute.size() == cascade.reposts.size());
        if (nc.fallback_count == 0) {
            std::set<node_t> unique(nc.substitute.begin(), nc.substitute.end());
            REQUIRE(unique.size() == nc.substitute.size());
            REQUIRE_FALSE(unique.count(cascade.author));
        }
    }
}

TEST_CASE("substituted implicit distance distribution matches the original") {
    std::mt19937 rng(157);
    const auto corpus = oracles::random_corpus(rng, 40, 0.05, 20, 12);
    for (std::size_t c = 0; c < corpus.cascades.size(); ++c) {
        const auto& cascade = corpus.cascades[c];
        const auto dg = build_diffusion_graph(cascade, corpus.net);
        AuthorDistanceIndex index(corpus.net, cascade.author);
        const auto nc = generate_null_cascade(cascade, dg, corpus.net, index,
                                              derive_seed(4, c));
        std::multiset<hop_t> original, substituted;
        for (std::uint32_t i = 0; i < nc.substitute.size(); ++i) {
            if (dg.explicit_link[i] || nc.fallback[i]) continue;
            original.insert(dg.source_distance[i]);
            substituted.insert(index.distance(nc.substitute[i]));
        }
        REQUIRE(original == substituted);
    }
}

TEST_CASE("regeneration is byte-identical for a fixed seed") {
    std::mt19937 rng(163);
    const auto corpus = oracles::random_corpus(rng, 30, 0.08, 30, 10);
    std::vector<DiffusionGraph> graphs;
    for (const auto& cascade : corpus.cascades) {
        graphs.push_back(build_diffusion_graph(cascade, corpus.net));
        graphs.back().cascade_index = static_cast<std::uint32_t>(graphs.size() - 1);
    }
    auto generate_all = [&](unsigned workers) {
        std::vector<NullCascade> nulls(corpus.cascades.size());
        parallel_for(corpus.cascades.size(), workers, [&](std::size_t c) {
            nulls[c] = generate_null_cascade(corpus.cascades[c], graphs[c], corpus.net,
                                             derive_seed(42, c));
        });
        return serialize_nulls(nulls);
    };
    const auto one = generate_all(1);
    REQUIRE(generate_all(2) == one);
    REQUIRE(generate_all(4) == one);
}

TEST_CASE("bootstrap with a single replicate has zero deviation") {
    std::mt19937 rng(167);
    const auto corpus = oracles::random_corpus(rng, 25, 0.1, 15, 8);
    std::vector<DiffusionGraph> graphs;
    for (const auto& cascade : corpus.cascades) {
        graphs.push_back(build_diffusion_graph(cascade, corpus.net));
    }
    const auto part = louvain(corpus.net, 1.0, 5);
    const auto boot =
        bootstrap_intra_ratio(corpus.cascades, graphs, part, corpus.net, 5, 1, 11);
    if (boot.null_explicit_defined) REQUIRE(boot.null_sd_explicit == 0.0);
    if (boot.null_implicit_defined) REQUIRE(boot.null_sd_implicit == 0.0);
}

TEST_CASE("bootstrap rejects an empty cascade set") {
    const auto net = oracles::make_network({{1, 2}});
    Partition part;
    part.community.assign(net.node_count(), 0);
    REQUIRE_THROWS_AS(
        bootstrap_intra_ratio({}, {}, part, net, 10, 100, 1),
        precondition_error);
}

TEST_CASE("planted two-community fixture: null mean tracks pool composition") {
    // author 1 in community 0. Unreachable users: 3 in community 0, 7 in
    // community 1. The lone repost is implicit-unreachable and lands in
    // community 1, so the observed intra ratio is 0 while the null draws
    // uniformly from the 10 unreachable users (expected intra share 0.3).
    std::vector<oracles::EdgePair> edges{{2, 1}};
    std::vector<ext_id_t> isolates;
    for (ext_id_t u = 10; u < 20; ++u) isolates.push_back(u);
    const auto net = oracles::make_network(edges, isolates);
    const auto cascade = oracles::make_cascade(net, 9, 1, 0, {{17, 10}});
    const std::vector<Cascade> cascades{cascade};
    std::vector<DiffusionGraph> graphs{build_diffusion_graph(cascade, net)};
    REQUIRE(graphs[0].explicit_link[0] == 0);

    Partition part;
    part.community.assign(net.node_count(), 1);
    part.community[net.node_of(1)] = 0;
    part.community[net.node_of(2)] = 0;
    part.community[net.node_of(10)] = 0;
    part.community[net.node_of(11)] = 0;
    part.community[net.node_of(12)] = 0;
    part.community_count = 2;

    const auto boot =
        bootstrap_intra_ratio(cascades, graphs, part, net, 400, 50, 21);
    REQUIRE(boot.observed.implicit_links.value() == 0.0);
    REQUIRE(boot.null_implicit_defined);
    // 3 of the 10 unreachable users share the author's community
    REQUIRE(boot.null_mean_implicit == Approx(0.3).margin(0.05));
    REQUIRE(boot.null_sd_implicit < 0.05);
}
