#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <numeric>
#include <random>

#include "implink/homophily.hpp"
#include "implink/rng.hpp"
#include "oracles.hpp"

using namespace implink;
using Catch::Approx;

TEST_CASE("two mutual friends pair up with each other's value") {
    const auto net = oracles::make_network({{1, 2}, {2, 1}});
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    sample.users = {net.node_of(1), net.node_of(2)};
    sample.values = {0.2, 0.8};
    const auto pairs = neighbor_average_pairs(sample, net, mutual, AdjacencyKind::mutual);
    REQUIRE(pairs.size() == 2);
    REQUIRE(pairs[0].first == Approx(0.2));
    REQUIRE(pairs[0].second == Approx(0.8));
    REQUIRE(pairs[1].first == Approx(0.8));
    REQUIRE(pairs[1].second == Approx(0.2));
}

TEST_CASE("users without qualifying neighbors are excluded") {
    const auto net = oracles::make_network({{1, 2}, {2, 1}}, {5});
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    sample.users = {net.node_of(1), net.node_of(2), net.node_of(5)};
    sample.values = {0.2, 0.8, 0.5};
    const auto pairs = neighbor_average_pairs(sample, net, mutual, AdjacencyKind::mutual);
    REQUIRE(pairs.size() == 2);  // the isolate contributes no pair
}

TEST_CASE("neighbor means ignore out-of-population neighbors") {
    // 1 follows 2 and 3, but only 2 is in the population
    const auto net = oracles::make_network({{1, 2}, {1, 3}});
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    sample.users = {net.node_of(1), net.node_of(2)};
    sample.values = {0.4, 1.0};
    const auto pairs =
        neighbor_average_pairs(sample, net, mutual, AdjacencyKind::followees);
    REQUIRE(pairs.size() == 1);
    REQUIRE(pairs[0].second == Approx(1.0));
}

TEST_CASE("adjacency kinds use the right neighborhoods") {
    const auto net = oracles::make_network({{1, 2}, {3, 1}});
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    for (ext_id_t id : {ext_id_t{1}, ext_id_t{2}, ext_id_t{3}}) {
        sample.users.push_back(net.node_of(id));
        sample.values.push_back(static_cast<double>(id));
    }
    const auto out =
        neighbor_average_pairs(sample, net, mutual, AdjacencyKind::followees);
    const auto in = neighbor_average_pairs(sample, net, mutual, AdjacencyKind::followers);
    const auto mu = neighbor_average_pairs(sample, net, mutual, AdjacencyKind::mutual);
    REQUIRE(out.size() == 2);  // 1 follows 2; 3 follows 1
    REQUIRE(in.size() == 2);   // 2 followed by 1; 1 followed by 3
    REQUIRE(mu.empty());
}

TEST_CASE("neighbor pairs match a brute-force enumeration on random graphs") {
    std::mt19937 rng(191);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<oracles::EdgePair> edges;
    for (ext_id_t a = 1; a <= 30; ++a) {
        for (ext_id_t b = 1; b <= 30; ++b) {
            if (a != b && unit(rng) < 0.15) edges.emplace_back(a, b);
        }
    }
    const auto net = oracles::make_network(edges);
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    for (node_t u = 0; u < net.node_count(); ++u) {
        if (unit(rng) < 0.7) {
            sample.users.push_back(u);
            sample.values.push_back(unit(rng));
        }
    }
    std::map<node_t, double> value_of;
    for (std::size_t i = 0; i < sample.users.size(); ++i) {
        value_of[sample.users[i]] = sample.values[i];
    }
    const auto pairs =
        neighbor_average_pairs(sample, net, mutual, AdjacencyKind::followees);
    std::size_t expected_pairs = 0;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < sample.users.size(); ++i) {
        const node_t u = sample.users[i];
        double sum = 0.0;
        int count = 0;
        for (node_t v : net.followees(u)) {
            const auto it = value_of.find(v);
            if (it != value_of.end()) {
                sum += it->second;
                ++count;
            }
        }
        if (count == 0) continue;
        ++expected_pairs;
        REQUIRE(pairs[cursor].first == Approx(sample.values[i]).margin(1e-12));
        REQUIRE(pairs[cursor].second == Approx(sum / count).margin(1e-12));
        ++cursor;
    }
    REQUIRE(pairs.size() == expected_pairs);
}

TEST_CASE("exact-distance pairs on a path") {
    // mutual path 1 - 2 - 3 with values 0, 0.5, 1
    const auto net = oracles::make_network({{1, 2}, {2, 1}, {2, 3}, {3, 2}});
    const auto mutual = mutual_graph(net);
    std::vector<node_t> population{net.node_of(1), net.node_of(2), net.node_of(3)};
    const auto induced = induce_mutual(mutual, population);
    const std::vector<double> values{0.0, 0.5, 1.0};
    const auto d2 = distance_average_pairs(values, induced, 2);
    REQUIRE(d2.pairs.size() == 2);
    REQUIRE(d2.pairs[0].first == Approx(0.0));
    REQUIRE(d2.pairs[0].second == Approx(1.0));
    REQUIRE(d2.pairs[1].first == Approx(1.0));
    REQUIRE(d2.pairs[1].second == Approx(0.0));
    // each endpoint sees one user at distance 2 out of two others
    REQUIRE(d2.mean_share == Approx((0.5 + 0.0 + 0.5) / 3.0));

    const auto d4 = distance_average_pairs(values, induced, 4);
    REQUIRE(d4.pairs.empty());
    REQUIRE(d4.mean_share == 0.0);
}

TEST_CASE("distance buckets match the all-pairs oracle on random mutual graphs") {
    std::mt19937 rng(193);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<oracles::EdgePair> edges;
    for (ext_id_t a = 1; a <= 25; ++a) {
        for (ext_id_t b = a + 1; b <= 25; ++b) {
            if (unit(rng) < 0.1) {
                edges.emplace_back(a, b);
                edges.emplace_back(b, a);
            }
        }
    }
    const auto net = oracles::make_network(edges);
    const auto mutual = mutual_graph(net);
    std::vector<node_t> population(net.node_count());
    std::iota(population.begin(), population.end(), node_t{0});
    std::vector<double> values(net.node_count());
    for (auto& v : values) v = unit(rng);
    const auto mutual_pairs = oracles::naive_mutual_edges(edges);

    double share_total = 0.0;
    for (hop_t d = 1; d <= 4; ++d) {
        const auto res = distance_average_pairs(values, mutual, d);
        share_total += res.mean_share;
        std::size_t cursor = 0;
        for (node_t u = 0; u < net.node_count(); ++u) {
            const auto naive =
                oracles::naive_undirected_distance(mutual_pairs, net.user_id(u));
            double sum = 0.0;
            int count = 0;
            for (const auto& [id, dist] : naive) {
                if (dist == d) {
                    sum += values[net.node_of(id)];
                    ++count;
                }
            }
            if (count == 0) continue;
            REQUIRE(res.pairs[cursor].first == Approx(values[u]).margin(1e-12));
            REQUIRE(res.pairs[cursor].second == Approx(sum / count).margin(1e-12));
            ++cursor;
        }
        REQUIRE(res.pairs.size() == cursor);
    }
    REQUIRE(share_total <= 1.0 + 1e-12);
}

TEST_CASE("perfect assortativity yields rho = 1 at adjacency level") {
    // two reciprocated cliques; metric = community id
    std::vector<oracles::EdgePair> edges;
    for (ext_id_t a = 1; a <= 4; ++a) {
        for (ext_id_t b = a + 1; b <= 4; ++b) {
            edges.emplace_back(a, b);
            edges.emplace_back(b, a);
        }
    }
    for (ext_id_t a = 11; a <= 14; ++a) {
        for (ext_id_t b = a + 1; b <= 14; ++b) {
            edges.emplace_back(a, b);
            edges.emplace_back(b, a);
        }
    }
    const auto net = oracles::make_network(edges);
    const auto mutual = mutual_graph(net);
    MetricSample sample;
    for (node_t u = 0; u < net.node_count(); ++u) {
        sample.users.push_back(u);
        sample.values.push_back(net.user_id(u) > 10 ? 1.0 : 0.0);
    }
    const auto pairs = neighbor_average_pairs(sample, net, mutual, AdjacencyKind::mutual);
    const auto corr = spearman_with_p(pairs);
    REQUIRE(corr.rho == Approx(1.0).margin(1e-12));
}

TEST_CASE("permuted values show null-level correlation") {
    std::mt19937 rng(197);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<oracles::EdgePair> edges;
    for (ext_id_t a = 1; a <= 40; ++a) {
        for (ext_id_t b = a + 1; b <= 40; ++b) {
            if (unit(rng) < 0.15) {
                edges.emplace_back(a, b);
                edges.emplace_back(b, a);
            }
        }
    }
    const auto net = oracles::make_network(edges);
    const auto mutual = mutual_graph(net);
    std::vector<double> base(net.node_count());
    for (auto& v : base) v = unit(rng);

    double sum_abs_rho = 0.0;
    int measured = 0;
    std::size_t n_pairs = 0;
    for (int perm = 0; perm < 200; ++perm) {
        auto values = base;
        Xoshiro256ss shuffler(derive_seed(7, perm));
        shuffler.shuffle(values);
        MetricSample sample;
        for (node_t u = 0; u < net.node_count(); ++u) {
            sample.users.push_back(u);
            sample.values.push_back(values[u]);
        }
        const auto pairs =
            neighbor_average_pairs(sample, net, mutual, AdjacencyKind::mutual);
        if (pairs.size() < 3) continue;
        n_pairs = pairs.size();
        sum_abs_rho += std::abs(spearman_with_p(pairs).rho);
        ++measured;
    }
    REQUIRE(measured > 0);
    const double mean_abs = sum_abs_rho / measured;
    REQUIRE(mean_abs < 3.0 / std::sqrt(static_cast<double>(n_pairs)));
}
