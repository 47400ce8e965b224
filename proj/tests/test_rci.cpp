#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "implink/rci.hpp"
#include "oracles.hpp"

using namespace implink;
using Catch::Approx;

namespace {

// Fig-1-shaped fixture: E,F follow D; A follows E; cascade D then E,F,A.
struct SingleSourceFixture {
    FollowNetwork net;
    Cascade cascade;
    DiffusionGraph dg;
    SingleSourceFixture() {
        net = oracles::make_network({{5, 4}, {6, 4}, {1, 5}});
        cascade = oracles::make_cascade(net, 100, 4, 0, {{5, 10}, {6, 20}, {1, 30}});
        dg = build_diffusion_graph(cascade, net);
    }
};

}  // namespace

TEST_CASE("RCI on the single-source example: E gets credit for A") {
    SingleSourceFixture f;
    const auto rci = compute_rci(f.dg);
    // reposts sorted: E(0), F(1), A(2); B(A) = {E}
    REQUIRE(rci[0] == Approx(1.0).margin(1e-12));
    REQUIRE(rci[1] == Approx(0.0).margin(1e-12));
    REQUIRE(rci[2] == Approx(0.0).margin(1e-12));
}

TEST_CASE("cascade with no followee predecessors yields all-zero RCI") {
    const auto net = oracles::make_network({{9, 8}}, {1, 2, 3});
    const auto cascade =
        oracles::make_cascade(net, 5, 8, 0, {{1, 10}, {2, 20}, {3, 30}});
    const auto dg = build_diffusion_graph(cascade, net);
    const auto rci = compute_rci(dg);
    for (double v : rci) REQUIRE(v == 0.0);
}

TEST_CASE("RCI matches memoized recursive evaluation on random cascades") {
    std::mt19937 rng(83);
    int checked = 0;
    for (int rep = 0; rep < 8; ++rep) {
        const auto corpus = oracles::random_corpus(rng, 30, 0.12, 25, 15);
        for (const auto& cascade : corpus.cascades) {
            const auto dg = build_diffusion_graph(cascade, corpus.net);
            std::vector<std::set<std::uint32_t>> b_sets;
            for (const auto& preds : dg.predecessors) {
                b_sets.emplace_back(preds.begin(), preds.end());
            }
            const auto expected = oracles::naive_rci(b_sets);
            const auto got = compute_rci(dg);
            for (std::size_t i = 0; i < got.size(); ++i) {
                REQUIRE(got[i] == Approx(expected[i]).margin(1e-9));
            }
            ++checked;
        }
    }
    REQUIRE(checked == 200);
}

TEST_CASE("RCI values are non-negative and positive only when referenced") {
    std::mt19937 rng(89);
    const auto corpus = oracles::random_corpus(rng, 25, 0.15, 40, 12);
    for (const auto& cascade : corpus.cascades) {
        const auto dg = build_diffusion_graph(cascade, corpus.net);
        const auto rci = compute_rci(dg);
        const auto succ = successor_sets(dg);
        for (std::size_t i = 0; i < rci.size(); ++i) {
            REQUIRE(rci[i] >= 0.0);
            if (rci[i] > 0.0) REQUIRE_FALSE(succ[i].empty());
        }
    }
}

TEST_CASE("conservation: root mass equals the referencing-repost count") {
    SECTION("single-source example: RCI(E)+RCI(F) = |{A}|") {
        SingleSourceFixture f;
        const auto rci = compute_rci(f.dg);
        double residual = 0.0;
        REQUIRE(rci_conservation_check(f.dg, rci, 1e-9, &residual));
        REQUIRE(residual == Approx(0.0).margin(1e-12));
    }
    SECTION("all-implicit cascade: 0 = 0") {
        const auto net = oracles::make_network({{9, 8}}, {1, 2});
        const auto cascade = oracles::make_cascade(net, 5, 8, 0, {{1, 10}, {2, 20}});
        const auto dg = build_diffusion_graph(cascade, net);
        REQUIRE(rci_conservation_check(dg, compute_rci(dg)));
    }
    SECTION("holds on every random cascade") {
        std::mt19937 rng(97);
        for (int rep = 0; rep < 10; ++rep) {
            const auto corpus = oracles::random_corpus(rng, 35, 0.1, 25, 20);
            for (const auto& cascade : corpus.cascades) {
                const auto dg = build_diffusion_graph(cascade, corpus.net);
                REQUIRE(rci_conservation_check(dg, compute_rci(dg)));
            }
        }
    }
}

TEST_CASE("RCI histogram separates labels and conserves counts") {
    SingleSourceFixture f;
    const std::vector<Cascade> cascades{f.cascade};
    const std::vector<DiffusionGraph> graphs{f.dg};
    const std::vector<std::vector<double>> rci{compute_rci(f.dg)};
    const auto rows = rci_feature_table(cascades, graphs, rci, f.net);
    const auto hist = rci_distribution(rows);
    REQUIRE(hist.zero_explicit == 2);  // F and A
    REQUIRE(hist.zero_implicit == 0);
    // E's value of 1 lands in the [1, 2) bin
    std::uint64_t nonzero = hist.explicit_bins.total();
    REQUIRE(nonzero == 1);
    REQUIRE(hist.implicit_bins.total() == 0);

    SECTION("empty input yields empty histograms") {
        const auto empty = rci_distribution(std::vector<RciFeatureRow>{});
        REQUIRE(empty.zero_explicit == 0);
        REQUIRE(empty.explicit_bins.total() == 0);
    }
}

TEST_CASE("RCI histogram totals match repost counts per label on random data") {
    std::mt19937 rng(101);
    const auto corpus = oracles::random_corpus(rng, 30, 0.1, 40, 15);
    std::vector<DiffusionGraph> graphs;
    std::vector<std::vector<double>> rci;
    for (const auto& cascade : corpus.cascades) {
        graphs.push_back(build_diffusion_graph(cascade, corpus.net));
        rci.push_back(compute_rci(graphs.back()));
    }
    const auto rows = rci_feature_table(corpus.cascades, graphs, rci, corpus.net);
    const auto hist = rci_distribution(rows);
    std::uint64_t expl = 0, impl = 0;
    for (const auto& row : rows) (row.explicit_link ? expl : impl) += 1;
    REQUIRE(hist.zero_explicit + hist.explicit_bins.total() == expl);
    REQUIRE(hist.zero_implicit + hist.implicit_bins.total() == impl);
}

TEST_CASE("feature table: offsets measured from the first repost") {
    SingleSourceFixture f;
    const std::vector<Cascade> cascades{f.cascade};
    const std::vector<DiffusionGraph> graphs{f.dg};
    const std::vector<std::vector<double>> rci{compute_rci(f.dg)};
    const auto rows = rci_feature_table(cascades, graphs, rci, f.net);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].offset_s == 0);
    REQUIRE(rows[1].offset_s == 10);
    REQUIRE(rows[2].offset_s == 20);
    REQUIRE(rows[0].b_size == 0);
    REQUIRE(rows[2].b_size == 1);
    REQUIRE(rows[0].distance == 1);
    REQUIRE_FALSE(rows[0].disconnected);
}

namespace {

std::vector<RciFeatureRow> synthetic_rows(std::mt19937& rng, std::size_t n,
                                          double explicit_effect, double noise_sd) {
    std::vector<RciFeatureRow> rows(n);
    std::normal_distribution<double> noise(0.0, noise_sd);
    std::uniform_int_distribution<int> flag(0, 1);
    std::uniform_int_distribution<int> dist(1, 6);
    std::uniform_int_distribution<int> offset(0, 5000);
    std::vector<double> expl(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].explicit_link = flag(rng) == 1;
        rows[i].disconnected = flag(rng) == 1 && flag(rng) == 1;
        rows[i].distance = rows[i].disconnected ? unreachable_hops
                                                : static_cast<hop_t>(dist(rng));
        rows[i].offset_s = offset(rng);
        expl[i] = rows[i].explicit_link ? 1.0 : 0.0;
    }
    const auto z = implink::stats::zstandardize(expl);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].rci = explicit_effect * z[i] + noise(rng);
    }
    return rows;
}

}  // namespace

TEST_CASE("regression recovers a known generator") {
    std::mt19937 rng(103);
    // y = 0.7 * z(explicit) + noise with total variance ~1, so the
    // standardized explicit coefficient is 0.7
    const auto rows = synthetic_rows(rng, 4000, 0.7, std::sqrt(0.51));
    const auto reg = rci_regression(rows);
    REQUIRE(reg.defined[3]);
    REQUIRE(reg.coefficients[3] == Approx(0.7).margin(0.05));
    REQUIRE(std::abs(reg.coefficients[0]) < 0.05);
    REQUIRE(std::abs(reg.coefficients[1]) < 0.05);
    REQUIRE(std::abs(reg.coefficients[2]) < 0.05);
}

TEST_CASE("regression perfect fit on one standardized regressor") {
    std::mt19937 rng(107);
    auto rows = synthetic_rows(rng, 500, 1.0, 1.0);
    std::vector<double> offsets(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        offsets[i] = static_cast<double>(rows[i].offset_s);
    }
    const auto z = stats::zstandardize(offsets);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rci = z[i];
    const auto reg = rci_regression(rows);
    REQUIRE(reg.coefficients[2] == Approx(1.0).margin(1e-8));
    REQUIRE(reg.r_squared == Approx(1.0).margin(1e-10));
    REQUIRE(reg.adjusted_r_squared == Approx(1.0).margin(1e-10));
    REQUIRE(reg.hc3_se[2] == Approx(0.0).margin(1e-8));
}

TEST_CASE("constant covariates are reported undefined, not fitted") {
    std::mt19937 rng(109);
    auto rows = synthetic_rows(rng, 300, 0.5, 0.5);
    for (auto& row : rows) {
        row.disconnected = false;  // constant disconnected column
        if (row.distance == unreachable_hops) row.distance = 2;
    }
    const auto reg = rci_regression(rows);
    REQUIRE_FALSE(reg.defined[1]);
    REQUIRE(std::isnan(reg.coefficients[1]));
    REQUIRE(reg.defined[0]);
    REQUIRE(reg.defined[3]);
    REQUIRE(reg.p_fitted == 3);
}

TEST_CASE("regression coefficients ignore affine rescaling of raw covariates") {
    std::mt19937 rng(113);
    const auto rows = synthetic_rows(rng, 800, 0.6, 0.8);
    auto scaled = rows;
    for (auto& row : scaled) row.offset_s *= 60;  // seconds -> minutes upstream
    const auto a = rci_regression(rows);
    const auto b = rci_regression(scaled);
    for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
        if (!a.defined[j]) continue;
        REQUIRE(b.coefficients[j] == Approx(a.coefficients[j]).margin(1e-9));
    }
}

TEST_CASE("regression demands enough rows") {
    std::mt19937 rng(127);
    const auto rows = synthetic_rows(rng, 4, 0.5, 0.5);
    REQUIRE_THROWS_AS(rci_regression(rows), precondition_error);
}
