#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "implink/cascade.hpp"
#include "implink/stats.hpp"
#include "implink/types.hpp"

namespace implink {

// Repost Contribution Index. Each repost v with a non-empty predecessor set
// distributes (1 + RCI(v)) / |B(v)| to every member of B(v); reposts that are
// never referenced stay at zero. B only contains strictly earlier reposts, so
// a single reverse-chronological pass yields exact values.
inline std::vector<double> compute_rci(const DiffusionGraph& dg) {
    std::vector<double> rci(dg.size(), 0.0);
    for (std::size_t i = dg.size(); i-- > 0;) {
        const auto& preds = dg.predecessors[i];
        if (preds.empty()) continue;
        const double share = (1.0 + rci[i]) / static_cast<double>(preds.size());
        for (std::uint32_t w : preds) rci[w] += share;
    }
    return rci;
}

// Mass balance implied by the definition: every referenced-set owner injects
// exactly one unit plus what it received, and all mass drains to reposts with
// empty predecessor sets. Returns the signed residual through *residual.
inline bool rci_conservation_check(const DiffusionGraph& dg,
                                   std::span<const double> rci,
                                   double tolerance = 1e-9,
                                   double* residual = nullptr) {
    stats::NeumaierSum root_mass;
    std::uint64_t referencing = 0;
    for (std::size_t i = 0; i < dg.size(); ++i) {
        if (dg.predecessors[i].empty()) {
            root_mass.add(rci[i]);
        } else {
            ++referencing;
        }
    }
    const double r = root_mass.value() - static_cast<double>(referencing);
    if (residual) *residual = r;
    return std::abs(r) <= tolerance;
}

// One regression row per repost (Table-2 covariates plus bookkeeping).
struct RciFeatureRow {
    ext_id_t cascade_id = 0;
    ext_id_t user_id = 0;
    double rci = 0.0;
    hop_t distance = unreachable_hops;
    bool disconnected = false;
    std::int64_t offset_s = 0;  // seconds since the cascade's first repost
    bool explicit_link = false;
    std::uint32_t b_size = 0;
};

inline std::vector<RciFeatureRow> rci_feature_table(
    const std::vector<Cascade>& cascades, const std::vector<DiffusionGraph>& graphs,
    const std::vector<std::vector<double>>& rci_values, const FollowNetwork& net) {
    std::vector<RciFeatureRow> rows;
    std::size_t total = 0;
    for (const auto& c : cascades) total += c.reposts.size();
    rows.reserve(total);
    for (std::size_t c = 0; c < cascades.size(); ++c) {
        const Cascade& cascade = cascades[c];
        const DiffusionGraph& dg = graphs[c];
        if (cascade.reposts.empty()) continue;
        const std::int64_t first = cascade.reposts.front().time;
        for (std::uint32_t i = 0; i < dg.size(); ++i) {
            RciFeatureRow row;
            row.cascade_id = cascade.tweet_id;
            row.user_id = net.user_id(cascade.reposts[i].user);
            row.rci = rci_values[c][i];
            row.distance = dg.source_distance[i];
            row.disconnected = dg.source_distance[i] == unreachable_hops;
            row.offset_s = cascade.reposts[i].time - first;
            row.explicit_link = dg.explicit_link[i] != 0;
            row.b_size = static_cast<std::uint32_t>(dg.predecessors[i].size());
            rows.push_back(row);
        }
    }
    return rows;
}

// Zero bin plus logarithmic bins; counts kept per link type.
struct RciHistogram {
    std::vector<double> edges;
    std::uint64_t zero_explicit = 0;
    std::uint64_t zero_implicit = 0;
    stats::Histogram explicit_bins;
    stats::Histogram implicit_bins;
};

inline std::vector<double> default_rci_bin_edges() {
    std::vector<double> edges;
    for (int k = -6; k <= 16; ++k) edges.push_back(std::ldexp(1.0, k));
    return edges;
}

inline RciHistogram rci_distribution(std::span<const RciFeatureRow> rows,
                                     std::vector<double> edges = default_rci_bin_edges()) {
    RciHistogram h;
    h.edges = std::move(edges);
    std::vector<double> expl, impl;
    for (const auto& row : rows) {
        if (row.rci == 0.0) {
            row.explicit_link ? ++h.zero_explicit : ++h.zero_implicit;
        } else {
            (row.explicit_link ? expl : impl).push_back(row.rci);
        }
    }
    h.explicit_bins = stats::histogram(expl, h.edges);
    h.implicit_bins = stats::histogram(impl, h.edges);
    return h;
}

// Standardized OLS of RCI on the four covariates, HC3 errors. Unreachable
// distances enter as (max finite distance + 1) while the disconnected flag
// carries the unreachable signal. Constant columns are excluded from the fit
// and reported as undefined.
struct RciRegression {
    std::vector<std::string> terms;
    std::vector<double> coefficients;  // NaN where undefined
    std::vector<double> hc3_se;
    std::vector<bool> defined;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    std::size_t n = 0;
    std::size_t p_fitted = 0;
};

inline RciRegression rci_regression(std::span<const RciFeatureRow> rows) {
    const std::size_t n = rows.size();
    RciRegression out;
    out.terms = {"distance", "disconnected", "offset", "explicit"};
    const std::size_t p = out.terms.size();
    if (n < p + 2) {
        throw precondition_error("rci_regression: need at least " +
                                 std::to_string(p + 2) + " reposts, got " +
                                 std::to_string(n));
    }

    hop_t max_finite = 0;
    for (const auto& r : rows) {
        if (!r.disconnected) max_finite = std::max(max_finite, r.distance);
    }
    const double disconnected_code = static_cast<double>(max_finite) + 1.0;

    std::vector<std::vector<double>> raw(p, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        raw[0][i] = r.disconnected ? disconnected_code : static_cast<double>(r.distance);
        raw[1][i] = r.disconnected ? 1.0 : 0.0;
        raw[2][i] = static_cast<double>(r.offset_s);
        raw[3][i] = r.explicit_link ? 1.0 : 0.0;
        y[i] = r.rci;
    }

    out.coefficients.assign(p, std::numeric_limits<double>::quiet_NaN());
    out.hc3_se.assign(p, std::numeric_limits<double>::quiet_NaN());
    out.defined.assign(p, false);

    std::vector<std::vector<double>> design;
    std::vector<std::size_t> fitted_terms;
    for (std::size_t j = 0; j < p; ++j) {
        const double mu = stats::mean(raw[j]);
        if (!(stats::sample_sd(raw[j], mu) > 0.0)) continue;  // undefined, warned upstream
        design.push_back(stats::zstandardize(raw[j]));
        fitted_terms.push_back(j);
    }
    if (design.empty()) {
        throw precondition_error("rci_regression: every covariate is constant");
    }
    const std::vector<double> zy = stats::zstandardize(y);
    const stats::RegressionResult fit = stats::ols_hc3(design, zy);

    for (std::size_t k = 0; k < fitted_terms.size(); ++k) {
        out.coefficients[fitted_terms[k]] = fit.coefficients[k];
        out.hc3_se[fitted_terms[k]] = fit.hc3_se[k];
        out.defined[fitted_terms[k]] = true;
    }
    out.r_squared = fit.r_squared;
    out.adjusted_r_squared = fit.adjusted_r_squared;
    out.n = fit.n;
    out.p_fitted = fit.p;
    return out;
}

}  // namespace implink
