#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "implink/cascade.hpp"
#include "implink/follow_network.hpp"
#include "implink/homophily.hpp"
#include "implink/louvain.hpp"
#include "implink/null_model.hpp"
#include "implink/parallel.hpp"
#include "implink/rci.hpp"
#include "implink/report.hpp"
#include "implink/rng.hpp"
#include "implink/stats.hpp"
#include "implink/types.hpp"
#include "implink/user_metrics.hpp"

namespace implink {

struct RunConfig {
    std::string dataset_name = "dataset";
    std::string edges_path;
    std::string posts_path;
    std::string reposts_path;
    std::string activity_path;
    std::string interaction_tag = "RT";
    bool swap_columns = false;
    std::uint64_t seed = 42;
    unsigned workers = 0;  // 0 = hardware concurrency
    std::uint32_t min_events = 5;
    double resolution = 1.0;
    std::uint32_t n_null = 10;
    std::uint32_t n_boot = 1000;
    std::string out_dir = "out";
    std::vector<std::string> analyses;  // empty = all
    std::string partition_in;
    std::string diameter_mode = "auto";  // auto | exact | sampled
    std::size_t diameter_exact_threshold = 100000;
    std::uint32_t diameter_samples = 16;
    bool cascade_size_includes_author = false;
    bool permutation_pvalues = false;
    std::uint32_t n_permutations = 1000;
};

inline const std::vector<std::string>& all_analyses() {
    static const std::vector<std::string> names = {
        "summary", "classify", "distance",  "rci",     "regress",
        "community", "nullmodel", "metrics", "homophily"};
    return names;
}

struct AnalysisSelection {
    bool summary = false, classify = false, distance = false, rci = false,
         regress = false, community = false, nullmodel = false, metrics = false,
         homophily = false;

    static AnalysisSelection from_names(const std::vector<std::string>& names) {
        AnalysisSelection s;
        if (names.empty()) {
            s.summary = s.classify = s.distance = s.rci = s.regress = s.community =
                s.nullmodel = s.metrics = s.homophily = true;
            return s;
        }
        for (const auto& name : names) {
            if (name == "summary") s.summary = true;
            else if (name == "classify") s.classify = true;
            else if (name == "distance") s.distance = true;
            else if (name == "rci") s.rci = true;
            else if (name == "regress") s.regress = true;
            else if (name == "community") s.community = true;
            else if (name == "nullmodel") s.nullmodel = true;
            else if (name == "metrics") s.metrics = true;
            else if (name == "homophily") s.homophily = true;
            else throw config_error("unknown analysis '" + name + "'");
        }
        return s;
    }
};

// Worker count and output directory are excluded: results are identical
// across both.
inline std::string canonical_config_string(const RunConfig& c) {
    std::ostringstream s;
    s << "dataset=" << c.dataset_name << ";edges=" << c.edges_path
      << ";posts=" << c.posts_path << ";reposts=" << c.reposts_path
      << ";activity=" << c.activity_path << ";tag=" << c.interaction_tag
      << ";swap=" << c.swap_columns << ";seed=" << c.seed
      << ";min_events=" << c.min_events << ";resolution=" << format_double(c.resolution)
      << ";n_null=" << c.n_null << ";n_boot=" << c.n_boot << ";partition_in="
      << c.partition_in << ";diameter=" << c.diameter_mode << ","
      << c.diameter_exact_threshold << "," << c.diameter_samples
      << ";cascade_size_incl_author=" << c.cascade_size_includes_author
      << ";perm_p=" << c.permutation_pvalues << "," << c.n_permutations
      << ";analyses=";
    for (const auto& a : c.analyses) s << a << "+";
    return s.str();
}

inline std::string config_hash(const RunConfig& c) {
    return hex64(fnv1a64(canonical_config_string(c)));
}

// --- dataset loading ---

struct LoadedDataset {
    FollowNetwork net;
    std::vector<Cascade> cascades;
    CascadeLoadStats cascade_stats;
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open input file: " + path);
    return in;
}

inline LoadedDataset load_dataset(const RunConfig& config) {
    if (config.edges_path.empty()) {
        throw config_error("an edge file is required (--edges)");
    }
    const bool have_posts = !config.posts_path.empty() && !config.reposts_path.empty();
    const bool have_activity = !config.activity_path.empty();
    if (have_posts == have_activity) {
        throw config_error(
            "provide either --posts and --reposts, or --activity (not both)");
    }

    LoadedDataset data;
    NetworkBuilder builder;
    {
        auto in = open_input(config.edges_path);
        load_edges(in, builder, config.swap_columns, config.edges_path);
    }
    builder.snapshot_edge_users();
    if (have_posts) {
        auto posts = open_input(config.posts_path);
        auto reposts = open_input(config.reposts_path);
        data.cascades = load_cascades(posts, reposts, builder, &data.cascade_stats,
                                      config.posts_path, config.reposts_path);
    } else {
        auto activity = open_input(config.activity_path);
        data.cascades = load_activity_cascades(activity, builder, config.interaction_tag,
                                               &data.cascade_stats, config.activity_path);
    }
    data.net = std::move(builder).build();
    return data;
}

// --- summary (dataset overview row) ---

struct DatasetSummary {
    std::uint64_t users = 0;
    std::uint64_t follow_links = 0;
    double density = 0.0;
    hop_t diameter = 0;
    std::string diameter_mode;
    std::uint64_t posts = 0;
    std::uint64_t reposts = 0;
    std::optional<double> explicit_ratio;
    std::optional<double> mean_cascade_size;              // reposts per post
    std::optional<double> mean_cascade_size_incl_author;  // participants per cascade
};

namespace detail {

inline hop_t exact_diameter(const FollowNetwork& net) {
    BfsScratch scratch;
    hop_t best = 0;
    for (node_t u = 0; u < net.node_count(); ++u) {
        scratch.run(net, u);
        best = std::max(best, scratch.max_level());
    }
    return best;
}

// Multi-start double-sweep lower bound on the largest finite eccentricity.
inline hop_t sampled_diameter(const FollowNetwork& net, std::uint32_t samples,
                              std::uint64_t seed) {
    const std::size_t n = net.node_count();
    BfsScratch scratch;
    hop_t best = 0;
    Xoshiro256ss rng(derive_seed(seed, 0x6469616dULL));
    for (std::uint32_t s = 0; s < samples; ++s) {
        node_t start = static_cast<node_t>(rng.bounded(n));
        for (int sweep = 0; sweep < 2; ++sweep) {
            scratch.run(net, start);
            best = std::max(best, scratch.max_level());
            if (scratch.reached_count() < 2) break;
            start = scratch.visited().back();  // farthest node found
        }
    }
    return best;
}

}  // namespace detail

inline DatasetSummary summarize_dataset(const FollowNetwork& net,
                                        const std::vector<Cascade>& cascades,
                                        const std::vector<DiffusionGraph>& graphs,
                                        const RunConfig& config) {
    DatasetSummary s;
    s.users = net.node_count();
    s.follow_links = net.edge_count();
    if (net.node_count() > 1) {
        s.density = static_cast<double>(net.edge_count()) /
                    (static_cast<double>(net.node_count()) *
                     static_cast<double>(net.node_count() - 1));
    }
    if (net.node_count() > 0) {
        const bool exact = config.diameter_mode == "exact" ||
                           (config.diameter_mode == "auto" &&
                            net.node_count() < config.diameter_exact_threshold);
        s.diameter_mode = exact ? "exact" : "sampled";
        s.diameter = exact ? detail::exact_diameter(net)
                           : detail::sampled_diameter(net, config.diameter_samples,
                                                      config.seed);
    } else {
        s.diameter_mode = "exact";
    }
    s.posts = cascades.size();
    std::uint64_t reposts = 0, explicit_count = 0;
    for (const auto& dg : graphs) {
        reposts += dg.size();
        explicit_count += dg.explicit_count;
    }
    s.reposts = reposts;
    if (reposts > 0) {
        s.explicit_ratio = static_cast<double>(explicit_count) /
                           static_cast<double>(reposts);
    }
    if (!cascades.empty()) {
        s.mean_cascade_size = static_cast<double>(reposts) /
                              static_cast<double>(cascades.size());
        s.mean_cascade_size_incl_author =
            static_cast<double>(reposts + cascades.size()) /
            static_cast<double>(cascades.size());
    }
    return s;
}

// --- partition CSV round trip (detection is expensive; reuse across runs) ---

inline void write_partition_csv(const Partition& partition, const FollowNetwork& net,
                                const std::filesystem::path& path,
                                const std::string& provenance) {
    CsvWriter csv(path, provenance);
    csv.header("user_id,community_id");
    for (node_t u = 0; u < net.node_count(); ++u) {
        csv.row(net.user_id(u), partition.community[u]);
    }
}

inline Partition load_partition_csv(const std::string& path, const FollowNetwork& net,
                                    double resolution = 1.0) {
    auto in = open_input(path);
    Partition part;
    part.community.assign(net.node_count(), invalid_node);
    std::string line;
    std::size_t line_no = 0;
    std::size_t assigned = 0;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        if (line.rfind("user_id", 0) == 0) continue;  // header
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw parse_error(path, line_no, "expected user_id,community_id");
        }
        const ext_id_t user = detail::parse_u64(
            std::string_view(line).substr(0, comma), path, line_no);
        const std::uint64_t comm = detail::parse_u64(
            std::string_view(line).substr(comma + 1), path, line_no);
        if (!net.has_user(user)) {
            throw parse_error(path, line_no, "user not present in network");
        }
        const node_t u = net.node_of(user);
        if (part.community[u] == invalid_node) ++assigned;
        part.community[u] = static_cast<std::uint32_t>(comm);
    }
    if (assigned != net.node_count()) {
        throw precondition_error("partition file covers " + std::to_string(assigned) +
                                 " of " + std::to_string(net.node_count()) + " users");
    }
    part.community_count = detail::renumber(part.community);
    const WeightedGraph projection = undirected_projection(net);
    part.modularity = modularity(projection, part.community, resolution);
    part.pass_modularity = {part.modularity};
    return part;
}

// --- full report ---

struct PerPostCounts {
    ext_id_t tweet_id = 0;
    ext_id_t author_id = 0;
    std::uint64_t implicit_reposts = 0;
    std::uint64_t explicit_reposts = 0;
};

struct MetricHistogram {
    std::string metric;
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
};

struct AnalysisReport {
    RunConfig config;
    std::string hash;
    LoadedDataset data;  // network + cascades the report was computed from
    std::vector<DiffusionGraph> graphs;
    CascadeLoadStats cascade_stats;
    std::uint64_t rci_conservation_violations = 0;

    std::optional<DatasetSummary> summary;
    std::vector<PerPostCounts> per_post;
    std::optional<DistanceProfile> profile;
    std::vector<RciFeatureRow> rci_rows;
    std::optional<RciHistogram> rci_hist;
    std::optional<RciRegression> regression;
    std::optional<Partition> partition;
    std::optional<IntraCommunityRatios> community_ratios;
    std::optional<BootstrapRatios> null_ratios;
    std::optional<UserMetrics> metrics;
    std::optional<FilteredUsers> filters;
    std::vector<MetricHistogram> metric_hists;
    std::vector<CorrelationRow> homophily_rows;

    void write(const std::filesystem::path& out_dir) const;
};

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

// One-line provenance comment for every emitted file; carries the config hash
// plus the seed and thresholds so each table is self-describing.
inline std::string provenance_json(const RunConfig& c, const std::string& hash,
                                   std::size_t rows) {
    std::ostringstream s;
    s << "{\"tool\":\"implink\",\"dataset\":\"" << detail::json_escape(c.dataset_name)
      << "\",\"config_hash\":\"" << hash << "\",\"seed\":" << c.seed
      << ",\"min_events\":" << c.min_events
      << ",\"resolution\":" << format_double(c.resolution)
      << ",\"n_null\":" << c.n_null << ",\"n_boot\":" << c.n_boot
      << ",\"swap_columns\":" << (c.swap_columns ? "true" : "false")
      << ",\"rows\":" << rows << "}";
    return s.str();
}

// --- homophily assembly ---

namespace detail {

inline MetricSample make_sample(std::span<const node_t> population,
                                const UserMetrics& metrics,
                                std::optional<double> (*rate)(const UserMetrics&, node_t)) {
    MetricSample sample;
    for (node_t u : population) {
        if (const auto v = rate(metrics, u)) {
            sample.users.push_back(u);
            sample.values.push_back(*v);
        }
    }
    return sample;
}

inline void correlation_rows_for_metric(
    const std::string& metric_name, const MetricSample& sample, const FollowNetwork& net,
    const MutualGraph& mutual, const RunConfig& config,
    std::vector<CorrelationRow>& rows) {
    const AdjacencyKind kinds[] = {AdjacencyKind::followees, AdjacencyKind::followers,
                                   AdjacencyKind::mutual};
    auto fill = [&](CorrelationRow& row, std::span<const std::pair<double, double>> pairs) {
        row.n_pairs = pairs.size();
        try {
            const auto corr = spearman_with_p(pairs);
            row.rho = corr.rho;
            if (config.permutation_pvalues) {
                std::vector<double> x(pairs.size()), y(pairs.size());
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    x[i] = pairs[i].first;
                    y[i] = pairs[i].second;
                }
                row.p_value = stats::spearman_permutation_p(
                    x, y, config.n_permutations,
                    derive_seed(config.seed, fnv1a64(metric_name + row.mode + row.key)));
            } else {
                row.p_value = corr.p_value;
            }
        } catch (const precondition_error&) {
            // too few pairs or constant margin: rho/p stay undefined
        }
    };

    for (const auto kind : kinds) {
        CorrelationRow row;
        row.metric = metric_name;
        row.mode = "adjacency";
        row.key = adjacency_name(kind);
        const auto pairs = neighbor_average_pairs(sample, net, mutual, kind);
        fill(row, pairs);
        rows.push_back(std::move(row));
    }

    const MutualGraph induced = induce_mutual(mutual, sample.users);
    for (hop_t d = 1; d <= 4; ++d) {
        CorrelationRow row;
        row.metric = metric_name;
        row.mode = "distance";
        row.key = std::to_string(d);
        const auto averages = distance_average_pairs(sample.values, induced, d);
        row.share = averages.mean_share;
        fill(row, averages.pairs);
        rows.push_back(std::move(row));
    }
}

}  // namespace detail

inline AnalysisReport run_pipeline(const RunConfig& config) {
    const AnalysisSelection sel = AnalysisSelection::from_names(config.analyses);
    const unsigned workers = resolve_workers(config.workers);

    AnalysisReport report;
    report.config = config;
    report.hash = config_hash(config);

    report.data = load_dataset(config);
    const FollowNetwork& net = report.data.net;
    const std::vector<Cascade>& cascades = report.data.cascades;
    report.cascade_stats = report.data.cascade_stats;

    // diffusion graphs + RCI (+ fused distance profile) in one parallel pass
    std::vector<DiffusionGraph>& graphs = report.graphs;
    graphs.assign(cascades.size(), {});
    std::vector<std::vector<double>> rci_values(cascades.size());
    const bool want_profile = sel.distance;
    const bool want_rci = sel.rci || sel.regress;
    std::vector<DistanceProfile> profile_partials(workers);
    std::vector<std::uint64_t> violation_partials(workers, 0);
    parallel_chunks(cascades.size(), workers,
                    [&](unsigned worker, std::size_t begin, std::size_t end) {
        BfsScratch scratch;
        DistanceProfile& profile = profile_partials[worker];
        profile.unreachable.distance = unreachable_hops;
        for (std::size_t c = begin; c < end; ++c) {
            scratch.run(net, cascades[c].author);
            graphs[c] = build_diffusion_graph(cascades[c], net, scratch);
            graphs[c].cascade_index = static_cast<std::uint32_t>(c);
            rci_values[c] = compute_rci(graphs[c]);
            double residual = 0.0;
            if (!rci_conservation_check(graphs[c], rci_values[c], 1e-9, &residual)) {
                ++violation_partials[worker];
            }
            if (want_profile) {
                const hop_t max_d = scratch.max_level();
                if (profile.rows.size() < static_cast<std::size_t>(max_d)) {
                    profile.rows.resize(static_cast<std::size_t>(max_d));
                }
                for (hop_t d = 1; d <= max_d; ++d) {
                    auto& row = profile.rows[static_cast<std::size_t>(d - 1)];
                    row.distance = d;
                    row.users_at_distance += scratch.level_nodes(d).size();
                }
                profile.unreachable.users_at_distance += scratch.unreached_count();
                const DiffusionGraph& dg = graphs[c];
                for (std::uint32_t i = 0; i < dg.size(); ++i) {
                    const hop_t d = dg.source_distance[i];
                    DistanceProfileRow& row =
                        d == unreachable_hops
                            ? profile.unreachable
                            : profile.rows[static_cast<std::size_t>(d - 1)];
                    ++row.reposting_users;
                    dg.explicit_link[i] ? ++row.explicit_reposts : ++row.implicit_reposts;
                }
            }
        }
    });
    for (auto v : violation_partials) report.rci_conservation_violations += v;

    if (want_profile) {
        DistanceProfile merged;
        merged.unreachable.distance = unreachable_hops;
        for (const auto& part : profile_partials) {
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
        report.profile = std::move(merged);
    }

    if (sel.summary) {
        report.summary = summarize_dataset(net, cascades, graphs, config);
    }
    if (sel.classify) {
        report.per_post.reserve(cascades.size());
        for (std::size_t c = 0; c < cascades.size(); ++c) {
            PerPostCounts counts;
            counts.tweet_id = cascades[c].tweet_id;
            counts.author_id = net.user_id(cascades[c].author);
            counts.explicit_reposts = graphs[c].explicit_count;
            counts.implicit_reposts = graphs[c].implicit_count;
            report.per_post.push_back(counts);
        }
    }
    if (want_rci) {
        report.rci_rows = rci_feature_table(cascades, graphs, rci_values, net);
        if (sel.rci) report.rci_hist = rci_distribution(report.rci_rows);
        if (sel.regress) report.regression = rci_regression(report.rci_rows);
    }
    if (sel.community || sel.nullmodel) {
        report.partition = config.partition_in.empty()
                               ? louvain(net, config.resolution, config.seed)
                               : load_partition_csv(config.partition_in, net,
                                                    config.resolution);
        report.community_ratios = intra_community_ratio(cascades, graphs, *report.partition);
        if (sel.nullmodel) {
            report.null_ratios =
                bootstrap_intra_ratio(cascades, graphs, *report.partition, net,
                                      config.n_null, config.n_boot, config.seed, workers);
        }
    }
    MutualGraph mutual;
    if (sel.metrics || sel.homophily) {
        mutual = mutual_graph(net);
        report.metrics = exposure_adoption_counts(cascades, graphs, net, workers);
        report.filters = apply_filters(*report.metrics, mutual, config.min_events);

        auto make_hist = [](const std::string& name, const MetricSample& sample) {
            MetricHistogram h;
            h.metric = name;
            for (int i = 0; i <= 20; ++i) h.edges.push_back(i / 20.0);
            const auto counts = stats::histogram(sample.values, h.edges);
            h.counts = counts.counts;
            h.counts.back() += counts.overflow;  // rates of exactly 1.0
            return h;
        };
        const MetricSample iar_sample =
            detail::make_sample(report.filters->repost_population, *report.metrics, iar);
        const MetricSample sar_sample =
            detail::make_sample(report.filters->repost_population, *report.metrics, sar);
        const MetricSample rer_sample =
            detail::make_sample(report.filters->received_population, *report.metrics, rer);
        if (sel.metrics) {
            report.metric_hists.push_back(make_hist("iar", iar_sample));
            report.metric_hists.push_back(make_hist("sar", sar_sample));
            report.metric_hists.push_back(make_hist("rer", rer_sample));
        }
        if (sel.homophily) {
            detail::correlation_rows_for_metric("iar", iar_sample, net, mutual, config,
                                                report.homophily_rows);
            detail::correlation_rows_for_metric("sar", sar_sample, net, mutual, config,
                                                report.homophily_rows);
            detail::correlation_rows_for_metric("rer", rer_sample, net, mutual, config,
                                                report.homophily_rows);
        }
    }
    return report;
}

inline void AnalysisReport::write(const std::filesystem::path& out_dir) const {
    const FollowNetwork& net = data.net;
    std::filesystem::create_directories(out_dir);
    const AnalysisSelection sel = AnalysisSelection::from_names(config.analyses);
    auto prov = [&](std::size_t rows) { return provenance_json(config, hash, rows); };

    {
        const NetworkLoadStats& net_stats = net.load_stats();
        CsvWriter csv(out_dir / "load_report.csv", prov(15));
        csv.header("key,value");
        csv.row("edge_records", net_stats.edge_records);
        csv.row("follow_links", net.edge_count());
        csv.row("self_loops_dropped", net_stats.self_loops_dropped);
        csv.row("duplicate_edges_dropped", net_stats.duplicate_edges_dropped);
        csv.row("users_from_edges", net_stats.users_from_edges);
        csv.row("users_added_by_cascades", net_stats.users_added_by_cascades);
        csv.row("posts_kept", cascade_stats.posts_kept);
        csv.row("reposts_kept", cascade_stats.reposts_kept);
        csv.row("duplicate_posts_dropped", cascade_stats.duplicate_posts_dropped);
        csv.row("unknown_tweet_reposts_dropped",
                cascade_stats.unknown_tweet_reposts_dropped);
        csv.row("self_reposts_dropped", cascade_stats.self_reposts_dropped);
        csv.row("duplicate_user_reposts_dropped",
                cascade_stats.duplicate_user_reposts_dropped);
        csv.row("pre_post_reposts_dropped", cascade_stats.pre_post_reposts_dropped);
        csv.row("other_interactions_skipped", cascade_stats.other_interactions_skipped);
        csv.row("rci_conservation_violations", rci_conservation_violations);
    }

    if (summary) {
        CsvWriter csv(out_dir / "summary.csv", prov(1));
        csv.header(
            "dataset,users,follow_links,density,diameter,diameter_mode,posts,reposts,"
            "explicit_link_ratio,mean_cascade_size,mean_cascade_size_incl_author");
        const DatasetSummary& s = *summary;
        csv.row(config.dataset_name, s.users, s.follow_links, s.density, s.diameter,
                s.diameter_mode, s.posts, s.reposts, format_optional(s.explicit_ratio),
                format_optional(s.mean_cascade_size),
                format_optional(s.mean_cascade_size_incl_author));
    }

    if (sel.classify) {
        CsvWriter csv(out_dir / "per_post_counts.csv", prov(per_post.size()));
        csv.header("tweet_id,author_id,implicit_reposts,explicit_reposts");
        for (const auto& row : per_post) {
            csv.row(row.tweet_id, row.author_id, row.implicit_reposts,
                    row.explicit_reposts);
        }
    }

    if (profile) {
        CsvWriter csv(out_dir / "distance_profile.csv", prov(profile->rows.size() + 1));
        csv.header(
            "distance,users_at_distance,reposting_users,implicit_reposts,"
            "explicit_reposts");
        for (const auto& row : profile->rows) {
            csv.row(row.distance, row.users_at_distance, row.reposting_users,
                    row.implicit_reposts, row.explicit_reposts);
        }
        const auto& u = profile->unreachable;
        csv.row(u.distance, u.users_at_distance, u.reposting_users, u.implicit_reposts,
                u.explicit_reposts);
    }

    if (sel.rci) {
        {
            CsvWriter csv(out_dir / "rci_features.csv", prov(rci_rows.size()));
            csv.header("cascade_id,user_id,rci,distance,disconnected,offset_s,explicit");
            for (const auto& row : rci_rows) {
                csv.row(row.cascade_id, row.user_id, row.rci, row.distance,
                        row.disconnected ? 1 : 0, row.offset_s,
                        row.explicit_link ? 1 : 0);
            }
        }
        if (rci_hist) {
            const auto& h = *rci_hist;
            const std::size_t bins = h.edges.size() + 1;  // zero + under + bins + over
            CsvWriter csv(out_dir / "rci_histogram.csv", prov(2 * (bins + 1)));
            csv.header("label,bin_lo,bin_hi,count");
            auto emit = [&](const char* label, std::uint64_t zero,
                            const stats::Histogram& bins_for_label) {
                csv.row(label, 0.0, 0.0, zero);
                csv.row(label, 0.0, h.edges.front(), bins_for_label.underflow);
                for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
                    csv.row(label, h.edges[i], h.edges[i + 1], bins_for_label.counts[i]);
                }
                csv.row(label, h.edges.back(), "inf", bins_for_label.overflow);
            };
            emit("explicit", h.zero_explicit, h.explicit_bins);
            emit("implicit", h.zero_implicit, h.implicit_bins);
        }
    }

    if (regression) {
        const auto& reg = *regression;
        CsvWriter csv(out_dir / "rci_regression.csv", prov(reg.terms.size() + 3));
        csv.header("term,value,hc3_se,defined");
        for (std::size_t j = 0; j < reg.terms.size(); ++j) {
            csv.row(reg.terms[j], reg.coefficients[j], reg.hc3_se[j],
                    reg.defined[j] ? 1 : 0);
        }
        csv.row("r_squared", reg.r_squared, "", 1);
        csv.row("adjusted_r_squared", reg.adjusted_r_squared, "", 1);
        csv.row("n", reg.n, "", 1);
    }

    if (partition && sel.community) {
        write_partition_csv(*partition, net, out_dir / "partition.csv",
                            prov(net.node_count()));
        CsvWriter csv(out_dir / "community_ratio.csv", prov(2));
        csv.header("dataset,link_type,intra_reposts,total_reposts,ratio,modularity,"
                   "communities");
        const auto& ratios = *community_ratios;
        auto emit = [&](const char* type, const RatioCount& rc) {
            csv.row(config.dataset_name, type, rc.intra, rc.total,
                    rc.defined() ? format_double(rc.value()) : std::string{},
                    partition->modularity, partition->community_count);
        };
        emit("explicit", ratios.explicit_links);
        emit("implicit", ratios.implicit_links);
    }

    if (null_ratios) {
        CsvWriter csv(out_dir / "community_null.csv", prov(2));
        csv.header(
            "dataset,link_type,observed_ratio,null_mean,null_sd,n_null,n_boot,seed");
        const auto& nr = *null_ratios;
        auto emit = [&](const char* type, const RatioCount& observed, bool defined,
                        double mean, double sd) {
            csv.row(config.dataset_name, type,
                    observed.defined() ? format_double(observed.value()) : std::string{},
                    defined ? format_double(mean) : std::string{},
                    defined ? format_double(sd) : std::string{}, nr.n_null, nr.n_boot,
                    nr.seed);
        };
        emit("explicit", nr.observed.explicit_links, nr.null_explicit_defined,
             nr.null_mean_explicit, nr.null_sd_explicit);
        emit("implicit", nr.observed.implicit_links, nr.null_implicit_defined,
             nr.null_mean_implicit, nr.null_sd_implicit);
    }

    if (metrics && sel.metrics) {
        const UserMetrics& m = *metrics;
        std::vector<node_t> active;
        for (node_t u = 0; u < m.node_count(); ++u) {
            if (m.adopted[u] || m.exposed[u] || m.received[u]) active.push_back(u);
        }
        {
            CsvWriter csv(out_dir / "user_metrics.csv", prov(active.size()));
            csv.header(
                "user_id,adopted,exposed,adopted_exposed,received,received_explicit,"
                "iar,sar,rer,pass_repost,pass_received,mutual");
            const auto& f = *filters;
            std::vector<std::uint8_t> in_repost(m.node_count(), 0),
                in_received(m.node_count(), 0), has_mutual(m.node_count(), 0);
            for (node_t u : f.repost_population) in_repost[u] = 1;
            for (node_t u : f.received_population) in_received[u] = 1;
            for (node_t u : f.repost_population_mutual) has_mutual[u] = 1;
            for (node_t u : f.received_population_mutual) has_mutual[u] = 1;
            for (node_t u : active) {
                csv.row(net.user_id(u), m.adopted[u], m.exposed[u], m.adopted_exposed[u],
                        m.received[u], m.received_explicit[u],
                        format_optional(iar(m, u)), format_optional(sar(m, u)),
                        format_optional(rer(m, u)), in_repost[u] ? 1 : 0,
                        in_received[u] ? 1 : 0, has_mutual[u] ? 1 : 0);
            }
        }
        {
            const auto& f = *filters;
            CsvWriter csv(out_dir / "filter_funnel.csv", prov(6));
            csv.header("population,stage,count");
            csv.row("repost", "original", f.repost_original);
            csv.row("repost", "min_events", f.repost_population.size());
            csv.row("repost", "min_events_mutual", f.repost_population_mutual.size());
            csv.row("received", "original", f.received_original);
            csv.row("received", "min_events", f.received_population.size());
            csv.row("received", "min_events_mutual", f.received_population_mutual.size());
        }
        {
            std::size_t rows = 0;
            for (const auto& h : metric_hists) rows += h.counts.size();
            CsvWriter csv(out_dir / "metric_histograms.csv", prov(rows));
            csv.header("metric,bin_lo,bin_hi,count");
            for (const auto& h : metric_hists) {
                for (std::size_t i = 0; i < h.counts.size(); ++i) {
                    csv.row(h.metric, h.edges[i], h.edges[i + 1], h.counts[i]);
                }
            }
        }
    }

    if (sel.homophily) {
        CsvWriter csv(out_dir / "homophily.csv", prov(homophily_rows.size()));
        csv.header("metric,mode,key,rho,p,n,share");
        for (const auto& row : homophily_rows) {
            csv.row(row.metric, row.mode, row.key, format_optional(row.rho),
                    format_optional(row.p_value), row.n_pairs,
                    format_optional(row.share));
        }
    }
}

}  // namespace implink
