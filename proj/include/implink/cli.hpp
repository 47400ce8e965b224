#pragma once

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "implink/pipeline.hpp"
#include "implink/types.hpp"

namespace implink::cli {

// Exit codes: 0 success, 2 config error, 3 input format error,
// 4 analysis precondition failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_format = 3;
inline constexpr int exit_precondition = 4;

namespace detail {

inline void write_normalized(const LoadedDataset& data,
                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        write_edge_list(data.net, out);
    }
    std::ofstream posts(dir / "posts.tsv");
    std::ofstream reposts(dir / "reposts.tsv");
    for (const Cascade& c : data.cascades) {
        posts << c.tweet_id << '\t' << data.net.user_id(c.author) << '\t'
              << c.post_time << '\n';
        for (const RepostEvent& r : c.reposts) {
            reposts << c.tweet_id << '\t' << data.net.user_id(r.user) << '\t' << r.time
                    << '\n';
        }
    }
}

inline void print_load_summary(const AnalysisReport& report, std::ostream& out) {
    const auto& net = report.data.net;
    const auto& cs = report.cascade_stats;
    out << "loaded " << net.node_count() << " users, " << net.edge_count()
        << " follow links (" << net.load_stats().self_loops_dropped << " self-loops, "
        << net.load_stats().duplicate_edges_dropped << " duplicate edges dropped)\n"
        << "cascades: " << cs.posts_kept << " posts, " << cs.reposts_kept
        << " reposts kept (" << cs.unknown_tweet_reposts_dropped << " unknown-tweet, "
        << cs.self_reposts_dropped << " self, " << cs.duplicate_user_reposts_dropped
        << " duplicate, " << cs.pre_post_reposts_dropped << " pre-post drops)\n";
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
    RunConfig config;
    std::string normalized_out;
    std::string picked;

    CLI::App app{"implink — diffusion-cascade reconstruction and implicit-link analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--dataset-name", config.dataset_name, "label used in report rows");
    app.add_option("--edges", config.edges_path, "edge list: follower followee per line");
    app.add_option("--posts", config.posts_path, "post file: tweet_id author_id time");
    app.add_option("--reposts", config.reposts_path, "repost file: tweet_id user_id time");
    app.add_option("--activity", config.activity_path,
                   "activity log: user_a user_b time interaction");
    app.add_option("--interaction-tag", config.interaction_tag,
                   "interaction label treated as a repost (activity log)");
    app.add_flag("--swap-columns", config.swap_columns,
                 "edge file stores (followee, follower)");
    app.add_option("--seed", config.seed, "seed for every randomized stage");
    app.add_option("--workers", config.workers, "worker threads (0 = hardware)");
    app.add_option("--out", config.out_dir, "output directory");
    app.add_option("--min-events", config.min_events,
                   "user-metric filter threshold (reposts / received reposts)");
    app.add_option("--resolution", config.resolution, "community detection resolution");
    app.add_option("--n-null", config.n_null, "null cascades per original");
    app.add_option("--n-boot", config.n_boot, "bootstrap replicates");
    app.add_option("--partition-in", config.partition_in,
                   "reuse a partition CSV instead of detecting communities");
    app.add_option("--diameter-mode", config.diameter_mode, "auto | exact | sampled")
        ->check(CLI::IsMember({"auto", "exact", "sampled"}));
    app.add_option("--diameter-samples", config.diameter_samples,
                   "double-sweep starts in sampled mode");
    app.add_flag("--cascade-size-incl-author", config.cascade_size_includes_author,
                 "report participants per cascade as the headline cascade size");
    app.add_flag("--permutation-pvalues", config.permutation_pvalues,
                 "permutation p-values for correlation rows");
    app.add_option("--n-permutations", config.n_permutations,
                   "permutations when --permutation-pvalues is set");
    app.add_option("--analyses", config.analyses,
                   "analysis subset for report-all (default: all)")
        ->delimiter(',');

    auto* ingest = app.add_subcommand("ingest", "load inputs and report drop counts");
    ingest->add_option("--normalized-out", normalized_out,
                       "also write normalized edges/posts/reposts");
    app.add_subcommand("summary", "dataset overview row");
    app.add_subcommand("classify", "per-post implicit/explicit repost counts");
    app.add_subcommand("distance", "distance profile of reposting behavior");
    app.add_subcommand("rci", "repost contribution index features and histogram");
    app.add_subcommand("regress", "standardized RCI regression with HC3 errors");
    app.add_subcommand("community", "community detection and intra-community ratios");
    app.add_subcommand("nullmodel", "null-cascade bootstrap baseline");
    app.add_subcommand("metrics", "per-user IAR/SAR/RER with filters");
    app.add_subcommand("homophily", "adjacency and exact-distance correlations");
    app.add_subcommand("report-all", "every analysis");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    picked = app.get_subcommands().front()->get_name();
    try {
        if (picked == "ingest") {
            config.analyses = {"summary"};  // cheapest selection; nothing extra runs
            AnalysisReport report;
            report.config = config;
            report.hash = config_hash(config);
            report.data = load_dataset(config);
            report.cascade_stats = report.data.cascade_stats;
            detail::print_load_summary(report, std::cout);
            std::filesystem::create_directories(config.out_dir);
            {
                const auto& net = report.data.net;
                const auto& ns = net.load_stats();
                const auto& cs = report.cascade_stats;
                CsvWriter csv(std::filesystem::path(config.out_dir) / "load_report.csv",
                              provenance_json(config, report.hash, 14));
                csv.header("key,value");
                csv.row("edge_records", ns.edge_records);
                csv.row("follow_links", net.edge_count());
                csv.row("self_loops_dropped", ns.self_loops_dropped);
                csv.row("duplicate_edges_dropped", ns.duplicate_edges_dropped);
                csv.row("users_from_edges", ns.users_from_edges);
                csv.row("users_added_by_cascades", ns.users_added_by_cascades);
                csv.row("posts_kept", cs.posts_kept);
                csv.row("reposts_kept", cs.reposts_kept);
                csv.row("duplicate_posts_dropped", cs.duplicate_posts_dropped);
                csv.row("unknown_tweet_reposts_dropped", cs.unknown_tweet_reposts_dropped);
                csv.row("self_reposts_dropped", cs.self_reposts_dropped);
                csv.row("duplicate_user_reposts_dropped",
                        cs.duplicate_user_reposts_dropped);
                csv.row("pre_post_reposts_dropped", cs.pre_post_reposts_dropped);
                csv.row("other_interactions_skipped", cs.other_interactions_skipped);
            }
            if (!normalized_out.empty()) {
                detail::write_normalized(report.data, normalized_out);
            }
            return exit_ok;
        }

        if (picked != "report-all") config.analyses = {picked};
        const AnalysisReport report = run_pipeline(config);
        report.write(config.out_dir);
        detail::print_load_summary(report, std::cout);
        if (report.rci_conservation_violations > 0) {
            std::cerr << "warning: " << report.rci_conservation_violations
                      << " cascades violated the RCI mass balance\n";
        }
        if (report.regression) {
            for (std::size_t j = 0; j < report.regression->terms.size(); ++j) {
                if (!report.regression->defined[j]) {
                    std::cerr << "warning: regression covariate '"
                              << report.regression->terms[j]
                              << "' is constant; coefficient reported undefined\n";
                }
            }
        }
        if (report.null_ratios && report.null_ratios->fallback_substitutions > 0) {
            std::cout << "null model: " << report.null_ratios->fallback_substitutions
                      << " empty-pool fallbacks kept the original reposter\n";
        }
        std::cout << "reports written to " << config.out_dir << " (config "
                  << report.hash << ")\n";
        return exit_ok;
    } catch (const parse_error& e) {
        std::cerr << "input format error: " << e.what() << '\n';
        return exit_format;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const precondition_error& e) {
        std::cerr << "analysis precondition failure: " << e.what() << '\n';
        return exit_precondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace implink::cli
