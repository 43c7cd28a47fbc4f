// zslkit command-line driver.
//
//   zslkit make-splits     --config exp.json [--out dir]
//   zslkit train-regressor --config exp.json [--split split_01.json] [--out dir]
//   zslkit eval-zsl        --config exp.json [--self-train] [--augment aux.csv] [--k-neighbors K] [--ablation-grid]
//   zslkit eval-multishot  --config exp.json
//   zslkit quantize        --descriptors a.csv b.csv ... --k 4000 [--labels map.csv] [--out dir]
//
// Exit status is 0 iff the command wrote its output. Failures print one JSON
// object {"error": <kind>, "message": <text>} to stderr.

#include "zslkit/error.hpp"
#include "zslkit/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    bool self_train{ false };
    std::optional<std::string> augment;
    std::optional<std::size_t> k_neighbors;
    std::optional<std::string> out;
    std::optional<std::string> dataset;
    std::optional<std::size_t> count;
    bool random{ false };
};

void add_common(CLI::App &cmd, std::string &config_path, Overrides &o) {
    cmd.add_option("--config", config_path, "Experiment config JSON")->check(CLI::ExistingFile);
    cmd.add_option("--seed", o.seed, "Override the split/sampling seed");
    cmd.add_option("--out", o.out, "Override the output directory");
}

zslkit::ExperimentConfig effective_config(const std::string &config_path, const Overrides &o) {
    zslkit::ExperimentConfig config;
    if (!config_path.empty()) {
        config = zslkit::load_config(config_path);
    } else {
        config.output_dir = "runs";
    }
    if (o.dataset) {
        config.dataset = fs::path(*o.dataset).lexically_normal();
    }
    if (o.seed) {
        config.seed = *o.seed;
    }
    if (o.self_train) {
        config.self_train = true;
    }
    if (o.augment) {
        config.augment = true;
        config.auxiliary = fs::path(*o.augment).lexically_normal();
    }
    if (o.k_neighbors) {
        config.self_train_config.k = *o.k_neighbors;
    }
    if (o.out) {
        config.output_dir = fs::path(*o.out).lexically_normal();
    }
    if (o.count) {
        config.split_count = *o.count;
    }
    if (o.random) {
        config.predictor = "random";
    }
    return config;
}

void print_error(const std::string &kind, const std::string &message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

void print_run(const zslkit::RunResult &run) {
    std::cout << zslkit::format_report_table({ run.report });
    std::cout << "report: " << (run.run_dir / "report.json").string() << '\n';
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{ "Zero-shot action recognition in a word-embedding space" };
    app.require_subcommand(1);

    std::string config_path;
    Overrides o;

    auto *make_splits = app.add_subcommand("make-splits", "Write seen/unseen category split files");
    add_common(*make_splits, config_path, o);
    make_splits->add_option("--dataset", o.dataset, "Feature CSV (instead of the config's dataset)");
    make_splits->add_option("--count", o.count, "Number of splits");

    std::optional<std::string> split_file;
    auto *train = app.add_subcommand("train-regressor", "Train the feature-to-embedding regressor");
    add_common(*train, config_path, o);
    train->add_option("--split", split_file, "Train on the seen classes of this split file")->check(CLI::ExistingFile);
    train->add_option("--augment", o.augment, "Auxiliary feature CSV to add to training");

    bool ablation = false;
    auto *eval_zsl = app.add_subcommand("eval-zsl", "Zero-shot evaluation over category splits");
    add_common(*eval_zsl, config_path, o);
    eval_zsl->add_flag("--self-train", o.self_train, "Adapt prototypes by transductive self-training");
    eval_zsl->add_option("--augment", o.augment, "Auxiliary feature CSV for regressor training");
    eval_zsl->add_option("--k-neighbors", o.k_neighbors, "Neighbour count for self-training");
    eval_zsl->add_flag("--random", o.random, "Uniform random-guess baseline");
    eval_zsl->add_flag("--ablation-grid", ablation, "Run NN, NN+ST, NN+Aux and NN+ST+Aux");

    auto *eval_ms = app.add_subcommand("eval-multishot", "Supervised evaluation over fold files");
    add_common(*eval_ms, config_path, o);
    eval_ms->add_option("--augment", o.augment, "Auxiliary feature CSV for regressor training");

    zslkit::QuantizeOptions q;
    std::vector<std::string> descriptor_files;
    std::optional<std::string> label_file;
    std::string quantize_out = ".";
    bool raw_counts = false;
    auto *quantize = app.add_subcommand("quantize", "Learn a BoW codebook and encode descriptor files");
    quantize->add_option("--descriptors", descriptor_files, "Descriptor CSV files")->required()->check(CLI::ExistingFile);
    quantize->add_option("--k", q.k, "Codebook size")->capture_default_str();
    quantize->add_option("--seed", q.seed, "Sampling and k-means seed")->capture_default_str();
    quantize->add_option("--sample", q.sample, "Descriptors sampled for codebook learning (0 = all)")->capture_default_str();
    quantize->add_option("--max-iters", q.max_iters, "Lloyd iteration cap")->capture_default_str();
    quantize->add_option("--labels", label_file, "CSV mapping video id to label")->check(CLI::ExistingFile);
    quantize->add_flag("--counts", raw_counts, "Write raw counts instead of frequencies");
    quantize->add_option("--out", quantize_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        print_error("usage_error", e.what());
        return 2;
    }

    try {
        if (*quantize) {
            for (const auto &f : descriptor_files) {
                q.descriptor_files.emplace_back(f);
            }
            if (label_file) {
                q.labels = *label_file;
            }
            q.normalize = !raw_counts;
            q.output_dir = quantize_out;
            const auto result = zslkit::run_quantize(q);
            std::cout << "encoded " << result.videos << " videos";
            if (result.empty_videos > 0) {
                std::cout << " (" << result.empty_videos << " without descriptors)";
            }
            std::cout << "\ncodebook: " << result.codebook_path.string() << "\nfeatures: " << result.features_path.string() << '\n';
            return 0;
        }

        const zslkit::ExperimentConfig config = effective_config(config_path, o);
        if (*make_splits) {
            for (const auto &p : zslkit::run_make_splits(config)) {
                std::cout << p.string() << '\n';
            }
            return 0;
        }
        if (*train) {
            std::optional<zslkit::SplitSpec> split;
            if (split_file) {
                split = zslkit::load_split(*split_file);
            }
            std::cout << "model: " << zslkit::run_train_regressor(config, split).string() << '\n';
            return 0;
        }
        if (*eval_zsl) {
            if (ablation) {
                std::vector<zslkit::EvaluationReport> reports;
                for (const auto &c : zslkit::ablation_grid(config)) {
                    const auto run = zslkit::run_zsl_evaluation(c);
                    std::cout << "report: " << (run.run_dir / "report.json").string() << '\n';
                    reports.push_back(run.report);
                }
                std::cout << zslkit::format_report_table(reports);
                return 0;
            }
            print_run(zslkit::run_zsl_evaluation(config));
            return 0;
        }
        if (*eval_ms) {
            print_run(zslkit::run_multishot_evaluation(config));
            return 0;
        }
    } catch (const zslkit::Error &e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception &e) {
        print_error("error", e.what());
        return 1;
    }
    return 1;
}
