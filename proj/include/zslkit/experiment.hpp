#pragma once

#include "zslkit/bow.hpp"
#include "zslkit/classifier.hpp"
#include "zslkit/dataset.hpp"
#include "zslkit/regression.hpp"
#include "zslkit/zsl.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zslkit {

/// Everything a run depends on. Relative paths are resolved against the config file's directory.
struct ExperimentConfig {
    std::filesystem::path dataset;
    std::string dataset_name;
    std::optional<std::filesystem::path> auxiliary;
    std::filesystem::path embeddings;

    /// Unset: heuristic gamma from the training features of each split.
    std::optional<double> gamma;
    bool chi2_halved{ true };
    GammaOptions gamma_options{};

    SvrConfig svr{};
    SvcConfig svc{};

    bool self_train{ false };
    SelfTrainConfig self_train_config{};
    bool augment{ false };
    bool normalize_prototypes{ true };

    std::size_t split_count{ 30 };
    std::uint64_t seed{ 0 };
    /// Directory of split_XX.json files to use instead of generating splits.
    std::optional<std::filesystem::path> split_dir;
    /// "regression" (the model) or "random" (uniform guessing baseline).
    std::string predictor{ "regression" };

    /// Multi-shot fold file: {"folds": [{"train": [ids], "test": [ids]}, ...]}.
    std::optional<std::filesystem::path> folds;

    std::filesystem::path output_dir{ "runs" };

    /// Throws InvalidArgument on inconsistent settings or missing files.
    void validate(bool need_folds = false) const;
};

[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json &json, const std::filesystem::path &base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path &path);
/// Canonical form; the fingerprint is computed over its compact dump.
[[nodiscard]] nlohmann::ordered_json config_to_json(const ExperimentConfig &config);
/// 16 hex digits of FNV-1a 64 over the canonical config JSON.
[[nodiscard]] std::string config_fingerprint(const ExperimentConfig &config);
/// "NN", "NN + ST", "NN + Aux", "NN + ST + Aux" or "Random Guess".
[[nodiscard]] std::string method_name(const ExperimentConfig &config);

struct SplitResult {
    std::size_t index{ 0 };
    std::size_t test_instances{ 0 };
    std::size_t correct{ 0 };
    /// Per-instance accuracy, percent.
    double accuracy{ 0.0 };
    /// Mean of per-class recalls, percent.
    double class_mean_accuracy{ 0.0 };
    /// true class -> predicted class -> count
    std::map<std::string, std::map<std::string, std::size_t>> confusion;
};

struct EvaluationReport {
    std::string mode;
    std::string method;
    std::string fingerprint;
    nlohmann::ordered_json config;
    std::vector<SplitResult> splits;
    double mean_accuracy{ 0.0 };
    double std_accuracy{ 0.0 };
    double mean_class_accuracy{ 0.0 };
    double std_class_accuracy{ 0.0 };

    /// Recompute the aggregates from `splits`.
    void aggregate();
    /// Throws if stored aggregates disagree with `splits` by more than 1e-9 or accuracies leave [0, 100].
    void verify() const;
};

[[nodiscard]] SplitResult score_predictions(std::size_t index, const Dataset &test, const std::vector<Prediction> &predictions);
/// Mean and sample standard deviation (0 for a single value).
[[nodiscard]] std::pair<double, double> mean_and_std(const std::vector<double> &values);

[[nodiscard]] nlohmann::ordered_json report_to_json(const EvaluationReport &report);
[[nodiscard]] EvaluationReport report_from_json(const nlohmann::json &json);
/// Fixed-width "method  mean ± std" table.
[[nodiscard]] std::string format_report_table(const std::vector<EvaluationReport> &reports);

struct RunResult {
    EvaluationReport report;
    std::filesystem::path run_dir;
};

/// Zero-shot protocol over config.split_count category splits; writes report.json,
/// splits/split_XX.json and predictions/split_XX.csv under output_dir/<fingerprint>.
[[nodiscard]] RunResult run_zsl_evaluation(const ExperimentConfig &config);

/// The four {self-training, augmentation} on/off combinations of `config`.
[[nodiscard]] std::vector<ExperimentConfig> ablation_grid(const ExperimentConfig &config);

/// Multi-shot protocol over user-supplied folds; SVC on normalised regressor projections.
[[nodiscard]] RunResult run_multishot_evaluation(const ExperimentConfig &config);

/// Trains f on the target dataset (seen classes only when `split` is given, plus auxiliary
/// data when config.augment) and writes output_dir/model.json. Returns the model path.
[[nodiscard]] std::filesystem::path run_train_regressor(const ExperimentConfig &config, const std::optional<SplitSpec> &split);

/// Writes output_dir/split_XX.json for config.split_count splits of the target vocabulary.
[[nodiscard]] std::vector<std::filesystem::path> run_make_splits(const ExperimentConfig &config);

struct QuantizeOptions {
    std::vector<std::filesystem::path> descriptor_files;
    std::size_t k{ 4000 };
    std::uint64_t seed{ 0 };
    /// Descriptors sampled (without replacement) for codebook learning; 0 uses all.
    std::size_t sample{ 10'000 };
    std::size_t max_iters{ 100 };
    bool normalize{ true };
    /// Optional "id,label" CSV. Without it, per-file videos take the parent directory
    /// name as label and grouped files take the file stem.
    std::optional<std::filesystem::path> labels;
    std::filesystem::path output_dir{ "." };
};

struct QuantizeResult {
    std::filesystem::path codebook_path;
    std::filesystem::path features_path;
    std::size_t videos{ 0 };
    std::size_t empty_videos{ 0 };
};

/// Learns a codebook and writes codebook.json and features.csv (both atomically).
[[nodiscard]] QuantizeResult run_quantize(const QuantizeOptions &options);

/// Resolved kernel for a set of training features.
[[nodiscard]] KernelSpec training_kernel(const ExperimentConfig &config, const std::vector<FeatureVector> &features, std::uint64_t stream);

}  // namespace zslkit
