#pragma once

#include "zslkit/dataset.hpp"
#include "zslkit/embedding.hpp"
#include "zslkit/regression.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zslkit {

/// A class point in embedding space; `adapted` marks a self-trained prototype.
struct Prototype {
    Label label;
    EmbeddingVector vector;
    bool adapted{ false };
};

/// embed_label per class, L2-normalised unless `normalize` is false. Labels must be distinct.
[[nodiscard]] std::vector<Prototype> build_prototypes(const EmbeddingStore &store, const std::vector<Label> &labels, bool normalize = true);

struct NnMatch {
    std::size_t index{ 0 };
    /// Euclidean distance to the matched prototype.
    double distance{ 0.0 };
};

/// Closest prototype by Euclidean distance; the earliest prototype wins ties.
[[nodiscard]] NnMatch nearest_prototype(const std::vector<Prototype> &prototypes, const EmbeddingVector &projection);
[[nodiscard]] const Label &nn_classify(const std::vector<Prototype> &prototypes, const EmbeddingVector &projection);

struct SelfTrainConfig {
    /// Neighbour count K.
    std::size_t k{ 10 };
    bool renormalize{ true };
};

/**
 * Replaces each prototype by the mean of its k nearest projections.
 *
 * Every prototype searches all projections independently, so two prototypes
 * may share neighbours. Neighbours are ranked by (distance, index). The mean
 * is renormalised when config.renormalize is set.
 */
[[nodiscard]] std::vector<Prototype> self_train(const std::vector<Prototype> &prototypes, const std::vector<EmbeddingVector> &projections, const SelfTrainConfig &config);

/// Seen-class training data, unseen-class test data and one prototype per unseen class.
struct ZslProblem {
    Dataset train;
    Dataset test;
    std::vector<Prototype> prototypes;

    /// Throws if train and prototype classes overlap, prototypes repeat, or a test label lacks a prototype.
    void validate() const;
};

struct Prediction {
    std::string instance_id;
    Label predicted;
    double distance{ 0.0 };
};

/// Prototypes actually used for matching plus one prediction per test instance.
struct ZslOutcome {
    std::vector<Prototype> prototypes;
    std::vector<Prediction> predictions;
};

/// Normalises projections, optionally self-trains the prototypes on them, then matches each one.
[[nodiscard]] ZslOutcome match_projections(const std::vector<Prototype> &prototypes,
                                           const std::vector<std::string> &ids,
                                           const std::vector<EmbeddingVector> &projections,
                                           const std::optional<SelfTrainConfig> &self_training);

/// Projects every test instance with the regressor and calls match_projections.
[[nodiscard]] ZslOutcome zsl_predict(const SemanticRegressor &regressor, const ZslProblem &problem, const std::optional<SelfTrainConfig> &self_training);

enum class Provenance { target, auxiliary };

/// Regressor training rows; targets are L2-normalised label embeddings.
struct TrainingSet {
    std::vector<FeatureVector> features;
    std::vector<EmbeddingVector> targets;
    std::vector<Provenance> provenance;
};

/// Rows of `dataset` with targets l2_normalize(embed_label(label)).
[[nodiscard]] TrainingSet training_set(const Dataset &dataset, const EmbeddingStore &store, Provenance provenance = Provenance::target);

/// Target rows followed by auxiliary rows. Any auxiliary class among `unseen` is rejected.
[[nodiscard]] TrainingSet augment_training(const Dataset &target, const Dataset &auxiliary, const EmbeddingStore &store, const std::vector<Label> &unseen);

/// Uniform random label per instance.
[[nodiscard]] std::vector<Prediction> random_predictions(const std::vector<Label> &classes, const std::vector<std::string> &ids, std::uint64_t seed);

/// Mean accuracy (%) of uniform guessing over `num_classes`, each trial scoring `instances` draws.
[[nodiscard]] double simulate_random_guess(std::size_t num_classes, std::size_t instances, std::size_t trials, std::uint64_t seed);

/// CSV with header "instance_id,predicted_label,distance".
void write_predictions_csv(const std::vector<Prediction> &predictions, std::ostream &out);

}  // namespace zslkit
