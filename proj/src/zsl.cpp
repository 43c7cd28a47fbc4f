#include "zslkit/zsl.hpp"

#include "zslkit/error.hpp"
#include "zslkit/parallel.hpp"
#include "zslkit/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace zslkit {

std::vector<Prototype> build_prototypes(const EmbeddingStore &store, const std::vector<Label> &labels, bool normalize) {
    std::vector<Prototype> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (labels[i] == labels[j]) {
                throw InvalidArgument("duplicate prototype label '" + labels[i].name() + "'");
            }
        }
        auto z = embed_label(store, labels[i]);
        out.push_back(Prototype{ labels[i], normalize ? l2_normalize(z) : std::move(z), false });
    }
    return out;
}

NnMatch nearest_prototype(const std::vector<Prototype> &prototypes, const EmbeddingVector &projection) {
    if (prototypes.empty()) {
        throw InvalidArgument("no prototypes to match against");
    }
    NnMatch best{ 0, std::numeric_limits<double>::infinity() };
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < prototypes.size(); ++p) {
        const double d = squared_euclidean(prototypes[p].vector.values, projection.values);
        if (d < best_sq) {
            best_sq = d;
            best.index = p;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

const Label &nn_classify(const std::vector<Prototype> &prototypes, const EmbeddingVector &projection) {
    return prototypes[nearest_prototype(prototypes, projection).index].label;
}

std::vector<Prototype> self_train(const std::vector<Prototype> &prototypes, const std::vector<EmbeddingVector> &projections, const SelfTrainConfig &config) {
    if (projections.empty()) {
        throw InvalidArgument("self-training needs at least one projection");
    }
    if (config.k == 0 || config.k > projections.size()) {
        throw InvalidArgument("self-training k = " + std::to_string(config.k) + " outside [1, " + std::to_string(projections.size()) + "]");
    }
    const std::size_t dim = projections.front().size();
    for (const auto &p : projections) {
        if (p.size() != dim) {
            throw InvalidArgument("projections differ in dimension");
        }
    }

    std::vector<EmbeddingVector> means(prototypes.size());
    parallel_for(prototypes.size(), [&](std::size_t p) {
        const auto &proto = prototypes[p];
        std::vector<std::pair<double, std::size_t>> ranked(projections.size());
        for (std::size_t i = 0; i < projections.size(); ++i) {
            ranked[i] = { squared_euclidean(proto.vector.values, projections[i].values), i };
        }
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(config.k), ranked.end());

        EmbeddingVector mean{ std::vector<double>(dim, 0.0), false };
        for (std::size_t r = 0; r < config.k; ++r) {
            const auto &v = projections[ranked[r].second].values;
            for (std::size_t d = 0; d < dim; ++d) {
                mean.values[d] += v[d];
            }
        }
        for (auto &v : mean.values) {
            v /= static_cast<double>(config.k);
        }
        means[p] = config.renormalize ? l2_normalize(mean) : std::move(mean);
    });

    std::vector<Prototype> adapted;
    adapted.reserve(prototypes.size());
    for (std::size_t p = 0; p < prototypes.size(); ++p) {
        adapted.push_back(Prototype{ prototypes[p].label, std::move(means[p]), true });
    }
    return adapted;
}

void ZslProblem::validate() const {
    for (std::size_t i = 0; i < prototypes.size(); ++i) {
        if (train.has_class(prototypes[i].label)) {
            throw InvalidArgument("unseen class '" + prototypes[i].label.name() + "' also occurs in the training data");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (prototypes[i].label == prototypes[j].label) {
                throw InvalidArgument("duplicate prototype for class '" + prototypes[i].label.name() + "'");
            }
        }
    }
    for (const auto &label : test.class_vocabulary()) {
        if (train.has_class(label)) {
            throw InvalidArgument("test class '" + label.name() + "' also occurs in the training data");
        }
        const bool covered = std::any_of(prototypes.begin(), prototypes.end(), [&](const Prototype &p) { return p.label == label; });
        if (!covered) {
            throw InvalidArgument("test class '" + label.name() + "' has no prototype");
        }
    }
}

ZslOutcome match_projections(const std::vector<Prototype> &prototypes,
                             const std::vector<std::string> &ids,
                             const std::vector<EmbeddingVector> &projections,
                             const std::optional<SelfTrainConfig> &self_training) {
    if (ids.size() != projections.size()) {
        throw InvalidArgument("instance id and projection counts differ");
    }
    if (prototypes.empty()) {
        throw InvalidArgument("no prototypes to match against");
    }
    ZslOutcome outcome;
    if (projections.empty()) {
        outcome.prototypes = prototypes;
        return outcome;
    }

    std::vector<EmbeddingVector> normalized(projections.size());
    for (std::size_t i = 0; i < projections.size(); ++i) {
        normalized[i] = l2_normalize(projections[i]);
    }
    outcome.prototypes = self_training ? self_train(prototypes, normalized, *self_training) : prototypes;

    outcome.predictions.reserve(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const auto match = nearest_prototype(outcome.prototypes, normalized[i]);
        outcome.predictions.push_back(Prediction{ ids[i], outcome.prototypes[match.index].label, match.distance });
    }
    return outcome;
}

ZslOutcome zsl_predict(const SemanticRegressor &regressor, const ZslProblem &problem, const std::optional<SelfTrainConfig> &self_training) {
    problem.validate();
    std::vector<std::string> ids;
    ids.reserve(problem.test.size());
    for (const auto &inst : problem.test.instances()) {
        ids.push_back(inst.id);
    }
    const auto projections = regressor.predict(problem.test.features());
    return match_projections(problem.prototypes, ids, projections, self_training);
}

TrainingSet training_set(const Dataset &dataset, const EmbeddingStore &store, Provenance provenance) {
    std::vector<Label> classes = dataset.class_vocabulary();
    std::vector<EmbeddingVector> class_targets;
    class_targets.reserve(classes.size());
    for (const auto &c : classes) {
        class_targets.push_back(l2_normalize(embed_label(store, c)));
    }
    TrainingSet out;
    out.features.reserve(dataset.size());
    out.targets.reserve(dataset.size());
    for (const auto &inst : dataset.instances()) {
        const auto idx = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), inst.label) - classes.begin());
        out.features.push_back(inst.features);
        out.targets.push_back(class_targets[idx]);
        out.provenance.push_back(provenance);
    }
    return out;
}

TrainingSet augment_training(const Dataset &target, const Dataset &auxiliary, const EmbeddingStore &store, const std::vector<Label> &unseen) {
    if (!auxiliary.empty() && auxiliary.feature_dimension() != target.feature_dimension()) {
        throw InvalidArgument("auxiliary feature dimension " + std::to_string(auxiliary.feature_dimension()) + " differs from target dimension " + std::to_string(target.feature_dimension()));
    }
    for (const auto &label : auxiliary.class_vocabulary()) {
        if (std::find(unseen.begin(), unseen.end(), label) != unseen.end()) {
            throw InvalidArgument("auxiliary class '" + label.name() + "' is one of the unseen classes");
        }
    }
    TrainingSet out = training_set(target, store, Provenance::target);
    if (auxiliary.empty()) {
        return out;
    }
    TrainingSet aux = training_set(auxiliary, store, Provenance::auxiliary);
    out.features.insert(out.features.end(), std::make_move_iterator(aux.features.begin()), std::make_move_iterator(aux.features.end()));
    out.targets.insert(out.targets.end(), std::make_move_iterator(aux.targets.begin()), std::make_move_iterator(aux.targets.end()));
    out.provenance.insert(out.provenance.end(), aux.provenance.begin(), aux.provenance.end());
    return out;
}

std::vector<Prediction> random_predictions(const std::vector<Label> &classes, const std::vector<std::string> &ids, std::uint64_t seed) {
    if (classes.empty()) {
        throw InvalidArgument("no classes to guess from");
    }
    Rng rng{ seed };
    std::vector<Prediction> out;
    out.reserve(ids.size());
    for (const auto &id : ids) {
        out.push_back(Prediction{ id, classes[static_cast<std::size_t>(rng.below(classes.size()))], 0.0 });
    }
    return out;
}

double simulate_random_guess(std::size_t num_classes, std::size_t instances, std::size_t trials, std::uint64_t seed) {
    if (num_classes == 0 || instances == 0 || trials == 0) {
        throw InvalidArgument("random-guess simulation needs positive class, instance and trial counts");
    }
    Rng rng{ seed };
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < instances; ++i) {
            // true labels cycle through the classes; the guess is uniform
            const std::uint64_t truth = i % num_classes;
            if (rng.below(num_classes) == truth) {
                ++correct;
            }
        }
        total += 100.0 * static_cast<double>(correct) / static_cast<double>(instances);
    }
    return total / static_cast<double>(trials);
}

void write_predictions_csv(const std::vector<Prediction> &predictions, std::ostream &out) {
    out << "instance_id,predicted_label,distance\n";
    for (const auto &p : predictions) {
        std::string label = p.predicted.name();
        std::replace(label.begin(), label.end(), ' ', '_');
        char buf[32];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), p.distance);
        out << p.instance_id << ',' << label << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
    }
}

}  // namespace zslkit
