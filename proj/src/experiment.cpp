#include "zslkit/experiment.hpp"

#include "zslkit/error.hpp"
#include "zslkit/model_io.hpp"
#include "zslkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace zslkit {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// configuration

void ExperimentConfig::validate(bool need_folds) const {
    if (dataset.empty()) {
        throw InvalidArgument("config: 'dataset' is required");
    }
    if (embeddings.empty()) {
        throw InvalidArgument("config: 'embeddings' is required");
    }
    if (augment && !auxiliary) {
        throw InvalidArgument("config: augmentation requires an auxiliary dataset");
    }
    if (predictor != "regression" && predictor != "random") {
        throw InvalidArgument("config: predictor must be 'regression' or 'random'");
    }
    if (split_count == 0) {
        throw InvalidArgument("config: split count must be positive");
    }
    if (self_train_config.k == 0) {
        throw InvalidArgument("config: self-training k must be positive");
    }
    if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) {
        throw InvalidArgument("config: gamma must be positive");
    }
    svr.validate();
    svc.validate();
    if (need_folds && !folds) {
        throw InvalidArgument("config: multi-shot evaluation requires 'folds'");
    }

    auto require = [](const fs::path &p, const char *what) {
        if (!fs::exists(p)) {
            throw InvalidArgument(std::string("config: ") + what + " '" + p.string() + "' does not exist");
        }
    };
    require(dataset, "dataset");
    require(embeddings, "embeddings");
    if (augment) {
        require(*auxiliary, "auxiliary dataset");
    }
    if (split_dir) {
        require(*split_dir, "split directory");
    }
    if (need_folds) {
        require(*folds, "fold file");
    }
}

namespace {

fs::path resolve(const fs::path &base, const std::string &value) {
    fs::path p{ value };
    if (p.is_relative() && !base.empty()) {
        p = base / p;
    }
    return p.lexically_normal();
}

void reject_unknown_keys(const nlohmann::json &object, std::initializer_list<const char *> known, const std::string &where) {
    if (!object.is_object()) {
        throw InvalidArgument("config: '" + where + "' must be an object");
    }
    for (const auto &item : object.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char *k) { return item.key() == k; })) {
            throw InvalidArgument("config: unknown key '" + item.key() + "' in " + where);
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json &json, const fs::path &base_dir) {
    ExperimentConfig c;
    try {
        reject_unknown_keys(json, { "dataset", "dataset_name", "auxiliary", "embeddings", "kernel", "svr", "svc", "self_train", "augment", "normalize_prototypes", "splits", "predictor", "folds", "output_dir" }, "config");
        if (json.contains("dataset")) {
            c.dataset = resolve(base_dir, json["dataset"].get<std::string>());
        }
        c.dataset_name = json.value("dataset_name", std::string{});
        if (json.contains("auxiliary") && !json["auxiliary"].is_null()) {
            c.auxiliary = resolve(base_dir, json["auxiliary"].get<std::string>());
        }
        if (json.contains("embeddings")) {
            c.embeddings = resolve(base_dir, json["embeddings"].get<std::string>());
        }
        if (json.contains("kernel")) {
            const auto &k = json["kernel"];
            reject_unknown_keys(k, { "gamma", "chi2_halved", "gamma_self_pairs", "gamma_max_pairs" }, "kernel");
            if (k.contains("gamma") && !k["gamma"].is_null()) {
                c.gamma = k["gamma"].get<double>();
            }
            c.chi2_halved = k.value("chi2_halved", c.chi2_halved);
            c.gamma_options.include_self_pairs = k.value("gamma_self_pairs", false);
            c.gamma_options.max_pairs = k.value("gamma_max_pairs", c.gamma_options.max_pairs);
        }
        if (json.contains("svr")) {
            const auto &s = json["svr"];
            reject_unknown_keys(s, { "c", "epsilon", "tolerance", "max_passes" }, "svr");
            c.svr.c = s.value("c", c.svr.c);
            c.svr.epsilon = s.value("epsilon", c.svr.epsilon);
            c.svr.tolerance = s.value("tolerance", c.svr.tolerance);
            c.svr.max_passes = s.value("max_passes", c.svr.max_passes);
        }
        if (json.contains("svc")) {
            const auto &s = json["svc"];
            reject_unknown_keys(s, { "c", "tolerance", "max_passes" }, "svc");
            c.svc.c = s.value("c", c.svc.c);
            c.svc.tolerance = s.value("tolerance", c.svc.tolerance);
            c.svc.max_passes = s.value("max_passes", c.svc.max_passes);
        }
        if (json.contains("self_train")) {
            const auto &s = json["self_train"];
            reject_unknown_keys(s, { "enabled", "k", "renormalize" }, "self_train");
            c.self_train = s.value("enabled", false);
            c.self_train_config.k = s.value("k", c.self_train_config.k);
            c.self_train_config.renormalize = s.value("renormalize", true);
        }
        c.augment = json.value("augment", false);
        c.normalize_prototypes = json.value("normalize_prototypes", true);
        if (json.contains("splits")) {
            const auto &s = json["splits"];
            reject_unknown_keys(s, { "count", "seed", "dir" }, "splits");
            c.split_count = s.value("count", c.split_count);
            c.seed = s.value("seed", c.seed);
            if (s.contains("dir") && !s["dir"].is_null()) {
                c.split_dir = resolve(base_dir, s["dir"].get<std::string>());
            }
        }
        c.predictor = json.value("predictor", c.predictor);
        if (json.contains("folds") && !json["folds"].is_null()) {
            c.folds = resolve(base_dir, json["folds"].get<std::string>());
        }
        if (json.contains("output_dir")) {
            c.output_dir = resolve(base_dir, json["output_dir"].get<std::string>());
        } else {
            c.output_dir = resolve(base_dir, "runs");
        }
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const fs::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open config file " + path.string());
    }
    nlohmann::json json;
    try {
        json = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("invalid config file: ") + e.what());
    }
    return config_from_json(json, path.parent_path());
}

nlohmann::ordered_json config_to_json(const ExperimentConfig &c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset.string();
    j["dataset_name"] = c.dataset_name;
    j["auxiliary"] = c.auxiliary ? nlohmann::ordered_json(c.auxiliary->string()) : nlohmann::ordered_json(nullptr);
    j["embeddings"] = c.embeddings.string();
    j["kernel"] = { { "gamma", c.gamma ? nlohmann::ordered_json(*c.gamma) : nlohmann::ordered_json(nullptr) },
                    { "chi2_halved", c.chi2_halved },
                    { "gamma_self_pairs", c.gamma_options.include_self_pairs },
                    { "gamma_max_pairs", c.gamma_options.max_pairs } };
    j["svr"] = { { "c", c.svr.c }, { "epsilon", c.svr.epsilon }, { "tolerance", c.svr.tolerance }, { "max_passes", c.svr.max_passes } };
    j["svc"] = { { "c", c.svc.c }, { "tolerance", c.svc.tolerance }, { "max_passes", c.svc.max_passes } };
    j["self_train"] = { { "enabled", c.self_train }, { "k", c.self_train_config.k }, { "renormalize", c.self_train_config.renormalize } };
    j["augment"] = c.augment;
    j["normalize_prototypes"] = c.normalize_prototypes;
    j["splits"] = { { "count", c.split_count }, { "seed", c.seed }, { "dir", c.split_dir ? nlohmann::ordered_json(c.split_dir->string()) : nlohmann::ordered_json(nullptr) } };
    j["predictor"] = c.predictor;
    j["folds"] = c.folds ? nlohmann::ordered_json(c.folds->string()) : nlohmann::ordered_json(nullptr);
    j["output_dir"] = c.output_dir.string();
    return j;
}

std::string config_fingerprint(const ExperimentConfig &config) {
    const std::string text = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string method_name(const ExperimentConfig &config) {
    if (config.predictor == "random") {
        return "Random Guess";
    }
    std::string name = "NN";
    if (config.self_train) {
        name += " + ST";
    }
    if (config.augment) {
        name += " + Aux";
    }
    return name;
}

// ---------------------------------------------------------------------------
// reports

std::pair<double, double> mean_and_std(const std::vector<double> &values) {
    if (values.empty()) {
        return { 0.0, 0.0 };
    }
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) {
        return { mean, 0.0 };
    }
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return { mean, std::sqrt(ss / static_cast<double>(values.size() - 1)) };
}

SplitResult score_predictions(std::size_t index, const Dataset &test, const std::vector<Prediction> &predictions) {
    if (predictions.size() != test.size()) {
        throw InvalidArgument("prediction count does not match the test set");
    }
    SplitResult r;
    r.index = index;
    r.test_instances = test.size();
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto &inst = test.instances()[i];
        if (predictions[i].instance_id != inst.id) {
            throw InvalidArgument("prediction order does not match the test set");
        }
        const bool hit = predictions[i].predicted == inst.label;
        r.correct += hit ? 1 : 0;
        auto &pc = per_class[inst.label.key()];
        ++pc.first;
        pc.second += hit ? 1 : 0;
        ++r.confusion[inst.label.key()][predictions[i].predicted.key()];
    }
    if (r.test_instances > 0) {
        r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.test_instances);
        double recall_sum = 0.0;
        for (const auto &[label, counts] : per_class) {
            recall_sum += static_cast<double>(counts.second) / static_cast<double>(counts.first);
        }
        r.class_mean_accuracy = 100.0 * recall_sum / static_cast<double>(per_class.size());
    }
    return r;
}

void EvaluationReport::aggregate() {
    std::vector<double> acc;
    std::vector<double> cls;
    for (const auto &s : splits) {
        acc.push_back(s.accuracy);
        cls.push_back(s.class_mean_accuracy);
    }
    std::tie(mean_accuracy, std_accuracy) = mean_and_std(acc);
    std::tie(mean_class_accuracy, std_class_accuracy) = mean_and_std(cls);
}

void EvaluationReport::verify() const {
    EvaluationReport copy = *this;
    copy.aggregate();
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
    if (!close(copy.mean_accuracy, mean_accuracy) || !close(copy.std_accuracy, std_accuracy) || !close(copy.mean_class_accuracy, mean_class_accuracy) || !close(copy.std_class_accuracy, std_class_accuracy)) {
        throw InvalidArgument("report aggregates do not match the per-split results");
    }
    for (const auto &s : splits) {
        if (s.accuracy < 0.0 || s.accuracy > 100.0 || s.class_mean_accuracy < 0.0 || s.class_mean_accuracy > 100.0) {
            throw InvalidArgument("split accuracy outside [0, 100]");
        }
    }
}

nlohmann::ordered_json report_to_json(const EvaluationReport &report) {
    nlohmann::ordered_json j;
    j["format"] = "zslkit-report";
    j["version"] = 1;
    j["mode"] = report.mode;
    j["method"] = report.method;
    j["fingerprint"] = report.fingerprint;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    j["mean_class_accuracy"] = report.mean_class_accuracy;
    j["std_class_accuracy"] = report.std_class_accuracy;
    auto &splits = j["splits"] = nlohmann::ordered_json::array();
    for (const auto &s : report.splits) {
        nlohmann::ordered_json e;
        e["index"] = s.index;
        e["test_instances"] = s.test_instances;
        e["correct"] = s.correct;
        e["accuracy"] = s.accuracy;
        e["class_mean_accuracy"] = s.class_mean_accuracy;
        e["confusion"] = s.confusion;
        splits.push_back(std::move(e));
    }
    j["config"] = report.config;
    return j;
}

EvaluationReport report_from_json(const nlohmann::json &json) {
    try {
        if (json.at("format").get<std::string>() != "zslkit-report") {
            throw ParseError("not a zslkit report");
        }
        EvaluationReport r;
        r.mode = json.at("mode").get<std::string>();
        r.method = json.at("method").get<std::string>();
        r.fingerprint = json.at("fingerprint").get<std::string>();
        r.mean_accuracy = json.at("mean_accuracy").get<double>();
        r.std_accuracy = json.at("std_accuracy").get<double>();
        r.mean_class_accuracy = json.at("mean_class_accuracy").get<double>();
        r.std_class_accuracy = json.at("std_class_accuracy").get<double>();
        for (const auto &e : json.at("splits")) {
            SplitResult s;
            s.index = e.at("index").get<std::size_t>();
            s.test_instances = e.at("test_instances").get<std::size_t>();
            s.correct = e.at("correct").get<std::size_t>();
            s.accuracy = e.at("accuracy").get<double>();
            s.class_mean_accuracy = e.at("class_mean_accuracy").get<double>();
            s.confusion = e.at("confusion").get<std::map<std::string, std::map<std::string, std::size_t>>>();
            r.splits.push_back(std::move(s));
        }
        r.config = json.at("config");
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid report: ") + e.what());
    }
}

std::string format_report_table(const std::vector<EvaluationReport> &reports) {
    std::ostringstream out;
    out << std::left << std::setw(16) << "Method" << std::setw(10) << "Splits" << "Accuracy (%)      Class-mean (%)\n";
    out << std::string(58, '-') << '\n';
    out << std::fixed << std::setprecision(1);
    for (const auto &r : reports) {
        std::ostringstream acc;
        acc << std::fixed << std::setprecision(1) << r.mean_accuracy << " +/- " << r.std_accuracy;
        std::ostringstream cls;
        cls << std::fixed << std::setprecision(1) << r.mean_class_accuracy << " +/- " << r.std_class_accuracy;
        out << std::left << std::setw(16) << r.method << std::setw(10) << r.splits.size() << std::setw(18) << acc.str() << cls.str() << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// runs

KernelSpec training_kernel(const ExperimentConfig &config, const std::vector<FeatureVector> &features, std::uint64_t stream) {
    KernelSpec kernel{ KernelKind::rbf_chi2, 1.0, config.chi2_halved };
    if (config.gamma) {
        kernel.gamma = *config.gamma;
    } else {
        GammaOptions options = config.gamma_options;
        options.seed = mix_seed(config.seed, stream);
        const auto views = views_of(features);
        kernel.gamma = heuristic_gamma(kernel, views, options);
    }
    return kernel;
}

namespace {

std::string two_digit(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%02zu", index);
    return buf;
}

Dataset load_target(const ExperimentConfig &config) {
    return config.dataset_name.empty() ? load_dataset(config.dataset) : load_dataset(config.dataset, config.dataset_name);
}

std::vector<SplitSpec> load_split_dir(const fs::path &dir) {
    std::vector<SplitSpec> splits;
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" && entry.path().stem().string().rfind("split_", 0) == 0) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
        splits.push_back(load_split(f));
    }
    std::sort(splits.begin(), splits.end(), [](const SplitSpec &a, const SplitSpec &b) { return a.index < b.index; });
    if (splits.empty()) {
        throw InvalidArgument("no split_*.json files in " + dir.string());
    }
    return splits;
}

void check_split(const SplitSpec &split, const Dataset &target, const std::optional<Dataset> &auxiliary) {
    const std::string where = "split " + std::to_string(split.index) + ": ";
    for (const auto &u : split.unseen) {
        if (std::find(split.seen.begin(), split.seen.end(), u) != split.seen.end()) {
            throw InvalidArgument(where + "class '" + u.name() + "' is both seen and unseen");
        }
        if (!target.has_class(u)) {
            throw InvalidArgument(where + "unseen class '" + u.name() + "' is not in dataset '" + target.name() + "'");
        }
        if (auxiliary && auxiliary->has_class(u)) {
            throw InvalidArgument(where + "auxiliary class '" + u.name() + "' is one of the unseen classes");
        }
    }
    for (const auto &s : split.seen) {
        if (!target.has_class(s)) {
            throw InvalidArgument(where + "seen class '" + s.name() + "' is not in dataset '" + target.name() + "'");
        }
    }
    if (split.seen.empty() || split.unseen.empty()) {
        throw InvalidArgument(where + "needs at least one seen and one unseen class");
    }
}

std::string predictions_csv(const std::vector<Prediction> &predictions) {
    std::ostringstream out;
    write_predictions_csv(predictions, out);
    return out.str();
}

void write_report(const EvaluationReport &report, const fs::path &run_dir) {
    report.verify();
    write_file_atomic(run_dir / "report.json", report_to_json(report).dump(2) + "\n");
}

}  // namespace

RunResult run_zsl_evaluation(const ExperimentConfig &config) {
    config.validate();
    const Dataset target = load_target(config);
    const EmbeddingStore store = load_embeddings(config.embeddings);
    std::optional<Dataset> auxiliary;
    if (config.augment) {
        auxiliary = load_dataset(*config.auxiliary);
        if (auxiliary->feature_dimension() != target.feature_dimension()) {
            throw InvalidArgument("auxiliary feature dimension " + std::to_string(auxiliary->feature_dimension()) + " differs from target dimension " + std::to_string(target.feature_dimension()));
        }
    }

    std::vector<SplitSpec> splits = config.split_dir ? load_split_dir(*config.split_dir) : generate_splits(target.class_vocabulary(), config.split_count, config.seed, target.name());
    // Every split is checked before anything is trained.
    for (const auto &split : splits) {
        check_split(split, target, auxiliary);
    }

    RunResult result;
    result.report.mode = "zsl";
    result.report.method = method_name(config);
    result.report.fingerprint = config_fingerprint(config);
    result.report.config = config_to_json(config);
    result.run_dir = config.output_dir / result.report.fingerprint;

    const std::optional<SelfTrainConfig> st = config.self_train ? std::optional{ config.self_train_config } : std::nullopt;
    for (const auto &split : splits) {
        try {
            const Dataset train = target.restricted_to(split.seen);
            const Dataset test = target.restricted_to(split.unseen);
            std::vector<std::string> ids;
            for (const auto &inst : test.instances()) {
                ids.push_back(inst.id);
            }

            std::vector<Prediction> predictions;
            if (config.predictor == "random") {
                predictions = random_predictions(split.unseen, ids, mix_seed(config.seed, 0x5241'4E44'0000'0000ULL + split.index));
            } else {
                const TrainingSet rows = auxiliary ? augment_training(train, *auxiliary, store, split.unseen) : training_set(train, store);
                const KernelSpec kernel = training_kernel(config, rows.features, split.index);
                const SemanticRegressor regressor = train_semantic_regressor(rows.features, rows.targets, config.svr, kernel);
                ZslProblem problem{ train, test, build_prototypes(store, split.unseen, config.normalize_prototypes) };
                predictions = zsl_predict(regressor, problem, st).predictions;
            }

            result.report.splits.push_back(score_predictions(split.index, test, predictions));
            save_split(split, result.run_dir / "splits" / ("split_" + two_digit(split.index) + ".json"));
            write_file_atomic(result.run_dir / "predictions" / ("split_" + two_digit(split.index) + ".csv"), predictions_csv(predictions));
        } catch (const Error &e) {
            throw Error("split " + std::to_string(split.index) + ": " + e.what());
        }
    }
    result.report.aggregate();
    write_report(result.report, result.run_dir);
    return result;
}

std::vector<ExperimentConfig> ablation_grid(const ExperimentConfig &config) {
    if (!config.auxiliary) {
        throw InvalidArgument("the ablation grid needs an auxiliary dataset");
    }
    std::vector<ExperimentConfig> grid;
    for (const bool aux : { false, true }) {
        for (const bool st : { false, true }) {
            ExperimentConfig c = config;
            c.predictor = "regression";
            c.augment = aux;
            c.self_train = st;
            grid.push_back(std::move(c));
        }
    }
    return grid;
}

namespace {

struct Fold {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

std::vector<Fold> load_folds(const fs::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open fold file " + path.string());
    }
    std::vector<Fold> folds;
    try {
        const auto json = nlohmann::json::parse(in);
        for (const auto &f : json.at("folds")) {
            folds.push_back(Fold{ f.at("train").get<std::vector<std::string>>(), f.at("test").get<std::vector<std::string>>() });
        }
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid fold file: ") + e.what());
    }
    if (folds.empty()) {
        throw InvalidArgument("fold file lists no folds");
    }
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const std::set<std::string> train(folds[i].train.begin(), folds[i].train.end());
        for (const auto &id : folds[i].test) {
            if (train.contains(id)) {
                throw InvalidArgument("fold " + std::to_string(i + 1) + ": instance '" + id + "' is in both train and test");
            }
        }
    }
    return folds;
}

}  // namespace

RunResult run_multishot_evaluation(const ExperimentConfig &config) {
    config.validate(true);
    const Dataset target = load_target(config);
    const EmbeddingStore store = load_embeddings(config.embeddings);
    const auto folds = load_folds(*config.folds);
    std::optional<Dataset> auxiliary;
    if (config.augment) {
        auxiliary = load_dataset(*config.auxiliary);
    }

    RunResult result;
    result.report.mode = "multishot";
    result.report.method = config.augment ? "SVC + Aux" : "SVC";
    result.report.fingerprint = config_fingerprint(config);
    result.report.config = config_to_json(config);
    result.run_dir = config.output_dir / result.report.fingerprint;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t index = f + 1;
        try {
            const Dataset train = target.select_ids(folds[f].train);
            const Dataset test = target.select_ids(folds[f].test);
            const TrainingSet rows = auxiliary ? augment_training(train, *auxiliary, store, {}) : training_set(train, store);
            const KernelSpec kernel = training_kernel(config, rows.features, index);
            const SemanticRegressor regressor = train_semantic_regressor(rows.features, rows.targets, config.svr, kernel);

            std::vector<EmbeddingVector> train_points;
            for (const auto &z : regressor.predict(train.features())) {
                train_points.push_back(l2_normalize(z));
            }
            const SvcModel svc = train_svc(train_points, train.labels(), config.svc);

            std::vector<Prediction> predictions;
            const auto test_projections = regressor.predict(test.features());
            for (std::size_t i = 0; i < test.size(); ++i) {
                const auto point = l2_normalize(test_projections[i]);
                const auto values = svc.decision_values(point);
                const std::size_t best = argmax_decision(values);
                predictions.push_back(Prediction{ test.instances()[i].id, svc.classes()[best], values[best] });
            }
            result.report.splits.push_back(score_predictions(index, test, predictions));
            write_file_atomic(result.run_dir / "predictions" / ("fold_" + two_digit(index) + ".csv"), predictions_csv(predictions));
        } catch (const Error &e) {
            throw Error("fold " + std::to_string(index) + ": " + e.what());
        }
    }
    result.report.aggregate();
    write_report(result.report, result.run_dir);
    return result;
}

fs::path run_train_regressor(const ExperimentConfig &config, const std::optional<SplitSpec> &split) {
    config.validate();
    const Dataset target = load_target(config);
    const EmbeddingStore store = load_embeddings(config.embeddings);
    std::optional<Dataset> auxiliary;
    if (config.augment) {
        auxiliary = load_dataset(*config.auxiliary);
    }
    Dataset train = target;
    std::vector<Label> unseen;
    std::uint64_t stream = 0;
    if (split) {
        check_split(*split, target, auxiliary);
        train = target.restricted_to(split->seen);
        unseen = split->unseen;
        stream = split->index;
    }
    const TrainingSet rows = auxiliary ? augment_training(train, *auxiliary, store, unseen) : training_set(train, store);
    const KernelSpec kernel = training_kernel(config, rows.features, stream);
    const SemanticRegressor regressor = train_semantic_regressor(rows.features, rows.targets, config.svr, kernel);
    const fs::path path = config.output_dir / "model.json";
    save_regressor(regressor, path);
    return path;
}

std::vector<fs::path> run_make_splits(const ExperimentConfig &config) {
    if (config.dataset.empty()) {
        throw InvalidArgument("config: 'dataset' is required");
    }
    const Dataset target = load_target(config);
    std::vector<fs::path> paths;
    for (const auto &split : generate_splits(target.class_vocabulary(), config.split_count, config.seed, target.name())) {
        paths.push_back(config.output_dir / ("split_" + two_digit(split.index) + ".json"));
        save_split(split, paths.back());
    }
    return paths;
}

QuantizeResult run_quantize(const QuantizeOptions &options) {
    if (options.descriptor_files.empty()) {
        throw InvalidArgument("no descriptor files given");
    }
    std::map<std::string, std::string> label_map;
    if (options.labels) {
        std::ifstream in{ *options.labels };
        if (!in) {
            throw Error("cannot open label file " + options.labels->string());
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || (line_no == 1 && line == "id,label")) {
                continue;
            }
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw ParseError("expected 'id,label'", line_no);
            }
            label_map[line.substr(0, comma)] = line.substr(comma + 1);
        }
    }

    struct Video {
        std::string id;
        std::string label;
        std::vector<std::vector<double>> descriptors;
    };
    std::vector<Video> videos;
    for (const auto &path : options.descriptor_files) {
        auto file = load_descriptor_file(path);
        for (auto &group : file.groups) {
            std::string label;
            if (const auto it = label_map.find(group.id); it != label_map.end()) {
                label = it->second;
            } else if (options.labels) {
                throw InvalidArgument("no label for video '" + group.id + "' in " + options.labels->string());
            } else if (file.has_id_column) {
                label = path.stem().string();
            } else {
                label = path.parent_path().filename().string();
                if (label.empty()) {
                    label = path.stem().string();
                }
            }
            videos.push_back(Video{ group.id, label, std::move(group.descriptors) });
        }
    }

    std::vector<const std::vector<double> *> all;
    for (const auto &v : videos) {
        for (const auto &d : v.descriptors) {
            all.push_back(&d);
        }
    }
    if (all.size() < options.k) {
        throw InvalidArgument("k = " + std::to_string(options.k) + " exceeds the " + std::to_string(all.size()) + " available descriptors");
    }
    Rng rng{ options.seed };
    std::size_t take = all.size();
    if (options.sample > 0 && options.sample < all.size()) {
        // partial Fisher-Yates: the first `sample` slots become a uniform sample
        for (std::size_t i = 0; i < options.sample; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
            std::swap(all[i], all[j]);
        }
        take = options.sample;
    }
    std::vector<std::vector<double>> training;
    training.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        training.push_back(*all[i]);
    }
    const KMeansResult km = kmeans_codebook(training, options.k, mix_seed(options.seed, 1), options.max_iters);

    QuantizeResult result;
    Dataset features{ "features", km.codebook.k() };
    for (const auto &v : videos) {
        auto bow = quantize(km.codebook, v.descriptors, options.normalize);
        result.empty_videos += bow.empty_input ? 1 : 0;
        features.add(Instance{ v.id, Label{ v.label }, std::move(bow.histogram) });
    }
    result.videos = videos.size();
    result.codebook_path = options.output_dir / "codebook.json";
    result.features_path = options.output_dir / "features.csv";
    write_file_atomic(result.codebook_path, codebook_to_json(km.codebook).dump() + "\n");
    std::ostringstream csv;
    write_dataset(features, csv);
    write_file_atomic(result.features_path, csv.str());
    return result;
}

}  // namespace zslkit
