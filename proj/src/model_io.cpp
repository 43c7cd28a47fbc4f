#include "zslkit/model_io.hpp"

#include "zslkit/dataset.hpp"
#include "zslkit/error.hpp"

#include <fstream>

namespace zslkit {

namespace {

constexpr const char *format_tag = "zslkit-model";

void check_header(const nlohmann::json &json, const char *schema) {
    if (!json.is_object() || json.value("format", "") != format_tag) {
        throw ParseError("not a zslkit model file");
    }
    if (json.at("version").get<int>() != model_format_version) {
        throw ParseError("unsupported model version " + json.at("version").dump() + " (expected " + std::to_string(model_format_version) + ")");
    }
    if (json.at("schema").get<std::string>() != schema) {
        throw ParseError("model schema is '" + json.at("schema").get<std::string>() + "', expected '" + schema + "'");
    }
}

nlohmann::json read_json(const std::filesystem::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open model file " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
}

}  // namespace

nlohmann::ordered_json kernel_to_json(const KernelSpec &kernel) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kernel.kind);
    j["gamma"] = kernel.gamma;
    j["chi2_halved"] = kernel.chi2_halved;
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json &json) {
    KernelSpec k;
    k.kind = kernel_kind_from_string(json.at("kind").get<std::string>());
    k.gamma = json.at("gamma").get<double>();
    k.chi2_halved = json.value("chi2_halved", true);
    k.validate();
    return k;
}

nlohmann::ordered_json regressor_to_json(const SemanticRegressor &regressor) {
    nlohmann::ordered_json j;
    j["format"] = format_tag;
    j["version"] = model_format_version;
    j["schema"] = "semantic_regressor";
    j["kernel"] = kernel_to_json(regressor.kernel());
    j["dimension"] = regressor.dimension();
    j["feature_dimension"] = regressor.feature_dimension();
    auto &sv = j["support_vectors"] = nlohmann::ordered_json::array();
    for (const auto &x : regressor.pool()) {
        sv.push_back(x.bins);
    }
    auto &models = j["models"] = nlohmann::ordered_json::array();
    for (const auto &m : regressor.models()) {
        nlohmann::ordered_json entry;
        entry["support_indices"] = m.support_indices;
        entry["coefficients"] = m.dual_coefficients;
        entry["bias"] = m.bias;
        models.push_back(std::move(entry));
    }
    return j;
}

SemanticRegressor regressor_from_json(const nlohmann::json &json) {
    try {
        check_header(json, "semantic_regressor");
        const KernelSpec kernel = kernel_from_json(json.at("kernel"));
        const auto dimension = json.at("dimension").get<std::size_t>();
        const auto feature_dim = json.at("feature_dimension").get<std::size_t>();
        std::vector<FeatureVector> pool;
        for (const auto &row : json.at("support_vectors")) {
            pool.push_back(FeatureVector{ row.get<std::vector<double>>() });
            if (pool.back().size() != feature_dim) {
                throw ParseError("support vector length does not match feature_dimension");
            }
        }
        std::vector<SvrModel> models;
        for (const auto &entry : json.at("models")) {
            SvrModel m;
            m.support_indices = entry.at("support_indices").get<std::vector<std::size_t>>();
            m.dual_coefficients = entry.at("coefficients").get<std::vector<double>>();
            m.bias = entry.at("bias").get<double>();
            models.push_back(std::move(m));
        }
        if (models.size() != dimension) {
            throw ParseError("model declares dimension " + std::to_string(dimension) + " but holds " + std::to_string(models.size()) + " outputs");
        }
        return SemanticRegressor{ kernel, std::move(pool), std::move(models), feature_dim };
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid regressor model: ") + e.what());
    } catch (const InvalidArgument &e) {
        throw ParseError(std::string("invalid regressor model: ") + e.what());
    }
}

void save_regressor(const SemanticRegressor &regressor, const std::filesystem::path &path) {
    write_file_atomic(path, regressor_to_json(regressor).dump() + "\n");
}

SemanticRegressor load_regressor(const std::filesystem::path &path) {
    return regressor_from_json(read_json(path));
}

nlohmann::ordered_json classifier_to_json(const SvcModel &model) {
    nlohmann::ordered_json j;
    j["format"] = format_tag;
    j["version"] = model_format_version;
    j["schema"] = "svc";
    j["kernel"] = kernel_to_json(model.kernel());
    auto &classes = j["classes"] = nlohmann::ordered_json::array();
    for (const auto &c : model.classes()) {
        classes.push_back(c.name());
    }
    auto &sv = j["support_vectors"] = nlohmann::ordered_json::array();
    for (const auto &p : model.pool()) {
        sv.push_back(p.values);
    }
    auto &machines = j["machines"] = nlohmann::ordered_json::array();
    for (const auto &m : model.machines()) {
        nlohmann::ordered_json entry;
        entry["support_indices"] = m.support_indices;
        entry["coefficients"] = m.coefficients;
        entry["bias"] = m.bias;
        machines.push_back(std::move(entry));
    }
    return j;
}

SvcModel classifier_from_json(const nlohmann::json &json) {
    try {
        check_header(json, "svc");
        const KernelSpec kernel = kernel_from_json(json.at("kernel"));
        std::vector<Label> classes;
        for (const auto &c : json.at("classes")) {
            classes.emplace_back(c.get<std::string>());
        }
        std::vector<EmbeddingVector> pool;
        for (const auto &row : json.at("support_vectors")) {
            pool.push_back(EmbeddingVector{ row.get<std::vector<double>>(), false });
        }
        std::vector<BinarySvc> machines;
        for (const auto &entry : json.at("machines")) {
            BinarySvc m;
            m.support_indices = entry.at("support_indices").get<std::vector<std::size_t>>();
            m.coefficients = entry.at("coefficients").get<std::vector<double>>();
            m.bias = entry.at("bias").get<double>();
            machines.push_back(std::move(m));
        }
        return SvcModel{ kernel, std::move(classes), std::move(pool), std::move(machines) };
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid classifier model: ") + e.what());
    } catch (const InvalidArgument &e) {
        throw ParseError(std::string("invalid classifier model: ") + e.what());
    }
}

void save_classifier(const SvcModel &model, const std::filesystem::path &path) {
    write_file_atomic(path, classifier_to_json(model).dump() + "\n");
}

SvcModel load_classifier(const std::filesystem::path &path) {
    return classifier_from_json(read_json(path));
}

}  // namespace zslkit
