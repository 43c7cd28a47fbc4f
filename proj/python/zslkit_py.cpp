#include "zslkit/bow.hpp"
#include "zslkit/dataset.hpp"
#include "zslkit/error.hpp"
#include "zslkit/experiment.hpp"
#include "zslkit/kernel.hpp"
#include "zslkit/regression.hpp"
#include "zslkit/zsl.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace zslkit;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::vector<double>> rows_of(const Eigen::Ref<const RowMatrix> &m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out[static_cast<std::size_t>(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
    }
    return out;
}

std::vector<FeatureVector> features_of(const Eigen::Ref<const RowMatrix> &m) {
    std::vector<FeatureVector> out;
    for (auto &row : rows_of(m)) {
        out.push_back(FeatureVector{ std::move(row) });
    }
    return out;
}

std::vector<EmbeddingVector> embeddings_of(const Eigen::Ref<const RowMatrix> &m) {
    std::vector<EmbeddingVector> out;
    for (auto &row : rows_of(m)) {
        out.push_back(EmbeddingVector{ std::move(row), false });
    }
    return out;
}

RowMatrix matrix_of(const std::vector<EmbeddingVector> &vs, std::size_t cols) {
    RowMatrix m(static_cast<Eigen::Index>(vs.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vs[i].values[j];
        }
    }
    return m;
}

std::vector<Prototype> prototypes_of(const Eigen::Ref<const RowMatrix> &vectors, const std::vector<std::string> &labels) {
    if (static_cast<std::size_t>(vectors.rows()) != labels.size()) {
        throw InvalidArgument("prototype and label counts differ");
    }
    std::vector<Prototype> out;
    auto rows = embeddings_of(vectors);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back(Prototype{ Label{ labels[i] }, std::move(rows[i]), false });
    }
    return out;
}

KernelSpec kernel_of(const std::string &kind, double gamma, bool chi2_halved) {
    KernelSpec spec{ kernel_kind_from_string(kind), gamma, chi2_halved };
    spec.validate();
    return spec;
}

py::object to_python(const nlohmann::ordered_json &j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict report_dict(const RunResult &run) {
    py::dict out;
    out["report"] = to_python(report_to_json(run.report));
    out["run_dir"] = run.run_dir;
    return out;
}

ExperimentConfig config_with(const std::filesystem::path &path, std::optional<bool> self_train, std::optional<bool> augment, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> output_dir) {
    auto config = load_config(path);
    if (self_train) {
        config.self_train = *self_train;
    }
    if (augment) {
        config.augment = *augment;
    }
    if (seed) {
        config.seed = *seed;
    }
    if (output_dir) {
        config.output_dir = *output_dir;
    }
    return config;
}

}  // namespace

PYBIND11_MODULE(_zslkit, m) {
    m.doc() = "Zero-shot action recognition by kernel regression into word-embedding space";

    auto base = py::register_exception<Error>(m, "ZslkitError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<VocabularyError>(m, "VocabularyError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    m.def("tokenize", [](const std::string &text) { return tokenize(text); }, py::arg("text"));

    m.def(
        "chi2_distance",
        [](const std::vector<double> &a, const std::vector<double> &b, bool halved) { return chi2_distance(a, b, halved); },
        py::arg("a"), py::arg("b"), py::arg("halved") = true);

    m.def(
        "gram_matrix",
        [](const Eigen::Ref<const RowMatrix> &rows, std::optional<Eigen::Ref<const RowMatrix>> cols, const std::string &kind, double gamma, bool chi2_halved) {
            const auto spec = kernel_of(kind, gamma, chi2_halved);
            const auto r = rows_of(rows);
            if (!cols) {
                return Eigen::MatrixXd(gram_matrix(spec, views_of(r)));
            }
            const auto c = rows_of(*cols);
            return Eigen::MatrixXd(gram_matrix(spec, views_of(r), views_of(c)));
        },
        py::arg("rows"), py::arg("cols") = py::none(), py::arg("kind") = "rbf_chi2", py::arg("gamma") = 1.0, py::arg("chi2_halved") = true);

    m.def(
        "heuristic_gamma",
        [](const Eigen::Ref<const RowMatrix> &points, const std::string &kind, bool include_self_pairs, std::size_t max_pairs, std::uint64_t seed, bool chi2_halved) {
            const auto p = rows_of(points);
            return heuristic_gamma(kernel_of(kind, 1.0, chi2_halved), views_of(p), GammaOptions{ include_self_pairs, max_pairs, seed });
        },
        py::arg("points"), py::arg("kind") = "rbf_chi2", py::arg("include_self_pairs") = false, py::arg("max_pairs") = 1'000'000,
        py::arg("seed") = 0, py::arg("chi2_halved") = true);

    m.def(
        "train_svr",
        [](const Eigen::MatrixXd &gram, const std::vector<double> &targets, double c, double epsilon, double tolerance, std::size_t max_passes) {
            const auto model = train_svr(gram, targets, SvrConfig{ c, epsilon, tolerance, max_passes });
            py::dict out;
            out["support_indices"] = model.support_indices;
            out["dual_coefficients"] = model.dual_coefficients;
            out["bias"] = model.bias;
            out["dual_objective"] = model.dual_objective;
            out["iterations"] = model.iterations;
            return out;
        },
        py::arg("gram"), py::arg("targets"), py::arg("c") = 2.0, py::arg("epsilon") = 0.1, py::arg("tolerance") = 1e-3, py::arg("max_passes") = 1000);

    py::class_<SemanticRegressor>(m, "SemanticRegressor")
        .def_property_readonly("dimension", &SemanticRegressor::dimension)
        .def_property_readonly("feature_dimension", &SemanticRegressor::feature_dimension)
        .def_property_readonly("gamma", [](const SemanticRegressor &r) { return r.kernel().gamma; })
        .def(
            "predict",
            [](const SemanticRegressor &r, const Eigen::Ref<const RowMatrix> &features) {
                return matrix_of(r.predict(features_of(features)), r.dimension());
            },
            py::arg("features"));

    m.def(
        "fit_regressor",
        [](const Eigen::Ref<const RowMatrix> &features, const Eigen::Ref<const RowMatrix> &embeddings, double c, double epsilon, std::optional<double> gamma, const std::string &kind) {
            const auto x = features_of(features);
            auto spec = kernel_of(kind, 1.0, true);
            if (gamma) {
                spec.gamma = *gamma;
                spec.validate();
            } else {
                spec.gamma = heuristic_gamma(spec, views_of(x));
            }
            return train_semantic_regressor(x, embeddings_of(embeddings), SvrConfig{ c, epsilon }, spec);
        },
        py::arg("features"), py::arg("embeddings"), py::arg("c") = 2.0, py::arg("epsilon") = 0.1, py::arg("gamma") = py::none(), py::arg("kind") = "rbf_chi2");

    m.def(
        "self_train",
        [](const Eigen::Ref<const RowMatrix> &prototypes, const Eigen::Ref<const RowMatrix> &projections, std::size_t k, bool renormalize) {
            std::vector<Prototype> protos;
            for (auto &v : embeddings_of(prototypes)) {
                protos.push_back(Prototype{ Label{ "p" + std::to_string(protos.size()) }, std::move(v), false });
            }
            return matrix_of([&] {
                std::vector<EmbeddingVector> out;
                for (auto &p : self_train(protos, embeddings_of(projections), SelfTrainConfig{ k, renormalize })) {
                    out.push_back(std::move(p.vector));
                }
                return out;
            }(), static_cast<std::size_t>(prototypes.cols()));
        },
        py::arg("prototypes"), py::arg("projections"), py::arg("k") = 10, py::arg("renormalize") = true);

    m.def(
        "match",
        [](const Eigen::Ref<const RowMatrix> &prototypes, const std::vector<std::string> &labels, const Eigen::Ref<const RowMatrix> &projections, std::optional<std::size_t> self_train_k) {
            const auto projs = embeddings_of(projections);
            std::vector<std::string> ids(projs.size());
            for (std::size_t i = 0; i < ids.size(); ++i) {
                ids[i] = std::to_string(i);
            }
            std::optional<SelfTrainConfig> st;
            if (self_train_k) {
                st = SelfTrainConfig{ *self_train_k, true };
            }
            std::vector<std::string> out;
            for (const auto &p : match_projections(prototypes_of(prototypes, labels), ids, projs, st).predictions) {
                out.push_back(p.predicted.name());
            }
            return out;
        },
        py::arg("prototypes"), py::arg("labels"), py::arg("projections"), py::arg("self_train_k") = py::none());

    m.def(
        "simulate_random_guess",
        [](std::size_t num_classes, std::size_t instances, std::size_t trials, std::uint64_t seed) { return simulate_random_guess(num_classes, instances, trials, seed); },
        py::arg("num_classes"), py::arg("instances"), py::arg("trials"), py::arg("seed") = 0);

    m.def(
        "generate_splits",
        [](const std::vector<std::string> &vocabulary, std::size_t count, std::uint64_t seed) {
            std::vector<Label> labels(vocabulary.begin(), vocabulary.end());
            py::list out;
            for (const auto &s : generate_splits(labels, count, seed)) {
                out.append(to_python(split_to_json(s)));
            }
            return out;
        },
        py::arg("vocabulary"), py::arg("count"), py::arg("seed"));

    m.def(
        "kmeans",
        [](const Eigen::Ref<const RowMatrix> &descriptors, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
            const auto result = kmeans_codebook(rows_of(descriptors), k, seed, max_iters);
            std::vector<EmbeddingVector> centroids;
            for (const auto &c : result.codebook.centroids) {
                centroids.push_back(EmbeddingVector{ c, false });
            }
            return py::make_tuple(matrix_of(centroids, static_cast<std::size_t>(descriptors.cols())), result.inertia_history);
        },
        py::arg("descriptors"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 100);

    m.def(
        "config_fingerprint", [](const std::filesystem::path &path) { return config_fingerprint(load_config(path)); }, py::arg("config"));

    m.def(
        "eval_zsl",
        [](const std::filesystem::path &path, std::optional<bool> self_train, std::optional<bool> augment, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> output_dir) {
            const auto config = config_with(path, self_train, augment, seed, output_dir);
            RunResult run;
            {
                py::gil_scoped_release release;
                run = run_zsl_evaluation(config);
            }
            return report_dict(run);
        },
        py::arg("config"), py::arg("self_train") = py::none(), py::arg("augment") = py::none(), py::arg("seed") = py::none(), py::arg("output_dir") = py::none());

    m.def(
        "eval_multishot",
        [](const std::filesystem::path &path, std::optional<bool> augment, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> output_dir) {
            const auto config = config_with(path, std::nullopt, augment, seed, output_dir);
            RunResult run;
            {
                py::gil_scoped_release release;
                run = run_multishot_evaluation(config);
            }
            return report_dict(run);
        },
        py::arg("config"), py::arg("augment") = py::none(), py::arg("seed") = py::none(), py::arg("output_dir") = py::none());
}
