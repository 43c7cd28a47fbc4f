#include "../oracle/qp_oracle.hpp"
#include "helpers.hpp"

#include "zslkit/error.hpp"
#include "zslkit/model_io.hpp"
#include "zslkit/regression.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace zslkit;

namespace {

SvrConfig tight(double c = 2.0, double eps = 0.1) {
    SvrConfig cfg;
    cfg.c = c;
    cfg.epsilon = eps;
    cfg.tolerance = 1e-8;
    return cfg;
}

std::vector<double> training_predictions(const SvrModel &m, const Eigen::MatrixXd &gram) {
    std::vector<double> out(static_cast<std::size_t>(gram.rows()));
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        const Eigen::VectorXd row = gram.row(i);
        out[static_cast<std::size_t>(i)] = m.evaluate({ row.data(), static_cast<std::size_t>(row.size()) });
    }
    return out;
}

}  // namespace

TEST_CASE("two samples, targets -1 and +1, eps 0: matches the dense oracle") {
    const std::vector<double> a{ 1, 0 }, b{ 0, 1 };
    const KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    const std::vector<std::span<const double>> pts{ a, b };
    const Eigen::MatrixXd gram = gram_matrix(spec, pts);
    const std::vector<double> y{ -1.0, 1.0 };
    const auto model = train_svr(gram, y, tight(2.0, 0.0));

    // theta = (-t, t); objective (1 - k) t^2 - 2t on [0, 2]: t* = min(2, 1 / (1 - k))
    const double k = std::exp(-1.0);
    const double t_star = std::min(2.0, 1.0 / (1.0 - k));
    const auto sol = oracle::solve(oracle::svr_problem(gram, y, 2.0, 0.0));
    REQUIRE(sol.certified);
    CHECK(sol.x[1] == doctest::Approx(t_star).epsilon(1e-9));

    const auto pred = training_predictions(model, gram);
    const Eigen::VectorXd oracle_pred = gram * sol.x + Eigen::VectorXd::Constant(2, sol.nu);
    CHECK(std::abs(pred[0] - oracle_pred[0]) < 1e-4);
    CHECK(std::abs(pred[1] - oracle_pred[1]) < 1e-4);
}

TEST_CASE("constant targets fit inside the tube") {
    Rng rng{ 1 };
    const auto x = testing::random_histograms(rng, 8, 6);
    const Eigen::MatrixXd gram = gram_matrix({ KernelKind::rbf_chi2, 1.0, true }, views_of(x));
    const std::vector<double> y(8, 5.0);
    const auto model = train_svr(gram, y, SvrConfig{});
    CHECK(model.support_indices.empty());
    CHECK(model.bias == doctest::Approx(5.0));
    for (const double p : training_predictions(model, gram)) {
        CHECK(p == doctest::Approx(5.0));
    }
}

TEST_CASE("dual objective and predictions match the oracle on random problems") {
    Rng rng{ 77 };
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 10;
        const auto x = testing::random_histograms(rng, n, 8);
        KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
        spec.gamma = heuristic_gamma(spec, views_of(x));
        const Eigen::MatrixXd gram = gram_matrix(spec, views_of(x));
        std::vector<double> y(n);
        for (auto &v : y) {
            v = rng.normal();
        }
        const auto model = train_svr(gram, y, tight());
        const auto sol = oracle::solve(oracle::svr_problem(gram, y, 2.0, 0.1));
        REQUIRE(sol.certified);
        CHECK(std::abs(model.dual_objective - sol.objective) <= 1e-6 * std::abs(sol.objective));
        const auto pred = training_predictions(model, gram);
        const Eigen::VectorXd ref = gram * sol.x + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), sol.nu);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(pred[i] - ref[static_cast<Eigen::Index>(i)]) < 1e-4);
        }
    }
}

TEST_CASE("box constraints and KKT conditions at default tolerance") {
    Rng rng{ 9 };
    const auto x = testing::random_histograms(rng, 40, 10);
    KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    spec.gamma = heuristic_gamma(spec, views_of(x));
    const Eigen::MatrixXd gram = gram_matrix(spec, views_of(x));
    std::vector<double> y(40);
    for (auto &v : y) {
        v = rng.normal();
    }
    SvrConfig cfg;
    const auto model = train_svr(gram, y, cfg);
    const auto pred = training_predictions(model, gram);
    std::vector<double> coef(40, 0.0);
    for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
        coef[model.support_indices[s]] = model.dual_coefficients[s];
        CHECK(std::abs(model.dual_coefficients[s]) <= cfg.c + 1e-9);
    }
    for (std::size_t i = 0; i < 40; ++i) {
        const double r = std::abs(pred[i] - y[i]);
        const double a = std::abs(coef[i]);
        if (a > 0.0 && a < cfg.c) {
            CHECK(r >= cfg.epsilon - cfg.tolerance);
            CHECK(r <= cfg.epsilon + cfg.tolerance);
        } else if (a == 0.0) {
            CHECK(r <= cfg.epsilon + cfg.tolerance);
        } else {
            CHECK(r >= cfg.epsilon - cfg.tolerance);
        }
    }
}

TEST_CASE("interpolation with eps 0 and large C") {
    Rng rng{ 31 };
    const auto x = testing::random_histograms(rng, 5, 6);
    const Eigen::MatrixXd gram = gram_matrix({ KernelKind::rbf_chi2, 2.0, true }, views_of(x));
    const std::vector<double> y{ 0.3, -0.7, 1.1, 0.0, -0.2 };
    SvrConfig cfg = tight(1e4, 0.0);
    const auto model = train_svr(gram, y, cfg);
    const auto pred = training_predictions(model, gram);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(pred[i] - y[i]) < 1e-3);
    }
}

TEST_CASE("input validation") {
    const Eigen::MatrixXd rect = Eigen::MatrixXd::Ones(2, 3);
    const std::vector<double> y2{ 1.0, 2.0 }, y3{ 1.0, 2.0, 3.0 };
    CHECK_THROWS_AS((void)train_svr(rect, y2, SvrConfig{}), InvalidArgument);
    CHECK_THROWS_AS((void)train_svr(Eigen::MatrixXd::Identity(2, 2), y3, SvrConfig{}), InvalidArgument);
    SvrConfig bad;
    bad.c = 0.0;
    CHECK_THROWS_AS((void)train_svr(Eigen::MatrixXd::Identity(2, 2), y2, bad), InvalidArgument);
    bad = SvrConfig{};
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("non-convergence reports diagnostics") {
    Rng rng{ 2 };
    const auto x = testing::random_histograms(rng, 30, 6);
    const Eigen::MatrixXd gram = gram_matrix({ KernelKind::rbf_chi2, 3.0, true }, views_of(x));
    std::vector<double> y(30);
    for (auto &v : y) {
        v = rng.normal();
    }
    SvrConfig cfg = tight(100.0, 0.0);
    cfg.max_passes = 1;
    try {
        (void)train_svr(gram, y, cfg);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError &e) {
        CHECK(e.iterations() == 60);
        CHECK(e.violation() > cfg.tolerance);
    }
}

namespace {

struct Synthetic {
    std::vector<FeatureVector> features;
    std::vector<EmbeddingVector> targets;
};

Synthetic linear_targets(Rng &rng, const Eigen::MatrixXd &a, std::size_t n, std::size_t dx) {
    Synthetic s;
    for (std::size_t i = 0; i < n; ++i) {
        auto h = testing::random_histogram(rng, dx);
        Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(h.bins.data(), static_cast<Eigen::Index>(dx));
        Eigen::VectorXd z = a * xv.normalized();
        std::vector<double> zv(z.data(), z.data() + z.size());
        s.features.push_back(std::move(h));
        s.targets.push_back(l2_normalize(EmbeddingVector{ zv, false }));
    }
    return s;
}

}  // namespace

TEST_CASE("semantic regressor: one output reduces to train_svr") {
    Rng rng{ 41 };
    const auto x = testing::random_histograms(rng, 12, 6);
    std::vector<EmbeddingVector> z;
    std::vector<double> y;
    for (std::size_t i = 0; i < 12; ++i) {
        y.push_back(rng.normal());
        z.push_back(EmbeddingVector{ { y.back() }, false });
    }
    const KernelSpec spec{ KernelKind::rbf_chi2, 1.3, true };
    const auto reg = train_semantic_regressor(x, z, SvrConfig{}, spec);
    const auto single = train_svr(gram_matrix(spec, views_of(x)), y, SvrConfig{});
    REQUIRE(reg.dimension() == 1);
    CHECK(reg.models()[0].bias == single.bias);
    CHECK(reg.models()[0].dual_coefficients == single.dual_coefficients);
    for (const auto &p : x) {
        double ref = single.bias;
        for (std::size_t s = 0; s < single.support_indices.size(); ++s) {
            ref += single.dual_coefficients[s] * kernel_value(spec, x[single.support_indices[s]].bins, p.bins);
        }
        CHECK(reg.predict(p).values[0] == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("semantic regressor: constant unit target") {
    Rng rng{ 43 };
    const auto x = testing::random_histograms(rng, 15, 6);
    const EmbeddingVector u = l2_normalize(EmbeddingVector{ { 1, 2, 2 }, false });
    const std::vector<EmbeddingVector> z(15, u);
    const auto reg = train_semantic_regressor(x, z, SvrConfig{}, { KernelKind::rbf_chi2, 1.0, true });
    const auto probe = testing::random_histogram(rng, 6);
    const auto p = reg.predict(probe);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(p.values[j] - u.values[j]) <= 0.1 + 1e-9);
    }
    CHECK_THROWS_AS((void)reg.predict(FeatureVector{ { 1.0, 0.0 } }), InvalidArgument);
}

TEST_CASE("semantic regressor beats the constant-mean predictor on a linear map") {
    Rng rng{ 47 };
    const std::size_t dx = 10, dz = 6;
    Eigen::MatrixXd a(dz, dx);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a.data()[i] = rng.normal();
    }
    const auto train = linear_targets(rng, a, 50, dx);
    const auto test = linear_targets(rng, a, 20, dx);
    KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    spec.gamma = heuristic_gamma(spec, views_of(train.features));
    const auto reg = train_semantic_regressor(train.features, train.targets, SvrConfig{}, spec);

    std::vector<double> mean(dz, 0.0);
    for (const auto &t : train.targets) {
        for (std::size_t j = 0; j < dz; ++j) {
            mean[j] += t.values[j] / 50.0;
        }
    }
    const EmbeddingVector mean_vec{ mean, false };
    double err_model = 0.0, err_mean = 0.0;
    const auto preds = reg.predict(test.features);
    for (std::size_t i = 0; i < 20; ++i) {
        err_model += cosine_distance(preds[i], test.targets[i]);
        err_mean += cosine_distance(mean_vec, test.targets[i]);
    }
    CHECK(err_model < err_mean);
}

TEST_CASE("per-dimension independence") {
    Rng rng{ 53 };
    const auto x = testing::random_histograms(rng, 20, 6);
    std::vector<EmbeddingVector> z1, z2;
    for (std::size_t i = 0; i < 20; ++i) {
        const double shared = rng.normal();
        z1.push_back(EmbeddingVector{ { shared, rng.normal(), rng.normal() }, false });
        z2.push_back(EmbeddingVector{ { shared, rng.normal(), rng.normal() }, false });
    }
    const KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    const auto r1 = train_semantic_regressor(x, z1, SvrConfig{}, spec);
    const auto r2 = train_semantic_regressor(x, z2, SvrConfig{}, spec);
    const auto probe = testing::random_histogram(rng, 6);
    CHECK(r1.predict(probe).values[0] == r2.predict(probe).values[0]);
    CHECK(r1.models()[0].bias == r2.models()[0].bias);
}

TEST_CASE("predictions are invariant to support-vector storage order") {
    Rng rng{ 59 };
    const auto x = testing::random_histograms(rng, 25, 8);
    std::vector<EmbeddingVector> z;
    for (std::size_t i = 0; i < 25; ++i) {
        z.push_back(EmbeddingVector{ { rng.normal(), rng.normal() }, false });
    }
    const KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    const auto reg = train_semantic_regressor(x, z, SvrConfig{}, spec);

    // reverse the pool and remap every model
    const auto n = reg.pool().size();
    std::vector<FeatureVector> pool(reg.pool().rbegin(), reg.pool().rend());
    std::vector<SvrModel> models = reg.models();
    for (auto &m : models) {
        for (auto &s : m.support_indices) {
            s = n - 1 - s;
        }
        std::reverse(m.support_indices.begin(), m.support_indices.end());
        std::reverse(m.dual_coefficients.begin(), m.dual_coefficients.end());
    }
    const SemanticRegressor permuted{ spec, pool, models, reg.feature_dimension() };
    for (int t = 0; t < 20; ++t) {
        const auto probe = testing::random_histogram(rng, 8);
        const auto p = reg.predict(probe);
        const auto q = permuted.predict(probe);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(p.values[j] - q.values[j]) <= 1e-10);
        }
    }
}

TEST_CASE("model with no support vectors predicts its biases") {
    SvrModel m0, m1;
    m0.bias = 0.25;
    m1.bias = -1.5;
    const SemanticRegressor reg{ { KernelKind::rbf_chi2, 1.0, true }, {}, { m0, m1 }, 3 };
    const auto p = reg.predict(FeatureVector{ { 0.2, 0.3, 0.5 } });
    CHECK(p.values == std::vector<double>{ 0.25, -1.5 });
}

TEST_CASE("regressor model files") {
    Rng rng{ 61 };
    const auto x = testing::random_histograms(rng, 30, 8);
    std::vector<EmbeddingVector> z;
    for (std::size_t i = 0; i < 30; ++i) {
        z.push_back(EmbeddingVector{ { rng.normal(), rng.normal(), rng.normal() }, false });
    }
    KernelSpec spec{ KernelKind::rbf_chi2, 1.0, true };
    spec.gamma = heuristic_gamma(spec, views_of(x));
    const auto reg = train_semantic_regressor(x, z, SvrConfig{}, spec);

    const auto dir = testing::scratch_dir("model_io");
    const auto path = dir / "model.json";
    save_regressor(reg, path);
    const auto loaded = load_regressor(path);
    CHECK(loaded.dimension() == 3);
    CHECK(loaded.feature_dimension() == 8);
    for (int t = 0; t < 100; ++t) {
        const auto probe = testing::random_histogram(rng, 8);
        const auto p = reg.predict(probe);
        const auto q = loaded.predict(probe);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(p.values[j] - q.values[j]) <= 1e-12);
        }
    }

    std::string text;
    {
        std::ifstream in{ path };
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    {
        std::ofstream out{ dir / "truncated.json" };
        out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS((void)load_regressor(dir / "truncated.json"), ParseError);

    auto json = regressor_to_json(reg);
    json["dimension"] = 4;
    CHECK_THROWS_AS((void)regressor_from_json(json), ParseError);

    json = regressor_to_json(reg);
    json["version"] = 99;
    CHECK_THROWS_AS((void)regressor_from_json(json), ParseError);
}
