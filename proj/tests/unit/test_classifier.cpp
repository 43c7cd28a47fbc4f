#include "../oracle/qp_oracle.hpp"
#include "helpers.hpp"

#include "zslkit/classifier.hpp"
#include "zslkit/error.hpp"
#include "zslkit/model_io.hpp"

#include <doctest.h>

#include <cmath>

using namespace zslkit;

namespace {

EmbeddingVector unit(std::vector<double> v) {
    return l2_normalize(EmbeddingVector{ std::move(v), false });
}

EmbeddingVector jitter(Rng &rng, const std::vector<double> &center, double sigma) {
    std::vector<double> v = center;
    for (auto &x : v) {
        x += sigma * rng.normal();
    }
    return unit(v);
}

}  // namespace

TEST_CASE("argmax decision") {
    const std::vector<double> a{ 0.9, -0.2 };
    CHECK(argmax_decision(a) == 0);
    const std::vector<double> tie{ 0.3, 0.5, 0.5 };
    CHECK(argmax_decision(tie) == 1);
    CHECK_THROWS_AS((void)argmax_decision(std::span<const double>{}), InvalidArgument);
}

TEST_CASE("binary dual matches the oracle") {
    Rng rng{ 17 };
    const KernelSpec spec{ KernelKind::rbf_euclidean, 1.0, true };
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.below(9));
        std::vector<EmbeddingVector> pts;
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform01() < 0.5 ? 1 : -1;
            pts.push_back(jitter(rng, { 1.0 * y[i], 0.3, 0.0 }, 0.8));
        }
        y[0] = 1;
        y[1] = -1;
        const Eigen::MatrixXd gram = gram_matrix(spec, views_of(pts));
        SvcConfig cfg;
        cfg.tolerance = 1e-8;
        const auto m = train_binary_svc(gram, y, cfg);
        const auto sol = oracle::solve(oracle::svc_problem(gram, y, cfg.c));
        REQUIRE(sol.certified);
        CHECK(std::abs(m.dual_objective - sol.objective) <= 1e-6 * std::abs(sol.objective));
        for (const double c : m.coefficients) {
            CHECK(std::abs(c) <= cfg.c + 1e-9);
        }
    }
}

TEST_CASE("separable clusters are classified perfectly") {
    Rng rng{ 19 };
    std::vector<EmbeddingVector> pts;
    std::vector<Label> labels;
    for (int i = 0; i < 20; ++i) {
        pts.push_back(jitter(rng, { 1, 0, 0 }, 0.1));
        labels.emplace_back("run");
        pts.push_back(jitter(rng, { 0, 1, 0 }, 0.1));
        labels.emplace_back("jump");
    }
    const auto model = train_svc(pts, labels, SvcConfig{});
    CHECK(model.classes().size() == 2);
    CHECK(model.classes()[0] == Label{ "run" });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(model.classify(pts[i]) == labels[i]);
    }
    CHECK(model.classify(unit({ 1, 0, 0 })) == Label{ "run" });
    CHECK_THROWS_AS((void)model.classify(unit({ 1, 0 })), InvalidArgument);

    for (const auto &m : model.machines()) {
        for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
            CHECK(std::abs(m.coefficients[s]) <= 2.0 + 1e-9);
        }
    }
}

TEST_CASE("single class and mismatched inputs are rejected") {
    const std::vector<EmbeddingVector> pts{ unit({ 1, 0 }), unit({ 0, 1 }) };
    CHECK_THROWS_AS((void)train_svc(pts, { Label{ "a" }, Label{ "a" } }, SvcConfig{}), InvalidArgument);
    CHECK_THROWS_AS((void)train_svc(pts, { Label{ "a" } }, SvcConfig{}), InvalidArgument);
    const std::vector<EmbeddingVector> ragged{ unit({ 1, 0 }), unit({ 0, 1, 0 }) };
    CHECK_THROWS_AS((void)train_svc(ragged, { Label{ "a" }, Label{ "b" } }, SvcConfig{}), InvalidArgument);
}

TEST_CASE("exact tie goes to the first class") {
    BinarySvc zero_a, zero_b;
    zero_a.bias = 0.5;
    zero_b.bias = 0.5;
    const SvcModel model{ { KernelKind::rbf_euclidean, 1.0, true }, { Label{ "a" }, Label{ "b" } }, {}, { zero_a, zero_b } };
    CHECK(model.classify(unit({ 1, 0 })) == Label{ "a" });
}

TEST_CASE("duplicating every training point keeps the decision signs") {
    Rng rng{ 23 };
    std::vector<EmbeddingVector> pts;
    std::vector<Label> labels;
    const std::vector<std::vector<double>> centers{ { 1, 0, 0 }, { 0, 1, 0 }, { 0, 0, 1 } };
    const std::vector<std::string> names{ "a", "b", "c" };
    for (int i = 0; i < 8; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            pts.push_back(jitter(rng, centers[c], 0.05));
            labels.emplace_back(names[c]);
        }
    }
    SvcConfig cfg;
    cfg.c = 100.0;
    cfg.tolerance = 1e-8;
    const KernelSpec spec{ KernelKind::rbf_euclidean, 2.0, true };
    const auto model = train_svc(pts, labels, cfg, spec);
    for (const auto &m : model.machines()) {
        for (const double a : m.coefficients) {
            REQUIRE(std::abs(a) < cfg.c);
        }
    }
    auto pts2 = pts;
    pts2.insert(pts2.end(), pts.begin(), pts.end());
    auto labels2 = labels;
    labels2.insert(labels2.end(), labels.begin(), labels.end());
    const auto doubled = train_svc(pts2, labels2, cfg, spec);

    for (int t = 0; t < 100; ++t) {
        const auto probe = unit({ rng.normal(), rng.normal(), rng.normal() });
        const auto v1 = model.decision_values(probe);
        const auto v2 = doubled.decision_values(probe);
        for (std::size_t c = 0; c < 3; ++c) {
            if (std::abs(v1[c]) > 1e-4) {
                CHECK((v1[c] > 0) == (v2[c] > 0));
            }
        }
        CHECK(model.classify(probe) == doubled.classify(probe));
    }
}

TEST_CASE("classification is invariant to training order") {
    Rng rng{ 29 };
    std::vector<EmbeddingVector> pts;
    std::vector<Label> labels;
    for (int i = 0; i < 15; ++i) {
        pts.push_back(jitter(rng, { 1, 0.2, 0 }, 0.4));
        labels.emplace_back("a");
        pts.push_back(jitter(rng, { 0, 1, 0.2 }, 0.4));
        labels.emplace_back("b");
    }
    SvcConfig cfg;
    cfg.tolerance = 1e-9;
    const KernelSpec spec{ KernelKind::rbf_euclidean, 1.0, true };
    const auto model = train_svc(pts, labels, cfg, spec);

    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng shuffler{ 3 };
    shuffler.shuffle(order);
    std::vector<EmbeddingVector> p2;
    std::vector<Label> l2;
    for (const auto i : order) {
        p2.push_back(pts[i]);
        l2.push_back(labels[i]);
    }
    const auto shuffled = train_svc(p2, l2, cfg, spec);
    for (int t = 0; t < 100; ++t) {
        const auto probe = unit({ rng.normal(), rng.normal(), rng.normal() });
        const auto v1 = model.decision_values(probe);
        const auto v2 = shuffled.decision_values(probe);
        // class order follows first appearance, so compare by name
        const std::size_t b1 = model.classes()[0] == Label{ "a" } ? 0 : 1;
        const std::size_t b2 = shuffled.classes()[0] == Label{ "a" } ? 0 : 1;
        CHECK(v1[b1] == doctest::Approx(v2[b2]).epsilon(1e-5));
        if (std::abs(v1[0] - v1[1]) > 1e-4) {
            CHECK(model.classify(probe) == shuffled.classify(probe));
        }
    }
}

TEST_CASE("classifier model files round-trip") {
    Rng rng{ 31 };
    std::vector<EmbeddingVector> pts;
    std::vector<Label> labels;
    for (int i = 0; i < 10; ++i) {
        pts.push_back(jitter(rng, { 1, 0 }, 0.3));
        labels.emplace_back("left");
        pts.push_back(jitter(rng, { 0, 1 }, 0.3));
        labels.emplace_back("right");
    }
    const auto model = train_svc(pts, labels, SvcConfig{});
    const auto dir = testing::scratch_dir("svc_io");
    save_classifier(model, dir / "svc.json");
    const auto loaded = load_classifier(dir / "svc.json");
    CHECK(loaded.classes() == model.classes());
    for (int t = 0; t < 50; ++t) {
        const auto probe = unit({ rng.normal(), rng.normal() });
        const auto a = model.decision_values(probe);
        const auto b = loaded.decision_values(probe);
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(std::abs(a[c] - b[c]) <= 1e-12);
        }
    }
    CHECK_THROWS_AS((void)regressor_from_json(classifier_to_json(model)), ParseError);
}
