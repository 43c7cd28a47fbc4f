#include "helpers.hpp"

#include "zslkit/error.hpp"
#include "zslkit/zsl.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace zslkit;

namespace {

EmbeddingStore toy_store() {
    EmbeddingStore store{ 2 };
    store.insert("run", { 3, 4 });
    store.insert("jump", { 0, 2 });
    store.insert("ride", { 1, 0 });
    store.insert("horse", { 0, 1 });
    store.insert("walk", { -1, 0 });
    return store;
}

EmbeddingVector unit(std::vector<double> v) {
    return l2_normalize(EmbeddingVector{ std::move(v), false });
}

Prototype proto(const std::string &name, std::vector<double> v) {
    return Prototype{ Label{ name }, unit(std::move(v)), false };
}

Dataset dataset_of(const std::string &name, const std::vector<std::pair<std::string, std::string>> &rows, std::size_t dx = 2) {
    Dataset d{ name, dx };
    for (const auto &[id, label] : rows) {
        d.add(Instance{ id, Label{ label }, FeatureVector{ std::vector<double>(dx, 0.5) } });
    }
    return d;
}

}  // namespace

TEST_CASE("build prototypes") {
    const auto store = toy_store();
    const auto p = build_prototypes(store, { Label{ "run" }, Label{ "ride horse" } });
    REQUIRE(p.size() == 2);
    CHECK(p[0].vector.values[0] == doctest::Approx(0.6));
    CHECK(p[0].vector.values[1] == doctest::Approx(0.8));
    CHECK(p[1].vector.values[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(p[1].vector.values[1] == doctest::Approx(std::sqrt(0.5)));
    CHECK_FALSE(p[0].adapted);
    CHECK(std::abs(l2_norm(p[1].vector.values) - 1.0) < 1e-9);

    const auto raw = build_prototypes(store, { Label{ "run" } }, false);
    CHECK(raw[0].vector.values == std::vector<double>{ 3, 4 });

    CHECK_THROWS_AS((void)build_prototypes(store, { Label{ "run" }, Label{ "Run" } }), InvalidArgument);
    CHECK_THROWS_AS((void)build_prototypes(store, { Label{ "swim" } }), VocabularyError);
}

TEST_CASE("nearest-neighbour matching") {
    const std::vector<Prototype> protos{ proto("a", { 1, 0 }), proto("b", { 0, 1 }) };
    CHECK(nn_classify(protos, unit({ 0, 1 })) == Label{ "b" });

    // |(0.9939, 0.1104) - (1,0)|^2 = 0.0244 versus |... - (0,1)|^2 = 1.7791
    const auto x = unit({ 0.9, 0.1 });
    const double da = squared_euclidean(x.values, protos[0].vector.values);
    const double db = squared_euclidean(x.values, protos[1].vector.values);
    CHECK(da == doctest::Approx(2.0 - 2.0 * 0.9 / std::sqrt(0.82)));
    CHECK(db == doctest::Approx(2.0 - 2.0 * 0.1 / std::sqrt(0.82)));
    CHECK(nn_classify(protos, x) == Label{ "a" });

    CHECK(nn_classify(protos, unit({ 1, 1 })) == Label{ "a" });
    CHECK_THROWS_AS((void)nn_classify({}, x), InvalidArgument);
}

TEST_CASE("matching is invariant to uniform scaling of distances") {
    Rng rng{ 5 };
    std::vector<Prototype> protos;
    for (int c = 0; c < 6; ++c) {
        protos.push_back(proto("c" + std::to_string(c), { rng.normal(), rng.normal(), rng.normal() }));
    }
    // scaling every vector by s scales every distance by s
    auto scaled = protos;
    for (auto &p : scaled) {
        for (auto &v : p.vector.values) {
            v *= 3.5;
        }
    }
    for (int t = 0; t < 100; ++t) {
        auto x = unit({ rng.normal(), rng.normal(), rng.normal() });
        auto xs = x;
        for (auto &v : xs.values) {
            v *= 3.5;
        }
        CHECK(nearest_prototype(protos, x).index == nearest_prototype(scaled, xs).index);
    }
}

TEST_CASE("self-training examples") {
    const std::vector<Prototype> protos{ proto("a", { 1, 0 }) };
    const std::vector<EmbeddingVector> proj{ unit({ 0.8, 0.6 }), unit({ 0.6, 0.8 }), unit({ 0, 1 }) };
    const auto adapted = self_train(protos, proj, SelfTrainConfig{ 2, true });
    CHECK(adapted[0].adapted);
    CHECK(adapted[0].vector.values[0] == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(adapted[0].vector.values[1] == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK_FALSE(protos[0].adapted);
    CHECK(protos[0].vector.values == std::vector<double>{ 1, 0 });

    const auto plain = self_train(protos, proj, SelfTrainConfig{ 2, false });
    CHECK(plain[0].vector.values[0] == doctest::Approx(0.7));
    CHECK(plain[0].vector.values[1] == doctest::Approx(0.7));

    const auto k1 = self_train({ proto("a", { 1, 0 }), proto("b", { 0, 1 }) }, proj, SelfTrainConfig{ 1, true });
    CHECK(k1[0].vector.values == proj[0].values);
    CHECK(k1[1].vector.values == proj[2].values);

    const auto v = unit({ 2, 1 });
    const std::vector<EmbeddingVector> same(5, v);
    for (const auto &p : self_train({ proto("a", { 1, 0 }), proto("b", { 0, 1 }) }, same, SelfTrainConfig{ 3, true })) {
        CHECK(p.vector.values[0] == doctest::Approx(v.values[0]));
        CHECK(p.vector.values[1] == doctest::Approx(v.values[1]));
    }

    CHECK_THROWS_AS((void)self_train(protos, proj, SelfTrainConfig{ 4, true }), InvalidArgument);
    CHECK_THROWS_AS((void)self_train(protos, proj, SelfTrainConfig{ 0, true }), InvalidArgument);
    CHECK_THROWS_AS((void)self_train(protos, {}, SelfTrainConfig{ 1, true }), InvalidArgument);
}

TEST_CASE("self-training with k equal to all projections maps every prototype to the global mean") {
    Rng rng{ 7 };
    std::vector<EmbeddingVector> proj;
    for (int i = 0; i < 9; ++i) {
        proj.push_back(unit({ rng.normal(), rng.normal(), rng.normal() }));
    }
    const std::vector<Prototype> protos{ proto("a", { 1, 0, 0 }), proto("b", { 0, 1, 0 }), proto("c", { 0, 0, 1 }) };
    const auto once = self_train(protos, proj, SelfTrainConfig{ 9, true });
    for (const auto &p : once) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(p.vector.values[j] == doctest::Approx(once[0].vector.values[j]).epsilon(1e-12));
        }
    }
    const auto twice = self_train(once, proj, SelfTrainConfig{ 9, true });
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(twice[c].vector.values[j] == doctest::Approx(once[c].vector.values[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("self-training fixed point leaves predictions unchanged") {
    // projections placed symmetrically around each prototype so that the
    // K-neighbour mean renormalizes to the prototype itself
    const std::vector<Prototype> protos{ proto("a", { 1, 0, 0 }), proto("b", { 0, 1, 0 }) };
    std::vector<EmbeddingVector> proj;
    std::vector<std::string> ids;
    for (const auto &p : protos) {
        const auto &c = p.vector.values;
        for (const double s : { -0.2, 0.2 }) {
            std::vector<double> v = c;
            v[2] += s;
            proj.push_back(unit(v));
            ids.push_back(p.label.key() + std::to_string(ids.size()));
        }
    }
    const auto plain = match_projections(protos, ids, proj, std::nullopt);
    const auto adapted = match_projections(protos, ids, proj, SelfTrainConfig{ 2, true });
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(adapted.prototypes[c].vector.values[j] == doctest::Approx(protos[c].vector.values[j]).epsilon(1e-12));
        }
    }
    for (std::size_t i = 0; i < proj.size(); ++i) {
        CHECK(plain.predictions[i].predicted == adapted.predictions[i].predicted);
    }
}

TEST_CASE("match projections edge cases") {
    const std::vector<Prototype> protos{ proto("a", { 1, 0 }) };
    const auto none = match_projections(protos, {}, {}, SelfTrainConfig{ 10, true });
    CHECK(none.predictions.empty());

    const auto forced = match_projections(protos, { "x", "y" }, { EmbeddingVector{ { 0, 3 }, false }, EmbeddingVector{ { -1, 0 }, false } }, std::nullopt);
    REQUIRE(forced.predictions.size() == 2);
    CHECK(forced.predictions[0].predicted == Label{ "a" });
    CHECK(forced.predictions[1].predicted == Label{ "a" });
    CHECK(forced.predictions[1].distance == doctest::Approx(2.0));
}

TEST_CASE("zero-shot problem validation") {
    ZslProblem ok{ dataset_of("t", { { "1", "run" } }), dataset_of("t", { { "2", "jump" } }), { proto("jump", { 0, 1 }) } };
    CHECK_NOTHROW(ok.validate());
    ZslProblem overlap{ dataset_of("t", { { "1", "run" } }), dataset_of("t", { { "2", "run" } }), { proto("run", { 0, 1 }) } };
    CHECK_THROWS_AS(overlap.validate(), InvalidArgument);
    ZslProblem missing{ dataset_of("t", { { "1", "run" } }), dataset_of("t", { { "2", "jump" } }), { proto("walk", { 0, 1 }) } };
    CHECK_THROWS_AS(missing.validate(), InvalidArgument);
}

TEST_CASE("augmentation concatenates target then auxiliary") {
    const auto store = toy_store();
    std::vector<std::pair<std::string, std::string>> trg_rows, aux_rows;
    for (int i = 0; i < 10; ++i) {
        trg_rows.emplace_back("t" + std::to_string(i), i % 2 ? "run" : "jump");
    }
    for (int i = 0; i < 15; ++i) {
        aux_rows.emplace_back("a" + std::to_string(i), i % 2 ? "ride horse" : "run");
    }
    const auto target = dataset_of("trg", trg_rows);
    const auto aux = dataset_of("aux", aux_rows);
    const std::vector<Label> unseen{ Label{ "walk" } };

    const auto rows = augment_training(target, aux, store, unseen);
    REQUIRE(rows.features.size() == 25);
    REQUIRE(rows.targets.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(rows.provenance[i] == (i < 10 ? Provenance::target : Provenance::auxiliary));
        CHECK(rows.targets[i].normalized);
    }
    CHECK(rows.targets[0].values == unit({ 0, 2 }).values);
    CHECK(rows.targets[10].values == unit({ 3, 4 }).values);
    CHECK(rows.targets[11].values == unit({ 0.5, 0.5 }).values);

    const auto plain = training_set(target, store);
    const auto empty_aux = augment_training(target, Dataset{ "aux", 2 }, store, unseen);
    CHECK(empty_aux.features.size() == plain.features.size());
    for (std::size_t i = 0; i < plain.targets.size(); ++i) {
        CHECK(empty_aux.targets[i].values == plain.targets[i].values);
        CHECK(empty_aux.features[i].bins == plain.features[i].bins);
    }

    CHECK_THROWS_WITH_AS((void)augment_training(target, aux, store, { Label{ "ride_horse" } }), doctest::Contains("ride horse"), InvalidArgument);
    Dataset wide{ "aux", 3 };
    wide.add(Instance{ "w", Label{ "run" }, FeatureVector{ { 0.1, 0.2, 0.7 } } });
    CHECK_THROWS_AS((void)augment_training(target, wide, store, unseen), InvalidArgument);
}

TEST_CASE("random guessing") {
    const std::vector<Label> classes{ Label{ "a" }, Label{ "b" }, Label{ "c" } };
    const std::vector<std::string> ids{ "1", "2", "3", "4" };
    const auto p = random_predictions(classes, ids, 5);
    REQUIRE(p.size() == 4);
    CHECK(p[0].instance_id == "1");
    const auto q = random_predictions(classes, ids, 5);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(p[i].predicted == q[i].predicted);
    }
    CHECK(simulate_random_guess(1, 10, 5, 0) == 100.0);
    CHECK(simulate_random_guess(4, 100, 400, 1) == doctest::Approx(25.0).epsilon(0.05));
}

TEST_CASE("prediction csv") {
    std::ostringstream out;
    write_predictions_csv({ Prediction{ "v1", Label{ "brush hair" }, 0.25 } }, out);
    CHECK(out.str().rfind("instance_id,predicted_label,distance\n", 0) == 0);
    CHECK(out.str().find("v1,brush_hair,0.25") != std::string::npos);
}
