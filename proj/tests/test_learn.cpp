/*
 * Copyright 2026 the ricewatch authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "ricewatch/learn.hpp"
#include "ricewatch/model_io.hpp"
#include "ricewatch/rng.hpp"

using namespace ricewatch;

namespace {

/// Two well-separated 2-feature blobs embedded in the 76-wide schema.
Dataset blob_dataset(std::size_t n_per_class, double margin_sigmas, std::uint64_t seed,
                     int n_classes = 2) {
    Dataset ds;
    ds.task = n_classes == 2 ? Task::SOWING : Task::COMBINED;
    ds.class_names = task_classes(ds.task);
    Rng rng(seed);
    for (int c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            std::array<double, kFeatureCount> row{};
            row.fill(kAbsentSentinel);
            row[3] = rng.normal(c * margin_sigmas, 1.0);
            row[11] = rng.normal(-double(c) * margin_sigmas, 1.0);
            ds.x.push_back(row);
            ds.y.push_back(c);
            ds.original.push_back(c);
            ds.plot_ids.push_back("b" + std::to_string(c) + "_" + std::to_string(i));
            ds.planting_day.emplace_back();
        }
    }
    return ds;
}

double train_accuracy(const EnsembleModel& m, const Dataset& ds) {
    long ok = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        ok += predict(m, ds.x[i]).cls == ds.y[i];
    return double(ok) / double(ds.size());
}

}  // namespace

TEST_CASE("label collapse maps") {
    REQUIRE(collapse_label(PracticeLabel::CONTROL, Task::SOWING) == 0);     // PTR
    REQUIRE(collapse_label(PracticeLabel::AWD, Task::SOWING) == 0);         // PTR
    REQUIRE(collapse_label(PracticeLabel::DSR, Task::SOWING) == 1);         // DSR
    REQUIRE(collapse_label(PracticeLabel::DSR, Task::IRRIGATION) == 0);     // CF
    REQUIRE(collapse_label(PracticeLabel::CONTROL, Task::IRRIGATION) == 0); // CF
    REQUIRE(collapse_label(PracticeLabel::AWD, Task::IRRIGATION) == 1);     // AWD
    REQUIRE(collapse_label(PracticeLabel::AWD, Task::COMBINED) == 2);       // identity

    // surjective onto both binary labels; positive classes keep their names
    for (const Task t : {Task::SOWING, Task::IRRIGATION}) {
        std::set<int> image;
        for (int l = 0; l < kNumPracticeLabels; ++l)
            image.insert(collapse_label(static_cast<PracticeLabel>(l), t));
        REQUIRE(image == std::set<int>{0, 1});
    }
    REQUIRE(task_classes(Task::SOWING)[1] == "DSR");
    REQUIRE(task_classes(Task::IRRIGATION)[1] == "AWD");
    REQUIRE(task_classes(Task::SOWING)[0] == "PTR");
    REQUIRE(task_classes(Task::IRRIGATION)[0] == "CF");
}

TEST_CASE("stratified split reproduces the 129-plot held-out set") {
    std::vector<int> labels;
    labels.insert(labels.end(), 452, 0);
    labels.insert(labels.end(), 420, 1);
    labels.insert(labels.end(), 411, 2);
    const auto [train, test] = stratified_split(labels, 0.10, 42);
    REQUIRE(test.size() == 129);
    REQUIRE(train.size() == 1154);
    long counts[3] = {0, 0, 0};
    for (const auto i : test) ++counts[labels[i]];
    REQUIRE(counts[0] == 46);  // 45 floor + 1 largest remainder
    REQUIRE(counts[1] == 42);
    REQUIRE(counts[2] == 41);
}

TEST_CASE("stratified split small case and errors") {
    const std::vector<int> tiny{0, 0, 1, 1};
    const auto [train, test] = stratified_split(tiny, 0.5, 1);
    REQUIRE(test.size() == 2);
    long c0 = 0, c1 = 0;
    for (const auto i : test) (tiny[i] == 0 ? c0 : c1) += 1;
    REQUIRE(c0 == 1);
    REQUIRE(c1 == 1);

    REQUIRE_THROWS_AS(stratified_split(std::vector<int>{0, 0, 1}, 0.5, 1), StratificationError);
    REQUIRE_THROWS_AS(stratified_split(tiny, 0.0, 1), InputError);
}

TEST_CASE("stratified split is disjoint and exhaustive across seeds") {
    std::vector<int> labels;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) labels.push_back(int(rng.uniform_int(0, 2)));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto [train, test] = stratified_split(labels, 0.10, seed);
        std::set<std::size_t> all(train.begin(), train.end());
        for (const auto i : test) REQUIRE(all.insert(i).second);
        REQUIRE(all.size() == labels.size());
    }
    // determinism per seed
    const auto a = stratified_split(labels, 0.10, 7);
    const auto b = stratified_split(labels, 0.10, 7);
    REQUIRE(a.second == b.second);
}

TEST_CASE("random forest separates clean blobs") {
    // linearly separable with a 2-sigma margin between the cluster edges
    const Dataset ds = blob_dataset(100, 6.0, 11);
    Hyperparams hp;
    hp.n_trees = 60;
    hp.max_depth = 12;
    hp.min_leaf = 1;
    const EnsembleModel m = train_rf(ds, hp, 3);
    REQUIRE(train_accuracy(m, ds) >= 0.99);
}

TEST_CASE("random forest memorizes one sample per class") {
    Dataset ds = blob_dataset(1, 8.0, 2);
    Hyperparams hp;
    hp.n_trees = 101;
    hp.min_leaf = 1;
    hp.mtry = static_cast<int>(kFeatureCount);  // stumps always see the informative pair
    const EnsembleModel m = train_rf(ds, hp, 9);
    for (std::size_t i = 0; i < ds.size(); ++i)
        REQUIRE(predict(m, ds.x[i]).cls == ds.y[i]);
}

TEST_CASE("random forest training is seed-deterministic in serialized bytes") {
    const Dataset ds = blob_dataset(40, 2.0, 21);
    Hyperparams hp;
    hp.n_trees = 20;
    const EnsembleModel a = train_rf(ds, hp, 1234);
    const EnsembleModel b = train_rf(ds, hp, 1234);
    REQUIRE(model_to_string(a) == model_to_string(b));
    const EnsembleModel c = train_rf(ds, hp, 1235);
    REQUIRE(model_to_string(a) != model_to_string(c));
}

TEST_CASE("degenerate training inputs are rejected") {
    Dataset ds = blob_dataset(10, 2.0, 4);
    for (auto& y : ds.y) y = 0;
    Hyperparams hp;
    REQUIRE_THROWS_AS(train_rf(ds, hp, 1), DegenerateTraining);
    REQUIRE_THROWS_AS(train_gb(ds, hp, 1), DegenerateTraining);
}

TEST_CASE("gradient boosting separates clean blobs") {
    const Dataset ds = blob_dataset(100, 2.0, 13);
    Hyperparams hp;
    hp.n_trees = 40;
    hp.max_depth = 3;
    hp.learning_rate = 0.2;
    const EnsembleModel m = train_gb(ds, hp, 5);
    REQUIRE(train_accuracy(m, ds) >= 0.99);
}

TEST_CASE("gradient boosting with zero learning rate predicts the prior") {
    const Dataset ds = blob_dataset(30, 2.0, 17);
    Hyperparams hp;
    hp.n_trees = 10;
    hp.learning_rate = 0.0;
    const EnsembleModel m = train_gb(ds, hp, 5);
    const Prediction p = predict(m, ds.x[0]);
    const Prediction q = predict(m, ds.x[31]);
    REQUIRE(p.scores == q.scores);  // constant prediction
    REQUIRE(p.scores[1] == Catch::Approx(0.5).margin(1e-9));  // balanced prior
}

TEST_CASE("gradient boosting training loss is non-increasing") {
    const Dataset ds = blob_dataset(60, 1.0, 19);
    Hyperparams hp;
    hp.n_trees = 50;
    hp.max_depth = 3;
    hp.learning_rate = 0.1;
    const EnsembleModel m = train_gb(ds, hp, 5);
    REQUIRE(m.train_loss.size() == 50);
    for (std::size_t i = 1; i < m.train_loss.size(); ++i)
        REQUIRE(m.train_loss[i] <= m.train_loss[i - 1] + 1e-9);
}

TEST_CASE("3-class gradient boosting trains one-vs-rest groups") {
    const Dataset ds = blob_dataset(50, 3.0, 23, 3);
    Hyperparams hp;
    hp.n_trees = 30;
    hp.max_depth = 3;
    hp.learning_rate = 0.2;
    const EnsembleModel m = train_gb(ds, hp, 5);
    REQUIRE(m.groups.size() == 3);
    REQUIRE(train_accuracy(m, ds) >= 0.95);
}

TEST_CASE("prediction scores sum to one and tolerate sentinel-laden inputs") {
    const Dataset ds = blob_dataset(60, 2.0, 29, 3);
    Hyperparams hp;
    hp.n_trees = 25;
    const EnsembleModel rf = train_rf(ds, hp, 2);
    const EnsembleModel gb = train_gb(ds, hp, 2);
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        std::array<double, kFeatureCount> x{};
        for (auto& v : x) v = rng.uniform(-50, 50);
        for (const auto* m : {&rf, &gb}) {
            const Prediction p = predict(*m, x);
            double sum = 0.0;
            for (const double s : p.scores) sum += s;
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
        }
    }
    std::array<double, kFeatureCount> sentinel{};
    sentinel.fill(kAbsentSentinel);
    REQUIRE_NOTHROW(predict(rf, sentinel));
    REQUIRE_NOTHROW(predict(gb, sentinel));
}

TEST_CASE("random forest prediction is invariant under tree reordering") {
    const Dataset ds = blob_dataset(50, 1.0, 37);
    Hyperparams hp;
    hp.n_trees = 31;
    EnsembleModel m = train_rf(ds, hp, 8);
    std::vector<Prediction> before;
    for (std::size_t i = 0; i < 20; ++i) before.push_back(predict(m, ds.x[i]));
    std::reverse(m.groups[0].begin(), m.groups[0].end());
    for (std::size_t i = 0; i < 20; ++i) {
        const Prediction after = predict(m, ds.x[i]);
        REQUIRE(after.cls == before[i].cls);
        REQUIRE(after.scores == before[i].scores);
    }
}

TEST_CASE("schema mismatch is rejected at prediction time") {
    const Dataset ds = blob_dataset(20, 2.0, 41);
    Hyperparams hp;
    hp.n_trees = 5;
    EnsembleModel m = train_rf(ds, hp, 1);
    m.schema_version = "fv0";
    std::array<double, kFeatureCount> x{};
    REQUIRE_THROWS_AS(predict(m, x), SchemaError);
}

TEST_CASE("model serialization round-trips bit-exactly") {
    const Dataset ds = blob_dataset(40, 1.5, 43, 3);
    Hyperparams hp;
    hp.n_trees = 12;
    hp.learning_rate = 0.07;
    for (const auto kind : {EnsembleModel::Kind::RF, EnsembleModel::Kind::GB}) {
        const EnsembleModel m = kind == EnsembleModel::Kind::RF ? train_rf(ds, hp, 3)
                                                                : train_gb(ds, hp, 3);
        const std::string text = model_to_string(m);
        std::istringstream in(text);
        const EnsembleModel back = load_model_stream(in, "<mem>");
        REQUIRE(model_to_string(back) == text);
        for (std::size_t i = 0; i < 10; ++i) {
            const Prediction a = predict(m, ds.x[i]);
            const Prediction b = predict(back, ds.x[i]);
            REQUIRE(a.cls == b.cls);
            REQUIRE(a.scores == b.scores);
        }
    }
}

TEST_CASE("hyperparameter search improves with budget and stays prefix-stable") {
    const Dataset ds = blob_dataset(60, 0.8, 47);
    const SearchResult one = hyperparam_search(ds, EnsembleModel::Kind::GB, 1, 99);
    const SearchResult six = hyperparam_search(ds, EnsembleModel::Kind::GB, 6, 99);
    REQUIRE(six.best_objective >= one.best_objective);
    // budget 1 equals training with the single sampled config
    REQUIRE(one.best_index == 0);
    REQUIRE(one.model.validation_f1 == one.best_objective);
    // grid bounds hold
    REQUIRE(six.best_hp.n_trees >= 50);
    REQUIRE(six.best_hp.n_trees <= 500);
    REQUIRE(six.best_hp.max_depth >= 2);
    REQUIRE(six.best_hp.max_depth <= 8);
    REQUIRE(six.best_hp.learning_rate >= 0.01);
    REQUIRE(six.best_hp.learning_rate <= 0.3);
}

TEST_CASE("proportional baseline hits the squared-distribution accuracy") {
    // uniform 3-class: expected accuracy 1/3
    std::vector<int> train_labels;
    for (int c = 0; c < 3; ++c) train_labels.insert(train_labels.end(), 100, c);
    Rng rng(1);
    std::vector<int> truth(3000);
    for (auto& t : truth) t = int(rng.uniform_int(0, 2));
    double acc_sum = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const auto pred = baseline_proportional(train_labels, truth.size(),
                                                static_cast<std::uint64_t>(trial));
        long ok = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) ok += pred[i] == truth[i];
        acc_sum += double(ok) / double(truth.size());
    }
    REQUIRE(acc_sum / trials == Catch::Approx(1.0 / 3.0).margin(0.01));
}
