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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/features.hpp"
#include "ricewatch/metrics.hpp"
#include "ricewatch/rng.hpp"

namespace ricewatch {

// ---------------------------------------------------------------------------
// Dimensional tasks

enum class Task { COMBINED, SOWING, IRRIGATION };

inline const char* task_name(Task t) {
    switch (t) {
        case Task::COMBINED: return "COMBINED";
        case Task::SOWING: return "SOWING";
        case Task::IRRIGATION: return "IRRIGATION";
    }
    return "?";
}

inline Task parse_task(const std::string& s) {
    if (s == "COMBINED" || s == "combined") return Task::COMBINED;
    if (s == "SOWING" || s == "sowing") return Task::SOWING;
    if (s == "IRRIGATION" || s == "irrigation") return Task::IRRIGATION;
    throw InputError("unknown task '" + s + "'");
}

/// Class lists per task; indices are the fixed tie-break order. The positive
/// class (DSR, AWD) keeps its own name; the complements collapse to PTR / CF.
inline std::vector<std::string> task_classes(Task t) {
    switch (t) {
        case Task::COMBINED: return {"CONTROL", "DSR", "AWD"};
        case Task::SOWING: return {"PTR", "DSR"};
        case Task::IRRIGATION: return {"CF", "AWD"};
    }
    return {};
}

/// Task-dependent label collapse: SOWING folds {CONTROL, AWD} into PTR,
/// IRRIGATION folds {CONTROL, DSR} into CF, COMBINED is the identity.
inline int collapse_label(PracticeLabel label, Task task) {
    switch (task) {
        case Task::COMBINED: return static_cast<int>(label);
        case Task::SOWING: return label == PracticeLabel::DSR ? 1 : 0;
        case Task::IRRIGATION: return label == PracticeLabel::AWD ? 1 : 0;
    }
    return 0;
}

/// Labeled design matrix for one task. planting_day is evaluation metadata
/// and never enters the matrix.
struct Dataset {
    Task task = Task::COMBINED;
    std::vector<std::string> class_names;
    std::vector<std::array<double, kFeatureCount>> x;
    std::vector<int> y;         // collapsed task labels
    std::vector<int> original;  // PracticeLabel values, for error-by-origin
    std::vector<std::string> plot_ids;
    std::vector<std::optional<int>> planting_day;

    std::size_t size() const { return x.size(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    Dataset subset(std::span<const std::size_t> idx) const {
        Dataset out;
        out.task = task;
        out.class_names = class_names;
        out.x.reserve(idx.size());
        for (const auto i : idx) {
            out.x.push_back(x[i]);
            out.y.push_back(y[i]);
            out.original.push_back(original[i]);
            out.plot_ids.push_back(plot_ids[i]);
            out.planting_day.push_back(planting_day[i]);
        }
        return out;
    }
};

inline Dataset make_dataset(const FeatureMatrix& m, Task task) {
    Dataset ds;
    ds.task = task;
    ds.class_names = task_classes(task);
    ds.x = m.rows;
    ds.plot_ids = m.plot_ids;
    ds.y.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.labels[i])
            throw InputError(m.plot_ids[i] + ": missing label; training needs labeled rows");
        ds.y.push_back(collapse_label(*m.labels[i], task));
        ds.original.push_back(static_cast<int>(*m.labels[i]));
        ds.planting_day.emplace_back();
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Stratified split

/// Per-class proportional allocation into a test set of total size
/// ceil(n * test_frac); floors first, the remainder goes to the classes with
/// the largest fractional parts (ties: larger class, then lower label).
/// Returns (train_indices, test_indices), each sorted ascending.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double test_frac, std::uint64_t seed) {
    if (!(test_frac > 0.0 && test_frac < 1.0))
        throw InputError("stratified_split: test_frac must lie in (0, 1)");
    int max_label = -1;
    for (const int l : labels) max_label = std::max(max_label, l);
    if (max_label < 0) throw InputError("stratified_split: empty label set");
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < k; ++c)
        if (members[c].size() < 2)
            throw StratificationError("class " + std::to_string(c) +
                                      " has fewer than 2 members");

    const auto target =
        static_cast<std::size_t>(std::ceil(static_cast<double>(labels.size()) * test_frac));
    std::vector<std::size_t> take(k);
    std::vector<std::pair<double, std::size_t>> fractional;  // (-frac, class)
    std::size_t allocated = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(members[c].size()) * test_frac;
        take[c] = static_cast<std::size_t>(std::floor(exact));
        allocated += take[c];
        fractional.emplace_back(exact - std::floor(exact), c);
    }
    std::sort(fractional.begin(), fractional.end(),
              [&members](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  if (members[a.second].size() != members[b.second].size())
                      return members[a.second].size() > members[b.second].size();
                  return a.second < b.second;
              });
    for (std::size_t i = 0; allocated < target && i < fractional.size(); ++i) {
        const std::size_t c = fractional[i].second;
        if (take[c] + 1 < members[c].size()) {  // keep at least one sample in train
            ++take[c];
            ++allocated;
        }
    }

    std::vector<std::size_t> train, test;
    for (std::size_t c = 0; c < k; ++c) {
        auto& m = members[c];
        Rng rng(derive_seed(seed, c));
        for (std::size_t i = m.size(); i > 1; --i)
            std::swap(m[i - 1], m[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
        for (std::size_t i = 0; i < m.size(); ++i)
            (i < take[c] ? test : train).push_back(m[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Decision trees

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> values;  // leaf payload: class shares (RF) or {value} (GB)
};

struct Tree {
    std::vector<TreeNode> nodes;

    const std::vector<double>& leaf_for(std::span<const double> x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].values;
    }
};

struct Hyperparams {
    int n_trees = 300;
    int max_depth = 12;
    int min_leaf = 2;
    double learning_rate = 0.1;  // GB shrinkage
    int mtry = 9;                // RF per-split feature subsample, round(sqrt(76))

    std::string to_string() const {
        return "n_trees=" + std::to_string(n_trees) + " max_depth=" + std::to_string(max_depth) +
               " min_leaf=" + std::to_string(min_leaf) +
               " learning_rate=" + format_double(learning_rate) + " mtry=" + std::to_string(mtry);
    }
};

struct EnsembleModel {
    enum class Kind { RF, GB };
    Kind kind = Kind::RF;
    Task task = Task::COMBINED;
    std::vector<std::string> class_names;
    std::string schema_version = kFeatureSchemaVersion;
    std::size_t n_features = kFeatureCount;
    Hyperparams hp;
    std::uint64_t seed = 0;
    double validation_f1 = -1.0;       // inner-split weighted F1 (ensemble tie-break)
    std::vector<double> base_scores;   // GB: initial log-odds per group
    std::vector<std::vector<Tree>> groups;  // RF: 1 group; GB: 1 (binary) or k (one-vs-rest)
    std::vector<double> train_loss;    // GB: training logloss per boosting round
};

inline const char* kind_name(EnsembleModel::Kind k) {
    return k == EnsembleModel::Kind::RF ? "RF" : "GB";
}

inline EnsembleModel::Kind parse_kind(const std::string& s) {
    if (s == "RF" || s == "rf") return EnsembleModel::Kind::RF;
    if (s == "GB" || s == "gb") return EnsembleModel::Kind::GB;
    throw InputError("unknown model kind '" + s + "'");
}

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // lower is better for gini, higher for sse criterion
};

/// Greedy Gini split over the candidate features, scanned in the given
/// order; strictly better impurity wins, so the scan order fixes ties.
inline SplitChoice best_gini_split(const std::vector<std::array<double, kFeatureCount>>& x,
                                   const std::vector<int>& y,
                                   const std::vector<std::size_t>& idx,
                                   std::span<const int> features, int n_classes,
                                   int min_leaf, double parent_impurity,
                                   std::vector<std::pair<double, int>>& scratch) {
    SplitChoice best;
    best.score = parent_impurity - 1e-12;
    const double n = static_cast<double>(idx.size());
    std::vector<long> left_counts(static_cast<std::size_t>(n_classes));
    std::vector<long> total_counts(static_cast<std::size_t>(n_classes), 0);
    for (const auto i : idx) ++total_counts[static_cast<std::size_t>(y[i])];

    for (const int f : features) {
        scratch.clear();
        for (const auto i : idx)
            scratch.emplace_back(x[i][static_cast<std::size_t>(f)], y[i]);
        std::sort(scratch.begin(), scratch.end());
        std::fill(left_counts.begin(), left_counts.end(), 0);
        long n_left = 0;
        for (std::size_t j = 0; j + 1 < scratch.size(); ++j) {
            ++left_counts[static_cast<std::size_t>(scratch[j].second)];
            ++n_left;
            if (scratch[j].first == scratch[j + 1].first) continue;
            const long n_right = static_cast<long>(scratch.size()) - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            double gl = 1.0, gr = 1.0;
            for (int c = 0; c < n_classes; ++c) {
                const double pl = double(left_counts[static_cast<std::size_t>(c)]) / double(n_left);
                const double pr = double(total_counts[static_cast<std::size_t>(c)] -
                                         left_counts[static_cast<std::size_t>(c)]) /
                                  double(n_right);
                gl -= pl * pl;
                gr -= pr * pr;
            }
            const double impurity = (double(n_left) * gl + double(n_right) * gr) / n;
            if (impurity < best.score) {
                best.found = true;
                best.feature = f;
                best.threshold = scratch[j].first + 0.5 * (scratch[j + 1].first - scratch[j].first);
                best.score = impurity;
            }
        }
    }
    return best;
}

/// Greedy variance-reduction split for regression trees.
inline SplitChoice best_sse_split(const std::vector<std::array<double, kFeatureCount>>& x,
                                  const std::vector<double>& r,
                                  const std::vector<std::size_t>& idx,
                                  std::span<const int> features, int min_leaf,
                                  std::vector<std::pair<double, double>>& scratch) {
    SplitChoice best;
    double total = 0.0;
    for (const auto i : idx) total += r[i];
    best.score = total * total / static_cast<double>(idx.size()) + 1e-12;

    for (const int f : features) {
        scratch.clear();
        for (const auto i : idx)
            scratch.emplace_back(x[i][static_cast<std::size_t>(f)], r[i]);
        std::sort(scratch.begin(), scratch.end());
        double sum_left = 0.0;
        long n_left = 0;
        for (std::size_t j = 0; j + 1 < scratch.size(); ++j) {
            sum_left += scratch[j].second;
            ++n_left;
            if (scratch[j].first == scratch[j + 1].first) continue;
            const long n_right = static_cast<long>(scratch.size()) - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double sum_right = total - sum_left;
            const double score = sum_left * sum_left / double(n_left) +
                                 sum_right * sum_right / double(n_right);
            if (score > best.score) {
                best.found = true;
                best.feature = f;
                best.threshold = scratch[j].first + 0.5 * (scratch[j + 1].first - scratch[j].first);
                best.score = score;
            }
        }
    }
    return best;
}

struct ClassTreeBuilder {
    const std::vector<std::array<double, kFeatureCount>>& x;
    const std::vector<int>& y;
    int n_classes;
    const Hyperparams& hp;
    Rng& rng;
    Tree tree;
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<std::size_t>& idx, int depth) {
        std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
        for (const auto i : idx) ++counts[static_cast<std::size_t>(y[i])];
        double impurity = 1.0;
        bool pure = false;
        for (int c = 0; c < n_classes; ++c) {
            const double p = double(counts[static_cast<std::size_t>(c)]) / double(idx.size());
            impurity -= p * p;
            if (counts[static_cast<std::size_t>(c)] == static_cast<long>(idx.size())) pure = true;
        }
        if (pure || depth >= hp.max_depth ||
            idx.size() < static_cast<std::size_t>(2 * hp.min_leaf)) {
            return make_leaf(counts, idx.size());
        }
        // feature subsample: partial Fisher-Yates over the schema
        std::vector<int> all(kFeatureCount);
        for (std::size_t f = 0; f < kFeatureCount; ++f) all[f] = static_cast<int>(f);
        const int mtry = std::min<int>(hp.mtry, kFeatureCount);
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<std::size_t>(
                rng.uniform_int(i, static_cast<std::int64_t>(kFeatureCount) - 1));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        const SplitChoice split = best_gini_split(
            x, y, idx, std::span<const int>(all.data(), static_cast<std::size_t>(mtry)),
            n_classes, hp.min_leaf, impurity, scratch);
        if (!split.found) return make_leaf(counts, idx.size());

        std::vector<std::size_t> left, right;
        for (const auto i : idx)
            (x[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = l;
        tree.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    int make_leaf(const std::vector<long>& counts, std::size_t n) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        auto& leaf = tree.nodes.back();
        leaf.values.resize(static_cast<std::size_t>(n_classes));
        for (int c = 0; c < n_classes; ++c)
            leaf.values[static_cast<std::size_t>(c)] =
                double(counts[static_cast<std::size_t>(c)]) / double(n);
        return node_id;
    }
};

struct RegressionTreeBuilder {
    const std::vector<std::array<double, kFeatureCount>>& x;
    const std::vector<double>& residual;
    const std::vector<double>& hessian;
    const Hyperparams& hp;
    Tree tree;
    std::vector<std::pair<double, double>> scratch;

    int build(std::vector<std::size_t>& idx, int depth) {
        if (depth >= hp.max_depth ||
            idx.size() < static_cast<std::size_t>(2 * hp.min_leaf)) {
            return make_leaf(idx);
        }
        std::vector<int> all(kFeatureCount);
        for (std::size_t f = 0; f < kFeatureCount; ++f) all[f] = static_cast<int>(f);
        const SplitChoice split =
            best_sse_split(x, residual, idx, all, hp.min_leaf, scratch);
        if (!split.found) return make_leaf(idx);

        std::vector<std::size_t> left, right;
        for (const auto i : idx)
            (x[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = l;
        tree.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    // Newton step per leaf: sum(residual) / sum(hessian), clamped.
    int make_leaf(const std::vector<std::size_t>& idx) {
        double num = 0.0, den = 0.0;
        for (const auto i : idx) {
            num += residual[i];
            den += hessian[i];
        }
        double value = den > 1e-12 ? num / den : 0.0;
        value = std::clamp(value, -4.0, 4.0);
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().values = {value};
        return node_id;
    }
};

inline void check_trainable(const Dataset& ds) {
    if (ds.size() < 2) throw DegenerateTraining("training needs at least 2 samples");
    const int first = ds.y.front();
    bool multi = false;
    for (const int v : ds.y)
        if (v != first) {
            multi = true;
            break;
        }
    if (!multi) throw DegenerateTraining("training set contains a single class");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Random forest

/// Bagged CART trees: Gini impurity, per-split feature subsample of size
/// hp.mtry, bootstrap rows, majority vote at inference. Per-tree seeds
/// derive from (seed, tree index); training is bit-reproducible.
inline EnsembleModel train_rf(const Dataset& ds, const Hyperparams& hp, std::uint64_t seed) {
    detail::check_trainable(ds);
    EnsembleModel model;
    model.kind = EnsembleModel::Kind::RF;
    model.task = ds.task;
    model.class_names = ds.class_names;
    model.hp = hp;
    model.seed = seed;
    model.groups.resize(1);
    model.groups[0].reserve(static_cast<std::size_t>(hp.n_trees));
    const std::size_t n = ds.size();
    for (int t = 0; t < hp.n_trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i)
            bootstrap[i] = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        detail::ClassTreeBuilder builder{ds.x, ds.y, ds.n_classes(), hp, rng, {}, {}};
        builder.build(bootstrap, 0);
        model.groups[0].push_back(std::move(builder.tree));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Gradient boosting

/// Logistic-loss gradient boosting. Binary tasks boost the positive-class
/// log-odds; the 3-class task trains one-vs-rest groups normalized by
/// softmax at prediction. Leaf values are Newton steps scaled by the
/// learning rate at build time.
inline EnsembleModel train_gb(const Dataset& ds, const Hyperparams& hp, std::uint64_t seed) {
    detail::check_trainable(ds);
    EnsembleModel model;
    model.kind = EnsembleModel::Kind::GB;
    model.task = ds.task;
    model.class_names = ds.class_names;
    model.hp = hp;
    model.seed = seed;

    const std::size_t n = ds.size();
    const int k = ds.n_classes();
    const bool binary = k == 2;
    const int n_groups = binary ? 1 : k;
    model.groups.resize(static_cast<std::size_t>(n_groups));
    model.base_scores.resize(static_cast<std::size_t>(n_groups));
    model.train_loss.assign(static_cast<std::size_t>(hp.n_trees), 0.0);

    std::vector<std::vector<double>> margins(static_cast<std::size_t>(n_groups),
                                             std::vector<double>(n));
    std::vector<std::vector<int>> targets(static_cast<std::size_t>(n_groups),
                                          std::vector<int>(n));
    for (int g = 0; g < n_groups; ++g) {
        const int positive = binary ? 1 : g;
        long pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            targets[static_cast<std::size_t>(g)][i] = ds.y[i] == positive ? 1 : 0;
            pos += targets[static_cast<std::size_t>(g)][i];
        }
        const double p = std::clamp(double(pos) / double(n), 1e-9, 1.0 - 1e-9);
        model.base_scores[static_cast<std::size_t>(g)] = std::log(p / (1.0 - p));
        std::fill(margins[static_cast<std::size_t>(g)].begin(),
                  margins[static_cast<std::size_t>(g)].end(),
                  model.base_scores[static_cast<std::size_t>(g)]);
    }

    std::vector<double> residual(n), hessian(n);
    for (int round = 0; round < hp.n_trees; ++round) {
        double loss = 0.0;
        for (int g = 0; g < n_groups; ++g) {
            auto& margin = margins[static_cast<std::size_t>(g)];
            const auto& target = targets[static_cast<std::size_t>(g)];
            for (std::size_t i = 0; i < n; ++i) {
                const double p = 1.0 / (1.0 + std::exp(-margin[i]));
                residual[i] = double(target[i]) - p;
                hessian[i] = p * (1.0 - p);
            }
            detail::RegressionTreeBuilder builder{ds.x, residual, hessian, hp, {}, {}};
            std::vector<std::size_t> idx(n);
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
            builder.build(idx, 0);
            // bake the shrinkage into the stored leaf values
            for (auto& node : builder.tree.nodes)
                if (node.feature < 0) node.values[0] *= hp.learning_rate;
            for (std::size_t i = 0; i < n; ++i)
                margin[i] += builder.tree.leaf_for(ds.x[i])[0];
            model.groups[static_cast<std::size_t>(g)].push_back(std::move(builder.tree));

            for (std::size_t i = 0; i < n; ++i) {
                const double p =
                    std::clamp(1.0 / (1.0 + std::exp(-margin[i])), 1e-12, 1.0 - 1e-12);
                loss -= target[i] ? std::log(p) : std::log(1.0 - p);
            }
        }
        model.train_loss[static_cast<std::size_t>(round)] = loss / double(n);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
    int cls = 0;
    std::vector<double> scores;  // sums to 1; indexed by task class order
};

inline Prediction predict(const EnsembleModel& model, std::span<const double> features) {
    if (model.schema_version != kFeatureSchemaVersion || model.n_features != kFeatureCount ||
        features.size() != model.n_features)
        throw SchemaError("model/feature schema mismatch");
    const std::size_t k = model.class_names.size();
    Prediction out;
    out.scores.assign(k, 0.0);
    if (model.kind == EnsembleModel::Kind::RF) {
        std::vector<long> votes(k, 0);
        for (const auto& tree : model.groups[0]) {
            const auto& leaf = tree.leaf_for(features);
            std::size_t arg = 0;
            for (std::size_t c = 1; c < k; ++c)
                if (leaf[c] > leaf[arg]) arg = c;
            ++votes[arg];
        }
        const long total = static_cast<long>(model.groups[0].size());
        std::size_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
            out.scores[c] = double(votes[c]) / double(total);
            if (votes[c] > votes[arg]) arg = c;
        }
        out.cls = static_cast<int>(arg);
        return out;
    }
    // GB
    if (model.groups.size() == 1) {
        double margin = model.base_scores[0];
        for (const auto& tree : model.groups[0]) margin += tree.leaf_for(features)[0];
        const double p = 1.0 / (1.0 + std::exp(-margin));
        out.scores = {1.0 - p, p};
        out.cls = p > 0.5 ? 1 : 0;
        return out;
    }
    std::vector<double> margin(k);
    for (std::size_t g = 0; g < k; ++g) {
        margin[g] = model.base_scores[g];
        for (const auto& tree : model.groups[g]) margin[g] += tree.leaf_for(features)[0];
    }
    const double m = *std::max_element(margin.begin(), margin.end());
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        out.scores[c] = std::exp(margin[c] - m);
        z += out.scores[c];
    }
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
        out.scores[c] /= z;
        if (out.scores[c] > out.scores[arg]) arg = c;
    }
    out.cls = static_cast<int>(arg);
    return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter search and baseline

struct SearchResult {
    EnsembleModel model;
    Hyperparams best_hp;
    double best_objective = -1.0;  // weighted F1 on the inner validation split
    int best_index = -1;
};

namespace detail {

inline Hyperparams sample_hyperparams(EnsembleModel::Kind kind, Rng& rng) {
    Hyperparams hp;
    if (kind == EnsembleModel::Kind::RF) {
        hp.n_trees = static_cast<int>(rng.uniform_int(100, 800));
        hp.max_depth = static_cast<int>(rng.uniform_int(3, 20));
        hp.min_leaf = static_cast<int>(rng.uniform_int(1, 10));
        hp.mtry = 9;
    } else {
        hp.n_trees = static_cast<int>(rng.uniform_int(50, 500));
        hp.max_depth = static_cast<int>(rng.uniform_int(2, 8));
        hp.learning_rate = std::exp(rng.uniform(std::log(0.01), std::log(0.3)));
        hp.min_leaf = 5;
    }
    return hp;
}

inline EnsembleModel train_kind(const Dataset& ds, EnsembleModel::Kind kind,
                                const Hyperparams& hp, std::uint64_t seed) {
    return kind == EnsembleModel::Kind::RF ? train_rf(ds, hp, seed) : train_gb(ds, hp, seed);
}

inline double weighted_f1_on(const EnsembleModel& model, const Dataset& ds) {
    std::vector<int> pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) pred[i] = predict(model, ds.x[i]).cls;
    return classification_metrics(ds.y, pred, ds.class_names).f1_weighted;
}

}  // namespace detail

/// Seeded random search over the documented grid (RF: trees in [100,800],
/// depth [3,20], min_leaf [1,10]; GB: trees [50,500], depth [2,8], lr
/// log-uniform [0.01,0.3]). Candidate i draws from derive_seed(seed, i+1),
/// so a larger budget extends the same candidate stream. The objective is
/// weighted F1 on an inner 80:20 stratified validation split; the best
/// configuration is refit on the full training set.
inline SearchResult hyperparam_search(const Dataset& train, EnsembleModel::Kind kind,
                                      int budget, std::uint64_t seed) {
    if (budget < 1) throw InputError("hyperparam_search: budget must be >= 1");
    const auto [fit_idx, val_idx] = stratified_split(train.y, 0.2, derive_seed(seed, 0));
    const Dataset fit = train.subset(fit_idx);
    const Dataset val = train.subset(val_idx);

    SearchResult result;
    for (int i = 0; i < budget; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
        const Hyperparams hp = detail::sample_hyperparams(kind, rng);
        const EnsembleModel candidate =
            detail::train_kind(fit, kind, hp, derive_seed(seed, 0x10000 + static_cast<std::uint64_t>(i)));
        const double objective = detail::weighted_f1_on(candidate, val);
        if (objective > result.best_objective) {
            result.best_objective = objective;
            result.best_hp = hp;
            result.best_index = i;
        }
    }
    result.model = detail::train_kind(train, kind, result.best_hp, derive_seed(seed, 0xBE57F17));
    result.model.validation_f1 = result.best_objective;
    return result;
}

/// Proportional baseline: i.i.d. label draws from the training class
/// distribution. Expected accuracy is sum_i p_i * q_i (= sum p_i^2 when the
/// test distribution matches training).
inline std::vector<int> baseline_proportional(std::span<const int> train_labels,
                                              std::size_t n_test, std::uint64_t seed) {
    if (train_labels.empty()) throw InputError("baseline: empty training labels");
    int k = 0;
    for (const int l : train_labels) k = std::max(k, l + 1);
    std::vector<double> cumulative(static_cast<std::size_t>(k), 0.0);
    for (const int l : train_labels) cumulative[static_cast<std::size_t>(l)] += 1.0;
    double acc = 0.0;
    for (auto& c : cumulative) {
        acc += c / static_cast<double>(train_labels.size());
        c = acc;
    }
    Rng rng(seed);
    std::vector<int> out(n_test);
    for (auto& v : out) {
        const double u = rng.uniform01();
        int c = 0;
        while (c + 1 < k && u >= cumulative[static_cast<std::size_t>(c)]) ++c;
        v = c;
    }
    return out;
}

inline std::vector<int> baseline_proportional(std::span<const int> train_labels,
                                              std::span<const int> test_labels,
                                              std::uint64_t seed) {
    return baseline_proportional(train_labels, test_labels.size(), seed);
}

}  // namespace ricewatch
