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

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"

namespace ricewatch {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct MetricsReport {
    double overall_accuracy = 0.0;
    double f1_weighted = 0.0;
    double f1_macro = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<long> confusion;  // row-major [true][pred]
    long n_test = 0;
    std::vector<std::string> class_names;

    long confusion_at(std::size_t t, std::size_t p) const {
        return confusion[t * per_class.size() + p];
    }
};

/// Accuracy, per-class precision/recall/F1 and macro / support-weighted F1.
/// Zero-denominator ratios are defined as 0.
inline MetricsReport classification_metrics(std::span<const int> y_true,
                                            std::span<const int> y_pred,
                                            std::vector<std::string> class_names) {
    if (y_true.size() != y_pred.size())
        throw InputError("classification_metrics: length mismatch");
    if (y_true.empty()) throw InputError("classification_metrics: empty input");
    const std::size_t k = class_names.size();
    MetricsReport rep;
    rep.class_names = std::move(class_names);
    rep.n_test = static_cast<long>(y_true.size());
    rep.confusion.assign(k * k, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k)
            throw InputError("classification_metrics: label out of range");
        ++rep.confusion[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
    }
    long correct = 0;
    rep.per_class.assign(k, ClassMetrics{});
    double f1_sum = 0.0, f1_weighted_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        long tp = rep.confusion[c * k + c];
        long fn = 0, fp = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != c) {
                fn += rep.confusion[c * k + j];
                fp += rep.confusion[j * k + c];
            }
        }
        correct += tp;
        ClassMetrics& m = rep.per_class[c];
        m.support = tp + fn;
        m.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
        m.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        f1_sum += m.f1;
        f1_weighted_sum += m.f1 * double(m.support);
    }
    rep.overall_accuracy = double(correct) / double(rep.n_test);
    rep.f1_macro = f1_sum / double(k);
    rep.f1_weighted = f1_weighted_sum / double(rep.n_test);
    return rep;
}

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    if (x.size() < 2) throw InputError("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    if (vx == 0.0 || vy == 0.0)
        throw UndefinedCorrelation("pearson: zero variance input");
    return cov / std::sqrt(vx * vy);
}

/// Extrapolated rank-biased overlap for equal-length, duplicate-free
/// rankings: prefix agreements A_d weighted by (1-p) p^(d-1), extrapolated
/// with the final agreement A_l p^l. Evaluated by a tail-first Horner
/// recurrence, so fully agreeing rankings come out as exactly 1.
template <typename T>
inline double rbo(std::span<const T> ranking_a, std::span<const T> ranking_b, double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("rbo: p must lie in (0, 1)");
    if (ranking_a.size() != ranking_b.size())
        throw InputError("rbo: rankings must have equal length");
    if (ranking_a.empty()) throw InputError("rbo: empty rankings");
    {
        std::set<T> sa(ranking_a.begin(), ranking_a.end());
        std::set<T> sb(ranking_b.begin(), ranking_b.end());
        if (sa.size() != ranking_a.size() || sb.size() != ranking_b.size())
            throw InputError("rbo: rankings must be duplicate-free");
    }
    const std::size_t l = ranking_a.size();
    // overlap X_d via a single "seen once" set
    std::vector<double> agreement(l);
    std::set<T> seen;
    long overlap = 0;
    for (std::size_t d = 0; d < l; ++d) {
        const T& ea = ranking_a[d];
        const T& eb = ranking_b[d];
        if (ea == eb) {
            ++overlap;
        } else {
            if (seen.erase(ea))
                ++overlap;
            else
                seen.insert(ea);
            if (seen.erase(eb))
                ++overlap;
            else
                seen.insert(eb);
        }
        agreement[d] = static_cast<double>(overlap) / static_cast<double>(d + 1);
    }
    double acc = agreement[l - 1];  // extrapolation term seed
    for (std::size_t d = l; d >= 1; --d) acc = (1.0 - p) * agreement[d - 1] + p * acc;
    return acc;
}

template <typename T>
inline double rbo(const std::vector<T>& a, const std::vector<T>& b, double p) {
    return rbo(std::span<const T>(a), std::span<const T>(b), p);
}

/// Among misclassified samples, the share attributable to each original
/// (pre-collapse) class. Empty when there are no errors.
inline std::map<int, double> error_by_origin(std::span<const int> y_true,
                                             std::span<const int> y_pred,
                                             std::span<const int> original_labels) {
    if (y_true.size() != y_pred.size() || y_true.size() != original_labels.size())
        throw InputError("error_by_origin: length mismatch");
    std::map<int, long> counts;
    long errors = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != y_pred[i]) {
            ++counts[original_labels[i]];
            ++errors;
        }
    }
    std::map<int, double> shares;
    for (const auto& [origin, c] : counts)
        shares[origin] = static_cast<double>(c) / static_cast<double>(errors);
    return shares;
}

}  // namespace ricewatch
