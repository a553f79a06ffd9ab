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
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/features.hpp"
#include "ricewatch/learn.hpp"
#include "ricewatch/metrics.hpp"
#include "ricewatch/timeseries.hpp"

namespace ricewatch {

struct PlotPrediction {
    std::string plot_id;
    std::string district;
    double area_m2 = 0.0;
    std::string predicted_class;
    double score = 0.0;  // mean ensemble score of the final class
};

struct BatchLedger {
    std::vector<std::pair<std::string, std::string>> errors;    // plot_id -> message
    std::vector<std::pair<std::string, std::string>> warnings;  // plot_id -> message
};

namespace detail {

inline void check_ensemble(const std::vector<EnsembleModel>& models) {
    if (models.empty()) throw InputError("batch_predict: need at least one model");
    for (const auto& m : models) {
        if (m.task != models[0].task || m.class_names != models[0].class_names)
            throw InputError("batch_predict: models disagree on task/classes");
        if (m.schema_version != kFeatureSchemaVersion || m.n_features != kFeatureCount)
            throw SchemaError("batch_predict: model schema mismatch");
    }
}

/// Modal vote across models; ties go to the class predicted by the model
/// with the highest stored validation weighted-F1 (then first model order).
inline std::pair<int, double> ensemble_vote(const std::vector<EnsembleModel>& models,
                                            std::span<const double> features) {
    std::vector<Prediction> preds;
    preds.reserve(models.size());
    for (const auto& m : models) preds.push_back(predict(m, features));

    const std::size_t k = models[0].class_names.size();
    std::vector<int> votes(k, 0);
    for (const auto& p : preds) ++votes[static_cast<std::size_t>(p.cls)];
    const int top = *std::max_element(votes.begin(), votes.end());

    int chosen = -1;
    double best_f1 = -2.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const int cls = preds[i].cls;
        if (votes[static_cast<std::size_t>(cls)] != top) continue;
        if (models[i].validation_f1 > best_f1) {
            best_f1 = models[i].validation_f1;
            chosen = cls;
        }
    }
    double score = 0.0;
    for (const auto& p : preds) score += p.scores[static_cast<std::size_t>(chosen)];
    return {chosen, score / static_cast<double>(preds.size())};
}

}  // namespace detail

/// Streaming batch inference: plots are read chunk by chunk, features are
/// extracted and voted on by a fixed worker pool, and predictions are
/// emitted in input order. Memory is bounded by the chunk size, not the
/// plot count, and the output is identical for any worker count. Per-plot
/// failures land in the ledger; the batch never aborts.
inline void batch_predict(const std::vector<EnsembleModel>& models,
                          const std::string& series_csv, const TemporalWindow& window,
                          int workers,
                          const std::function<void(const PlotPrediction&)>& emit,
                          BatchLedger& ledger) {
    detail::check_ensemble(models);
    window.validate();
    if (workers < 1) throw InputError("batch_predict: workers must be >= 1");

    const std::size_t chunk_size = static_cast<std::size_t>(64 * workers);
    std::vector<PlotSeries> chunk;
    chunk.reserve(chunk_size);

    struct Slot {
        bool ok = false;
        PlotPrediction pred;
        std::string error;
        std::string warning;
    };

    const auto process_chunk = [&]() {
        if (chunk.empty()) return;
        std::vector<Slot> slots(chunk.size());
        const auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                Slot& slot = slots[i];
                const PlotSeries& plot = chunk[i];
                try {
                    if (plot.gap_warning())
                        slot.warning = "acquisition gap exceeds 30 days";
                    const FeatureVector fv = extract_features(plot, window);
                    const auto [cls, score] = detail::ensemble_vote(models, fv.values);
                    slot.pred.plot_id = plot.plot_id;
                    slot.pred.district = plot.district;
                    slot.pred.area_m2 = plot.area_m2;
                    slot.pred.predicted_class =
                        models[0].class_names[static_cast<std::size_t>(cls)];
                    slot.pred.score = score;
                    slot.ok = true;
                } catch (const std::exception& e) {
                    slot.error = e.what();
                }
            }
        };
        if (workers == 1 || chunk.size() == 1) {
            work(0, chunk.size());
        } else {
            std::vector<std::thread> pool;
            const std::size_t stride = (chunk.size() + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const std::size_t begin = static_cast<std::size_t>(w) * stride;
                if (begin >= chunk.size()) break;
                const std::size_t end = std::min(chunk.size(), begin + stride);
                pool.emplace_back(work, begin, end);
            }
            for (auto& t : pool) t.join();
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i].warning.empty())
                ledger.warnings.emplace_back(chunk[i].plot_id, slots[i].warning);
            if (slots[i].ok)
                emit(slots[i].pred);
            else
                ledger.errors.emplace_back(chunk[i].plot_id, slots[i].error);
        }
        chunk.clear();
    };

    for_each_plot_series(series_csv, [&](PlotSeries&& plot) {
        chunk.push_back(std::move(plot));
        if (chunk.size() >= chunk_size) process_chunk();
    });
    process_chunk();
}

// ---------------------------------------------------------------------------
// District aggregation and record comparison

struct DistrictSummary {
    std::string district;
    long n_plots = 0;
    long n_positive = 0;
    double positive_area_m2 = 0.0;
};

/// Per-district counts and positive-class area, sorted by positive area
/// descending (ties by district name).
inline std::vector<DistrictSummary> aggregate_districts(
    std::span<const PlotPrediction> predictions, const std::string& positive_class) {
    std::map<std::string, DistrictSummary> acc;
    for (const auto& p : predictions) {
        if (p.district.empty())
            throw InputError(p.plot_id + ": prediction carries no district");
        auto& d = acc[p.district];
        d.district = p.district;
        ++d.n_plots;
        if (p.predicted_class == positive_class) {
            ++d.n_positive;
            d.positive_area_m2 += p.area_m2;
        }
    }
    std::vector<DistrictSummary> out;
    out.reserve(acc.size());
    for (auto& [name, d] : acc) out.push_back(std::move(d));
    std::sort(out.begin(), out.end(), [](const DistrictSummary& a, const DistrictSummary& b) {
        if (a.positive_area_m2 != b.positive_area_m2)
            return a.positive_area_m2 > b.positive_area_m2;
        return a.district < b.district;
    });
    return out;
}

/// Recorded positive acreage per district (records fixture CSV: district,acres).
using RecordsTable = std::map<std::string, double>;

inline RecordsTable read_records_csv(const std::string& path) {
    CsvReader reader(path);
    const std::size_t c_district = reader.col("district");
    const std::size_t c_acres = reader.col("acres");
    RecordsTable out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (out.count(f[c_district]))
            throw InputError(reader.context() + ": duplicate district '" + f[c_district] + "'");
        out[f[c_district]] = parse_double(f[c_acres], reader.context());
    }
    return out;
}

struct ComparisonPair {
    std::string district;
    double predicted_acres = 0.0;
    double recorded_acres = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonPair> pairs;  // common districts, name order
    double pearson_r = 0.0;
    double rbo_score = 0.0;
    double p = 0.95;
};

/// Pairs predicted acreage against the records over the common districts,
/// then reports Pearson on the paired values and extrapolated RBO (p) on the
/// two acreage-descending district rankings.
inline ComparisonReport compare_records(std::span<const DistrictSummary> summaries,
                                        const RecordsTable& records, double p = 0.95) {
    ComparisonReport rep;
    rep.p = p;
    for (const auto& s : summaries) {
        const auto it = records.find(s.district);
        if (it == records.end()) continue;
        rep.pairs.push_back(
            ComparisonPair{s.district, s.positive_area_m2 / kSquareMetersPerAcre, it->second});
    }
    std::sort(rep.pairs.begin(), rep.pairs.end(),
              [](const ComparisonPair& a, const ComparisonPair& b) {
                  return a.district < b.district;
              });
    if (rep.pairs.size() < 3)
        throw InputError("compare_records: need at least 3 districts in common, got " +
                         std::to_string(rep.pairs.size()));

    std::vector<double> x, y;
    for (const auto& pair : rep.pairs) {
        x.push_back(pair.predicted_acres);
        y.push_back(pair.recorded_acres);
    }
    rep.pearson_r = pearson(x, y);

    const auto ranking = [&](const bool predicted) {
        std::vector<std::string> names;
        for (const auto& pair : rep.pairs) names.push_back(pair.district);
        std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
            const auto value = [&](const std::string& d) {
                for (const auto& pair : rep.pairs)
                    if (pair.district == d)
                        return predicted ? pair.predicted_acres : pair.recorded_acres;
                return 0.0;
            };
            const double va = value(a), vb = value(b);
            if (va != vb) return va > vb;
            return a < b;
        });
        return names;
    };
    rep.rbo_score = rbo(ranking(true), ranking(false), p);
    return rep;
}

}  // namespace ricewatch
