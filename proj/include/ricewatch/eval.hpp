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

#include <sstream>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/features.hpp"
#include "ricewatch/learn.hpp"
#include "ricewatch/metrics.hpp"
#include "ricewatch/model_io.hpp"

namespace ricewatch {

// ---------------------------------------------------------------------------
// Day-offset <-> calendar helpers (season runs May 1 .. Dec 15)

inline std::string day_offset_to_date(int offset) {
    static const char* months[] = {"May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    static const int lengths[] = {31, 30, 31, 31, 30, 31, 30, 31};
    int rem = offset;
    for (int m = 0; m < 8; ++m) {
        if (rem < lengths[m]) return std::string(months[m]) + " " + std::to_string(rem + 1);
        rem -= lengths[m];
    }
    return "day+" + std::to_string(offset);
}

// ---------------------------------------------------------------------------
// Temporal-range ablation harness

struct AblationCell {
    int row = 0;  // 1-based, mirrors the preset ordering
    TemporalWindow window;
    Task task = Task::COMBINED;
    Hyperparams hp;
    MetricsReport metrics;
};

using AblationGrid = std::vector<AblationCell>;

/// The twelve temporal ranges of the built-in ablation preset, nominal
/// 7-day sampling.
inline std::vector<TemporalWindow> table2_windows(int step_days = 7) {
    const std::pair<int, int> spans[12] = {
        {0, 106},    // May 1 - Aug 15
        {31, 121},   // Jun 1 - Aug 30
        {31, 137},   // Jun 1 - Sep 15
        {31, 167},   // Jun 1 - Oct 15
        {61, 167},   // Jul 1 - Oct 15
        {92, 167},   // Aug 1 - Oct 15
        {92, 198},   // Aug 1 - Nov 15
        {123, 228},  // Sep 1 - Dec 15
        {153, 228},  // Oct 1 - Dec 15
        {92, 228},   // Aug 1 - Dec 15
        {31, 228},   // Jun 1 - Dec 15
        {0, 228},    // May 1 - Dec 15
    };
    std::vector<TemporalWindow> out;
    for (const auto& [s, e] : spans) out.push_back(TemporalWindow{s, e, step_days});
    return out;
}

/// For each (window, task): re-extract features from the raw plot series,
/// run the seeded hyperparameter search on the shared training plots, and
/// evaluate on the shared stratified test split. The split is drawn once on
/// the 3-way labels, so every cell sees the same held-out plots.
inline AblationGrid run_ablation(const std::vector<PlotSeries>& plots,
                                 const std::vector<TemporalWindow>& windows,
                                 const std::vector<Task>& tasks, EnsembleModel::Kind kind,
                                 int budget, std::uint64_t seed, double test_frac = 0.10) {
    if (plots.empty()) throw InputError("run_ablation: no plots");
    std::vector<int> original;
    original.reserve(plots.size());
    for (const auto& p : plots) {
        if (!p.label) throw InputError(p.plot_id + ": ablation needs labeled plots");
        original.push_back(static_cast<int>(*p.label));
    }
    const auto [train_idx, test_idx] = stratified_split(original, test_frac, seed);

    AblationGrid grid;
    int row = 0;
    for (const auto& window : windows) {
        ++row;
        FeatureMatrix m;
        m.window = window;
        for (const auto& p : plots) {
            const FeatureVector fv = extract_features(p, window);
            m.plot_ids.push_back(fv.plot_id);
            m.labels.push_back(p.label);
            m.rows.push_back(fv.values);
        }
        for (const Task task : tasks) {
            const Dataset ds = make_dataset(m, task);
            const Dataset train = ds.subset(train_idx);
            const Dataset test = ds.subset(test_idx);
            SearchResult search = hyperparam_search(train, kind, budget,
                                                    derive_seed(seed, static_cast<std::uint64_t>(row)));
            std::vector<int> pred(test.size());
            for (std::size_t i = 0; i < test.size(); ++i)
                pred[i] = predict(search.model, test.x[i]).cls;
            AblationCell cell;
            cell.row = row;
            cell.window = window;
            cell.task = task;
            cell.hp = search.best_hp;
            cell.metrics = classification_metrics(test.y, pred, test.class_names);
            grid.push_back(std::move(cell));
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Report writers

inline void write_ablation_csv(const std::string& path, const AblationGrid& grid,
                               const std::vector<std::string>& manifest_header) {
    CsvWriter w(path);
    for (const auto& line : manifest_header) w.comment(line);
    w.raw_line("row,dates,window_start,window_end,step_days,task,n_test,accuracy,f1_weighted,f1_macro");
    for (const auto& cell : grid) {
        w.row({std::to_string(cell.row),
               day_offset_to_date(cell.window.start_day) + " - " +
                   day_offset_to_date(cell.window.end_day),
               std::to_string(cell.window.start_day), std::to_string(cell.window.end_day),
               std::to_string(cell.window.step_days), task_name(cell.task),
               std::to_string(cell.metrics.n_test), format_double(cell.metrics.overall_accuracy),
               format_double(cell.metrics.f1_weighted), format_double(cell.metrics.f1_macro)});
    }
    w.close();
}

inline void write_confusion_csv(const std::string& path, const MetricsReport& rep,
                                const std::vector<std::string>& manifest_header) {
    CsvWriter w(path);
    for (const auto& line : manifest_header) w.comment(line);
    std::string header = "true\\pred";
    for (const auto& c : rep.class_names) header += "," + c;
    w.raw_line(header);
    for (std::size_t t = 0; t < rep.class_names.size(); ++t) {
        std::vector<std::string> f{rep.class_names[t]};
        for (std::size_t p = 0; p < rep.class_names.size(); ++p)
            f.push_back(std::to_string(rep.confusion_at(t, p)));
        w.row(f);
    }
    w.close();
}

inline std::string metrics_text_summary(const MetricsReport& rep) {
    std::ostringstream ss;
    ss << "n_test            " << rep.n_test << "\n";
    ss << "overall_accuracy  " << format_double(rep.overall_accuracy) << "\n";
    ss << "f1_weighted       " << format_double(rep.f1_weighted) << "\n";
    ss << "f1_macro          " << format_double(rep.f1_macro) << "\n";
    for (std::size_t c = 0; c < rep.class_names.size(); ++c) {
        const auto& m = rep.per_class[c];
        ss << "class " << rep.class_names[c] << "  precision " << format_double(m.precision)
           << "  recall " << format_double(m.recall) << "  f1 " << format_double(m.f1)
           << "  support " << m.support << "\n";
    }
    return ss.str();
}

}  // namespace ricewatch
