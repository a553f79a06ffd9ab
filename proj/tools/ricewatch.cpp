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

// ricewatch: classify rice water-management practices from per-plot radar
// backscatter time series. Subcommands wire the pipeline stages into
// reproducible, manifest-stamped runs:
//
//   synth      generate a labeled synthetic scene (series CSV + GeoJSON + labels)
//   features   extract the hand-crafted feature matrix for a temporal window
//   train      fit a tree ensemble for one dimensional task
//   evaluate   score a model on a labeled feature matrix
//   ablate     run the temporal-range ablation grid
//   predict    streaming batch inference with a model ensemble
//   aggregate  per-district adoption summary from predictions
//   compare    correlate district summaries against recorded acreage

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricewatch/config.hpp"
#include "ricewatch/eval.hpp"
#include "ricewatch/geojson.hpp"
#include "ricewatch/manifest.hpp"
#include "ricewatch/model_io.hpp"
#include "ricewatch/scale.hpp"
#include "ricewatch/synth.hpp"

namespace rw = ricewatch;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Date handling: ISO YYYY-MM-DD or a plain integer day offset from May 1.

int days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

int parse_day_flag(const std::string& s) {
    if (s.find('-') == std::string::npos) {
        try {
            return static_cast<int>(rw::parse_long(s, "day offset"));
        } catch (const rw::InputError&) {
            throw rw::ConfigError("bad day value '" + s + "' (want YYYY-MM-DD or integer offset)");
        }
    }
    int y = 0, m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw rw::ConfigError("bad date '" + s + "' (want YYYY-MM-DD)");
    const int offset = days_from_civil(y, m, d) - days_from_civil(y, 5, 1);
    if (offset < 0 || offset > rw::kSeasonEndDay)
        throw rw::ConfigError("date '" + s + "' falls outside the May 1 - Dec 15 season");
    return offset;
}

rw::TemporalWindow window_from_flags(const std::string& start, const std::string& end, int step) {
    rw::TemporalWindow w;
    w.start_day = parse_day_flag(start);
    w.end_day = parse_day_flag(end);
    w.step_days = step;
    w.validate();
    return w;
}

rw::RunManifest begin_manifest(const std::string& command, std::uint64_t seed,
                               const std::string& config_hash) {
    rw::RunManifest m;
    m.command = command;
    m.seed = seed;
    m.config_hash = config_hash;
    m.started_at = rw::RunManifest::now_iso8601();
    return m;
}

void finish_manifest(rw::RunManifest& m, const std::string& beside_path) {
    m.finished_at = rw::RunManifest::now_iso8601();
    m.write(beside_path + ".manifest.json");
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;  // <0: take from config
    bool emit_grids = false;
};

int run_synth(const SynthArgs& args) {
    rw::Config cfg;
    std::string config_hash = "defaults";
    if (!args.config_path.empty()) {
        cfg = rw::Config::parse_file(args.config_path);
        config_hash = rw::digest_bytes(cfg.raw_text());
    }
    rw::SceneConfig sc = rw::scene_config_from(cfg);
    if (args.seed >= 0) sc.seed = static_cast<std::uint64_t>(args.seed);

    rw::RunManifest manifest = begin_manifest("synth", sc.seed, config_hash);
    if (!args.config_path.empty()) manifest.add_input(args.config_path);

    const rw::Scene scene = rw::generate_scene(sc);
    const rw::SceneFiles files = rw::write_scene(scene, args.out_dir);
    manifest.add_output(files.series_csv);
    manifest.add_output(files.geojson);
    manifest.add_output(files.labels_csv);

    if (args.emit_grids) {
        if (scene.plots.size() > 512)
            throw rw::ConfigError("--grids is intended for small scenes (<= 512 plots)");
        const fs::path grid_dir = fs::path(args.out_dir) / "grids";
        fs::create_directories(grid_dir);
        rw::CsvWriter gm((fs::path(args.out_dir) / "grids.csv").string());
        gm.raw_line("day,band,path");
        for (const rw::Band band : {rw::Band::VV, rw::Band::VH}) {
            const auto [days, grids] = rw::make_band_grids(scene, band, sc.lattice_spacing_m);
            for (std::size_t i = 0; i < days.size(); ++i) {
                char name[40];
                std::snprintf(name, sizeof(name), "day_%03d_%s.zgrd", days[i],
                              rw::band_name(band));
                rw::write_grid((grid_dir / name).string(), grids[i]);
                gm.row({std::to_string(days[i]), rw::band_name(band),
                        (fs::path("grids") / name).string()});
            }
        }
        gm.close();
        manifest.add_output((fs::path(args.out_dir) / "grids.csv").string());
    }

    finish_manifest(manifest, files.series_csv);
    std::cout << "scene: " << scene.plots.size() << " plots -> " << args.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// features

struct FeaturesArgs {
    std::string series_csv;
    std::string grids_manifest;
    std::string polygons_path;
    std::string labels_csv;
    std::string out_csv;
    std::string start = "0", end = std::to_string(rw::kSeasonEndDay);
    int step = 7;
    int buffer_px = 1;
    double min_area = 2000.0, max_area = 100000.0;
    std::int64_t seed = 42;
};

std::vector<rw::PlotSeries> reduce_from_grids(const FeaturesArgs& args) {
    const fs::path base = fs::path(args.grids_manifest).parent_path();
    rw::CsvReader reader(args.grids_manifest);
    const std::size_t c_day = reader.col("day");
    const std::size_t c_band = reader.col("band");
    const std::size_t c_path = reader.col("path");
    std::map<rw::Band, std::pair<std::vector<int>, std::vector<rw::Grid>>> stacks;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const rw::Band band = rw::parse_band(f[c_band]);
        fs::path p = f[c_path];
        if (p.is_relative()) p = base / p;
        stacks[band].first.push_back(static_cast<int>(rw::parse_long(f[c_day], reader.context())));
        stacks[band].second.push_back(rw::read_grid(p.string()));
    }
    if (!stacks.count(rw::Band::VV) || !stacks.count(rw::Band::VH))
        throw rw::ConfigError("grids manifest must provide VV and VH stacks");

    std::vector<rw::PlotPolygon> polys = rw::read_geojson(args.polygons_path);
    polys = rw::size_filter(polys, args.min_area, args.max_area);

    std::vector<rw::PlotSeries> plots;
    for (const auto& poly : polys) {
        rw::Mask mask = rw::rasterize(poly, stacks[rw::Band::VV].second[0]);
        mask = rw::erode(mask, args.buffer_px);
        if (mask.count() == 0) continue;  // vanished under the negative buffer
        rw::PlotSeries plot;
        plot.plot_id = poly.plot_id;
        plot.district = poly.district;
        plot.area_m2 = poly.area_m2();
        for (const auto& [band, stack] : stacks)
            plot.set_band(band, rw::reduce_plot(mask, stack.second, stack.first));
        plot.check_aligned();
        plots.push_back(std::move(plot));
    }
    return plots;
}

int run_features(const FeaturesArgs& args) {
    const rw::TemporalWindow window = window_from_flags(args.start, args.end, args.step);
    rw::RunManifest manifest =
        begin_manifest("features", static_cast<std::uint64_t>(args.seed), "none");

    std::vector<rw::PlotSeries> plots;
    if (!args.series_csv.empty()) {
        manifest.add_input(args.series_csv);
        plots = rw::read_series_csv(args.series_csv);
    } else {
        manifest.add_input(args.grids_manifest);
        manifest.add_input(args.polygons_path);
        plots = reduce_from_grids(args);
    }
    if (plots.empty()) throw rw::ConfigError("no plots in input");

    std::map<std::string, rw::PlotLabel> labels;
    if (!args.labels_csv.empty()) {
        manifest.add_input(args.labels_csv);
        for (auto& l : rw::read_labels_csv(args.labels_csv)) labels[l.plot_id] = l;
    }

    rw::FeatureMatrix m;
    m.window = window;
    for (const auto& plot : plots) {
        const rw::FeatureVector fv = rw::extract_features(plot, window);
        m.plot_ids.push_back(fv.plot_id);
        const auto it = labels.find(plot.plot_id);
        m.labels.push_back(it != labels.end() ? it->second.label : plot.label);
        m.rows.push_back(fv.values);
    }
    rw::write_feature_csv(args.out_csv, m);
    manifest.add_output(args.out_csv);
    finish_manifest(manifest, args.out_csv);
    std::cout << "features: " << m.size() << " plots x " << rw::kFeatureCount << " -> "
              << args.out_csv << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string features_csv;
    std::string task = "sowing";
    std::string kind = "gb";
    int budget = 8;
    std::int64_t seed = 42;
    double test_frac = 0.10;
    std::string out_model;
};

int run_train(const TrainArgs& args) {
    rw::RunManifest manifest =
        begin_manifest("train", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.features_csv);

    const rw::FeatureMatrix m = rw::read_feature_csv(args.features_csv);
    const rw::Dataset ds = rw::make_dataset(m, rw::parse_task(args.task));
    const auto [train_idx, test_idx] =
        rw::stratified_split(ds.y, args.test_frac, static_cast<std::uint64_t>(args.seed));
    const rw::Dataset train = ds.subset(train_idx);
    const rw::Dataset test = ds.subset(test_idx);

    rw::SearchResult search =
        rw::hyperparam_search(train, rw::parse_kind(args.kind), args.budget,
                              static_cast<std::uint64_t>(args.seed));
    std::vector<int> pred(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        pred[i] = rw::predict(search.model, test.x[i]).cls;
    const rw::MetricsReport rep = rw::classification_metrics(test.y, pred, test.class_names);

    rw::save_model(args.out_model, search.model);
    manifest.add_output(args.out_model);
    manifest.notes.push_back("selected " + search.best_hp.to_string());
    manifest.notes.push_back("candidate_index " + std::to_string(search.best_index));
    finish_manifest(manifest, args.out_model);

    std::cout << "task " << rw::task_name(search.model.task) << " kind " << args.kind
              << " budget " << args.budget << "\n";
    std::cout << "selected: " << search.best_hp.to_string() << " (validation F1 "
              << rw::format_double(search.best_objective) << ")\n";
    std::cout << rw::metrics_text_summary(rep);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string model_path;
    std::string features_csv;
    std::string split = "test";  // test | all
    double test_frac = 0.10;
    std::int64_t seed = 42;
    std::string out_prefix;
};

int run_evaluate(const EvaluateArgs& args) {
    rw::RunManifest manifest =
        begin_manifest("evaluate", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.model_path);
    manifest.add_input(args.features_csv);

    const rw::EnsembleModel model = rw::load_model(args.model_path);
    const rw::FeatureMatrix m = rw::read_feature_csv(args.features_csv);
    rw::Dataset ds = rw::make_dataset(m, model.task);
    if (args.split == "test") {
        const auto [train_idx, test_idx] =
            rw::stratified_split(ds.y, args.test_frac, static_cast<std::uint64_t>(args.seed));
        ds = ds.subset(test_idx);
    } else if (args.split != "all") {
        throw rw::ConfigError("--split must be 'test' or 'all'");
    }

    std::vector<int> pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) pred[i] = rw::predict(model, ds.x[i]).cls;
    const rw::MetricsReport rep = rw::classification_metrics(ds.y, pred, ds.class_names);
    const auto origin_shares = rw::error_by_origin(ds.y, pred, ds.original);

    const auto header = manifest.embedded_header(rw::kFeatureSchemaVersion);
    rw::write_confusion_csv(args.out_prefix + "_confusion.csv", rep, header);
    {
        rw::CsvWriter w(args.out_prefix + "_metrics.csv");
        for (const auto& line : header) w.comment(line);
        w.raw_line("metric,value");
        w.row({"n_test", std::to_string(rep.n_test)});
        w.row({"overall_accuracy", rw::format_double(rep.overall_accuracy)});
        w.row({"f1_weighted", rw::format_double(rep.f1_weighted)});
        w.row({"f1_macro", rw::format_double(rep.f1_macro)});
        for (std::size_t c = 0; c < rep.class_names.size(); ++c) {
            w.row({"f1_" + rep.class_names[c], rw::format_double(rep.per_class[c].f1)});
        }
        w.close();
    }
    {
        rw::CsvWriter w(args.out_prefix + "_error_by_origin.csv");
        for (const auto& line : header) w.comment(line);
        w.raw_line("origin,error_share");
        for (const auto& [origin, share] : origin_shares)
            w.row({rw::label_name(static_cast<rw::PracticeLabel>(origin)),
                   rw::format_double(share)});
        w.close();
    }
    manifest.add_output(args.out_prefix + "_metrics.csv");
    manifest.add_output(args.out_prefix + "_confusion.csv");
    manifest.add_output(args.out_prefix + "_error_by_origin.csv");
    finish_manifest(manifest, args.out_prefix + "_metrics.csv");
    std::cout << rw::metrics_text_summary(rep);
    return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
    std::string series_csv;
    std::string labels_csv;
    std::string preset = "table2";
    int step = 7;
    std::string task = "all";
    std::string kind = "gb";
    int budget = 2;
    std::int64_t seed = 42;
    std::string out_csv;
};

int run_ablate(const AblateArgs& args) {
    if (args.preset != "table2")
        throw rw::ConfigError("unknown preset '" + args.preset + "' (available: table2)");
    rw::RunManifest manifest =
        begin_manifest("ablate", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.series_csv);

    std::vector<rw::PlotSeries> plots = rw::read_series_csv(args.series_csv);
    if (plots.empty()) throw rw::ConfigError("no plots in input");
    if (!args.labels_csv.empty()) {
        manifest.add_input(args.labels_csv);
        std::map<std::string, rw::PlotLabel> labels;
        for (auto& l : rw::read_labels_csv(args.labels_csv)) labels[l.plot_id] = l;
        for (auto& p : plots) {
            const auto it = labels.find(p.plot_id);
            if (it != labels.end()) {
                p.label = it->second.label;
                p.planting_day = it->second.planting_day;
            }
        }
    }

    std::vector<rw::Task> tasks;
    if (args.task == "all")
        tasks = {rw::Task::COMBINED, rw::Task::SOWING, rw::Task::IRRIGATION};
    else
        tasks = {rw::parse_task(args.task)};

    const rw::AblationGrid grid =
        rw::run_ablation(plots, rw::table2_windows(args.step), tasks,
                         rw::parse_kind(args.kind), args.budget,
                         static_cast<std::uint64_t>(args.seed));
    rw::write_ablation_csv(args.out_csv, grid,
                           manifest.embedded_header(rw::kFeatureSchemaVersion));
    manifest.add_output(args.out_csv);
    finish_manifest(manifest, args.out_csv);
    std::cout << "ablation grid: " << grid.size() << " cells -> " << args.out_csv << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict / aggregate / compare

struct PredictArgs {
    std::string series_csv;
    std::vector<std::string> model_paths;
    std::string start = "0", end = std::to_string(rw::kSeasonEndDay);
    int step = 7;
    int workers = 1;
    std::int64_t seed = 42;
    std::string out_csv;
};

int run_predict(const PredictArgs& args) {
    rw::RunManifest manifest =
        begin_manifest("predict", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.series_csv);
    std::vector<rw::EnsembleModel> models;
    for (const auto& p : args.model_paths) {
        manifest.add_input(p);
        models.push_back(rw::load_model(p));
    }
    const rw::TemporalWindow window = window_from_flags(args.start, args.end, args.step);

    rw::CsvWriter w(args.out_csv);
    w.raw_line("plot_id,district,area_m2,predicted_class,score");
    rw::BatchLedger ledger;
    long n = 0;
    rw::batch_predict(models, args.series_csv, window, args.workers,
                      [&w, &n](const rw::PlotPrediction& p) {
                          w.row({p.plot_id, p.district, rw::format_double(p.area_m2),
                                 p.predicted_class, rw::format_double(p.score)});
                          ++n;
                      },
                      ledger);
    w.close();
    manifest.add_output(args.out_csv);

    if (!ledger.errors.empty()) {
        rw::CsvWriter ew(args.out_csv + ".errors.csv");
        ew.raw_line("plot_id,error");
        for (const auto& [id, msg] : ledger.errors) ew.row({id, msg});
        ew.close();
        manifest.notes.push_back(std::to_string(ledger.errors.size()) + " plots failed");
    }
    if (!ledger.warnings.empty())
        manifest.notes.push_back(std::to_string(ledger.warnings.size()) + " gap warnings");
    finish_manifest(manifest, args.out_csv);
    std::cout << "predictions: " << n << " plots, " << ledger.errors.size() << " errors -> "
              << args.out_csv << "\n";
    return 0;
}

struct AggregateArgs {
    std::string predictions_csv;
    std::string positive = "DSR";
    std::int64_t seed = 42;
    std::string out_csv;
};

int run_aggregate(const AggregateArgs& args) {
    rw::RunManifest manifest =
        begin_manifest("aggregate", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.predictions_csv);

    rw::CsvReader reader(args.predictions_csv);
    const std::size_t c_plot = reader.col("plot_id");
    const std::size_t c_district = reader.col("district");
    const std::size_t c_area = reader.col("area_m2");
    const std::size_t c_class = reader.col("predicted_class");
    const std::size_t c_score = reader.col("score");
    std::vector<rw::PlotPrediction> preds;
    std::vector<std::string> f;
    while (reader.next(f)) {
        rw::PlotPrediction p;
        p.plot_id = f[c_plot];
        p.district = f[c_district];
        p.area_m2 = rw::parse_double(f[c_area], reader.context());
        p.predicted_class = f[c_class];
        p.score = rw::parse_double(f[c_score], reader.context());
        preds.push_back(std::move(p));
    }
    const auto summaries = rw::aggregate_districts(preds, args.positive);

    rw::CsvWriter w(args.out_csv);
    w.raw_line("district,n_plots,n_positive,positive_area_m2,positive_acres");
    for (const auto& d : summaries) {
        w.row({d.district, std::to_string(d.n_plots), std::to_string(d.n_positive),
               rw::format_double(d.positive_area_m2),
               rw::format_double(d.positive_area_m2 / rw::kSquareMetersPerAcre)});
    }
    w.close();
    manifest.add_output(args.out_csv);
    finish_manifest(manifest, args.out_csv);
    std::cout << "districts: " << summaries.size() << " -> " << args.out_csv << "\n";
    return 0;
}

struct CompareArgs {
    std::string districts_csv;
    std::string records_csv;
    double p = 0.95;
    std::int64_t seed = 42;
    std::string out_csv;
};

int run_compare(const CompareArgs& args) {
    rw::RunManifest manifest =
        begin_manifest("compare", static_cast<std::uint64_t>(args.seed), "none");
    manifest.add_input(args.districts_csv);
    manifest.add_input(args.records_csv);

    std::vector<rw::DistrictSummary> summaries;
    {
        rw::CsvReader reader(args.districts_csv);
        const std::size_t c_district = reader.col("district");
        const std::size_t c_plots = reader.col("n_plots");
        const std::size_t c_pos = reader.col("n_positive");
        const std::size_t c_area = reader.col("positive_area_m2");
        std::vector<std::string> f;
        while (reader.next(f)) {
            rw::DistrictSummary d;
            d.district = f[c_district];
            d.n_plots = rw::parse_long(f[c_plots], reader.context());
            d.n_positive = rw::parse_long(f[c_pos], reader.context());
            d.positive_area_m2 = rw::parse_double(f[c_area], reader.context());
            summaries.push_back(std::move(d));
        }
    }
    const rw::RecordsTable records = rw::read_records_csv(args.records_csv);
    const rw::ComparisonReport rep = rw::compare_records(summaries, records, args.p);

    const auto header = manifest.embedded_header(rw::kFeatureSchemaVersion);
    {
        rw::CsvWriter w(args.out_csv);
        for (const auto& line : header) w.comment(line);
        w.raw_line("metric,value");
        w.row({"n_common_districts", std::to_string(rep.pairs.size())});
        w.row({"pearson", rw::format_double(rep.pearson_r)});
        w.row({"rbo", rw::format_double(rep.rbo_score)});
        w.row({"rbo_p", rw::format_double(rep.p)});
        w.close();
    }
    const std::string stem =
        (fs::path(args.out_csv).parent_path() / fs::path(args.out_csv).stem()).string();
    {
        rw::CsvWriter w(stem + "_pairs.csv");
        for (const auto& line : header) w.comment(line);
        w.raw_line("district,predicted_acres,recorded_acres");
        for (const auto& pr : rep.pairs)
            w.row({pr.district, rw::format_double(pr.predicted_acres),
                   rw::format_double(pr.recorded_acres)});
        w.close();
    }
    {
        rw::CsvWriter w(stem + "_scatter.csv");
        w.raw_line("recorded_acres,predicted_acres");
        for (const auto& pr : rep.pairs)
            w.row({rw::format_double(pr.recorded_acres), rw::format_double(pr.predicted_acres)});
        w.close();
    }
    manifest.add_output(args.out_csv);
    manifest.add_output(stem + "_pairs.csv");
    manifest.add_output(stem + "_scatter.csv");
    finish_manifest(manifest, args.out_csv);
    std::cout << "pearson " << rw::format_double(rep.pearson_r) << " rbo "
              << rw::format_double(rep.rbo_score) << " over " << rep.pairs.size()
              << " districts\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rice water-management practice classification toolkit"};
    app.set_version_flag("--version", rw::kToolVersion);
    app.require_subcommand(1);
    app.footer("Dates: YYYY-MM-DD or integer day offsets from May 1. "
               "File formats are documented in README.md.");

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "generate a labeled synthetic scene");
    cmd_synth->add_option("--config", synth.config_path, "scene config (INI); defaults when omitted")
        ->check(CLI::ExistingFile);
    cmd_synth->add_option("--out", synth.out_dir, "output directory")->required();
    cmd_synth->add_option("--seed", synth.seed, "master seed (overrides config)");
    cmd_synth->add_flag("--grids", synth.emit_grids, "also write per-timestep grids (small scenes)");

    FeaturesArgs feat;
    auto* cmd_features = app.add_subcommand("features", "extract the hand-crafted feature matrix");
    cmd_features->add_option("--series", feat.series_csv, "ingestion series CSV");
    cmd_features->add_option("--grids", feat.grids_manifest, "grids manifest CSV (day,band,path)");
    cmd_features->add_option("--polygons", feat.polygons_path, "plot polygons GeoJSON");
    cmd_features->add_option("--labels", feat.labels_csv, "labels sidecar CSV");
    cmd_features->add_option("--start", feat.start, "window start (YYYY-MM-DD or day offset)");
    cmd_features->add_option("--end", feat.end, "window end (YYYY-MM-DD or day offset)");
    cmd_features->add_option("--step", feat.step, "sampling step in days (4, 7 or 10)");
    cmd_features->add_option("--buffer-px", feat.buffer_px, "negative buffer in pixels (grid mode)");
    cmd_features->add_option("--min-area", feat.min_area, "size filter lower bound, m^2");
    cmd_features->add_option("--max-area", feat.max_area, "size filter upper bound, m^2");
    cmd_features->add_option("--out", feat.out_csv, "output feature CSV")->required();

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "fit a tree ensemble for one task");
    cmd_train->add_option("--features", train.features_csv, "labeled feature CSV")->required();
    cmd_train->add_option("--task", train.task, "combined | sowing | irrigation");
    cmd_train->add_option("--kind", train.kind, "rf | gb");
    cmd_train->add_option("--budget", train.budget, "random-search budget");
    cmd_train->add_option("--seed", train.seed, "master seed");
    cmd_train->add_option("--test-frac", train.test_frac, "held-out fraction");
    cmd_train->add_option("--out", train.out_model, "output model file")->required();

    EvaluateArgs eval;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "score a model on labeled features");
    cmd_evaluate->add_option("--model", eval.model_path, "model file")->required();
    cmd_evaluate->add_option("--features", eval.features_csv, "labeled feature CSV")->required();
    cmd_evaluate->add_option("--split", eval.split, "test | all");
    cmd_evaluate->add_option("--test-frac", eval.test_frac, "held-out fraction");
    cmd_evaluate->add_option("--seed", eval.seed, "split seed (must match training)");
    cmd_evaluate->add_option("--out", eval.out_prefix, "output path prefix")->required();

    AblateArgs ablate;
    auto* cmd_ablate = app.add_subcommand("ablate", "temporal-range ablation grid");
    cmd_ablate->add_option("--series", ablate.series_csv, "ingestion series CSV")->required();
    cmd_ablate->add_option("--labels", ablate.labels_csv, "labels sidecar CSV");
    cmd_ablate->add_option("--preset", ablate.preset, "window preset (table2)");
    cmd_ablate->add_option("--step", ablate.step, "sampling step for the preset windows");
    cmd_ablate->add_option("--task", ablate.task, "all | combined | sowing | irrigation");
    cmd_ablate->add_option("--kind", ablate.kind, "rf | gb");
    cmd_ablate->add_option("--budget", ablate.budget, "search budget per cell");
    cmd_ablate->add_option("--seed", ablate.seed, "master seed");
    cmd_ablate->add_option("--out", ablate.out_csv, "output grid CSV")->required();

    PredictArgs predict;
    auto* cmd_predict = app.add_subcommand("predict", "streaming batch inference");
    cmd_predict->add_option("--series", predict.series_csv, "ingestion series CSV")->required();
    cmd_predict->add_option("--model", predict.model_paths, "model file (repeatable)")
        ->required()
        ->expected(-1);
    cmd_predict->add_option("--start", predict.start, "window start");
    cmd_predict->add_option("--end", predict.end, "window end");
    cmd_predict->add_option("--step", predict.step, "sampling step in days");
    cmd_predict->add_option("--workers", predict.workers, "worker pool size");
    cmd_predict->add_option("--seed", predict.seed, "manifest seed");
    cmd_predict->add_option("--out", predict.out_csv, "output predictions CSV")->required();

    AggregateArgs aggregate;
    auto* cmd_aggregate = app.add_subcommand("aggregate", "district adoption summary");
    cmd_aggregate->add_option("--predictions", aggregate.predictions_csv, "predictions CSV")
        ->required();
    cmd_aggregate->add_option("--positive", aggregate.positive, "positive class name");
    cmd_aggregate->add_option("--seed", aggregate.seed, "manifest seed");
    cmd_aggregate->add_option("--out", aggregate.out_csv, "output district CSV")->required();

    CompareArgs compare;
    auto* cmd_compare = app.add_subcommand("compare", "correlate against recorded acreage");
    cmd_compare->add_option("--districts", compare.districts_csv, "district summary CSV")
        ->required();
    cmd_compare->add_option("--records", compare.records_csv, "records CSV (district,acres)")
        ->required();
    cmd_compare->add_option("--p", compare.p, "RBO top-weightedness parameter");
    cmd_compare->add_option("--seed", compare.seed, "manifest seed");
    cmd_compare->add_option("--out", compare.out_csv, "output report CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors (including --help) follow the documented exit codes
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_features->parsed()) {
            if (feat.series_csv.empty() && (feat.grids_manifest.empty() || feat.polygons_path.empty()))
                throw rw::ConfigError("features: need --series, or --grids with --polygons");
            return run_features(feat);
        }
        if (cmd_train->parsed()) return run_train(train);
        if (cmd_evaluate->parsed()) return run_evaluate(eval);
        if (cmd_ablate->parsed()) return run_ablate(ablate);
        if (cmd_predict->parsed()) return run_predict(predict);
        if (cmd_aggregate->parsed()) return run_aggregate(aggregate);
        if (cmd_compare->parsed()) return run_compare(compare);
    } catch (const rw::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
