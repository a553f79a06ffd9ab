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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/config.hpp"
#include "ricewatch/geojson.hpp"
#include "ricewatch/rng.hpp"
#include "ricewatch/timeseries.hpp"
#include "ricewatch/zonal.hpp"

namespace ricewatch {

// The generator reproduces the qualitative practice signatures: transplant
// flooding suppresses VV for the transplanted classes, direct seeding shows a
// short pre-sowing dip with immediate recovery, and AWD superimposes a
// wet/dry modulation that fades as the canopy closes. All numeric defaults
// below are calibration constants; downstream checks depend only on
// orderings, periods and separability, never on the absolute magnitudes.

/// Per-class latent trajectory parameters.
struct PracticeTemplate {
    PracticeLabel practice = PracticeLabel::CONTROL;

    double base_vv_db = -11.0;       // dry-soil VV level (mid-season)
    double vv_trend_db_per_day = 0.03;  // gentle calendar drift, class-independent
    double flood_drop_db = 6.0;      // VV suppression while flooded
    double flood_edge_days = 2.5;    // transplant flood onset sharpness
    double flood_delay_days = 0.0;   // continuous flooding starts this long after
                                     // planting (direct seeding floods late)

    double sowing_dip_drop_db = 7.0;        // pre-sowing irrigation dip depth
    double sowing_dip_duration_days = 8.0;  // DSR pre-sowing irrigation dip width
    double sowing_dip_lead_days = 2.5;      // dip begins this long before sowing
    double sowing_dip_edge_days = 1.0;

    double awd_cycle_min_days = 4.0;  // per-plot cycle, uniform in [min, max]
    double awd_cycle_max_days = 10.0;
    double awd_mod_amp_db = 3.0;      // peak-to-peak wet/dry VV modulation
    double awd_start_after_days = 30.0;
    double awd_duration_days = 80.0;
    bool awd_square = true;           // square wave; sinusoid if false

    double vh_base_db = -22.0;
    double vh_rise_db = 8.0;
    double growth_mid_days = 38.0;    // VH logistic midpoint after planting
    double growth_scale_days = 9.0;
    double canopy_mid_days = 42.0;    // canopy closure masks the water signal
    double canopy_scale_days = 7.0;

    double plot_level_sigma_db = 0.5;  // per-plot radiometric offset (both bands)

    void validate() const {
        if (practice == PracticeLabel::AWD &&
            (awd_cycle_min_days < 4.0 || awd_cycle_max_days > 10.0 ||
             awd_cycle_min_days > awd_cycle_max_days))
            throw ConfigError("awd_cycle_days range must lie within [4, 10]");
        if (sowing_dip_duration_days <= 0.0)
            throw ConfigError("sowing_dip_duration_days must be positive");
    }
};

/// Trimodal planting-date model: DSR first, then control, then AWD, with a
/// hard cap on the overall span.
struct PlantingModel {
    double dsr_mean = 40.0, dsr_sd = 13.0;
    double control_mean = 52.0, control_sd = 11.0;
    double awd_mean = 68.0, awd_sd = 10.0;
    double span_lo = 0.0;
    double span_hi = 110.0;
    bool align = false;      // lag knob: force one planting day for all classes
    double align_day = 45.0;

    void validate() const {
        if (!(dsr_mean < control_mean && control_mean < awd_mean))
            throw ConfigError("planting means must satisfy DSR < CONTROL < AWD");
        if (!(span_hi - span_lo <= 110.0))
            throw ConfigError("planting span cap is 110 days");
        if (span_lo < 0.0) throw ConfigError("planting span must start at day >= 0");
    }

    double mean_for(PracticeLabel l) const {
        switch (l) {
            case PracticeLabel::DSR: return dsr_mean;
            case PracticeLabel::CONTROL: return control_mean;
            case PracticeLabel::AWD: return awd_mean;
        }
        return control_mean;
    }
    double sd_for(PracticeLabel l) const {
        switch (l) {
            case PracticeLabel::DSR: return dsr_sd;
            case PracticeLabel::CONTROL: return control_sd;
            case PracticeLabel::AWD: return awd_sd;
        }
        return control_sd;
    }
};

/// Truncated-normal planting draw, clamped to the span cap.
inline int sample_planting(const PlantingModel& model, PracticeLabel practice, Rng& rng) {
    if (model.align) return static_cast<int>(std::lround(model.align_day));
    const double d = rng.truncated_normal(model.mean_for(practice), model.sd_for(practice),
                                          model.span_lo, model.span_hi);
    return static_cast<int>(std::lround(d));
}

inline int sample_planting(const PlantingModel& model, PracticeLabel practice,
                           std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return sample_planting(model, practice, rng);
}

/// Acquisition calendar: regular revisit with optionally dropped passes.
struct RevisitSchedule {
    int start_day = 0;
    int end_day = kSeasonEndDay;
    int period_days = 12;
    std::set<int> dropped;  // acquisition indices lost to outages

    std::vector<int> days() const {
        if (period_days < 1) throw ConfigError("revisit period must be >= 1 day");
        std::vector<int> out;
        int idx = 0;
        for (int t = start_day; t <= end_day; t += period_days, ++idx)
            if (!dropped.count(idx)) out.push_back(t);
        return out;
    }
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct PlotDraw {
    double level_offset = 0.0;
    double awd_cycle_days = 7.0;
    double awd_phase = 0.0;  // cycle fraction in [0, 1)
};

inline double latent_vv(const PracticeTemplate& tp, const PlotDraw& d, double plant,
                        double t) {
    const double base = tp.base_vv_db + tp.vv_trend_db_per_day * (t - 114.0);
    const double canopy = logistic((t - plant - tp.canopy_mid_days) / tp.canopy_scale_days);
    double water = 0.0;
    if (tp.practice == PracticeLabel::DSR) {
        // pre-sowing irrigation: short dip, immediate recovery; continuous
        // flooding only begins once the crop is established
        const double on = logistic((t - (plant - tp.sowing_dip_lead_days)) / tp.sowing_dip_edge_days);
        const double off = logistic((plant - tp.sowing_dip_lead_days +
                                     tp.sowing_dip_duration_days - t) /
                                    tp.sowing_dip_edge_days);
        water = -tp.sowing_dip_drop_db * on * off;
        water -= tp.flood_drop_db *
                 logistic((t - (plant + tp.flood_delay_days)) / tp.flood_edge_days);
    } else {
        // transplant flooding, sustained; the canopy gradually masks it
        water = -tp.flood_drop_db *
                logistic((t - (plant + tp.flood_delay_days)) / tp.flood_edge_days);
        if (tp.practice == PracticeLabel::AWD) {
            const double t0 = plant + tp.awd_start_after_days;
            if (t >= t0 && t <= t0 + tp.awd_duration_days) {
                const double cycles = (t - t0) / d.awd_cycle_days + d.awd_phase;
                const double frac = cycles - std::floor(cycles);
                const double wave = tp.awd_square ? (frac < 0.5 ? 1.0 : -1.0)
                                                  : std::sin(2.0 * 3.14159265358979323846 * frac);
                water += 0.5 * tp.awd_mod_amp_db * wave;
            }
        }
    }
    return base + water * (1.0 - canopy) + d.level_offset;
}

inline double latent_vh(const PracticeTemplate& tp, const PlotDraw& d, double plant,
                        double t) {
    return tp.vh_base_db +
           tp.vh_rise_db * logistic((t - plant - tp.growth_mid_days) / tp.growth_scale_days) +
           d.level_offset;
}

}  // namespace detail

/// Samples one plot's VV/VH series from the latent practice trajectory.
/// Values are quantized to float32 so the series path and the gridded path
/// carry identical numbers. Deterministic in (inputs, rng_seed).
inline PlotSeries generate_plot(const PracticeTemplate& tp, int planting_day,
                                const RevisitSchedule& schedule, double speckle_sigma_db,
                                std::uint64_t rng_seed) {
    tp.validate();
    Rng rng(rng_seed);
    detail::PlotDraw draw;
    draw.level_offset = tp.plot_level_sigma_db > 0.0
                            ? rng.normal(0.0, tp.plot_level_sigma_db)
                            : 0.0;
    // cycle and phase are drawn for every class to keep the stream layout
    // identical across templates sharing a seed
    draw.awd_cycle_days = rng.uniform(tp.awd_cycle_min_days, tp.awd_cycle_max_days);
    draw.awd_phase = rng.uniform01();

    const std::vector<int> days = schedule.days();
    std::vector<Acquisition> vv(days.size()), vh(days.size());
    for (std::size_t i = 0; i < days.size(); ++i) {
        const double t = days[i];
        double v = detail::latent_vv(tp, draw, planting_day, t);
        if (speckle_sigma_db > 0.0) v += rng.normal(0.0, speckle_sigma_db);
        vv[i] = Acquisition{days[i], static_cast<double>(static_cast<float>(v))};
    }
    for (std::size_t i = 0; i < days.size(); ++i) {
        const double t = days[i];
        double v = detail::latent_vh(tp, draw, planting_day, t);
        if (speckle_sigma_db > 0.0) v += rng.normal(0.0, speckle_sigma_db);
        vh[i] = Acquisition{days[i], static_cast<double>(static_cast<float>(v))};
    }

    PlotSeries p;
    p.plot_id = "plot";
    p.set_band(Band::VV, std::move(vv));
    p.set_band(Band::VH, std::move(vh));
    p.label = tp.practice;
    p.planting_day = planting_day;
    return p;
}

// ---------------------------------------------------------------------------
// Scene generation

struct SceneConfig {
    // class counts at the scale of the surveyed corpus
    long n_awd = 452;
    long n_dsr = 420;
    long n_control = 411;
    std::uint64_t seed = 42;
    std::vector<std::string> districts = {
        "Amritsar",   "Barnala",   "Bathinda", "Faridkot",  "Fatehgarh Sahib",
        "Fazilka",    "Ferozepur", "Gurdaspur", "Hoshiarpur", "Jalandhar",
        "Kapurthala", "Ludhiana",  "Mansa",    "Moga",      "Pathankot",
        "Patiala",    "Rupnagar",  "Sangrur"};
    PlantingModel planting;
    RevisitSchedule schedule{0, kSeasonEndDay, 12, {5}};  // one mid-season pass
                                                          // dropped (index 5 = day 60)
    double speckle_sigma_db = 0.7;
    double area_min_m2 = 2000.0;
    double area_max_m2 = 100000.0;
    double lattice_spacing_m = 400.0;
    PracticeTemplate control_template;
    PracticeTemplate dsr_template;
    PracticeTemplate awd_template;

    SceneConfig() {
        control_template.practice = PracticeLabel::CONTROL;
        dsr_template.practice = PracticeLabel::DSR;
        dsr_template.growth_mid_days = 48.0;  // from seed, not seedling
        dsr_template.canopy_mid_days = 50.0;
        dsr_template.flood_delay_days = 12.0;  // CF starts after establishment
        awd_template.practice = PracticeLabel::AWD;
    }

    const PracticeTemplate& template_for(PracticeLabel l) const {
        switch (l) {
            case PracticeLabel::CONTROL: return control_template;
            case PracticeLabel::DSR: return dsr_template;
            case PracticeLabel::AWD: return awd_template;
        }
        return control_template;
    }

    long total_plots() const { return n_awd + n_dsr + n_control; }
};

namespace detail {

inline void load_template(const Config& cfg, const std::string& section, PracticeTemplate& tp) {
    tp.base_vv_db = cfg.get_double(section, "base_vv_db", tp.base_vv_db);
    tp.vv_trend_db_per_day = cfg.get_double(section, "vv_trend_db_per_day", tp.vv_trend_db_per_day);
    tp.flood_drop_db = cfg.get_double(section, "flood_drop_db", tp.flood_drop_db);
    tp.flood_edge_days = cfg.get_double(section, "flood_edge_days", tp.flood_edge_days);
    tp.flood_delay_days = cfg.get_double(section, "flood_delay_days", tp.flood_delay_days);
    tp.sowing_dip_drop_db = cfg.get_double(section, "sowing_dip_drop_db", tp.sowing_dip_drop_db);
    tp.sowing_dip_duration_days =
        cfg.get_double(section, "sowing_dip_duration_days", tp.sowing_dip_duration_days);
    tp.sowing_dip_lead_days = cfg.get_double(section, "sowing_dip_lead_days", tp.sowing_dip_lead_days);
    tp.awd_cycle_min_days = cfg.get_double(section, "awd_cycle_min_days", tp.awd_cycle_min_days);
    tp.awd_cycle_max_days = cfg.get_double(section, "awd_cycle_max_days", tp.awd_cycle_max_days);
    tp.awd_mod_amp_db = cfg.get_double(section, "awd_mod_amp_db", tp.awd_mod_amp_db);
    tp.awd_start_after_days = cfg.get_double(section, "awd_start_after_days", tp.awd_start_after_days);
    tp.awd_duration_days = cfg.get_double(section, "awd_duration_days", tp.awd_duration_days);
    tp.awd_square = cfg.get_bool(section, "awd_square", tp.awd_square);
    tp.vh_base_db = cfg.get_double(section, "vh_base_db", tp.vh_base_db);
    tp.vh_rise_db = cfg.get_double(section, "vh_rise_db", tp.vh_rise_db);
    tp.growth_mid_days = cfg.get_double(section, "growth_mid_days", tp.growth_mid_days);
    tp.growth_scale_days = cfg.get_double(section, "growth_scale_days", tp.growth_scale_days);
    tp.canopy_mid_days = cfg.get_double(section, "canopy_mid_days", tp.canopy_mid_days);
    tp.canopy_scale_days = cfg.get_double(section, "canopy_scale_days", tp.canopy_scale_days);
    tp.plot_level_sigma_db = cfg.get_double(section, "plot_level_sigma_db", tp.plot_level_sigma_db);
    tp.validate();
}

}  // namespace detail

inline SceneConfig scene_config_from(const Config& cfg) {
    SceneConfig sc;
    sc.n_awd = cfg.get_long("scene", "n_awd", sc.n_awd);
    sc.n_dsr = cfg.get_long("scene", "n_dsr", sc.n_dsr);
    sc.n_control = cfg.get_long("scene", "n_control", sc.n_control);
    if (sc.n_awd < 0 || sc.n_dsr < 0 || sc.n_control < 0 || sc.total_plots() < 1)
        throw ConfigError("scene: class counts must be non-negative and total >= 1");
    sc.seed = static_cast<std::uint64_t>(cfg.get_long("scene", "seed", static_cast<long>(sc.seed)));
    sc.districts = cfg.get_list("scene", "districts", sc.districts);
    if (sc.districts.empty()) throw ConfigError("scene: districts list is empty");
    sc.area_min_m2 = cfg.get_double("scene", "area_min_m2", sc.area_min_m2);
    sc.area_max_m2 = cfg.get_double("scene", "area_max_m2", sc.area_max_m2);
    if (!(sc.area_min_m2 > 0.0 && sc.area_min_m2 < sc.area_max_m2))
        throw ConfigError("scene: need 0 < area_min_m2 < area_max_m2");

    sc.planting.dsr_mean = cfg.get_double("planting", "dsr_mean", sc.planting.dsr_mean);
    sc.planting.dsr_sd = cfg.get_double("planting", "dsr_sd", sc.planting.dsr_sd);
    sc.planting.control_mean = cfg.get_double("planting", "control_mean", sc.planting.control_mean);
    sc.planting.control_sd = cfg.get_double("planting", "control_sd", sc.planting.control_sd);
    sc.planting.awd_mean = cfg.get_double("planting", "awd_mean", sc.planting.awd_mean);
    sc.planting.awd_sd = cfg.get_double("planting", "awd_sd", sc.planting.awd_sd);
    sc.planting.span_lo = cfg.get_double("planting", "span_lo", sc.planting.span_lo);
    sc.planting.span_hi = cfg.get_double("planting", "span_hi", sc.planting.span_hi);
    sc.planting.align = cfg.get_bool("planting", "align_planting_dates", sc.planting.align);
    sc.planting.align_day = cfg.get_double("planting", "align_day", sc.planting.align_day);
    sc.planting.validate();

    sc.schedule.start_day = static_cast<int>(cfg.get_long("schedule", "start_day", sc.schedule.start_day));
    sc.schedule.end_day = static_cast<int>(cfg.get_long("schedule", "end_day", sc.schedule.end_day));
    sc.schedule.period_days =
        static_cast<int>(cfg.get_long("schedule", "period_days", sc.schedule.period_days));
    if (cfg.has("schedule", "dropped_indices")) {
        sc.schedule.dropped.clear();
        for (const auto& s : cfg.get_list("schedule", "dropped_indices", {}))
            sc.schedule.dropped.insert(static_cast<int>(parse_long(s, "schedule.dropped_indices")));
    }

    sc.speckle_sigma_db = cfg.get_double("noise", "speckle_sigma_db", sc.speckle_sigma_db);

    detail::load_template(cfg, "template.control", sc.control_template);
    detail::load_template(cfg, "template.dsr", sc.dsr_template);
    detail::load_template(cfg, "template.awd", sc.awd_template);
    return sc;
}

struct Scene {
    std::vector<PlotSeries> plots;      // ordered by plot index
    std::vector<PlotPolygon> polygons;  // same order
};

/// Builds the full labeled scene: practice labels cycle through the classes
/// until each quota is exhausted, districts rotate round-robin, square plot
/// polygons sit on a non-overlapping lattice with log-uniform areas.
/// Per-plot seeds derive from (seed, plot index); output order is the plot
/// index, so generation is reproducible and trivially parallelizable.
inline Scene generate_scene(const SceneConfig& cfg) {
    const long total = cfg.total_plots();
    Scene scene;
    scene.plots.reserve(static_cast<std::size_t>(total));
    scene.polygons.reserve(static_cast<std::size_t>(total));

    long remaining[3] = {cfg.n_control, cfg.n_dsr, cfg.n_awd};
    int cursor = 0;
    const long columns = std::max<long>(1, static_cast<long>(std::ceil(std::sqrt(double(total)))));
    const long rows = (total + columns - 1) / columns;
    const double spacing = cfg.lattice_spacing_m;
    const double top_y = rows * spacing;

    for (long i = 0; i < total; ++i) {
        while (remaining[cursor] == 0) cursor = (cursor + 1) % 3;
        const auto practice = static_cast<PracticeLabel>(cursor);
        --remaining[cursor];
        cursor = (cursor + 1) % 3;

        Rng plot_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * i)));
        const int planting = sample_planting(cfg.planting, practice, plot_rng);
        const double area = std::exp(
            plot_rng.uniform(std::log(cfg.area_min_m2), std::log(cfg.area_max_m2)));

        PlotSeries plot =
            generate_plot(cfg.template_for(practice), planting, cfg.schedule,
                          cfg.speckle_sigma_db,
                          derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * i + 1)));
        char id[24];
        std::snprintf(id, sizeof(id), "plot_%07ld", i);
        plot.plot_id = id;
        plot.district = cfg.districts[static_cast<std::size_t>(i) % cfg.districts.size()];

        const double side = std::sqrt(area);
        plot.area_m2 = side * side;

        const long col = i % columns;
        const long row = i / columns;
        const double cx = (col + 0.5) * spacing;
        const double cy = top_y - (row + 0.5) * spacing;
        PlotPolygon poly;
        poly.plot_id = plot.plot_id;
        poly.district = plot.district;
        poly.exterior = {{cx - side / 2, cy - side / 2},
                         {cx + side / 2, cy - side / 2},
                         {cx + side / 2, cy + side / 2},
                         {cx - side / 2, cy + side / 2},
                         {cx - side / 2, cy - side / 2}};
        poly.validate();

        scene.plots.push_back(std::move(plot));
        scene.polygons.push_back(std::move(poly));
    }
    return scene;
}

struct SceneFiles {
    std::string series_csv;
    std::string geojson;
    std::string labels_csv;
};

inline SceneFiles write_scene(const Scene& scene, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    SceneFiles files;
    files.series_csv = (std::filesystem::path(out_dir) / "series.csv").string();
    files.geojson = (std::filesystem::path(out_dir) / "plots.geojson").string();
    files.labels_csv = (std::filesystem::path(out_dir) / "labels.csv").string();
    write_series_csv(files.series_csv, scene.plots);
    write_geojson(files.geojson, scene.polygons);
    write_labels_csv(files.labels_csv, scene.plots);
    return files;
}

/// Paints per-timestep grids for a scene (testing/small scenes only: memory
/// grows with lattice area). Background pixels are NO_DATA.
inline std::pair<std::vector<int>, std::vector<Grid>> make_band_grids(const Scene& scene,
                                                                      Band band,
                                                                      double spacing_m = 400.0) {
    if (scene.plots.empty()) throw InputError("make_band_grids: empty scene");
    const long total = static_cast<long>(scene.plots.size());
    const long columns = std::max<long>(1, static_cast<long>(std::ceil(std::sqrt(double(total)))));
    const long rows = (total + columns - 1) / columns;
    Grid proto;
    proto.pixel_size_m = 10.0;
    proto.width = static_cast<int>(columns * spacing_m / 10.0);
    proto.height = static_cast<int>(rows * spacing_m / 10.0);
    proto.origin_x = 0.0;
    proto.origin_y = rows * spacing_m;
    proto.values.assign(static_cast<std::size_t>(proto.width) * proto.height,
                        std::numeric_limits<float>::quiet_NaN());

    std::vector<int> days;
    for (const auto& a : scene.plots[0].band(band)) days.push_back(a.day);
    std::vector<Grid> grids(days.size(), proto);

    for (std::size_t p = 0; p < scene.plots.size(); ++p) {
        const auto& acqs = scene.plots[p].band(band);
        if (acqs.size() != days.size())
            throw InputError("make_band_grids: plots disagree on acquisition days");
        const Mask mask = rasterize(scene.polygons[p], proto);
        for (std::size_t i = 0; i < mask.set.size(); ++i) {
            if (!mask.set[i]) continue;
            for (std::size_t d = 0; d < days.size(); ++d)
                grids[d].values[i] = static_cast<float>(acqs[d].value_db);
        }
    }
    return {days, grids};
}

}  // namespace ricewatch
