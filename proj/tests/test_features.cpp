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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>

#include "ricewatch/features.hpp"
#include "ricewatch/rng.hpp"
#include "ricewatch/synth.hpp"

using namespace ricewatch;

namespace {

ResampledSeries series_of(std::vector<double> values, int step = 7) {
    ResampledSeries s;
    s.band = Band::VV;
    s.start_day = 0;
    s.step_days = step;
    s.end_day = static_cast<int>(values.size() - 1) * step;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("find_extrema on the alternating pattern") {
    const auto s = series_of({1, 0, 1, 0, 1});
    const ExtremaResult r = find_extrema(s, 3);
    REQUIRE(r.trough_count == 2);
    REQUIRE(r.crest_count == 1);
    REQUIRE(r.troughs[0].t_rel == 7.0);
    REQUIRE(r.troughs[0].amplitude == 0.0);
    REQUIRE(r.troughs[1].t_rel == 21.0);
    REQUIRE(r.crests[0].t_rel == 14.0);
    REQUIRE(r.crests[0].amplitude == 1.0);
    REQUIRE_FALSE(r.troughs[2].present);
    REQUIRE(r.troughs[2].t_rel == kAbsentSentinel);
}

TEST_CASE("find_extrema on monotone and plateau series") {
    const ExtremaResult mono = find_extrema(series_of({1, 2, 3, 4, 5}), 3);
    REQUIRE(mono.trough_count == 0);
    REQUIRE(mono.crest_count == 0);
    for (const auto& f : mono.troughs) REQUIRE_FALSE(f.present);

    // plateau reported once, at its first index
    const ExtremaResult plat = find_extrema(series_of({3, 1, 1, 3, 5, 5, 2}), 3);
    REQUIRE(plat.trough_count == 1);
    REQUIRE(plat.troughs[0].t_rel == 7.0);
    REQUIRE(plat.crest_count == 1);
    REQUIRE(plat.crests[0].t_rel == 28.0);

    // plateaus touching an endpoint are not extrema
    const ExtremaResult edge = find_extrema(series_of({1, 1, 3, 2, 2}), 3);
    REQUIRE(edge.trough_count == 0);
    REQUIRE(edge.crest_count == 1);
}

TEST_CASE("find_extrema recovers sine extrema within one step") {
    std::vector<double> v;
    for (int t = 0; t <= 228; t += 4) v.push_back(std::sin(2.0 * M_PI * t / 60.0));
    const ExtremaResult r = find_extrema(series_of(std::move(v), 4), 3);
    // analytic crests at 15+60j, troughs at 45+60j
    for (int j = 0; j < 3; ++j) {
        REQUIRE(r.crests[static_cast<std::size_t>(j)].present);
        REQUIRE(std::abs(r.crests[static_cast<std::size_t>(j)].t_rel - (15.0 + 60.0 * j)) <= 4.0);
        REQUIRE(r.troughs[static_cast<std::size_t>(j)].present);
        REQUIRE(std::abs(r.troughs[static_cast<std::size_t>(j)].t_rel - (45.0 + 60.0 * j)) <= 4.0);
    }
}

TEST_CASE("find_inflections localizes the cubic's inflection") {
    std::vector<double> v;
    const int step = 7;
    std::vector<double> ts;
    for (double t = -100; t <= 100; t += step) {
        ts.push_back(t);
        v.push_back(t * t * t - 300.0 * t);
    }
    const auto infl = find_inflections(series_of(std::move(v), step), 3);
    REQUIRE(infl[0].present);
    // t_rel is measured from the window start; the analytic inflection is t=0
    const double t_abs = -100.0 + infl[0].t_rel;
    REQUIRE(std::abs(t_abs) <= 2.0 * step);
    REQUIRE_FALSE(infl[1].present);
}

TEST_CASE("find_inflections on linear and constant series") {
    const auto lin = find_inflections(series_of({1, 2, 3, 4, 5}), 3);
    for (const auto& f : lin) REQUIRE_FALSE(f.present);
    const auto cst = find_inflections(series_of({2, 2, 2, 2}), 3);
    for (const auto& f : cst) REQUIRE_FALSE(f.present);
}

TEST_CASE("fit_gaussian recovers exact parameters") {
    std::vector<double> v;
    for (int t = 0; t <= 228; t += 7)
        v.push_back(3.0 * std::exp(-(t - 100.0) * (t - 100.0) / (2.0 * 20.0 * 20.0)));
    const GaussianFitParams g = fit_gaussian(series_of(std::move(v), 7));
    REQUIRE(g.status == GaussianFitParams::Status::OK);
    REQUIRE(g.amplitude == Catch::Approx(3.0).margin(1e-3));
    REQUIRE(g.peak_day == Catch::Approx(100.0).margin(1e-3));
    REQUIRE(g.sigma_days == Catch::Approx(20.0).margin(1e-3));
    REQUIRE(g.r_squared > 0.999);
}

TEST_CASE("fit_gaussian parameter recovery across the sigma range") {
    for (const double sigma : {5.0, 12.0, 20.0, 35.0, 48.0, 60.0}) {
        std::vector<double> v;
        for (int t = 0; t <= 228; t += 7)
            v.push_back(2.5 * std::exp(-(t - 110.0) * (t - 110.0) / (2.0 * sigma * sigma)));
        const GaussianFitParams g = fit_gaussian(series_of(std::move(v), 7));
        REQUIRE(std::abs(g.amplitude - 2.5) < 1e-3);
        REQUIRE(std::abs(g.peak_day - 110.0) < 1e-3);
        REQUIRE(std::abs(g.sigma_days - sigma) < 1e-3);
        REQUIRE(g.r_squared > 0.999);
    }
}

TEST_CASE("fit_gaussian degenerate and noisy cases") {
    const GaussianFitParams flat = fit_gaussian(series_of({4, 4, 4, 4, 4}));
    REQUIRE(flat.status == GaussianFitParams::Status::DEGENERATE);
    REQUIRE(flat.amplitude == kAbsentSentinel);
    REQUIRE(flat.r_squared == 0.0);

    // Monte-Carlo: uniform noise of amplitude 0.1*A keeps R^2 in (0.9, 1.0)
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed) + 1000);
        std::vector<double> v;
        for (int t = 0; t <= 228; t += 7)
            v.push_back(3.0 * std::exp(-(t - 100.0) * (t - 100.0) / (2.0 * 20.0 * 20.0)) +
                        rng.uniform(-0.3, 0.3));
        const GaussianFitParams g = fit_gaussian(series_of(std::move(v), 7));
        REQUIRE(g.r_squared > 0.9);
        REQUIRE(g.r_squared < 1.0);
    }
}

TEST_CASE("feature schema is fixed at 76 unique names") {
    const auto& names = feature_schema();
    REQUIRE(names.size() == kFeatureCount);
    REQUIRE(std::set<std::string>(names.begin(), names.end()).size() == kFeatureCount);
    REQUIRE(names[0] == "VV_trough1_t");
    REQUIRE(feature_index("RVI_max") == kFeatureCount - 1);
    REQUIRE(feature_index("RATIO_gauss_r2") == 72);
    REQUIRE_THROWS_AS(feature_index("nope"), SchemaError);
}

namespace {

PlotSeries constant_plot(double vv, double vh) {
    PlotSeries p;
    p.plot_id = "const";
    p.area_m2 = 3000;
    std::vector<Acquisition> a, b;
    for (int t = 0; t <= 228; t += 12) {
        a.push_back({t, vv});
        b.push_back({t, vh});
    }
    p.set_band(Band::VV, std::move(a));
    p.set_band(Band::VH, std::move(b));
    return p;
}

}  // namespace

TEST_CASE("extract_features on a constant plot") {
    const PlotSeries p = constant_plot(-10.0, -16.0);
    const TemporalWindow w{0, 228, 7};
    const FeatureVector fv = extract_features(p, w);
    REQUIRE(fv.values[feature_index("VV_trough1_t")] == kAbsentSentinel);
    REQUIRE(fv.values[feature_index("VH_crest2_amp")] == kAbsentSentinel);
    REQUIRE(fv.values[feature_index("VV_trough_count")] == 0.0);
    REQUIRE(fv.values[feature_index("VV_mean")] == Catch::Approx(-10.0).margin(1e-9));
    REQUIRE(fv.values[feature_index("VH_mean")] == Catch::Approx(-16.0).margin(1e-9));
    REQUIRE(fv.values[feature_index("RATIO_mean")] == Catch::Approx(6.0).margin(1e-9));
    // degenerate Gaussian fit on the constant ratio
    REQUIRE(fv.values[feature_index("RATIO_gauss_amp")] == kAbsentSentinel);
    REQUIRE(fv.values[feature_index("RATIO_gauss_r2")] == 0.0);
}

TEST_CASE("extract_features is deterministic bit-for-bit") {
    SceneConfig cfg;
    cfg.seed = 9;
    Rng rng(1);
    const PlotSeries p = generate_plot(cfg.awd_template, 58, cfg.schedule, 0.7, 77);
    const TemporalWindow w{31, 137, 4};
    const FeatureVector a = extract_features(p, w);
    const FeatureVector b = extract_features(p, w);
    REQUIRE(std::memcmp(a.values.data(), b.values.data(), sizeof(a.values)) == 0);
}

TEST_CASE("windowed extraction is shift equivariant") {
    SceneConfig cfg;
    const PlotSeries p = generate_plot(cfg.control_template, 50, cfg.schedule, 0.7, 123);
    const int delta = 14;
    PlotSeries shifted = p;
    {
        PlotSeries fresh;
        fresh.plot_id = p.plot_id;
        fresh.area_m2 = 1.0;
        for (const auto& [band, acqs] : p.bands()) {
            std::vector<Acquisition> moved = acqs;
            for (auto& a : moved) a.day += delta;
            fresh.set_band(band, std::move(moved));
        }
        shifted = std::move(fresh);
    }
    const TemporalWindow w{10, 200, 7};
    const TemporalWindow w_shift{10 + delta, 200 + delta, 7};
    const FeatureVector a = extract_features(p, w);
    const FeatureVector b = extract_features(shifted, w_shift);
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        REQUIRE(a.values[i] == Catch::Approx(b.values[i]).margin(1e-9));
}

TEST_CASE("synthetic DSR plot: first VV trough tracks the sowing dip") {
    SceneConfig cfg;
    // 4-day revisit keeps the short dip inside the acquisition grid
    RevisitSchedule schedule{0, 228, 4, {}};
    Rng rng(42);
    const int planting = sample_planting(cfg.planting, PracticeLabel::DSR, rng);
    const PlotSeries p = generate_plot(cfg.dsr_template, planting, schedule, 0.0, 42);
    const TemporalWindow w{0, 228, 7};
    const FeatureVector fv = extract_features(p, w);
    const double trough_t = fv.values[feature_index("VV_trough1_t")];
    REQUIRE(trough_t != kAbsentSentinel);
    REQUIRE(std::abs(trough_t - planting) <= 12.0);
}

TEST_CASE("window resampling feeds 27 samples to the extractors") {
    const TemporalWindow w{31, 137, 4};
    REQUIRE(w.sample_count() == 27);
    SceneConfig cfg;
    const PlotSeries p = generate_plot(cfg.control_template, 50, cfg.schedule, 0.5, 5);
    REQUIRE_NOTHROW(extract_features(p, w));
}

TEST_CASE("temporal window validation") {
    REQUIRE_THROWS_AS((TemporalWindow{50, 50, 7}).validate(), WindowError);
    REQUIRE_THROWS_AS((TemporalWindow{0, 229, 7}).validate(), WindowError);
    REQUIRE_THROWS_AS((TemporalWindow{0, 100, 5}).validate(), WindowError);
    REQUIRE_NOTHROW((TemporalWindow{0, 100, 10}).validate());
}

TEST_CASE("feature matrix CSV round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "rw_feat_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "features.csv").string();

    FeatureMatrix m;
    m.window = {0, 228, 7};
    m.plot_ids = {"p1", "p2"};
    m.labels = {PracticeLabel::DSR, std::nullopt};
    m.rows.resize(2);
    Rng rng(3);
    for (auto& row : m.rows)
        for (auto& v : row) v = rng.uniform(-20, 20);
    write_feature_csv(path, m);

    const FeatureMatrix back = read_feature_csv(path);
    REQUIRE(back.size() == 2);
    REQUIRE(back.window == m.window);
    REQUIRE(back.labels[0] == PracticeLabel::DSR);
    REQUIRE_FALSE(back.labels[1]);
    for (std::size_t i = 0; i < 2; ++i)
        REQUIRE(std::memcmp(back.rows[i].data(), m.rows[i].data(), sizeof(m.rows[i])) == 0);
}
