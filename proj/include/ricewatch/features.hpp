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

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/timeseries.hpp"

namespace ricewatch {

/// Feature extraction window. Canonical sampling steps are 4, 7 or 10 days.
struct TemporalWindow {
    int start_day = 0;
    int end_day = kSeasonEndDay;
    int step_days = 7;

    void validate() const {
        if (start_day >= end_day)
            throw WindowError("window: start_day must precede end_day");
        if (start_day < 0 || end_day > kSeasonEndDay)
            throw WindowError("window: must lie within [0, " +
                              std::to_string(kSeasonEndDay) + "] (May 1 - Dec 15)");
        if (step_days != 4 && step_days != 7 && step_days != 10)
            throw WindowError("window: step_days must be 4, 7 or 10");
    }

    int sample_count() const { return resample_count(start_day, end_day, step_days); }

    bool operator==(const TemporalWindow&) const = default;
};

struct ExtremumFeature {
    enum class Kind { TROUGH, CREST, INFLECTION };
    Kind kind = Kind::TROUGH;
    double t_rel = kAbsentSentinel;     // days since window start
    double amplitude = kAbsentSentinel; // signed dB at the extremum
    bool present = false;
};

struct ExtremaResult {
    std::vector<ExtremumFeature> troughs;  // exactly k entries, sentinel-padded
    std::vector<ExtremumFeature> crests;
    int trough_count = 0;  // totals, not capped at k
    int crest_count = 0;
};

/// Interior strict local minima/maxima in time order; endpoints excluded.
/// A plateau of equal values yields one extremum at its first index.
inline ExtremaResult find_extrema(const ResampledSeries& series, int k = 3) {
    if (series.values.size() < 3)
        throw InvalidSeries("find_extrema: need at least 3 samples");
    if (k < 1) throw InputError("find_extrema: k must be >= 1");
    const auto& v = series.values;
    const std::size_t n = v.size();

    ExtremaResult res;
    res.troughs.assign(static_cast<std::size_t>(k), ExtremumFeature{ExtremumFeature::Kind::TROUGH});
    res.crests.assign(static_cast<std::size_t>(k), ExtremumFeature{ExtremumFeature::Kind::CREST});

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;  // run [i, j] of equal values
        if (i > 0 && j < n - 1) {
            const double prev = v[i - 1];
            const double next = v[j + 1];
            const bool trough = prev > v[i] && next > v[i];
            const bool crest = prev < v[i] && next < v[i];
            if (trough || crest) {
                auto& list = trough ? res.troughs : res.crests;
                int& count = trough ? res.trough_count : res.crest_count;
                if (count < k) {
                    auto& f = list[static_cast<std::size_t>(count)];
                    f.t_rel = series.t_rel(i);
                    f.amplitude = v[i];
                    f.present = true;
                }
                ++count;
            }
        }
        i = j + 1;
    }
    return res;
}

/// Sign changes of the discrete second difference, reported at the left
/// sample of the change. Zero runs do not restart the sign tracking.
inline std::vector<ExtremumFeature> find_inflections(const ResampledSeries& series, int k = 3) {
    if (series.values.size() < 4)
        throw InvalidSeries("find_inflections: need at least 4 samples");
    if (k < 1) throw InputError("find_inflections: k must be >= 1");
    const auto& v = series.values;
    const std::size_t n = v.size();

    std::vector<ExtremumFeature> out(static_cast<std::size_t>(k),
                                     ExtremumFeature{ExtremumFeature::Kind::INFLECTION});
    int found = 0;
    int prev_sign = 0;
    std::size_t prev_idx = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        const int sign = d2 > 0.0 ? 1 : (d2 < 0.0 ? -1 : 0);
        if (sign == 0) continue;
        if (prev_sign != 0 && sign != prev_sign) {
            if (found < k) {
                auto& f = out[static_cast<std::size_t>(found)];
                f.t_rel = series.t_rel(prev_idx);
                f.amplitude = v[prev_idx];
                f.present = true;
            }
            ++found;
        }
        prev_sign = sign;
        prev_idx = i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian kernel fit to the VV/VH ratio

struct GaussianFitParams {
    enum class Status { OK, DEGENERATE, MAX_ITER };
    double amplitude = kAbsentSentinel;
    double peak_day = kAbsentSentinel;   // days since window start
    double sigma_days = kAbsentSentinel;
    double r_squared = 0.0;
    Status status = Status::DEGENERATE;
};

namespace detail {

/// In-place 3x3 linear solve with partial pivoting. Returns false if singular.
inline bool solve3(double a[3][3], double b[3], double x[3]) {
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[piv[r]][col]) > std::abs(a[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        const double p = a[piv[col]][col];
        if (std::abs(p) < 1e-300) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[piv[r]][col] / p;
            for (int c = col; c < 3; ++c) a[piv[r]][c] -= f * a[piv[col]][c];
            b[piv[r]] -= f * b[piv[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = b[piv[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[piv[row]][c] * x[c];
        x[row] = s / a[piv[row]][row];
    }
    return true;
}

}  // namespace detail

/// Least-squares fit of y(t) = A exp(-(t-mu)^2 / (2 sigma^2)) by damped
/// Gauss-Newton (Levenberg-Marquardt damping on the normal equations).
/// Initialization: A0 = max(y), mu0 = argmax(y), sigma0 = window length / 6.
/// Converges when the relative SSE change drops below 1e-10, capped at 200
/// iterations (best-so-far returned with MAX_ITER status).
inline GaussianFitParams fit_gaussian(const ResampledSeries& series) {
    const auto& y = series.values;
    const std::size_t n = y.size();
    if (n < 5) throw InsufficientData("fit_gaussian: need at least 5 samples");

    GaussianFitParams out;
    double y_min = y[0], y_max = y[0], y_sum = 0.0;
    std::size_t arg_max = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > y_max) {
            y_max = y[i];
            arg_max = i;
        }
        y_min = std::min(y_min, y[i]);
        y_sum += y[i];
    }
    if (y_max == y_min) return out;  // constant series: degenerate fit

    const double y_mean = y_sum / static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += (y[i] - y_mean) * (y[i] - y_mean);

    double A = y_max;
    double mu = series.t_rel(arg_max);
    double sigma = static_cast<double>(series.end_day - series.start_day) / 6.0;

    const auto sse_of = [&](double a, double m, double s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = series.t_rel(i) - m;
            const double r = y[i] - a * std::exp(-d * d / (2.0 * s * s));
            acc += r * r;
        }
        return acc;
    };

    double sse = sse_of(A, mu, sigma);
    double lambda = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double jtr[3] = {0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const double d = series.t_rel(i) - mu;
            const double e = std::exp(-d * d / (2.0 * sigma * sigma));
            const double model = A * e;
            const double r = y[i] - model;
            const double j[3] = {e, model * d / (sigma * sigma),
                                 model * d * d / (sigma * sigma * sigma)};
            for (int a = 0; a < 3; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
            }
        }
        double lhs[3][3];
        double rhs[3] = {jtr[0], jtr[1], jtr[2]};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                lhs[a][b] = jtj[a][b] + (a == b ? lambda * jtj[a][a] : 0.0);
        double delta[3];
        if (!detail::solve3(lhs, rhs, delta)) break;
        const double A_new = A + delta[0];
        const double mu_new = mu + delta[1];
        double sigma_new = sigma + delta[2];
        if (std::abs(sigma_new) < 1e-6) sigma_new = sigma_new < 0 ? -1e-6 : 1e-6;
        const double sse_new = sse_of(A_new, mu_new, sigma_new);
        if (sse_new <= sse) {
            const double rel = (sse - sse_new) / (sse > 0.0 ? sse : 1.0);
            A = A_new;
            mu = mu_new;
            sigma = sigma_new;
            sse = sse_new;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (rel < 1e-10) {
                converged = true;
                break;
            }
        } else {
            lambda *= 3.0;
            if (lambda > 1e12) break;
        }
    }

    out.amplitude = A;
    out.peak_day = mu;
    out.sigma_days = std::abs(sigma);
    out.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    out.status = converged ? GaussianFitParams::Status::OK
                           : GaussianFitParams::Status::MAX_ITER;
    return out;
}

// ---------------------------------------------------------------------------
// Feature schema (version fv1): 76 named reals.
//   per band in {VV, VH, RATIO}: 3 troughs x (t, amp), 3 crests x (t, amp),
//   3 inflections x (t, amp), trough_count, crest_count, mean, min, max  (23)
//   + Gaussian fit on RATIO (amplitude, peak day, sigma, R^2)             (4)
//   + RVI mean, min, max                                                  (3)

inline constexpr std::size_t kFeatureCount = 76;
inline constexpr const char* kFeatureSchemaVersion = "fv1";

inline const std::vector<std::string>& feature_schema() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const char* band : {"VV", "VH", "RATIO"}) {
            const std::string b = band;
            for (const char* kind : {"trough", "crest", "infl"}) {
                for (int i = 1; i <= 3; ++i) {
                    v.push_back(b + "_" + kind + std::to_string(i) + "_t");
                    v.push_back(b + "_" + kind + std::to_string(i) + "_amp");
                }
            }
            v.push_back(b + "_trough_count");
            v.push_back(b + "_crest_count");
            v.push_back(b + "_mean");
            v.push_back(b + "_min");
            v.push_back(b + "_max");
        }
        v.push_back("RATIO_gauss_amp");
        v.push_back("RATIO_gauss_peak_day");
        v.push_back("RATIO_gauss_sigma_days");
        v.push_back("RATIO_gauss_r2");
        v.push_back("RVI_mean");
        v.push_back("RVI_min");
        v.push_back("RVI_max");
        return v;
    }();
    return names;
}

inline std::size_t feature_index(const std::string& name) {
    const auto& names = feature_schema();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw SchemaError("unknown feature name '" + name + "'");
}

struct FeatureVector {
    std::string plot_id;
    TemporalWindow window;
    std::array<double, kFeatureCount> values{};
};

namespace detail {

inline void push_stats(const ResampledSeries& r, std::vector<double>& out) {
    double mn = r.values[0], mx = r.values[0], sum = 0.0;
    for (const double v : r.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        sum += v;
    }
    out.push_back(sum / static_cast<double>(r.values.size()));
    out.push_back(mn);
    out.push_back(mx);
}

inline void push_band_features(const ResampledSeries& r, std::vector<double>& out) {
    const ExtremaResult ex = find_extrema(r, 3);
    const auto infl = find_inflections(r, 3);
    for (const auto& f : ex.troughs) {
        out.push_back(f.t_rel);
        out.push_back(f.amplitude);
    }
    for (const auto& f : ex.crests) {
        out.push_back(f.t_rel);
        out.push_back(f.amplitude);
    }
    for (const auto& f : infl) {
        out.push_back(f.t_rel);
        out.push_back(f.amplitude);
    }
    out.push_back(ex.trough_count);
    out.push_back(ex.crest_count);
    push_stats(r, out);
}

}  // namespace detail

/// Runs the full smoothing -> spline -> resample chain per ingested band,
/// derives RATIO and RVI, and assembles the fv1 schema. Never consults the
/// plot's label or planting_day.
inline FeatureVector extract_features(const PlotSeries& plot, const TemporalWindow& window) {
    window.validate();
    const auto resample_band = [&](Band b) {
        const auto& acqs = plot.band(b);
        std::vector<double> raw(acqs.size());
        std::vector<double> days(acqs.size());
        for (std::size_t i = 0; i < acqs.size(); ++i) {
            raw[i] = acqs[i].value_db;
            days[i] = acqs[i].day;
        }
        std::vector<double> smoothed = smooth(raw, 0.5);
        CubicSpline spline(std::move(days), std::move(smoothed));
        return resample(spline, b, window.start_day, window.end_day, window.step_days);
    };

    const ResampledSeries vv = resample_band(Band::VV);
    const ResampledSeries vh = resample_band(Band::VH);
    const ResampledSeries ratio = derive_ratio(vv, vh);
    const ResampledSeries rvi = derive_rvi(vv, vh);

    std::vector<double> vals;
    vals.reserve(kFeatureCount);
    detail::push_band_features(vv, vals);
    detail::push_band_features(vh, vals);
    detail::push_band_features(ratio, vals);

    const GaussianFitParams g = fit_gaussian(ratio);
    if (g.status == GaussianFitParams::Status::DEGENERATE) {
        vals.push_back(kAbsentSentinel);
        vals.push_back(kAbsentSentinel);
        vals.push_back(kAbsentSentinel);
        vals.push_back(0.0);
    } else {
        vals.push_back(g.amplitude);
        vals.push_back(g.peak_day);
        vals.push_back(g.sigma_days);
        vals.push_back(g.r_squared);
    }
    detail::push_stats(rvi, vals);

    FeatureVector fv;
    fv.plot_id = plot.plot_id;
    fv.window = window;
    if (vals.size() != kFeatureCount)
        throw SchemaError("feature assembly produced " + std::to_string(vals.size()) +
                          " values, expected " + std::to_string(kFeatureCount));
    std::copy(vals.begin(), vals.end(), fv.values.begin());
    return fv;
}

// ---------------------------------------------------------------------------
// Feature matrix CSV:
//   plot_id,label,window_start,window_end,step,<76 schema columns>

struct FeatureMatrix {
    TemporalWindow window;
    std::vector<std::string> plot_ids;
    std::vector<std::optional<PracticeLabel>> labels;
    std::vector<std::array<double, kFeatureCount>> rows;

    std::size_t size() const { return rows.size(); }
};

inline void write_feature_csv(const std::string& path, const FeatureMatrix& m) {
    CsvWriter w(path);
    std::string header = "plot_id,label,window_start,window_end,step";
    for (const auto& name : feature_schema()) header += "," + name;
    w.raw_line(header);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        std::vector<std::string> f;
        f.reserve(kFeatureCount + 5);
        f.push_back(m.plot_ids[i]);
        f.push_back(m.labels[i] ? label_name(*m.labels[i]) : "");
        f.push_back(std::to_string(m.window.start_day));
        f.push_back(std::to_string(m.window.end_day));
        f.push_back(std::to_string(m.window.step_days));
        for (const double v : m.rows[i]) f.push_back(format_double(v));
        w.row(f);
    }
    w.close();
}

inline FeatureMatrix read_feature_csv(const std::string& path) {
    CsvReader reader(path);
    const auto& names = feature_schema();
    // schema columns must appear in schema order right after the five fixed columns
    const std::size_t base = 5;
    const auto& header = reader.header();
    if (header.size() != base + kFeatureCount)
        throw SchemaError("'" + path + "': expected " + std::to_string(base + kFeatureCount) +
                          " columns, got " + std::to_string(header.size()));
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (header[base + i] != names[i])
            throw SchemaError("'" + path + "': column '" + header[base + i] +
                              "' does not match schema " + kFeatureSchemaVersion);
    FeatureMatrix m;
    std::vector<std::string> f;
    bool first = true;
    while (reader.next(f)) {
        TemporalWindow w;
        w.start_day = static_cast<int>(parse_long(f[2], reader.context()));
        w.end_day = static_cast<int>(parse_long(f[3], reader.context()));
        w.step_days = static_cast<int>(parse_long(f[4], reader.context()));
        if (first) {
            m.window = w;
            first = false;
        } else if (!(w == m.window)) {
            throw InputError("'" + path + "': rows mix different windows");
        }
        m.plot_ids.push_back(f[0]);
        m.labels.push_back(f[1].empty() ? std::optional<PracticeLabel>{}
                                        : std::optional<PracticeLabel>{parse_label(f[1])});
        std::array<double, kFeatureCount> row{};
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            row[i] = parse_double(f[base + i], reader.context());
        m.rows.push_back(row);
    }
    return m;
}

}  // namespace ricewatch
