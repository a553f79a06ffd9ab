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
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/csv.hpp"

namespace ricewatch {

/// Radar bands. VV and VH are ingested; RATIO (VV−VH in dB) and RVI are
/// always derived downstream.
enum class Band { VV, VH, RATIO, RVI };

inline const char* band_name(Band b) {
    switch (b) {
        case Band::VV: return "VV";
        case Band::VH: return "VH";
        case Band::RATIO: return "RATIO";
        case Band::RVI: return "RVI";
    }
    return "?";
}

inline Band parse_band(const std::string& s) {
    if (s == "VV") return Band::VV;
    if (s == "VH") return Band::VH;
    if (s == "RATIO") return Band::RATIO;
    if (s == "RVI") return Band::RVI;
    throw InputError("unknown band '" + s + "'");
}

/// The three collected practice classes. Enumeration order is the fixed
/// tie-break order everywhere.
enum class PracticeLabel { CONTROL, DSR, AWD };

inline constexpr int kNumPracticeLabels = 3;

inline const char* label_name(PracticeLabel l) {
    switch (l) {
        case PracticeLabel::CONTROL: return "CONTROL";
        case PracticeLabel::DSR: return "DSR";
        case PracticeLabel::AWD: return "AWD";
    }
    return "?";
}

inline PracticeLabel parse_label(const std::string& s) {
    if (s == "CONTROL") return PracticeLabel::CONTROL;
    if (s == "DSR") return PracticeLabel::DSR;
    if (s == "AWD") return PracticeLabel::AWD;
    throw InputError("unknown practice label '" + s + "'");
}

/// One backscatter observation: day offset from May 1 and gamma-naught in dB.
struct Acquisition {
    int day = 0;
    double value_db = 0.0;
};

/// Per-plot multi-band time series. Immutable by convention once built.
class PlotSeries {
public:
    std::string plot_id;
    std::string district;
    double area_m2 = 0.0;
    std::optional<PracticeLabel> label;
    std::optional<int> planting_day;  // held out from features; evaluation metadata only

    void set_band(Band band, std::vector<Acquisition> acqs) {
        if (band == Band::RATIO || band == Band::RVI)
            throw InvalidSeries(plot_id + ": band " + band_name(band) +
                                " is derived, never ingested");
        if (acqs.empty()) throw InvalidSeries(plot_id + ": empty band series");
        for (std::size_t i = 0; i < acqs.size(); ++i) {
            if (acqs[i].day < 0)
                throw InvalidSeries(plot_id + ": negative day offset");
            if (!std::isfinite(acqs[i].value_db))
                throw InvalidSeries(plot_id + ": non-finite backscatter value");
            if (i > 0 && acqs[i].day <= acqs[i - 1].day)
                throw InvalidSeries(plot_id + ": timestamps not strictly increasing");
        }
        bands_[band] = std::move(acqs);
    }

    bool has_band(Band band) const { return bands_.count(band) != 0; }

    const std::vector<Acquisition>& band(Band b) const {
        const auto it = bands_.find(b);
        if (it == bands_.end())
            throw InvalidSeries(plot_id + ": missing band " + band_name(b));
        return it->second;
    }

    const std::map<Band, std::vector<Acquisition>>& bands() const { return bands_; }

    /// All ingested bands must observe the identical timestamp set.
    void check_aligned() const {
        if (bands_.empty()) return;
        const auto& ref = bands_.begin()->second;
        for (const auto& [b, acqs] : bands_) {
            if (acqs.size() != ref.size())
                throw InvalidSeries(plot_id + ": bands disagree on acquisition count");
            for (std::size_t i = 0; i < acqs.size(); ++i)
                if (acqs[i].day != ref[i].day)
                    throw InvalidSeries(plot_id + ": bands disagree on acquisition days");
        }
    }

    /// Largest gap between consecutive acquisitions, in days.
    int max_gap_days() const {
        int gap = 0;
        for (const auto& [b, acqs] : bands_)
            for (std::size_t i = 1; i < acqs.size(); ++i)
                gap = std::max(gap, acqs[i].day - acqs[i - 1].day);
        return gap;
    }

    /// Gaps above 30 days are bridged by the spline but worth flagging.
    bool gap_warning() const { return max_gap_days() > 30; }

private:
    std::map<Band, std::vector<Acquisition>> bands_;
};

// ---------------------------------------------------------------------------
// Smoothing

/// Discrete Gaussian smoothing. Kernel exp(-k^2 / (2 sigma^2)) truncated at
/// radius ceil(4 sigma) and renormalized near the boundaries. Computed in
/// deviation form around each center sample, so constant series pass through
/// bit-exactly.
inline std::vector<double> smooth(std::span<const double> values, double sigma = 0.5) {
    if (values.empty()) throw InvalidSeries("smooth: empty input");
    if (!(sigma > 0.0)) throw InvalidSeries("smooth: sigma must be positive");
    const int n = static_cast<int>(values.size());
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
    for (int k = 0; k <= radius; ++k)
        kernel[static_cast<std::size_t>(k)] = std::exp(-(double(k) * k) / (2.0 * sigma * sigma));
    std::vector<double> out(values.size());
    for (int i = 0; i < n; ++i) {
        double wsum = kernel[0];
        double dev = 0.0;
        for (int k = 1; k <= radius; ++k) {
            const double w = kernel[static_cast<std::size_t>(k)];
            if (i - k >= 0) {
                wsum += w;
                dev += w * (values[static_cast<std::size_t>(i - k)] - values[static_cast<std::size_t>(i)]);
            }
            if (i + k < n) {
                wsum += w;
                dev += w * (values[static_cast<std::size_t>(i + k)] - values[static_cast<std::size_t>(i)]);
            }
        }
        out[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i)] + dev / wsum;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cubic spline

/// Interpolating natural cubic spline over (day, value) knots. Evaluating
/// outside [first knot, last knot] clamps to the endpoint value.
class CubicSpline {
public:
    CubicSpline(std::vector<double> t, std::vector<double> y)
        : t_(std::move(t)), y_(std::move(y)) {
        const std::size_t n = t_.size();
        if (n != y_.size()) throw InvalidSeries("spline: length mismatch");
        if (n < 4) throw InsufficientData("spline: need at least 4 points, got " +
                                          std::to_string(n));
        for (std::size_t i = 1; i < n; ++i) {
            if (t_[i] == t_[i - 1]) throw InvalidSeries("spline: duplicate timestamps");
            if (t_[i] < t_[i - 1]) throw InvalidSeries("spline: timestamps not increasing");
        }
        solve_second_derivatives();
    }

    double first_t() const { return t_.front(); }
    double last_t() const { return t_.back(); }

    double eval(double x) const {
        if (x <= t_.front()) return y_.front();
        if (x >= t_.back()) return y_.back();
        // binary search for the segment with t_[i] <= x < t_[i+1]
        std::size_t lo = 0, hi = t_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (t_[mid] <= x)
                lo = mid;
            else
                hi = mid;
        }
        const double h = t_[hi] - t_[lo];
        const double a = (t_[hi] - x) / h;
        const double b = (x - t_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
    }

private:
    // Tridiagonal (Thomas) solve for the interior second derivatives;
    // natural boundary: m_0 = m_{n-1} = 0.
    void solve_second_derivatives() {
        const std::size_t n = t_.size();
        m_.assign(n, 0.0);
        std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = t_[i] - t_[i - 1];
            const double h1 = t_[i + 1] - t_[i];
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        // forward sweep over interior rows; the sub-diagonal entry of row i is h0/6
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double h0 = t_[i] - t_[i - 1];
            const double w = (h0 / 6.0) / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
            if (i == 1) break;
        }
    }

    std::vector<double> t_, y_, m_;
};

/// Fits the interpolating natural cubic spline through acquisitions.
inline CubicSpline fit_spline(std::span<const Acquisition> acqs) {
    if (acqs.size() < 4)
        throw InsufficientData("fit_spline: need at least 4 acquisitions, got " +
                               std::to_string(acqs.size()));
    std::vector<double> t(acqs.size()), y(acqs.size());
    for (std::size_t i = 0; i < acqs.size(); ++i) {
        t[i] = acqs[i].day;
        y[i] = acqs[i].value_db;
    }
    return CubicSpline(std::move(t), std::move(y));
}

// ---------------------------------------------------------------------------
// Resampling and derived bands

/// Regular-grid samples of a band over [start_day, end_day] at step_days.
/// length = floor((end-start)/step) + 1. The canonical modeling steps are
/// 4, 7 and 10 days; resample itself accepts any positive step.
struct ResampledSeries {
    Band band = Band::VV;
    int start_day = 0;
    int end_day = 0;
    int step_days = 1;
    std::vector<double> values;

    double t_rel(std::size_t i) const { return static_cast<double>(i) * step_days; }
};

inline int resample_count(int start_day, int end_day, int step_days) {
    return (end_day - start_day) / step_days + 1;
}

inline ResampledSeries resample(const CubicSpline& spline, Band band, int start_day,
                                int end_day, int step_days) {
    if (start_day >= end_day)
        throw WindowError("resample: start_day must precede end_day");
    if (step_days < 1) throw WindowError("resample: step_days must be positive");
    if (end_day < spline.first_t() || start_day > spline.last_t())
        throw WindowError("resample: window does not intersect the series domain");
    const int count = resample_count(start_day, end_day, step_days);
    if (count < 4)
        throw WindowError("resample: window yields fewer than 4 samples");
    ResampledSeries out;
    out.band = band;
    out.start_day = start_day;
    out.end_day = end_day;
    out.step_days = step_days;
    out.values.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.values[static_cast<std::size_t>(i)] = spline.eval(start_day + double(i) * step_days);
    return out;
}

inline void check_same_grid(const ResampledSeries& a, const ResampledSeries& b,
                            const char* op) {
    if (a.start_day != b.start_day || a.end_day != b.end_day ||
        a.step_days != b.step_days || a.values.size() != b.values.size())
        throw GridMismatch(std::string(op) + ": series grids differ");
}

/// VV/VH ratio band: a ratio of linear powers is a difference in dB.
inline ResampledSeries derive_ratio(const ResampledSeries& vv, const ResampledSeries& vh) {
    check_same_grid(vv, vh, "derive_ratio");
    ResampledSeries out = vv;
    out.band = Band::RATIO;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = vv.values[i] - vh.values[i];
    return out;
}

/// Radar vegetation index, 4*p_vh / (p_vv + p_vh) in linear power.
inline ResampledSeries derive_rvi(const ResampledSeries& vv, const ResampledSeries& vh) {
    check_same_grid(vv, vh, "derive_rvi");
    ResampledSeries out = vv;
    out.band = Band::RVI;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double p_vv = std::pow(10.0, vv.values[i] / 10.0);
        const double p_vh = std::pow(10.0, vh.values[i] / 10.0);
        out.values[i] = 4.0 * p_vh / (p_vv + p_vh);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Series CSV ingestion:  plot_id,district,area_m2,band,day,value_db
//
// Rows belonging to one plot must be contiguous (any band/day order within
// the plot block); this is what allows streaming ingestion at scale.

inline const char* kSeriesCsvHeader = "plot_id,district,area_m2,band,day,value_db";

namespace detail {

inline PlotSeries assemble_plot(const std::string& plot_id, const std::string& district,
                                double area_m2,
                                std::map<Band, std::vector<Acquisition>>& rows) {
    PlotSeries p;
    p.plot_id = plot_id;
    p.district = district;
    p.area_m2 = area_m2;
    for (auto& [b, acqs] : rows) {
        std::sort(acqs.begin(), acqs.end(),
                  [](const Acquisition& x, const Acquisition& y) { return x.day < y.day; });
        for (std::size_t i = 1; i < acqs.size(); ++i)
            if (acqs[i].day == acqs[i - 1].day)
                throw InvalidSeries(plot_id + ": duplicate day " + std::to_string(acqs[i].day) +
                                    " in band " + band_name(b));
        p.set_band(b, std::move(acqs));
    }
    rows.clear();
    p.check_aligned();
    return p;
}

}  // namespace detail

/// Streams plots out of an ingestion CSV, invoking `sink` once per plot.
inline void for_each_plot_series(const std::string& path,
                                 const std::function<void(PlotSeries&&)>& sink) {
    CsvReader reader(path);
    const std::size_t c_plot = reader.col("plot_id");
    const std::size_t c_district = reader.col("district");
    const std::size_t c_area = reader.col("area_m2");
    const std::size_t c_band = reader.col("band");
    const std::size_t c_day = reader.col("day");
    const std::size_t c_value = reader.col("value_db");

    std::string cur_id, cur_district;
    double cur_area = 0.0;
    std::map<Band, std::vector<Acquisition>> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::string& id = f[c_plot];
        if (id.empty()) throw InputError(reader.context() + ": empty plot_id");
        if (id != cur_id) {
            if (!cur_id.empty())
                sink(detail::assemble_plot(cur_id, cur_district, cur_area, rows));
            cur_id = id;
            cur_district = f[c_district];
            cur_area = parse_double(f[c_area], reader.context());
            if (!(cur_area > 0.0))
                throw InvalidSeries(reader.context() + ": area_m2 must be positive");
        }
        const Band band = parse_band(f[c_band]);
        if (band == Band::RATIO || band == Band::RVI)
            throw InvalidSeries(reader.context() + ": band " + f[c_band] +
                                " is derived, never ingested");
        Acquisition acq;
        acq.day = static_cast<int>(parse_long(f[c_day], reader.context()));
        acq.value_db = parse_double(f[c_value], reader.context());
        rows[band].push_back(acq);
    }
    if (!cur_id.empty()) sink(detail::assemble_plot(cur_id, cur_district, cur_area, rows));
}

inline std::vector<PlotSeries> read_series_csv(const std::string& path) {
    std::vector<PlotSeries> out;
    for_each_plot_series(path, [&out](PlotSeries&& p) { out.push_back(std::move(p)); });
    return out;
}

inline void write_series_csv(const std::string& path, std::span<const PlotSeries> plots) {
    CsvWriter w(path);
    w.raw_line(kSeriesCsvHeader);
    for (const auto& p : plots) {
        for (const auto& [b, acqs] : p.bands()) {
            for (const auto& a : acqs) {
                w.row({p.plot_id, p.district, format_double(p.area_m2), band_name(b),
                       std::to_string(a.day), format_double(a.value_db)});
            }
        }
    }
    w.close();
}

// Labels sidecar:  plot_id,label,planting_day  (planting_day may be empty).
// Labels never travel inside the ingestion CSV; practice labels and planting
// metadata are evaluation-side information.

inline void write_labels_csv(const std::string& path, std::span<const PlotSeries> plots) {
    CsvWriter w(path);
    w.raw_line("plot_id,label,planting_day");
    for (const auto& p : plots) {
        w.row({p.plot_id, p.label ? label_name(*p.label) : "",
               p.planting_day ? std::to_string(*p.planting_day) : ""});
    }
    w.close();
}

struct PlotLabel {
    std::string plot_id;
    std::optional<PracticeLabel> label;
    std::optional<int> planting_day;
};

inline std::vector<PlotLabel> read_labels_csv(const std::string& path) {
    CsvReader reader(path);
    const std::size_t c_plot = reader.col("plot_id");
    const std::size_t c_label = reader.col("label");
    const std::size_t c_day = reader.col("planting_day");
    std::vector<PlotLabel> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        PlotLabel l;
        l.plot_id = f[c_plot];
        if (!f[c_label].empty()) l.label = parse_label(f[c_label]);
        if (!f[c_day].empty()) l.planting_day = static_cast<int>(parse_long(f[c_day], reader.context()));
        out.push_back(std::move(l));
    }
    return out;
}

}  // namespace ricewatch
