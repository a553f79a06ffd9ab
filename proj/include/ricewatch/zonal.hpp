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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/timeseries.hpp"

namespace ricewatch {

// ---------------------------------------------------------------------------
// Gridded backscatter rasters

/// North-up raster in a pre-projected planar CRS. `origin` is the top-left
/// corner; the center of pixel (row r, col c) sits at
/// (origin_x + (c+0.5)*pixel, origin_y - (r+0.5)*pixel). NO_DATA is NaN.
struct Grid {
    int width = 0;
    int height = 0;
    double pixel_size_m = 10.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<float> values;  // row-major, width*height

    float at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    float& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    double center_x(int col) const { return origin_x + (col + 0.5) * pixel_size_m; }
    double center_y(int row) const { return origin_y - (row + 0.5) * pixel_size_m; }

    bool congruent(const Grid& other) const {
        return width == other.width && height == other.height &&
               pixel_size_m == other.pixel_size_m && origin_x == other.origin_x &&
               origin_y == other.origin_y;
    }
};

// Flat binary grid format: packed little-endian header
//   magic 'ZGRD' (4) | version u16 | width u32 | height u32 |
//   pixel_size f32 | origin_x f64 | origin_y f64
// followed by width*height row-major f32 values, NO_DATA = NaN.
inline constexpr std::uint16_t kGridFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "grid files are little-endian; big-endian hosts are unsupported");

inline void write_grid(const std::string& path, const Grid& g) {
    if (static_cast<std::size_t>(g.width) * g.height != g.values.size())
        throw InputError("write_grid: width*height != values length");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const auto put = [&out](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put("ZGRD", 4);
    const std::uint16_t version = kGridFormatVersion;
    const std::uint32_t w = static_cast<std::uint32_t>(g.width);
    const std::uint32_t h = static_cast<std::uint32_t>(g.height);
    const float px = static_cast<float>(g.pixel_size_m);
    put(&version, 2);
    put(&w, 4);
    put(&h, 4);
    put(&px, 4);
    put(&g.origin_x, 8);
    put(&g.origin_y, 8);
    put(g.values.data(), g.values.size() * sizeof(float));
    out.close();
    if (!out) throw IoError("write failure on '" + path + "'");
}

inline Grid read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    const auto get = [&in, &path](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw IoError("'" + path + "': truncated grid file");
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, "ZGRD", 4) != 0)
        throw InputError("'" + path + "': not a grid file (bad magic)");
    std::uint16_t version;
    std::uint32_t w, h;
    float px;
    Grid g;
    get(&version, 2);
    if (version != kGridFormatVersion)
        throw InputError("'" + path + "': unsupported grid version " + std::to_string(version));
    get(&w, 4);
    get(&h, 4);
    get(&px, 4);
    get(&g.origin_x, 8);
    get(&g.origin_y, 8);
    g.width = static_cast<int>(w);
    g.height = static_cast<int>(h);
    g.pixel_size_m = px;
    g.values.resize(static_cast<std::size_t>(w) * h);
    get(g.values.data(), g.values.size() * sizeof(float));
    return g;
}

// ---------------------------------------------------------------------------
// Plot polygons

using Ring = std::vector<std::pair<double, double>>;  // closed: first == last

/// Signed shoelace area of a closed ring.
inline double ring_signed_area(const Ring& ring) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        acc += ring[i].first * ring[i + 1].second - ring[i + 1].first * ring[i].second;
    return acc / 2.0;
}

struct PlotPolygon {
    std::string plot_id;
    std::string district;
    Ring exterior;
    std::vector<Ring> holes;

    /// Shoelace area of the exterior minus the holes.
    double area_m2() const {
        double a = std::abs(ring_signed_area(exterior));
        for (const auto& h : holes) a -= std::abs(ring_signed_area(h));
        return a;
    }

    void validate() const {
        check_ring(exterior);
        for (const auto& h : holes) check_ring(h);
        if (!(area_m2() > 0.0))
            throw InputError(plot_id + ": polygon area must be positive");
    }

private:
    static void check_ring(const Ring& r) {
        if (r.size() < 4) throw InputError("polygon ring needs >= 4 vertices (closed)");
        if (r.front() != r.back()) throw InputError("polygon ring not closed");
    }
};

// ---------------------------------------------------------------------------
// Rasterization and morphology

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> set;  // row-major 0/1

    bool at(int row, int col) const {
        return set[static_cast<std::size_t>(row) * width + col] != 0;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (const auto v : set) c += v;
        return c;
    }
};

namespace detail {

/// Even-odd (ray crossing) test against one ring.
inline bool ray_crossings_odd(const Ring& ring, double px, double py) {
    bool inside = false;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const auto [x1, y1] = ring[i];
        const auto [x2, y2] = ring[i + 1];
        if ((y1 > py) != (y2 > py)) {
            const double x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
            if (px < x_at) inside = !inside;
        }
    }
    return inside;
}

}  // namespace detail

/// Even-odd point-in-polygon across exterior and holes.
inline bool point_in_polygon(const PlotPolygon& poly, double x, double y) {
    bool inside = detail::ray_crossings_odd(poly.exterior, x, y);
    for (const auto& h : poly.holes)
        if (detail::ray_crossings_odd(h, x, y)) inside = !inside;
    return inside;
}

/// Pixel-center rasterization over the grid extent (even-odd rule).
inline Mask rasterize(const PlotPolygon& poly, const Grid& grid) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const auto& [x, y] : poly.exterior) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    }
    const double px = grid.pixel_size_m;
    int col_lo = static_cast<int>(std::floor((min_x - grid.origin_x) / px - 0.5));
    int col_hi = static_cast<int>(std::ceil((max_x - grid.origin_x) / px));
    int row_lo = static_cast<int>(std::floor((grid.origin_y - max_y) / px - 0.5));
    int row_hi = static_cast<int>(std::ceil((grid.origin_y - min_y) / px));
    col_lo = std::max(col_lo, 0);
    row_lo = std::max(row_lo, 0);
    col_hi = std::min(col_hi, grid.width - 1);
    row_hi = std::min(row_hi, grid.height - 1);

    Mask m;
    m.width = grid.width;
    m.height = grid.height;
    m.set.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
    std::size_t n = 0;
    for (int r = row_lo; r <= row_hi; ++r) {
        for (int c = col_lo; c <= col_hi; ++c) {
            if (point_in_polygon(poly, grid.center_x(c), grid.center_y(r))) {
                m.set[static_cast<std::size_t>(r) * grid.width + c] = 1;
                ++n;
            }
        }
    }
    if (n == 0)
        throw EmptyMask(poly.plot_id + ": polygon covers no pixel centers on the grid");
    return m;
}

/// Morphological erosion with a square structuring element of half-width
/// radius_px: a pixel survives iff every pixel within Chebyshev distance
/// radius_px is set (pixels beyond the mask edge count as unset).
/// Implemented as a separable horizontal/vertical min filter.
inline Mask erode(const Mask& mask, int radius_px) {
    if (radius_px < 0) throw InputError("erode: radius_px must be >= 0");
    if (radius_px == 0) return mask;
    Mask tmp = mask;
    // horizontal pass
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            std::uint8_t v = 1;
            for (int k = -radius_px; k <= radius_px; ++k) {
                const int cc = c + k;
                if (cc < 0 || cc >= mask.width || !mask.at(r, cc)) {
                    v = 0;
                    break;
                }
            }
            tmp.set[static_cast<std::size_t>(r) * mask.width + c] = v;
        }
    }
    Mask out = tmp;
    // vertical pass
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            std::uint8_t v = 1;
            for (int k = -radius_px; k <= radius_px; ++k) {
                const int rr = r + k;
                if (rr < 0 || rr >= mask.height || !tmp.at(rr, c)) {
                    v = 0;
                    break;
                }
            }
            out.set[static_cast<std::size_t>(r) * mask.width + c] = v;
        }
    }
    return out;
}

/// Mean backscatter of the masked pixels per timestep. Timesteps whose
/// masked pixels are all NO_DATA are omitted (the spline bridges them).
inline std::vector<Acquisition> reduce_plot(const Mask& mask,
                                            std::span<const Grid> grids,
                                            std::span<const int> days) {
    if (grids.size() != days.size())
        throw InputError("reduce_plot: grids/days length mismatch");
    if (mask.count() == 0)
        throw PlotTooSmall("reduce_plot: empty mask (plot vanished under the negative buffer)");
    for (std::size_t i = 1; i < grids.size(); ++i)
        if (!grids[i].congruent(grids[0]))
            throw GridMismatch("reduce_plot: grids are not congruent");
    if (!grids.empty() &&
        (grids[0].width != mask.width || grids[0].height != mask.height))
        throw GridMismatch("reduce_plot: mask does not match grid dimensions");

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.set.size(); ++i)
        if (mask.set[i]) idx.push_back(i);

    std::vector<Acquisition> out;
    out.reserve(grids.size());
    for (std::size_t g = 0; g < grids.size(); ++g) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto i : idx) {
            const float v = grids[g].values[i];
            if (!std::isnan(v)) {
                sum += v;
                ++n;
            }
        }
        if (n == 0) continue;  // all NO_DATA: recorded as missing
        out.push_back(Acquisition{days[g], sum / static_cast<double>(n)});
    }
    return out;
}

/// Keeps polygons whose area lies in [min_m2, max_m2] (closed interval).
inline std::vector<PlotPolygon> size_filter(std::span<const PlotPolygon> polys,
                                            double min_m2 = 2000.0,
                                            double max_m2 = 100000.0) {
    if (!(min_m2 < max_m2)) throw InputError("size_filter: min_m2 must be < max_m2");
    std::vector<PlotPolygon> out;
    for (const auto& p : polys) {
        const double a = p.area_m2();
        if (a >= min_m2 && a <= max_m2) out.push_back(p);
    }
    return out;
}

}  // namespace ricewatch
