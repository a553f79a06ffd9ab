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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricewatch/common.hpp"
#include "ricewatch/zonal.hpp"

namespace ricewatch {

/// Reads a GeoJSON FeatureCollection of Polygon features with `plot_id` and
/// `district` properties. Coordinates are planar (pre-projected).
inline std::vector<PlotPolygon> read_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "': invalid JSON: " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw InputError("'" + path + "': expected a FeatureCollection");
    std::vector<PlotPolygon> out;
    for (const auto& feature : doc.at("features")) {
        const auto& geom = feature.at("geometry");
        if (geom.value("type", "") != "Polygon")
            throw InputError("'" + path + "': only Polygon geometries are supported");
        PlotPolygon poly;
        const auto& props = feature.at("properties");
        poly.plot_id = props.value("plot_id", "");
        poly.district = props.value("district", "");
        if (poly.plot_id.empty())
            throw InputError("'" + path + "': feature missing plot_id property");
        const auto& rings = geom.at("coordinates");
        for (std::size_t r = 0; r < rings.size(); ++r) {
            Ring ring;
            for (const auto& pt : rings[r])
                ring.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
            if (r == 0)
                poly.exterior = std::move(ring);
            else
                poly.holes.push_back(std::move(ring));
        }
        poly.validate();
        out.push_back(std::move(poly));
    }
    return out;
}

inline void write_geojson(const std::string& path, std::span<const PlotPolygon> polys) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& p : polys) {
        nlohmann::json rings = nlohmann::json::array();
        const auto dump_ring = [](const Ring& ring) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& [x, y] : ring) pts.push_back({x, y});
            return pts;
        };
        rings.push_back(dump_ring(p.exterior));
        for (const auto& h : p.holes) rings.push_back(dump_ring(h));
        features.push_back({
            {"type", "Feature"},
            {"properties", {{"plot_id", p.plot_id}, {"district", p.district}}},
            {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
        });
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(1) << "\n";
    if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace ricewatch
