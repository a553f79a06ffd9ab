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

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"

namespace ricewatch {

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

inline std::string digest_bytes(const std::string& bytes) {
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

inline std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for digest");
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const auto n = static_cast<std::size_t>(in.gcount());
        const auto* p = reinterpret_cast<const unsigned char*>(buf);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x00000100000001B3ULL;
        }
        if (in.eof()) break;
    }
    return hex64(h);
}

/// Per-run provenance record written beside each command's primary output.
/// Data files themselves stay byte-deterministic; wall-clock timestamps live
/// only here.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::string config_hash;  // hex digest of the effective config text
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::pair<std::string, std::string>> inputs;   // path -> digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path -> digest
    std::vector<std::string> notes;

    static std::string now_iso8601() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    void add_input(const std::string& path) { inputs.emplace_back(path, digest_file(path)); }
    void add_output(const std::string& path) { outputs.emplace_back(path, digest_file(path)); }

    /// Deterministic `# key=value` lines embedded at the top of report files.
    std::vector<std::string> embedded_header(const std::string& schema_version) const {
        return {
            "tool=ricewatch " + tool_version,
            "seed=" + std::to_string(seed),
            "config_hash=" + (config_hash.empty() ? std::string("none") : config_hash),
            "schema=" + schema_version,
        };
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write manifest '" + path + "'");
        out << "{\n";
        out << "  \"command\": \"" << command << "\",\n";
        out << "  \"tool_version\": \"" << tool_version << "\",\n";
        out << "  \"config_hash\": \"" << config_hash << "\",\n";
        out << "  \"seed\": " << seed << ",\n";
        out << "  \"started_at\": \"" << started_at << "\",\n";
        out << "  \"finished_at\": \"" << finished_at << "\",\n";
        out << "  \"inputs\": {";
        for (std::size_t i = 0; i < inputs.size(); ++i)
            out << (i ? ", " : "") << "\"" << inputs[i].first << "\": \"" << inputs[i].second << "\"";
        out << "},\n";
        out << "  \"outputs\": {";
        for (std::size_t i = 0; i < outputs.size(); ++i)
            out << (i ? ", " : "") << "\"" << outputs[i].first << "\": \"" << outputs[i].second << "\"";
        out << "},\n";
        out << "  \"notes\": [";
        for (std::size_t i = 0; i < notes.size(); ++i)
            out << (i ? ", " : "") << "\"" << notes[i] << "\"";
        out << "]\n";
        out << "}\n";
    }
};

}  // namespace ricewatch
