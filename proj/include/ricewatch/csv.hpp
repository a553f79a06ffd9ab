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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ricewatch/common.hpp"

namespace ricewatch {

/// Shortest round-trip decimal rendering of a double. Output parses back to
/// the identical bit pattern, which is what keeps file digests stable.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(context + ": bad numeric field '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(context + ": bad integer field '" + std::string(s) + "'");
    return v;
}

/// Splits one CSV record. Double-quoted fields are accepted on input;
/// writers in this project never emit them.
inline void split_csv_line(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
}

/// Line-oriented CSV reader. Lines starting with '#' are manifest/comment
/// lines and are skipped transparently.
class CsvReader {
public:
    explicit CsvReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open '" + path + "'");
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty() || line[0] == '#') continue;
            split_csv_line(line, header_);
            return;
        }
        throw InputError("'" + path + "': missing header row");
    }

    const std::vector<std::string>& header() const { return header_; }

    /// Index of a required column.
    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return i;
        throw InputError("'" + path_ + "': missing column '" + name + "'");
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty() || line[0] == '#') continue;
            split_csv_line(line, fields);
            if (fields.size() != header_.size())
                throw InputError(path_ + ":" + std::to_string(line_no_) +
                                 ": expected " + std::to_string(header_.size()) +
                                 " fields, got " + std::to_string(fields.size()));
            return true;
        }
        return false;
    }

    std::string context() const { return path_ + ":" + std::to_string(line_no_); }

private:
    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    long line_no_ = 0;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open '" + path + "' for writing");
    }

    /// Emits a '#'-prefixed manifest line ahead of the header.
    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void raw_line(const std::string& line) { out_ << line << '\n'; }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failure on '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace ricewatch
