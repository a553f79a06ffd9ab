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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/csv.hpp"

namespace ricewatch {

/// INI-style configuration: `[section]` headers (dots allowed for nesting,
/// e.g. `[template.dsr]`), `key = value` pairs, `#`/`;` comments. Errors are
/// reported with file:line anchors.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str(), path);
    }

    static Config parse_text(const std::string& text, const std::string& origin = "<config>") {
        Config cfg;
        cfg.raw_text_ = text;
        std::istringstream in(text);
        std::string line;
        std::string section;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            // inline comments: values cannot contain '#' or ';'
            const auto comment = line.find_first_of("#;");
            if (comment != std::string::npos) line.erase(comment);
            std::string s = trim(line);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(line_no) +
                                      ": unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(line_no) +
                                      ": empty section name");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.values_[section + "/" + key] = value;
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "/" + key) != 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        const auto it = values_.find(section + "/" + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        const auto it = values_.find(section + "/" + key);
        if (it == values_.end()) return fallback;
        try {
            return parse_double(it->second, section + "." + key);
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }
    }

    long get_long(const std::string& section, const std::string& key, long fallback) const {
        const auto it = values_.find(section + "/" + key);
        if (it == values_.end()) return fallback;
        try {
            return parse_long(it->second, section + "." + key);
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        const auto it = values_.find(section + "/" + key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError(section + "." + key + ": expected boolean, got '" + v + "'");
    }

    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const {
        const auto it = values_.find(section + "/" + key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    const std::string& raw_text() const { return raw_text_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, std::string> values_;
    std::string raw_text_;
};

}  // namespace ricewatch
