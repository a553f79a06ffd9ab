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
#include <sstream>
#include <string>
#include <vector>

#include "ricewatch/common.hpp"
#include "ricewatch/csv.hpp"
#include "ricewatch/learn.hpp"

namespace ricewatch {

// Versioned structured-text model document. All doubles use shortest
// round-trip rendering, so serialize -> parse -> serialize is byte-stable.
//
//   ricewatch-model v1
//   kind GB
//   task SOWING
//   classes PTR DSR
//   schema fv1
//   n_features 76
//   seed 42
//   hp n_trees=200 max_depth=4 min_leaf=5 learning_rate=0.1 mtry=9
//   validation_f1 0.78
//   base <g doubles>            (GB only; RF emits an empty line tail)
//   train_loss <doubles>
//   groups 1
//   group 0 trees 200
//   tree 0 nodes 7
//   n 0 split 12 1.25 1 2
//   n 1 leaf 0.03 0.97
//   ...
//   end

inline void write_model_text(std::ostream& out, const EnsembleModel& m) {
    out << "ricewatch-model v1\n";
    out << "kind " << kind_name(m.kind) << "\n";
    out << "task " << task_name(m.task) << "\n";
    out << "classes";
    for (const auto& c : m.class_names) out << ' ' << c;
    out << "\n";
    out << "schema " << m.schema_version << "\n";
    out << "n_features " << m.n_features << "\n";
    out << "seed " << m.seed << "\n";
    out << "hp " << m.hp.to_string() << "\n";
    out << "validation_f1 " << format_double(m.validation_f1) << "\n";
    out << "base";
    for (const double b : m.base_scores) out << ' ' << format_double(b);
    out << "\n";
    out << "train_loss";
    for (const double l : m.train_loss) out << ' ' << format_double(l);
    out << "\n";
    out << "groups " << m.groups.size() << "\n";
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
        out << "group " << g << " trees " << m.groups[g].size() << "\n";
        for (std::size_t t = 0; t < m.groups[g].size(); ++t) {
            const Tree& tree = m.groups[g][t];
            out << "tree " << t << " nodes " << tree.nodes.size() << "\n";
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                const TreeNode& n = tree.nodes[i];
                if (n.feature >= 0) {
                    out << "n " << i << " split " << n.feature << ' '
                        << format_double(n.threshold) << ' ' << n.left << ' ' << n.right
                        << "\n";
                } else {
                    out << "n " << i << " leaf";
                    for (const double v : n.values) out << ' ' << format_double(v);
                    out << "\n";
                }
            }
        }
    }
    out << "end\n";
}

inline void save_model(const std::string& path, const EnsembleModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_model_text(out, m);
    out.close();
    if (!out) throw IoError("write failure on '" + path + "'");
}

inline std::string model_to_string(const EnsembleModel& m) {
    std::ostringstream ss;
    write_model_text(ss, m);
    return ss.str();
}

namespace detail {

class LineParser {
public:
    LineParser(std::istream& in, const std::string& origin) : in_(in), origin_(origin) {}

    std::vector<std::string> expect(const std::string& head) {
        std::string line;
        if (!std::getline(in_, line))
            throw InputError(origin_ + ": unexpected end of model file (wanted '" + head + "')");
        ++line_no_;
        std::vector<std::string> tok = tokens(line);
        if (tok.empty() || tok[0] != head)
            throw InputError(origin_ + ":" + std::to_string(line_no_) + ": expected '" + head +
                             "', got '" + line + "'");
        return tok;
    }

    static std::vector<std::string> tokens(const std::string& line) {
        std::vector<std::string> out;
        std::istringstream ss(line);
        std::string t;
        while (ss >> t) out.push_back(t);
        return out;
    }

    std::string context() const { return origin_ + ":" + std::to_string(line_no_); }

private:
    std::istream& in_;
    std::string origin_;
    long line_no_ = 0;
};

}  // namespace detail

inline EnsembleModel load_model_stream(std::istream& in, const std::string& origin) {
    detail::LineParser lp(in, origin);
    {
        const auto t = lp.expect("ricewatch-model");
        if (t.size() != 2 || t[1] != "v1")
            throw InputError(origin + ": unsupported model version");
    }
    EnsembleModel m;
    m.kind = parse_kind(lp.expect("kind").at(1));
    m.task = parse_task(lp.expect("task").at(1));
    {
        const auto t = lp.expect("classes");
        m.class_names.assign(t.begin() + 1, t.end());
        if (m.class_names.empty()) throw InputError(origin + ": empty class list");
    }
    m.schema_version = lp.expect("schema").at(1);
    m.n_features = static_cast<std::size_t>(parse_long(lp.expect("n_features").at(1), origin));
    m.seed = static_cast<std::uint64_t>(
        std::stoull(lp.expect("seed").at(1)));
    {
        const auto t = lp.expect("hp");
        for (std::size_t i = 1; i < t.size(); ++i) {
            const auto eq = t[i].find('=');
            if (eq == std::string::npos)
                throw InputError(lp.context() + ": bad hp token '" + t[i] + "'");
            const std::string key = t[i].substr(0, eq);
            const std::string value = t[i].substr(eq + 1);
            if (key == "n_trees") m.hp.n_trees = static_cast<int>(parse_long(value, origin));
            else if (key == "max_depth") m.hp.max_depth = static_cast<int>(parse_long(value, origin));
            else if (key == "min_leaf") m.hp.min_leaf = static_cast<int>(parse_long(value, origin));
            else if (key == "learning_rate") m.hp.learning_rate = parse_double(value, origin);
            else if (key == "mtry") m.hp.mtry = static_cast<int>(parse_long(value, origin));
            else throw InputError(lp.context() + ": unknown hp key '" + key + "'");
        }
    }
    m.validation_f1 = parse_double(lp.expect("validation_f1").at(1), origin);
    {
        const auto t = lp.expect("base");
        for (std::size_t i = 1; i < t.size(); ++i)
            m.base_scores.push_back(parse_double(t[i], origin));
    }
    {
        const auto t = lp.expect("train_loss");
        for (std::size_t i = 1; i < t.size(); ++i)
            m.train_loss.push_back(parse_double(t[i], origin));
    }
    const long n_groups = parse_long(lp.expect("groups").at(1), origin);
    m.groups.resize(static_cast<std::size_t>(n_groups));
    for (long g = 0; g < n_groups; ++g) {
        const auto gh = lp.expect("group");
        if (parse_long(gh.at(1), origin) != g)
            throw InputError(lp.context() + ": group index out of order");
        const long n_trees = parse_long(gh.at(3), origin);
        auto& trees = m.groups[static_cast<std::size_t>(g)];
        trees.resize(static_cast<std::size_t>(n_trees));
        for (long t = 0; t < n_trees; ++t) {
            const auto th = lp.expect("tree");
            const long n_nodes = parse_long(th.at(3), origin);
            Tree& tree = trees[static_cast<std::size_t>(t)];
            tree.nodes.resize(static_cast<std::size_t>(n_nodes));
            for (long i = 0; i < n_nodes; ++i) {
                const auto nl = lp.expect("n");
                if (parse_long(nl.at(1), origin) != i)
                    throw InputError(lp.context() + ": node index out of order");
                TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
                if (nl.at(2) == "split") {
                    node.feature = static_cast<int>(parse_long(nl.at(3), origin));
                    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= m.n_features)
                        throw InputError(lp.context() + ": split feature index out of range");
                    node.threshold = parse_double(nl.at(4), origin);
                    node.left = static_cast<int>(parse_long(nl.at(5), origin));
                    node.right = static_cast<int>(parse_long(nl.at(6), origin));
                    if (node.left < 0 || node.right < 0 || node.left >= n_nodes ||
                        node.right >= n_nodes)
                        throw InputError(lp.context() + ": child index out of range");
                } else if (nl.at(2) == "leaf") {
                    node.feature = -1;
                    for (std::size_t v = 3; v < nl.size(); ++v)
                        node.values.push_back(parse_double(nl[v], origin));
                } else {
                    throw InputError(lp.context() + ": bad node kind '" + nl.at(2) + "'");
                }
            }
        }
    }
    lp.expect("end");
    return m;
}

inline EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model '" + path + "'");
    return load_model_stream(in, path);
}

}  // namespace ricewatch
