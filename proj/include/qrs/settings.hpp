// Copyright 2026 The QRS Steering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Measurement-direction families {b_j}, j = 1..n.
 *
 * Direction file format: '#' comment lines, blank lines ignored, otherwise one
 * "x y z" triple per line. Line order defines j.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qrs/errors.hpp"
#include "qrs/linalg.hpp"

namespace qrs {

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kLoadNormalizeTolerance = 1e-6;

/// n unit measurement axes, pairwise distinct and non-antipodal.
class DirectionSet {
   public:
    explicit DirectionSet(std::vector<BlochVector> directions) : dirs_(std::move(directions)) {
        if (dirs_.empty()) {
            throw InvalidArgument("direction set must contain at least one direction");
        }
        for (std::size_t i = 0; i < dirs_.size(); ++i) {
            if (std::abs(dirs_[i].norm() - 1.0) > kUnitTolerance) {
                throw InvalidArgument("direction " + std::to_string(i + 1) + " is not a unit vector");
            }
            if (std::size_t other = clash(i); other != npos) {
                throw InvalidArgument("directions " + std::to_string(other + 1) + " and " +
                                      std::to_string(i + 1) + " are equal or antipodal");
            }
        }
    }

    int size() const {
        return static_cast<int>(dirs_.size());
    }
    /// Zero-based access; j = index + 1.
    const BlochVector &operator[](int index) const {
        return dirs_[static_cast<std::size_t>(index)];
    }
    const std::vector<BlochVector> &directions() const {
        return dirs_;
    }

    /// Index of an earlier direction equal or antipodal to direction i, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    static std::size_t first_clash(const std::vector<BlochVector> &dirs, std::size_t i) {
        for (std::size_t k = 0; k < i; ++k) {
            if ((dirs[k] - dirs[i]).norm() <= kUnitTolerance || (dirs[k] + dirs[i]).norm() <= kUnitTolerance) {
                return k;
            }
        }
        return npos;
    }

   private:
    std::size_t clash(std::size_t i) const {
        return first_clash(dirs_, i);
    }

    std::vector<BlochVector> dirs_;
};

namespace detail {

inline std::vector<BlochVector> normalize_all(std::vector<BlochVector> v) {
    for (auto &d : v) {
        d = d.normalized();
    }
    return v;
}

}  // namespace detail

inline const std::vector<std::string> &builtin_family_names() {
    static const std::vector<std::string> names = {"orthogonal-2", "orthogonal-3", "cube-4", "icosahedron-6",
                                                   "dodecahedron-10"};
    return names;
}

/// Setting count implied by a built-in family name, or -1 if unknown.
inline int builtin_family_size(std::string_view family) {
    if (family == "orthogonal-2") return 2;
    if (family == "orthogonal-3") return 3;
    if (family == "cube-4") return 4;
    if (family == "icosahedron-6") return 6;
    if (family == "dodecahedron-10") return 10;
    return -1;
}

/// Axes through antipodal vertex pairs of regular polyhedra, plus the coordinate axes.
inline DirectionSet builtin_directions(std::string_view family, int n) {
    int expected = builtin_family_size(family);
    if (expected < 0 || expected != n) {
        std::string msg = "unsupported direction family '" + std::string(family) + "' with n = " +
                          std::to_string(n) + "; supported:";
        for (const auto &name : builtin_family_names()) {
            msg += " " + name + " (n=" + std::to_string(builtin_family_size(name)) + ")";
        }
        throw InvalidArgument(msg);
    }
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    if (family == "orthogonal-2") {
        return DirectionSet({{1, 0, 0}, {0, 0, 1}});
    }
    if (family == "orthogonal-3") {
        return DirectionSet({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    }
    if (family == "cube-4") {
        return DirectionSet(detail::normalize_all({{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}}));
    }
    if (family == "icosahedron-6") {
        return DirectionSet(detail::normalize_all(
            {{0, 1, phi}, {0, 1, -phi}, {1, phi, 0}, {1, -phi, 0}, {phi, 0, 1}, {phi, 0, -1}}));
    }
    const double inv = 1.0 / phi;
    return DirectionSet(detail::normalize_all({{1, 1, 1},
                                               {1, 1, -1},
                                               {1, -1, 1},
                                               {-1, 1, 1},
                                               {0, inv, phi},
                                               {0, inv, -phi},
                                               {inv, phi, 0},
                                               {inv, -phi, 0},
                                               {phi, 0, inv},
                                               {phi, 0, -inv}}));
}

inline DirectionSet builtin_directions(std::string_view family) {
    return builtin_directions(family, builtin_family_size(family));
}

namespace detail {

/// True for blank and '#' comment lines.
inline bool skippable(std::string_view line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string_view::npos || line[pos] == '#';
}

}  // namespace detail

inline DirectionSet parse_directions(std::istream &in, const std::string &source = "<stream>") {
    std::vector<BlochVector> dirs;
    std::vector<int> line_of;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skippable(line)) {
            continue;
        }
        std::istringstream fields(line);
        BlochVector v;
        std::string extra;
        if (!(fields >> v.x >> v.y >> v.z) || (fields >> extra)) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'x y z', got '" + line + "'");
        }
        double norm = v.norm();
        if (std::abs(norm - 1.0) > kLoadNormalizeTolerance) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": direction norm " + std::to_string(norm) +
                             " is not 1");
        }
        dirs.push_back(v.normalized());
        line_of.push_back(lineno);
        if (auto k = DirectionSet::first_clash(dirs, dirs.size() - 1); k != DirectionSet::npos) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": direction equal or antipodal to line " +
                             std::to_string(line_of[k]));
        }
    }
    if (dirs.empty()) {
        throw ParseError(source + ": no directions found");
    }
    return DirectionSet(std::move(dirs));
}

inline DirectionSet load_directions(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open direction file '" + path + "'");
    }
    return parse_directions(in, path);
}

inline void write_directions(std::ostream &out, const DirectionSet &ds) {
    out << "# " << ds.size() << " measurement directions\n";
    char buf[96];
    for (const auto &d : ds.directions()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", d.x, d.y, d.z);
        out << buf;
    }
}

inline void save_directions(const std::string &path, const DirectionSet &ds) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write direction file '" + path + "'");
    }
    write_directions(out, ds);
}

}  // namespace qrs
