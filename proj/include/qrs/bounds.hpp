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
 * Local-hidden-state bounds for the loss-tolerant steering game.
 *
 * D_n(k) is the best average correlation an unsteerable strategy reaches when
 * Alice answers on exactly k of the n settings:
 *
 *     D_n(k) = max_{|F| = k, A_j = +-1} | sum_{j in F} A_j b_j | / k.
 *
 * The heralding-dependent bound C_n(eta) mixes deterministic answer sets so that
 * Alice's answer frequency equals eta:
 *
 *     C_n(eta) = max_w (1 / (n eta)) sum_k w_k k D_n(k)
 *     s.t. sum_k w_k = 1, sum_k w_k k / n = eta, w_k >= 0, k = 0..n.
 *
 * The program has two equality constraints, so an optimal w has at most two
 * nonzero entries and scanning all bracketing pairs (k1, k2) is exact.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qrs/errors.hpp"
#include "qrs/linalg.hpp"
#include "qrs/settings.hpp"

namespace qrs {

/// Largest n for which D_n(k) is enumerated (3^n / 2 signed subsets).
inline constexpr int kMaxBoundSettings = 16;
/// Largest n for which the r-factor sign assignment is enumerated.
inline constexpr int kMaxRFactorSettings = 24;

struct MixtureResult {
    double value = 0.0;
    /// Nonzero weights only, keyed by k.
    std::map<int, double> weights;
};

/// Maximizes (1/(n eta)) sum_k w_k k values[k] over mixtures with heralding eta.
///
/// `values` holds one entry per k = 0..n. Ties go to the first bracketing pair
/// in (k1, k2) lexicographic order.
inline MixtureResult mixture_program(std::span<const double> values, double eta) {
    if (values.size() < 2) {
        throw InvalidArgument("mixture program needs values for k = 0..n with n >= 1");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("heralding efficiency must lie in (0, 1], got " + std::to_string(eta));
    }
    const int n = static_cast<int>(values.size()) - 1;
    double target = eta * n;
    // Snap to an integer answer count when eta sits on the grid k/n.
    double nearest = std::round(target);
    if (nearest > 0.0 && std::abs(target - nearest) <= 1e-9) {
        target = nearest;
    }
    MixtureResult best;
    bool found = false;
    for (int k1 = 0; k1 <= n; ++k1) {
        if (k1 > target) {
            break;
        }
        for (int k2 = k1; k2 <= n; ++k2) {
            if (k2 < target) {
                continue;
            }
            double w2 = k2 == k1 ? 1.0 : (target - k1) / (k2 - k1);
            double w1 = 1.0 - w2;
            double objective = (w1 * k1 * values[k1] + w2 * k2 * values[k2]) / target;
            if (!found || objective > best.value) {
                found = true;
                best.value = objective;
                best.weights.clear();
                if (k1 != k2 && w1 > 0.0) {
                    best.weights[k1] = w1;
                }
                if (w2 > 0.0) {
                    best.weights[k2] = w2;
                }
            }
        }
    }
    return best;
}

/// D_n(k) for k = 0..n by enumerating every signed subset once (global sign fixed).
inline std::vector<double> compute_d_table(const DirectionSet &ds) {
    const int n = ds.size();
    if (n > kMaxBoundSettings) {
        throw SearchRefused("exhaustive bound enumeration supports n <= " + std::to_string(kMaxBoundSettings) +
                            ", got n = " + std::to_string(n));
    }
    std::vector<double> best_sq(static_cast<std::size_t>(n) + 1, 0.0);
    // Depth-first walk: each setting is skipped, added, or subtracted. The first
    // chosen setting always enters with + to quotient out the global sign.
    struct Frame {
        int j;
        int k;
        BlochVector sum;
    };
    std::vector<Frame> stack{{0, 0, {}}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.j == n) {
            double sq = f.sum.dot(f.sum);
            if (sq > best_sq[f.k]) {
                best_sq[f.k] = sq;
            }
            continue;
        }
        const BlochVector &b = ds[f.j];
        stack.push_back({f.j + 1, f.k, f.sum});
        stack.push_back({f.j + 1, f.k + 1, f.sum + b});
        if (f.k > 0) {
            stack.push_back({f.j + 1, f.k + 1, f.sum - b});
        }
    }
    std::vector<double> table(best_sq.size(), 0.0);
    for (int k = 1; k <= n; ++k) {
        table[k] = std::sqrt(best_sq[k]) / k;
    }
    return table;
}

namespace detail {

inline std::string direction_key(const DirectionSet &ds) {
    std::string key(ds.size() * sizeof(BlochVector), '\0');
    auto *out = key.data();
    for (const auto &d : ds.directions()) {
        std::memcpy(out, &d, sizeof d);
        out += sizeof d;
    }
    return key;
}

}  // namespace detail

/// D-table memoized per direction set; safe to call concurrently.
inline std::shared_ptr<const std::vector<double>> cached_d_table(const DirectionSet &ds) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const std::vector<double>>> cache;
    std::string key = detail::direction_key(ds);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    auto table = std::make_shared<const std::vector<double>>(compute_d_table(ds));
    std::lock_guard lock(mu);
    return cache.emplace(std::move(key), std::move(table)).first->second;
}

inline double d_nk(const DirectionSet &ds, int k) {
    if (k < 0 || k > ds.size()) {
        throw InvalidArgument("k = " + std::to_string(k) + " outside 0.." + std::to_string(ds.size()));
    }
    return (*cached_d_table(ds))[static_cast<std::size_t>(k)];
}

struct BoundResult {
    int n = 0;
    double eta_h = 0.0;
    /// C_n(eta_h)
    double value = 0.0;
    std::vector<double> d_table;
    std::map<int, double> optimal_weights;
};

inline BoundResult steering_bound(const DirectionSet &ds, double eta_h) {
    if (!(eta_h > 0.0 && eta_h <= 1.0)) {
        throw InvalidArgument("heralding efficiency must lie in (0, 1], got " + std::to_string(eta_h));
    }
    auto table = cached_d_table(ds);
    MixtureResult mix = mixture_program(*table, eta_h);
    return BoundResult{ds.size(), eta_h, mix.value, *table, std::move(mix.weights)};
}

/// Referee's characterization of the states it actually sends: omega_{j,s} = (I + n_{j,s}.sigma)/2.
class PreparationReport {
   public:
    /// plus[j] = n_{j,+1}, minus[j] = n_{j,-1}, zero-based j.
    PreparationReport(std::vector<BlochVector> plus, std::vector<BlochVector> minus)
        : plus_(std::move(plus)), minus_(std::move(minus)) {
        if (plus_.empty() || plus_.size() != minus_.size()) {
            throw InvalidArgument("preparation report needs one vector per (j, s) for every j");
        }
        for (std::size_t j = 0; j < plus_.size(); ++j) {
            for (int s : {+1, -1}) {
                double norm = at(static_cast<int>(j), s).norm();
                if (norm > 1.0 + kUnitTolerance) {
                    throw InvalidState("prepared vector (j=" + std::to_string(j + 1) + ", s=" + std::to_string(s) +
                                       ") has norm " + std::to_string(norm) + " > 1");
                }
            }
        }
    }

    int size() const {
        return static_cast<int>(plus_.size());
    }
    /// Zero-based j, s in {+1, -1}.
    const BlochVector &at(int j, int s) const {
        return s > 0 ? plus_[static_cast<std::size_t>(j)] : minus_[static_cast<std::size_t>(j)];
    }

   private:
    std::vector<BlochVector> plus_;
    std::vector<BlochVector> minus_;
};

/// Parses "j s x y z" lines (j one-based, s in {+1,-1}); all 2n pairs required.
inline PreparationReport parse_preparation_report(std::istream &in, int n, const std::string &source = "<stream>") {
    std::vector<std::optional<BlochVector>> plus(static_cast<std::size_t>(n));
    std::vector<std::optional<BlochVector>> minus(static_cast<std::size_t>(n));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skippable(line)) {
            continue;
        }
        auto where = source + ":" + std::to_string(lineno) + ": ";
        std::istringstream fields(line);
        int j = 0;
        int s = 0;
        BlochVector v;
        std::string extra;
        if (!(fields >> j >> s >> v.x >> v.y >> v.z) || (fields >> extra)) {
            throw ParseError(where + "expected 'j s x y z', got '" + line + "'");
        }
        if (j < 1 || j > n) {
            throw ParseError(where + "setting j = " + std::to_string(j) + " outside 1.." + std::to_string(n));
        }
        if (s != 1 && s != -1) {
            throw ParseError(where + "s must be +1 or -1, got " + std::to_string(s));
        }
        if (v.norm() > 1.0 + kUnitTolerance) {
            throw ParseError(where + "vector norm " + std::to_string(v.norm()) + " outside the Bloch ball");
        }
        auto &slot = (s > 0 ? plus : minus)[static_cast<std::size_t>(j - 1)];
        if (slot) {
            throw ParseError(where + "duplicate entry for (j=" + std::to_string(j) + ", s=" + std::to_string(s) + ")");
        }
        slot = v;
    }
    std::vector<BlochVector> p;
    std::vector<BlochVector> m;
    for (int j = 0; j < n; ++j) {
        for (int s : {+1, -1}) {
            if (!(s > 0 ? plus : minus)[static_cast<std::size_t>(j)]) {
                throw ParseError(source + ": missing entry for (j=" + std::to_string(j + 1) +
                                 ", s=" + (s > 0 ? "+1" : "-1") + ")");
            }
        }
        p.push_back(*plus[static_cast<std::size_t>(j)]);
        m.push_back(*minus[static_cast<std::size_t>(j)]);
    }
    return PreparationReport(std::move(p), std::move(m));
}

inline PreparationReport load_preparation_report(const std::string &path, int n) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open preparation report '" + path + "'");
    }
    return parse_preparation_report(in, n, path);
}

inline void write_preparation_report(std::ostream &out, const PreparationReport &prep) {
    out << "# j s x y z\n";
    char buf[128];
    for (int j = 0; j < prep.size(); ++j) {
        for (int s : {+1, -1}) {
            const auto &v = prep.at(j, s);
            std::snprintf(buf, sizeof buf, "%d %+d %.17g %.17g %.17g\n", j + 1, s, v.x, v.y, v.z);
            out << buf;
        }
    }
}

struct RFactorResult {
    double value = 0.0;
    /// Maximizing a_j, one per setting.
    std::vector<int> signs;
};

/// Preparation-imperfection factor multiplying the steering bound:
///
///     r = max_a [ -<A,B> + sqrt(<A,B>^2 + <A,A>(n^2 - <B,B>)) ] / [ C (n^2 - <B,B>) ]
///     A = sum_j a_j (n_{j+} - n_{j-}) / 2,   B = sum_j (n_{j+} + n_{j-}) / 2.
///
/// Sign assignments are enumerated with a_j = +1 before -1 (bit j of the counter);
/// the first maximizer wins.
inline RFactorResult r_factor(const PreparationReport &prep, const DirectionSet &ds, const BoundResult &bound) {
    const int n = ds.size();
    if (prep.size() != n) {
        throw InvalidArgument("preparation report covers " + std::to_string(prep.size()) + " settings, expected " +
                              std::to_string(n));
    }
    if (n > kMaxRFactorSettings) {
        throw SearchRefused("r-factor enumeration supports n <= " + std::to_string(kMaxRFactorSettings));
    }
    if (!(bound.value > 0.0)) {
        throw InvalidArgument("steering bound must be positive");
    }
    std::vector<BlochVector> half_diff(static_cast<std::size_t>(n));
    BlochVector b_vec;
    for (int j = 0; j < n; ++j) {
        half_diff[j] = 0.5 * (prep.at(j, +1) - prep.at(j, -1));
        b_vec += 0.5 * (prep.at(j, +1) + prep.at(j, -1));
    }
    const double n_sq = static_cast<double>(n) * n;
    const double gap = n_sq - b_vec.dot(b_vec);
    if (gap <= numeric_policy().algebraic * n_sq) {
        throw DegeneratePreparation("<B,B> reaches n^2: every prepared state coincides, r is undefined");
    }
    RFactorResult best;
    best.value = -1.0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        BlochVector a_vec;
        for (int j = 0; j < n; ++j) {
            a_vec += ((mask >> j) & 1 ? -1.0 : 1.0) * half_diff[j];
        }
        double ab = a_vec.dot(b_vec);
        double value = (-ab + std::sqrt(ab * ab + a_vec.dot(a_vec) * gap)) / (bound.value * gap);
        if (value > best.value) {
            best.value = value;
            best.signs.assign(static_cast<std::size_t>(n), 1);
            for (int j = 0; j < n; ++j) {
                if ((mask >> j) & 1) {
                    best.signs[j] = -1;
                }
            }
        }
    }
    return best;
}

}  // namespace qrs
