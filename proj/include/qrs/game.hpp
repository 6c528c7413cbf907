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
 * The quantum-refereed steering game.
 *
 * Each round the referee draws a setting j uniformly from n and a bit s = +-1
 * uniformly, tells Alice j, and hands Bob the qubit omega_{j,s}. Alice answers
 * a = +-1 or abstains; Bob answers b in {0, 1}. Answered rounds pay
 * (a s - r C) b, and the score is the average payoff over rounds where Alice
 * answered:
 *
 *     S = (1/2n) sum_{j,s} [ s <ab>_{j,s} - r C <b>_{j,s} ].
 *
 * Indices: settings are zero-based in this API (j = 0..n-1); outputs written
 * for people add one.
 */

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qrs/bounds.hpp"
#include "qrs/errors.hpp"
#include "qrs/linalg.hpp"
#include "qrs/settings.hpp"

namespace qrs {

/// Game configuration with uniform p(j) = 1/n and q(s) = 1/2.
class ScoreSpec {
   public:
    /// Computes C_n(eta_h). eta_h = 0 is accepted and takes the plateau value 1.
    static ScoreSpec make(DirectionSet ds, double eta_h, double r = 1.0) {
        if (!(eta_h >= 0.0 && eta_h <= 1.0)) {
            throw InvalidArgument("heralding efficiency must lie in [0, 1], got " + std::to_string(eta_h));
        }
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw InvalidArgument("r must be a finite non-negative number");
        }
        double c = eta_h > 0.0 ? steering_bound(ds, eta_h).value : 1.0;
        return ScoreSpec(std::move(ds), eta_h, r, c);
    }

    const DirectionSet &directions() const {
        return ds_;
    }
    int n() const {
        return ds_.size();
    }
    double eta_h() const {
        return eta_h_;
    }
    double r() const {
        return r_;
    }
    /// C_n(eta_h)
    double bound() const {
        return bound_;
    }
    /// C_n at another heralding rate, reusing the cached D-table.
    double bound_at(double eta) const {
        return eta > 0.0 ? steering_bound(ds_, std::min(eta, 1.0)).value : 1.0;
    }
    ScoreSpec with_r(double r) const {
        return make(ds_, eta_h_, r);
    }

   private:
    ScoreSpec(DirectionSet ds, double eta_h, double r, double bound)
        : ds_(std::move(ds)), eta_h_(eta_h), r_(r), bound_(bound) {
    }

    DirectionSet ds_;
    double eta_h_;
    double r_;
    double bound_;
};

/// (a s - r c) b
constexpr double payoff(int a, int b, int s, double r, double c) {
    return (a * s - r * c) * b;
}

namespace preparation {

/// omega_{j,s} = (I + s b_j . sigma) / 2
struct Exact {};
/// omega_{j,s} = (I + v s b_j . sigma) / 2
struct Visibility {
    double v = 1.0;
};
/// omega_{j,s} = (I + s u . sigma) / 2 for every j.
struct FixedState {
    BlochVector u;
};
/// omega_{j,s} = (I + n_{j,s} . sigma) / 2 from a tomography report.
struct Report {
    std::shared_ptr<const PreparationReport> report;
};

}  // namespace preparation

using PreparationModel =
    std::variant<preparation::Exact, preparation::Visibility, preparation::FixedState, preparation::Report>;

/// Bloch vector n_{j,s} the referee actually delivers.
inline BlochVector prepared_vector(const PreparationModel &model, const DirectionSet &ds, int j, int s) {
    if (j < 0 || j >= ds.size()) {
        throw InvalidArgument("setting index " + std::to_string(j) + " outside 0.." + std::to_string(ds.size() - 1));
    }
    if (s != 1 && s != -1) {
        throw InvalidArgument("s must be +1 or -1");
    }
    return std::visit(
        [&](const auto &m) -> BlochVector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, preparation::Exact>) {
                return static_cast<double>(s) * ds[j];
            } else if constexpr (std::is_same_v<T, preparation::Visibility>) {
                if (m.v < 0.0 || m.v > 1.0) {
                    throw InvalidState("visibility must lie in [0, 1]");
                }
                return (m.v * s) * ds[j];
            } else if constexpr (std::is_same_v<T, preparation::FixedState>) {
                return static_cast<double>(s) * m.u;
            } else {
                if (!m.report || m.report->size() != ds.size()) {
                    throw InvalidArgument("preparation report does not match the direction set");
                }
                return m.report->at(j, s);
            }
        },
        model);
}

/// Tabulates the model as a report so the r-factor applies to every model.
inline PreparationReport as_report(const PreparationModel &model, const DirectionSet &ds) {
    std::vector<BlochVector> plus;
    std::vector<BlochVector> minus;
    for (int j = 0; j < ds.size(); ++j) {
        plus.push_back(prepared_vector(model, ds, j, +1));
        minus.push_back(prepared_vector(model, ds, j, -1));
    }
    return PreparationReport(std::move(plus), std::move(minus));
}

inline DensityMatrix referee_state(int j, int s, const DirectionSet &ds, const PreparationModel &model) {
    return state_from_bloch(prepared_vector(model, ds, j, s));
}

/// Bob's effective element for b = 1 on his shared qubit when he projects
/// (Bob, referee) onto (|00> + |11>)/sqrt2: <Phi+|(X (x) omega)|Phi+> = Tr[X omega^T]/2.
inline HermitianOp honest_bob_effective_povm(const DensityMatrix &omega) {
    if (omega.dim() != 2) {
        throw InvalidArgument("referee state must be a single qubit");
    }
    return 0.5 * omega.op().transpose();
}

struct JsTerm {
    int j = 0;
    int s = 1;
    /// <ab>_{j,s}, conditioned on Alice answering.
    double corr = 0.0;
    /// <b>_{j,s}, conditioned on Alice answering.
    double herald = 0.0;
};

struct ScoreBreakdown {
    std::vector<JsTerm> per_js;
    double total = 0.0;
    double alice_herald = 0.0;
};

/// (1/2n) sum_{j,s} [ s corr - r C herald ]
inline double total_score(const std::vector<JsTerm> &terms, int n, double r, double c) {
    double sum = 0.0;
    for (const auto &t : terms) {
        sum += t.s * t.corr - r * c * t.herald;
    }
    return sum / (2.0 * n);
}

/// Joint probabilities of (a = +1, b = 1) and (a = -1, b = 1) for honest players, given Alice answers.
struct HonestOutcome {
    double plus_b1 = 0.0;
    double minus_b1 = 0.0;
};

inline HonestOutcome honest_outcome(const DensityMatrix &rho_ab, const DirectionSet &ds, const PreparationModel &model,
                                    int j, int s, double eta_m) {
    HermitianOp bob = honest_bob_effective_povm(referee_state(j, s, ds, model));
    HermitianOp id = HermitianOp::identity(2);
    HermitianOp axis = pauli_dot(ds[j]);
    double p_plus = trace_product(rho_ab.op(), tensor(0.5 * (id + axis), bob));
    double p_minus = trace_product(rho_ab.op(), tensor(0.5 * (id - axis), bob));
    return {eta_m * p_plus, eta_m * p_minus};
}

/// Exact score for honest players sharing rho_ab.
///
/// Alice measures b_j . sigma and answers with probability eta_h (abstaining
/// otherwise); Bob's joint measurement succeeds with probability eta_m and he
/// reports b = 0 on failure. Alice's losses are independent of everything, so
/// conditioning on her answering leaves corr and herald unchanged.
inline ScoreBreakdown exact_honest_score(const DensityMatrix &rho_ab, const ScoreSpec &spec,
                                         const PreparationModel &model, double eta_m) {
    if (rho_ab.dim() != 4) {
        throw InvalidArgument("shared state must be a two-qubit density matrix");
    }
    if (!(eta_m >= 0.0 && eta_m <= 1.0)) {
        throw InvalidArgument("measurement efficiency must lie in [0, 1], got " + std::to_string(eta_m));
    }
    ScoreBreakdown out;
    for (int j = 0; j < spec.n(); ++j) {
        for (int s : {+1, -1}) {
            HonestOutcome p = honest_outcome(rho_ab, spec.directions(), model, j, s, eta_m);
            out.per_js.push_back({j, s, p.plus_b1 - p.minus_b1, p.plus_b1 + p.minus_b1});
        }
    }
    out.total = total_score(out.per_js, spec.n(), spec.r(), spec.bound());
    out.alice_herald = spec.eta_h();
    return out;
}

/// Alice's answer once Bob has forwarded his guess.
enum class Answer : std::int8_t { Minus = -1, Null = 0, Plus = 1 };

/// Local-hidden-state adversary with one-way Bob -> Alice communication.
///
/// Bob measures {mu (I + m.sigma), I - mu (I + m.sigma)} on omega_{j,s}, the
/// first outcome meaning guess sbar = +1, and forwards sbar. He reports b = 1
/// with probability report_weight[sbar]. Alice answers report_rule[sbar] when
/// j is favorable and abstains otherwise. Arrays are indexed by sbar: [0] is
/// +1, [1] is -1.
struct CheatStrategy {
    double mu = 0.0;
    BlochVector m;
    /// Bit j set: setting j is favorable.
    std::uint32_t favorable = 0;
    std::array<Answer, 2> report_rule{Answer::Plus, Answer::Minus};
    std::array<double, 2> report_weight{1.0, 1.0};

    int favorable_count() const {
        return std::popcount(favorable);
    }
    bool is_favorable(int j) const {
        return (favorable >> j) & 1u;
    }

    void validate(int n) const {
        double mn = m.norm();
        if (mn > 1.0 + numeric_policy().algebraic) {
            throw InvalidArgument("POVM direction norm exceeds 1");
        }
        if (mu < 0.0 || mu * (1.0 + mn) > 1.0 + numeric_policy().algebraic) {
            throw InvalidArgument("POVM weight mu must satisfy 0 <= mu <= 1/(1+|m|)");
        }
        if (n < 32 && (favorable >> n) != 0) {
            throw InvalidArgument("favorable set names a setting beyond n");
        }
        bool answers = report_rule[0] != Answer::Null || report_rule[1] != Answer::Null;
        if (answers && favorable == 0) {
            throw InvalidArgument("empty favorable set with a non-null report rule");
        }
        for (double g : report_weight) {
            if (g < 0.0 || g > 1.0) {
                throw InvalidArgument("report weight must lie in [0, 1]");
            }
        }
    }
};

struct CheatEvaluation {
    double score = 0.0;
    /// E[a s b | Alice answers]
    double corr = 0.0;
    /// E[b | Alice answers]
    double herald = 0.0;
    /// Fraction of rounds on which Alice answers.
    double induced_heralding = 0.0;
    /// C_n at the induced heralding.
    double bound = 1.0;
};

/// Probability Bob's guess is sbar = +1 on omega_{j,s}: Tr[mu (I + m.sigma) omega] = mu (1 + m.n_{j,s}).
inline double guess_plus_probability(const CheatStrategy &st, const BlochVector &prepared) {
    return std::clamp(st.mu * (1.0 + st.m.dot(prepared)), 0.0, 1.0);
}

/// Closed-form conditional score of a cheat, judged against C_n at the
/// heralding the cheat actually produces. For the exact model with
/// a = sbar and constant gamma this is (gamma/F) sum_{j in F} (2 mu m.b_j - r C).
inline CheatEvaluation evaluate_cheat(const CheatStrategy &strategy, const ScoreSpec &spec,
                                      const PreparationModel &model) {
    const int n = spec.n();
    strategy.validate(n);
    double valid = 0.0;
    double corr = 0.0;
    double herald = 0.0;
    for (int j = 0; j < n; ++j) {
        if (!strategy.is_favorable(j)) {
            continue;
        }
        for (int s : {+1, -1}) {
            double p_plus = guess_plus_probability(strategy, prepared_vector(model, spec.directions(), j, s));
            std::array<double, 2> p{p_plus, 1.0 - p_plus};
            for (int g = 0; g < 2; ++g) {
                int a = static_cast<int>(strategy.report_rule[g]);
                if (a == 0) {
                    continue;
                }
                valid += p[g];
                corr += p[g] * strategy.report_weight[g] * a * s;
                herald += p[g] * strategy.report_weight[g];
            }
        }
    }
    CheatEvaluation out;
    out.induced_heralding = valid / (2.0 * n);
    if (valid <= 0.0) {
        return out;
    }
    out.corr = corr / valid;
    out.herald = herald / valid;
    out.bound = spec.bound_at(out.induced_heralding);
    out.score = out.corr - spec.r() * out.bound * out.herald;
    return out;
}

inline double cheat_score(const CheatStrategy &strategy, const ScoreSpec &spec, const PreparationModel &model) {
    return evaluate_cheat(strategy, spec, model).score;
}

/// Vertices of a subdivided icosahedron on the unit sphere: 12, 42, 162, 642, ... points.
inline std::vector<BlochVector> icosphere(int level) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<BlochVector> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                                  {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                                  {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto &p : v) {
        p = p.normalized();
    }
    std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) {
                return it->second;
            }
            v.push_back((0.5 * (v[a] + v[b])).normalized());
            int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto &f : faces) {
            int ab = mid(f[0], f[1]);
            int bc = mid(f[1], f[2]);
            int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    return v;
}

/// Largest n accepted by cheat_search.
inline constexpr int kMaxCheatSettings = 9;
inline constexpr double kCertificateTolerance = 1e-9;

struct SearchGrid {
    /// Icosphere subdivision level; 3 gives 642 directions.
    int icosphere_level = 3;
    /// Points on [0, 1/(1+|m|)], endpoints included.
    int mu_points = 101;
    std::vector<double> m_norms{1.0, 0.5};
    /// Add +- the normalized signed subset sums of (n_{j+} - n_{j-})/2, where the analytic maximizers live.
    bool seed_directions = true;
};

struct CheatSearchResult {
    /// Best deterministic score, each strategy judged at its induced heralding.
    double supremum = 0.0;
    CheatStrategy best;
    CheatEvaluation best_eval;
    /// Best gamma == 1 score per |F| = k against r C_n(declared eta_h); entry 0 is 0.
    std::vector<double> per_size_best;
    /// Mixture program over per_size_best at the declared heralding.
    double mixture_supremum = 0.0;
    std::map<int, double> mixture_weights;
    bool certified = false;
    std::uint64_t strategies = 0;
    std::size_t directions = 0;
};

namespace detail {

inline std::vector<BlochVector> search_directions(const SearchGrid &grid, const ScoreSpec &spec,
                                                  const PreparationModel &model) {
    std::vector<BlochVector> dirs = icosphere(grid.icosphere_level);
    if (!grid.seed_directions) {
        return dirs;
    }
    const int n = spec.n();
    std::vector<BlochVector> half;
    for (int j = 0; j < n; ++j) {
        half.push_back(0.5 * (prepared_vector(model, spec.directions(), j, +1) -
                              prepared_vector(model, spec.directions(), j, -1)));
    }
    auto push = [&](const BlochVector &v) {
        if (v.norm() > 1e-12) {
            dirs.push_back(v.normalized());
            dirs.push_back(-v.normalized());
        }
    };
    if (n > 6) {
        for (const auto &h : half) {
            push(h);
        }
        return dirs;
    }
    // Signed subset sums with the first member fixed to +.
    int count = 1;
    for (int j = 0; j < n; ++j) {
        count *= 3;
    }
    for (int code = 1; code < count; ++code) {
        BlochVector sum;
        bool leading = true;
        bool canonical = true;
        for (int j = 0, c = code; j < n; ++j, c /= 3) {
            int digit = c % 3;
            if (digit == 0) {
                continue;
            }
            if (leading && digit == 2) {
                canonical = false;
                break;
            }
            leading = false;
            sum += (digit == 1 ? 1.0 : -1.0) * half[j];
        }
        if (canonical) {
            push(sum);
        }
    }
    return dirs;
}

}  // namespace detail

/// Exhaustive search over deterministic LHS cheats on a POVM grid.
///
/// For every POVM (direction, |m|, mu), nonempty favorable set, non-null report
/// rule and gamma in {0,1}^2 the closed-form score is evaluated. The certificate
/// passes when no deterministic strategy beats 0 at its own heralding and the
/// best gamma == 1 mixture at the declared heralding does not either.
inline CheatSearchResult cheat_search(const ScoreSpec &spec, const PreparationModel &model,
                                      const SearchGrid &grid = {}) {
    const int n = spec.n();
    if (n > kMaxCheatSettings) {
        throw SearchRefused("cheat search enumerates 2^n favorable sets and is capped at n <= " +
                            std::to_string(kMaxCheatSettings) + "; got n = " + std::to_string(n));
    }
    if (!(spec.eta_h() > 0.0)) {
        throw InvalidArgument("cheat search needs a positive declared heralding efficiency");
    }
    if (grid.mu_points < 2 || grid.m_norms.empty()) {
        throw InvalidArgument("search grid needs at least two mu points and one |m| value");
    }
    std::vector<BlochVector> plus(static_cast<std::size_t>(n));
    std::vector<BlochVector> minus(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        plus[j] = prepared_vector(model, spec.directions(), j, +1);
        minus[j] = prepared_vector(model, spec.directions(), j, -1);
    }
    const std::vector<BlochVector> dirs = detail::search_directions(grid, spec, model);
    const std::uint32_t subsets = std::uint32_t{1} << n;

    // r C_n(k/n) for deterministic strategies, r C_n(eta_h) for mixtures.
    std::vector<double> k_induced(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        k_induced[k] = spec.r() * spec.bound_at(static_cast<double>(k) / n);
    }
    const double k_declared = spec.r() * spec.bound();

    CheatSearchResult out;
    out.directions = dirs.size();
    out.per_size_best.assign(static_cast<std::size_t>(n) + 1, -std::numeric_limits<double>::infinity());
    out.per_size_best[0] = 0.0;
    bool have_best = false;

    constexpr std::array<std::array<Answer, 2>, 4> rules = {{{Answer::Plus, Answer::Minus},
                                                             {Answer::Minus, Answer::Plus},
                                                             {Answer::Plus, Answer::Plus},
                                                             {Answer::Minus, Answer::Minus}}};
    constexpr std::array<std::array<double, 2>, 4> gammas = {{{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}};

    std::vector<double> t1(subsets);
    std::vector<double> td(subsets);
    for (const auto &dir : dirs) {
        for (double norm : grid.m_norms) {
            const BlochVector m = norm * dir;
            const double mu_max = 1.0 / (1.0 + norm);
            // Per favorable set: T1 = sum s (m.n_{js}), Td = sum (m.n_{js}), built incrementally over bits.
            t1[0] = 0.0;
            td[0] = 0.0;
            for (std::uint32_t mask = 1; mask < subsets; ++mask) {
                int j = std::countr_zero(mask);
                std::uint32_t rest = mask & (mask - 1);
                double dp = m.dot(plus[j]);
                double dm = m.dot(minus[j]);
                t1[mask] = t1[rest] + dp - dm;
                td[mask] = td[rest] + dp + dm;
            }
            for (std::uint32_t mask = 1; mask < subsets; ++mask) {
                const int f = std::popcount(mask);
                const double two_f = 2.0 * f;
                const double t0 = two_f + td[mask];
                for (int mi = 0; mi < grid.mu_points; ++mi) {
                    const double mu = mu_max * mi / (grid.mu_points - 1);
                    // Sums over (j in F, s) of P(sbar=+) s, P(sbar=+), and their complements.
                    const double ps = mu * t1[mask];
                    const double p0 = mu * t0;
                    for (const auto &rule : rules) {
                        const double ap = static_cast<double>(rule[0]);
                        const double am = static_cast<double>(rule[1]);
                        for (const auto &gamma : gammas) {
                            const double corr = (gamma[0] * ap * ps - gamma[1] * am * ps) / two_f;
                            const double herald = (gamma[0] * p0 + gamma[1] * (two_f - p0)) / two_f;
                            const double score = corr - k_induced[f] * herald + 0.0;  // no -0 in reports
                            ++out.strategies;
                            if (!have_best || score > out.supremum) {
                                have_best = true;
                                out.supremum = score;
                                out.best = CheatStrategy{mu, m, mask, rule, gamma};
                            }
                            if (gamma[0] == 1.0 && gamma[1] == 1.0) {
                                double declared = corr - k_declared * herald;
                                if (declared > out.per_size_best[f]) {
                                    out.per_size_best[f] = declared;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.best_eval = evaluate_cheat(out.best, spec, model);
    MixtureResult mix = mixture_program(out.per_size_best, spec.eta_h());
    out.mixture_supremum = mix.value;
    out.mixture_weights = std::move(mix.weights);
    out.certified = out.supremum <= kCertificateTolerance && out.mixture_supremum <= kCertificateTolerance;
    return out;
}

}  // namespace qrs
