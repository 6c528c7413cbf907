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
 * Seeded round-by-round simulation of the refereed steering game.
 *
 * Every round samples from exact single-round outcome distributions cached per
 * (j, s). The referee scores with r C_n evaluated at the heralding rate the
 * players actually produce: the declared eta_h for honest players, the induced
 * rate for a cheat.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qrs/bounds.hpp"
#include "qrs/errors.hpp"
#include "qrs/game.hpp"

namespace qrs {

struct HonestPlayers {
    DensityMatrix rho_ab;
    double eta_m = 1.0;
};

struct CheatPlayers {
    CheatStrategy strategy;
};

using Players = std::variant<HonestPlayers, CheatPlayers>;

struct SimConfig {
    ScoreSpec spec;
    PreparationModel model;
    Players players;
    std::uint64_t rounds = 0;
    std::uint64_t seed = 0;
    /// Recompute r from the preparation model whenever a sweep changes eta_h or the model.
    bool r_from_model = false;
};

struct JsCounts {
    int j = 0;
    int s = 1;
    std::uint64_t valid = 0;
    std::uint64_t b1 = 0;
    std::int64_t ab_sum = 0;
};

struct ScoreEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double eta_h_hat = 0.0;
    std::uint64_t rounds = 0;
    std::uint64_t rounds_valid = 0;
    std::uint64_t seed = 0;
    /// C_n used by the referee for the payoff.
    double bound = 0.0;
    double r = 0.0;
    std::vector<JsCounts> per_js_counts;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for sweep point `index`: splitmix64(base + (index + 1) * golden).
constexpr std::uint64_t child_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// r from the preparation model, against C_n at the configured heralding efficiency.
inline double model_r_factor(const ScoreSpec &spec, const PreparationModel &model) {
    if (!(spec.eta_h() > 0.0)) {
        throw InvalidArgument("model-derived r needs a positive heralding efficiency");
    }
    return r_factor(as_report(model, spec.directions()), spec.directions(),
                    steering_bound(spec.directions(), spec.eta_h()))
        .value;
}

namespace detail {

/// One possible round result with its probability.
struct Outcome {
    double p;
    bool alice_valid;
    int a;
    int b;
};

/// Portable generators: raw mt19937_64 words mapped by hand so results do not
/// depend on the standard library's distribution implementations.
struct RoundRng {
    std::mt19937_64 engine;

    explicit RoundRng(std::uint64_t seed) : engine(seed) {
    }
    int below(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(engine()) * static_cast<unsigned>(n)) >> 64);
    }
    int sign() {
        return (engine() >> 63) ? -1 : 1;
    }
    double uniform() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
};

inline std::vector<Outcome> honest_outcomes(const HonestPlayers &h, const ScoreSpec &spec,
                                            const PreparationModel &model, int j, int s) {
    HonestOutcome p = honest_outcome(h.rho_ab, spec.directions(), model, j, s, h.eta_m);
    double eta = spec.eta_h();
    double fail = std::max(0.0, 1.0 - p.plus_b1 - p.minus_b1);
    return {{1.0 - eta, false, 0, 0}, {eta * p.plus_b1, true, 1, 1}, {eta * p.minus_b1, true, -1, 1},
            {eta * fail, true, 0, 0}};
}

inline std::vector<Outcome> cheat_outcomes(const CheatStrategy &st, const ScoreSpec &spec,
                                           const PreparationModel &model, int j, int s) {
    if (!st.is_favorable(j)) {
        return {{1.0, false, 0, 0}};
    }
    double p_plus = guess_plus_probability(st, prepared_vector(model, spec.directions(), j, s));
    std::array<double, 2> p{p_plus, 1.0 - p_plus};
    std::vector<Outcome> out;
    for (int g = 0; g < 2; ++g) {
        int a = static_cast<int>(st.report_rule[g]);
        if (a == 0) {
            out.push_back({p[g], false, 0, 0});
            continue;
        }
        double gamma = st.report_weight[g];
        out.push_back({p[g] * gamma, true, a, 1});
        out.push_back({p[g] * (1.0 - gamma), true, a, 0});
    }
    return out;
}

}  // namespace detail

/// Plays cfg.rounds independent rounds and estimates the conditional score.
inline ScoreEstimate simulate(const SimConfig &cfg) {
    if (cfg.rounds == 0) {
        throw InvalidArgument("rounds must be positive");
    }
    const ScoreSpec &spec = cfg.spec;
    const int n = spec.n();
    double bound = spec.bound();
    if (const auto *cheat = std::get_if<CheatPlayers>(&cfg.players)) {
        cheat->strategy.validate(n);
        bound = evaluate_cheat(cheat->strategy, spec, cfg.model).bound;
    } else {
        const auto &honest = std::get<HonestPlayers>(cfg.players);
        if (honest.rho_ab.dim() != 4) {
            throw InvalidArgument("shared state must be a two-qubit density matrix");
        }
        if (!(honest.eta_m >= 0.0 && honest.eta_m <= 1.0)) {
            throw InvalidArgument("measurement efficiency must lie in [0, 1]");
        }
    }
    const double rc = spec.r() * bound;

    // Cumulative tables indexed by 2j + (s < 0).
    std::vector<std::vector<detail::Outcome>> table;
    for (int j = 0; j < n; ++j) {
        for (int s : {+1, -1}) {
            auto outcomes = std::visit(
                [&](const auto &pl) {
                    using T = std::decay_t<decltype(pl)>;
                    if constexpr (std::is_same_v<T, HonestPlayers>) {
                        return detail::honest_outcomes(pl, spec, cfg.model, j, s);
                    } else {
                        return detail::cheat_outcomes(pl.strategy, spec, cfg.model, j, s);
                    }
                },
                cfg.players);
            double acc = 0.0;
            for (auto &o : outcomes) {
                acc += o.p;
                o.p = acc;
            }
            table.push_back(std::move(outcomes));
        }
    }

    ScoreEstimate est;
    est.rounds = cfg.rounds;
    est.seed = cfg.seed;
    est.bound = bound;
    est.r = spec.r();
    for (int j = 0; j < n; ++j) {
        for (int s : {+1, -1}) {
            est.per_js_counts.push_back({j, s, 0, 0, 0});
        }
    }

    detail::RoundRng rng(cfg.seed);
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t valid = 0;
    for (std::uint64_t round = 0; round < cfg.rounds; ++round) {
        int j = rng.below(n);
        int s = rng.sign();
        std::size_t cell = 2 * static_cast<std::size_t>(j) + (s < 0 ? 1 : 0);
        const auto &outcomes = table[cell];
        double u = rng.uniform() * outcomes.back().p;
        std::size_t pick = 0;
        while (pick + 1 < outcomes.size() && u >= outcomes[pick].p) {
            ++pick;
        }
        const auto &o = outcomes[pick];
        if (!o.alice_valid) {
            continue;
        }
        auto &counts = est.per_js_counts[cell];
        ++counts.valid;
        counts.b1 += static_cast<std::uint64_t>(o.b);
        counts.ab_sum += o.a * o.b;
        double x = (o.a * s - rc) * o.b;
        ++valid;
        double delta = x - mean;
        mean += delta / static_cast<double>(valid);
        m2 += delta * (x - mean);
    }
    if (valid == 0) {
        throw NoValidRounds("no round had a valid answer from Alice in " + std::to_string(cfg.rounds) + " rounds");
    }
    est.rounds_valid = valid;
    est.mean = mean;
    est.std_error = valid > 1 ? std::sqrt(m2 / static_cast<double>(valid - 1) / static_cast<double>(valid)) : 0.0;
    est.eta_h_hat = static_cast<double>(valid) / static_cast<double>(cfg.rounds);
    return est;
}

enum class SweepAxis { EtaH, EtaM, Visibility, Family };

using SweepValue = std::variant<double, std::string>;

struct SweepRow {
    SweepValue value;
    std::uint64_t seed = 0;
    std::optional<ScoreEstimate> estimate;
    /// Set when this point failed; the sweep continues.
    std::string error;
};

/// Configuration for one sweep point, before simulation.
inline SimConfig sweep_point(const SimConfig &base, SweepAxis axis, const SweepValue &value, std::size_t index) {
    auto number = [&]() {
        if (const auto *d = std::get_if<double>(&value)) {
            return *d;
        }
        throw InvalidArgument("sweep axis needs numeric values");
    };
    SimConfig cfg = base;
    cfg.seed = child_seed(base.seed, index);
    DirectionSet ds = base.spec.directions();
    double eta_h = base.spec.eta_h();
    switch (axis) {
        case SweepAxis::EtaH:
            eta_h = number();
            break;
        case SweepAxis::EtaM: {
            auto *honest = std::get_if<HonestPlayers>(&cfg.players);
            if (!honest) {
                throw InvalidArgument("eta_m sweep applies to honest players only");
            }
            honest->eta_m = number();
            break;
        }
        case SweepAxis::Visibility:
            cfg.model = preparation::Visibility{number()};
            break;
        case SweepAxis::Family: {
            const auto *name = std::get_if<std::string>(&value);
            if (!name) {
                throw InvalidArgument("family sweep needs family names");
            }
            if (!std::holds_alternative<HonestPlayers>(cfg.players)) {
                throw InvalidArgument("family sweep applies to honest players only");
            }
            if (std::holds_alternative<preparation::Report>(cfg.model)) {
                throw InvalidArgument("family sweep cannot reuse a preparation report tied to one family");
            }
            ds = builtin_directions(*name);
            break;
        }
    }
    cfg.spec = ScoreSpec::make(std::move(ds), eta_h, base.spec.r());
    if (base.r_from_model) {
        cfg.spec = cfg.spec.with_r(model_r_factor(cfg.spec, cfg.model));
    }
    return cfg;
}

/// One estimate per value; a failing point records its error and the sweep goes on.
inline std::vector<SweepRow> sweep(const SimConfig &base, SweepAxis axis, const std::vector<SweepValue> &values) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row{values[i], child_seed(base.seed, i), std::nullopt, {}};
        try {
            row.estimate = simulate(sweep_point(base, axis, values[i], i));
        } catch (const Error &e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace qrs
