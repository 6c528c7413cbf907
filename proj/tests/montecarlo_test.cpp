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

#include "qrs/montecarlo.hpp"

#include <set>

#include "gtest/gtest.h"

using namespace qrs;

namespace {

SimConfig honest_config(const std::string &family, double eta_h, double eta_m, std::uint64_t rounds,
                        std::uint64_t seed) {
    return SimConfig{ScoreSpec::make(builtin_directions(family), eta_h, 1.0), preparation::Exact{},
                     HonestPlayers{states::phi_plus(), eta_m}, rounds, seed, false};
}

bool within(double mean, double want, double se, double k = 5.0) {
    return std::abs(mean - want) <= k * se;
}

}  // namespace

TEST(Seeds, child_seeds_are_fixed_and_distinct) {
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(child_seed(1, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(child_seed(7, 3), splitmix64(7 + 4 * 0x9E3779B97F4A7C15ull));
}

TEST(Simulate, honest_maximally_entangled_orthogonal_two) {
    ScoreEstimate est = simulate(honest_config("orthogonal-2", 1.0, 1.0, 100000, 2026));
    EXPECT_TRUE(within(est.mean, 0.0732233, est.std_error)) << est.mean << " +- " << est.std_error;
    EXPECT_EQ(est.rounds_valid, 100000u);
    EXPECT_EQ(est.eta_h_hat, 1.0);
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_NEAR(est.bound, std::sqrt(0.5), 1e-12);
    std::uint64_t total = 0;
    for (const auto &c : est.per_js_counts) {
        total += c.valid;
        EXPECT_LE(c.b1, c.valid);
        EXPECT_LE(static_cast<std::uint64_t>(std::abs(c.ab_sum)), c.b1);
    }
    EXPECT_EQ(total, est.rounds_valid);
}

TEST(Simulate, is_bit_identical_for_equal_seeds) {
    SimConfig cfg = honest_config("cube-4", 0.7, 0.8, 20000, 11);
    ScoreEstimate a = simulate(cfg);
    ScoreEstimate b = simulate(cfg);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.rounds_valid, b.rounds_valid);
    for (std::size_t i = 0; i < a.per_js_counts.size(); ++i) {
        EXPECT_EQ(a.per_js_counts[i].ab_sum, b.per_js_counts[i].ab_sum);
    }
    cfg.seed = 12;
    EXPECT_NE(simulate(cfg).mean, a.mean);
}

TEST(Simulate, heralding_rate_is_binomial) {
    const std::uint64_t rounds = 50000;
    ScoreEstimate est = simulate(honest_config("orthogonal-3", 0.7, 1.0, rounds, 5));
    EXPECT_TRUE(within(est.eta_h_hat, 0.7, std::sqrt(0.7 * 0.3 / rounds)));
    EXPECT_LE(est.rounds_valid, est.rounds);
}

TEST(Simulate, cheats_match_closed_form) {
    DirectionSet o3 = builtin_directions("orthogonal-3");
    ScoreSpec spec = ScoreSpec::make(o3, 1.0, 1.0);
    CheatSearchResult best = cheat_search(spec, preparation::Exact{});
    std::vector<CheatStrategy> strategies = {
        best.best,
        {0.3, {0.0, 0.6, 0.8}, 0b101, {Answer::Plus, Answer::Null}, {1.0, 0.5}},
        {0.45, o3[1], 0b111, {Answer::Minus, Answer::Minus}, {0.2, 0.9}},
    };
    std::vector<PreparationModel> models = {preparation::Exact{}, preparation::Visibility{0.8}};
    std::uint64_t seed = 100;
    for (const auto &st : strategies) {
        for (const auto &model : models) {
            double want = cheat_score(st, spec, model);
            ScoreEstimate est = simulate(SimConfig{spec, model, CheatPlayers{st}, 100000, seed++, false});
            EXPECT_TRUE(within(est.mean, want, est.std_error)) << est.mean << " vs " << want;
            EXPECT_NEAR(est.eta_h_hat, evaluate_cheat(st, spec, model).induced_heralding, 0.01);
        }
    }
}

TEST(Simulate, statistical_consistency_over_many_seeds) {
    SimConfig honest = honest_config("orthogonal-3", 0.8, 0.6, 4000, 0);
    double honest_exact = exact_honest_score(states::phi_plus(), honest.spec, preparation::Exact{}, 0.6).total;
    CheatStrategy st{0.4, {0.6, 0.0, 0.8}, 0b011, {Answer::Plus, Answer::Minus}, {1.0, 1.0}};
    SimConfig cheat{honest.spec, preparation::Exact{}, CheatPlayers{st}, 4000, 0, false};
    double cheat_exact = cheat_score(st, honest.spec, preparation::Exact{});
    int honest_ok = 0;
    int cheat_ok = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        honest.seed = cheat.seed = child_seed(77, i);
        ScoreEstimate h = simulate(honest);
        ScoreEstimate c = simulate(cheat);
        honest_ok += within(h.mean, honest_exact, h.std_error);
        cheat_ok += within(c.mean, cheat_exact, c.std_error);
    }
    EXPECT_GE(honest_ok, 99);
    EXPECT_GE(cheat_ok, 99);
}

TEST(Simulate, errors) {
    EXPECT_THROW(simulate(honest_config("orthogonal-2", 0.0, 1.0, 1000, 1)), NoValidRounds);
    EXPECT_THROW(simulate(honest_config("orthogonal-2", 1.0, 1.0, 0, 1)), InvalidArgument);
    EXPECT_THROW(simulate(honest_config("orthogonal-2", 1.0, 1.5, 10, 1)), InvalidArgument);
}

TEST(Sweep, heralding_threshold_flips_sign) {
    SimConfig base = honest_config("orthogonal-2", 1.0, 1.0, 40000, 3);
    auto rows = sweep(base, SweepAxis::EtaH, {0.4, 0.6, 0.8, 1.0});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto &row : rows) ASSERT_TRUE(row.estimate) << row.error;
    EXPECT_LE(rows[0].estimate->mean, 0.0);
    EXPECT_EQ(rows[0].estimate->bound, 1.0);
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_GT(rows[i].estimate->mean, 0.0);
        double eta = std::get<double>(rows[i].value);
        EXPECT_EQ(rows[i].estimate->bound, steering_bound(base.spec.directions(), eta).value);
        EXPECT_EQ(rows[i].seed, child_seed(3, i));
        EXPECT_EQ(rows[i].estimate->seed, rows[i].seed);
    }
}

TEST(Sweep, bob_loss_ratios) {
    SimConfig base = honest_config("orthogonal-2", 1.0, 1.0, 100000, 9);
    auto rows = sweep(base, SweepAxis::EtaM, {1.0, 0.5, 0.25});
    const auto &ref = *rows[0].estimate;
    for (std::size_t i = 1; i < 3; ++i) {
        double ratio = std::get<double>(rows[i].value);
        const auto &est = *rows[i].estimate;
        double se = std::hypot(est.std_error, ratio * ref.std_error);
        EXPECT_TRUE(within(est.mean, ratio * ref.mean, se)) << ratio;
    }
}

TEST(Sweep, r_tracks_model_when_requested) {
    SimConfig base{ScoreSpec::make(builtin_directions("orthogonal-2"), 1.0, 1.0), preparation::Visibility{0.9},
                   HonestPlayers{states::phi_plus(), 1.0}, 1000, 4, true};
    auto rows = sweep(base, SweepAxis::Visibility, {0.9, 0.8});
    EXPECT_NEAR(rows[0].estimate->r, 0.9, 1e-12);
    EXPECT_NEAR(rows[1].estimate->r, 0.8, 1e-12);
    base.r_from_model = false;
    EXPECT_EQ(sweep(base, SweepAxis::Visibility, {0.8})[0].estimate->r, 1.0);
}

TEST(Sweep, failures_do_not_stop_the_sweep) {
    SimConfig base = honest_config("orthogonal-2", 1.0, 1.0, 500, 1);
    EXPECT_TRUE(sweep(base, SweepAxis::EtaH, {}).empty());
    auto rows = sweep(base, SweepAxis::EtaH, {0.0, 1.7, 0.9});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_FALSE(rows[0].estimate);
    EXPECT_FALSE(rows[0].error.empty());
    EXPECT_FALSE(rows[1].estimate);
    EXPECT_TRUE(rows[2].estimate);
    auto fam = sweep(base, SweepAxis::Family, {std::string("orthogonal-3"), std::string("nope"), 0.5});
    EXPECT_TRUE(fam[0].estimate);
    EXPECT_FALSE(fam[1].estimate);
    EXPECT_FALSE(fam[2].estimate);
}
