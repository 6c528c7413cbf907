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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "qrs/qrs.hpp"

using namespace qrs;

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kTableTol = 1e-12;
constexpr double kThresholdGap = 0.02;
constexpr double kBelowOne = 1e-6;
constexpr double kClosedFormTol = 1e-10;
constexpr double kCertTol = 1e-9;
constexpr double kTightness = -1e-3;
constexpr double kRTol = 1e-9;
constexpr double kScalingTol = 1e-12;
constexpr double kSigmas = 5.0;
constexpr int kSeeds = 100;
constexpr int kSeedsRequired = 99;
constexpr std::uint64_t kRounds = 100000;
constexpr int kStrategies = 1000;
constexpr double kWeightTol = 1e-12;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string &what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Check bound_values() {
    Check c;
    double c2 = steering_bound(builtin_directions("orthogonal-2"), 1.0).value;
    double c3 = steering_bound(builtin_directions("orthogonal-3"), 1.0).value;
    c.require(std::abs(c2 - std::sqrt(0.5)) <= kBoundTol, fmt("C_2(1) = %.12g", c2));
    c.require(std::abs(c3 - 1.0 / std::sqrt(3.0)) <= kBoundTol, fmt("C_3(1) = %.12g", c3));
    for (const auto &name : builtin_family_names()) {
        DirectionSet ds = builtin_directions(name);
        if (ds.size() > 6) continue;
        auto mine = compute_d_table(ds);
        auto ref = oracle::d_table_unpruned(ds);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            c.require(std::abs(mine[k] - ref[k]) <= kTableTol, name + ": D_k differs from unpruned enumeration");
        }
    }
    if (c.ok) c.detail = fmt("C_2(1)=%.10f C_3(1)=%.10f, d_table matches oracle for n<=6", c2, c3);
    return c;
}

Check threshold() {
    Check c;
    int points = 0;
    for (const auto &name : builtin_family_names()) {
        DirectionSet ds = builtin_directions(name);
        const double inv = 1.0 / ds.size();
        for (int i = 1; i <= 100; ++i) {
            double eta = i / 100.0;
            double value = steering_bound(ds, eta).value;
            if (eta <= inv + 1e-12) {
                c.require(std::abs(value - 1.0) <= kTableTol, name + fmt(": C(%.2f) = %.15g, expected 1", eta, value));
            } else if (eta >= inv + kThresholdGap - 1e-12) {
                c.require(value < 1.0 - kBelowOne, name + fmt(": C(%.2f) = %.15g not below 1", eta, value));
            }
            ++points;
        }
    }
    if (c.ok) c.detail = fmt("%g grid points over all built-in families", points);
    return c;
}

Check honest_closed_form() {
    Check c;
    double worst = 0.0;
    for (const auto &name : {"orthogonal-2", "orthogonal-3", "cube-4", "icosahedron-6"}) {
        DirectionSet ds = builtin_directions(name);
        for (double eta = 1.0 / ds.size() + 0.05; eta <= 1.0 + 1e-12; eta += 0.05) {
            ScoreSpec spec = ScoreSpec::make(ds, std::min(eta, 1.0), 1.0);
            double got = exact_honest_score(states::phi_plus(), spec, preparation::Exact{}, 1.0).total;
            double want = (1.0 - spec.bound()) / 4.0;
            double oracle = oracle::honest_score_8d(oracle::to_dense(states::phi_plus().op()), ds, 1.0, spec.bound(),
                                                    1.0, oracle::exact_preparation(ds));
            worst = std::max({worst, std::abs(got - want), std::abs(oracle - want)});
        }
    }
    c.require(worst <= kClosedFormTol, fmt("max deviation %.3g", worst));
    if (c.ok) c.detail = fmt("max |S - (1 - C)/4| = %.2g, 8-dim oracle agrees", worst);
    return c;
}

Check certificate() {
    Check c;
    std::string summary;
    for (const auto &name : {"orthogonal-2", "orthogonal-3"}) {
        ScoreSpec spec = ScoreSpec::make(builtin_directions(name), 1.0, 1.0);
        SearchGrid grid;
        CheatSearchResult res = cheat_search(spec, preparation::Exact{}, grid);
        // Nontrivial witness: the best cheat answering every setting meets C_n(1) exactly.
        double full_herald = res.per_size_best.back();
        c.require(res.directions >= 642 && grid.mu_points >= 101, std::string(name) + ": grid too coarse");
        c.require(res.supremum <= kCertTol, std::string(name) + fmt(": supremum %.3g", res.supremum));
        c.require(res.mixture_supremum <= kCertTol, std::string(name) + fmt(": mixture %.3g", res.mixture_supremum));
        c.require(res.supremum >= kTightness, std::string(name) + ": supremum below tightness floor");
        c.require(full_herald >= kTightness, std::string(name) + fmt(": best answering cheat %.3g", full_herald));
        if (!summary.empty()) summary += "; ";
        summary += std::string(name) + fmt(" sup=%.2g witness=%.2g ", res.supremum, full_herald);
        summary += "(" + std::to_string(res.strategies) + " strategies, " + std::to_string(res.directions) + " dirs)";
    }
    if (c.ok) c.detail = summary;
    return c;
}

Check r_consistency() {
    Check c;
    std::string summary;
    for (const auto &name : {"orthogonal-2", "orthogonal-3"}) {
        DirectionSet ds = builtin_directions(name);
        BoundResult bound = steering_bound(ds, 1.0);
        struct Case {
            std::string label;
            PreparationModel model;
            double expected;
        };
        std::vector<Case> cases = {
            {"perfect", preparation::Exact{}, 1.0},
            {"fixed-state", preparation::FixedState{ds[0]}, 1.0 / bound.value},
            {"visibility 0.9", preparation::Visibility{0.9}, 0.9},
            {"visibility 0.6", preparation::Visibility{0.6}, 0.6},
        };
        for (const auto &cs : cases) {
            double r = r_factor(as_report(cs.model, ds), ds, bound).value;
            c.require(std::abs(r - cs.expected) <= kRTol, std::string(name) + " " + cs.label + fmt(": r = %.12g", r));
            CheatSearchResult res = cheat_search(ScoreSpec::make(ds, 1.0, r), cs.model);
            c.require(res.certified && res.supremum <= kCertTol,
                      std::string(name) + " " + cs.label + fmt(": supremum %.3g with r", res.supremum));
        }
        summary += std::string(name) + " ok; ";
    }
    if (c.ok) c.detail = summary + "r = 1, 1/C_n(1), v and each r certifies (eta_h = 1)";
    return c;
}

Check bob_loss() {
    Check c;
    double worst = 0.0;
    std::vector<DensityMatrix> rhos = {states::phi_plus(), states::singlet(), states::werner(0.8), states::werner(0.4),
                                       states::product({0, 0, 1}, {0, 0, 1})};
    for (const auto &name : {"orthogonal-2", "orthogonal-3", "cube-4"}) {
        ScoreSpec spec = ScoreSpec::make(builtin_directions(name), 0.8, 1.0);
        for (const auto &rho : rhos) {
            double one = exact_honest_score(rho, spec, preparation::Exact{}, 1.0).total;
            for (int i = 0; i <= 10; ++i) {
                double eta_m = i / 10.0;
                double s = exact_honest_score(rho, spec, preparation::Exact{}, eta_m).total;
                worst = std::max(worst, std::abs(s - eta_m * one));
                if (i > 0 && std::abs(one) > kScalingTol) {
                    c.require((s > 0) == (one > 0), std::string(name) + ": sign changed with eta_m");
                }
            }
        }
    }
    c.require(worst <= kScalingTol, fmt("max |S(eta_m) - eta_m S(1)| = %.3g", worst));
    if (c.ok) c.detail = fmt("max |S(eta_m) - eta_m S(1)| = %.2g, signs stable", worst);
    return c;
}

Check monte_carlo() {
    Check c;
    ScoreSpec spec = ScoreSpec::make(builtin_directions("orthogonal-2"), 1.0, 1.0);
    double exact = exact_honest_score(states::phi_plus(), spec, preparation::Exact{}, 1.0).total;
    SimConfig cfg{spec, preparation::Exact{}, HonestPlayers{states::phi_plus(), 1.0}, kRounds, 0, false};
    int inside = 0;
    for (int i = 0; i < kSeeds; ++i) {
        cfg.seed = child_seed(20261016, static_cast<std::uint64_t>(i));
        ScoreEstimate est = simulate(cfg);
        inside += std::abs(est.mean - exact) <= kSigmas * est.std_error;
        if (i == 0) {
            ScoreEstimate again = simulate(cfg);
            bool same = again.mean == est.mean && again.std_error == est.std_error &&
                        again.rounds_valid == est.rounds_valid && again.eta_h_hat == est.eta_h_hat;
            for (std::size_t k = 0; k < est.per_js_counts.size(); ++k) {
                same = same && again.per_js_counts[k].ab_sum == est.per_js_counts[k].ab_sum &&
                       again.per_js_counts[k].b1 == est.per_js_counts[k].b1;
            }
            c.require(same, "identical seed gave a different estimate");
        }
    }
    c.require(inside >= kSeedsRequired, fmt("only %g of 100 seeds within 5 sigma", inside));
    if (c.ok) c.detail = fmt("%g/100 seeds within 5 sigma of %.7f, reruns bit-identical", inside, exact);
    return c;
}

Check weighted_reports() {
    Check c;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Answer answers[] = {Answer::Plus, Answer::Minus, Answer::Null};
    double worst = -1e300;
    for (int i = 0; i < kStrategies; ++i) {
        DirectionSet ds = builtin_directions(i % 3 == 0 ? "orthogonal-2" : i % 3 == 1 ? "orthogonal-3" : "cube-4");
        const int n = ds.size();
        PreparationModel model = i % 2 ? PreparationModel{preparation::Visibility{0.5 + 0.5 * u(rng)}}
                                       : PreparationModel{preparation::Exact{}};
        ScoreSpec spec = ScoreSpec::make(ds, 0.3 + 0.7 * u(rng), 1.0);
        CheatStrategy st;
        st.m = oracle::random_ball(rng);
        st.mu = u(rng) / (1.0 + st.m.norm());
        st.favorable = 1u + static_cast<std::uint32_t>(u(rng) * ((1u << n) - 1));
        st.favorable = std::min(st.favorable, (1u << n) - 1);
        st.report_rule = {answers[static_cast<int>(u(rng) * 3.0)], answers[static_cast<int>(u(rng) * 3.0)]};
        st.report_weight = {u(rng), u(rng)};
        double best = -1e300;
        for (double gp : {0.0, 1.0}) {
            for (double gm : {0.0, 1.0}) {
                CheatStrategy end = st;
                end.report_weight = {gp, gm};
                best = std::max(best, cheat_score(end, spec, model));
            }
        }
        worst = std::max(worst, cheat_score(st, spec, model) - best);
    }
    c.require(worst <= kWeightTol, fmt("fractional weight beat endpoints by %.3g", worst));
    if (c.ok) c.detail = fmt("%g strategies, max excess over endpoints %.2g", kStrategies, worst);
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"1 bound values and D_n(k) oracle", bound_values},
        {"2 heralding threshold 1/n", threshold},
        {"3 honest closed form (1 - C)/4", honest_closed_form},
        {"4 unsteerability certificate", certificate},
        {"5 r-factor consistency", r_consistency},
        {"6 Bob-loss scaling", bob_loss},
        {"7 Monte Carlo consistency", monte_carlo},
        {"8 weighted-report futility", weighted_reports},
    };
    int failed = 0;
    for (const auto &[name, fn] : criteria) {
        auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = fn();
        } catch (const std::exception &e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %-36s %.2fs  %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs, c.detail.c_str());
        std::fflush(stdout);
        failed += !c.ok;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
