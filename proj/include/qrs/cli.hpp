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
 * Command-line front end: bound, rfactor, score, cheat, simulate, sweep.
 *
 * Exit codes: 0 success, 1 usage or input error, 2 cheat certificate failure.
 * Tables go out as csv (default) or json; json wraps the same rows with a
 * metadata object echoing the configuration.
 */

#pragma once

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrs/bounds.hpp"
#include "qrs/game.hpp"
#include "qrs/linalg.hpp"
#include "qrs/montecarlo.hpp"
#include "qrs/settings.hpp"

namespace qrs::cli {

inline constexpr const char *kVersion = "1.0.0";

/// Bad flags or flag combinations; exit code 1.
struct UsageError : Error {
    using Error::Error;
};

/// One output table: ordered columns, rows of json scalars.
struct Table {
    std::vector<std::string> columns;
    std::vector<nlohmann::ordered_json> rows;
};

inline std::string format_number(double v) {
    // Shortest text that reads back to the same double.
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v == 0.0 ? 0.0 : v);
    return std::string(buf, res.ptr);
}

inline std::string csv_cell(const nlohmann::ordered_json &v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_number_float()) {
        return format_number(v.get<double>());
    }
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : s) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return quoted + "\"";
        }
        return s;
    }
    return v.dump();
}

inline void write_csv(std::ostream &out, const Table &t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        out << (i ? "," : "") << t.columns[i];
    }
    out << "\n";
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out << (i ? "," : "") << csv_cell(row.value(t.columns[i], nlohmann::ordered_json()));
        }
        out << "\n";
    }
}

inline void write_json(std::ostream &out, const Table &t, const nlohmann::ordered_json &metadata) {
    nlohmann::ordered_json doc;
    doc["metadata"] = metadata;
    doc["columns"] = t.columns;
    doc["rows"] = t.rows;
    out << doc.dump(2) << "\n";
}

/// Joins numbers with ';' for single-cell list columns.
template <typename Range, typename Fn>
std::string join(const Range &r, Fn fn) {
    std::string s;
    for (const auto &x : r) {
        s += (s.empty() ? "" : ";") + fn(x);
    }
    return s;
}

inline BlochVector parse_vector(const std::string &text) {
    std::string spaced = text;
    for (char &c : spaced) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(spaced);
    BlochVector v;
    std::string extra;
    if (!(in >> v.x >> v.y >> v.z) || (in >> extra)) {
        throw UsageError("expected a vector 'x,y,z', got '" + text + "'");
    }
    return v;
}

inline DensityMatrix parse_state(const std::string &name) {
    if (name == "phi-plus") return states::phi_plus();
    if (name == "singlet") return states::singlet();
    if (name == "product-00") return states::product({0, 0, 1}, {0, 0, 1});
    if (name == "product-01") return states::product({0, 0, 1}, {0, 0, -1});
    if (name == "mixed") return states::werner(0.0);
    if (name.rfind("werner:", 0) == 0) {
        double v = 0.0;
        try {
            v = std::stod(name.substr(7));
        } catch (const std::exception &) {
            throw UsageError("bad Werner visibility in '" + name + "'");
        }
        return states::werner(v);
    }
    throw UsageError("unknown state '" + name +
                     "'; supported: phi-plus, singlet, product-00, product-01, mixed, werner:<v>");
}

/// Flags shared by every subcommand.
struct Options {
    std::string family;
    std::string directions_file;
    std::string format = "csv";
    std::string out_path;
    double algebraic_tol = 1e-12;
    double spectral_tol = 1e-10;

    // bound
    std::vector<double> etas;
    std::string eta_grid;

    // game
    double eta_h = 1.0;
    double eta_m = 1.0;
    std::optional<double> r;
    std::string prep_file;
    std::optional<double> visibility;
    std::string fixed_state;
    bool r_from_model = false;
    std::string state = "phi-plus";

    // cheat search
    int subdivisions = 3;
    int mu_points = 101;
    std::vector<double> m_norms{1.0, 0.5};
    bool no_seed_directions = false;
    bool exhaustive = false;

    // simulation
    std::string player = "honest";
    double cheat_mu = 0.5;
    std::string cheat_m = "0,0,1";
    std::string cheat_favorable;
    std::string cheat_rule = "+-";
    std::string cheat_gamma = "1,1";
    std::uint64_t seed = 1;
    std::uint64_t rounds = 100000;
    std::string axis;
    std::vector<std::string> values;
};

/// Builds everything a command needs from the parsed flags.
class Context {
   public:
    explicit Context(const Options &o) : o_(o) {
    }

    DirectionSet directions() const {
        if (!o_.family.empty() && !o_.directions_file.empty()) {
            throw UsageError("use either --family or --directions, not both");
        }
        if (!o_.directions_file.empty()) {
            return load_directions(o_.directions_file);
        }
        if (o_.family.empty()) {
            throw UsageError("one of --family or --directions is required");
        }
        int n = builtin_family_size(o_.family);
        return builtin_directions(o_.family, n);
    }

    PreparationModel model(const DirectionSet &ds) const {
        int chosen = !o_.prep_file.empty() + o_.visibility.has_value() + !o_.fixed_state.empty();
        if (chosen > 1) {
            throw UsageError("choose at most one of --prep, --visibility, --fixed-state");
        }
        if (!o_.prep_file.empty()) {
            return preparation::Report{
                std::make_shared<const PreparationReport>(load_preparation_report(o_.prep_file, ds.size()))};
        }
        if (o_.visibility) {
            if (*o_.visibility < 0.0 || *o_.visibility > 1.0) {
                throw UsageError("--visibility must lie in [0, 1]");
            }
            return preparation::Visibility{*o_.visibility};
        }
        if (!o_.fixed_state.empty()) {
            return preparation::FixedState{parse_vector(o_.fixed_state)};
        }
        return preparation::Exact{};
    }

    /// --r wins; otherwise r comes from the model when --prep or --r-from-model is given, else 1.
    bool derive_r() const {
        return !o_.r && (o_.r_from_model || !o_.prep_file.empty());
    }

    ScoreSpec spec(const DirectionSet &ds, const PreparationModel &model) const {
        check_eta_h(true);
        ScoreSpec spec = ScoreSpec::make(ds, o_.eta_h, o_.r.value_or(1.0));
        if (derive_r()) {
            spec = spec.with_r(model_r_factor(spec, model));
        }
        return spec;
    }

    void check_eta_h(bool allow_zero) const {
        bool ok = allow_zero ? (o_.eta_h >= 0.0 && o_.eta_h <= 1.0) : (o_.eta_h > 0.0 && o_.eta_h <= 1.0);
        if (!ok) {
            throw UsageError("--eta-h must lie in " + std::string(allow_zero ? "[0, 1]" : "(0, 1]"));
        }
    }

    CheatStrategy cheat(int n) const {
        CheatStrategy st;
        st.mu = o_.cheat_mu;
        st.m = parse_vector(o_.cheat_m);
        if (o_.cheat_favorable.empty()) {
            st.favorable = (std::uint32_t{1} << n) - 1;
        } else {
            std::string spaced = o_.cheat_favorable;
            for (char &c : spaced) {
                if (c == ',' || c == ';') c = ' ';
            }
            std::istringstream in(spaced);
            int j = 0;
            while (in >> j) {
                if (j < 1 || j > n) {
                    throw UsageError("--cheat-favorable entry " + std::to_string(j) + " outside 1.." +
                                     std::to_string(n));
                }
                st.favorable |= std::uint32_t{1} << (j - 1);
            }
        }
        if (o_.cheat_rule.size() != 2) {
            throw UsageError("--cheat-rule takes two characters from {+,-,0}, for sbar = +1 and sbar = -1");
        }
        for (int g = 0; g < 2; ++g) {
            char c = o_.cheat_rule[static_cast<std::size_t>(g)];
            if (c == '+') {
                st.report_rule[g] = Answer::Plus;
            } else if (c == '-') {
                st.report_rule[g] = Answer::Minus;
            } else if (c == '0') {
                st.report_rule[g] = Answer::Null;
            } else {
                throw UsageError("--cheat-rule characters must be '+', '-' or '0'");
            }
        }
        std::string spaced = o_.cheat_gamma;
        for (char &c : spaced) {
            if (c == ',') c = ' ';
        }
        std::istringstream in(spaced);
        if (!(in >> st.report_weight[0] >> st.report_weight[1])) {
            throw UsageError("--cheat-gamma takes 'g_plus,g_minus'");
        }
        try {
            st.validate(n);
        } catch (const InvalidArgument &e) {
            throw UsageError(e.what());
        }
        return st;
    }

    nlohmann::ordered_json metadata(const std::string &command, const nlohmann::ordered_json &config,
                                    std::optional<std::uint64_t> seed = std::nullopt) const {
        nlohmann::ordered_json m;
        m["version"] = kVersion;
        m["command"] = command;
        m["config"] = config;
        m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json();
        return m;
    }

    nlohmann::ordered_json spec_config(const ScoreSpec &spec) const {
        nlohmann::ordered_json c;
        c["family"] = o_.family;
        c["directions"] = o_.directions_file;
        c["n"] = spec.n();
        c["eta_h"] = spec.eta_h();
        c["r"] = spec.r();
        c["c_n"] = spec.bound();
        c["preparation"] = model_name();
        return c;
    }

    std::string model_name() const {
        if (!o_.prep_file.empty()) return "report:" + o_.prep_file;
        if (o_.visibility) return "visibility:" + format_number(*o_.visibility);
        if (!o_.fixed_state.empty()) return "fixed-state:" + o_.fixed_state;
        return "exact";
    }

    const Options &options() const {
        return o_;
    }

   private:
    const Options &o_;
};

struct CommandResult {
    Table table;
    nlohmann::ordered_json metadata;
    int exit_code = 0;
};

inline std::vector<double> eta_values(const Options &o) {
    std::vector<double> etas = o.etas;
    if (!o.eta_grid.empty()) {
        std::string spaced = o.eta_grid;
        for (char &c : spaced) {
            if (c == ':') c = ' ';
        }
        std::istringstream in(spaced);
        double start = 0.0;
        double stop = 0.0;
        double step = 0.0;
        if (!(in >> start >> stop >> step) || step <= 0.0 || stop < start) {
            throw UsageError("--eta-grid takes start:stop:step with step > 0");
        }
        for (long i = 0;; ++i) {
            double eta = start + static_cast<double>(i) * step;
            if (eta > stop + 1e-12) break;
            etas.push_back(std::min(eta, stop));
        }
    }
    if (etas.empty()) {
        throw UsageError("bound needs --eta or --eta-grid");
    }
    for (double eta : etas) {
        if (!(eta > 0.0 && eta <= 1.0)) {
            throw UsageError("heralding efficiency " + format_number(eta) + " outside (0, 1]");
        }
    }
    return etas;
}

inline CommandResult cmd_bound(const Context &ctx) {
    DirectionSet ds = ctx.directions();
    CommandResult res;
    res.table.columns = {"eta_h", "c_n", "k_support", "weights"};
    for (double eta : eta_values(ctx.options())) {
        BoundResult b = steering_bound(ds, eta);
        nlohmann::ordered_json row;
        row["eta_h"] = eta;
        row["c_n"] = b.value;
        row["k_support"] = join(b.optimal_weights, [](const auto &kv) { return std::to_string(kv.first); });
        row["weights"] = join(b.optimal_weights, [](const auto &kv) { return format_number(kv.second); });
        res.table.rows.push_back(std::move(row));
    }
    nlohmann::ordered_json config;
    config["family"] = ctx.options().family;
    config["directions"] = ctx.options().directions_file;
    config["n"] = ds.size();
    config["d_table"] = *cached_d_table(ds);
    res.metadata = ctx.metadata("bound", config);
    return res;
}

inline CommandResult cmd_rfactor(const Context &ctx) {
    const Options &o = ctx.options();
    if (o.prep_file.empty()) {
        throw UsageError("rfactor needs --prep <file>");
    }
    ctx.check_eta_h(false);
    DirectionSet ds = ctx.directions();
    PreparationReport prep = load_preparation_report(o.prep_file, ds.size());
    BoundResult bound = steering_bound(ds, o.eta_h);
    RFactorResult r = r_factor(prep, ds, bound);
    CommandResult res;
    res.table.columns = {"eta_h", "c_n", "r", "signs"};
    nlohmann::ordered_json row;
    row["eta_h"] = o.eta_h;
    row["c_n"] = bound.value;
    row["r"] = r.value;
    row["signs"] = join(r.signs, [](int a) { return std::string(a > 0 ? "+1" : "-1"); });
    res.table.rows.push_back(std::move(row));
    nlohmann::ordered_json config;
    config["family"] = o.family;
    config["directions"] = o.directions_file;
    config["prep"] = o.prep_file;
    config["n"] = ds.size();
    res.metadata = ctx.metadata("rfactor", config);
    return res;
}

inline CommandResult cmd_score(const Context &ctx) {
    const Options &o = ctx.options();
    if (!(o.eta_m >= 0.0 && o.eta_m <= 1.0)) {
        throw UsageError("--eta-m must lie in [0, 1]");
    }
    ctx.check_eta_h(false);
    DirectionSet ds = ctx.directions();
    PreparationModel model = ctx.model(ds);
    ScoreSpec spec = ctx.spec(ds, model);
    ScoreBreakdown sb = exact_honest_score(parse_state(o.state), spec, model, o.eta_m);
    CommandResult res;
    res.table.columns = {"j", "s", "corr", "herald", "total", "eta_h_hat"};
    for (const auto &t : sb.per_js) {
        nlohmann::ordered_json row;
        row["j"] = t.j + 1;
        row["s"] = t.s;
        row["corr"] = t.corr;
        row["herald"] = t.herald;
        row["total"] = sb.total;
        row["eta_h_hat"] = sb.alice_herald;
        res.table.rows.push_back(std::move(row));
    }
    auto config = ctx.spec_config(spec);
    config["state"] = o.state;
    config["eta_m"] = o.eta_m;
    res.metadata = ctx.metadata("score", config);
    return res;
}

inline CommandResult cmd_cheat(const Context &ctx) {
    const Options &o = ctx.options();
    ctx.check_eta_h(false);
    DirectionSet ds = ctx.directions();
    if (ds.size() > kMaxCheatSettings) {
        throw UsageError("cheat search refused: n = " + std::to_string(ds.size()) + " exceeds the cap n <= " +
                         std::to_string(kMaxCheatSettings) + " (2^n favorable sets x 4 rules x 4 report weights " +
                         "x POVM grid would make the certificate vacuous at any affordable resolution)");
    }
    PreparationModel model = ctx.model(ds);
    ScoreSpec spec = ctx.spec(ds, model);
    SearchGrid grid;
    grid.icosphere_level = o.subdivisions;
    grid.mu_points = o.mu_points;
    grid.m_norms = o.m_norms;
    grid.seed_directions = !o.no_seed_directions;
    CheatSearchResult found = cheat_search(spec, model, grid);

    auto answer = [](Answer a) {
        return std::string(a == Answer::Plus ? "+1" : a == Answer::Minus ? "-1" : "null");
    };
    std::vector<int> favorable;
    for (int j = 0; j < ds.size(); ++j) {
        if (found.best.is_favorable(j)) favorable.push_back(j + 1);
    }
    CommandResult res;
    res.table.columns = {"certificate", "supremum",  "mixture_supremum", "favorable", "rule",
                         "gamma",       "mu",        "m_x",              "m_y",       "m_z",
                         "heralding",   "c_n_used",  "r",                "strategies", "directions"};
    nlohmann::ordered_json row;
    row["certificate"] = found.certified ? "PASS" : "FAIL";
    row["supremum"] = found.supremum;
    row["mixture_supremum"] = found.mixture_supremum;
    row["favorable"] = join(favorable, [](int j) { return std::to_string(j); });
    row["rule"] = answer(found.best.report_rule[0]) + ";" + answer(found.best.report_rule[1]);
    row["gamma"] = format_number(found.best.report_weight[0]) + ";" + format_number(found.best.report_weight[1]);
    row["mu"] = found.best.mu;
    row["m_x"] = found.best.m.x;
    row["m_y"] = found.best.m.y;
    row["m_z"] = found.best.m.z;
    row["heralding"] = found.best_eval.induced_heralding;
    row["c_n_used"] = found.best_eval.bound;
    row["r"] = spec.r();
    row["strategies"] = found.strategies;
    row["directions"] = found.directions;
    res.table.rows.push_back(std::move(row));
    auto config = ctx.spec_config(spec);
    config["subdivisions"] = o.subdivisions;
    config["mu_points"] = o.mu_points;
    config["m_norms"] = o.m_norms;
    config["seed_directions"] = grid.seed_directions;
    res.metadata = ctx.metadata("cheat", config);
    res.exit_code = found.certified ? 0 : 2;
    return res;
}

inline SimConfig sim_config(const Context &ctx) {
    const Options &o = ctx.options();
    DirectionSet ds = ctx.directions();
    PreparationModel model = ctx.model(ds);
    ScoreSpec spec = ctx.spec(ds, model);
    Players players = HonestPlayers{parse_state(o.state), o.eta_m};
    if (o.player == "cheat") {
        players = CheatPlayers{ctx.cheat(ds.size())};
    } else if (o.player != "honest") {
        throw UsageError("--player must be 'honest' or 'cheat'");
    }
    if (!(o.eta_m >= 0.0 && o.eta_m <= 1.0)) {
        throw UsageError("--eta-m must lie in [0, 1]");
    }
    return SimConfig{spec, model, players, o.rounds, o.seed, ctx.derive_r()};
}

inline const std::vector<std::string> &estimate_columns() {
    static const std::vector<std::string> cols = {"eta_h_hat", "c_n_used",  "r",   "rounds",
                                                  "mean",      "std_error", "rounds_valid", "seed"};
    return cols;
}

inline void put_estimate(nlohmann::ordered_json &row, const ScoreEstimate &e) {
    row["eta_h_hat"] = e.eta_h_hat;
    row["c_n_used"] = e.bound;
    row["r"] = e.r;
    row["rounds"] = e.rounds;
    row["mean"] = e.mean;
    row["std_error"] = e.std_error;
    row["rounds_valid"] = e.rounds_valid;
    row["seed"] = e.seed;
}

inline nlohmann::ordered_json sim_echo(const Context &ctx, const SimConfig &cfg) {
    auto config = ctx.spec_config(cfg.spec);
    const Options &o = ctx.options();
    config["player"] = o.player;
    if (o.player == "honest") {
        config["state"] = o.state;
        config["eta_m"] = o.eta_m;
    } else {
        config["cheat_mu"] = o.cheat_mu;
        config["cheat_m"] = o.cheat_m;
        config["cheat_favorable"] = o.cheat_favorable;
        config["cheat_rule"] = o.cheat_rule;
        config["cheat_gamma"] = o.cheat_gamma;
    }
    config["rounds"] = cfg.rounds;
    return config;
}

inline CommandResult cmd_simulate(const Context &ctx) {
    ctx.check_eta_h(true);
    SimConfig cfg = sim_config(ctx);
    ScoreEstimate est = simulate(cfg);
    CommandResult res;
    res.table.columns = estimate_columns();
    nlohmann::ordered_json row;
    put_estimate(row, est);
    res.table.rows.push_back(std::move(row));
    res.metadata = ctx.metadata("simulate", sim_echo(ctx, cfg), cfg.seed);
    return res;
}

inline SweepAxis parse_axis(const std::string &axis) {
    if (axis == "eta_h" || axis == "eta-h") return SweepAxis::EtaH;
    if (axis == "eta_m" || axis == "eta-m") return SweepAxis::EtaM;
    if (axis == "visibility") return SweepAxis::Visibility;
    if (axis == "family" || axis == "n-family") return SweepAxis::Family;
    throw UsageError("--axis must be one of eta_h, eta_m, visibility, family");
}

inline CommandResult cmd_sweep(const Context &ctx) {
    const Options &o = ctx.options();
    ctx.check_eta_h(true);
    SweepAxis axis = parse_axis(o.axis);
    SimConfig base = sim_config(ctx);
    std::vector<SweepValue> values;
    for (const auto &v : o.values) {
        if (axis == SweepAxis::Family) {
            values.emplace_back(v);
            continue;
        }
        try {
            std::size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            values.emplace_back(d);
        } catch (const std::exception &) {
            throw UsageError("sweep value '" + v + "' is not a number");
        }
    }
    std::vector<SweepRow> rows = sweep(base, axis, values);
    CommandResult res;
    res.table.columns = {"axis", "value"};
    for (const auto &c : estimate_columns()) {
        res.table.columns.push_back(c);
    }
    res.table.columns.push_back("error");
    for (const auto &r : rows) {
        nlohmann::ordered_json row;
        row["axis"] = o.axis;
        if (const auto *d = std::get_if<double>(&r.value)) {
            row["value"] = *d;
        } else {
            row["value"] = std::get<std::string>(r.value);
        }
        if (r.estimate) {
            put_estimate(row, *r.estimate);
        } else {
            row["seed"] = r.seed;
        }
        row["error"] = r.error;
        res.table.rows.push_back(std::move(row));
    }
    auto config = sim_echo(ctx, base);
    config["axis"] = o.axis;
    config["values"] = o.values;
    res.metadata = ctx.metadata("sweep", config, base.seed);
    return res;
}

namespace detail {

inline void add_direction_flags(CLI::App *cmd, Options &o) {
    cmd->add_option("--family,--n-family", o.family, "built-in direction family")
        ->check(CLI::IsMember(builtin_family_names()));
    cmd->add_option("--directions", o.directions_file, "direction file ('x y z' per line)");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out_path, "write output to this path instead of stdout");
}

inline void add_game_flags(CLI::App *cmd, Options &o) {
    cmd->add_option("--eta-h", o.eta_h, "Alice's heralding efficiency");
    cmd->add_option("--r", o.r, "preparation correction factor (default: 1, or derived from --prep)");
    cmd->add_option("--prep", o.prep_file, "preparation report ('j s x y z' per line)");
    cmd->add_option("--visibility", o.visibility, "isotropic preparation visibility");
    cmd->add_option("--fixed-state", o.fixed_state, "referee sends (I + s u.sigma)/2 for every j; u as 'x,y,z'");
    cmd->add_flag("--r-from-model", o.r_from_model, "derive r from the preparation model");
}

inline void add_player_flags(CLI::App *cmd, Options &o) {
    cmd->add_option("--state", o.state, "shared state for honest players");
    cmd->add_option("--eta-m", o.eta_m, "Bob's measurement efficiency");
    cmd->add_option("--player", o.player, "honest or cheat");
    cmd->add_option("--cheat-mu", o.cheat_mu, "cheat POVM weight mu");
    cmd->add_option("--cheat-m", o.cheat_m, "cheat POVM direction 'x,y,z'");
    cmd->add_option("--cheat-favorable", o.cheat_favorable, "favorable settings, e.g. '1,2' (default all)");
    cmd->add_option("--cheat-rule", o.cheat_rule, "Alice's answers for sbar = +1, -1 from {+,-,0}");
    cmd->add_option("--cheat-gamma", o.cheat_gamma, "Bob's b = 1 probabilities for sbar = +1, -1");
    cmd->add_option("--seed", o.seed, "64-bit seed");
    cmd->add_option("--rounds", o.rounds, "rounds to simulate")->check(CLI::PositiveNumber);
}

}  // namespace detail

/// Parses argv, runs one subcommand, writes its table. Returns the process exit code.
inline int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    Options o;
    CLI::App app{"Loss-tolerant refereed steering game: bounds, scores, cheat search, simulation"};
    app.set_config("--config");
    app.set_version_flag("--version", kVersion);
    app.add_option("--tol-algebraic", o.algebraic_tol, "slack for algebraic identities");
    app.add_option("--tol-spectral", o.spectral_tol, "slack for eigenvalue and PSD checks");
    app.require_subcommand(1);

    auto *bound = app.add_subcommand("bound", "steering bound C_n(eta) over a heralding grid");
    detail::add_direction_flags(bound, o);
    bound->add_option("--eta", o.etas, "heralding efficiencies")->delimiter(',');
    bound->add_option("--eta-grid", o.eta_grid, "start:stop:step");

    auto *rfactor = app.add_subcommand("rfactor", "preparation correction factor r from a report");
    detail::add_direction_flags(rfactor, o);
    rfactor->add_option("--prep", o.prep_file, "preparation report")->required();
    rfactor->add_option("--eta-h", o.eta_h, "heralding efficiency for C_n");

    auto *score = app.add_subcommand("score", "exact honest score breakdown");
    detail::add_direction_flags(score, o);
    detail::add_game_flags(score, o);
    score->add_option("--state", o.state, "phi-plus, singlet, product-00, product-01, mixed, werner:<v>");
    score->add_option("--eta-m", o.eta_m, "Bob's measurement efficiency");

    auto *cheat = app.add_subcommand("cheat", "exhaustive local-hidden-state cheat search");
    detail::add_direction_flags(cheat, o);
    detail::add_game_flags(cheat, o);
    cheat->add_option("--subdivisions", o.subdivisions, "icosphere level (3 -> 642 directions)")
        ->check(CLI::Range(0, 6));
    cheat->add_option("--mu-points", o.mu_points, "mu grid points")->check(CLI::Range(2, 100000));
    cheat->add_option("--m-norms", o.m_norms, "POVM |m| values")->delimiter(',');
    cheat->add_flag("--no-seed-directions", o.no_seed_directions, "icosphere only");
    cheat->add_flag("--exhaustive", o.exhaustive, "full deterministic enumeration (always on)");

    auto *simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the score");
    detail::add_direction_flags(simulate_cmd, o);
    detail::add_game_flags(simulate_cmd, o);
    detail::add_player_flags(simulate_cmd, o);

    auto *sweep_cmd = app.add_subcommand("sweep", "Monte Carlo estimates along one parameter axis");
    detail::add_direction_flags(sweep_cmd, o);
    detail::add_game_flags(sweep_cmd, o);
    detail::add_player_flags(sweep_cmd, o);
    sweep_cmd->add_option("--axis", o.axis, "eta_h, eta_m, visibility or family")->required();
    sweep_cmd->add_option("--values", o.values, "comma-separated values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return 1;
    }

    const NumericPolicy saved = numeric_policy();
    numeric_policy() = NumericPolicy{o.algebraic_tol, o.spectral_tol};
    struct Restore {
        NumericPolicy saved;
        ~Restore() {
            numeric_policy() = saved;
        }
    } restore{saved};

    Context ctx(o);
    CommandResult res;
    try {
        if (*bound) {
            res = cmd_bound(ctx);
        } else if (*rfactor) {
            res = cmd_rfactor(ctx);
        } else if (*score) {
            res = cmd_score(ctx);
        } else if (*cheat) {
            res = cmd_cheat(ctx);
        } else if (*simulate_cmd) {
            res = cmd_simulate(ctx);
        } else {
            res = cmd_sweep(ctx);
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    std::ofstream file;
    std::ostream *sink = &out;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) {
            err << "error: cannot write '" << o.out_path << "'\n";
            return 1;
        }
        sink = &file;
    }
    if (o.format == "json") {
        write_json(*sink, res.table, res.metadata);
    } else {
        write_csv(*sink, res.table);
    }
    if (res.exit_code == 2) {
        err << "certificate FAILED: a local-hidden-state strategy scores above 0\n";
    }
    return res.exit_code;
}

}  // namespace qrs::cli
