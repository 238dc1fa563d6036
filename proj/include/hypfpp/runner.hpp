#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypfpp/automaton.hpp"
#include "hypfpp/config.hpp"
#include "hypfpp/experiments.hpp"
#include "hypfpp/version.hpp"

namespace hypfpp {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config-driven experiment runs. Every run writes, in order, manifest.json
// (seed, config digest, gate thresholds; nothing result-dependent), then
// records.csv (one row per replication cell, replication-major), then
// summary.json. A [output] jsonl = true adds records.jsonl with the same rows.
// ---------------------------------------------------------------------------

struct GateCheck {
    std::string name;
    std::string relation; // human-readable, e.g. "<= 0.05"
    double observed = 0;
    bool passed = false;
};

struct RunOverrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<uint64_t> budget;
};

struct ExperimentOutcome {
    std::string kind;
    std::string out_dir;
    std::vector<GateCheck> gates;
    Json manifest;
    Json summary;
    bool all_passed() const {
        for (const auto& g : gates)
            if (!g.passed) return false;
        return true;
    }
};

inline GeodesicAutomaton automaton_for(const GroupModel& model) {
    if (model.kind() == ModelKind::automatic) return load_automaton(model.automaton_path());
    return builtin_automaton(model);
}

inline DirectionSpec parse_direction(const GroupModel& model, const std::string& text) {
    size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("direction '" + text +
                          "' needs the form pole:WORD, eventually:PREFIX:WORD, or sample:SEED");
    std::string head = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    if (head == "pole") return DirectionSpec::pole(parse_element(model, rest));
    if (head == "eventually") {
        size_t second = rest.find(':');
        if (second == std::string::npos)
            throw ConfigError("direction 'eventually:' needs PREFIX:WORD");
        return DirectionSpec::eventually_periodic(parse_element(model, rest.substr(0, second)),
                                                  parse_element(model, rest.substr(second + 1)));
    }
    if (head == "sample") {
        try {
            size_t pos = 0;
            uint64_t s = std::stoull(rest, &pos);
            if (pos != rest.size()) throw std::invalid_argument("");
            return DirectionSpec::boundary_sample(s);
        } catch (const std::exception&) {
            throw ConfigError("direction 'sample:' needs an unsigned seed, got '" + rest + "'");
        }
    }
    throw ConfigError("unknown direction form '" + head + "'");
}

namespace detail {

inline std::string fmt17(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

// Typed rows shared by the CSV and JSON-lines writers.
struct RecordTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void row(std::initializer_list<Json> cells) { rows.emplace_back(cells); }

    std::string csv() const {
        std::ostringstream o;
        for (size_t c = 0; c < columns.size(); ++c) o << (c ? "," : "") << columns[c];
        o << "\n";
        for (const auto& r : rows) {
            for (size_t c = 0; c < r.size(); ++c) {
                if (c) o << ",";
                if (r[c].is_number_float()) {
                    o << fmt17(r[c].get<double>());
                } else if (r[c].is_boolean()) {
                    o << (r[c].get<bool>() ? 1 : 0);
                } else if (r[c].is_string()) {
                    o << r[c].get<std::string>();
                } else {
                    o << r[c].dump();
                }
            }
            o << "\n";
        }
        return o.str();
    }

    std::string jsonl() const {
        std::ostringstream o;
        for (const auto& r : rows) {
            Json line = Json::object();
            for (size_t c = 0; c < r.size() && c < columns.size(); ++c) line[columns[c]] = r[c];
            o << line.dump() << "\n";
        }
        return o.str();
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot open output file " + path.string());
    out << content;
    if (!out) throw ResourceError("failed writing output file " + path.string());
}

inline Json model_json(const GroupModel& model) {
    Json j;
    j["kind"] = model_kind_name(model.kind());
    j["rank"] = model.rank();
    std::vector<std::string> gens;
    for (size_t g = 0; g < model.generator_count(); ++g) gens.push_back(model.generator(g).name);
    j["generators"] = gens;
    if (model.kind() == ModelKind::automatic) j["automaton"] = model.automaton_path();
    return j;
}

inline GateCheck gate(const std::string& name, const std::string& relation, double observed,
                      bool passed) {
    return {name, relation, observed, passed};
}

} // namespace detail

// Shared [experiment] keys with the per-driver defaults as fallbacks.
namespace detail {

struct CommonKeys {
    uint64_t seed;
    int workers;
    uint64_t budget;
    std::string out_dir;
    bool jsonl;
};

inline CommonKeys common_keys(const IniFile& ini, const RunOverrides& ov) {
    CommonKeys c;
    c.seed = ov.seed ? *ov.seed : ini.get_u64_or("experiment", "seed", 1);
    c.workers = ov.workers ? *ov.workers : int(ini.get_int_or("experiment", "workers", 1));
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    c.budget = ov.budget ? *ov.budget : ini.get_u64_or("experiment", "budget", 50000000);
    c.out_dir = ov.out_dir ? *ov.out_dir : ini.get_or("output", "dir", "out");
    c.jsonl = ini.get_bool_or("output", "jsonl", false);
    return c;
}

} // namespace detail

inline ExperimentOutcome run_experiment(const IniFile& ini, const RunOverrides& ov = {}) {
    const std::string kind = ini.get("experiment", "kind");
    detail::CommonKeys ck = detail::common_keys(ini, ov);
    WeightDistribution dist = distribution_from_config(ini);

    // The counterexample suite builds its own catalog models; everything else
    // works on the configured one.
    std::optional<GroupModel> model;
    std::optional<AutomatonAnalysis> analysis;
    if (kind != "counterexample") {
        model = model_from_config(ini);
        analysis = analyze_automaton(*model, automaton_for(*model));
    }

    ExperimentOutcome outcome;
    outcome.kind = kind;
    outcome.out_dir = ck.out_dir;

    Json manifest;
    manifest["version"] = kVersion;
    manifest["experiment"] = kind;
    manifest["seed"] = ck.seed;
    {
        std::ostringstream hex;
        hex << std::hex << std::setw(16) << std::setfill('0') << ini.digest();
        manifest["config_digest"] = hex.str();
    }
    manifest["config_origin"] = ini.origin();
    manifest["distribution"] = dist.describe();
    if (model) manifest["model"] = detail::model_json(*model);
    manifest["outputs"] = Json::array({"records.csv", "summary.json"});
    if (ck.jsonl) manifest["outputs"].push_back("records.jsonl");

    detail::RecordTable table;
    Json summary;
    std::vector<GateCheck>& gates = outcome.gates;
    Json gate_plan = Json::array();
    auto plan = [&gate_plan](const std::string& name, const std::string& relation) {
        gate_plan.push_back({{"name", name}, {"relation", relation}});
    };

    // Every branch fills gate_plan before the run body and writes the
    // manifest before producing any record rows.
    std::filesystem::create_directories(ck.out_dir);
    std::filesystem::path dir(ck.out_dir);

    if (kind == "velocity") {
        VelocityParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 200));
        p.bridge_check = ini.get_bool_or("experiment", "bridge_check", false);
        p.nu_directions = size_t(ini.get_int_or("experiment", "nu_directions", 0));
        p.workers = ck.workers;
        p.budget = ck.budget;
        double sigma = ini.get_double_or("experiment", "gate_sigma", 3.0);
        bool gated = ini.has("experiment", "expect_velocity");
        double expect = gated ? ini.get_double("experiment", "expect_velocity") : 0;
        if (gated)
            plan("velocity-expected", "|v - " + detail::fmt17(expect) + "| <= " +
                                          detail::fmt17(sigma) + " se");
        if (p.bridge_check) plan("bridge-identity", "max |T - path sum| <= 1e-10");
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        VelocityResult r = velocity_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "time", "hops"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.n, rec.time, rec.hops});
        for (const auto& pn : r.per_n)
            summary["per_n"].push_back({{"n", pn.n},
                                        {"mean_time", pn.mean_time},
                                        {"se_time", pn.se_time},
                                        {"velocity", pn.velocity},
                                        {"velocity_se", pn.velocity_se}});
        summary["cauchy_gaps"] = r.cauchy_gaps;
        if (p.bridge_check) {
            summary["bridge_max_gap"] = r.bridge_max_gap;
            gates.push_back(detail::gate("bridge-identity", "<= 1e-10", r.bridge_max_gap,
                                         r.bridge_max_gap <= 1e-10));
        }
        if (p.nu_directions > 0) {
            for (const auto& dv : r.nu_velocities)
                summary["sampled_directions"].push_back({{"label", dv.label},
                                                         {"velocity", dv.velocity},
                                                         {"velocity_se", dv.velocity_se}});
            summary["sampled_direction_spread"] = r.nu_spread;
        }
        if (gated) {
            const auto& last = r.per_n.back();
            double dev = std::abs(last.velocity - expect);
            gates.push_back(detail::gate("velocity-expected",
                                         "<= " + detail::fmt17(sigma * last.velocity_se), dev,
                                         dev <= sigma * last.velocity_se));
        }
    } else if (kind == "b_velocity") {
        BVelocityParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        if (ini.has("experiment", "b_values")) p.b_values = ini.get_int_list("experiment", "b_values");
        p.fraction_b = ini.get_int_or("experiment", "fraction_b", -1);
        p.reference_b = ini.get_int_or("experiment", "reference_b", -1);
        p.vertex_budget = size_t(ini.get_int_or("experiment", "vertex_budget", 150000));
        p.epsilon = ini.get_double_or("experiment", "epsilon", 0.05);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 300));
        p.workers = ck.workers;
        p.budget = ck.budget;
        double excess_max = ini.get_double_or("experiment", "excess_max", 0.05);
        plan("restriction-monotone", "violations == 0");
        plan("excess-nonincreasing", "fraction nonincreasing in n");
        plan("excess-fraction", "fraction at n_max <= " + detail::fmt17(excess_max));
        manifest["gates"] = gate_plan;
        manifest["epsilon"] = p.epsilon;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        BVelocityResult r = b_velocity_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n"};
        for (int64_t b : p.b_values) table.columns.push_back("t_b" + std::to_string(b));
        table.columns.push_back("t_ref");
        for (const auto& rec : r.records) {
            std::vector<Json> cells{rec.rep, rec.n};
            for (double t : rec.times) cells.push_back(t);
            cells.push_back(rec.ref_time);
            table.rows.push_back(std::move(cells));
        }
        for (const auto& c : r.cells)
            summary["cells"].push_back(
                {{"n", c.n}, {"b", c.b}, {"mean_time", c.mean_time}, {"se_time", c.se_time}});
        summary["reference_b"] = r.reference_b;
        summary["reference_domain"] = r.reference_domain;
        for (const auto& [n, f] : r.excess_fractions)
            summary["excess_fractions"].push_back({{"n", n}, {"fraction", f}});
        summary["monotonicity_violations"] = r.monotonicity_violations;
        gates.push_back(detail::gate("restriction-monotone", "== 0",
                                     double(r.monotonicity_violations),
                                     r.monotonicity_violations == 0));
        bool noninc = true;
        for (size_t i = 0; i + 1 < r.excess_fractions.size(); ++i)
            if (r.excess_fractions[i + 1].second > r.excess_fractions[i].second) noninc = false;
        gates.push_back(detail::gate("excess-nonincreasing", "nonincreasing", noninc ? 1 : 0, noninc));
        double last = r.excess_fractions.back().second;
        gates.push_back(detail::gate("excess-fraction", "<= " + detail::fmt17(excess_max), last,
                                     last <= excess_max));
    } else if (kind == "coarse_grain") {
        CoarseGrainParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        p.scale = ini.get_int_or("experiment", "scale", p.scale);
        p.blocks = ini.get_int_or("experiment", "blocks", p.blocks);
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 200));
        p.crosscheck_replications =
            size_t(ini.get_int_or("experiment", "crosscheck_replications", 200));
        p.workers = ck.workers;
        p.budget = ck.budget;
        double sigma = ini.get_double_or("experiment", "gate_sigma", 2.0);
        plan("cesaro-matches-blocks",
             "|cesaro - sum_w f_w E T_w| <= " + detail::fmt17(sigma) + " combined se");
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        CoarseGrainResult r = coarse_grain_velocity(*model, *analysis, dist, ck.seed, p);
        table.columns = {"rep", "block", "time"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.block, rec.time});
        summary["cesaro_mean"] = r.cesaro_mean;
        summary["cesaro_se"] = r.cesaro_se;
        summary["running_cesaro"] = r.running_cesaro;
        summary["crosscheck_value"] = r.crosscheck_value;
        summary["crosscheck_se"] = r.crosscheck_se;
        summary["words_used"] = r.words_used;
        double gap = std::abs(r.cesaro_mean - r.crosscheck_value);
        double band = sigma * std::sqrt(r.cesaro_se * r.cesaro_se +
                                        r.crosscheck_se * r.crosscheck_se);
        gates.push_back(detail::gate("cesaro-matches-blocks", "<= " + detail::fmt17(band), gap,
                                     gap <= band));
    } else if (kind == "frequency") {
        FrequencyParams p;
        p.ray_length = size_t(ini.get_int_or("experiment", "ray_length", 100000));
        p.max_word_len = size_t(ini.get_int_or("experiment", "max_word_len", 2));
        p.tolerance = ini.get_double_or("experiment", "tolerance", 0.02);
        if (ini.has("experiment", "extra_words"))
            for (const std::string& w :
                 [&] {
                     std::vector<std::string> out;
                     std::istringstream is(ini.get("experiment", "extra_words"));
                     std::string tok;
                     while (std::getline(is, tok, ';'))
                         if (!tok.empty()) out.push_back(tok);
                     return out;
                 }())
                p.extra_words.push_back(parse_word(*model, w));
        plan("frequency-tolerance",
             "max |emp - pred| over admissible words <= " + detail::fmt17(p.tolerance));
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        FrequencyResult r = frequency_experiment(*model, *analysis, ck.seed, p);
        table.columns = {"word", "length", "predicted", "empirical", "abs_diff"};
        for (const auto& row : r.rows)
            table.row({row.word, row.length, row.predicted, row.empirical, row.abs_diff});
        summary["admissible_count"] = r.admissible_count;
        summary["max_diff_admissible"] = r.max_diff_admissible;
        summary["tolerance"] = r.tolerance;
        gates.push_back(detail::gate("frequency-tolerance", "<= " + detail::fmt17(p.tolerance),
                                     r.max_diff_admissible,
                                     r.max_diff_admissible <= p.tolerance));
    } else if (kind == "direction") {
        DirectionParams p;
        p.ray_direction = parse_direction(*model, ini.get("experiment", "direction"));
        p.toward = ini.has("experiment", "toward")
                       ? parse_direction(*model, ini.get("experiment", "toward"))
                       : p.ray_direction;
        if (ini.has("experiment", "backward")) {
            p.backward = parse_direction(*model, ini.get("experiment", "backward"));
        } else if (p.toward.kind == DirectionSpec::Kind::pole) {
            p.backward = DirectionSpec::pole(model->inverse(p.toward.periodic));
        } else {
            throw ConfigError("direction experiment needs an explicit 'backward' direction");
        }
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 100));
        p.workers = ck.workers;
        p.budget = ck.budget;
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        DirectionResult r = direction_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "r_omega"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.n, rec.r_omega});
        for (size_t i = 0; i < r.tail_fractions.size(); ++i)
            summary["tail_products"].push_back({{"fraction", r.tail_fractions[i]},
                                                {"min_gromov_product_mean",
                                                 r.min_tail_products[i]}});
        for (size_t i = 0; i < r.r_omega_max.size(); ++i)
            summary["r_omega"].push_back({{"n", r.r_omega_max[i].first},
                                          {"max", r.r_omega_max[i].second},
                                          {"q90", r.r_omega_q90[i].second}});
    } else if (kind == "coalescence") {
        CoalescenceParams p;
        p.o1 = parse_element(*model, ini.get_or("experiment", "basepoint1", "1"));
        p.o2 = parse_element(*model, ini.get("experiment", "basepoint2"));
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 200));
        p.block_d = ini.get_int_or("experiment", "block_d", p.block_d);
        p.gate_fraction = ini.get_double_or("experiment", "gate_fraction", p.gate_fraction);
        p.workers = ck.workers;
        p.budget = ck.budget;
        plan("coalesced-fraction",
             "fraction at n_max >= " + detail::fmt17(p.gate_fraction));
        plan("fraction-nondecreasing", "fraction nondecreasing in n");
        manifest["gates"] = gate_plan;
        manifest["gate_fraction"] = p.gate_fraction;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        CoalescenceResult r = coalescence_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "first_meet", "merge_index", "suffix_coincident",
                         "coalesced", "min_block_share"};
        for (const auto& rec : r.records)
            table.row({rec.rep, rec.n, rec.first_meet, rec.merge_index, rec.suffix_coincident,
                       rec.coalesced, rec.min_block_share});
        for (const auto& [n, f] : r.fraction_per_n)
            summary["fraction_per_n"].push_back({{"n", n}, {"fraction", f}});
        summary["fractions_nondecreasing"] = r.fractions_nondecreasing;
        summary["worst_block_share"] = r.worst_block_share;
        summary["block_d"] = r.block_d;
        double last = r.fraction_per_n.back().second;
        gates.push_back(detail::gate("coalesced-fraction",
                                     ">= " + detail::fmt17(p.gate_fraction), last,
                                     last >= p.gate_fraction));
        gates.push_back(detail::gate("fraction-nondecreasing", "nondecreasing",
                                     r.fractions_nondecreasing ? 1 : 0,
                                     r.fractions_nondecreasing));
    } else if (kind == "variance") {
        VarianceParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 1000));
        p.bootstrap = size_t(ini.get_int_or("experiment", "bootstrap", 1000));
        p.level = ini.get_double_or("experiment", "level", 0.95);
        p.workers = ck.workers;
        p.budget = ck.budget;
        double r2_min = ini.get_double_or("experiment", "r2_min", 0.98);
        bool var_gate = ini.has("experiment", "expect_var_over_n");
        double expect_von = var_gate ? ini.get_double("experiment", "expect_var_over_n") : 0;
        double von_rtol = ini.get_double_or("experiment", "var_rel_tol", 0.15);
        plan("variance-linear-fit", "r2 >= " + detail::fmt17(r2_min));
        plan("variance-slope-positive", "slope > 0");
        plan("ratio-finite", "max Var / E[path length] finite and positive");
        if (var_gate)
            plan("var-over-n", "|Var/n - " + detail::fmt17(expect_von) + "| <= " +
                                   detail::fmt17(von_rtol) + " relative");
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        VarianceResult r = variance_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "time", "hops"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.n, rec.time, rec.hops});
        for (const auto& pn : r.per_n)
            summary["per_n"].push_back({{"n", pn.n},
                                        {"mean_time", pn.mean_time},
                                        {"variance", pn.variance},
                                        {"variance_ci_lo", pn.variance_ci.lo},
                                        {"variance_ci_hi", pn.variance_ci.hi},
                                        {"var_over_n", pn.var_over_n},
                                        {"mean_hops", pn.mean_hops},
                                        {"ratio_var_to_hops", pn.ratio_var_to_hops}});
        summary["fit"] = {{"slope", r.fit.slope}, {"intercept", r.fit.intercept}, {"r2", r.fit.r2}};
        summary["origin_slope"] = r.origin_slope;
        summary["kesten_c"] = r.kesten_c;
        gates.push_back(
            detail::gate("variance-linear-fit", ">= " + detail::fmt17(r2_min), r.fit.r2,
                         r.fit.r2 >= r2_min));
        gates.push_back(detail::gate("variance-slope-positive", "> 0", r.fit.slope,
                                     r.fit.slope > 0));
        gates.push_back(detail::gate("ratio-finite", "finite, > 0", r.kesten_c,
                                     std::isfinite(r.kesten_c) && r.kesten_c > 0));
        if (var_gate) {
            double worst = 0;
            for (const auto& pn : r.per_n)
                worst = std::max(worst, std::abs(pn.var_over_n - expect_von) / expect_von);
            gates.push_back(detail::gate("var-over-n", "<= " + detail::fmt17(von_rtol), worst,
                                         worst <= von_rtol));
        }
    } else if (kind == "counterexample") {
        CounterexampleParams p;
        p.part_a = ini.get_bool_or("experiment", "part_a", true);
        p.part_b = ini.get_bool_or("experiment", "part_b", true);
        p.part_c = ini.get_bool_or("experiment", "part_c", true);
        p.a_m = ini.get_int_or("experiment", "a_m", p.a_m);
        p.a_n = ini.get_int_or("experiment", "a_n", p.a_n);
        p.a_replications = size_t(ini.get_int_or("experiment", "a_replications", 500));
        p.a_quadrature_tol = ini.get_double_or("experiment", "a_quadrature_tol", 1e-4);
        p.b_n = ini.get_int_or("experiment", "b_n", p.b_n);
        p.b_replications = size_t(ini.get_int_or("experiment", "b_replications", 500));
        p.b_cylinder = ini.get_int_or("experiment", "b_cylinder", p.b_cylinder);
        if (ini.has("experiment", "c_exponents"))
            p.c_exponents = ini.get_int_list("experiment", "c_exponents");
        p.c_replications = size_t(ini.get_int_or("experiment", "c_replications", 200));
        p.c_cylinder = ini.get_int_or("experiment", "c_cylinder", p.c_cylinder);
        p.workers = ck.workers;
        p.budget = ck.budget;
        if (p.part_a) {
            plan("sublinear-velocity", "estimate < mean - 3 se");
            plan("quadrature-bound", "estimate <= E[min(X, Y1+Y2)] + 3 se");
        }
        if (p.part_b) {
            plan("fast-direction", "|v_a - mean| <= 2 se");
            plan("slow-direction", "v_b < mean - 3 se");
        }
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        CounterexampleResult r = counterexample_suite(dist, ck.seed, p);
        table.columns = {"part", "label", "rep", "n", "time", "hops"};
        for (const auto& rec : r.a_records)
            table.row({"a", "chord-line", rec.rep, rec.n, rec.time, rec.hops});
        for (const auto& rec : r.b_records)
            table.row({"b", rec.n > 0 ? "a" : "b", rec.rep, rec.n > 0 ? rec.n : -rec.n, rec.time,
                       rec.hops});
        if (r.a_ran) {
            summary["a"] = {{"estimate", r.a_estimate},
                            {"se", r.a_se},
                            {"weight_mean", r.a_mu},
                            {"quadrature_bound", r.a_bound}};
            gates.push_back(detail::gate("sublinear-velocity",
                                         "< " + detail::fmt17(r.a_mu - 3 * r.a_se), r.a_estimate,
                                         r.a_estimate < r.a_mu - 3 * r.a_se));
            gates.push_back(detail::gate("quadrature-bound",
                                         "<= " + detail::fmt17(r.a_bound + 3 * r.a_se),
                                         r.a_estimate, r.a_estimate <= r.a_bound + 3 * r.a_se));
        }
        if (r.b_ran) {
            summary["b"] = {{"weight_mean", r.b_mu},
                            {"v_a", r.b_va},
                            {"v_a_se", r.b_va_se},
                            {"v_b", r.b_vb},
                            {"v_b_se", r.b_vb_se}};
            double dev = std::abs(r.b_va - r.b_mu);
            gates.push_back(detail::gate("fast-direction",
                                         "<= " + detail::fmt17(2 * r.b_va_se), dev,
                                         dev <= 2 * r.b_va_se));
            gates.push_back(detail::gate("slow-direction",
                                         "< " + detail::fmt17(r.b_mu - 3 * r.b_vb_se), r.b_vb,
                                         r.b_vb < r.b_mu - 3 * r.b_vb_se));
        }
        if (r.c_ran)
            for (const auto& pt : r.c_curve)
                summary["c_curve"].push_back({{"prefix_syllables", pt.prefix},
                                              {"letter", std::string(1, pt.letter)},
                                              {"distance", pt.dist},
                                              {"ratio_mean", pt.ratio_mean},
                                              {"ratio_se", pt.ratio_se}});
    } else if (kind == "concentration") {
        ConcentrationParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 2000));
        if (ini.has("experiment", "epsilon_values"))
            p.epsilon_values = ini.get_double_list("experiment", "epsilon_values");
        if (ini.has("experiment", "ratio_values"))
            p.ratio_values = ini.get_double_list("experiment", "ratio_values");
        p.workers = ck.workers;
        p.budget = ck.budget;
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        ConcentrationResult r = concentration_suite(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "time", "hops"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.n, rec.time, rec.hops});
        for (const auto& c : r.lower_tail)
            summary["lower_tail"].push_back(
                {{"n", c.n}, {"epsilon", c.threshold}, {"frequency", c.frequency}});
        for (const auto& c : r.length_ratio)
            summary["length_ratio"].push_back(
                {{"n", c.n}, {"ratio", c.threshold}, {"frequency", c.frequency}});
        for (const auto& [eps, slope] : r.log_slopes)
            summary["log_slopes"].push_back({{"epsilon", eps}, {"slope", slope}});
    } else if (kind == "clt") {
        CltParams p;
        p.direction = parse_direction(*model, ini.get("experiment", "direction"));
        if (ini.has("experiment", "n_values")) p.n_values = ini.get_int_list("experiment", "n_values");
        p.cylinder = ini.get_int_or("experiment", "cylinder", p.cylinder);
        p.replications = size_t(ini.get_int_or("experiment", "replications", 2000));
        p.workers = ck.workers;
        p.budget = ck.budget;
        manifest["gates"] = gate_plan;
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

        CltResult r = clt_experiment(*model, &*analysis, dist, ck.seed, p);
        table.columns = {"rep", "n", "time", "hops"};
        for (const auto& rec : r.records) table.row({rec.rep, rec.n, rec.time, rec.hops});
        for (const auto& pn : r.per_n)
            summary["per_n"].push_back({{"n", pn.n},
                                        {"skewness", pn.skewness},
                                        {"excess_kurtosis", pn.excess_kurtosis},
                                        {"a2", pn.a2},
                                        {"a2_modified", pn.a2_modified}});
    } else {
        throw ConfigError("unknown experiment kind '" + kind + "'");
    }

    summary["gates"] = Json::array();
    for (const auto& g : gates)
        summary["gates"].push_back({{"name", g.name},
                                    {"relation", g.relation},
                                    {"observed", g.observed},
                                    {"passed", g.passed}});
    summary["all_gates_passed"] = outcome.all_passed();

    detail::write_file(dir / "records.csv", table.csv());
    if (ck.jsonl) detail::write_file(dir / "records.jsonl", table.jsonl());
    detail::write_file(dir / "summary.json", summary.dump(2) + "\n");

    outcome.manifest = std::move(manifest);
    outcome.summary = std::move(summary);
    return outcome;
}

} // namespace hypfpp
