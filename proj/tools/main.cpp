#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypfpp/runner.hpp"

namespace {

using namespace hypfpp;

// Exit codes: 0 success, 1 internal error, 2 gate or validation failure,
// 3 config/format error, 4 budget or resource exhaustion.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitGateFail = 2;
constexpr int kExitConfig = 3;
constexpr int kExitResource = 4;

struct ModelBundle {
    GroupModel model;
    GeodesicAutomaton aut;
    AutomatonAnalysis analysis;
};

ModelBundle load_bundle(const std::string& config_path) {
    IniFile ini = IniFile::load(config_path);
    GroupModel model = model_from_config(ini);
    GeodesicAutomaton aut = automaton_for(model);
    AutomatonAnalysis an = analyze_automaton(model, aut);
    return {std::move(model), std::move(aut), std::move(an)};
}

int cmd_validate(const std::string& config_path, int radius) {
    ModelBundle b = load_bundle(config_path);
    LanguageReport rep = verify_geodesic_language(b.aut, b.model, radius);

    Json out;
    out["model"] = detail::model_json(b.model);
    out["states"] = b.aut.state_count();
    out["growth_rate"] = b.analysis.spec.lambda;
    out["period"] = b.analysis.comps.d;
    out["maximal_components"] = [&] {
        int c = 0;
        for (bool m : b.analysis.comps.maximal) c += m ? 1 : 0;
        return c;
    }();
    out["language"] = {{"radius", rep.radius},
                       {"words_checked", rep.words_checked},
                       {"ball_size", rep.ball_size},
                       {"bijective", rep.bijective},
                       {"violations", rep.violations.size()}};
    for (size_t i = 0; i < rep.violations.size() && i < 10; ++i)
        out["language"]["first_violations"].push_back(
            {{"word", rep.violations[i].word}, {"detail", rep.violations[i].detail}});
    std::cout << out.dump(2) << "\n";
    return rep.ok() ? kExitOk : kExitGateFail;
}

Domain query_domain(const GroupModel& model, const Element& x, const Element& y, int64_t cylinder,
                    int64_t ball) {
    if (ball >= 0) return Domain::ball(model, model.identity(), ball);
    return Domain::cylinder(model, x, y, cylinder);
}

int cmd_query(const std::string& config_path, const std::string& op,
              const std::vector<std::string>& args, uint64_t seed, int64_t cylinder, int64_t ball,
              uint64_t budget) {
    auto need = [&](size_t n) {
        if (args.size() != n)
            throw ConfigError("query " + op + " needs " + std::to_string(n) +
                              " element argument(s), got " + std::to_string(args.size()));
    };
    Json out;
    out["op"] = op;

    if (op == "passage") {
        need(2);
        ModelBundle b = load_bundle(config_path);
        IniFile ini = IniFile::load(config_path);
        WeightDistribution dist = distribution_from_config(ini);
        Element x = parse_element(b.model, args[0]);
        Element y = parse_element(b.model, args[1]);
        Environment env(dist, seed);
        PassageOptions opts;
        opts.max_relaxations = budget;
        Domain dom = query_domain(b.model, x, y, cylinder, ball);
        PassageResult r = restricted_passage_time(b.model, env, dom, x, y, opts);
        out["x"] = b.model.element_to_string(x);
        out["y"] = b.model.element_to_string(y);
        out["domain"] = dom.describe();
        out["seed"] = seed;
        out["time"] = r.time;
        out["hops"] = r.hops();
        out["settled"] = r.settled;
        out["near_tie"] = r.near_tie;
        for (const Element& v : r.path) out["path"].push_back(b.model.element_to_string(v));
    } else if (op == "distance") {
        need(2);
        ModelBundle b = load_bundle(config_path);
        Element x = parse_element(b.model, args[0]);
        Element y = parse_element(b.model, args[1]);
        out["x"] = b.model.element_to_string(x);
        out["y"] = b.model.element_to_string(y);
        out["distance"] = b.model.distance(x, y);
    } else if (op == "gromov") {
        need(3);
        ModelBundle b = load_bundle(config_path);
        Element x = parse_element(b.model, args[0]);
        Element y = parse_element(b.model, args[1]);
        Element z = parse_element(b.model, args[2]);
        out["base"] = b.model.element_to_string(x);
        out["product"] = gromov_product(b.model, x, y, z);
    } else if (op == "cone") {
        need(1);
        ModelBundle b = load_bundle(config_path);
        Element g = parse_element(b.model, args[0]);
        out["element"] = b.model.element_to_string(g);
        out["measure"] = cone_measure(b.analysis, b.model, g);
    } else if (op == "sphere") {
        need(1);
        ModelBundle b = load_bundle(config_path);
        int n = 0;
        try {
            n = std::stoi(args[0]);
        } catch (const std::exception&) {
            throw ConfigError("query sphere needs an integer radius, got '" + args[0] + "'");
        }
        out["n"] = n;
        out["count"] = sphere_count(b.analysis, n).str();
        out["growth_rate"] = b.analysis.spec.lambda;
    } else {
        throw ConfigError("unknown query op '" + op +
                          "'; expected passage, distance, gromov, cone, or sphere");
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const RunOverrides& ov) {
    IniFile ini = IniFile::load(config_path);
    ExperimentOutcome outcome = run_experiment(ini, ov);
    std::cout << "experiment " << outcome.kind << " -> " << outcome.out_dir << "\n";
    for (const auto& g : outcome.gates)
        std::cout << (g.passed ? "pass" : "FAIL") << "  " << g.name << "  observed "
                  << detail::fmt17(g.observed) << "  (want " << g.relation << ")\n";
    if (outcome.gates.empty()) std::cout << "(report-only, no gates)\n";
    return outcome.all_passed() ? kExitOk : kExitGateFail;
}

int cmd_report(const std::string& dir) {
    auto slurp = [&](const std::string& name) {
        std::ifstream in(std::filesystem::path(dir) / name);
        if (!in) throw ConfigError("cannot open " + dir + "/" + name);
        return Json::parse(in);
    };
    Json manifest = slurp("manifest.json");
    Json summary = slurp("summary.json");
    std::cout << "experiment: " << manifest["experiment"].get<std::string>() << "\n"
              << "version:    " << manifest["version"].get<std::string>() << "\n"
              << "seed:       " << manifest["seed"] << "\n"
              << "config:     " << manifest["config_digest"].get<std::string>() << "\n"
              << "distribution: " << manifest["distribution"].get<std::string>() << "\n";
    if (summary.contains("gates") && !summary["gates"].empty()) {
        std::cout << "gates:\n";
        for (const auto& g : summary["gates"])
            std::cout << "  " << (g["passed"].get<bool>() ? "pass" : "FAIL") << "  "
                      << g["name"].get<std::string>() << "  observed " << g["observed"]
                      << "  (want " << g["relation"].get<std::string>() << ")\n";
    } else {
        std::cout << "gates: none (report-only)\n";
    }
    Json rest = summary;
    rest.erase("gates");
    rest.erase("all_gates_passed");
    std::cout << "summary:\n" << rest.dump(2) << "\n";
    bool ok = !summary.contains("all_gates_passed") || summary["all_gates_passed"].get<bool>();
    return ok ? kExitOk : kExitGateFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"first passage percolation on hyperbolic group models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", hypfpp::kVersion);

    std::string config_path, out_dir, query_op;
    std::vector<std::string> query_args;
    uint64_t seed = 1;
    bool seed_set = false;
    int64_t budget = 50000000;
    bool budget_set = false;
    int workers = 0;
    int radius = 6;
    int64_t cylinder = 2, ball = -1;

    CLI::App* validate = app.add_subcommand("validate", "check a model and its automaton");
    validate->add_option("--config", config_path, "config file with a [model] section")
        ->required();
    validate->add_option("--radius", radius, "verification radius (default 6)");

    CLI::App* query = app.add_subcommand("query", "one-off queries against a model");
    query->add_option("--config", config_path, "config file with [model] and [distribution]")
        ->required();
    query->add_option("op", query_op, "passage | distance | gromov | cone | sphere")->required();
    query->add_option("args", query_args, "element words (quote words with spaces)");
    query->add_option("--seed", seed, "environment seed for passage queries");
    query->add_option("--cylinder", cylinder, "cylinder half-width for passage queries");
    query->add_option("--ball", ball, "use a ball domain of this radius instead of a cylinder");
    query->add_option("--budget-relaxations", budget, "relaxation budget");

    CLI::App* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--workers", workers, "worker thread override");
    run->add_option("--budget-relaxations", budget, "relaxation budget override");

    CLI::App* report = app.add_subcommand("report", "summarize a finished run directory");
    report->add_option("--out", out_dir, "run directory holding manifest and summary")
        ->required();

    // CLI11 cannot tell us directly whether an option with a default was
    // provided; count() after parsing does.
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    seed_set = run->count("--seed") > 0 || query->count("--seed") > 0;
    budget_set = run->count("--budget-relaxations") > 0;

    try {
        if (validate->parsed()) return cmd_validate(config_path, radius);
        if (query->parsed())
            return cmd_query(config_path, query_op, query_args, seed, cylinder, ball,
                             uint64_t(budget));
        if (run->parsed()) {
            hypfpp::RunOverrides ov;
            if (seed_set) ov.seed = seed;
            if (!out_dir.empty()) ov.out_dir = out_dir;
            if (workers > 0) ov.workers = workers;
            if (budget_set) ov.budget = uint64_t(budget);
            return cmd_run(config_path, ov);
        }
        if (report->parsed()) return cmd_report(out_dir);
    } catch (const hypfpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hypfpp::ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const hypfpp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
