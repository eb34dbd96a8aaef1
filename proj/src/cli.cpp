#include "gaussalloc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gaussalloc/analysis.hpp"
#include "gaussalloc/errors.hpp"
#include "gaussalloc/gaussian_oracle.hpp"
#include "gaussalloc/instances.hpp"
#include "gaussalloc/report_io.hpp"
#include "gaussalloc/seeding.hpp"
#include "gaussalloc/solvers.hpp"
#include "json.hpp"

namespace gaussalloc::cli {

namespace {

using nlohmann::ordered_json;

// Raised for semantic usage problems found after parsing (missing --eps ...).
struct UsageError : Error {
    using Error::Error;
};

struct Options {
    CliConfig cfg;
    std::size_t n = 0;
    std::optional<std::size_t> m;
    std::optional<double> p;
    std::vector<double> p_grid;
    double mu = 0.0;
    std::size_t k = 0;
    std::uint64_t budget = 0;
    bool timing = false;
    bool seed_given = false;
    bool all = false;
    std::vector<std::string> claims;
    std::size_t seeds = 8;
    std::size_t candidates = 4;
    double c = 0.25;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const CliConfig& cfg, const std::string& text, std::ostream& out) {
    if (!cfg.output_path) {
        out << text;
        return;
    }
    std::ofstream f(*cfg.output_path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + *cfg.output_path + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) throw Error("failed writing " + *cfg.output_path);
}

EstimatorConfig estimator(const CliConfig& cfg) {
    EstimatorConfig e;
    if (cfg.method) e.method = method_from_string(*cfg.method);
    if (cfg.mc_samples) e.mc_samples = *cfg.mc_samples;
    e.seed = cfg.seed;
    e.validate();
    return e;
}

ordered_json estimate_json(const Estimate& e) {
    ordered_json j;
    j["value"] = e.value;
    j["half_width"] = e.half_width;
    j["method"] = std::string(to_string(e.method_used));
    return j;
}

ordered_json config_json(const EstimatorConfig& c) {
    ordered_json j;
    j["method"] = std::string(to_string(c.method));
    j["quadrature_tolerance"] = c.quadrature_tolerance;
    j["mc_samples"] = c.mc_samples;
    j["seed"] = c.seed;
    return j;
}

// ---------------------------------------------------------------------------

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto& t = o.cfg.target;
    std::optional<Instance> inst;
    if (t == "erdos-renyi") {
        if (o.n == 0 || !o.m || !o.p) throw UsageError("erdos-renyi needs --n, --m and --p");
        std::size_t resamples = 0;
        inst = erdos_renyi_instance(o.n, *o.m, *o.p, o.cfg.seed, &resamples);
        if (resamples > 0) err << "note: resampled " << resamples << " empty set(s)\n";
    } else if (t == "cycle") {
        if (o.n == 0) throw UsageError("cycle needs --n");
        inst = cycle_instance(o.n, o.mu);
    } else {
        if (o.n == 0 || o.k == 0) throw UsageError("complete-k needs --n and --k");
        inst = complete_k_subsets_instance(o.n, o.k);
    }
    write_output(o.cfg, serialize_instance(*inst), out);
    return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
    const Instance inst = parse_instance(read_file(*o.cfg.instance_path));
    const auto& t = o.cfg.target;
    const bool ptas = t == "ptas-ind" || t == "ptas-corr";
    if (ptas && !o.cfg.eps) throw UsageError(t + " needs --eps");
    if (o.cfg.eps && !(*o.cfg.eps > 0.0 && *o.cfg.eps < 1.0)) {
        throw UsageError("--eps must lie in (0, 1)");
    }
    EstimatorConfig cfg = estimator(o.cfg);

    SolveReport report = [&] {
        if (t == "ptas-ind") {
            SolverLimits limits;
            if (o.budget) limits.node_budget = o.budget;
            return ptas_independent(inst, *o.cfg.eps, cfg, o.cfg.grid_step, limits);
        }
        if (t == "ptas-corr") {
            SolverLimits limits;
            if (o.budget) limits.node_budget = o.budget;
            return ptas_correlated(inst, *o.cfg.eps, o.cfg.grid_step, cfg, limits);
        }
        if (t == "log-approx") return log_approx_graph(inst, cfg);
        if (t == "brute-force") {
            if (!o.cfg.grid_step) throw UsageError("brute-force needs --grid-step");
            return brute_force_grid(inst, *o.cfg.grid_step, cfg, o.budget ? o.budget : 10'000'000);
        }
        return solve_uniform(inst, cfg);
    }();
    write_output(o.cfg, serialize_report(report, inst, o.timing), out);
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    AllocationDocument doc = parse_allocation_document(read_file(*o.cfg.instance_path));
    std::optional<Instance> inst = std::move(doc.instance);
    if (o.cfg.allocation_instance_path) {
        inst = parse_instance(read_file(*o.cfg.allocation_instance_path));
    }
    if (!inst) throw UsageError("allocation has no embedded instance; pass --instance");

    // A solve report is re-evaluated with the settings that produced its
    // objective unless the command line overrides them.
    EstimatorConfig cfg = doc.config.value_or(EstimatorConfig{});
    if (doc.objective_seed) cfg.seed = *doc.objective_seed;
    if (doc.objective) {
        const bool mc = doc.objective->method_used == Method::monte_carlo;
        if (mc) cfg.method = Method::monte_carlo;
        if (!mc && cfg.method == Method::monte_carlo) cfg.method = Method::automatic;
    }
    if (o.cfg.method) cfg.method = method_from_string(*o.cfg.method);
    if (o.cfg.mc_samples) cfg.mc_samples = *o.cfg.mc_samples;
    if (o.seed_given) cfg.seed = o.cfg.seed;
    cfg.validate();

    ordered_json j;
    Estimate est;
    if (const auto* v = std::get_if<AllocationVector>(&doc.allocation)) {
        if (v->size() != inst->n()) throw UsageError("allocation length does not match instance n");
        est = graph_objective(*inst, *v, cfg);
        j["allocation"] = "stddevs";
    } else {
        const auto& c = std::get<CovarianceSpec>(doc.allocation);
        if (c.size() != inst->n()) throw UsageError("covariance size does not match instance n");
        est = graph_objective_correlated(*inst, c, cfg);
        j["allocation"] = "covariance";
    }
    j["objective"] = estimate_json(est);
    j["config"] = config_json(cfg);
    write_output(o.cfg, j.dump(2) + "\n", out);
    return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    std::vector<std::string> claims = o.claims;
    if (o.all) claims = verification_claims();
    if (claims.empty()) throw UsageError("verify needs --all or --claim");
    std::vector<VerificationReport> reports;
    for (const auto& c : claims) {
        reports.push_back(run_verification(c, o.cfg.seed));
        const auto& r = reports.back();
        err << (r.passed() ? "pass " : "FAIL ") << r.claim << ": " << r.violations << "/"
            << r.trials << " violations, worst margin " << shortest_decimal(r.worst_margin) << "\n";
    }
    const bool ok = std::all_of(reports.begin(), reports.end(),
                                [](const VerificationReport& r) { return r.passed(); });
    std::string text;
    if (o.cfg.format == Format::csv) {
        text = "claim,trials,violations,worst_margin\n";
        for (const auto& r : reports) {
            text += r.claim + "," + std::to_string(r.trials) + "," + std::to_string(r.violations) +
                    "," + shortest_decimal(r.worst_margin) + "\n";
        }
    } else {
        ordered_json j;
        j["seed"] = o.cfg.seed;
        j["passed"] = ok;
        ordered_json list = ordered_json::array();
        for (const auto& r : reports) {
            ordered_json e;
            e["claim"] = r.claim;
            e["trials"] = r.trials;
            e["violations"] = r.violations;
            e["worst_margin"] = r.worst_margin;
            e["seed"] = r.seed;
            ordered_json summary = ordered_json::object();
            for (const auto& [k, v] : r.summary) summary[k] = v;
            e["summary"] = std::move(summary);
            list.push_back(std::move(e));
        }
        j["reports"] = std::move(list);
        text = j.dump(2) + "\n";
    }
    write_output(o.cfg, text, out);
    return ok ? kExitOk : kExitFailure;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const std::size_t n = o.n ? o.n : 8;
    EstimatorConfig cfg = estimator(o.cfg);
    SweepTable table;
    if (o.cfg.target == "concavity") {
        if (!o.cfg.mc_samples) cfg.mc_samples = 200'000;
        table = concavity_sweep(n, concavity_candidates(n, o.candidates, o.cfg.seed), cfg).table;
    } else {
        const std::size_t m = o.m.value_or(8 * n);
        std::vector<double> grid = o.p_grid;
        if (grid.empty()) {
            for (std::size_t i = 1; i <= n; ++i) {
                grid.push_back(static_cast<double>(i) / static_cast<double>(n));
            }
        }
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < o.seeds; ++i) {
            seeds.push_back(derive_seed(derive_seed(o.cfg.seed, "concentration"), i));
        }
        table = concentration_profile(n, m, grid, seeds, cfg, o.c);
    }
    std::string text;
    if (o.cfg.format == Format::csv) {
        text = format_sweep_csv(table);
    } else {
        ordered_json rows = ordered_json::array();
        for (const auto& r : table.rows()) {
            ordered_json e;
            e["parameter"] = r.parameter;
            e["statistic"] = r.statistic;
            e["value"] = r.value;
            e["ci_half_width"] = r.ci_half_width;
            rows.push_back(std::move(e));
        }
        text = rows.dump(2) + "\n";
    }
    write_output(o.cfg, text, out);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Gaussian variance allocation: solvers and checks", "gaussalloc"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.cfg.seed, "Random seed (default 0)");
        sub->add_option("--out", o.cfg.output_path, "Output file (default stdout)");
    };
    auto add_estimator = [&](CLI::App* sub) {
        sub->add_option("--mc-samples", o.cfg.mc_samples, "Monte Carlo sample count")
            ->check(CLI::Range(std::uint64_t{1000}, std::numeric_limits<std::uint64_t>::max()));
        sub->add_option("--method", o.cfg.method, "auto, closed_form, quadrature or monte_carlo")
            ->check(CLI::IsMember({"auto", "closed_form", "quadrature", "monte_carlo"}));
    };
    const std::map<std::string, Format> formats{{"json", Format::json}, {"csv", Format::csv}};

    auto* gen = app.add_subcommand("generate", "Write an instance file");
    gen->add_option("family", o.cfg.target, "erdos-renyi, cycle or complete-k")
        ->required()
        ->check(CLI::IsMember({"erdos-renyi", "cycle", "complete-k"}));
    gen->add_option("--n", o.n, "Number of variables")->check(CLI::PositiveNumber);
    gen->add_option("--m", o.m, "Number of sets")->check(CLI::PositiveNumber);
    gen->add_option("--p", o.p, "Membership probability")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--mu", o.mu, "Common mean (cycle)")->check(CLI::NonNegativeNumber);
    gen->add_option("--k", o.k, "Subset size (complete-k)")->check(CLI::PositiveNumber);
    add_common(gen);

    auto* solve = app.add_subcommand("solve", "Solve an instance and write a report");
    solve->add_option("algorithm", o.cfg.target, "ptas-ind, ptas-corr, log-approx, brute-force or uniform")
        ->required()
        ->check(CLI::IsMember({"ptas-ind", "ptas-corr", "log-approx", "brute-force", "uniform"}));
    solve->add_option("--in", o.cfg.instance_path, "Instance file")->required()->check(CLI::ExistingFile);
    solve->add_option("--eps", o.cfg.eps, "Accuracy parameter in (0, 1)");
    solve->add_option("--grid-step", o.cfg.grid_step, "Grid resolution")->check(CLI::PositiveNumber);
    solve->add_option("--budget", o.budget, "Candidate budget of grid searches")->check(CLI::PositiveNumber);
    solve->add_flag("--timing", o.timing, "Include wall time in the report");
    add_estimator(solve);
    add_common(solve);

    auto* eval = app.add_subcommand("evaluate", "Evaluate the objective of an allocation");
    eval->add_option("--in", o.cfg.instance_path, "Solve report or allocation file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--instance", o.cfg.allocation_instance_path, "Instance file")
        ->check(CLI::ExistingFile);
    add_estimator(eval);
    add_common(eval);

    auto* verify = app.add_subcommand("verify", "Run inequality checks; exit 1 on any violation");
    auto* all_flag = verify->add_flag("--all", o.all, "Run every check");
    verify->add_option("--claim", o.claims, "Check to run (repeatable)")
        ->check(CLI::IsMember(verification_claims()))
        ->excludes(all_flag);
    verify->add_option("--format", o.cfg.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats));
    add_common(verify);

    auto* sweep = app.add_subcommand("sweep", "Write a sweep table");
    sweep->add_option("kind", o.cfg.target, "concavity or concentration")
        ->required()
        ->check(CLI::IsMember({"concavity", "concentration"}));
    sweep->add_option("--n", o.n, "Number of variables (default 8)")->check(CLI::PositiveNumber);
    sweep->add_option("--m", o.m, "Number of sets (default 8n)")->check(CLI::PositiveNumber);
    sweep->add_option("--p", o.p_grid, "Membership probabilities (default k/n)")
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--seeds", o.seeds, "Instances per p (default 8)")->check(CLI::PositiveNumber);
    sweep->add_option("--candidates", o.candidates, "Random sigma candidates (default 4)");
    sweep->add_option("--c", o.c, "Large-variance threshold factor (default 0.25)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--format", o.cfg.format, "csv or json")
        ->transform(CLI::CheckedTransformer(formats));
    add_estimator(sweep);
    add_common(sweep);

    o.cfg.format = Format::json;
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (sweep->parsed() && sweep->count("--format") == 0) o.cfg.format = Format::csv;

    try {
        if (gen->parsed()) {
            o.cfg.subcommand = "generate";
            return cmd_generate(o, out, err);
        }
        if (solve->parsed()) {
            o.cfg.subcommand = "solve";
            return cmd_solve(o, out);
        }
        if (eval->parsed()) {
            o.cfg.subcommand = "evaluate";
            o.seed_given = eval->count("--seed") > 0;
            return cmd_evaluate(o, out);
        }
        if (verify->parsed()) {
            o.cfg.subcommand = "verify";
            return cmd_verify(o, out, err);
        }
        o.cfg.subcommand = "sweep";
        return cmd_sweep(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace gaussalloc::cli
