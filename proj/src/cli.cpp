#include "cfl/cli.hpp"

#include "cfl/mus.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace cfl {

namespace {

std::string join(const std::vector<std::string>& xs, const char* sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

int verdict_exit(ConflictReport::Verdict v) {
    switch (v) {
        case ConflictReport::Verdict::NoConflict: return 0;
        case ConflictReport::Verdict::Resolved: return 1;
        default: return 2;
    }
}

void print_report_text(const ConflictReport& r, std::ostream& out) {
    out << "verdict: ";
    switch (r.verdict) {
        case ConflictReport::Verdict::NoConflict: out << "no-conflict"; break;
        case ConflictReport::Verdict::Resolved:
            out << "resolved at " << level_name(*r.level);
            break;
        default: out << "unresolved";
    }
    out << "\n";
    if (!r.strategies.empty()) {
        out << "surviving strategies (" << r.strategies.size() << "):\n";
        for (const auto& s : r.strategies) out << "  " << s << "\n";
    }
    if (!r.trace.empty()) {
        out << "trace:\n";
        for (const auto& t : r.trace) {
            out << "  " << level_name(t.level) << ": +[" << join(t.added) << "]";
            if (!t.removed.empty()) out << " -[" << join(t.removed) << "]";
            out << " (base " << t.base_size_after << ", groups " << t.group_count_after << ")\n";
        }
    }
    if (r.negotiated_goals) out << "negotiated goals: " << join(*r.negotiated_goals) << "\n";
    if (!r.causes.empty()) {
        out << "causes:\n";
        for (const auto& c : r.causes) {
            out << "  group " << c.group << ": justification {" << join(c.justification)
                << "} blocking A=" << c.a_strategy << " B=" << c.b_strategy << "\n";
        }
    }
}

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    CnfFormula f;
    try {
        f = read_dimacs_file(cfg.path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    Solver solver(f);
    solver.set_seed(cfg.seed);
    SolveResult r = solver.solve(cfg.assumptions);
    if (r.sat()) {
        out << "s SATISFIABLE\n";
        std::string line = "v";
        for (int v = 1; v <= f.num_vars; ++v) {
            line += r.model[(std::size_t)v] ? " " + std::to_string(v) : " -" + std::to_string(v);
            if (line.size() > 72) {
                out << line << "\n";
                line = "v";
            }
        }
        out << line << " 0\n";
        return 10;
    }
    out << "s UNSATISFIABLE\n";
    if (!cfg.assumptions.empty()) {
        std::string line = "c core:";
        for (Lit l : r.core) line += " " + std::to_string(l);
        out << line << "\n";
    }
    return 20;
}

} // namespace

ConflictAnalyzer make_analyzer(const Scenario& s, const RunConfig& cfg) {
    WorldModel world = s.world;
    if (cfg.horizon) world.horizon = *cfg.horizon;
    AnalysisConfig acfg;
    acfg.max_level = cfg.max_level;
    acfg.strategy_bound = cfg.strategy_bound;
    acfg.jobs = cfg.jobs;
    acfg.seed = cfg.seed;
    return ConflictAnalyzer(world, s.information_base(), s.goals_a, s.believed_goals_b, s.coop,
                            s.observables, acfg);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.mode == RunConfig::Mode::Solve) return run_solve(cfg, out, err);
    try {
        Scenario s = load_scenario_file(cfg.path);
        auto diags = validate(s);
        bool fatal = false;
        for (const auto& d : diags) {
            err << (d.severity == Diagnostic::Severity::Error ? "error" : "warning");
            if (d.line > 0) err << " (line " << d.line << ")";
            err << ": " << d.message << "\n";
            fatal = fatal || d.severity == Diagnostic::Severity::Error;
        }
        if (fatal) return 3;

        ConflictAnalyzer analyzer = make_analyzer(s, cfg);
        if (cfg.mode == RunConfig::Mode::Analyze) {
            auto det = analyzer.detect_conflict();
            ConflictReport r;
            r.verdict = det.conflict ? ConflictReport::Verdict::Unresolved
                                     : ConflictReport::Verdict::NoConflict;
            r.causes = det.causes;
            r.strategies = det.survivors;
            if (cfg.output == "json")
                out << r.to_json().dump(2) << "\n";
            else
                print_report_text(r, out);
            return det.conflict ? 2 : 0;
        }

        ConflictReport report = analyzer.find_strategy();
        if (cfg.mode == RunConfig::Mode::Explain) {
            Explanation ex = analyzer.explain(report);
            if (cfg.output == "json")
                out << ex.to_json().dump(2) << "\n";
            else
                out << ex.to_text();
        } else {
            if (cfg.output == "json")
                out << report.to_json().dump(2) << "\n";
            else
                print_report_text(report, out);
        }
        return verdict_exit(report.verdict);
    } catch (const evidence_incompatible_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

int cli_main(int argc, char** argv) {
    CLI::App app{"conflictlens: believed-conflict analysis between two goal-driven agents"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string max_level = "C4";
    std::string assume;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", cfg.path, "scenario file (.cfl)")->required();
        sub->add_option("--horizon", cfg.horizon, "override the scenario horizon");
        sub->add_option("--max-level", max_level, "resolution cap: C1..C4 (default C4)");
        sub->add_option("--output", cfg.output, "text or json")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--seed", cfg.seed, "solver seed");
        sub->add_option("--jobs", cfg.jobs, "parallel strategy checks");
        sub->add_option("--strategy-bound", cfg.strategy_bound, "strategy enumeration cap");
    };

    auto* analyze = app.add_subcommand("analyze", "detect a believed possible conflict");
    add_common(analyze);
    auto* resolve = app.add_subcommand("resolve", "detect and run staged resolution");
    add_common(resolve);
    auto* explain = app.add_subcommand("explain", "resolve and print the justification chain");
    add_common(explain);

    auto* solve = app.add_subcommand("solve", "run the SAT core on a DIMACS file");
    solve->add_option("dimacs", cfg.path, "DIMACS CNF file")->required();
    solve->add_option("--assume", assume, "space-separated assumption literals");
    solve->add_option("--seed", cfg.seed, "solver seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    if (analyze->parsed()) cfg.mode = RunConfig::Mode::Analyze;
    if (resolve->parsed()) cfg.mode = RunConfig::Mode::Resolve;
    if (explain->parsed()) cfg.mode = RunConfig::Mode::Explain;
    if (solve->parsed()) {
        cfg.mode = RunConfig::Mode::Solve;
        std::istringstream in(assume);
        Lit l;
        while (in >> l) cfg.assumptions.push_back(l);
    }
    if (cfg.strategy_bound == 0) {
        std::cerr << "error: strategy bound must be positive\n";
        return 3;
    }
    if (max_level.size() == 2 && max_level[0] == 'C' && max_level[1] >= '1' && max_level[1] <= '4') {
        cfg.max_level = max_level[1] - '0';
    } else {
        std::cerr << "error: --max-level must be one of C1..C4\n";
        return 3;
    }
    return run(cfg, std::cout, std::cerr);
}

} // namespace cfl
