// Command line front end: parse, check, synth-strategy, synth-system.
// Exit codes: 0 holds/realizable, 1 fails/refuted, 2 unknown/exhausted
// bounds, 3 usage, I/O, or solver trouble.
#include "hlv/mc.hpp"
#include "hlv/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unistd.h>

using nlohmann::ordered_json;
using namespace hlv;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path);
}

std::string resolve_solver(const std::string& flag) {
    if (!flag.empty()) return flag;
    std::string d = default_solver_command();
    if (!d.empty()) return d;
#ifdef HLV_SOLVER_WRAPPER
    if (access(HLV_SOLVER_WRAPPER, R_OK) == 0) return std::string("node ") + HLV_SOLVER_WRAPPER;
#endif
    return "";
}

const char* kind_name(PrefixClass::Kind k) {
    switch (k) {
    case PrefixClass::UniversalOnly: return "universal";
    case PrefixClass::ExistentialOnly: return "existential";
    case PrefixClass::ForallExists: return "forall-exists";
    case PrefixClass::ExistsForall: return "exists-forall";
    default: return "other";
    }
}

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Holds: return "holds";
    case Outcome::Fails: return "fails";
    default: return "unknown";
    }
}

int outcome_exit(Outcome o) {
    switch (o) {
    case Outcome::Holds: return 0;
    case Outcome::Fails: return 1;
    default: return 2;
    }
}

ordered_json lasso_json(const LassoTrace& t) {
    auto letters = [](const std::vector<std::set<std::string>>& v) {
        ordered_json a = ordered_json::array();
        for (auto& s : v) a.push_back(std::vector<std::string>(s.begin(), s.end()));
        return a;
    };
    return ordered_json{{"stem", letters(t.stem)}, {"loop", letters(t.loop)}};
}

ordered_json counterexample_json(const std::map<std::string, LassoTrace>& cex) {
    ordered_json j = ordered_json::object();
    for (auto& [var, t] : cex) j[var] = lasso_json(t);
    return j;
}

ordered_json stats_json(const McStats& s) {
    return ordered_json{{"automaton_states", s.automaton_states},
                        {"graph_vertices", s.graph_vertices},
                        {"graph_edges", s.graph_edges}};
}

ordered_json bounds_json(const SynthBounds& b) {
    return ordered_json{{"system_size", b.system_size},
                        {"strategy_size", b.strategy_size},
                        {"lookahead", b.lookahead}};
}

void write_report(const std::string& path, const ordered_json& j) {
    if (!path.empty()) spit(path, j.dump(2) + "\n");
}

void write_annotation(const std::string& path, const McResult& r) {
    if (path.empty() || !r.annotation) return;
    ordered_json j;
    j["vertices"] = r.annotation->lambda_b.size();
    j["lambda_b"] = ordered_json::array();
    j["lambda_n"] = ordered_json::array();
    for (char c : r.annotation->lambda_b) j["lambda_b"].push_back(bool(c));
    for (int64_t v : r.annotation->lambda_n) j["lambda_n"].push_back(v);
    spit(path, j.dump(2) + "\n");
}

void print_counterexample(const std::map<std::string, LassoTrace>& cex, const char* noun) {
    if (cex.empty()) return;
    std::cout << noun << ":\n";
    for (auto& [var, t] : cex) {
        std::cout << "  " << var << ": ";
        auto put = [](const std::set<std::string>& s) {
            std::cout << '{';
            bool first = true;
            for (auto& p : s) {
                if (!first) std::cout << ',';
                std::cout << p;
                first = false;
            }
            std::cout << '}';
        };
        for (auto& s : t.stem) put(s);
        std::cout << " (";
        for (auto& s : t.loop) put(s);
        std::cout << ")^w\n";
    }
}

// check for existential-only formulas through the universal dual
McResult check_existential(const TransitionSystem& sys, const HyperFormula& f) {
    HyperFormula dual;
    for (auto& [q, v] : f.prefix) {
        (void)q;
        dual.prefix.push_back({Quant::Forall, v});
    }
    dual.body = mk_unary(Op::Not, f.body);
    McResult r = mc_universal(sys, dual);
    if (r.outcome == Outcome::Holds) {
        r.outcome = Outcome::Fails;
        r.note = "no trace tuple satisfies the body";
    } else if (r.outcome == Outcome::Fails) {
        r.outcome = Outcome::Holds;
        r.note = "witness traces found";
    }
    return r;
}

struct CheckArgs {
    std::string system, formula, strategy, prophecy, report, dump_automaton, out_annotation;
};

int run_check(const CheckArgs& a) {
    TransitionSystem sys = load_system_json(slurp(a.system));
    HyperFormula f = parse_formula(slurp(a.formula));
    if (!a.prophecy.empty()) {
        auto specs = load_prophecies_json(slurp(a.prophecy), f);
        ProphecyProblem p = apply_prophecy(sys, f, specs);
        sys = std::move(p.sys);
        f = std::move(p.f);
    }
    PrefixClass cls = classify_prefix(f);

    if (!a.dump_automaton.empty()) {
        TransitionSystem comp = self_composition(sys, int(f.prefix.size()));
        std::set<std::string> props(comp.inputs.begin(), comp.inputs.end());
        props.insert(comp.outputs.begin(), comp.outputs.end());
        std::vector<std::string> aps(props.begin(), props.end());
        NondetBuchi nba = ltl_to_nba(mk_unary(Op::Not, zip_formula(f)), aps);
        spit(a.dump_automaton, ucw_to_json(dualize_to_ucw(nba)));
    }

    McResult r;
    const char* cex_noun = "counterexample";
    switch (cls.kind) {
    case PrefixClass::UniversalOnly:
        r = mc_universal(sys, f);
        break;
    case PrefixClass::ExistentialOnly:
        r = check_existential(sys, f);
        cex_noun = "witness";
        break;
    case PrefixClass::ForallExists: {
        if (a.strategy.empty())
            throw ValidationError("forall* exists* check needs --strategy (or use synth-strategy)");
        StrategySystem st = load_strategy_json(slurp(a.strategy));
        r = mc_forall_exists(sys, f, st);
        break;
    }
    case PrefixClass::ExistsForall: {
        if (a.strategy.empty())
            throw ValidationError("exists* forall* check needs --strategy (or use synth-strategy)");
        StrategySystem st = load_strategy_json(slurp(a.strategy));
        r = mc_exists_forall(sys, f, st);
        break;
    }
    default:
        throw ValidationError("unsupported quantifier prefix: only forall*, exists*, "
                              "forall* exists*, and exists* forall* are handled");
    }

    std::cout << outcome_name(r.outcome);
    if (!r.note.empty()) std::cout << " (" << r.note << ")";
    std::cout << "\n";
    print_counterexample(r.counterexample, cex_noun);
    write_annotation(a.out_annotation, r);

    ordered_json rep;
    rep["schema"] = 1;
    rep["command"] = "check";
    rep["fragment"] = kind_name(cls.kind);
    rep["outcome"] = outcome_name(r.outcome);
    if (!r.note.empty()) rep["note"] = r.note;
    rep["stats"] = stats_json(r.stats);
    if (!r.counterexample.empty()) rep[cex_noun] = counterexample_json(r.counterexample);
    rep["exit"] = outcome_exit(r.outcome);
    write_report(a.report, rep);
    return outcome_exit(r.outcome);
}

struct SynthArgs {
    std::string system, signature, formula, prophecy, report, dump_smt;
    std::string out_system, out_strategy;
    std::string solver_cmd;
    int max_system = 1, max_strategy = 1, max_lookahead = 0;
    int timeout = 600;
    bool synthesize_system = false;
};

int run_synth(const SynthArgs& a) {
    SynthJob job;
    job.f = parse_formula(slurp(a.formula));
    if (a.synthesize_system) {
        job.signature = load_signature_json(slurp(a.signature));
        if (!a.prophecy.empty())
            throw ValidationError("prophecies need a concrete system to extend");
    } else {
        TransitionSystem sys = load_system_json(slurp(a.system));
        if (!a.prophecy.empty()) {
            auto specs = load_prophecies_json(slurp(a.prophecy), job.f);
            ProphecyProblem p = apply_prophecy(sys, job.f, specs);
            sys = std::move(p.sys);
            job.f = std::move(p.f);
        }
        job.system = std::move(sys);
    }
    job.max_system = a.max_system;
    job.max_strategy = a.max_strategy;
    job.max_lookahead = a.max_lookahead;
    job.solver_cmd = resolve_solver(a.solver_cmd);
    job.timeout_sec = a.timeout;
    job.dump_smt = a.dump_smt;

    SynthResult r = synthesis_loop(job);

    ordered_json rep;
    rep["schema"] = 1;
    rep["command"] = a.synthesize_system ? "synth-system" : "synth-strategy";
    rep["fragment"] = kind_name(classify_prefix(job.f).kind);
    rep["log"] = ordered_json::array();
    for (const BoundOutcome& b : r.log)
        rep["log"].push_back(ordered_json{{"bounds", bounds_json(b.bounds)},
                                          {"status", b.status},
                                          {"clauses", b.clauses}});

    int exit_code = 2;
    switch (r.status) {
    case SynthResult::Realizable: {
        exit_code = 0;
        std::cout << "realizable at system_size=" << r.bounds.system_size
                  << " strategy_size=" << r.bounds.strategy_size
                  << " lookahead=" << r.bounds.lookahead << "\n";
        rep["outcome"] = "realizable";
        rep["bounds"] = bounds_json(r.bounds);
        rep["verification"] = ordered_json{{"outcome", outcome_name(r.verification.outcome)},
                                           {"stats", stats_json(r.verification.stats)}};
        if (r.system) {
            std::string js = system_to_json(*r.system);
            if (!a.out_system.empty()) spit(a.out_system, js);
            else std::cout << js;
        }
        if (r.strategy) {
            std::string js = strategy_to_json(*r.strategy);
            if (!a.out_strategy.empty()) spit(a.out_strategy, js);
            else std::cout << js;
        }
        break;
    }
    case SynthResult::ExhaustedBounds:
        exit_code = 2;
        std::cout << "no solution within the given bounds\n";
        rep["outcome"] = "exhausted-bounds";
        break;
    case SynthResult::Unknown:
        exit_code = 2;
        std::cout << "inconclusive (solver timeout or resource cap at some bound)\n";
        rep["outcome"] = "unknown";
        break;
    }
    rep["exit"] = exit_code;
    write_report(a.report, rep);
    return exit_code;
}

int run_parse(const std::string& formula_path, const std::string& report_path) {
    HyperFormula f = parse_formula(slurp(formula_path));
    PrefixClass cls = classify_prefix(f);
    std::cout << print_formula(f) << "\n";
    std::cout << "fragment: " << kind_name(cls.kind) << " (forall " << cls.universals
              << ", exists " << cls.existentials << ")\n";

    ordered_json rep;
    rep["schema"] = 1;
    rep["command"] = "parse";
    rep["formula"] = print_formula(f);
    rep["fragment"] = kind_name(cls.kind);
    rep["universals"] = cls.universals;
    rep["existentials"] = cls.existentials;
    ordered_json vars = ordered_json::object();
    for (auto& [q, v] : f.prefix) {
        (void)q;
        auto props = props_of_var(f.body, v);
        vars[v] = std::vector<std::string>(props.begin(), props.end());
    }
    rep["propositions"] = vars;
    rep["exit"] = 0;
    write_report(report_path, rep);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"HyperLTL verification and bounded synthesis on finite transition systems"};
    cli.require_subcommand(1);

    std::string parse_formula_path, parse_report;
    CLI::App* parse = cli.add_subcommand("parse", "Parse a formula and report its fragment");
    parse->add_option("--formula", parse_formula_path, "HyperLTL formula file")->required();
    parse->add_option("--report", parse_report, "write a JSON report");

    CheckArgs ca;
    CLI::App* check = cli.add_subcommand("check", "Model check a formula on a system");
    check->add_option("--system", ca.system, "system JSON file")->required();
    check->add_option("--formula", ca.formula, "HyperLTL formula file")->required();
    check->add_option("--strategy", ca.strategy,
                      "strategy JSON resolving the existential quantifiers");
    check->add_option("--prophecy", ca.prophecy, "prophecy JSON file");
    check->add_option("--report", ca.report, "write a JSON report");
    check->add_option("--dump-automaton", ca.dump_automaton,
                      "write the specification automaton as JSON");
    check->add_option("--out-annotation", ca.out_annotation,
                      "write the acceptance annotation when the result holds");

    SynthArgs sa;
    CLI::App* ss = cli.add_subcommand("synth-strategy",
                                      "Synthesize a strategy (or witness) for a given system");
    ss->add_option("--system", sa.system, "system JSON file")->required();
    ss->add_option("--formula", sa.formula, "HyperLTL formula file")->required();
    ss->add_option("--prophecy", sa.prophecy, "prophecy JSON file");
    ss->add_option("--max-strategy", sa.max_strategy, "largest strategy size to try")
        ->check(CLI::PositiveNumber);
    ss->add_option("--max-lookahead", sa.max_lookahead, "largest lookahead to try")
        ->check(CLI::NonNegativeNumber);
    ss->add_option("--solver-cmd", sa.solver_cmd, "SMT solver command reading SMT-LIB on stdin");
    ss->add_option("--timeout", sa.timeout, "per-call solver timeout in seconds")
        ->check(CLI::PositiveNumber);
    ss->add_option("--out-strategy", sa.out_strategy, "write the synthesized strategy JSON here");
    ss->add_option("--report", sa.report, "write a JSON report");
    ss->add_option("--dump-smt", sa.dump_smt, "dump each SMT script to <prefix>.<bounds>.smt2");

    SynthArgs ya;
    ya.synthesize_system = true;
    CLI::App* sy = cli.add_subcommand("synth-system",
                                      "Synthesize a system (and strategy) from a signature");
    sy->add_option("--signature", ya.signature, "interface JSON: {\"inputs\": [...], "
                                                "\"outputs\": [...]}")
        ->required();
    sy->add_option("--formula", ya.formula, "HyperLTL formula file")->required();
    sy->add_option("--max-system", ya.max_system, "largest system size to try")
        ->check(CLI::PositiveNumber);
    sy->add_option("--max-strategy", ya.max_strategy, "largest strategy size to try")
        ->check(CLI::PositiveNumber);
    sy->add_option("--max-lookahead", ya.max_lookahead, "largest lookahead to try")
        ->check(CLI::NonNegativeNumber);
    sy->add_option("--solver-cmd", ya.solver_cmd, "SMT solver command reading SMT-LIB on stdin");
    sy->add_option("--timeout", ya.timeout, "per-call solver timeout in seconds")
        ->check(CLI::PositiveNumber);
    sy->add_option("--out-system", ya.out_system, "write the synthesized system JSON here");
    sy->add_option("--out-strategy", ya.out_strategy, "write the synthesized strategy JSON here");
    sy->add_option("--report", ya.report, "write a JSON report");
    sy->add_option("--dump-smt", ya.dump_smt, "dump each SMT script to <prefix>.<bounds>.smt2");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (parse->parsed()) return run_parse(parse_formula_path, parse_report);
        if (check->parsed()) return run_check(ca);
        if (ss->parsed()) return run_synth(sa);
        if (sy->parsed()) return run_synth(ya);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
