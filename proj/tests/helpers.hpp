// Shared test plumbing: corpus locations, solver command resolution, seeded
// randomness, small generators, and a subprocess runner for CLI tests.
#pragma once

#include "hlv/formula.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#ifndef HLV_CORPUS_FALLBACK
#define HLV_CORPUS_FALLBACK "corpus"
#endif
#ifndef HLV_WRAPPER_FALLBACK
#define HLV_WRAPPER_FALLBACK "tools/solver/z3smt.cjs"
#endif
#ifndef HLV_CLI_FALLBACK
#define HLV_CLI_FALLBACK "hlv"
#endif

inline std::string test_env(const char* name, const char* fallback) {
    const char* v = getenv(name);
    return v && *v ? std::string(v) : std::string(fallback);
}

inline std::string corpus_path(const std::string& name) {
    return test_env("HLV_CORPUS_DIR", HLV_CORPUS_FALLBACK) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string solver_command() {
    const char* cmd = getenv("HLV_SOLVER_CMD");
    if (cmd && *cmd) return cmd;
    return "node " + test_env("HLV_SOLVER_WRAPPER", HLV_WRAPPER_FALLBACK);
}

inline std::string cli_path() { return test_env("HLV_CLI", HLV_CLI_FALLBACK); }

inline std::mt19937& test_rng() {
    static std::mt19937 rng([] {
        const char* s = getenv("HLV_TEST_SEED");
        return s && *s ? unsigned(strtoul(s, nullptr, 10)) : 20260814u;
    }());
    return rng;
}

// Random quantifier-free formula over the given (ap, tv) atoms.
inline hlv::FormulaPtr random_formula(std::mt19937& rng,
                                      const std::vector<std::pair<std::string, std::string>>& atoms,
                                      int depth) {
    using namespace hlv;
    std::uniform_int_distribution<int> pick_atom(0, int(atoms.size()) - 1);
    if (depth == 0) {
        std::uniform_int_distribution<int> leaf(0, 7);
        int l = leaf(rng);
        if (l == 0) return mk_true();
        if (l == 1) return mk_false();
        auto& [ap, tv] = atoms[pick_atom(rng)];
        return mk_atom(ap, tv);
    }
    std::uniform_int_distribution<int> pick_op(0, 10);
    switch (pick_op(rng)) {
    case 0: return mk_unary(Op::Not, random_formula(rng, atoms, depth - 1));
    case 1: return mk_unary(Op::Next, random_formula(rng, atoms, depth - 1));
    case 2: return mk_unary(Op::Finally, random_formula(rng, atoms, depth - 1));
    case 3: return mk_unary(Op::Globally, random_formula(rng, atoms, depth - 1));
    case 4:
        return mk_binary(Op::And, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    case 5:
        return mk_binary(Op::Or, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    case 6:
        return mk_binary(Op::Implies, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    case 7:
        return mk_binary(Op::Iff, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    case 8:
        return mk_binary(Op::Until, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    case 9:
        return mk_binary(Op::Release, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    default:
        return mk_binary(Op::WeakUntil, random_formula(rng, atoms, depth - 1),
                         random_formula(rng, atoms, depth - 1));
    }
}

// Random lasso over a proposition universe.
inline hlv::LassoTrace random_lasso(std::mt19937& rng, const std::vector<std::string>& props,
                                    int stem_max, int loop_max) {
    std::uniform_int_distribution<int> stem_len(0, stem_max), loop_len(1, loop_max);
    std::uniform_int_distribution<int> coin(0, 1);
    hlv::LassoTrace t;
    int sl = stem_len(rng), ll = loop_len(rng);
    for (int i = 0; i < sl; i++) {
        std::set<std::string> s;
        for (const std::string& p : props)
            if (coin(rng)) s.insert(p);
        t.stem.push_back(s);
    }
    for (int i = 0; i < ll; i++) {
        std::set<std::string> s;
        for (const std::string& p : props)
            if (coin(rng)) s.insert(p);
        t.loop.push_back(s);
    }
    return t;
}

struct CliResult {
    int exit_code;
    std::string output;  // stdout and stderr combined
};

inline CliResult run_cli(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    std::string out;
    char buf[4096];
    size_t r;
    while ((r = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, r);
    int status = pclose(p);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, out};
}
