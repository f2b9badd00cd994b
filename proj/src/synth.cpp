#include "hlv/synth.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <map>
#include <mutex>
#include <poll.h>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace hlv {

namespace {

constexpr size_t kClauseCap = 10'000'000;
constexpr size_t kVertexCap = 2'000'000;

// ---------------------------------------------------------------------------
// Shared shape of a grounding problem.

struct Shape {
    bool ef = false;                // exists* forall* ordering
    int n = 0, m = 0;               // universal / existential copies
    const TransitionSystem* given;  // null when the system is synthesized
    int S = 0;                      // system size
    std::vector<std::string> inputs, outputs;
    int X = 0;  // strategy size (1 internally when m = 0)
    int k = 0;  // lookahead
};

struct ApBit {
    enum Kind { UnivIn, UnivOut, ExistIn, ExistOut } kind;
    int copy;  // 0-based within its block
    int bit;   // index into inputs/outputs of one copy
};

std::vector<std::string> fused_props(const std::vector<std::string>& inputs,
                                     const std::vector<std::string>& outputs, int n, int m,
                                     bool ef) {
    std::set<std::string> s;
    for (int c = 0; c < n; c++) {
        int idx = (ef ? m : 0) + c + 1;
        for (const std::string& p : inputs) s.insert(tuple_prop(p, idx));
        for (const std::string& p : outputs) s.insert(tuple_prop(p, idx));
    }
    for (int c = 0; c < m; c++) {
        int idx = (ef ? 0 : n) + c + 1;
        for (const std::string& p : inputs) s.insert(tuple_prop(p, idx));
        for (const std::string& p : outputs) s.insert(tuple_prop(p, idx));
    }
    return std::vector<std::string>(s.begin(), s.end());
}

std::vector<ApBit> classify_aps(const std::vector<std::string>& aps, const Shape& sh) {
    std::map<std::string, ApBit> by_name;
    for (int c = 0; c < sh.n; c++) {
        int idx = (sh.ef ? sh.m : 0) + c + 1;
        for (size_t b = 0; b < sh.inputs.size(); b++)
            by_name[tuple_prop(sh.inputs[b], idx)] = {ApBit::UnivIn, c, int(b)};
        for (size_t b = 0; b < sh.outputs.size(); b++)
            by_name[tuple_prop(sh.outputs[b], idx)] = {ApBit::UnivOut, c, int(b)};
    }
    for (int c = 0; c < sh.m; c++) {
        int idx = (sh.ef ? 0 : sh.n) + c + 1;
        for (size_t b = 0; b < sh.inputs.size(); b++)
            by_name[tuple_prop(sh.inputs[b], idx)] = {ApBit::ExistIn, c, int(b)};
        for (size_t b = 0; b < sh.outputs.size(); b++)
            by_name[tuple_prop(sh.outputs[b], idx)] = {ApBit::ExistOut, c, int(b)};
    }
    std::vector<ApBit> out;
    out.reserve(aps.size());
    for (const std::string& ap : aps) {
        auto it = by_name.find(ap);
        if (it == by_name.end()) throw ValidationError("unmapped proposition " + ap);
        out.push_back(it->second);
    }
    return out;
}

void check_props_against(const HyperFormula& f, const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs) {
    std::set<std::string> props(inputs.begin(), inputs.end());
    props.insert(outputs.begin(), outputs.end());
    for (auto& [q, v] : f.prefix) {
        (void)q;
        for (const std::string& p : props_of_var(f.body, v))
            if (!props.count(p))
                throw ValidationError("formula proposition '" + p + "' on trace variable '" + v +
                                      "' is not in the system interface");
    }
}

UniversalCoBuchi build_spec_ucw(const HyperFormula& f, const std::vector<std::string>& aps) {
    FormulaPtr zipped = zip_formula(f);
    return dualize_to_ucw(ltl_to_nba(mk_unary(Op::Not, zipped), aps));
}

std::string app(const std::string& fn, const std::vector<std::string>& args) {
    std::string s = "(" + fn;
    for (const std::string& a : args) {
        s += ' ';
        s += a;
    }
    s += ')';
    return s;
}

// ---------------------------------------------------------------------------
// Core grounding. Vertices are tuples (universal states, existential states,
// strategy state, lookahead buffer, automaton state); every tuple over the
// bounded domains gets coverage and counter constraints. Successor states of
// unknown tables appear as 0-ary constants inside the lambda applications, so
// congruence connects the clauses once the solver fixes the tables.

ConstraintSystem encode_core(const Shape& sh, const HyperFormula& f) {
    const int I = int(sh.inputs.size());
    const int O = int(sh.outputs.size());
    const int n = sh.n, m = sh.m, k = sh.k;
    const bool unknown_sys = sh.given == nullptr;
    if (sh.S < 1) throw ValidationError("system size must be at least 1");
    if (m > 0 && sh.X < 1) throw ValidationError("strategy size must be at least 1");
    if (k < 0) throw ValidationError("lookahead must be non-negative");
    if ((size_t(n) + m) * I > 24) throw ResourceError("too many composed input bits to ground");
    if (size_t(m) * I > 24) throw ResourceError("too many strategy output bits to ground");

    std::vector<std::string> aps = fused_props(sh.inputs, sh.outputs, n, m, sh.ef);
    std::vector<ApBit> bits = classify_aps(aps, sh);
    UniversalCoBuchi ucw = build_spec_ucw(f, aps);

    const int Q = int(ucw.num_states());
    const int S = sh.S;
    const int Xd = m > 0 ? sh.X : 1;
    const size_t U = size_t(1) << (size_t(n) * I);            // fresh universal letters
    const size_t Us = m > 0 ? (sh.ef ? 1 : U) : 1;            // strategy input letters
    const size_t E = m > 0 ? (size_t(1) << (size_t(m) * I)) : 1;
    size_t W = 1;
    for (int j = 0; j <= k; j++) W *= Us;  // strategy windows

    size_t V = size_t(Q);
    for (int c = 0; c < n + m; c++) V *= size_t(S);
    if (m > 0) V *= size_t(Xd);
    for (int j = 0; j < k; j++) V *= Us;
    if (V > kVertexCap) throw ResourceError("grounded run graph too large: " + std::to_string(V) +
                                            " vertices");

    // Per automaton state and input projection: reachable targets with the
    // label patterns that enable them. Input projection packs the input-ap
    // bits (in ap order); label patterns pack the output-ap bits.
    std::vector<int> in_pos, lab_pos;
    for (size_t i = 0; i < bits.size(); i++) {
        if (bits[i].kind == ApBit::UnivIn || bits[i].kind == ApBit::ExistIn)
            in_pos.push_back(int(i));
        else
            lab_pos.push_back(int(i));
    }
    const size_t num_letters = size_t(1) << aps.size();
    std::vector<uint32_t> in_proj(num_letters), lab_proj(num_letters);
    for (size_t l = 0; l < num_letters; l++) {
        uint32_t ip = 0, lp = 0;
        for (size_t i = 0; i < in_pos.size(); i++)
            if (l >> in_pos[i] & 1) ip |= uint32_t(1) << i;
        for (size_t i = 0; i < lab_pos.size(); i++)
            if (l >> lab_pos[i] & 1) lp |= uint32_t(1) << i;
        in_proj[l] = ip;
        lab_proj[l] = lp;
    }
    const size_t num_inprojs = size_t(1) << in_pos.size();
    // moves[q][ip] = sorted (target, sorted label patterns)
    std::vector<std::vector<std::vector<std::pair<int, std::vector<uint32_t>>>>> moves(Q);
    for (int q = 0; q < Q; q++) {
        std::vector<std::map<int, std::vector<uint32_t>>> buckets(num_inprojs);
        for (size_t l = 0; l < num_letters; l++)
            for (int q2 : ucw.delta[q][l]) buckets[in_proj[l]][q2].push_back(lab_proj[l]);
        moves[q].resize(num_inprojs);
        for (size_t ip = 0; ip < num_inprojs; ip++)
            for (auto& [q2, pats] : buckets[ip]) {
                std::sort(pats.begin(), pats.end());
                pats.erase(std::unique(pats.begin(), pats.end()), pats.end());
                moves[q][ip].push_back({q2, pats});
            }
    }

    ConstraintSystem cs;
    cs.has_system = unknown_sys;
    cs.system_size = S;
    cs.sys_inputs = sh.inputs;
    cs.sys_outputs = sh.outputs;
    cs.has_strategy = m > 0;
    cs.strategy_size = m > 0 ? Xd : 0;
    cs.arity_in = sh.ef ? 0 : n;
    cs.arity_out = m;
    cs.lookahead = k;
    cs.vertices = V;

    const int arity = n + m + (m > 0 ? 1 : 0) + k + 1;
    {
        std::string args;
        for (int i = 0; i < arity; i++) args += i ? " Int" : "Int";
        cs.decls.push_back("(declare-fun lamB (" + args + ") Bool)");
        cs.decls.push_back("(declare-fun lamN (" + args + ") Int)");
    }
    if (unknown_sys) {
        for (int s = 0; s < S; s++)
            for (size_t u = 0; u < (size_t(1) << I); u++)
                cs.decls.push_back("(declare-const tau_" + std::to_string(s) + "_" +
                                   std::to_string(u) + " Int)");
        for (int s = 0; s < S; s++)
            for (int o = 0; o < O; o++)
                cs.decls.push_back("(declare-const lab_" + std::to_string(s) + "_" +
                                   std::to_string(o) + " Bool)");
    }
    if (m > 0) {
        for (int x = 0; x < Xd; x++)
            for (size_t u = 0; u < Us; u++)
                cs.decls.push_back("(declare-const smu_" + std::to_string(x) + "_" +
                                   std::to_string(u) + " Int)");
        for (int x = 0; x < Xd; x++)
            for (size_t w = 0; w < W; w++)
                for (int j = 0; j < m * I; j++)
                    cs.decls.push_back("(declare-const sout_" + std::to_string(x) + "_" +
                                       std::to_string(w) + "_" + std::to_string(j) + " Bool)");
    }

    auto push_assert = [&](std::string a) {
        cs.asserts.push_back(std::move(a));
        if (cs.asserts.size() > kClauseCap) throw ResourceError("clause cap exceeded");
    };

    if (unknown_sys)
        for (int s = 0; s < S; s++)
            for (size_t u = 0; u < (size_t(1) << I); u++) {
                std::string c = "tau_" + std::to_string(s) + "_" + std::to_string(u);
                push_assert("(assert (and (>= " + c + " 0) (< " + c + " " + std::to_string(S) +
                            ")))");
            }
    if (m > 0)
        for (int x = 0; x < Xd; x++)
            for (size_t u = 0; u < Us; u++) {
                std::string c = "smu_" + std::to_string(x) + "_" + std::to_string(u);
                push_assert("(assert (and (>= " + c + " 0) (< " + c + " " + std::to_string(Xd) +
                            ")))");
            }

    const int init_state = unknown_sys ? 0 : sh.given->initial;
    {
        size_t bufs = 1;
        for (int j = 0; j < k; j++) bufs *= Us;
        for (size_t bflat = 0; bflat < bufs; bflat++) {
            std::vector<std::string> args;
            for (int c = 0; c < n + m; c++) args.push_back(std::to_string(init_state));
            if (m > 0) args.push_back("0");
            size_t t = bflat;
            std::vector<std::string> rev;
            for (int j = 0; j < k; j++) {
                rev.push_back(std::to_string(t % Us));
                t /= Us;
            }
            for (auto it = rev.rbegin(); it != rev.rend(); ++it) args.push_back(*it);
            args.push_back(std::to_string(ucw.initial));
            push_assert("(assert " + app("lamB", args) + ")");
        }
    }

    const uint32_t in_mask1 = (uint32_t(1) << I) - 1;
    auto succ_term = [&](int state, uint32_t u) {
        if (!unknown_sys) return std::to_string(sh.given->tau[state][u]);
        return "tau_" + std::to_string(state) + "_" + std::to_string(u);
    };

    std::vector<int> su(n), se(m);
    std::vector<size_t> buf(k);
    for (size_t flat = 0; flat < V; flat++) {
        size_t t = flat;
        int q = int(t % Q);
        t /= Q;
        for (int j = k - 1; j >= 0; j--) {
            buf[j] = t % Us;
            t /= Us;
        }
        int x = 0;
        if (m > 0) {
            x = int(t % Xd);
            t /= Xd;
        }
        for (int c = m - 1; c >= 0; c--) {
            se[c] = int(t % S);
            t /= S;
        }
        for (int c = n - 1; c >= 0; c--) {
            su[c] = int(t % S);
            t /= S;
        }

        std::vector<std::string> vargs;
        for (int c = 0; c < n; c++) vargs.push_back(std::to_string(su[c]));
        for (int c = 0; c < m; c++) vargs.push_back(std::to_string(se[c]));
        if (m > 0) vargs.push_back(std::to_string(x));
        for (int j = 0; j < k; j++) vargs.push_back(std::to_string(buf[j]));
        vargs.push_back(std::to_string(q));
        const std::string lamB_v = app("lamB", vargs);
        const std::string lamN_v = app("lamN", vargs);

        push_assert("(assert (and (>= " + lamN_v + " 0) (<= " + lamN_v + " " +
                    std::to_string(V) + ")))");

        for (uint32_t fresh = 0; fresh < U; fresh++) {
            const uint32_t consumed = k > 0 ? uint32_t(buf[0]) : fresh;
            const size_t mlet = consumed % Us;
            size_t w = 0, mult = 1;
            for (int j = 0; j < k; j++) {
                w += buf[j] * mult;
                mult *= Us;
            }
            w += (fresh % Us) * mult;

            std::vector<std::string> succ_u(n);
            for (int c = 0; c < n; c++) succ_u[c] = succ_term(su[c], consumed >> (c * I) & in_mask1);

            std::vector<std::string> nbuf;
            for (int j = 1; j < k; j++) nbuf.push_back(std::to_string(buf[j]));
            if (k > 0) nbuf.push_back(std::to_string(fresh % Us));

            for (uint32_t e = 0; e < E; e++) {
                // input projection of the fused letter at this position
                uint32_t ip = 0;
                for (size_t i = 0; i < in_pos.size(); i++) {
                    const ApBit& b = bits[in_pos[i]];
                    uint32_t val = b.kind == ApBit::UnivIn ? consumed >> (b.copy * I + b.bit) & 1
                                                           : e >> (b.copy * I + b.bit) & 1;
                    ip |= val << i;
                }
                if (moves[q][ip].empty()) continue;

                std::vector<std::string> ematch;
                for (int j = 0; j < m * I; j++) {
                    std::string c = "sout_" + std::to_string(x) + "_" + std::to_string(w) + "_" +
                                    std::to_string(j);
                    ematch.push_back(e >> j & 1 ? c : "(not " + c + ")");
                }

                std::vector<std::string> succ_e(m);
                for (int c = 0; c < m; c++) succ_e[c] = succ_term(se[c], e >> (c * I) & in_mask1);

                for (auto& [q2, pats] : moves[q][ip]) {
                    // label patterns as a disjunction of cubes over the copies'
                    // output bits; concrete labels filter instead
                    bool disj_true = false;
                    std::vector<std::string> cubes;
                    for (uint32_t pat : pats) {
                        bool dead = false;
                        std::vector<std::string> lits;
                        for (size_t i = 0; i < lab_pos.size() && !dead; i++) {
                            const ApBit& b = bits[lab_pos[i]];
                            int state = b.kind == ApBit::UnivOut ? su[b.copy] : se[b.copy];
                            bool want = pat >> i & 1;
                            if (!unknown_sys) {
                                bool have = sh.given->label[state] >> b.bit & 1;
                                if (have != want) dead = true;
                            } else {
                                std::string c = "lab_" + std::to_string(state) + "_" +
                                                std::to_string(b.bit);
                                lits.push_back(want ? c : "(not " + c + ")");
                            }
                        }
                        if (dead) continue;
                        if (lits.empty()) {
                            disj_true = true;
                            break;
                        }
                        cubes.push_back(lits.size() == 1 ? lits[0] : app("and", lits));
                    }
                    if (!disj_true && cubes.empty()) continue;

                    std::vector<std::string> v2;
                    for (int c = 0; c < n; c++) v2.push_back(succ_u[c]);
                    for (int c = 0; c < m; c++) v2.push_back(succ_e[c]);
                    if (m > 0)
                        v2.push_back("smu_" + std::to_string(x) + "_" + std::to_string(mlet));
                    for (const std::string& b : nbuf) v2.push_back(b);
                    v2.push_back(std::to_string(q2));
                    const std::string lamB_v2 = app("lamB", v2);
                    const std::string lamN_v2 = app("lamN", v2);

                    std::vector<std::string> ant;
                    ant.push_back(lamB_v);
                    for (const std::string& l : ematch) ant.push_back(l);
                    if (!disj_true && !cubes.empty())
                        ant.push_back(cubes.size() == 1 ? cubes[0] : app("or", cubes));
                    std::string antecedent = ant.size() == 1 ? ant[0] : app("and", ant);
                    std::string rhs =
                        ucw.rejecting[q2] ? "(+ " + lamN_v2 + " 1)" : lamN_v2;
                    push_assert("(assert (=> " + antecedent + " (and " + lamB_v2 + " (>= " +
                                lamN_v + " " + rhs + "))))");
                }
            }
        }
    }
    return cs;
}

} // namespace

// ---------------------------------------------------------------------------
// Public encoders.

ConstraintSystem encode_strategy_synthesis(const TransitionSystem& sys, const HyperFormula& f,
                                           int strategy_size, int lookahead) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ForallExists)
        throw ValidationError("strategy synthesis expects a forall* exists* formula");
    check_props_against(f, sys.inputs, sys.outputs);
    Shape sh;
    sh.ef = false;
    sh.n = cls.universals;
    sh.m = cls.existentials;
    sh.given = &sys;
    sh.S = int(sys.num_states());
    sh.inputs = sys.inputs;
    sh.outputs = sys.outputs;
    sh.X = strategy_size;
    sh.k = lookahead;
    return encode_core(sh, f);
}

static void check_signature(const Signature& sig) {
    std::set<std::string> seen;
    for (const std::string& p : sig.inputs)
        if (!seen.insert(p).second) throw ValidationError("duplicate signature proposition " + p);
    for (const std::string& p : sig.outputs)
        if (!seen.insert(p).second) throw ValidationError("duplicate signature proposition " + p);
}

ConstraintSystem encode_system_synthesis(const Signature& sig, const HyperFormula& f,
                                         int system_size, int strategy_size, int lookahead) {
    check_signature(sig);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ForallExists && cls.kind != PrefixClass::UniversalOnly)
        throw ValidationError("system synthesis expects a forall* or forall* exists* formula");
    check_props_against(f, sig.inputs, sig.outputs);
    Shape sh;
    sh.ef = false;
    sh.n = cls.universals;
    sh.m = cls.existentials;
    sh.given = nullptr;
    sh.S = system_size;
    sh.inputs = sig.inputs;
    sh.outputs = sig.outputs;
    sh.X = cls.existentials > 0 ? strategy_size : 1;
    sh.k = cls.existentials > 0 ? lookahead : 0;
    return encode_core(sh, f);
}

ConstraintSystem encode_exists_forall_synthesis(const TransitionSystem& sys,
                                                const HyperFormula& f, int witness_size) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ExistsForall)
        throw ValidationError("witness synthesis expects an exists* forall* formula");
    check_props_against(f, sys.inputs, sys.outputs);
    Shape sh;
    sh.ef = true;
    sh.n = cls.universals;
    sh.m = cls.existentials;
    sh.given = &sys;
    sh.S = int(sys.num_states());
    sh.inputs = sys.inputs;
    sh.outputs = sys.outputs;
    sh.X = witness_size;
    sh.k = 0;
    return encode_core(sh, f);
}

ConstraintSystem encode_exists_forall_synthesis(const Signature& sig, const HyperFormula& f,
                                                int system_size, int witness_size) {
    check_signature(sig);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ExistsForall)
        throw ValidationError("witness synthesis expects an exists* forall* formula");
    check_props_against(f, sig.inputs, sig.outputs);
    Shape sh;
    sh.ef = true;
    sh.n = cls.universals;
    sh.m = cls.existentials;
    sh.given = nullptr;
    sh.S = system_size;
    sh.inputs = sig.inputs;
    sh.outputs = sig.outputs;
    sh.X = witness_size;
    sh.k = 0;
    return encode_core(sh, f);
}

std::string emit_smtlib(const ConstraintSystem& cs) {
    std::string s;
    size_t bytes = 32;
    for (const std::string& d : cs.decls) bytes += d.size() + 1;
    for (const std::string& a : cs.asserts) bytes += a.size() + 1;
    s.reserve(bytes + 32);
    s += "(set-logic QF_UFLIA)\n";
    for (const std::string& d : cs.decls) {
        s += d;
        s += '\n';
    }
    for (const std::string& a : cs.asserts) {
        s += a;
        s += '\n';
    }
    s += "(check-sat)\n(get-model)\n";
    return s;
}

// ---------------------------------------------------------------------------
// Solver subprocess.

std::string default_solver_command() {
    if (const char* env = getenv("HLV_SOLVER_CMD"); env && *env) return env;
    if (const char* path = getenv("PATH")) {
        std::string p(path);
        size_t at = 0;
        while (at <= p.size()) {
            size_t colon = p.find(':', at);
            std::string dir = p.substr(at, colon == std::string::npos ? std::string::npos
                                                                      : colon - at);
            if (!dir.empty() && access((dir + "/z3").c_str(), X_OK) == 0) return "z3 -in";
            if (colon == std::string::npos) break;
            at = colon + 1;
        }
    }
    return "";
}

SolverResult run_solver(const std::string& command, const std::string& script, int timeout_sec) {
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { signal(SIGPIPE, SIG_IGN); });

    int inp[2], outp[2], errp[2];
    if (pipe(inp) != 0 || pipe(outp) != 0 || pipe(errp) != 0)
        throw SolverError("pipe: " + std::string(strerror(errno)));
    pid_t pid = fork();
    if (pid < 0) throw SolverError("fork: " + std::string(strerror(errno)));
    if (pid == 0) {
        setpgid(0, 0);
        dup2(inp[0], 0);
        dup2(outp[1], 1);
        dup2(errp[1], 2);
        for (int fd : {inp[0], inp[1], outp[0], outp[1], errp[0], errp[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
        _exit(127);
    }
    close(inp[0]);
    close(outp[1]);
    close(errp[1]);
    for (int fd : {inp[1], outp[0], errp[0]}) fcntl(fd, F_SETFL, O_NONBLOCK);

    std::string out, err;
    size_t written = 0;
    bool writing = true, reading_out = true, reading_err = true, timed_out = false;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_sec);
    while (writing || reading_out || reading_err) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            timed_out = true;
            break;
        }
        int ms = int(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                         .count());
        ms = std::min(ms, 1000);
        struct pollfd fds[3];
        int nf = 0, iw = -1, io = -1, ie = -1;
        if (writing) {
            fds[nf] = {inp[1], POLLOUT, 0};
            iw = nf++;
        }
        if (reading_out) {
            fds[nf] = {outp[0], POLLIN, 0};
            io = nf++;
        }
        if (reading_err) {
            fds[nf] = {errp[0], POLLIN, 0};
            ie = nf++;
        }
        int rc = poll(fds, nf, ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (iw >= 0 && fds[iw].revents) {
            if (fds[iw].revents & (POLLERR | POLLHUP)) {
                close(inp[1]);
                writing = false;
            } else if (fds[iw].revents & POLLOUT) {
                size_t chunk = std::min<size_t>(script.size() - written, size_t(1) << 16);
                ssize_t w = write(inp[1], script.data() + written, chunk);
                if (w > 0) written += size_t(w);
                if ((w < 0 && errno != EAGAIN && errno != EINTR) || written == script.size()) {
                    close(inp[1]);
                    writing = false;
                }
            }
        }
        auto drain = [&](int idx, int fd, std::string& dst, bool& flag) {
            if (idx < 0 || !fds[idx].revents) return;
            char buf[1 << 16];
            ssize_t r = read(fd, buf, sizeof buf);
            if (r > 0)
                dst.append(buf, size_t(r));
            else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
                close(fd);
                flag = false;
            }
        };
        drain(io, outp[0], out, reading_out);
        drain(ie, errp[0], err, reading_err);
    }
    if (timed_out) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
    }
    if (writing) close(inp[1]);
    if (reading_out) close(outp[0]);
    if (reading_err) close(errp[0]);
    int status = 0;
    waitpid(pid, &status, 0);

    SolverResult res{SolverResult::Error, "", ""};
    if (timed_out) {
        res.status = SolverResult::Timeout;
        res.message = "solver timed out after " + std::to_string(timeout_sec) + "s";
        return res;
    }
    size_t at = 0;
    while (at < out.size()) {
        size_t nl = out.find('\n', at);
        size_t end = nl == std::string::npos ? out.size() : nl;
        std::string line = out.substr(at, end - at);
        size_t next = nl == std::string::npos ? out.size() : nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        size_t first = line.find_first_not_of(' ');
        if (first != std::string::npos && first > 0) line = line.substr(first);
        if (line == "sat") {
            res.status = SolverResult::Sat;
            res.model = out.substr(next);
            return res;
        }
        if (line == "unsat") {
            res.status = SolverResult::Unsat;
            return res;
        }
        if (line == "unknown") {
            res.status = SolverResult::Unknown;
            return res;
        }
        if (line.rfind("(error", 0) == 0) {
            res.message = line.substr(0, 2000);
            return res;
        }
        at = next;
    }
    std::string why = "no solver verdict";
    if (WIFEXITED(status)) why += " (exit " + std::to_string(WEXITSTATUS(status)) + ")";
    if (!err.empty()) why += ": " + err.substr(0, 2000);
    res.message = why;
    return res;
}

// ---------------------------------------------------------------------------
// Model decoding.

namespace {

struct SExpr {
    bool leaf = false;
    std::string atom;
    std::vector<SExpr> kids;
};

std::vector<SExpr> parse_sexprs(const std::string& text) {
    std::vector<std::string> toks;
    std::string cur;
    for (char ch : text) {
        if (ch == '(' || ch == ')') {
            if (!cur.empty()) {
                toks.push_back(cur);
                cur.clear();
            }
            toks.push_back(std::string(1, ch));
        } else if (isspace((unsigned char)ch)) {
            if (!cur.empty()) {
                toks.push_back(cur);
                cur.clear();
            }
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) toks.push_back(cur);

    std::vector<SExpr> top;
    std::vector<SExpr*> stack;
    for (const std::string& t : toks) {
        if (t == "(") {
            SExpr e;
            if (stack.empty()) {
                top.push_back(e);
                stack.push_back(&top.back());
            } else {
                stack.back()->kids.push_back(e);
                stack.push_back(&stack.back()->kids.back());
            }
        } else if (t == ")") {
            if (stack.empty()) throw SolverError("unbalanced model output");
            stack.pop_back();
        } else {
            SExpr e;
            e.leaf = true;
            e.atom = t;
            if (stack.empty())
                top.push_back(e);
            else
                stack.back()->kids.push_back(e);
        }
    }
    if (!stack.empty()) throw SolverError("unbalanced model output");
    return top;
}

void collect_defs(const SExpr& e, std::map<std::string, long long>& ints,
                  std::map<std::string, bool>& bools) {
    if (e.leaf) return;
    if (e.kids.size() == 5 && e.kids[0].leaf && e.kids[0].atom == "define-fun" &&
        e.kids[1].leaf && !e.kids[2].leaf) {
        if (!e.kids[2].kids.empty()) return;  // lambda functions; the tables are re-derived
        const SExpr& val = e.kids[4];
        if (val.leaf) {
            if (val.atom == "true")
                bools[e.kids[1].atom] = true;
            else if (val.atom == "false")
                bools[e.kids[1].atom] = false;
            else
                ints[e.kids[1].atom] = std::stoll(val.atom);
        } else if (val.kids.size() == 2 && val.kids[0].leaf && val.kids[0].atom == "-" &&
                   val.kids[1].leaf) {
            ints[e.kids[1].atom] = -std::stoll(val.kids[1].atom);
        }
        return;
    }
    for (const SExpr& kid : e.kids) collect_defs(kid, ints, bools);
}

} // namespace

DecodedSolution decode_solution(const ConstraintSystem& cs, const std::string& model) {
    std::map<std::string, long long> ints;
    std::map<std::string, bool> bools;
    for (const SExpr& e : parse_sexprs(model)) collect_defs(e, ints, bools);

    auto get_int = [&](const std::string& name, long long lo, long long hi) {
        auto it = ints.find(name);
        long long v = it == ints.end() ? 0 : it->second;
        if (v < lo || v >= hi)
            throw SolverError("model value " + name + " = " + std::to_string(v) +
                              " out of range");
        return v;
    };
    auto get_bool = [&](const std::string& name) {
        auto it = bools.find(name);
        return it == bools.end() ? false : it->second;
    };

    DecodedSolution dec;
    const int I = int(cs.sys_inputs.size());
    if (cs.has_system) {
        TransitionSystem t;
        t.inputs = cs.sys_inputs;
        t.outputs = cs.sys_outputs;
        t.initial = 0;
        for (int s = 0; s < cs.system_size; s++) t.state_names.push_back("s" + std::to_string(s));
        t.tau.assign(cs.system_size, std::vector<int>(size_t(1) << I, 0));
        t.label.assign(cs.system_size, 0);
        for (int s = 0; s < cs.system_size; s++) {
            for (size_t u = 0; u < (size_t(1) << I); u++)
                t.tau[s][u] = int(get_int("tau_" + std::to_string(s) + "_" + std::to_string(u), 0,
                                          cs.system_size));
            for (size_t o = 0; o < cs.sys_outputs.size(); o++)
                if (get_bool("lab_" + std::to_string(s) + "_" + std::to_string(o)))
                    t.label[s] |= uint32_t(1) << o;
        }
        validate_system(t);
        dec.system = std::move(t);
    }
    if (cs.has_strategy) {
        StrategySystem st;
        st.arity_in = cs.arity_in;
        st.arity_out = cs.arity_out;
        st.lookahead = cs.lookahead;
        st.base_inputs = cs.sys_inputs;
        st.initial = 0;
        for (int x = 0; x < cs.strategy_size; x++)
            st.state_names.push_back("x" + std::to_string(x));
        const size_t Us = st.num_letters();
        const size_t W = st.num_windows();
        st.mu.assign(cs.strategy_size, std::vector<int>(Us, 0));
        st.out.assign(cs.strategy_size, std::vector<uint32_t>(W, 0));
        for (int x = 0; x < cs.strategy_size; x++) {
            for (size_t u = 0; u < Us; u++)
                st.mu[x][u] = int(get_int("smu_" + std::to_string(x) + "_" + std::to_string(u), 0,
                                          cs.strategy_size));
            for (size_t w = 0; w < W; w++)
                for (int j = 0; j < cs.arity_out * I; j++)
                    if (get_bool("sout_" + std::to_string(x) + "_" + std::to_string(w) + "_" +
                                 std::to_string(j)))
                        st.out[x][w] |= uint32_t(1) << j;
        }
        validate_strategy(st);
        dec.strategy = std::move(st);
    }
    return dec;
}

// ---------------------------------------------------------------------------
// Bound loop.

namespace {

struct JobShape {
    PrefixClass cls;
    bool ef = false;
    bool given = false;
    int n = 0, m = 0;
};

JobShape job_shape(const SynthJob& job) {
    JobShape js;
    js.cls = classify_prefix(job.f);
    js.given = job.system.has_value();
    switch (js.cls.kind) {
    case PrefixClass::ForallExists:
    case PrefixClass::UniversalOnly:
        js.ef = false;
        break;
    case PrefixClass::ExistsForall:
        js.ef = true;
        break;
    default:
        throw ValidationError(
            "bounded synthesis handles forall*, forall* exists*, and exists* forall* prefixes");
    }
    js.n = js.cls.universals;
    js.m = js.cls.existentials;
    if (js.cls.kind == PrefixClass::UniversalOnly && js.given)
        throw ValidationError("nothing to synthesize: the system is given and the formula has no "
                              "existential quantifiers (use check)");
    if (!js.given && !job.signature)
        throw ValidationError("system synthesis needs a signature");
    if (js.given) validate_system(*job.system);
    return js;
}

std::string bounds_tag(const SynthBounds& b) {
    return "s" + std::to_string(b.system_size) + "_x" + std::to_string(b.strategy_size) + "_k" +
           std::to_string(b.lookahead);
}

} // namespace

SynthResult synthesis_loop(const SynthJob& job) {
    JobShape js = job_shape(job);
    std::string cmd = job.solver_cmd.empty() ? default_solver_command() : job.solver_cmd;
    if (cmd.empty())
        throw SolverError("no SMT solver configured; pass a solver command or set HLV_SOLVER_CMD");

    std::vector<int> sys_sizes, strat_sizes, lookaheads;
    if (js.given)
        sys_sizes = {0};
    else {
        if (job.max_system < 1) throw ValidationError("max system size must be at least 1");
        for (int s = 1; s <= job.max_system; s++) sys_sizes.push_back(s);
    }
    if (js.m == 0)
        strat_sizes = {0};
    else {
        if (job.max_strategy < 1) throw ValidationError("max strategy size must be at least 1");
        for (int x = 1; x <= job.max_strategy; x++) strat_sizes.push_back(x);
    }
    if (js.m == 0 || js.ef)
        lookaheads = {0};
    else {
        if (job.max_lookahead < 0) throw ValidationError("max lookahead must be non-negative");
        for (int k = 0; k <= job.max_lookahead; k++) lookaheads.push_back(k);
    }

    SynthResult res;
    bool inconclusive = false;
    for (int s : sys_sizes)
        for (int x : strat_sizes)
            for (int k : lookaheads) {
                SynthBounds b{s, x, k};
                ConstraintSystem cs;
                try {
                    if (js.m == 0)
                        cs = encode_system_synthesis(*job.signature, job.f, s, 0, 0);
                    else if (!js.ef && js.given)
                        cs = encode_strategy_synthesis(*job.system, job.f, x, k);
                    else if (!js.ef)
                        cs = encode_system_synthesis(*job.signature, job.f, s, x, k);
                    else if (js.given)
                        cs = encode_exists_forall_synthesis(*job.system, job.f, x);
                    else
                        cs = encode_exists_forall_synthesis(*job.signature, job.f, s, x);
                } catch (const ResourceError& e) {
                    res.log.push_back({b, std::string("resource-cap: ") + e.what(), 0});
                    inconclusive = true;
                    continue;
                }
                std::string script = emit_smtlib(cs);
                if (!job.dump_smt.empty()) {
                    std::string path = job.dump_smt + "." + bounds_tag(b) + ".smt2";
                    std::ofstream f(path, std::ios::binary);
                    f << script;
                    if (!f) throw SolverError("cannot write " + path);
                }
                SolverResult sr = run_solver(cmd, script, job.timeout_sec);
                switch (sr.status) {
                case SolverResult::Sat: {
                    DecodedSolution dec = decode_solution(cs, sr.model);
                    const TransitionSystem& vsys = js.given ? *job.system : *dec.system;
                    McResult v;
                    if (js.m == 0)
                        v = mc_universal(vsys, job.f);
                    else if (!js.ef)
                        v = mc_forall_exists(vsys, job.f, *dec.strategy);
                    else
                        v = mc_exists_forall(vsys, job.f, *dec.strategy);
                    if (v.outcome != Outcome::Holds)
                        throw SolverError("decoded solution failed re-verification at bounds " +
                                          bounds_tag(b) + "; the encoding and the model checker "
                                          "disagree");
                    res.log.push_back({b, "sat", cs.clauses()});
                    res.status = SynthResult::Realizable;
                    res.bounds = b;
                    res.system = std::move(dec.system);
                    res.strategy = std::move(dec.strategy);
                    res.verification = std::move(v);
                    return res;
                }
                case SolverResult::Unsat:
                    res.log.push_back({b, "unsat", cs.clauses()});
                    break;
                case SolverResult::Timeout:
                    res.log.push_back({b, "timeout", cs.clauses()});
                    inconclusive = true;
                    break;
                case SolverResult::Unknown:
                    res.log.push_back({b, "unknown", cs.clauses()});
                    inconclusive = true;
                    break;
                case SolverResult::Error:
                    throw SolverError("solver failed at bounds " + bounds_tag(b) + ": " +
                                      sr.message);
                }
            }
    res.status = inconclusive ? SynthResult::Unknown : SynthResult::ExhaustedBounds;
    return res;
}

// ---------------------------------------------------------------------------
// Brute-force baseline: enumerate candidate tables at exactly the given
// bounds and model check each one. Candidates whose transition table does not
// discover states in numeric breadth-first order are skipped; every skipped
// table is isomorphic to an enumerated one or has unreachable states and is
// then behavior-equivalent to a candidate of a smaller bound, which the SMT
// encoding also admits by leaving states unconstrained.

namespace {

struct Odometer {
    std::vector<uint32_t> digits;
    std::vector<uint32_t> radix;
    explicit Odometer(std::vector<uint32_t> r) : digits(r.size(), 0), radix(std::move(r)) {}
    bool next() {
        for (size_t i = 0; i < digits.size(); i++) {
            if (++digits[i] < radix[i]) return true;
            digits[i] = 0;
        }
        return false;
    }
    size_t space() const {
        size_t total = 1;
        for (uint32_t r : radix) {
            if (r != 0 && total > SIZE_MAX / r) return SIZE_MAX;
            total *= r;
        }
        return total;
    }
};

bool canonical_reachable(const std::vector<std::vector<int>>& table, int states) {
    std::vector<int> order{0};
    std::vector<char> seen(size_t(states), 0);
    seen[0] = 1;
    int next_name = 1;
    for (size_t i = 0; i < order.size(); i++)
        for (int succ : table[order[i]]) {
            if (seen[succ]) continue;
            if (succ != next_name) return false;
            seen[succ] = 1;
            next_name++;
            order.push_back(succ);
        }
    return int(order.size()) == states;
}

} // namespace

BruteForceResult solve_bruteforce(const SynthJob& job, const SynthBounds& bounds, size_t cap) {
    JobShape js = job_shape(job);
    const std::vector<std::string>& inputs = js.given ? job.system->inputs : job.signature->inputs;
    const std::vector<std::string>& outputs =
        js.given ? job.system->outputs : job.signature->outputs;
    const int I = int(inputs.size());
    const int n = js.n, m = js.m;
    const int k = js.ef ? 0 : bounds.lookahead;
    const int X = bounds.strategy_size;
    const int S = js.given ? int(job.system->num_states()) : bounds.system_size;
    if (!js.given && S < 1) throw ValidationError("system size must be at least 1");
    if (m > 0 && X < 1) throw ValidationError("strategy size must be at least 1");

    std::vector<std::string> aps = fused_props(inputs, outputs, n, m, js.ef);
    UniversalCoBuchi ucw = build_spec_ucw(job.f, aps);

    const int arity_in = js.ef ? 0 : n;
    const size_t Us = size_t(1) << (size_t(arity_in) * I);
    size_t W = 1;
    for (int j = 0; j <= k; j++) W *= Us;
    const uint32_t out_radix = uint32_t(1) << (size_t(m) * I);

    std::vector<uint32_t> sys_radix, strat_radix;
    if (!js.given) {
        for (int s = 0; s < S; s++)
            for (size_t u = 0; u < (size_t(1) << I); u++) sys_radix.push_back(uint32_t(S));
        for (int s = 0; s < S; s++) sys_radix.push_back(uint32_t(1) << outputs.size());
    }
    if (m > 0) {
        for (int x = 0; x < X; x++)
            for (size_t u = 0; u < Us; u++) strat_radix.push_back(uint32_t(X));
        for (int x = 0; x < X; x++)
            for (size_t w = 0; w < W; w++) strat_radix.push_back(out_radix);
    }
    {
        Odometer so(sys_radix), to(strat_radix);
        size_t space = so.space();
        size_t tspace = to.space();
        if (space != 0 && tspace > SIZE_MAX / space)
            space = SIZE_MAX;
        else
            space *= tspace;
        if (space > cap)
            throw ResourceError("candidate space " +
                                (space == SIZE_MAX ? std::string("overflows")
                                                   : std::to_string(space)) +
                                " exceeds cap " + std::to_string(cap));
    }

    BruteForceResult res;
    auto verify = [&](const TransitionSystem& sys, const StrategySystem* strat) {
        TransitionSystem univ = self_composition(sys, n, js.ef ? m : 0);
        std::optional<TransitionSystem> exist;
        if (m > 0) exist = self_composition(sys, m, js.ef ? 0 : n);
        res.candidates++;
        RunGraph g = build_run_graph(univ, exist ? &*exist : nullptr, strat, ucw);
        return std::holds_alternative<Annotation>(check_accepting(g));
    };

    auto make_strategy = [&](const Odometer& od) {
        StrategySystem st;
        st.arity_in = arity_in;
        st.arity_out = m;
        st.lookahead = k;
        st.base_inputs = inputs;
        st.initial = 0;
        for (int x = 0; x < X; x++) st.state_names.push_back("x" + std::to_string(x));
        st.mu.assign(size_t(X), std::vector<int>(Us, 0));
        st.out.assign(size_t(X), std::vector<uint32_t>(W, 0));
        size_t at = 0;
        for (int x = 0; x < X; x++)
            for (size_t u = 0; u < Us; u++) st.mu[x][u] = int(od.digits[at++]);
        for (int x = 0; x < X; x++)
            for (size_t w = 0; w < W; w++) st.out[x][w] = od.digits[at++];
        return st;
    };

    auto strategies_for = [&](const TransitionSystem& sys) -> bool {
        Odometer od(strat_radix);
        do {
            StrategySystem st = make_strategy(od);
            if (X > 1 && !canonical_reachable(st.mu, X)) continue;
            if (verify(sys, &st)) {
                res.realizable = true;
                res.strategy = std::move(st);
                return true;
            }
        } while (od.next());
        return false;
    };

    if (js.given) {
        if (m == 0) throw ValidationError("nothing to enumerate");
        strategies_for(*job.system);
        return res;
    }

    Odometer od(sys_radix);
    do {
        TransitionSystem sys;
        sys.inputs = inputs;
        sys.outputs = outputs;
        sys.initial = 0;
        for (int s = 0; s < S; s++) sys.state_names.push_back("s" + std::to_string(s));
        sys.tau.assign(size_t(S), std::vector<int>(size_t(1) << I, 0));
        sys.label.assign(size_t(S), 0);
        size_t at = 0;
        for (int s = 0; s < S; s++)
            for (size_t u = 0; u < (size_t(1) << I); u++) sys.tau[s][u] = int(od.digits[at++]);
        for (int s = 0; s < S; s++) sys.label[s] = od.digits[at++];
        if (S > 1 && !canonical_reachable(sys.tau, S)) continue;
        if (m == 0) {
            if (verify(sys, nullptr)) {
                res.realizable = true;
                res.system = std::move(sys);
                return res;
            }
        } else if (strategies_for(sys)) {
            res.system = std::move(sys);
            return res;
        }
    } while (od.next());
    return res;
}

} // namespace hlv
