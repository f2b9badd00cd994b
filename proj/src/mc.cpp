#include "hlv/mc.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>

namespace hlv {

namespace {

struct ApSource {
    enum Kind { UnivIn, UnivOut, ExistIn, ExistOut } kind;
    int bit;
};

int find_prop(const std::vector<std::string>& props, const std::string& name) {
    auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : int(it - props.begin());
}

} // namespace

RunGraph build_run_graph(const TransitionSystem& univ, const TransitionSystem* exist,
                         const StrategySystem* strat, const UniversalCoBuchi& ucw,
                         size_t vertex_cap) {
    // Map each automaton proposition to the component producing it.
    std::vector<ApSource> sources;
    for (const std::string& ap : ucw.aps) {
        int b;
        if ((b = find_prop(univ.inputs, ap)) >= 0)
            sources.push_back({ApSource::UnivIn, b});
        else if ((b = find_prop(univ.outputs, ap)) >= 0)
            sources.push_back({ApSource::UnivOut, b});
        else if (exist && (b = find_prop(exist->inputs, ap)) >= 0)
            sources.push_back({ApSource::ExistIn, b});
        else if (exist && (b = find_prop(exist->outputs, ap)) >= 0)
            sources.push_back({ApSource::ExistOut, b});
        else
            throw ValidationError("automaton proposition '" + ap +
                                  "' is not produced by any system component");
    }
    int k = strat ? strat->lookahead : 0;
    size_t U = univ.num_input_vals();
    if (strat) {
        size_t want = strat->arity_in == 0 ? 1 : strat->num_letters();
        if (strat->arity_in != 0 && want != U)
            throw ValidationError("strategy input alphabet does not match the universal part");
        if (exist && strat->base_inputs.size() * size_t(strat->arity_out) !=
                         exist->inputs.size())
            throw ValidationError("strategy output arity does not match the existential part");
    }

    RunGraph g;
    std::map<std::vector<int>, int> index;
    auto vertex_id = [&](int su, int se, int x, const std::vector<uint32_t>& buf, int q) {
        std::vector<int> key{su, se, x, q};
        for (uint32_t b : buf) key.push_back(int(b));
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = int(g.verts.size());
        RunGraph::Vertex v;
        v.univ_state = su;
        v.exist_state = se;
        v.strat_state = x;
        v.buffer = buf;
        v.aut_state = q;
        v.rejecting = ucw.rejecting[q] != 0;
        g.verts.push_back(std::move(v));
        g.adj.emplace_back();
        index[key] = id;
        if (g.verts.size() > vertex_cap) throw ResourceError("run graph vertex cap exceeded");
        return id;
    };

    // All initial buffer contents are explored: the first k universal
    // letters are part of the quantified input word.
    std::vector<std::vector<uint32_t>> init_buffers{{}};
    for (int i = 0; i < k; i++) {
        std::vector<std::vector<uint32_t>> next;
        for (auto& b : init_buffers) {
            for (uint32_t u = 0; u < U; u++) {
                auto b2 = b;
                b2.push_back(u);
                next.push_back(std::move(b2));
            }
        }
        init_buffers = std::move(next);
    }
    int se0 = exist ? exist->initial : 0;
    int x0 = strat ? strat->initial : 0;
    for (auto& b : init_buffers)
        g.initials.push_back(vertex_id(univ.initial, se0, x0, b, ucw.initial));

    std::deque<int> work(g.initials.begin(), g.initials.end());
    std::vector<char> expanded;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        if (size_t(id) < expanded.size() && expanded[id]) continue;
        if (size_t(id) >= expanded.size()) expanded.resize(id + 1, 0);
        expanded[id] = 1;
        RunGraph::Vertex v = g.verts[id];
        for (uint32_t fresh = 0; fresh < U; fresh++) {
            uint32_t consumed = k == 0 ? fresh : v.buffer[0];
            uint32_t e = 0;
            int x2 = 0;
            if (strat) {
                size_t w;
                if (strat->arity_in == 0) {
                    w = 0;
                } else {
                    w = 0;
                    size_t mult = 1;
                    for (int j = 1; j <= k; j++) {
                        // window letter j-1 (buffer) then fresh at position k
                        w += size_t(v.buffer[j - 1]) * mult;
                        mult *= U;
                    }
                    if (k == 0) {
                        w = fresh;
                    } else {
                        w += size_t(fresh) * mult;
                    }
                }
                e = strat->out[v.strat_state][w];
                x2 = strat->mu[v.strat_state][strat->arity_in == 0 ? 0 : consumed];
            }
            uint32_t letter = 0;
            uint32_t ulab = univ.label[v.univ_state];
            uint32_t elab = exist ? exist->label[v.exist_state] : 0;
            for (size_t i = 0; i < sources.size(); i++) {
                bool on = false;
                switch (sources[i].kind) {
                    case ApSource::UnivIn: on = (consumed >> sources[i].bit) & 1; break;
                    case ApSource::UnivOut: on = (ulab >> sources[i].bit) & 1; break;
                    case ApSource::ExistIn: on = (e >> sources[i].bit) & 1; break;
                    case ApSource::ExistOut: on = (elab >> sources[i].bit) & 1; break;
                }
                if (on) letter |= uint32_t(1) << i;
            }
            int su2 = univ.tau[v.univ_state][consumed];
            int se2 = exist ? exist->tau[v.exist_state][e] : 0;
            std::vector<uint32_t> buf2;
            if (k > 0) {
                buf2.assign(v.buffer.begin() + 1, v.buffer.end());
                buf2.push_back(fresh);
            }
            for (int q2 : ucw.delta[v.aut_state][letter]) {
                size_t before = g.verts.size();
                int tid = vertex_id(su2, se2, x2, buf2, q2);
                g.adj[id].push_back({tid, consumed, fresh, e});
                if (g.verts.size() > before) work.push_back(tid);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Counterexample decoding

namespace {

const RunGraph::Edge& edge_between(const RunGraph& g, int from, int to) {
    for (const RunGraph::Edge& e : g.adj[from])
        if (e.to == to) return e;
    throw std::logic_error("witness path uses a missing edge");
}

// Extracts per-copy letters from a run graph lasso. Copy c of a composed
// system occupies bit ranges [c*|I|, (c+1)*|I|) of input masks and
// [c*|O|, (c+1)*|O|) of labels.
void decode_copies(const RunGraph& g, const std::vector<int>& path,
                   const TransitionSystem& base, const std::vector<std::string>& vars,
                   bool existential, const TransitionSystem* comp,
                   std::map<std::string, LassoTrace>& out, bool loop_part) {
    if (!comp || vars.empty()) return;
    size_t bi = base.inputs.size(), bo = base.outputs.size();
    uint32_t imask = (uint32_t(1) << bi) - 1;
    for (size_t step = 0; step + 1 < path.size(); step++) {
        const RunGraph::Edge& e = edge_between(g, path[step], path[step + 1]);
        const RunGraph::Vertex& v = g.verts[path[step]];
        uint32_t in = existential ? e.chosen : e.consumed;
        uint32_t lab = existential ? comp->label[v.exist_state] : comp->label[v.univ_state];
        for (size_t c = 0; c < vars.size(); c++) {
            std::set<std::string> letter = mask_valuation(base.inputs, (in >> (c * bi)) & imask);
            for (size_t o = 0; o < bo; o++)
                if ((lab >> (c * bo + o)) & 1) letter.insert(base.outputs[o]);
            auto& t = out[vars[c]];
            (loop_part ? t.loop : t.stem).push_back(std::move(letter));
        }
    }
}

std::map<std::string, LassoTrace> decode_counterexample(
    const RunGraph& g, const RejectingLasso& w, const TransitionSystem& base,
    const std::vector<std::string>& univ_vars, const std::vector<std::string>& exist_vars,
    const TransitionSystem* univ, const TransitionSystem* exist) {
    std::map<std::string, LassoTrace> out;
    decode_copies(g, w.stem, base, univ_vars, false, univ, out, false);
    decode_copies(g, w.cycle, base, univ_vars, false, univ, out, true);
    decode_copies(g, w.stem, base, exist_vars, true, exist, out, false);
    decode_copies(g, w.cycle, base, exist_vars, true, exist, out, true);
    return out;
}

void check_formula_props(const TransitionSystem& sys, const HyperFormula& f) {
    std::set<std::string> props(sys.inputs.begin(), sys.inputs.end());
    props.insert(sys.outputs.begin(), sys.outputs.end());
    for (auto& [q, v] : f.prefix) {
        (void)q;
        for (const std::string& p : props_of_var(f.body, v))
            if (!props.count(p))
                throw ValidationError("formula proposition '" + p + "' on trace variable '" + v +
                                      "' is not a system proposition");
    }
}

UniversalCoBuchi formula_ucw(const HyperFormula& f, const std::vector<std::string>& aps,
                             McStats& stats) {
    FormulaPtr zipped = zip_formula(f);
    NondetBuchi nba = ltl_to_nba(mk_unary(Op::Not, zipped), aps);
    stats.automaton_states = nba.num_states();
    return dualize_to_ucw(nba);
}

std::vector<std::string> sorted_props(const TransitionSystem& a, const TransitionSystem* b) {
    std::set<std::string> s(a.inputs.begin(), a.inputs.end());
    s.insert(a.outputs.begin(), a.outputs.end());
    if (b) {
        s.insert(b->inputs.begin(), b->inputs.end());
        s.insert(b->outputs.begin(), b->outputs.end());
    }
    return std::vector<std::string>(s.begin(), s.end());
}

size_t count_edges(const RunGraph& g) {
    size_t e = 0;
    for (auto& a : g.adj) e += a.size();
    return e;
}

} // namespace

McResult mc_universal(const TransitionSystem& sys, const HyperFormula& f) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::UniversalOnly)
        throw ValidationError("mc_universal expects a forall-only formula");
    check_formula_props(sys, f);
    McResult r;
    if (cls.universals == 0) {
        r.outcome = bounded_eval(f.body, {}) ? Outcome::Holds : Outcome::Fails;
        return r;
    }
    TransitionSystem univ = self_composition(sys, cls.universals);
    std::vector<std::string> aps = sorted_props(univ, nullptr);
    UniversalCoBuchi ucw = formula_ucw(f, aps, r.stats);
    RunGraph g = build_run_graph(univ, nullptr, nullptr, ucw);
    r.stats.graph_vertices = g.num_vertices();
    r.stats.graph_edges = count_edges(g);
    AcceptanceResult res = check_accepting(g);
    if (std::holds_alternative<Annotation>(res)) {
        r.outcome = Outcome::Holds;
        r.annotation = std::get<Annotation>(res);
    } else {
        r.outcome = Outcome::Fails;
        std::vector<std::string> uvars;
        for (auto& [q, v] : f.prefix) {
            (void)q;
            uvars.push_back(v);
        }
        r.counterexample = decode_counterexample(g, std::get<RejectingLasso>(res), sys, uvars,
                                                 {}, &univ, nullptr);
    }
    return r;
}

McResult mc_forall_exists(const TransitionSystem& sys, const HyperFormula& f,
                          const StrategySystem& strat) {
    validate_system(sys);
    validate_strategy(strat);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ForallExists)
        throw ValidationError("mc_forall_exists expects a forall*exists* formula");
    check_formula_props(sys, f);
    if (strat.base_inputs != sys.inputs)
        throw ValidationError("strategy base inputs do not match the system inputs");
    if (strat.arity_in != cls.universals || strat.arity_out != cls.existentials)
        throw ValidationError("strategy arities do not match the quantifier prefix");

    int n = cls.universals, m = cls.existentials;
    McResult r;
    TransitionSystem univ = self_composition(sys, n, 0);
    TransitionSystem exist = self_composition(sys, m, n);
    std::vector<std::string> aps = sorted_props(univ, &exist);
    UniversalCoBuchi ucw = formula_ucw(f, aps, r.stats);
    RunGraph g = build_run_graph(univ, &exist, &strat, ucw);
    r.stats.graph_vertices = g.num_vertices();
    r.stats.graph_edges = count_edges(g);
    AcceptanceResult res = check_accepting(g);
    if (std::holds_alternative<Annotation>(res)) {
        r.outcome = Outcome::Holds;
        r.annotation = std::get<Annotation>(res);
    } else {
        r.outcome = Outcome::Fails;
        r.note = "strategy refuted (property may still hold)";
        std::vector<std::string> uvars, evars;
        for (int i = 0; i < n; i++) uvars.push_back(f.prefix[i].second);
        for (int i = 0; i < m; i++) evars.push_back(f.prefix[n + i].second);
        r.counterexample = decode_counterexample(g, std::get<RejectingLasso>(res), sys, uvars,
                                                 evars, &univ, &exist);
    }
    return r;
}

McResult mc_exists_forall(const TransitionSystem& sys, const HyperFormula& f,
                          const StrategySystem& witness) {
    validate_system(sys);
    validate_strategy(witness);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ExistsForall)
        throw ValidationError("mc_exists_forall expects an exists*forall* formula");
    check_formula_props(sys, f);
    if (witness.arity_in != 0 || witness.lookahead != 0)
        throw ValidationError("an exists*forall* witness strategy must be input-free");
    if (witness.base_inputs != sys.inputs)
        throw ValidationError("witness base inputs do not match the system inputs");
    if (witness.arity_out != cls.existentials)
        throw ValidationError("witness arity does not match the quantifier prefix");

    int m = cls.existentials, n = cls.universals;
    McResult r;
    TransitionSystem exist = self_composition(sys, m, 0);
    TransitionSystem univ = self_composition(sys, n, m);
    std::vector<std::string> aps = sorted_props(univ, &exist);
    UniversalCoBuchi ucw = formula_ucw(f, aps, r.stats);
    RunGraph g = build_run_graph(univ, &exist, &witness, ucw);
    r.stats.graph_vertices = g.num_vertices();
    r.stats.graph_edges = count_edges(g);
    AcceptanceResult res = check_accepting(g);
    if (std::holds_alternative<Annotation>(res)) {
        r.outcome = Outcome::Holds;
        r.annotation = std::get<Annotation>(res);
    } else {
        r.outcome = Outcome::Fails;
        r.note = "witness refuted (property may still hold)";
        std::vector<std::string> uvars, evars;
        for (int i = 0; i < m; i++) evars.push_back(f.prefix[i].second);
        for (int i = 0; i < n; i++) uvars.push_back(f.prefix[m + i].second);
        r.counterexample = decode_counterexample(g, std::get<RejectingLasso>(res), sys, uvars,
                                                 evars, &univ, &exist);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Prophecy variables

ProphecyProblem apply_prophecy(const TransitionSystem& sys, const HyperFormula& f,
                               const std::vector<ProphecySpec>& specs) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ForallExists)
        throw ValidationError("prophecy variables require a forall*exists* formula");
    std::set<std::string> universal;
    for (int i = 0; i < cls.universals; i++) universal.insert(f.prefix[i].second);

    ProphecyProblem p{sys, f};
    FormulaPtr guards;
    for (const ProphecySpec& spec : specs) {
        if (!universal.count(spec.var))
            throw ValidationError("prophecy variable must be read on a universal trace "
                                  "variable, got '" + spec.var + "'");
        for (const std::string& tv : body_trace_vars(spec.guard))
            if (!universal.count(tv))
                throw ValidationError(
                    "prophecy guard may only mention universal trace variables, got '" + tv +
                    "' (an existential guard would make the transformation unsound)");
        std::set<std::string> props(p.sys.inputs.begin(), p.sys.inputs.end());
        props.insert(p.sys.outputs.begin(), p.sys.outputs.end());
        for (const std::string& tv : body_trace_vars(spec.guard))
            for (const std::string& ap : props_of_var(spec.guard, tv))
                if (!props.count(ap))
                    throw ValidationError("prophecy guard proposition '" + ap +
                                          "' is not a system proposition");
        p.sys = add_prophecy(p.sys, spec.prop);
        FormulaPtr g = mk_unary(Op::Globally,
                                mk_binary(Op::Iff, mk_atom(spec.prop, spec.var), spec.guard));
        guards = guards ? mk_binary(Op::And, guards, g) : g;
    }
    if (guards) p.f.body = mk_binary(Op::Implies, guards, f.body);
    return p;
}

std::vector<ProphecySpec> load_prophecies_json(const std::string& text, const HyperFormula& f) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw ValidationError("prophecies: expected a JSON array");
    std::set<std::string> universal;
    PrefixClass cls = classify_prefix(f);
    for (int i = 0; i < cls.universals && i < int(f.prefix.size()); i++)
        universal.insert(f.prefix[i].second);
    std::vector<ProphecySpec> out;
    for (auto& e : j) {
        if (!e.is_object() || !e.contains("prophecy") || !e.contains("guard"))
            throw ValidationError("prophecies: each entry needs 'prophecy' and 'guard'");
        ProphecySpec spec;
        spec.prop = e["prophecy"].get<std::string>();
        spec.guard = parse_qf(e["guard"].get<std::string>());
        if (e.contains("var")) {
            spec.var = e["var"].get<std::string>();
        } else {
            std::set<std::string> tvs = body_trace_vars(spec.guard);
            if (tvs.size() != 1)
                throw ValidationError("prophecies: 'var' is required when the guard does not "
                                      "mention exactly one trace variable");
            spec.var = *tvs.begin();
        }
        out.push_back(std::move(spec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

bool brute_force_universal(const TransitionSystem& sys, const HyperFormula& f, int stem_max,
                           int loop_max, std::map<std::string, LassoTrace>* violation) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::UniversalOnly)
        throw ValidationError("brute_force_universal expects a forall-only formula");
    std::vector<LassoTrace> lassos = enumerate_lassos(sys, stem_max, loop_max);
    size_t n = f.prefix.size();
    double combos = 1;
    for (size_t i = 0; i < n; i++) combos *= double(lassos.size());
    if (combos > 5e6) throw ResourceError("brute-force tuple space too large");

    std::vector<size_t> idx(n, 0);
    for (;;) {
        std::map<std::string, LassoTrace> env;
        for (size_t i = 0; i < n; i++) env[f.prefix[i].second] = lassos[idx[i]];
        if (!bounded_eval(f.body, env)) {
            if (violation) *violation = env;
            return false;
        }
        size_t i = 0;
        while (i < n && ++idx[i] == lassos.size()) idx[i++] = 0;
        if (i == n) return true;
        if (n == 0) return true;
    }
}

bool brute_force_forall_exists(const TransitionSystem& sys, const HyperFormula& f,
                               int univ_stem, int univ_loop, int exist_stem, int exist_loop) {
    validate_system(sys);
    PrefixClass cls = classify_prefix(f);
    if (cls.kind != PrefixClass::ForallExists)
        throw ValidationError("brute_force_forall_exists expects a forall*exists* formula");
    int n = cls.universals, m = cls.existentials;
    std::vector<LassoTrace> ulassos = enumerate_lassos(sys, univ_stem, univ_loop);
    std::vector<LassoTrace> elassos = enumerate_lassos(sys, exist_stem, exist_loop);
    double combos = 1;
    for (int i = 0; i < n; i++) combos *= double(ulassos.size());
    double ecombos = 1;
    for (int i = 0; i < m; i++) ecombos *= double(elassos.size());
    if (combos * ecombos > 5e7) throw ResourceError("brute-force tuple space too large");

    std::vector<size_t> uidx(n, 0);
    for (;;) {
        std::map<std::string, LassoTrace> env;
        for (int i = 0; i < n; i++) env[f.prefix[i].second] = ulassos[uidx[i]];
        bool found = false;
        std::vector<size_t> eidx(m, 0);
        for (;;) {
            for (int i = 0; i < m; i++) env[f.prefix[n + i].second] = elassos[eidx[i]];
            if (bounded_eval(f.body, env)) {
                found = true;
                break;
            }
            int i = 0;
            while (i < m && ++eidx[i] == elassos.size()) eidx[i++] = 0;
            if (i == m) break;
        }
        if (!found) return false;
        int i = 0;
        while (i < n && ++uidx[i] == ulassos.size()) uidx[i++] = 0;
        if (i == n) return true;
    }
}

} // namespace hlv
