#include "hlv/tsys.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

using nlohmann::json;
using nlohmann::ordered_json;

namespace hlv {

std::set<std::string> TransitionSystem::letter(int state, uint32_t input_mask) const {
    std::set<std::string> out = mask_valuation(inputs, input_mask);
    auto lab = mask_valuation(outputs, label[state]);
    out.insert(lab.begin(), lab.end());
    return out;
}

uint32_t valuation_mask(const std::vector<std::string>& props,
                        const std::set<std::string>& present) {
    uint32_t m = 0;
    for (const std::string& p : present) {
        auto it = std::find(props.begin(), props.end(), p);
        if (it == props.end())
            throw ValidationError("unknown proposition '" + p + "'");
        m |= uint32_t(1) << (it - props.begin());
    }
    return m;
}

std::set<std::string> mask_valuation(const std::vector<std::string>& props, uint32_t mask) {
    std::set<std::string> out;
    for (size_t i = 0; i < props.size(); i++)
        if (mask & (uint32_t(1) << i)) out.insert(props[i]);
    return out;
}

void validate_system(const TransitionSystem& sys) {
    if (sys.state_names.empty()) throw ValidationError("system has no states");
    if (sys.inputs.size() + sys.outputs.size() > 20)
        throw ResourceError("too many propositions (limit 20)");
    {
        std::set<std::string> all(sys.inputs.begin(), sys.inputs.end());
        for (const std::string& p : sys.outputs)
            if (!all.insert(p).second)
                throw ValidationError("proposition '" + p + "' is both input and output");
    }
    size_t n = sys.num_states(), vals = sys.num_input_vals();
    if (sys.initial < 0 || size_t(sys.initial) >= n)
        throw ValidationError("initial state out of range");
    if (sys.label.size() != n) throw ValidationError("label table size mismatch");
    if (sys.tau.size() != n) throw ValidationError("transition table size mismatch");
    std::vector<std::string> missing;
    for (size_t s = 0; s < n; s++) {
        if (sys.tau[s].size() != vals) throw ValidationError("transition row size mismatch");
        for (size_t v = 0; v < vals; v++) {
            int t = sys.tau[s][v];
            if (t < 0) {
                std::ostringstream os;
                os << "from '" << sys.state_names[s] << "' on input {";
                bool first = true;
                for (const std::string& p : mask_valuation(sys.inputs, uint32_t(v))) {
                    if (!first) os << ", ";
                    os << p;
                    first = false;
                }
                os << "}";
                missing.push_back(os.str());
            } else if (size_t(t) >= n) {
                throw ValidationError("transition target out of range");
            }
        }
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "transition relation is not total; missing " << missing.size() << " transition(s):";
        for (const std::string& m : missing) os << "\n  " << m;
        throw ValidationError(os.str());
    }
}

// ---------------------------------------------------------------------------
// Compositions

TransitionSystem self_composition(const TransitionSystem& sys, int n, int offset) {
    if (n < 0) throw ValidationError("self-composition arity must be >= 0");
    TransitionSystem c;
    size_t ibits = sys.inputs.size();
    for (int i = 1; i <= n; i++) {
        for (const std::string& p : sys.inputs) c.inputs.push_back(tuple_prop(p, offset + i));
        for (const std::string& p : sys.outputs) c.outputs.push_back(tuple_prop(p, offset + i));
    }
    size_t states = 1;
    for (int i = 0; i < n; i++) states *= sys.num_states();
    size_t vals = size_t(1) << c.inputs.size();
    c.state_names.resize(states);
    c.label.assign(states, 0);
    c.tau.assign(states, std::vector<int>(vals, 0));
    std::vector<int> tup(n, 0);
    for (size_t idx = 0; idx < states; idx++) {
        size_t rest = idx;
        std::string name;
        uint32_t lab = 0;
        for (int i = 0; i < n; i++) {
            tup[i] = int(rest % sys.num_states());
            rest /= sys.num_states();
            if (i) name += "|";
            name += sys.state_names[tup[i]];
            lab |= sys.label[tup[i]] << (i * sys.outputs.size());
        }
        c.state_names[idx] = name.empty() ? "()" : name;
        c.label[idx] = lab;
        for (size_t v = 0; v < vals; v++) {
            size_t succ = 0, mult = 1;
            for (int i = 0; i < n; i++) {
                uint32_t vi = (uint32_t(v) >> (i * ibits)) & ((uint32_t(1) << ibits) - 1);
                succ += size_t(sys.tau[tup[i]][vi]) * mult;
                mult *= sys.num_states();
            }
            c.tau[idx][v] = int(succ);
        }
    }
    size_t init = 0, mult = 1;
    for (int i = 0; i < n; i++) {
        init += size_t(sys.initial) * mult;
        mult *= sys.num_states();
    }
    c.initial = int(init);
    return c;
}

TransitionSystem product(const TransitionSystem& a, const TransitionSystem& b) {
    std::set<std::string> props(a.inputs.begin(), a.inputs.end());
    props.insert(a.outputs.begin(), a.outputs.end());
    for (const std::string& p : b.inputs)
        if (props.count(p)) throw ValidationError("product proposition clash on '" + p + "'");
    for (const std::string& p : b.outputs)
        if (props.count(p)) throw ValidationError("product proposition clash on '" + p + "'");

    TransitionSystem c;
    c.inputs = a.inputs;
    c.inputs.insert(c.inputs.end(), b.inputs.begin(), b.inputs.end());
    c.outputs = a.outputs;
    c.outputs.insert(c.outputs.end(), b.outputs.begin(), b.outputs.end());
    size_t na = a.num_states(), nb = b.num_states();
    size_t vals = size_t(1) << c.inputs.size();
    uint32_t amask = uint32_t(a.num_input_vals()) - 1;
    c.state_names.resize(na * nb);
    c.label.assign(na * nb, 0);
    c.tau.assign(na * nb, std::vector<int>(vals, 0));
    // Component `a` is the least significant state digit and the low input
    // and label bits, matching the layout of self_composition.
    for (size_t sa = 0; sa < na; sa++) {
        for (size_t sb = 0; sb < nb; sb++) {
            size_t idx = sa + na * sb;
            c.state_names[idx] = a.state_names[sa] + "*" + b.state_names[sb];
            c.label[idx] = a.label[sa] | (b.label[sb] << a.outputs.size());
            for (size_t v = 0; v < vals; v++) {
                uint32_t va = uint32_t(v) & amask;
                uint32_t vb = uint32_t(v) >> a.inputs.size();
                c.tau[idx][v] = int(size_t(a.tau[sa][va]) + na * size_t(b.tau[sb][vb]));
            }
        }
    }
    c.initial = int(size_t(a.initial) + na * size_t(b.initial));
    return c;
}

void validate_strategy(const StrategySystem& s) {
    if (s.state_names.empty()) throw ValidationError("strategy has no states");
    if (s.arity_in < 0 || s.arity_out < 1)
        throw ValidationError("strategy arities must satisfy arity_in >= 0, arity_out >= 1");
    if (s.lookahead < 0) throw ValidationError("lookahead must be >= 0");
    if (s.arity_in == 0 && s.lookahead != 0)
        throw ValidationError("an input-free strategy cannot use lookahead");
    if (s.letter_bits() + s.base_inputs.size() * s.arity_out > 24)
        throw ResourceError("strategy alphabet too large");
    size_t n = s.num_states();
    if (s.initial < 0 || size_t(s.initial) >= n)
        throw ValidationError("strategy initial state out of range");
    if (s.mu.size() != n || s.out.size() != n)
        throw ValidationError("strategy table size mismatch");
    uint32_t outmask = (uint32_t(1) << (s.base_inputs.size() * s.arity_out)) - 1;
    for (size_t x = 0; x < n; x++) {
        if (s.mu[x].size() != s.num_letters())
            throw ValidationError("strategy transition row size mismatch");
        for (int t : s.mu[x])
            if (t < 0 || size_t(t) >= n)
                throw ValidationError("strategy transition target out of range");
        if (s.out[x].size() != s.num_windows())
            throw ValidationError("strategy output row size mismatch");
        for (uint32_t o : s.out[x])
            if (o & ~outmask) throw ValidationError("strategy output out of range");
    }
}

TransitionSystem compose_strategy(const TransitionSystem& sys, const StrategySystem& strat,
                                  int offset) {
    validate_system(sys);
    validate_strategy(strat);
    if (strat.base_inputs != sys.inputs)
        throw ValidationError("strategy base inputs do not match the system inputs");
    if (strat.lookahead != 0)
        throw ValidationError("compose_strategy requires lookahead 0 "
                              "(a lookahead output is not causal as a transition system)");
    int m = strat.arity_out;
    TransitionSystem sm = self_composition(sys, m, offset);
    TransitionSystem c;
    // Inputs: the strategy's view, arity_in copies of the system inputs.
    for (int j = 1; j <= strat.arity_in; j++)
        for (const std::string& p : sys.inputs) c.inputs.push_back(tuple_prop(p, j));
    c.outputs = sm.outputs;
    bool expose = strat.arity_in == 0;
    if (expose) {
        // Chosen letters are state-determined; expose them as outputs.
        for (int j = 1; j <= m; j++)
            for (const std::string& p : sys.inputs)
                c.outputs.push_back(tuple_prop(p, offset + j));
    }
    size_t nm = sm.num_states(), nx = strat.num_states();
    size_t vals = size_t(1) << c.inputs.size();
    c.state_names.resize(nm * nx);
    c.label.assign(nm * nx, 0);
    c.tau.assign(nm * nx, std::vector<int>(vals, 0));
    for (size_t sc = 0; sc < nm; sc++) {
        for (size_t x = 0; x < nx; x++) {
            size_t idx = sc * nx + x;
            c.state_names[idx] = sm.state_names[sc] + "/" + strat.state_names[x];
            c.label[idx] = sm.label[sc];
            if (expose) c.label[idx] |= strat.out[x][0] << sm.outputs.size();
            for (size_t v = 0; v < vals; v++) {
                uint32_t e = strat.out[x][v];  // k = 0: window index = letter mask
                size_t sc2 = size_t(sm.tau[sc][e]);
                size_t x2 = size_t(strat.mu[x][v]);
                c.tau[idx][v] = int(sc2 * nx + x2);
            }
        }
    }
    c.initial = int(size_t(sm.initial) * nx + size_t(strat.initial));
    return c;
}

TransitionSystem add_prophecy(const TransitionSystem& sys, const std::string& prop) {
    for (const std::string& p : sys.inputs)
        if (p == prop) throw ValidationError("prophecy proposition '" + prop + "' already an input");
    for (const std::string& p : sys.outputs)
        if (p == prop) throw ValidationError("prophecy proposition '" + prop + "' already an output");
    TransitionSystem c = sys;
    c.inputs.push_back(prop);
    size_t oldvals = sys.num_input_vals();
    for (size_t s = 0; s < c.num_states(); s++) {
        c.tau[s].resize(oldvals * 2);
        for (size_t v = 0; v < oldvals; v++) c.tau[s][v + oldvals] = c.tau[s][v];
    }
    return c;
}

// ---------------------------------------------------------------------------
// Lasso enumeration

LassoTrace run_on_input_lasso(const TransitionSystem& sys,
                              const std::vector<uint32_t>& input_stem,
                              const std::vector<uint32_t>& input_loop) {
    if (input_loop.empty()) throw ValidationError("input lasso loop must be non-empty");
    LassoTrace t;
    int s = sys.initial;
    for (uint32_t v : input_stem) {
        t.stem.push_back(sys.letter(s, v));
        s = sys.tau[s][v];
    }
    // Iterate the loop until the state at the loop head repeats.
    std::map<int, size_t> seen;  // state at loop head -> iteration index
    std::vector<std::vector<std::set<std::string>>> iters;
    for (;;) {
        auto it = seen.find(s);
        if (it != seen.end()) {
            for (size_t j = 0; j < it->second; j++)
                for (auto& l : iters[j]) t.stem.push_back(l);
            for (size_t j = it->second; j < iters.size(); j++)
                for (auto& l : iters[j]) t.loop.push_back(l);
            return canonical_lasso(t);
        }
        seen[s] = iters.size();
        iters.emplace_back();
        for (uint32_t v : input_loop) {
            iters.back().push_back(sys.letter(s, v));
            s = sys.tau[s][v];
        }
    }
}

std::vector<LassoTrace> enumerate_lassos(const TransitionSystem& sys, int stem_max,
                                         int loop_max) {
    validate_system(sys);
    size_t vals = sys.num_input_vals();
    std::set<LassoTrace> out;
    std::vector<uint32_t> stem, loop;
    // Enumerate all input stems (length 0..stem_max) and loops (1..loop_max).
    auto enum_seqs = [&](int len) {
        std::vector<std::vector<uint32_t>> seqs;
        std::vector<uint32_t> cur(len, 0);
        for (;;) {
            seqs.push_back(cur);
            int i = len - 1;
            while (i >= 0 && cur[i] + 1 == vals) cur[i--] = 0;
            if (i < 0) break;
            cur[i]++;
        }
        return seqs;
    };
    for (int sl = 0; sl <= stem_max; sl++) {
        auto stems = enum_seqs(sl);
        for (int ll = 1; ll <= loop_max; ll++) {
            auto loops = enum_seqs(ll);
            for (auto& st : stems)
                for (auto& lp : loops) out.insert(run_on_input_lasso(sys, st, lp));
        }
    }
    return std::vector<LassoTrace>(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

json parse_json(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError(std::string(what) + ": invalid JSON");
    return j;
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) throw ValidationError("'" + key + "' must be an array");
    for (auto& e : j[key]) {
        if (!e.is_string()) throw ValidationError("'" + key + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::set<std::string> prop_set(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of propositions");
    std::set<std::string> out;
    for (auto& e : j) {
        if (!e.is_string()) throw ValidationError(std::string(what) + " must contain strings");
        out.insert(e.get<std::string>());
    }
    return out;
}

int state_index(const std::vector<std::string>& names, const std::string& n, const char* what) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end())
        throw ValidationError(std::string(what) + ": unknown state '" + n + "'");
    return int(it - names.begin());
}

// Combined mask over `arity` copies: entry j of `vals` is the valuation of
// copy j+1 over base props.
uint32_t combined_mask(const json& vals, int arity, const std::vector<std::string>& base,
                       const char* what) {
    if (!vals.is_array() || int(vals.size()) != arity)
        throw ValidationError(std::string(what) + ": expected " + std::to_string(arity) +
                              " valuation(s)");
    uint32_t m = 0;
    for (int j = 0; j < arity; j++)
        m |= valuation_mask(base, prop_set(vals[j], what)) << (j * base.size());
    return m;
}

json combined_mask_json(uint32_t mask, int arity, const std::vector<std::string>& base) {
    json out = json::array();
    for (int j = 0; j < arity; j++) {
        uint32_t vj = (mask >> (j * base.size())) & ((uint32_t(1) << base.size()) - 1);
        json v = json::array();
        for (const std::string& p : mask_valuation(base, vj)) v.push_back(p);
        out.push_back(v);
    }
    return out;
}

} // namespace

TransitionSystem load_system_json(const std::string& text) {
    json j = parse_json(text, "system");
    TransitionSystem sys;
    sys.inputs = string_list(j, "inputs");
    sys.outputs = string_list(j, "outputs");
    sys.state_names = string_list(j, "states");
    if (sys.state_names.empty()) throw ValidationError("system: 'states' must be non-empty");
    if (!j.contains("initial") || !j["initial"].is_string())
        throw ValidationError("system: 'initial' must name a state");
    sys.initial = state_index(sys.state_names, j["initial"].get<std::string>(), "system initial");

    size_t n = sys.num_states(), vals = sys.num_input_vals();
    sys.label.assign(n, 0);
    if (j.contains("label")) {
        if (!j["label"].is_object()) throw ValidationError("system: 'label' must be an object");
        for (auto& [k, v] : j["label"].items()) {
            int s = state_index(sys.state_names, k, "system label");
            sys.label[s] = valuation_mask(sys.outputs, prop_set(v, "system label"));
        }
    }
    sys.tau.assign(n, std::vector<int>(vals, -1));
    if (!j.contains("transitions") || !j["transitions"].is_array())
        throw ValidationError("system: 'transitions' must be an array");
    for (auto& t : j["transitions"]) {
        if (!t.is_object() || !t.contains("from") || !t.contains("input") || !t.contains("to"))
            throw ValidationError("system: each transition needs 'from', 'input', 'to'");
        int s = state_index(sys.state_names, t["from"].get<std::string>(), "transition");
        int d = state_index(sys.state_names, t["to"].get<std::string>(), "transition");
        uint32_t v = valuation_mask(sys.inputs, prop_set(t["input"], "transition input"));
        if (sys.tau[s][v] != -1) {
            std::ostringstream os;
            os << "system: duplicate transition from '" << sys.state_names[s] << "' on input {";
            bool first = true;
            for (const std::string& p : mask_valuation(sys.inputs, v)) {
                if (!first) os << ", ";
                os << p;
                first = false;
            }
            os << "}";
            throw ValidationError(os.str());
        }
        sys.tau[s][v] = d;
    }
    validate_system(sys);
    return sys;
}

std::string system_to_json(const TransitionSystem& sys) {
    ordered_json j;
    j["inputs"] = sys.inputs;
    j["outputs"] = sys.outputs;
    j["states"] = sys.state_names;
    j["initial"] = sys.state_names[sys.initial];
    ordered_json lab = ordered_json::object();
    for (size_t s = 0; s < sys.num_states(); s++) {
        json v = json::array();
        for (const std::string& p : mask_valuation(sys.outputs, sys.label[s])) v.push_back(p);
        lab[sys.state_names[s]] = v;
    }
    j["label"] = lab;
    ordered_json trans = ordered_json::array();
    for (size_t s = 0; s < sys.num_states(); s++) {
        for (size_t v = 0; v < sys.num_input_vals(); v++) {
            ordered_json t;
            t["from"] = sys.state_names[s];
            json in = json::array();
            for (const std::string& p : mask_valuation(sys.inputs, uint32_t(v))) in.push_back(p);
            t["input"] = in;
            t["to"] = sys.state_names[sys.tau[s][v]];
            trans.push_back(t);
        }
    }
    j["transitions"] = trans;
    return j.dump(2) + "\n";
}

StrategySystem load_strategy_json(const std::string& text) {
    json j = parse_json(text, "strategy");
    StrategySystem s;
    if (!j.contains("arity_in") || !j["arity_in"].is_number_integer())
        throw ValidationError("strategy: 'arity_in' must be an integer");
    if (!j.contains("arity_out") || !j["arity_out"].is_number_integer())
        throw ValidationError("strategy: 'arity_out' must be an integer");
    s.arity_in = j["arity_in"].get<int>();
    s.arity_out = j["arity_out"].get<int>();
    s.lookahead = j.value("lookahead", 0);
    s.base_inputs = string_list(j, "inputs");
    s.state_names = string_list(j, "states");
    if (s.state_names.empty()) throw ValidationError("strategy: 'states' must be non-empty");
    if (!j.contains("initial") || !j["initial"].is_string())
        throw ValidationError("strategy: 'initial' must name a state");
    s.initial = state_index(s.state_names, j["initial"].get<std::string>(), "strategy initial");
    if (s.arity_in < 0 || s.arity_out < 1 || s.lookahead < 0 ||
        (s.arity_in == 0 && s.lookahead != 0))
        throw ValidationError("strategy: invalid arities or lookahead");
    if (s.letter_bits() + s.base_inputs.size() * s.arity_out > 24)
        throw ResourceError("strategy alphabet too large");

    size_t n = s.num_states();
    s.mu.assign(n, std::vector<int>(s.num_letters(), -1));
    if (!j.contains("transitions") || !j["transitions"].is_array())
        throw ValidationError("strategy: 'transitions' must be an array");
    for (auto& t : j["transitions"]) {
        if (!t.is_object() || !t.contains("from") || !t.contains("input") || !t.contains("to"))
            throw ValidationError("strategy: each transition needs 'from', 'input', 'to'");
        int x = state_index(s.state_names, t["from"].get<std::string>(), "strategy transition");
        int d = state_index(s.state_names, t["to"].get<std::string>(), "strategy transition");
        uint32_t v = combined_mask(t["input"], s.arity_in, s.base_inputs, "strategy transition");
        if (s.mu[x][v] != -1)
            throw ValidationError("strategy: duplicate transition from '" + s.state_names[x] + "'");
        s.mu[x][v] = d;
    }
    for (size_t x = 0; x < n; x++)
        for (size_t v = 0; v < s.num_letters(); v++)
            if (s.mu[x][v] < 0)
                throw ValidationError("strategy: missing transition from '" + s.state_names[x] +
                                      "' on letter " + std::to_string(v));

    s.out.assign(n, std::vector<uint32_t>(s.num_windows(), UINT32_MAX));
    bool have_outputs = j.contains("outputs");
    bool have_label = j.contains("label");
    if (have_outputs == have_label)
        throw ValidationError("strategy: exactly one of 'outputs' and 'label' is required");
    if (have_label) {
        if (!j["label"].is_object()) throw ValidationError("strategy: 'label' must be an object");
        for (auto& [k, v] : j["label"].items()) {
            int x = state_index(s.state_names, k, "strategy label");
            uint32_t e = combined_mask(v, s.arity_out, s.base_inputs, "strategy label");
            std::fill(s.out[x].begin(), s.out[x].end(), e);
        }
        for (size_t x = 0; x < n; x++)
            if (s.out[x][0] == UINT32_MAX)
                throw ValidationError("strategy: missing label for state '" + s.state_names[x] + "'");
    } else {
        if (!j["outputs"].is_array()) throw ValidationError("strategy: 'outputs' must be an array");
        size_t U = s.num_letters();
        for (auto& o : j["outputs"]) {
            if (!o.is_object() || !o.contains("state") || !o.contains("window") ||
                !o.contains("output"))
                throw ValidationError("strategy: each output entry needs 'state', 'window', 'output'");
            int x = state_index(s.state_names, o["state"].get<std::string>(), "strategy output");
            if (!o["window"].is_array() || int(o["window"].size()) != s.lookahead + 1)
                throw ValidationError("strategy: window must list lookahead+1 letters");
            size_t w = 0, mult = 1;
            for (auto& wl : o["window"]) {
                w += combined_mask(wl, s.arity_in, s.base_inputs, "strategy window") * mult;
                mult *= U;
            }
            if (s.out[x][w] != UINT32_MAX)
                throw ValidationError("strategy: duplicate output entry for state '" +
                                      s.state_names[x] + "'");
            s.out[x][w] = combined_mask(o["output"], s.arity_out, s.base_inputs, "strategy output");
        }
        for (size_t x = 0; x < n; x++)
            for (size_t w = 0; w < s.num_windows(); w++)
                if (s.out[x][w] == UINT32_MAX)
                    throw ValidationError("strategy: missing output for state '" +
                                          s.state_names[x] + "' window " + std::to_string(w));
    }
    validate_strategy(s);
    return s;
}

std::string strategy_to_json(const StrategySystem& s) {
    ordered_json j;
    j["arity_in"] = s.arity_in;
    j["arity_out"] = s.arity_out;
    j["lookahead"] = s.lookahead;
    j["inputs"] = s.base_inputs;
    j["states"] = s.state_names;
    j["initial"] = s.state_names[s.initial];
    ordered_json trans = ordered_json::array();
    for (size_t x = 0; x < s.num_states(); x++) {
        for (size_t v = 0; v < s.num_letters(); v++) {
            ordered_json t;
            t["from"] = s.state_names[x];
            t["input"] = combined_mask_json(uint32_t(v), s.arity_in, s.base_inputs);
            t["to"] = s.state_names[s.mu[x][v]];
            trans.push_back(t);
        }
    }
    j["transitions"] = trans;
    ordered_json outs = ordered_json::array();
    size_t U = s.num_letters();
    for (size_t x = 0; x < s.num_states(); x++) {
        for (size_t w = 0; w < s.num_windows(); w++) {
            ordered_json o;
            o["state"] = s.state_names[x];
            json win = json::array();
            size_t rest = w;
            for (int i = 0; i <= s.lookahead; i++) {
                win.push_back(combined_mask_json(uint32_t(rest % U), s.arity_in, s.base_inputs));
                rest /= U;
            }
            o["window"] = win;
            o["output"] = combined_mask_json(s.out[x][w], s.arity_out, s.base_inputs);
            outs.push_back(o);
        }
    }
    j["outputs"] = outs;
    return j.dump(2) + "\n";
}

Signature load_signature_json(const std::string& text) {
    json j = parse_json(text, "signature");
    Signature sig;
    sig.inputs = string_list(j, "inputs");
    sig.outputs = string_list(j, "outputs");
    if (sig.inputs.empty() && sig.outputs.empty())
        throw ValidationError("signature: needs 'inputs' and/or 'outputs'");
    std::set<std::string> all(sig.inputs.begin(), sig.inputs.end());
    for (const std::string& p : sig.outputs)
        if (!all.insert(p).second)
            throw ValidationError("signature: proposition '" + p + "' is both input and output");
    return sig;
}

} // namespace hlv
