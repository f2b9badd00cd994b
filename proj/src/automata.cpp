#include "hlv/automata.hpp"

#include "hlv/tsys.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace hlv {

namespace {

// ---------------------------------------------------------------------------
// Tableau construction.
//
// States are sets of obligations (formulas that must hold now). Expanding a
// state splits it into cases: a consistent set of literals, a set of
// next-step obligations, and the set of Until subformulas whose satisfaction
// was postponed (promised). Acceptance is generalized Buchi over the
// promises, degeneralized with a skipping counter. Top-level disjunctions
// are compiled as separate tableaux joined under a fresh initial state,
// which keeps each branch's counter range small.

using Key = std::string;

Key key_of(const FormulaPtr& f) { return print_body(f); }

struct Case {
    uint32_t must_true = 0, must_false = 0;
    std::map<Key, FormulaPtr> next;
    uint32_t promises = 0;  // bit per until id
    std::vector<FormulaPtr> pending;
};

struct RawEdge {
    uint32_t must_true, must_false, promises;
    int target;
};

struct Branch {
    std::vector<std::map<Key, FormulaPtr>> states;
    std::map<Key, int> index;
    std::vector<std::vector<RawEdge>> edges;
    int initial = 0;
    int num_untils = 0;
};

struct Tableau {
    const std::vector<std::string>& aps;
    std::map<std::string, int> ap_index;
    size_t state_cap;
    size_t states_built = 0;

    Tableau(const std::vector<std::string>& aps_, size_t cap) : aps(aps_), state_cap(cap) {
        for (size_t i = 0; i < aps.size(); i++) ap_index[aps[i]] = int(i);
    }

    int ap_bit(const std::string& name) {
        auto it = ap_index.find(name);
        if (it == ap_index.end())
            throw ValidationError("formula proposition '" + name +
                                  "' is not in the automaton alphabet");
        return it->second;
    }

    void collect_untils(const FormulaPtr& f, std::map<Key, int>& ids) {
        if (f->op == Op::Until) {
            Key k = key_of(f);
            if (!ids.count(k)) {
                int id = int(ids.size());
                ids[k] = id;
            }
        }
        for (auto& kid : f->kids) collect_untils(kid, ids);
    }

    // Expands an obligation set into complete cases.
    std::vector<Case> expand(const std::map<Key, FormulaPtr>& state,
                             const std::map<Key, int>& until_ids) {
        std::vector<Case> done;
        std::deque<Case> work;
        Case init;
        for (auto& [k, f] : state) init.pending.push_back(f);
        work.push_back(std::move(init));
        while (!work.empty()) {
            Case c = std::move(work.front());
            work.pop_front();
            if (c.pending.empty()) {
                done.push_back(std::move(c));
                continue;
            }
            FormulaPtr f = c.pending.back();
            c.pending.pop_back();
            switch (f->op) {
                case Op::True:
                    work.push_back(std::move(c));
                    break;
                case Op::False:
                    break;  // inconsistent case
                case Op::Atom: {
                    uint32_t bit = uint32_t(1) << ap_bit(f->ap);
                    if (c.must_false & bit) break;
                    c.must_true |= bit;
                    work.push_back(std::move(c));
                    break;
                }
                case Op::Not: {
                    uint32_t bit = uint32_t(1) << ap_bit(f->kids[0]->ap);
                    if (c.must_true & bit) break;
                    c.must_false |= bit;
                    work.push_back(std::move(c));
                    break;
                }
                case Op::And: {
                    c.pending.push_back(f->kids[0]);
                    c.pending.push_back(f->kids[1]);
                    work.push_back(std::move(c));
                    break;
                }
                case Op::Or: {
                    Case c2 = c;
                    c.pending.push_back(f->kids[0]);
                    c2.pending.push_back(f->kids[1]);
                    work.push_back(std::move(c));
                    work.push_back(std::move(c2));
                    break;
                }
                case Op::Next: {
                    c.next.emplace(key_of(f->kids[0]), f->kids[0]);
                    work.push_back(std::move(c));
                    break;
                }
                case Op::Until: {
                    // phi U psi = psi | (phi & X(phi U psi)); the second case
                    // postpones psi and promises the until.
                    Case c2 = c;
                    c.pending.push_back(f->kids[1]);
                    c2.pending.push_back(f->kids[0]);
                    c2.next.emplace(key_of(f), f);
                    c2.promises |= uint32_t(1) << until_ids.at(key_of(f));
                    work.push_back(std::move(c));
                    work.push_back(std::move(c2));
                    break;
                }
                case Op::Release: {
                    // phi R psi = (psi & phi) | (psi & X(phi R psi)).
                    Case c2 = c;
                    c.pending.push_back(f->kids[1]);
                    c.pending.push_back(f->kids[0]);
                    c2.pending.push_back(f->kids[1]);
                    c2.next.emplace(key_of(f), f);
                    work.push_back(std::move(c));
                    work.push_back(std::move(c2));
                    break;
                }
                default:
                    throw ValidationError("tableau expects a core NNF formula");
            }
        }
        // Deduplicate complete cases.
        std::vector<Case> out;
        std::set<std::tuple<uint32_t, uint32_t, uint32_t, std::vector<Key>>> seen;
        for (auto& c : done) {
            std::vector<Key> nk;
            for (auto& [k, f] : c.next) nk.push_back(k);
            if (seen.emplace(c.must_true, c.must_false, c.promises, nk).second)
                out.push_back(std::move(c));
        }
        return out;
    }

    Branch build_branch(const FormulaPtr& f) {
        Branch b;
        std::map<Key, int> until_ids;
        collect_untils(f, until_ids);
        b.num_untils = int(until_ids.size());
        if (b.num_untils > 30) throw ResourceError("too many until subformulas");

        auto state_id = [&](const std::map<Key, FormulaPtr>& st) {
            Key k;
            for (auto& [sk, sf] : st) {
                k += sk;
                k += ";";
            }
            auto it = b.index.find(k);
            if (it != b.index.end()) return it->second;
            int id = int(b.states.size());
            b.states.push_back(st);
            b.edges.emplace_back();
            b.index[k] = id;
            if (++states_built > state_cap)
                throw ResourceError("automaton state cap exceeded");
            return id;
        };

        std::map<Key, FormulaPtr> init;
        init.emplace(key_of(f), f);
        b.initial = state_id(init);
        for (int s = 0; s < int(b.states.size()); s++) {
            auto cases = expand(b.states[s], until_ids);
            for (auto& c : cases) {
                int t = state_id(c.next);
                b.edges[s].push_back({c.must_true, c.must_false, c.promises, t});
            }
        }
        return b;
    }
};

void split_or(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->op == Op::Or) {
        split_or(f->kids[0], out);
        split_or(f->kids[1], out);
    } else {
        out.push_back(f);
    }
}

} // namespace

NondetBuchi ltl_to_nba(const FormulaPtr& f, const std::vector<std::string>& aps,
                       size_t state_cap) {
    if (aps.size() > 16) throw ResourceError("automaton alphabet too large (limit 16 propositions)");
    for (size_t i = 0; i + 1 < aps.size(); i++)
        if (std::find(aps.begin() + i + 1, aps.end(), aps[i]) != aps.end())
            throw ValidationError("duplicate proposition in alphabet: " + aps[i]);

    FormulaPtr nf = to_nnf(f);
    std::vector<FormulaPtr> disjuncts;
    split_or(nf, disjuncts);
    // Deduplicate identical branches.
    {
        std::set<Key> seen;
        std::vector<FormulaPtr> uniq;
        for (auto& d : disjuncts)
            if (seen.insert(key_of(d)).second) uniq.push_back(d);
        disjuncts = std::move(uniq);
    }

    Tableau tab(aps, state_cap);
    std::vector<Branch> branches;
    for (auto& d : disjuncts) {
        if (d->op == Op::False) continue;
        branches.push_back(tab.build_branch(d));
    }

    // Degeneralize each branch with a skipping counter c in 0..K; a state
    // with c = K is accepting and restarts the counter. Then join the
    // branches under a fresh initial state.
    struct DegState {
        int branch, raw, counter;
    };
    std::vector<DegState> dstates;
    std::map<std::tuple<int, int, int>, int> dindex;
    auto dstate_id = [&](int br, int raw, int c) {
        auto key = std::make_tuple(br, raw, c);
        auto it = dindex.find(key);
        if (it != dindex.end()) return it->second;
        int id = int(dstates.size()) + 1;  // 0 is the fresh initial
        dstates.push_back({br, raw, c});
        dindex[key] = id;
        return id;
    };

    struct OutEdge {
        uint32_t must_true, must_false;
        int target;
    };
    std::vector<std::vector<OutEdge>> out_edges(1);
    std::vector<char> acc{0};

    auto advance = [&](const Branch& b, int c, uint32_t promises) {
        int j = (c == b.num_untils) ? 0 : c;
        while (j < b.num_untils && !(promises & (uint32_t(1) << j))) j++;
        return j;
    };

    std::deque<int> work;
    for (size_t bi = 0; bi < branches.size(); bi++) {
        const Branch& b = branches[bi];
        // Edges of the fresh initial: copies of the branch initial's edges
        // starting at counter 0.
        for (const RawEdge& e : b.edges[b.initial]) {
            int c2 = advance(b, 0, e.promises);
            int tid = dstate_id(int(bi), e.target, c2);
            out_edges[0].push_back({e.must_true, e.must_false, tid});
        }
    }
    for (size_t i = 0; i < dstates.size(); i++) work.push_back(int(i) + 1);
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        if (size_t(id) >= out_edges.size()) out_edges.resize(id + 1);
        if (size_t(id) >= acc.size()) acc.resize(id + 1, 0);
        if (!out_edges[id].empty()) continue;
        DegState d = dstates[id - 1];
        const Branch& b = branches[d.branch];
        acc[id] = (d.counter == b.num_untils) ? 1 : 0;
        size_t before = dstates.size();
        for (const RawEdge& e : b.edges[d.raw]) {
            int c2 = advance(b, d.counter, e.promises);
            int tid = dstate_id(d.branch, e.target, c2);
            out_edges[id].push_back({e.must_true, e.must_false, tid});
        }
        for (size_t i = before; i < dstates.size(); i++) work.push_back(int(i) + 1);
        if (dstates.size() > state_cap) throw ResourceError("automaton state cap exceeded");
    }
    size_t total = dstates.size() + 1;
    out_edges.resize(total);
    acc.resize(total, 0);
    for (size_t i = 0; i < dstates.size(); i++) {
        const Branch& b = branches[dstates[i].branch];
        acc[i + 1] = (dstates[i].counter == b.num_untils) ? 1 : 0;
    }

    // Materialize per-letter transitions.
    NondetBuchi nba;
    nba.aps = aps;
    nba.initial = 0;
    nba.accepting = acc;
    nba.delta.assign(total, std::vector<std::vector<int>>(size_t(1) << aps.size()));
    for (size_t s = 0; s < total; s++) {
        for (const OutEdge& e : out_edges[s]) {
            for (uint32_t l = 0; l < nba.num_letters(); l++) {
                if ((l & e.must_true) == e.must_true && (l & e.must_false) == 0)
                    nba.delta[s][l].push_back(e.target);
            }
        }
        for (auto& v : nba.delta[s]) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }
    return nba;
}

UniversalCoBuchi dualize_to_ucw(const NondetBuchi& nba) {
    UniversalCoBuchi ucw;
    ucw.aps = nba.aps;
    ucw.initial = nba.initial;
    ucw.rejecting = nba.accepting;
    ucw.delta = nba.delta;
    return ucw;
}

bool nba_accepts_lasso(const NondetBuchi& nba, const std::vector<uint32_t>& stem,
                       const std::vector<uint32_t>& loop) {
    if (loop.empty()) throw ValidationError("lasso loop must be non-empty");
    size_t P = stem.size() + loop.size();
    auto letter_at = [&](size_t p) { return p < stem.size() ? stem[p] : loop[p - stem.size()]; };
    auto node = [&](int q, size_t p) { return size_t(q) * P + p; };
    size_t N = nba.num_states() * P;

    // Reachability from the initial configuration.
    std::vector<char> reach(N, 0);
    std::deque<size_t> work;
    reach[node(nba.initial, 0)] = 1;
    work.push_back(node(nba.initial, 0));
    while (!work.empty()) {
        size_t v = work.front();
        work.pop_front();
        int q = int(v / P);
        size_t p = v % P;
        size_t p2 = p + 1 < P ? p + 1 : stem.size();
        for (int q2 : nba.delta[q][letter_at(p)]) {
            size_t w = node(q2, p2);
            if (!reach[w]) {
                reach[w] = 1;
                work.push_back(w);
            }
        }
    }
    // An accepting configuration on a cycle: reachable from itself.
    for (size_t q = 0; q < nba.num_states(); q++) {
        if (!nba.accepting[q]) continue;
        for (size_t p = 0; p < P; p++) {
            size_t v = node(int(q), p);
            if (!reach[v]) continue;
            std::vector<char> seen(N, 0);
            std::deque<size_t> w2{v};
            bool cyc = false;
            while (!w2.empty() && !cyc) {
                size_t u = w2.front();
                w2.pop_front();
                int uq = int(u / P);
                size_t up = u % P;
                size_t up2 = up + 1 < P ? up + 1 : stem.size();
                for (int q2 : nba.delta[uq][letter_at(up)]) {
                    size_t t = node(q2, up2);
                    if (t == v) {
                        cyc = true;
                        break;
                    }
                    if (!seen[t]) {
                        seen[t] = 1;
                        w2.push_back(t);
                    }
                }
            }
            if (cyc) return true;
        }
    }
    return false;
}

bool ucw_accepts_lasso(const UniversalCoBuchi& ucw, const std::vector<uint32_t>& stem,
                       const std::vector<uint32_t>& loop) {
    NondetBuchi view;
    view.aps = ucw.aps;
    view.initial = ucw.initial;
    view.accepting = ucw.rejecting;
    view.delta = ucw.delta;
    // Some run visits a rejecting state infinitely often iff the Buchi view
    // accepts; the UCW accepts iff no run does.
    return !nba_accepts_lasso(view, stem, loop);
}

std::vector<uint32_t> lasso_letters(const std::vector<std::set<std::string>>& letters,
                                    const std::vector<std::string>& aps) {
    std::vector<uint32_t> out;
    for (auto& l : letters) out.push_back(valuation_mask(aps, l));
    return out;
}

namespace {

nlohmann::ordered_json automaton_json_impl(const std::vector<std::string>& aps, int initial,
                                           const std::vector<char>& marked,
                                           const char* marked_key,
                                           const std::vector<std::vector<std::vector<int>>>& delta) {
    nlohmann::ordered_json j;
    j["aps"] = aps;
    j["states"] = marked.size();
    j["initial"] = initial;
    nlohmann::json mk = nlohmann::json::array();
    for (size_t i = 0; i < marked.size(); i++)
        if (marked[i]) mk.push_back(i);
    j[marked_key] = mk;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (size_t s = 0; s < delta.size(); s++) {
        for (size_t l = 0; l < delta[s].size(); l++) {
            if (delta[s][l].empty()) continue;
            nlohmann::ordered_json e;
            e["from"] = s;
            nlohmann::json letter = nlohmann::json::array();
            for (const std::string& p : mask_valuation(aps, uint32_t(l))) letter.push_back(p);
            e["letter"] = letter;
            e["to"] = delta[s][l];
            edges.push_back(e);
        }
    }
    j["edges"] = edges;
    return j;
}

} // namespace

std::string automaton_to_json(const NondetBuchi& nba) {
    return automaton_json_impl(nba.aps, nba.initial, nba.accepting, "accepting", nba.delta)
               .dump(2) +
           "\n";
}

std::string ucw_to_json(const UniversalCoBuchi& ucw) {
    return automaton_json_impl(ucw.aps, ucw.initial, ucw.rejecting, "rejecting", ucw.delta)
               .dump(2) +
           "\n";
}

} // namespace hlv
