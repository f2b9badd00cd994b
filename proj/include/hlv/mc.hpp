// Model checking of forall*/exists* HyperLTL on finite transition systems:
// self-composition, strategy substitution for existential quantifiers,
// prophecy variables, and the run-graph acceptance check.
#pragma once

#include "hlv/automata.hpp"
#include "hlv/rungraph.hpp"
#include "hlv/tsys.hpp"

#include <map>
#include <optional>
#include <string>

namespace hlv {

enum class Outcome { Holds, Fails, Unknown };

struct McStats {
    size_t automaton_states = 0;
    size_t graph_vertices = 0;
    size_t graph_edges = 0;
};

struct McResult {
    Outcome outcome = Outcome::Unknown;
    // Per trace variable, over the base system's propositions.
    std::map<std::string, LassoTrace> counterexample;
    std::optional<Annotation> annotation;
    McStats stats;
    std::string note;
};

// Product of the universal self-composition, the existential
// self-composition driven by the strategy, and the automaton. `exist` and
// `strat` may be null for purely universal problems. `strat` reads the
// universal composition's input letters; its lookahead adds a buffer of
// pending letters to each vertex. All initial buffer contents are explored.
RunGraph build_run_graph(const TransitionSystem& univ, const TransitionSystem* exist,
                         const StrategySystem* strat, const UniversalCoBuchi& ucw,
                         size_t vertex_cap = size_t(1) << 22);

// forall-only formulas via self-composition and the UCW for the zipped body.
McResult mc_universal(const TransitionSystem& sys, const HyperFormula& f);

// forall^n exists^m formulas with the existential block resolved by the
// given strategy (arity_in = n, arity_out = m). Holds is sound: the strategy
// witnesses the existential quantifiers. Fails only refutes the strategy.
McResult mc_forall_exists(const TransitionSystem& sys, const HyperFormula& f,
                          const StrategySystem& strat);

// exists^m forall^n formulas with the existential block resolved by an
// input-free witness strategy (arity_in = 0, arity_out = m).
McResult mc_exists_forall(const TransitionSystem& sys, const HyperFormula& f,
                          const StrategySystem& witness);

// Prophecy extension: a fresh input proposition per spec, with the guard
// G(prop[var] <-> guard) added as an antecedent. Guards may only mention
// universal trace variables; `var` must be universal.
struct ProphecySpec {
    std::string prop;
    std::string var;  // universal trace variable reading the prophecy
    FormulaPtr guard;
};

struct ProphecyProblem {
    TransitionSystem sys;
    HyperFormula f;
};

ProphecyProblem apply_prophecy(const TransitionSystem& sys, const HyperFormula& f,
                               const std::vector<ProphecySpec>& specs);

// Parses [{"prophecy": "pp", "var": "p", "guard": "X a[p]"}, ...]; "var" may
// be omitted when the guard mentions exactly one trace variable.
std::vector<ProphecySpec> load_prophecies_json(const std::string& text,
                                               const HyperFormula& f);

// Brute-force oracles over lasso tuples, exact for violations/witnesses
// whose lassos fit in the given stem/loop bounds.
// For forall-only f: true iff no violating tuple was found.
bool brute_force_universal(const TransitionSystem& sys, const HyperFormula& f, int stem_max,
                           int loop_max,
                           std::map<std::string, LassoTrace>* violation = nullptr);

// For forall^n exists^m f: true iff every universal tuple (bounded) has an
// existential witness tuple (bounded).
bool brute_force_forall_exists(const TransitionSystem& sys, const HyperFormula& f,
                               int univ_stem, int univ_loop, int exist_stem, int exist_loop);

} // namespace hlv
