// Finite input-labeled transition systems, self-composition, products,
// strategy systems (with optional lookahead), prophecy extension, lasso
// enumeration, and the JSON file formats.
#pragma once

#include "hlv/formula.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hlv {

// Moore-labeled total deterministic transition system over an input alphabet
// 2^inputs and output alphabet 2^outputs. tau[s][m] is the successor of state
// s on the input valuation with bitmask m (bit i = inputs[i] present).
// label[s] is the output valuation of state s. The trace of an input stream
// pairs each input letter with the label of the state it is read in:
// letter_i = input_i + label(state_i).
struct TransitionSystem {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::string> state_names;
    int initial = 0;
    std::vector<std::vector<int>> tau;
    std::vector<uint32_t> label;

    size_t num_states() const { return state_names.size(); }
    size_t num_input_vals() const { return size_t(1) << inputs.size(); }

    // Letter of the trace at a state under a given input valuation, as a set
    // of proposition names.
    std::set<std::string> letter(int state, uint32_t input_mask) const;
};

// Checks shape invariants: non-empty states, initial in range, tau total
// (one entry per state and input valuation, all in range), label sized.
// Throws ValidationError naming every missing transition.
void validate_system(const TransitionSystem& sys);

uint32_t valuation_mask(const std::vector<std::string>& props,
                        const std::set<std::string>& present);
std::set<std::string> mask_valuation(const std::vector<std::string>& props, uint32_t mask);

// n-fold self-composition. Copy i (1-based) has its propositions renamed
// prop -> prop@(offset + i). States are tuples, flattened row-major; inputs
// are the concatenation of the copies' inputs.
TransitionSystem self_composition(const TransitionSystem& sys, int n, int offset = 0);

// Synchronous product of systems with disjoint proposition sets.
TransitionSystem product(const TransitionSystem& a, const TransitionSystem& b);

// Zero-delay strategy over the composed universal input alphabet: reads the
// current universal input letters (plus `lookahead` future letters) and
// chooses the existential copies' input letters for the same position.
//   mu:  X x Y^n -> X           (transition on the current letter)
//   out: X x (Y^n)^{k+1} -> Y^m (output from the visible window)
// For arity_in = 0 the strategy is input-free (mu: X -> X, out: X -> Y^m)
// and lookahead must be 0.
struct StrategySystem {
    int arity_in = 0;
    int arity_out = 1;
    int lookahead = 0;
    std::vector<std::string> base_inputs;  // inputs of one system copy
    std::vector<std::string> state_names;
    int initial = 0;
    // mu[x][u] where u is the combined mask over arity_in copies of
    // base_inputs (a single 0 column when arity_in = 0).
    std::vector<std::vector<int>> mu;
    // out[x][w] where w indexes the window: w = sum u_j * U^j over the k+1
    // window letters (u_0 = current), U = 2^(arity_in * |base_inputs|).
    // Values are combined masks over arity_out copies of base_inputs.
    std::vector<std::vector<uint32_t>> out;

    size_t num_states() const { return state_names.size(); }
    size_t letter_bits() const { return size_t(arity_in) * base_inputs.size(); }
    size_t num_letters() const { return size_t(1) << letter_bits(); }
    size_t num_windows() const {
        size_t w = 1;
        for (int i = 0; i <= lookahead; i++) w *= num_letters();
        return w;
    }
};

void validate_strategy(const StrategySystem& s);

// S^m || sigma for k = 0 strategies: the composed system reads the strategy's
// input alphabet and drives the m-fold self-composition with the strategy's
// chosen letters. Labels are the m copies' labels (copy indices offset + 1
// .. offset + m). For arity_in = 0 the chosen letters are state-determined
// and are exposed as additional outputs named like the copies' inputs.
TransitionSystem compose_strategy(const TransitionSystem& sys, const StrategySystem& strat,
                                  int offset = 0);

// Adds a fresh input proposition that does not affect transitions.
TransitionSystem add_prophecy(const TransitionSystem& sys, const std::string& prop);

// All distinct lasso traces induced by input lassos with |stem| <= stem_max,
// 1 <= |loop| <= loop_max, in canonical form, sorted.
std::vector<LassoTrace> enumerate_lassos(const TransitionSystem& sys, int stem_max,
                                         int loop_max);

// Runs the system on an input lasso and returns the induced trace lasso in
// canonical form.
LassoTrace run_on_input_lasso(const TransitionSystem& sys,
                              const std::vector<uint32_t>& input_stem,
                              const std::vector<uint32_t>& input_loop);

// JSON I/O. Formats are documented in the README.
TransitionSystem load_system_json(const std::string& text);
std::string system_to_json(const TransitionSystem& sys);
StrategySystem load_strategy_json(const std::string& text);
std::string strategy_to_json(const StrategySystem& s);

// Signature-only load for synthesis: {"inputs": [...], "outputs": [...]}.
struct Signature {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};
Signature load_signature_json(const std::string& text);

} // namespace hlv
