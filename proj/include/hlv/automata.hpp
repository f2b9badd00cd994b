// Nondeterministic Buchi automata over explicit valuations, built from LTL
// by the standard tableau construction with generalized-Buchi
// degeneralization, plus universal co-Buchi automata by dualization.
#pragma once

#include "hlv/formula.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hlv {

// Alphabet: all valuations over `aps`; a letter is a bitmask (bit i set =
// aps[i] present). delta[state][letter] lists successor states (sorted).
struct NondetBuchi {
    std::vector<std::string> aps;
    int initial = 0;
    std::vector<char> accepting;
    std::vector<std::vector<std::vector<int>>> delta;

    size_t num_states() const { return accepting.size(); }
    size_t num_letters() const { return size_t(1) << aps.size(); }
};

// Same carrier; a run is accepting when it visits `rejecting` only finitely
// often, and a word is in the language when every run is accepting.
struct UniversalCoBuchi {
    std::vector<std::string> aps;
    int initial = 0;
    std::vector<char> rejecting;
    std::vector<std::vector<std::vector<int>>> delta;

    size_t num_states() const { return rejecting.size(); }
    size_t num_letters() const { return size_t(1) << aps.size(); }
};

// Tableau construction for a quantifier-free formula over tuple propositions
// (empty trace variables). `aps` fixes the alphabet and must cover the
// formula's propositions. Unreachable states are pruned; no minimization.
// Throws ResourceError when the state count exceeds `state_cap`.
NondetBuchi ltl_to_nba(const FormulaPtr& f, const std::vector<std::string>& aps,
                       size_t state_cap = size_t(1) << 16);

// Dualizes A(not phi) into a universal co-Buchi automaton for phi: identical
// carrier, the Buchi states become rejecting.
UniversalCoBuchi dualize_to_ucw(const NondetBuchi& nba);

// Whether the NBA accepts the ultimately periodic word stem loop^omega,
// letters given as bitmasks over the automaton's alphabet.
bool nba_accepts_lasso(const NondetBuchi& nba, const std::vector<uint32_t>& stem,
                       const std::vector<uint32_t>& loop);

bool ucw_accepts_lasso(const UniversalCoBuchi& ucw, const std::vector<uint32_t>& stem,
                       const std::vector<uint32_t>& loop);

// Converts a lasso trace (sets of proposition names) to letter masks over
// `aps`; propositions outside `aps` must not occur.
std::vector<uint32_t> lasso_letters(const std::vector<std::set<std::string>>& letters,
                                    const std::vector<std::string>& aps);

std::string automaton_to_json(const NondetBuchi& nba);
std::string ucw_to_json(const UniversalCoBuchi& ucw);

} // namespace hlv
