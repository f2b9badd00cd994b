// Bounded synthesis of strategies and systems by grounding the run-graph
// annotation conditions to QF_UFLIA constraints, solving through an external
// SMT solver process, decoding models, and re-verifying every solution with
// the model checker. Also a brute-force enumeration baseline.
#pragma once

#include "hlv/mc.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hlv {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthBounds {
    int system_size = 0;    // 0 when the system is given
    int strategy_size = 0;  // 0 when no existential block
    int lookahead = 0;
};

// Grounded constraint system plus the shape data needed to decode models.
struct ConstraintSystem {
    std::vector<std::string> decls;
    std::vector<std::string> asserts;

    bool has_system = false;
    int system_size = 0;
    std::vector<std::string> sys_inputs, sys_outputs;

    bool has_strategy = false;
    int strategy_size = 0;
    int arity_in = 0;   // universal copies read by the strategy (0 = input-free)
    int arity_out = 0;
    int lookahead = 0;

    size_t vertices = 0;  // grounded vertex count
    size_t clauses() const { return asserts.size(); }
};

// forall^n exists^m formula, system given: unknowns are the strategy tables.
ConstraintSystem encode_strategy_synthesis(const TransitionSystem& sys, const HyperFormula& f,
                                           int strategy_size, int lookahead);

// forall^n exists^m (m may be 0 for forall-only formulas), system unknown
// over the signature: unknowns are the system tables and, for m > 0, the
// strategy tables.
ConstraintSystem encode_system_synthesis(const Signature& sig, const HyperFormula& f,
                                         int system_size, int strategy_size, int lookahead);

// exists^m forall^n formula with an input-free witness strategy.
ConstraintSystem encode_exists_forall_synthesis(const TransitionSystem& sys,
                                                const HyperFormula& f, int witness_size);
ConstraintSystem encode_exists_forall_synthesis(const Signature& sig, const HyperFormula& f,
                                                int system_size, int witness_size);

// Deterministic SMT-LIB rendering; byte-identical for equal inputs.
std::string emit_smtlib(const ConstraintSystem& cs);

// External solver subprocess. The command is run through /bin/sh, receives
// the script on stdin, and must answer sat/unsat/unknown on stdout (with a
// model after sat).
struct SolverResult {
    enum Status { Sat, Unsat, Unknown, Timeout, Error } status;
    std::string model;    // text after the sat line
    std::string message;  // diagnostics for Error
};

SolverResult run_solver(const std::string& command, const std::string& script, int timeout_sec);

// HLV_SOLVER_CMD if set, else `z3 -in` when a z3 binary is on PATH, else
// empty (callers supply their own fallback).
std::string default_solver_command();

struct DecodedSolution {
    std::optional<TransitionSystem> system;
    std::optional<StrategySystem> strategy;
};

// Reads the unknown tables from a (define-fun ...) model; absent entries
// default to state 0 and empty valuations.
DecodedSolution decode_solution(const ConstraintSystem& cs, const std::string& model);

struct SynthJob {
    std::optional<TransitionSystem> system;  // given system
    std::optional<Signature> signature;      // synthesized system's interface
    HyperFormula f;
    int max_system = 1;
    int max_strategy = 1;
    int max_lookahead = 0;
    std::string solver_cmd;
    int timeout_sec = 600;
    std::string dump_smt;  // path prefix for emitted scripts, empty = off
};

struct BoundOutcome {
    SynthBounds bounds;
    std::string status;  // sat, unsat, timeout, unknown, resource-cap
    size_t clauses = 0;
};

struct SynthResult {
    enum Status { Realizable, ExhaustedBounds, Unknown } status = Unknown;
    SynthBounds bounds;
    std::optional<TransitionSystem> system;
    std::optional<StrategySystem> strategy;
    McResult verification;  // mandatory re-check of the decoded artifacts
    std::vector<BoundOutcome> log;
};

// Tries bounds in lexicographic (system_size, strategy_size, lookahead)
// order, solving each candidate and re-verifying decoded artifacts with the
// model checker. A solver model that fails re-verification is a hard error.
SynthResult synthesis_loop(const SynthJob& job);

// Enumerates candidate systems/strategies at exactly the given bounds
// (canonically numbered, so equivalent to "size up to the bound") and model
// checks each one. Throws ResourceError beyond `cap` candidates.
struct BruteForceResult {
    bool realizable = false;
    std::optional<TransitionSystem> system;
    std::optional<StrategySystem> strategy;
    size_t candidates = 0;
};

BruteForceResult solve_bruteforce(const SynthJob& job, const SynthBounds& bounds,
                                  size_t cap = 1000000);

} // namespace hlv
