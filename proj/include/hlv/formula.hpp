// HyperLTL formulas: AST, parser, printer, normal forms, quantifier prefix
// classification, the zip transformation to tuple propositions, and exact
// evaluation on lasso-shaped trace assignments.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlv {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
          line(line_), col(col_) {}
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Op {
    True, False,
    Atom,       // proposition `ap` on trace variable `tv` (tv empty for zipped formulas)
    Not, And, Or, Implies, Iff,
    Next, Until, Release, WeakUntil, Finally, Globally,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Op op;
    std::string ap;   // Op::Atom only
    std::string tv;   // Op::Atom only
    std::vector<FormulaPtr> kids;
};

FormulaPtr mk_true();
FormulaPtr mk_false();
FormulaPtr mk_atom(const std::string& ap, const std::string& tv);
FormulaPtr mk_unary(Op op, FormulaPtr a);
FormulaPtr mk_binary(Op op, FormulaPtr a, FormulaPtr b);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

enum class Quant { Forall, Exists };

struct HyperFormula {
    std::vector<std::pair<Quant, std::string>> prefix;
    FormulaPtr body;
};

// Quantifier prefix shape. ForallExists(n, m) means forall^n exists^m.
struct PrefixClass {
    enum Kind { UniversalOnly, ExistentialOnly, ForallExists, ExistsForall, Other } kind;
    int universals = 0;
    int existentials = 0;
};

PrefixClass classify_prefix(const HyperFormula& f);

// Parses the ASCII grammar: `forall p. exists q. G (a[p] -> F b[q])`.
// `#` starts a comment until end of line. Throws ParseError with line:col.
HyperFormula parse_formula(const std::string& text);

// Quantifier-free parse for guard formulas; atoms must use trace variables
// from `allowed_tvs` when it is non-empty.
FormulaPtr parse_qf(const std::string& text, const std::set<std::string>& allowed_tvs = {});

// Canonical ASCII form; parse_formula(print_formula(f)) reproduces f.
std::string print_formula(const HyperFormula& f);
std::string print_body(const FormulaPtr& f);

// Rewrites F, G, W, ->, <-> into the True/False/Atom/Not/And/Or/X/U/R core.
FormulaPtr desugar(const FormulaPtr& f);

// Negation normal form of `not f` over the core (negations only on atoms).
FormulaPtr negate_nnf(const FormulaPtr& f);

// Negation normal form of f itself.
FormulaPtr to_nnf(const FormulaPtr& f);

// All trace variables appearing in atoms.
std::set<std::string> body_trace_vars(const FormulaPtr& f);

// All propositions used on a given trace variable.
std::set<std::string> props_of_var(const FormulaPtr& f, const std::string& tv);

// Tuple proposition naming for the zip transformation: `a` on copy i -> "a@i".
std::string tuple_prop(const std::string& ap, int index);

// Replaces every atom a[pi_j] by the tuple proposition a@j (1-based index of
// pi_j in the prefix) with an empty trace variable. The prefix order is the
// copy order. Throws ValidationError on atoms not bound by the prefix.
FormulaPtr zip_formula(const HyperFormula& f);

// A lasso-shaped trace: letters stem[0..] then loop repeated forever.
// Letters are sets of proposition names. loop must be non-empty.
struct LassoTrace {
    std::vector<std::set<std::string>> stem;
    std::vector<std::set<std::string>> loop;

    const std::set<std::string>& at(size_t pos) const {
        if (pos < stem.size()) return stem[pos];
        return loop[(pos - stem.size()) % loop.size()];
    }
    bool operator==(const LassoTrace& o) const { return stem == o.stem && loop == o.loop; }
    bool operator<(const LassoTrace& o) const {
        if (stem != o.stem) return stem < o.stem;
        return loop < o.loop;
    }
};

// Smallest representation of the same ultimately periodic word: primitive
// loop, stem tail absorbed into the loop while the word is unchanged.
LassoTrace canonical_lasso(const LassoTrace& t);

// Exact evaluation of a quantifier-free formula at `pos` on a lasso
// assignment (trace variable -> lasso). Handles the full syntax including
// sugar. Atoms with an empty trace variable read the trace mapped from "".
bool bounded_eval(const FormulaPtr& f, const std::map<std::string, LassoTrace>& env,
                  size_t pos = 0);

} // namespace hlv
