#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlv/formula.hpp"
#include "helpers.hpp"

using namespace hlv;

namespace {

HyperFormula hf(const std::string& text) { return parse_formula(text); }

FormulaPtr body(const std::string& text) { return parse_formula(text).body; }

LassoTrace lasso(std::vector<std::vector<std::string>> stem,
                 std::vector<std::vector<std::string>> loop) {
    LassoTrace t;
    for (auto& v : stem) t.stem.push_back(std::set<std::string>(v.begin(), v.end()));
    for (auto& v : loop) t.loop.push_back(std::set<std::string>(v.begin(), v.end()));
    return t;
}

} // namespace

TEST_CASE("parse and print round trip") {
    const char* samples[] = {
        "forall p. a[p]",
        "forall p. exists q. G (a[q] <-> X a[p])",
        "forall p1. forall p2. exists p3. (G (h[p3] <-> h[p1])) & (G (o[p3] <-> o[p2]))",
        "exists q. forall p. (a[p] U b[q]) R c[p]",
        "forall p. (a[p] -> b[p]) -> c[p]",
        "forall p. a[p] | b[p] & c[p] | d[p]",
        "forall p. F G (a[p] W !b[p])",
        "forall p. true U false",
    };
    for (const char* s : samples) {
        HyperFormula f = hf(s);
        HyperFormula g = hf(print_formula(f));
        CHECK(f.prefix == g.prefix);
        CHECK(formula_equal(f.body, g.body));
    }
}

TEST_CASE("random print then parse reproduces the formula") {
    auto& rng = test_rng();
    std::vector<std::pair<std::string, std::string>> atoms = {
        {"a", "p"}, {"b", "p"}, {"a", "q"}, {"c", "q"}};
    for (int i = 0; i < 100; i++) {
        HyperFormula f;
        f.prefix = {{Quant::Forall, "p"}, {Quant::Exists, "q"}};
        f.body = random_formula(rng, atoms, 4);
        HyperFormula g = hf(print_formula(f));
        CHECK(formula_equal(f.body, g.body));
    }
}

TEST_CASE("operator precedence and associativity") {
    CHECK(formula_equal(body("forall p. a[p] -> b[p] -> c[p]"),
                        body("forall p. a[p] -> (b[p] -> c[p])")));
    CHECK(formula_equal(body("forall p. a[p] U b[p] U c[p]"),
                        body("forall p. a[p] U (b[p] U c[p])")));
    CHECK(formula_equal(body("forall p. a[p] <-> b[p] -> c[p]"),
                        body("forall p. a[p] <-> (b[p] -> c[p])")));
    CHECK(formula_equal(body("forall p. a[p] | b[p] & c[p]"),
                        body("forall p. a[p] | (b[p] & c[p])")));
    CHECK(formula_equal(body("forall p. a[p] & b[p] | c[p]"),
                        body("forall p. (a[p] & b[p]) | c[p]")));
    CHECK(formula_equal(body("forall p. !a[p] U b[p]"),
                        body("forall p. (!a[p]) U b[p]")));
    CHECK(formula_equal(body("forall p. X a[p] & b[p]"),
                        body("forall p. (X a[p]) & b[p]")));
    CHECK(formula_equal(body("forall p. a[p] & b[p] & c[p]"),
                        body("forall p. (a[p] & b[p]) & c[p]")));
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_formula("forall p. a[p"), ParseError);
    CHECK_THROWS_AS(parse_formula("forall p. (a[p]"), ParseError);
    CHECK_THROWS_AS(parse_formula("forall p. a[p] &"), ParseError);
    CHECK_THROWS_AS(parse_formula(""), ParseError);
    CHECK_THROWS_AS(parse_formula("forall p. forall p. a[p]"), ParseError);
    CHECK_THROWS_AS(parse_formula("forall p. U a[p]"), ParseError);
    try {
        parse_formula("forall p.\n  a[p] &&\n");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("2:") != std::string::npos);
        CHECK(e.line == 2);
    }
    // atoms must be bound by the prefix
    CHECK_THROWS_AS(parse_formula("forall p. a[q]"), ValidationError);
}

TEST_CASE("comments and whitespace") {
    HyperFormula f = hf("# leading comment\nforall p. # trailing\n  G a[p] # more\n");
    CHECK(f.prefix.size() == 1);
    CHECK(print_body(f.body) == "G a[p]");
}

TEST_CASE("prefix classification") {
    CHECK(classify_prefix(hf("forall p. a[p]")).kind == PrefixClass::UniversalOnly);
    CHECK(classify_prefix(hf("forall p. forall q. a[p] & a[q]")).kind ==
          PrefixClass::UniversalOnly);
    CHECK(classify_prefix(hf("exists p. a[p]")).kind == PrefixClass::ExistentialOnly);
    PrefixClass fe = classify_prefix(hf("forall p. forall q. exists r. a[p] & a[q] & a[r]"));
    CHECK(fe.kind == PrefixClass::ForallExists);
    CHECK(fe.universals == 2);
    CHECK(fe.existentials == 1);
    PrefixClass ef = classify_prefix(hf("exists r. forall p. a[p] & a[r]"));
    CHECK(ef.kind == PrefixClass::ExistsForall);
    CHECK(ef.universals == 1);
    CHECK(ef.existentials == 1);
    CHECK(classify_prefix(hf("forall p. exists q. forall r. a[p] & a[q] & a[r]")).kind ==
          PrefixClass::Other);
}

TEST_CASE("zip renames atoms by prefix position") {
    HyperFormula f = hf("forall p. exists q. G (a[q] <-> X a[p])");
    CHECK(print_body(zip_formula(f)) == "G (a@2 <-> X a@1)");
    HyperFormula g = hf("exists q. forall p. G (a[q] <-> X a[p])");
    CHECK(print_body(zip_formula(g)) == "G (a@1 <-> X a@2)");
}

TEST_CASE("trace variable and proposition queries") {
    HyperFormula f = hf("forall p. exists q. (a[p] U b[q]) & c[p]");
    auto vars = body_trace_vars(f.body);
    CHECK(vars == std::set<std::string>{"p", "q"});
    CHECK(props_of_var(f.body, "p") == std::set<std::string>{"a", "c"});
    CHECK(props_of_var(f.body, "q") == std::set<std::string>{"b"});
    CHECK(props_of_var(f.body, "r").empty());
}

TEST_CASE("bounded_eval on pinned lassos") {
    std::map<std::string, LassoTrace> env;
    env["p"] = lasso({{"a"}}, {{}, {"a", "b"}});
    // positions: 0:{a} then loop {} {a,b} {} {a,b} ...
    CHECK(bounded_eval(body("forall p. a[p]"), env, 0));
    CHECK(!bounded_eval(body("forall p. a[p]"), env, 1));
    CHECK(bounded_eval(body("forall p. X !a[p]"), env, 0));
    CHECK(bounded_eval(body("forall p. F b[p]"), env, 0));
    CHECK(!bounded_eval(body("forall p. G a[p]"), env, 0));
    CHECK(bounded_eval(body("forall p. G (a[p] -> X !a[p])"), env, 0));
    CHECK(bounded_eval(body("forall p. G F (a[p] & b[p])"), env, 0));
    CHECK(!bounded_eval(body("forall p. F G a[p]"), env, 0));
    CHECK(bounded_eval(body("forall p. !a[p] U b[p]"), env, 1));
    CHECK(!bounded_eval(body("forall p. !a[p] U b[p]"), env, 0));
}

TEST_CASE("bounded_eval weak until semantics") {
    std::map<std::string, LassoTrace> env;
    env["p"] = lasso({}, {{"a"}});
    CHECK(bounded_eval(body("forall p. a[p] W false"), env, 0));   // G a
    CHECK(bounded_eval(body("forall p. a[p] W b[p]"), env, 0));
    env["p"] = lasso({{"a"}, {"a"}}, {{}});
    CHECK(!bounded_eval(body("forall p. a[p] W false"), env, 0));  // a stops, never b
    CHECK(bounded_eval(body("forall p. a[p] U !a[p]"), env, 0));
}

TEST_CASE("bounded_eval matches desugared and nnf forms on random input") {
    auto& rng = test_rng();
    std::vector<std::pair<std::string, std::string>> atoms = {
        {"a", "p"}, {"b", "p"}, {"c", "q"}};
    std::vector<std::string> props = {"a", "b", "c"};
    for (int i = 0; i < 200; i++) {
        FormulaPtr f = random_formula(rng, atoms, 3);
        std::map<std::string, LassoTrace> env;
        env["p"] = random_lasso(rng, props, 3, 3);
        env["q"] = random_lasso(rng, props, 3, 3);
        bool direct = bounded_eval(f, env);
        CHECK(direct == bounded_eval(desugar(f), env));
        CHECK(direct == bounded_eval(to_nnf(f), env));
        CHECK(direct != bounded_eval(negate_nnf(f), env));
    }
}

TEST_CASE("desugar leaves only core operators") {
    FormulaPtr f = desugar(body("forall p. (F a[p]) & (G b[p]) & (a[p] W b[p]) & (a[p] <-> b[p])"));
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        CHECK(g->op != Op::Finally);
        CHECK(g->op != Op::Globally);
        CHECK(g->op != Op::WeakUntil);
        CHECK(g->op != Op::Implies);
        CHECK(g->op != Op::Iff);
        for (auto& k : g->kids) walk(k);
    };
    walk(f);
}

TEST_CASE("negation normal form pushes negations to atoms") {
    FormulaPtr f = to_nnf(body("forall p. !(a[p] U (b[p] & X c[p]))"));
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (g->op == Op::Not) CHECK(g->kids[0]->op == Op::Atom);
        for (auto& k : g->kids) walk(k);
    };
    walk(f);
}

TEST_CASE("canonical lasso") {
    // primitive loop reduction
    CHECK(canonical_lasso(lasso({}, {{"a"}, {"a"}})) == lasso({}, {{"a"}}));
    CHECK(canonical_lasso(lasso({}, {{"a"}, {}, {"a"}, {}})) == lasso({}, {{"a"}, {}}));
    // stem tail absorbed into the loop
    CHECK(canonical_lasso(lasso({{"a"}}, {{}, {"a"}})) == lasso({}, {{"a"}, {}}));
    // rotated loops are different words and must stay distinct
    CHECK(canonical_lasso(lasso({}, {{"b"}, {"a"}})) == lasso({}, {{"b"}, {"a"}}));
    CHECK(!(canonical_lasso(lasso({}, {{"b"}, {"a"}})) == canonical_lasso(lasso({}, {{"a"}, {"b"}}))));
    // canonical form is a fixpoint
    auto& rng = test_rng();
    for (int i = 0; i < 200; i++) {
        LassoTrace t = random_lasso(rng, {"a", "b"}, 3, 4);
        LassoTrace c = canonical_lasso(t);
        CHECK(canonical_lasso(c) == c);
        // same infinite word
        for (size_t pos = 0; pos < 12; pos++) CHECK(t.at(pos) == c.at(pos));
    }
}

TEST_CASE("quantifier-free parse for guards") {
    FormulaPtr g = parse_qf("X a[p]", {"p"});
    CHECK(print_body(g) == "X a[p]");
    CHECK_THROWS_AS(parse_qf("X a[q]", {"p"}), ValidationError);
    CHECK_THROWS_AS(parse_qf("forall p. a[p]", {"p"}), ParseError);
}

TEST_CASE("keywords cannot be trace variables or propositions") {
    CHECK_THROWS_AS(parse_formula("forall U. a[U]"), ParseError);
    CHECK_THROWS_AS(parse_formula("forall p. forall[p]"), ParseError);
}
