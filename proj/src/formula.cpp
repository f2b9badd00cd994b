#include "hlv/formula.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

namespace hlv {

FormulaPtr mk_true() {
    static FormulaPtr t = std::make_shared<Formula>(Formula{Op::True, "", "", {}});
    return t;
}

FormulaPtr mk_false() {
    static FormulaPtr f = std::make_shared<Formula>(Formula{Op::False, "", "", {}});
    return f;
}

FormulaPtr mk_atom(const std::string& ap, const std::string& tv) {
    return std::make_shared<Formula>(Formula{Op::Atom, ap, tv, {}});
}

FormulaPtr mk_unary(Op op, FormulaPtr a) {
    return std::make_shared<Formula>(Formula{op, "", "", {std::move(a)}});
}

FormulaPtr mk_binary(Op op, FormulaPtr a, FormulaPtr b) {
    return std::make_shared<Formula>(Formula{op, "", "", {std::move(a), std::move(b)}});
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->op != b->op || a->ap != b->ap || a->tv != b->tv) return false;
    if (a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->kids.size(); i++)
        if (!formula_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    LParen, RParen, LBrack, RBrack, Dot,
    Bang, Amp, Pipe, Arrow, Iff,
    Forall, Exists, True, False,
    U, R, W, X, F, G,
    Ident, End,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    void advance() {
        if (pos < src.size() && src[pos] == '\n') { line++; col = 1; } else { col++; }
        pos++;
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos < src.size()) {
            char c = src[pos];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(); continue; }
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') advance();
                continue;
            }
            int l = line, co = col;
            auto push = [&](Tok k, const std::string& t) { out.push_back({k, t, l, co}); };
            if (c == '(') { push(Tok::LParen, "("); advance(); continue; }
            if (c == ')') { push(Tok::RParen, ")"); advance(); continue; }
            if (c == '[') { push(Tok::LBrack, "["); advance(); continue; }
            if (c == ']') { push(Tok::RBrack, "]"); advance(); continue; }
            if (c == '.') { push(Tok::Dot, "."); advance(); continue; }
            if (c == '!') { push(Tok::Bang, "!"); advance(); continue; }
            if (c == '&') { push(Tok::Amp, "&"); advance(); continue; }
            if (c == '|') { push(Tok::Pipe, "|"); advance(); continue; }
            if (c == '-') {
                advance();
                if (pos < src.size() && src[pos] == '>') { push(Tok::Arrow, "->"); advance(); continue; }
                throw ParseError("expected '->'", l, co);
            }
            if (c == '<') {
                advance();
                if (pos + 1 < src.size() && src[pos] == '-' && src[pos + 1] == '>') {
                    push(Tok::Iff, "<->"); advance(); advance(); continue;
                }
                throw ParseError("expected '<->'", l, co);
            }
            if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string id;
                while (pos < src.size() &&
                       (isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                    id += src[pos];
                    advance();
                }
                if (id == "forall") push(Tok::Forall, id);
                else if (id == "exists") push(Tok::Exists, id);
                else if (id == "true") push(Tok::True, id);
                else if (id == "false") push(Tok::False, id);
                else if (id == "U") push(Tok::U, id);
                else if (id == "R") push(Tok::R, id);
                else if (id == "W") push(Tok::W, id);
                else if (id == "X") push(Tok::X, id);
                else if (id == "F") push(Tok::F, id);
                else if (id == "G") push(Tok::G, id);
                else push(Tok::Ident, id);
                continue;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", l, co);
        }
        out.push_back({Tok::End, "", line, col});
        return out;
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t i = 0;

    const Token& peek() const { return toks[i]; }
    Token take() { return toks[i++]; }

    [[noreturn]] void fail(const std::string& msg) {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.line, t.col);
    }

    Token expect(Tok k, const std::string& what) {
        if (peek().kind != k) fail("expected " + what);
        return take();
    }

    HyperFormula parse() {
        HyperFormula f;
        std::set<std::string> seen;
        while (peek().kind == Tok::Forall || peek().kind == Tok::Exists) {
            Quant q = take().kind == Tok::Forall ? Quant::Forall : Quant::Exists;
            Token v = expect(Tok::Ident, "trace variable");
            if (!seen.insert(v.text).second)
                throw ParseError("duplicate trace variable '" + v.text + "'", v.line, v.col);
            expect(Tok::Dot, "'.'");
            f.prefix.emplace_back(q, v.text);
        }
        f.body = parse_iff();
        if (peek().kind != Tok::End) fail("expected end of formula");
        check_bound(f.body, seen);
        return f;
    }

    void check_bound(const FormulaPtr& n, const std::set<std::string>& vars) {
        if (n->op == Op::Atom) {
            if (!vars.count(n->tv))
                throw ValidationError("atom " + n->ap + "[" + n->tv +
                                      "] uses a trace variable not bound by the prefix");
            return;
        }
        for (auto& k : n->kids) check_bound(k, vars);
    }

    FormulaPtr parse_iff() {
        FormulaPtr a = parse_impl();
        while (peek().kind == Tok::Iff) {
            take();
            a = mk_binary(Op::Iff, a, parse_impl());
        }
        return a;
    }

    FormulaPtr parse_impl() {
        FormulaPtr a = parse_or();
        if (peek().kind == Tok::Arrow) {
            take();
            return mk_binary(Op::Implies, a, parse_impl());
        }
        return a;
    }

    FormulaPtr parse_or() {
        FormulaPtr a = parse_and();
        while (peek().kind == Tok::Pipe) {
            take();
            a = mk_binary(Op::Or, a, parse_and());
        }
        return a;
    }

    FormulaPtr parse_and() {
        FormulaPtr a = parse_until();
        while (peek().kind == Tok::Amp) {
            take();
            a = mk_binary(Op::And, a, parse_until());
        }
        return a;
    }

    FormulaPtr parse_until() {
        FormulaPtr a = parse_unary();
        Tok k = peek().kind;
        if (k == Tok::U || k == Tok::R || k == Tok::W) {
            take();
            Op op = k == Tok::U ? Op::Until : k == Tok::R ? Op::Release : Op::WeakUntil;
            return mk_binary(op, a, parse_until());
        }
        return a;
    }

    FormulaPtr parse_unary() {
        switch (peek().kind) {
            case Tok::Bang: take(); return mk_unary(Op::Not, parse_unary());
            case Tok::X: take(); return mk_unary(Op::Next, parse_unary());
            case Tok::F: take(); return mk_unary(Op::Finally, parse_unary());
            case Tok::G: take(); return mk_unary(Op::Globally, parse_unary());
            default: return parse_primary();
        }
    }

    FormulaPtr parse_primary() {
        switch (peek().kind) {
            case Tok::True: take(); return mk_true();
            case Tok::False: take(); return mk_false();
            case Tok::LParen: {
                take();
                FormulaPtr a = parse_iff();
                expect(Tok::RParen, "')'");
                return a;
            }
            case Tok::Ident: {
                Token ap = take();
                expect(Tok::LBrack, "'[' after proposition");
                Token tv = expect(Tok::Ident, "trace variable");
                expect(Tok::RBrack, "']'");
                return mk_atom(ap.text, tv.text);
            }
            case Tok::Forall:
            case Tok::Exists:
                fail("quantifiers are only allowed in the prefix");
            default:
                fail("expected a formula");
        }
    }
};

} // namespace

HyperFormula parse_formula(const std::string& text) {
    Parser p{Lexer(text).run()};
    return p.parse();
}

FormulaPtr parse_qf(const std::string& text, const std::set<std::string>& allowed_tvs) {
    Parser p{Lexer(text).run()};
    FormulaPtr f = p.parse_iff();
    if (p.peek().kind != Tok::End) p.fail("expected end of formula");
    if (!allowed_tvs.empty()) {
        for (const std::string& tv : body_trace_vars(f))
            if (!allowed_tvs.count(tv))
                throw ValidationError("trace variable '" + tv + "' is not allowed here");
    }
    return f;
}

// ---------------------------------------------------------------------------
// Printer

namespace {

// Precedence levels, weakest first. Matches the parser.
int level(Op op) {
    switch (op) {
        case Op::Iff: return 1;
        case Op::Implies: return 2;
        case Op::Or: return 3;
        case Op::And: return 4;
        case Op::Until: case Op::Release: case Op::WeakUntil: return 5;
        case Op::Not: case Op::Next: case Op::Finally: case Op::Globally: return 6;
        default: return 7;
    }
}

void print_node(std::ostream& os, const FormulaPtr& f, int min_level) {
    int lv = level(f->op);
    bool paren = lv < min_level;
    if (paren) os << "(";
    switch (f->op) {
        case Op::True: os << "true"; break;
        case Op::False: os << "false"; break;
        case Op::Atom:
            os << f->ap;
            if (!f->tv.empty()) os << "[" << f->tv << "]";
            break;
        case Op::Not: os << "!"; print_node(os, f->kids[0], 6); break;
        case Op::Next: os << "X "; print_node(os, f->kids[0], 6); break;
        case Op::Finally: os << "F "; print_node(os, f->kids[0], 6); break;
        case Op::Globally: os << "G "; print_node(os, f->kids[0], 6); break;
        case Op::And:
            print_node(os, f->kids[0], 4); os << " & "; print_node(os, f->kids[1], 5);
            break;
        case Op::Or:
            print_node(os, f->kids[0], 3); os << " | "; print_node(os, f->kids[1], 4);
            break;
        case Op::Implies:
            print_node(os, f->kids[0], 3); os << " -> "; print_node(os, f->kids[1], 2);
            break;
        case Op::Iff:
            print_node(os, f->kids[0], 1); os << " <-> "; print_node(os, f->kids[1], 2);
            break;
        case Op::Until:
            print_node(os, f->kids[0], 6); os << " U "; print_node(os, f->kids[1], 5);
            break;
        case Op::Release:
            print_node(os, f->kids[0], 6); os << " R "; print_node(os, f->kids[1], 5);
            break;
        case Op::WeakUntil:
            print_node(os, f->kids[0], 6); os << " W "; print_node(os, f->kids[1], 5);
            break;
    }
    if (paren) os << ")";
}

} // namespace

std::string print_body(const FormulaPtr& f) {
    std::ostringstream os;
    print_node(os, f, 0);
    return os.str();
}

std::string print_formula(const HyperFormula& f) {
    std::ostringstream os;
    for (auto& [q, v] : f.prefix)
        os << (q == Quant::Forall ? "forall " : "exists ") << v << ". ";
    os << print_body(f.body);
    return os.str();
}

// ---------------------------------------------------------------------------
// Normal forms

FormulaPtr desugar(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True: case Op::False: case Op::Atom:
            return f;
        case Op::Finally: return mk_binary(Op::Until, mk_true(), desugar(f->kids[0]));
        case Op::Globally: return mk_binary(Op::Release, mk_false(), desugar(f->kids[0]));
        case Op::WeakUntil: {
            // a W b = b R (a | b)
            FormulaPtr a = desugar(f->kids[0]), b = desugar(f->kids[1]);
            return mk_binary(Op::Release, b, mk_binary(Op::Or, a, b));
        }
        case Op::Implies:
            return mk_binary(Op::Or, mk_unary(Op::Not, desugar(f->kids[0])), desugar(f->kids[1]));
        case Op::Iff: {
            FormulaPtr a = desugar(f->kids[0]), b = desugar(f->kids[1]);
            return mk_binary(Op::Or, mk_binary(Op::And, a, b),
                             mk_binary(Op::And, mk_unary(Op::Not, a), mk_unary(Op::Not, b)));
        }
        case Op::Not: return mk_unary(Op::Not, desugar(f->kids[0]));
        case Op::Next: return mk_unary(Op::Next, desugar(f->kids[0]));
        default: {
            FormulaPtr a = desugar(f->kids[0]), b = desugar(f->kids[1]);
            return mk_binary(f->op, a, b);
        }
    }
}

namespace {

FormulaPtr nnf_pos(const FormulaPtr& f);
FormulaPtr nnf_neg(const FormulaPtr& f);

FormulaPtr nnf_pos(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True: case Op::False: case Op::Atom: return f;
        case Op::Not: return nnf_neg(f->kids[0]);
        case Op::Next: return mk_unary(Op::Next, nnf_pos(f->kids[0]));
        case Op::And: case Op::Or: case Op::Until: case Op::Release:
            return mk_binary(f->op, nnf_pos(f->kids[0]), nnf_pos(f->kids[1]));
        default:
            throw ValidationError("normal form expects a desugared formula");
    }
}

FormulaPtr nnf_neg(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True: return mk_false();
        case Op::False: return mk_true();
        case Op::Atom: return mk_unary(Op::Not, f);
        case Op::Not: return nnf_pos(f->kids[0]);
        case Op::Next: return mk_unary(Op::Next, nnf_neg(f->kids[0]));
        case Op::And: return mk_binary(Op::Or, nnf_neg(f->kids[0]), nnf_neg(f->kids[1]));
        case Op::Or: return mk_binary(Op::And, nnf_neg(f->kids[0]), nnf_neg(f->kids[1]));
        case Op::Until:
            return mk_binary(Op::Release, nnf_neg(f->kids[0]), nnf_neg(f->kids[1]));
        case Op::Release:
            return mk_binary(Op::Until, nnf_neg(f->kids[0]), nnf_neg(f->kids[1]));
        default:
            throw ValidationError("normal form expects a desugared formula");
    }
}

} // namespace

FormulaPtr to_nnf(const FormulaPtr& f) { return nnf_pos(desugar(f)); }

FormulaPtr negate_nnf(const FormulaPtr& f) { return nnf_neg(desugar(f)); }

// ---------------------------------------------------------------------------
// Prefix classification and zip

PrefixClass classify_prefix(const HyperFormula& f) {
    PrefixClass c{PrefixClass::UniversalOnly, 0, 0};
    int blocks = 0;
    Quant cur = Quant::Forall;
    for (auto& [q, v] : f.prefix) {
        (void)v;
        if (blocks == 0 || q != cur) { blocks++; cur = q; }
        if (q == Quant::Forall) c.universals++; else c.existentials++;
    }
    if (blocks <= 1) {
        c.kind = (c.existentials > 0) ? PrefixClass::ExistentialOnly : PrefixClass::UniversalOnly;
    } else if (blocks == 2) {
        c.kind = (f.prefix.front().first == Quant::Forall) ? PrefixClass::ForallExists
                                                           : PrefixClass::ExistsForall;
    } else {
        c.kind = PrefixClass::Other;
    }
    return c;
}

std::set<std::string> body_trace_vars(const FormulaPtr& f) {
    std::set<std::string> out;
    std::vector<const Formula*> st{f.get()};
    while (!st.empty()) {
        const Formula* n = st.back();
        st.pop_back();
        if (n->op == Op::Atom) out.insert(n->tv);
        for (auto& k : n->kids) st.push_back(k.get());
    }
    return out;
}

std::set<std::string> props_of_var(const FormulaPtr& f, const std::string& tv) {
    std::set<std::string> out;
    std::vector<const Formula*> st{f.get()};
    while (!st.empty()) {
        const Formula* n = st.back();
        st.pop_back();
        if (n->op == Op::Atom && n->tv == tv) out.insert(n->ap);
        for (auto& k : n->kids) st.push_back(k.get());
    }
    return out;
}

std::string tuple_prop(const std::string& ap, int index) {
    return ap + "@" + std::to_string(index);
}

namespace {

FormulaPtr zip_node(const FormulaPtr& f, const std::map<std::string, int>& idx) {
    if (f->op == Op::Atom) {
        auto it = idx.find(f->tv);
        if (it == idx.end())
            throw ValidationError("atom " + f->ap + "[" + f->tv +
                                  "] uses a trace variable not bound by the prefix");
        return mk_atom(tuple_prop(f->ap, it->second), "");
    }
    if (f->kids.empty()) return f;
    std::vector<FormulaPtr> kids;
    for (auto& k : f->kids) kids.push_back(zip_node(k, idx));
    auto n = std::make_shared<Formula>(Formula{f->op, "", "", std::move(kids)});
    return n;
}

} // namespace

FormulaPtr zip_formula(const HyperFormula& f) {
    std::map<std::string, int> idx;
    int i = 1;
    for (auto& [q, v] : f.prefix) {
        (void)q;
        idx[v] = i++;
    }
    return zip_node(f.body, idx);
}

// ---------------------------------------------------------------------------
// Lasso canonicalization

namespace {

using Letters = std::vector<std::set<std::string>>;

Letters primitive_loop(const Letters& loop) {
    size_t n = loop.size();
    for (size_t d = 1; d <= n / 2; d++) {
        if (n % d != 0) continue;
        bool ok = true;
        for (size_t i = d; i < n && ok; i++)
            if (loop[i] != loop[i % d]) ok = false;
        if (ok) return Letters(loop.begin(), loop.begin() + d);
    }
    return loop;
}

} // namespace

LassoTrace canonical_lasso(const LassoTrace& t) {
    if (t.loop.empty()) throw ValidationError("lasso loop must be non-empty");
    LassoTrace r = t;
    r.loop = primitive_loop(r.loop);
    // Each absorption step is valid exactly when the periodicity extends one
    // position earlier; at the fixpoint the stem is the shortest possible and
    // the loop alignment is forced, so the result is unique per word.
    while (!r.stem.empty() && r.stem.back() == r.loop.back()) {
        r.stem.pop_back();
        std::rotate(r.loop.rbegin(), r.loop.rbegin() + 1, r.loop.rend());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Exact lasso evaluation

namespace {

struct LassoEval {
    const std::map<std::string, LassoTrace>& env;
    size_t stem_len = 0, loop_len = 1, total = 1;

    explicit LassoEval(const std::map<std::string, LassoTrace>& e) : env(e) {
        for (auto& [v, t] : env) {
            (void)v;
            if (t.loop.empty()) throw ValidationError("lasso loop must be non-empty");
            stem_len = std::max(stem_len, t.stem.size());
            loop_len = std::lcm(loop_len, t.loop.size());
            if (loop_len > (1u << 20))
                throw ResourceError("combined lasso period exceeds the evaluation cap");
        }
        total = stem_len + loop_len;
    }

    size_t succ(size_t p) const { return p + 1 < total ? p + 1 : stem_len; }

    std::vector<char> run(const FormulaPtr& f) {
        std::vector<char> v(total);
        switch (f->op) {
            case Op::True: std::fill(v.begin(), v.end(), 1); break;
            case Op::False: break;
            case Op::Atom: {
                auto it = env.find(f->tv);
                if (it == env.end())
                    throw ValidationError("no trace assigned to variable '" + f->tv + "'");
                for (size_t p = 0; p < total; p++) v[p] = it->second.at(p).count(f->ap) ? 1 : 0;
                break;
            }
            case Op::Not: {
                auto a = run(f->kids[0]);
                for (size_t p = 0; p < total; p++) v[p] = !a[p];
                break;
            }
            case Op::And: case Op::Or: case Op::Implies: case Op::Iff: {
                auto a = run(f->kids[0]), b = run(f->kids[1]);
                for (size_t p = 0; p < total; p++) {
                    switch (f->op) {
                        case Op::And: v[p] = a[p] && b[p]; break;
                        case Op::Or: v[p] = a[p] || b[p]; break;
                        case Op::Implies: v[p] = !a[p] || b[p]; break;
                        default: v[p] = a[p] == b[p]; break;
                    }
                }
                break;
            }
            case Op::Next: {
                auto a = run(f->kids[0]);
                for (size_t p = 0; p < total; p++) v[p] = a[succ(p)];
                break;
            }
            case Op::Until: case Op::Finally:
                v = lfp(f);
                break;
            case Op::Release: case Op::Globally: case Op::WeakUntil:
                v = gfp(f);
                break;
        }
        return v;
    }

    // Least fixpoint for U (and F as true U a): v = b | (a & X v).
    std::vector<char> lfp(const FormulaPtr& f) {
        std::vector<char> a, b;
        if (f->op == Op::Until) {
            a = run(f->kids[0]);
            b = run(f->kids[1]);
        } else {
            a.assign(total, 1);
            b = run(f->kids[0]);
        }
        std::vector<char> v = b;
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t p = total; p-- > 0;) {
                char nv = b[p] || (a[p] && v[succ(p)]);
                if (nv != v[p]) { v[p] = nv; changed = true; }
            }
        }
        return v;
    }

    // Greatest fixpoint for R (and G as false R a, a W b = b R (a | b)):
    // v = b & (a | X v).
    std::vector<char> gfp(const FormulaPtr& f) {
        std::vector<char> a, b;
        if (f->op == Op::Release) {
            a = run(f->kids[0]);
            b = run(f->kids[1]);
        } else if (f->op == Op::Globally) {
            a.assign(total, 0);
            b = run(f->kids[0]);
        } else {
            auto x = run(f->kids[0]);
            auto y = run(f->kids[1]);
            a = y;
            b.resize(total);
            for (size_t p = 0; p < total; p++) b[p] = x[p] || y[p];
        }
        std::vector<char> v(total, 1);
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t p = total; p-- > 0;) {
                char nv = b[p] && (a[p] || v[succ(p)]);
                if (nv != v[p]) { v[p] = nv; changed = true; }
            }
        }
        return v;
    }
};

} // namespace

bool bounded_eval(const FormulaPtr& f, const std::map<std::string, LassoTrace>& env, size_t pos) {
    LassoEval ev(env);
    if (pos >= ev.total)
        pos = ev.stem_len + (pos - ev.stem_len) % ev.loop_len;
    return ev.run(f)[pos] != 0;
}

} // namespace hlv
