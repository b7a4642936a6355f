#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ast.hpp"
#include "relations.hpp"

namespace slate {

// Surface syntax of the design language.
//
//   spec     = formula ;
//   formula  = or ;
//   or       = and , { ( "|" | "∨" ) , and } ;
//   and      = unary , { ( "&" | "∧" ) , unary } ;
//   unary    = ( "!" | "¬" ) , unary | primary ;
//   primary  = "(" , formula , ")" | atom ;
//   atom     = ident , "(" , [ arg , { "," , arg } ] , ")"
//            | "true" | "false" ;
//   arg      = integer | string ;
//   integer  = [ "-" ] , digit , { digit } ;
//   string   = '"' , { character | '\"' | '\\' } , '"' ;
//
// `#` starts a comment running to end of line.  Objects are declared by the
// first type/given/property atom mentioning their id; `given(id, "type", x,
// y, w, h)` declares a pre-existing object pinned to a box.  A `!` applied
// directly to an atom becomes the atom's negated flag; applied to a
// parenthesized formula it becomes a Not node.

struct SourcePos {
    size_t offset = 0;
    int line = 1;
    int col = 1;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& kind, SourcePos pos, const std::string& detail)
        : std::runtime_error(kind + " error at line " + std::to_string(pos.line) + ", column " +
                             std::to_string(pos.col) + " (offset " + std::to_string(pos.offset) +
                             "): " + detail),
          kind_(kind),
          pos_(pos) {}

    const std::string& kind() const { return kind_; }
    const SourcePos& pos() const { return pos_; }

private:
    std::string kind_;
    SourcePos pos_;
};

struct ParseOptions {
    // When set, relation atoms may only mention objects already declared by a
    // type/given/property atom; otherwise unseen ids are auto-declared with
    // the reserved type name "object".
    bool strict_objects = false;
    SceneDomain scene_domain{};
    const PredicateRegistry* registry = nullptr; // nullptr: the global registry
};

namespace detail {

enum class Tok : uint8_t { Ident, Int, Str, LParen, RParen, Comma, And, Or, Not, End };

struct LexToken {
    Tok kind = Tok::End;
    SourcePos pos;
    std::string text;
    long long num = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    LexToken next() {
        skip_space_and_comments();
        LexToken t;
        t.pos = pos_;
        if (i_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        unsigned char c = src_[i_];
        if (c == '(') return simple(t, Tok::LParen);
        if (c == ')') return simple(t, Tok::RParen);
        if (c == ',') return simple(t, Tok::Comma);
        if (c == '&') return simple(t, Tok::And);
        if (c == '|') return simple(t, Tok::Or);
        if (c == '!') return simple(t, Tok::Not);
        if (match_utf8("\xe2\x88\xa7")) {
            t.kind = Tok::And;
            return t;
        }
        if (match_utf8("\xe2\x88\xa8")) {
            t.kind = Tok::Or;
            return t;
        }
        if (match_utf8("\xc2\xac")) {
            t.kind = Tok::Not;
            return t;
        }
        if (c == '"') return lex_string(t);
        if (c == '-' || std::isdigit(c)) return lex_int(t);
        if (std::isalpha(c) || c == '_') return lex_ident(t);
        throw ParseError("lex", pos_, std::string("unexpected character '") +
                                          static_cast<char>(c) + "'");
    }

private:
    const std::string& src_;
    size_t i_ = 0;
    SourcePos pos_;

    void advance(size_t n = 1) {
        for (size_t k = 0; k < n && i_ < src_.size(); ++k) {
            if (src_[i_] == '\n') {
                ++pos_.line;
                pos_.col = 1;
            } else {
                ++pos_.col;
            }
            ++i_;
            pos_.offset = i_;
        }
    }

    void skip_space_and_comments() {
        while (i_ < src_.size()) {
            unsigned char c = src_[i_];
            if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') advance();
            } else if (std::isspace(c)) {
                advance();
            } else {
                break;
            }
        }
    }

    bool match_utf8(const char* seq) {
        size_t n = std::char_traits<char>::length(seq);
        if (src_.compare(i_, n, seq) != 0) return false;
        advance(n);
        return true;
    }

    LexToken simple(LexToken& t, Tok kind) {
        t.kind = kind;
        advance();
        return t;
    }

    LexToken lex_string(LexToken& t) {
        t.kind = Tok::Str;
        advance(); // opening quote
        std::string out;
        while (true) {
            if (i_ >= src_.size() || src_[i_] == '\n')
                throw ParseError("lex", t.pos, "unterminated string literal");
            char c = src_[i_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                if (i_ >= src_.size()) throw ParseError("lex", t.pos, "unterminated string literal");
                char esc = src_[i_];
                if (esc == '"' || esc == '\\') {
                    out.push_back(esc);
                    advance();
                } else {
                    throw ParseError("lex", pos_, std::string("unknown escape '\\") + esc + "'");
                }
            } else {
                out.push_back(c);
                advance();
            }
        }
        t.text = std::move(out);
        return t;
    }

    LexToken lex_int(LexToken& t) {
        t.kind = Tok::Int;
        std::string digits;
        if (src_[i_] == '-') {
            digits.push_back('-');
            advance();
        }
        if (i_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[i_])))
            throw ParseError("lex", t.pos, "expected digits after '-'");
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
            digits.push_back(src_[i_]);
            advance();
        }
        try {
            t.num = std::stoll(digits);
        } catch (const std::out_of_range&) {
            throw ParseError("lex", t.pos, "integer constant out of range: " + digits);
        }
        t.text = std::move(digits);
        return t;
    }

    LexToken lex_ident(LexToken& t) {
        t.kind = Tok::Ident;
        std::string name;
        while (i_ < src_.size()) {
            unsigned char c = src_[i_];
            if (std::isalnum(c) || c == '_') {
                name.push_back(static_cast<char>(c));
                advance();
            } else {
                break;
            }
        }
        t.text = std::move(name);
        return t;
    }
};

class Parser {
public:
    Parser(const std::string& src, const PredicateRegistry& reg) : lex_(src), reg_(reg) {
        cur_ = lex_.next();
    }

    Formula parse_spec() {
        if (cur_.kind == Tok::End)
            throw ParseError("parse", cur_.pos, "expected formula, found end of input");
        Formula f = parse_or();
        expect(Tok::End, "end of input");
        return f;
    }

private:
    Lexer lex_;
    const PredicateRegistry& reg_;
    LexToken cur_;

    void bump() { cur_ = lex_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError("parse", cur_.pos, std::string("expected ") + what);
        bump();
    }

    Formula parse_or() {
        std::vector<Formula> kids;
        kids.push_back(parse_and());
        while (cur_.kind == Tok::Or) {
            bump();
            kids.push_back(parse_and());
        }
        return kids.size() == 1 ? std::move(kids[0]) : Formula::make_or(std::move(kids));
    }

    Formula parse_and() {
        std::vector<Formula> kids;
        kids.push_back(parse_unary());
        while (cur_.kind == Tok::And) {
            bump();
            kids.push_back(parse_unary());
        }
        return kids.size() == 1 ? std::move(kids[0]) : Formula::make_and(std::move(kids));
    }

    Formula parse_unary() {
        if (cur_.kind == Tok::Not) {
            bump();
            if (cur_.kind == Tok::Ident) {
                Formula leaf = parse_atom();
                leaf.atom.negated = !leaf.atom.negated;
                return leaf;
            }
            return Formula::make_not(parse_unary());
        }
        return parse_primary();
    }

    Formula parse_primary() {
        if (cur_.kind == Tok::LParen) {
            bump();
            Formula f = parse_or();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (cur_.kind == Tok::Ident) return parse_atom();
        throw ParseError("parse", cur_.pos, "expected '(', '!', or a predicate name");
    }

    Formula parse_atom() {
        LexToken name = cur_;
        bump();
        const PredicateDef* def = reg_.find(name.text);
        if (!def)
            throw ParseError("semantic", name.pos, "unknown predicate: " + name.text);
        std::vector<LexToken> raw;
        if (cur_.kind == Tok::LParen) {
            bump();
            if (cur_.kind != Tok::RParen) {
                raw.push_back(parse_arg());
                while (cur_.kind == Tok::Comma) {
                    bump();
                    raw.push_back(parse_arg());
                }
            }
            expect(Tok::RParen, "')'");
        } else if (def->max_args() != 0) {
            throw ParseError("parse", cur_.pos, "expected '(' after " + name.text);
        }
        return Formula::leaf(check_atom(name, *def, raw));
    }

    LexToken parse_arg() {
        if (cur_.kind == Tok::Int || cur_.kind == Tok::Str) {
            LexToken t = cur_;
            bump();
            return t;
        }
        throw ParseError("parse", cur_.pos, "expected integer or string argument");
    }

    Atom check_atom(const LexToken& name, const PredicateDef& def, const std::vector<LexToken>& raw) {
        int n = static_cast<int>(raw.size());
        if (n < def.min_args() || n > def.max_args()) {
            std::string want = std::to_string(def.min_args());
            if (def.max_args() != def.min_args()) want += ".." + std::to_string(def.max_args());
            throw ParseError("semantic", name.pos,
                             name.text + " takes " + want + " arguments, got " +
                                 std::to_string(n));
        }
        Atom a;
        a.pred = name.text;
        for (int i = 0; i < n; ++i) {
            const LexToken& t = raw[i];
            if (i < def.num_objs) {
                if (t.kind != Tok::Int)
                    throw ParseError("semantic", t.pos,
                                     "argument " + std::to_string(i + 1) + " of " + name.text +
                                         " must be an object id");
                if (t.num < 0)
                    throw ParseError("semantic", t.pos, "object ids must be non-negative");
                a.args.push_back(Arg::object(t.num));
            } else if (i < def.num_objs + def.num_texts) {
                if (t.kind != Tok::Str)
                    throw ParseError("semantic", t.pos,
                                     "argument " + std::to_string(i + 1) + " of " + name.text +
                                         " must be a quoted string");
                a.args.push_back(Arg::string(t.text));
            } else {
                if (t.kind != Tok::Int)
                    throw ParseError("semantic", t.pos,
                                     "argument " + std::to_string(i + 1) + " of " + name.text +
                                         " must be an integer constant");
                a.args.push_back(Arg::integer(t.num));
            }
        }
        return a;
    }
};

// Walks atoms in syntactic order with the effective negation context (Not
// nesting parity combined with the atom's own flag).
template <typename Fn>
void for_each_atom(Formula& f, bool neg, Fn&& fn) {
    if (f.op == Formula::Op::Leaf) {
        fn(f.atom, neg != f.atom.negated);
        return;
    }
    bool kid_neg = f.op == Formula::Op::Not ? !neg : neg;
    for (auto& k : f.kids) for_each_atom(k, kid_neg, fn);
}

} // namespace detail

// Builds the object table and resolves every object reference in-place.
// Declarations come from positive type/given/property atoms in syntactic
// order; relation atoms referencing unseen ids either auto-declare them
// (lenient, default) or raise a semantic error (strict).
inline DesignSpec analyze(Formula f, const ParseOptions& opts = {}) {
    DesignSpec spec;
    spec.scene_domain = opts.scene_domain;
    spec.constraint = std::move(f);
    const PredicateRegistry& reg =
        opts.registry ? *opts.registry : PredicateRegistry::global();

    auto decl_of = [&spec](long long id) -> ObjectDecl& {
        int idx = spec.index_of(id);
        if (idx < 0) {
            spec.objects.push_back(ObjectDecl{id, "", {}, std::nullopt});
            idx = static_cast<int>(spec.objects.size()) - 1;
        }
        return spec.objects[idx];
    };

    SourcePos nowhere; // analysis errors have no single source location
    detail::for_each_atom(spec.constraint, false, [&](Atom& a, bool effective_neg) {
        const PredicateDef* def = reg.find(a.pred);
        if (!def) throw ParseError("semantic", nowhere, "unknown predicate: " + a.pred);
        bool declares = !effective_neg;
        switch (def->code) {
        case RelCode::TypeIs: {
            ObjectDecl& d = decl_of(a.args[0].num);
            if (declares && d.type_name.empty()) d.type_name = a.args[1].text;
            break;
        }
        case RelCode::Given: {
            ObjectDecl& d = decl_of(a.args[0].num);
            if (declares) {
                if (d.given_box)
                    throw ParseError("semantic", nowhere,
                                     "duplicate given(...) for object id " +
                                         std::to_string(a.args[0].num));
                if (d.type_name.empty()) d.type_name = a.args[1].text;
                d.given_box = BoundingBox{a.args[2].num, a.args[3].num, a.args[4].num,
                                          a.args[5].num};
            }
            break;
        }
        case RelCode::PropertyIs: {
            ObjectDecl& d = decl_of(a.args[0].num);
            if (declares) {
                const std::string& p = a.args[1].text;
                if (std::find(d.properties.begin(), d.properties.end(), p) ==
                    d.properties.end())
                    d.properties.push_back(p);
            }
            break;
        }
        default:
            for (const Arg& arg : a.args) {
                if (arg.type != Arg::Type::Object) continue;
                if (spec.index_of(arg.num) < 0) {
                    if (opts.strict_objects)
                        throw ParseError("semantic", nowhere,
                                         "undeclared object id " + std::to_string(arg.num));
                    decl_of(arg.num);
                }
            }
            break;
        }
    });

    for (auto& d : spec.objects) {
        if (d.type_name.empty()) d.type_name = "object";
        if (d.given_box) {
            for (Kind k : all_kinds) {
                if (!spec.scene_domain.of(k).contains(d.given_box->get(k)))
                    throw ParseError("semantic", nowhere,
                                     "given box of object id " + std::to_string(d.id) +
                                         " lies outside the scene domain (" +
                                         to_string(k) + ")");
            }
        }
    }

    detail::for_each_atom(spec.constraint, false, [&](Atom& a, bool) {
        for (Arg& arg : a.args)
            if (arg.type == Arg::Type::Object) arg.obj_index = spec.index_of(arg.num);
    });
    return spec;
}

inline DesignSpec parse(const std::string& text, const ParseOptions& opts = {}) {
    const PredicateRegistry& reg =
        opts.registry ? *opts.registry : PredicateRegistry::global();
    detail::Parser p(text, reg);
    return analyze(p.parse_spec(), opts);
}

namespace detail {

inline void quote_into(const std::string& s, std::string& out) {
    out.push_back('"');
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
}

inline void print_atom(const Atom& a, std::string& out) {
    if (a.negated) out.push_back('!');
    out += a.pred;
    if (a.args.empty()) return; // nullary constants print bare: true / false
    out.push_back('(');
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) out.push_back(',');
        const Arg& arg = a.args[i];
        if (arg.type == Arg::Type::Text)
            quote_into(arg.text, out);
        else
            out += std::to_string(arg.num);
    }
    out.push_back(')');
}

inline void print_formula(const Formula& f, std::string& out) {
    switch (f.op) {
    case Formula::Op::Leaf:
        print_atom(f.atom, out);
        return;
    case Formula::Op::Not:
        out += "!(";
        print_formula(f.kids[0], out);
        out.push_back(')');
        return;
    case Formula::Op::And:
    case Formula::Op::Or: {
        const char* sep = f.op == Formula::Op::And ? " & " : " | ";
        for (size_t i = 0; i < f.kids.size(); ++i) {
            if (i) out += sep;
            const Formula& k = f.kids[i];
            bool parens = k.op == Formula::Op::And || k.op == Formula::Op::Or;
            if (parens) out.push_back('(');
            print_formula(k, out);
            if (parens) out.push_back(')');
        }
        return;
    }
    }
}

} // namespace detail

inline std::string pretty_print(const Formula& f) {
    std::string out;
    detail::print_formula(f, out);
    return out;
}

// Canonical text form; parse(pretty_print(s)) is structurally equal to s.
inline std::string pretty_print(const DesignSpec& spec) { return pretty_print(spec.constraint); }

// Replaces every default(o) placement macro with explicit bounds: width and
// height confined to [w_min, w_max] and the box kept inside the scene.
inline DesignSpec expand_default(const DesignSpec& spec, unit_t w_min = 256, unit_t w_max = 512) {
    if (w_min > w_max) throw std::invalid_argument("expand_default: w_min > w_max");

    auto expansion = [&](const Atom& a) {
        const Arg& obj = a.args[0];
        auto atom2 = [&](const char* pred, unit_t c) {
            return Formula::leaf(make_atom(pred, {obj, Arg::integer(c)}));
        };
        std::vector<Formula> parts;
        parts.push_back(atom2("wider_value", w_min - 1));
        parts.push_back(atom2("narrower_value", w_max + 1));
        parts.push_back(atom2("taller_value", w_min - 1));
        parts.push_back(atom2("shorter_value", w_max + 1));
        parts.push_back(atom2("in_bounds_x", spec.scene_domain.of(Kind::X).hi));
        parts.push_back(atom2("in_bounds_y", spec.scene_domain.of(Kind::Y).hi));
        Formula conj = Formula::make_and(std::move(parts));
        return a.negated ? Formula::make_not(std::move(conj)) : std::move(conj);
    };

    auto rewrite = [&](auto&& self, const Formula& f) -> Formula {
        switch (f.op) {
        case Formula::Op::Leaf:
            if (f.atom.pred == "default") return expansion(f.atom);
            return f;
        case Formula::Op::Not:
            return Formula::make_not(self(self, f.kids[0]));
        case Formula::Op::And:
        case Formula::Op::Or: {
            std::vector<Formula> kids;
            kids.reserve(f.kids.size());
            for (const auto& k : f.kids) kids.push_back(self(self, k));
            return f.op == Formula::Op::And ? Formula::make_and(std::move(kids))
                                            : Formula::make_or(std::move(kids));
        }
        }
        throw std::logic_error("expand_default: bad op");
    };

    DesignSpec out = spec;
    out.constraint = rewrite(rewrite, spec.constraint);
    return out;
}

} // namespace slate
