#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geom.hpp"

namespace slate {

// Propositional formulas over relation atoms.  Conjunction/disjunction nodes
// are n-ary and flattened (an And never has an And child), which gives every
// formula a canonical shape: parse(pretty_print(f)) reproduces f exactly.

struct Arg {
    enum class Type : uint8_t { Object, Int, Text };

    Type type = Type::Int;
    long long num = 0;     // Object: surface id; Int: constant value
    std::string text;      // Text payload
    int obj_index = -1;    // dense object index, resolved during analysis

    static Arg object(long long id) {
        Arg a;
        a.type = Type::Object;
        a.num = id;
        return a;
    }
    static Arg object(long long id, int index) {
        Arg a = object(id);
        a.obj_index = index;
        return a;
    }
    static Arg integer(long long v) {
        Arg a;
        a.type = Type::Int;
        a.num = v;
        return a;
    }
    static Arg string(std::string s) {
        Arg a;
        a.type = Type::Text;
        a.text = std::move(s);
        return a;
    }

    // Structural equality over surface content; the resolved index is derived
    // state and deliberately ignored.
    friend bool operator==(const Arg& a, const Arg& b) {
        return a.type == b.type && a.num == b.num && a.text == b.text;
    }
    friend bool operator!=(const Arg& a, const Arg& b) { return !(a == b); }
};

struct Atom {
    std::string pred;
    std::vector<Arg> args;
    bool negated = false;

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.negated == b.negated && a.pred == b.pred && a.args == b.args;
    }
    friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
};

inline Atom make_atom(std::string pred, std::vector<Arg> args, bool negated = false) {
    Atom a;
    a.pred = std::move(pred);
    a.args = std::move(args);
    a.negated = negated;
    return a;
}

class Formula {
public:
    enum class Op : uint8_t { Leaf, And, Or, Not };

    Op op = Op::Leaf;
    Atom atom;                  // valid when op == Leaf
    std::vector<Formula> kids;  // And/Or: two or more; Not: exactly one

    Formula() = default;

    static Formula leaf(Atom a) {
        Formula f;
        f.op = Op::Leaf;
        f.atom = std::move(a);
        return f;
    }

    static Formula make_not(Formula f) {
        Formula n;
        n.op = Op::Not;
        n.kids.push_back(std::move(f));
        return n;
    }

    static Formula make_and(std::vector<Formula> kids) { return nary(Op::And, std::move(kids)); }
    static Formula make_or(std::vector<Formula> kids) { return nary(Op::Or, std::move(kids)); }

    static Formula make_and(Formula a, Formula b) {
        std::vector<Formula> k;
        k.push_back(std::move(a));
        k.push_back(std::move(b));
        return make_and(std::move(k));
    }
    static Formula make_or(Formula a, Formula b) {
        std::vector<Formula> k;
        k.push_back(std::move(a));
        k.push_back(std::move(b));
        return make_or(std::move(k));
    }

    bool is_leaf() const { return op == Op::Leaf; }

    friend bool operator==(const Formula& a, const Formula& b) {
        if (a.op != b.op) return false;
        if (a.op == Op::Leaf) return a.atom == b.atom;
        return a.kids == b.kids;
    }
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

private:
    static Formula nary(Op op, std::vector<Formula> kids) {
        if (kids.empty()) throw std::invalid_argument("and/or needs at least one child");
        std::vector<Formula> flat;
        flat.reserve(kids.size());
        for (auto& k : kids) {
            if (k.op == op) {
                for (auto& g : k.kids) flat.push_back(std::move(g));
            } else {
                flat.push_back(std::move(k));
            }
        }
        if (flat.size() == 1) return std::move(flat[0]);
        Formula f;
        f.op = op;
        f.kids = std::move(flat);
        return f;
    }
};

// Negation normal form: negation survives only as the `negated` flag on
// atoms; double negations cancel; De Morgan distributes over And/Or.
inline Formula to_nnf(const Formula& f, bool negate = false) {
    switch (f.op) {
    case Formula::Op::Leaf: {
        Atom a = f.atom;
        if (negate) a.negated = !a.negated;
        return Formula::leaf(std::move(a));
    }
    case Formula::Op::Not:
        return to_nnf(f.kids[0], !negate);
    case Formula::Op::And:
    case Formula::Op::Or: {
        bool and_out = (f.op == Formula::Op::And) != negate;
        std::vector<Formula> kids;
        kids.reserve(f.kids.size());
        for (const auto& k : f.kids) kids.push_back(to_nnf(k, negate));
        return and_out ? Formula::make_and(std::move(kids))
                       : Formula::make_or(std::move(kids));
    }
    }
    throw std::logic_error("to_nnf: bad op");
}

inline bool is_nnf(const Formula& f) {
    if (f.op == Formula::Op::Not) return false;
    for (const auto& k : f.kids)
        if (!is_nnf(k)) return false;
    return true;
}

// Objects are declared by the first type/given/property atom that mentions
// their id (or implicitly, by any relation atom, when lenient parsing is on).
struct ObjectDecl {
    long long id = 0;
    std::string type_name;
    std::vector<std::string> properties;
    std::optional<BoundingBox> given_box;

    bool is_given() const { return given_box.has_value(); }

    friend bool operator==(const ObjectDecl& a, const ObjectDecl& b) {
        return a.id == b.id && a.type_name == b.type_name && a.properties == b.properties &&
               a.given_box == b.given_box;
    }
};

// Per-kind bounds of the scene, default 0..1000 per-mille on every kind.
struct SceneDomain {
    std::array<Interval, 4> bounds{Interval{0, 1000}, Interval{0, 1000}, Interval{0, 1000},
                                   Interval{0, 1000}};

    Interval& of(Kind k) { return bounds[static_cast<int>(k)]; }
    const Interval& of(Kind k) const { return bounds[static_cast<int>(k)]; }

    friend bool operator==(const SceneDomain& a, const SceneDomain& b) {
        return a.bounds == b.bounds;
    }
};

struct DesignSpec {
    std::vector<ObjectDecl> objects; // dense order: first mention in the formula
    Formula constraint;
    SceneDomain scene_domain;

    int index_of(long long id) const {
        for (size_t i = 0; i < objects.size(); ++i)
            if (objects[i].id == id) return static_cast<int>(i);
        return -1;
    }

    const ObjectDecl& object_at(int index) const { return objects.at(index); }

    // Initial interval domains: given objects pinned to their boxes, free
    // variables spanning the scene bounds.
    DomainBox initial_domains() const {
        DomainBox d(objects.size());
        for (size_t o = 0; o < objects.size(); ++o) {
            for (Kind k : all_kinds) {
                if (objects[o].given_box) {
                    unit_t v = objects[o].given_box->get(k);
                    d.at(static_cast<int>(o), k) = Interval{v, v};
                } else {
                    d.at(static_cast<int>(o), k) = scene_domain.of(k);
                }
            }
        }
        return d;
    }

    friend bool operator==(const DesignSpec& a, const DesignSpec& b) {
        return a.objects == b.objects && a.constraint == b.constraint &&
               a.scene_domain == b.scene_domain;
    }
};

// Top-level conjuncts of a formula (the whole formula if it is not an And).
// Used for per-clause satisfaction metrics.
inline std::vector<const Formula*> top_clauses(const Formula& f) {
    std::vector<const Formula*> out;
    if (f.op == Formula::Op::And) {
        for (const auto& k : f.kids) out.push_back(&k);
    } else {
        out.push_back(&f);
    }
    return out;
}

} // namespace slate
