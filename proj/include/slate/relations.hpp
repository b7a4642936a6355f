#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ast.hpp"
#include "geom.hpp"
#include "tri.hpp"

namespace slate {

// Every geometric relation lowers to a comparison between two small linear
// terms (at most two variables plus a constant per side), e.g.
//   cleft(a, b, c)  ~  x_a + w_a + c <= x_b
// Strict inequalities over integers are folded into <= by shifting the
// constant.  Interval evaluation of such comparisons is exact: term ranges
// are tight, so True/False verdicts never flip under further refinement.

struct LinTerm {
    int n = 0;
    VarRef v[2];
    unit_t c = 0;

    void add(VarRef r) { v[n++] = r; }

    unit_t value(const Layout& layout) const {
        unit_t s = c;
        for (int i = 0; i < n; ++i) s += layout[v[i].obj].get(v[i].kind);
        return s;
    }

    Interval range(const DomainBox& d) const {
        unit_t lo = c, hi = c;
        for (int i = 0; i < n; ++i) {
            const Interval& iv = d.at(v[i]);
            lo += iv.lo;
            hi += iv.hi;
        }
        return {lo, hi};
    }

    void collect(std::vector<VarRef>& out) const {
        for (int i = 0; i < n; ++i) out.push_back(v[i]);
    }
};

struct LinCmp {
    LinTerm lhs, rhs;
    bool eq = false; // false: lhs <= rhs, true: lhs == rhs

    bool eval_point(const Layout& layout) const {
        unit_t l = lhs.value(layout), r = rhs.value(layout);
        return eq ? l == r : l <= r;
    }

    Tri eval_interval(const DomainBox& d) const {
        Interval l = lhs.range(d), r = rhs.range(d);
        if (eq) {
            if (l.is_point() && r.is_point()) return tri_of(l.lo == r.lo);
            if (l.hi < r.lo || r.hi < l.lo) return Tri::False;
            return Tri::Unknown;
        }
        if (l.hi <= r.lo) return Tri::True;
        if (l.lo > r.hi) return Tri::False;
        return Tri::Unknown;
    }
};

enum class RelCode : uint8_t {
    // pairwise offset relations: (obj, obj [, c])  with c defaulting to 1
    Above, CAbove, Below, CBelow, Left, CLeft, Right, CRight,
    Narrower, Wider, Shorter, Taller,
    // derived complements of the edge-gap relations (same argument shape)
    NotCAbove, NotCBelow, NotCLeft, NotCRight,
    // value relations: (obj, c)
    AboveValue, BelowValue, LeftValue, RightValue,
    NarrowerValue, WiderValue, ShorterValue, TallerValue,
    // exact equality: (obj, obj) / (obj, c)
    Xeq, Yeq, Weq, Heq, XeqValue, YeqValue, WeqValue, HeqValue,
    // far-edge bound macros: (obj, c); used by default-placement expansion
    InBoundsX, InBoundsY, ExceedsX, ExceedsY,
    // metadata
    TypeIs, PropertyIs, Given, DefaultPlacement,
    // constants
    ConstTrue, ConstFalse,
    Custom,
};

// Point/interval evaluators for registered extension predicates.  Both
// receive the resolved dense indices of the atom's object arguments.  The
// interval form may be conservative (returning Unknown is always sound); if
// none is supplied, non-point domains evaluate to Unknown.  On all-point
// domains the dispatcher consults the point form directly, so interval and
// point evaluation can never disagree on a completed layout.
using PointFn = std::function<bool(const Layout&, const std::vector<int>& objs)>;
using IntervalFn = std::function<Tri(const DomainBox&, const std::vector<int>& objs)>;

struct PredicateDef {
    std::string name;
    RelCode code = RelCode::Custom;
    int num_objs = 0;
    int num_texts = 0;
    int num_ints = 0;
    int opt_ints = 0;
    PointFn point_fn;
    IntervalFn interval_fn;

    int min_args() const { return num_objs + num_texts + num_ints; }
    int max_args() const { return min_args() + opt_ints; }
};

inline bool rel_is_linear(RelCode c) {
    return c < RelCode::TypeIs;
}

class PredicateRegistry {
public:
    PredicateRegistry() { add_builtins(); }

    static PredicateRegistry& global() {
        static PredicateRegistry reg;
        return reg;
    }

    const PredicateDef* find(const std::string& name) const {
        auto it = defs_.find(name);
        return it == defs_.end() ? nullptr : &it->second;
    }

    // Extension predicates take `arity` object arguments.  Registration is
    // write-once: duplicate names (including collisions with built-ins) are
    // rejected.
    void register_predicate(const std::string& name, int arity, PointFn point_fn,
                            IntervalFn interval_fn = nullptr) {
        if (defs_.count(name))
            throw std::invalid_argument("predicate already registered: " + name);
        if (arity < 1) throw std::invalid_argument("predicate arity must be at least 1");
        if (!point_fn) throw std::invalid_argument("point evaluator is required");
        PredicateDef d;
        d.name = name;
        d.code = RelCode::Custom;
        d.num_objs = arity;
        d.point_fn = std::move(point_fn);
        d.interval_fn = std::move(interval_fn);
        defs_.emplace(name, std::move(d));
    }

private:
    std::map<std::string, PredicateDef> defs_;

    void add(const char* name, RelCode code, int objs, int texts, int ints, int opt) {
        PredicateDef d;
        d.name = name;
        d.code = code;
        d.num_objs = objs;
        d.num_texts = texts;
        d.num_ints = ints;
        d.opt_ints = opt;
        defs_.emplace(d.name, std::move(d));
    }

    void add_builtins() {
        // (obj, obj [, c])
        add("above", RelCode::Above, 2, 0, 0, 1);
        add("cabove", RelCode::CAbove, 2, 0, 0, 1);
        add("below", RelCode::Below, 2, 0, 0, 1);
        add("cbelow", RelCode::CBelow, 2, 0, 0, 1);
        add("left", RelCode::Left, 2, 0, 0, 1);
        add("cleft", RelCode::CLeft, 2, 0, 0, 1);
        add("right", RelCode::Right, 2, 0, 0, 1);
        add("cright", RelCode::CRight, 2, 0, 0, 1);
        add("narrower", RelCode::Narrower, 2, 0, 0, 1);
        add("wider", RelCode::Wider, 2, 0, 0, 1);
        add("shorter", RelCode::Shorter, 2, 0, 0, 1);
        add("taller", RelCode::Taller, 2, 0, 0, 1);
        add("not_cabove", RelCode::NotCAbove, 2, 0, 0, 1);
        add("not_cbelow", RelCode::NotCBelow, 2, 0, 0, 1);
        add("not_cleft", RelCode::NotCLeft, 2, 0, 0, 1);
        add("not_cright", RelCode::NotCRight, 2, 0, 0, 1);
        // (obj, c)
        add("above_value", RelCode::AboveValue, 1, 0, 1, 0);
        add("below_value", RelCode::BelowValue, 1, 0, 1, 0);
        add("left_value", RelCode::LeftValue, 1, 0, 1, 0);
        add("right_value", RelCode::RightValue, 1, 0, 1, 0);
        add("narrower_value", RelCode::NarrowerValue, 1, 0, 1, 0);
        add("wider_value", RelCode::WiderValue, 1, 0, 1, 0);
        add("shorter_value", RelCode::ShorterValue, 1, 0, 1, 0);
        add("taller_value", RelCode::TallerValue, 1, 0, 1, 0);
        add("in_bounds_x", RelCode::InBoundsX, 1, 0, 1, 0);
        add("in_bounds_y", RelCode::InBoundsY, 1, 0, 1, 0);
        add("exceeds_x", RelCode::ExceedsX, 1, 0, 1, 0);
        add("exceeds_y", RelCode::ExceedsY, 1, 0, 1, 0);
        // equality
        add("xeq", RelCode::Xeq, 2, 0, 0, 0);
        add("yeq", RelCode::Yeq, 2, 0, 0, 0);
        add("weq", RelCode::Weq, 2, 0, 0, 0);
        add("heq", RelCode::Heq, 2, 0, 0, 0);
        add("xeq_value", RelCode::XeqValue, 1, 0, 1, 0);
        add("yeq_value", RelCode::YeqValue, 1, 0, 1, 0);
        add("weq_value", RelCode::WeqValue, 1, 0, 1, 0);
        add("heq_value", RelCode::HeqValue, 1, 0, 1, 0);
        // metadata
        add("type", RelCode::TypeIs, 1, 1, 0, 0);
        add("property", RelCode::PropertyIs, 1, 1, 0, 0);
        add("given", RelCode::Given, 1, 1, 4, 0);
        add("default", RelCode::DefaultPlacement, 1, 0, 0, 0);
        // constants
        add("true", RelCode::ConstTrue, 0, 0, 0, 0);
        add("false", RelCode::ConstFalse, 0, 0, 0, 0);
    }
};

// Commonly recognized object type names.  The parser accepts any quoted type
// string (extension types and free-form names flow through to the policy's
// unknown-class embedding), so this list is informational.
inline const std::vector<std::string>& recognized_types() {
    static const std::vector<std::string> names{
        "chair", "couch", "potted plant", "bed",    "mirror",       "dining table",
        "window", "desk",  "toilet",       "door",   "tv",           "microwave",
        "oven",   "toaster", "sink",       "refrigerator", "blender"};
    return names;
}

namespace detail {

inline VarRef arg_var(const Atom& a, int i, Kind k) {
    return VarRef{a.args[i].obj_index, k};
}

inline unit_t pair_offset(const Atom& a) {
    return a.args.size() >= 3 ? a.args[2].num : 1;
}

} // namespace detail

// Lowers a built-in geometric atom (ignoring its negation flag) to a linear
// comparison.  Returns false for metadata/constant/custom predicates.
inline bool linear_semantics(const Atom& a, RelCode code, LinCmp& out) {
    using detail::arg_var;
    using detail::pair_offset;
    out = LinCmp{};
    switch (code) {
    // a at least c above b's top edge: y_a + c <= y_b
    case RelCode::Above:
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::Y));
        return true;
    // a's bottom at least c above b's top: y_a + h_a + c <= y_b
    case RelCode::CAbove:
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::Y));
        return true;
    case RelCode::Below:
        out.lhs.add(arg_var(a, 1, Kind::Y));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::Y));
        return true;
    case RelCode::CBelow:
        out.lhs.add(arg_var(a, 1, Kind::Y));
        out.lhs.add(arg_var(a, 1, Kind::H));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::Y));
        return true;
    case RelCode::Left:
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::X));
        return true;
    case RelCode::CLeft:
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::X));
        return true;
    case RelCode::Right:
        out.lhs.add(arg_var(a, 1, Kind::X));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::X));
        return true;
    case RelCode::CRight:
        out.lhs.add(arg_var(a, 1, Kind::X));
        out.lhs.add(arg_var(a, 1, Kind::W));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::X));
        return true;
    case RelCode::Narrower:
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::W));
        return true;
    case RelCode::Wider:
        out.lhs.add(arg_var(a, 1, Kind::W));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::W));
        return true;
    case RelCode::Shorter:
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::H));
        return true;
    case RelCode::Taller:
        out.lhs.add(arg_var(a, 1, Kind::H));
        out.lhs.c = pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::H));
        return true;
    // not(y_a + h_a + c <= y_b)  ==  y_b + 1 - c <= y_a + h_a
    case RelCode::NotCAbove:
        out.lhs.add(arg_var(a, 1, Kind::Y));
        out.lhs.c = 1 - pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::Y));
        out.rhs.add(arg_var(a, 0, Kind::H));
        return true;
    case RelCode::NotCBelow:
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.lhs.c = 1 - pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::Y));
        out.rhs.add(arg_var(a, 1, Kind::H));
        return true;
    case RelCode::NotCLeft:
        out.lhs.add(arg_var(a, 1, Kind::X));
        out.lhs.c = 1 - pair_offset(a);
        out.rhs.add(arg_var(a, 0, Kind::X));
        out.rhs.add(arg_var(a, 0, Kind::W));
        return true;
    case RelCode::NotCRight:
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.lhs.c = 1 - pair_offset(a);
        out.rhs.add(arg_var(a, 1, Kind::X));
        out.rhs.add(arg_var(a, 1, Kind::W));
        return true;
    // value comparisons; strict over integers: v < c  ==  v + 1 <= c
    case RelCode::AboveValue:
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.lhs.c = 1;
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::BelowValue:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::Y));
        return true;
    case RelCode::LeftValue:
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.lhs.c = 1;
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::RightValue:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::X));
        return true;
    case RelCode::NarrowerValue:
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.lhs.c = 1;
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::WiderValue:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::W));
        return true;
    case RelCode::ShorterValue:
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.lhs.c = 1;
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::TallerValue:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::H));
        return true;
    // far-edge bounds: x_a + w_a <= c  /  x_a + w_a > c
    case RelCode::InBoundsX:
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::InBoundsY:
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::ExceedsX:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::X));
        out.rhs.add(arg_var(a, 0, Kind::W));
        return true;
    case RelCode::ExceedsY:
        out.lhs.c = a.args[1].num + 1;
        out.rhs.add(arg_var(a, 0, Kind::Y));
        out.rhs.add(arg_var(a, 0, Kind::H));
        return true;
    // exact equality
    case RelCode::Xeq:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.rhs.add(arg_var(a, 1, Kind::X));
        return true;
    case RelCode::Yeq:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.rhs.add(arg_var(a, 1, Kind::Y));
        return true;
    case RelCode::Weq:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.rhs.add(arg_var(a, 1, Kind::W));
        return true;
    case RelCode::Heq:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.rhs.add(arg_var(a, 1, Kind::H));
        return true;
    case RelCode::XeqValue:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::X));
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::YeqValue:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::Y));
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::WeqValue:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::W));
        out.rhs.c = a.args[1].num;
        return true;
    case RelCode::HeqValue:
        out.eq = true;
        out.lhs.add(arg_var(a, 0, Kind::H));
        out.rhs.c = a.args[1].num;
        return true;
    default:
        return false;
    }
}

} // namespace slate
