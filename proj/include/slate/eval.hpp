#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "ast.hpp"
#include "relations.hpp"
#include "tri.hpp"

namespace slate {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const PredicateDef& lookup_def(const Atom& a, const PredicateRegistry& reg) {
    const PredicateDef* d = reg.find(a.pred);
    if (!d) throw EvalError("unknown predicate: " + a.pred);
    return *d;
}

inline void require_resolved(const Atom& a, size_t num_objects) {
    for (const auto& arg : a.args) {
        if (arg.type != Arg::Type::Object) continue;
        if (arg.obj_index < 0 || static_cast<size_t>(arg.obj_index) >= num_objects)
            throw EvalError("unresolved object reference in " + a.pred + ": id " +
                            std::to_string(arg.num));
    }
}

inline std::vector<int> object_indices(const Atom& a) {
    std::vector<int> objs;
    for (const auto& arg : a.args)
        if (arg.type == Arg::Type::Object) objs.push_back(arg.obj_index);
    return objs;
}

inline BoundingBox given_args_box(const Atom& a) {
    return BoundingBox{a.args[2].num, a.args[3].num, a.args[4].num, a.args[5].num};
}

} // namespace detail

inline bool eval_point_atom(const DesignSpec& spec, const Atom& a, const Layout& layout,
                            const PredicateRegistry& reg) {
    const PredicateDef& d = detail::lookup_def(a, reg);
    detail::require_resolved(a, layout.size());
    bool truth = false;
    LinCmp lc;
    if (linear_semantics(a, d.code, lc)) {
        truth = lc.eval_point(layout);
    } else {
        switch (d.code) {
        case RelCode::TypeIs:
            truth = spec.object_at(a.args[0].obj_index).type_name == a.args[1].text;
            break;
        case RelCode::PropertyIs: {
            const auto& props = spec.object_at(a.args[0].obj_index).properties;
            truth = std::find(props.begin(), props.end(), a.args[1].text) != props.end();
            break;
        }
        case RelCode::Given:
            truth = layout[a.args[0].obj_index] == detail::given_args_box(a);
            break;
        case RelCode::DefaultPlacement:
            throw EvalError("default(...) must be expanded before evaluation");
        case RelCode::ConstTrue:
            truth = true;
            break;
        case RelCode::ConstFalse:
            truth = false;
            break;
        case RelCode::Custom:
            truth = d.point_fn(layout, detail::object_indices(a));
            break;
        default:
            throw EvalError("no point semantics for " + a.pred);
        }
    }
    return a.negated ? !truth : truth;
}

inline Tri eval_interval_atom(const DesignSpec& spec, const Atom& a, const DomainBox& d,
                              const PredicateRegistry& reg) {
    const PredicateDef& def = detail::lookup_def(a, reg);
    detail::require_resolved(a, d.num_objects());
    Tri t = Tri::Unknown;
    LinCmp lc;
    if (linear_semantics(a, def.code, lc)) {
        t = lc.eval_interval(d);
    } else {
        switch (def.code) {
        case RelCode::TypeIs:
        case RelCode::PropertyIs:
        case RelCode::ConstTrue:
        case RelCode::ConstFalse: {
            // Geometry-independent: constant over the whole domain.
            Atom pos = a;
            pos.negated = false;
            t = tri_of(eval_point_atom(spec, pos, Layout(d.num_objects()), reg));
            break;
        }
        case RelCode::Given: {
            BoundingBox want = detail::given_args_box(a);
            t = Tri::True;
            for (Kind k : all_kinds) {
                const Interval& iv = d.at(a.args[0].obj_index, k);
                if (!iv.contains(want.get(k))) {
                    t = Tri::False;
                    break;
                }
                if (!iv.is_point()) t = Tri::Unknown;
            }
            break;
        }
        case RelCode::DefaultPlacement:
            throw EvalError("default(...) must be expanded before evaluation");
        case RelCode::Custom: {
            std::vector<int> objs = detail::object_indices(a);
            // On point domains of the argument objects, defer to the point
            // evaluator so interval and point verdicts can never disagree.
            // (Extension predicates may only depend on their arguments.)
            bool args_are_points = true;
            for (int o : objs)
                for (Kind k : all_kinds)
                    if (!d.at(o, k).is_point()) args_are_points = false;
            if (args_are_points) {
                Layout probe(d.num_objects());
                for (size_t o = 0; o < probe.size(); ++o)
                    for (Kind k : all_kinds)
                        probe[o].set(k, d.at(static_cast<int>(o), k).lo);
                Atom pos = a;
                pos.negated = false;
                t = tri_of(eval_point_atom(spec, pos, probe, reg));
            } else if (def.interval_fn) {
                t = def.interval_fn(d, objs);
            } else {
                t = Tri::Unknown;
            }
            break;
        }
        default:
            throw EvalError("no interval semantics for " + a.pred);
        }
    }
    return a.negated ? tri_not(t) : t;
}

// Truth of f under a complete assignment.
inline bool eval_point(const DesignSpec& spec, const Formula& f, const Layout& layout,
                       const PredicateRegistry& reg = PredicateRegistry::global()) {
    switch (f.op) {
    case Formula::Op::Leaf:
        return eval_point_atom(spec, f.atom, layout, reg);
    case Formula::Op::Not:
        return !eval_point(spec, f.kids[0], layout, reg);
    case Formula::Op::And:
        for (const auto& k : f.kids)
            if (!eval_point(spec, k, layout, reg)) return false;
        return true;
    case Formula::Op::Or:
        for (const auto& k : f.kids)
            if (eval_point(spec, k, layout, reg)) return true;
        return false;
    }
    throw std::logic_error("eval_point: bad op");
}

// Sound three-valued relaxation of f over an interval domain: True only if
// every completion satisfies f, False only if none does.  Requires NNF.
inline Tri eval_interval(const DesignSpec& spec, const Formula& f, const DomainBox& d,
                         const PredicateRegistry& reg = PredicateRegistry::global()) {
    switch (f.op) {
    case Formula::Op::Leaf:
        return eval_interval_atom(spec, f.atom, d, reg);
    case Formula::Op::Not:
        throw EvalError("eval_interval requires negation normal form");
    case Formula::Op::And: {
        Tri t = Tri::True;
        for (const auto& k : f.kids) {
            t = tri_and(t, eval_interval(spec, k, d, reg));
            if (t == Tri::False) break;
        }
        return t;
    }
    case Formula::Op::Or: {
        Tri t = Tri::False;
        for (const auto& k : f.kids) {
            t = tri_or(t, eval_interval(spec, k, d, reg));
            if (t == Tri::True) break;
        }
        return t;
    }
    }
    throw std::logic_error("eval_interval: bad op");
}

namespace detail {

inline Atom with_pred_offset(const Atom& a, const char* pred, unit_t c) {
    Atom out;
    out.pred = pred;
    out.args.assign(a.args.begin(), a.args.begin() + 2);
    out.args.push_back(Arg::integer(c));
    return out;
}

inline Atom swap_pred(const Atom& a, const char* pred) {
    Atom out = a;
    out.pred = pred;
    out.negated = false;
    return out;
}

inline Atom value_atom(const Atom& a, const char* pred, unit_t c) {
    Atom out;
    out.pred = pred;
    out.args.push_back(a.args[0]);
    out.args.push_back(Arg::integer(c));
    return out;
}

inline Formula value_disjunction(const Atom& a, const char* lo_pred, const char* hi_pred) {
    return Formula::make_or(Formula::leaf(value_atom(a, lo_pred, a.args[1].num)),
                            Formula::leaf(value_atom(a, hi_pred, a.args[1].num)));
}

inline Formula pair_disjunction(const Atom& a, const char* lo_pred, const char* hi_pred) {
    return Formula::make_or(Formula::leaf(with_pred_offset(a, lo_pred, 1)),
                            Formula::leaf(with_pred_offset(a, hi_pred, 1)));
}

} // namespace detail

// Integer-exact complement: a formula whose point truth is the negation of
// the atom's at every layout.  Inequalities flip into their mirror relation
// with the offset shifted by one; exact equalities split into the two strict
// sides.  Predicates without a registered complement (extension predicates
// and metadata atoms) keep the negation on the atom itself, which interval
// evaluation treats conservatively.
inline Formula complement_atom(const Atom& a,
                               const PredicateRegistry& reg = PredicateRegistry::global()) {
    using namespace detail;
    if (a.negated) {
        Atom pos = a;
        pos.negated = false;
        return Formula::leaf(pos);
    }
    const PredicateDef& d = lookup_def(a, reg);
    unit_t c = 0;
    if (rel_is_linear(d.code) && d.num_objs == 2 && d.code < RelCode::AboveValue)
        c = pair_offset(a);
    switch (d.code) {
    case RelCode::Above: return Formula::leaf(with_pred_offset(a, "below", 1 - c));
    case RelCode::Below: return Formula::leaf(with_pred_offset(a, "above", 1 - c));
    case RelCode::Left: return Formula::leaf(with_pred_offset(a, "right", 1 - c));
    case RelCode::Right: return Formula::leaf(with_pred_offset(a, "left", 1 - c));
    case RelCode::Narrower: return Formula::leaf(with_pred_offset(a, "wider", 1 - c));
    case RelCode::Wider: return Formula::leaf(with_pred_offset(a, "narrower", 1 - c));
    case RelCode::Shorter: return Formula::leaf(with_pred_offset(a, "taller", 1 - c));
    case RelCode::Taller: return Formula::leaf(with_pred_offset(a, "shorter", 1 - c));
    case RelCode::CAbove: return Formula::leaf(swap_pred(a, "not_cabove"));
    case RelCode::CBelow: return Formula::leaf(swap_pred(a, "not_cbelow"));
    case RelCode::CLeft: return Formula::leaf(swap_pred(a, "not_cleft"));
    case RelCode::CRight: return Formula::leaf(swap_pred(a, "not_cright"));
    case RelCode::NotCAbove: return Formula::leaf(swap_pred(a, "cabove"));
    case RelCode::NotCBelow: return Formula::leaf(swap_pred(a, "cbelow"));
    case RelCode::NotCLeft: return Formula::leaf(swap_pred(a, "cleft"));
    case RelCode::NotCRight: return Formula::leaf(swap_pred(a, "cright"));
    case RelCode::AboveValue: return Formula::leaf(value_atom(a, "below_value", a.args[1].num - 1));
    case RelCode::BelowValue: return Formula::leaf(value_atom(a, "above_value", a.args[1].num + 1));
    case RelCode::LeftValue: return Formula::leaf(value_atom(a, "right_value", a.args[1].num - 1));
    case RelCode::RightValue: return Formula::leaf(value_atom(a, "left_value", a.args[1].num + 1));
    case RelCode::NarrowerValue:
        return Formula::leaf(value_atom(a, "wider_value", a.args[1].num - 1));
    case RelCode::WiderValue:
        return Formula::leaf(value_atom(a, "narrower_value", a.args[1].num + 1));
    case RelCode::ShorterValue:
        return Formula::leaf(value_atom(a, "taller_value", a.args[1].num - 1));
    case RelCode::TallerValue:
        return Formula::leaf(value_atom(a, "shorter_value", a.args[1].num + 1));
    case RelCode::InBoundsX: return Formula::leaf(swap_pred(a, "exceeds_x"));
    case RelCode::InBoundsY: return Formula::leaf(swap_pred(a, "exceeds_y"));
    case RelCode::ExceedsX: return Formula::leaf(swap_pred(a, "in_bounds_x"));
    case RelCode::ExceedsY: return Formula::leaf(swap_pred(a, "in_bounds_y"));
    case RelCode::Xeq: return pair_disjunction(a, "left", "right");
    case RelCode::Yeq: return pair_disjunction(a, "above", "below");
    case RelCode::Weq: return pair_disjunction(a, "narrower", "wider");
    case RelCode::Heq: return pair_disjunction(a, "shorter", "taller");
    case RelCode::XeqValue: return value_disjunction(a, "left_value", "right_value");
    case RelCode::YeqValue: return value_disjunction(a, "above_value", "below_value");
    case RelCode::WeqValue: return value_disjunction(a, "narrower_value", "wider_value");
    case RelCode::HeqValue: return value_disjunction(a, "shorter_value", "taller_value");
    case RelCode::ConstTrue: return Formula::leaf(make_atom("false", {}));
    case RelCode::ConstFalse: return Formula::leaf(make_atom("true", {}));
    default: {
        Atom neg = a;
        neg.negated = true;
        return Formula::leaf(neg);
    }
    }
}

// Distinct variables whose intervals can influence the truth of f.
inline std::vector<VarRef> collect_vars(const Formula& f,
                                        const PredicateRegistry& reg = PredicateRegistry::global()) {
    std::vector<VarRef> out;
    auto walk = [&](auto&& self, const Formula& g) -> void {
        if (g.op != Formula::Op::Leaf) {
            for (const auto& k : g.kids) self(self, k);
            return;
        }
        const PredicateDef& d = detail::lookup_def(g.atom, reg);
        LinCmp lc;
        if (linear_semantics(g.atom, d.code, lc)) {
            lc.lhs.collect(out);
            lc.rhs.collect(out);
        } else if (d.code == RelCode::Given || d.code == RelCode::Custom) {
            for (int o : detail::object_indices(g.atom))
                for (Kind k : all_kinds) out.push_back(VarRef{o, k});
        }
    };
    walk(walk, f);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace slate
