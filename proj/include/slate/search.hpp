#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ast.hpp"
#include "eval.hpp"
#include "policy_base.hpp"
#include "refine.hpp"
#include "rng.hpp"

namespace slate {

// Exact forward checking: a depth-first search over the per-variable dyadic
// decision trees, pruning on eval_interval = False and accepting on True.
// Because every integer in a live interval remains reachable by some decision
// string, satisfiability over interval domains coincides with satisfiability
// over decision-state expansions.

enum class SatStatus : uint8_t { Sat, Unsat, BudgetExceeded };

constexpr const char* to_string(SatStatus s) {
    switch (s) {
    case SatStatus::Sat: return "sat";
    case SatStatus::Unsat: return "unsat";
    case SatStatus::BudgetExceeded: return "budget-exceeded";
    }
    return "?";
}

struct TokenSet {
    std::array<bool, 3> m{};

    bool contains(Token t) const { return m[decision_index(t)]; }
    void add(Token t) { m[decision_index(t)] = true; }
    void remove(Token t) { m[decision_index(t)] = false; }
    bool none() const { return !m[0] && !m[1] && !m[2]; }
    bool all() const { return m[0] && m[1] && m[2]; }
    int count() const { return int(m[0]) + int(m[1]) + int(m[2]); }

    TokenSet inverted() const {
        TokenSet t;
        t.m = {!m[0], !m[1], !m[2]};
        return t;
    }

    friend bool operator==(const TokenSet& a, const TokenSet& b) { return a.m == b.m; }
};

class SampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsatSpecError : public SampleError {
public:
    using SampleError::SampleError;
};

class BudgetError : public SampleError {
public:
    using SampleError::SampleError;
};

namespace detail {

// eval_interval with bookkeeping: when the verdict is Unknown, collects the
// variables of the Unknown leaves so the search can branch where it matters.
inline Tri eval_collect(const DesignSpec& spec, const Formula& f, const DomainBox& d,
                        const PredicateRegistry& reg, std::vector<VarRef>& unknown_vars) {
    switch (f.op) {
    case Formula::Op::Leaf: {
        Tri t = eval_interval_atom(spec, f.atom, d, reg);
        if (t == Tri::Unknown) {
            const PredicateDef* def = reg.find(f.atom.pred);
            LinCmp lc;
            if (def && linear_semantics(f.atom, def->code, lc)) {
                lc.lhs.collect(unknown_vars);
                lc.rhs.collect(unknown_vars);
            } else {
                for (int o : object_indices(f.atom))
                    for (Kind k : all_kinds) unknown_vars.push_back(VarRef{o, k});
            }
        }
        return t;
    }
    case Formula::Op::Not:
        throw EvalError("eval_interval requires negation normal form");
    case Formula::Op::And: {
        Tri t = Tri::True;
        for (const auto& k : f.kids) {
            t = tri_and(t, eval_collect(spec, k, d, reg, unknown_vars));
            if (t == Tri::False) break;
        }
        return t;
    }
    case Formula::Op::Or: {
        Tri t = Tri::False;
        for (const auto& k : f.kids) {
            t = tri_or(t, eval_collect(spec, k, d, reg, unknown_vars));
            if (t == Tri::True) break;
        }
        return t;
    }
    }
    throw std::logic_error("eval_collect: bad op");
}

// Hull-consistency pass over the atoms the current box forces to hold: every
// leaf reached through conjunctions only, plus the sole live branch of an
// otherwise-refuted disjunction, must be satisfied by any model inside d, so
// its linear form prunes variable bounds that cannot appear in one.  Only
// provably infeasible values are dropped, which keeps satisfiability within d
// exact while letting the search refute chained inequalities in one sweep
// instead of rediscovering them beneath every split of an unrelated variable.
struct BoundsPropagator {
    const DesignSpec& spec;
    const PredicateRegistry& reg;
    DomainBox& d;
    bool changed = false;
    bool empty = false;

    // lhs <= rhs is forced: each lhs variable is capped by the slack the rhs
    // can still supply, each rhs variable must cover what the lhs at least
    // contributes.  The slack stays valid across the loop because capping an
    // lhs hi never moves lhs.range().lo and raising an rhs lo never moves
    // rhs.range().hi.
    void tighten_le(const LinTerm& lhs, const LinTerm& rhs) {
        unit_t slack = rhs.range(d).hi - lhs.range(d).lo;
        if (slack < 0) {
            empty = true;
            return;
        }
        for (int i = 0; i < lhs.n; ++i) {
            Interval& iv = d.at(lhs.v[i]);
            if (iv.lo + slack < iv.hi) {
                iv.hi = iv.lo + slack;
                changed = true;
            }
        }
        for (int i = 0; i < rhs.n; ++i) {
            Interval& iv = d.at(rhs.v[i]);
            if (iv.hi - slack > iv.lo) {
                iv.lo = iv.hi - slack;
                changed = true;
            }
        }
    }

    void walk(const Formula& f) {
        if (empty) return;
        switch (f.op) {
        case Formula::Op::Leaf: {
            const PredicateDef* def = reg.find(f.atom.pred);
            LinCmp lc;
            if (!def || !linear_semantics(f.atom, def->code, lc)) return;
            if (!f.atom.negated) {
                tighten_le(lc.lhs, lc.rhs);
                if (lc.eq && !empty) tighten_le(lc.rhs, lc.lhs);
            } else if (!lc.eq) {
                // linear_semantics ignores the negation flag; the forced
                // constraint here is !(lhs <= rhs), i.e. rhs + 1 <= lhs
                LinTerm shifted = lc.rhs;
                shifted.c += 1;
                tighten_le(shifted, lc.lhs);
            }
            // a forced negated equality only excludes interior points, which
            // interval bounds cannot express; the search handles it
            return;
        }
        case Formula::Op::Not:
            throw EvalError("eval_interval requires negation normal form");
        case Formula::Op::And:
            for (const auto& k : f.kids) {
                walk(k);
                if (empty) return;
            }
            return;
        case Formula::Op::Or: {
            const Formula* live = nullptr;
            for (const auto& k : f.kids) {
                Tri t = eval_interval(spec, k, d, reg);
                if (t == Tri::True) return; // branch already holds: nothing is forced
                if (t == Tri::Unknown) {
                    if (live) return; // two live branches: no unit information
                    live = &k;
                }
            }
            if (!live) {
                empty = true; // every branch refuted
                return;
            }
            walk(*live);
            return;
        }
        }
        throw std::logic_error("propagate: bad op");
    }
};

struct SatSearch {
    const DesignSpec& spec;
    const Formula& f;
    const PredicateRegistry& reg;
    long long budget; // negative: unlimited
    bool exceeded = false;

    // Takes the box by value: propagation tightens many variables at once,
    // and a copy per node is far cheaper than undoing that on backtrack.
    bool run(DomainBox d) {
        // Propagate, then evaluate, then charge the budget: point domains
        // always get an exact verdict, so a budget can only defer branching,
        // never turn a decided state into BudgetExceeded.  The sampler's
        // output guarantee rests on this.  Tightened bounds stay sound for
        // every child box, since child models are a subset of this node's.
        BoundsPropagator prop{spec, reg, d};
        do {
            prop.changed = false;
            prop.walk(f);
        } while (prop.changed && !prop.empty);
        if (prop.empty) return false;

        std::vector<VarRef> unknown_vars;
        Tri t = eval_collect(spec, f, d, reg, unknown_vars);
        if (t == Tri::True) return true;
        if (t == Tri::False) return false;
        if (budget >= 0) {
            if (budget == 0) {
                exceeded = true;
                return false;
            }
            --budget;
        }

        VarRef var{};
        unit_t best = 0;
        for (const VarRef& v : unknown_vars) {
            unit_t sz = d.at(v).size();
            if (sz > best) {
                best = sz;
                var = v;
            }
        }
        if (best <= 1)
            throw std::logic_error("forward check: unknown verdict with no refinable variable");

        Interval full = d.at(var);
        unit_t mid = full.mid();
        const Interval children[3] = {Interval{mid, mid}, Interval{full.lo, mid - 1},
                                      Interval{mid + 1, full.hi}};
        for (const Interval& c : children) {
            if (c.lo > c.hi) continue;
            d.at(var) = c;
            if (run(d)) return true;
        }
        return false;
    }
};

} // namespace detail

// Is any completion of the interval domain d a model of f?  f must be in NNF.
// A non-negative budget caps the number of search nodes; exhausting it yields
// BudgetExceeded instead of a verdict.
inline SatStatus satisfiable(const DesignSpec& spec, const Formula& f, const DomainBox& d,
                             long long budget = -1,
                             const PredicateRegistry& reg = PredicateRegistry::global()) {
    detail::SatSearch search{spec, f, reg, budget};
    if (search.run(d)) return SatStatus::Sat;
    return search.exceeded ? SatStatus::BudgetExceeded : SatStatus::Unsat;
}

// Decision tokens for `var` that are legal on its current interval and keep
// the constraint satisfiable.  In budgeted mode a token is kept when the
// check is inconclusive, which is what makes rewinds reachable at all.
inline TokenSet filter_feasible_tokens(const DesignSpec& spec, const Formula& f, DomainBox& d,
                                       const VarRef& var, long long budget = -1,
                                       const PredicateRegistry& reg = PredicateRegistry::global()) {
    TokenSet feasible;
    Interval full = d.at(var);
    for (int i = 0; i < 3; ++i) {
        Token t = decision_token(i);
        if (!token_legal(full, t)) continue;
        unit_t mid = full.mid();
        Interval child = t == Token::Stop    ? Interval{mid, mid}
                         : t == Token::Left  ? Interval{full.lo, mid - 1}
                                             : Interval{mid + 1, full.hi};
        d.at(var) = child;
        SatStatus st = satisfiable(spec, f, d, budget, reg);
        d.at(var) = full;
        if (st == SatStatus::Sat || st == SatStatus::BudgetExceeded) feasible.add(t);
    }
    return feasible;
}

// Zeroes the blocked entries and renormalizes the rest; if the surviving
// mass is negligible (< 1e-12), falls back to uniform over the unblocked
// tokens.  Blocking everything is a caller error.
inline std::array<double, 3> resample_distribution(const std::array<double, 3>& p,
                                                   const TokenSet& blocked) {
    if (blocked.all()) throw std::invalid_argument("resample_distribution: all tokens blocked");
    std::array<double, 3> out{};
    double mass = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (!blocked.m[i]) {
            out[i] = p[i];
            mass += p[i];
        }
    }
    if (mass < 1e-12) {
        double u = 1.0 / (3 - blocked.count());
        for (int i = 0; i < 3; ++i) out[i] = blocked.m[i] ? 0.0 : u;
        return out;
    }
    for (double& v : out) v /= mass;
    return out;
}

// Policy-guided constrained sampling.  Every emitted token is forward-checked
// before it can be drawn, so the returned layout always satisfies the
// constraint.  With an unlimited budget the feasible set is never empty; with
// a node budget, inconclusive checks can admit dead-end tokens, and the
// sampler then rewinds one decision, blocks the token it took, and resamples.
inline Layout sample_layout(const DesignSpec& spec, Policy& policy, Rng& rng,
                            long long budget = -1,
                            const PredicateRegistry& reg = PredicateRegistry::global()) {
    Formula f = to_nnf(spec.constraint);
    const DomainBox initial = spec.initial_domains();
    DomainBox d = initial;
    if (satisfiable(spec, f, d, budget, reg) == SatStatus::Unsat)
        throw UnsatSpecError("specification is unsatisfiable");

    policy.reset(spec);
    std::vector<VarRef> order = variable_order(spec, OrderMode::Inference);

    // Pre-existing objects are pinned: replay their canonical strings so the
    // recurrent state still sees them.
    size_t pos = 0;
    for (; pos < order.size(); ++pos) {
        const VarRef& v = order[pos];
        const ObjectDecl& obj = spec.object_at(v.obj);
        if (!obj.is_given()) break;
        policy.begin_variable(v, obj.type_name);
        Token prev = Token::Start;
        for (Token t : encode(obj.given_box->get(v.kind), spec.scene_domain.of(v.kind))) {
            (void)policy.step(prev);
            prev = t;
        }
    }

    struct Frame {
        size_t pos;
        VarState vs;
        Token prev;
        TokenSet blocked;
        PolicySnapshot snap;
        Token taken;
    };
    std::vector<Frame> trail;

    if (pos < order.size()) {
        VarState vs(spec.scene_domain.of(order[pos].kind));
        Token prev = Token::Start;
        TokenSet blocked;
        bool need_begin = true;

        while (true) {
            const VarRef& var = order[pos];
            if (need_begin) {
                policy.begin_variable(var, spec.object_at(var.obj).type_name);
                need_begin = false;
            }
            PolicySnapshot snap = policy.save();
            std::array<double, 3> probs = policy.step(prev);

            TokenSet feasible = filter_feasible_tokens(spec, f, d, var, budget, reg);
            for (int i = 0; i < 3; ++i)
                if (blocked.m[i]) feasible.m[i] = false;

            if (feasible.none()) {
                if (trail.empty())
                    throw BudgetError("search budget exhausted: rewound past the first decision");
                Frame fr = std::move(trail.back());
                trail.pop_back();
                policy.load(fr.snap);
                // variables abandoned by the rewind fall back to their
                // untouched initial domains
                for (size_t p = fr.pos; p <= pos; ++p) d.at(order[p]) = initial.at(order[p]);
                d.at(order[fr.pos]) = fr.vs.iv;
                pos = fr.pos;
                vs = std::move(fr.vs);
                prev = fr.prev;
                blocked = fr.blocked;
                blocked.add(fr.taken);
                continue;
            }

            std::array<double, 3> dist = resample_distribution(probs, feasible.inverted());
            Token t = decision_token(rng.categorical(dist.data(), 3));
            trail.push_back(Frame{pos, vs, prev, blocked, std::move(snap), t});

            ApplyResult res = apply_token(vs, t);
            if (std::holds_alternative<unit_t>(res)) {
                unit_t value = std::get<unit_t>(res);
                d.at(var) = Interval{value, value};
                ++pos;
                if (pos == order.size()) break;
                vs = VarState(spec.scene_domain.of(order[pos].kind));
                prev = Token::Start;
                blocked = TokenSet{};
                need_begin = true;
            } else {
                vs = std::get<VarState>(std::move(res));
                d.at(var) = vs.iv;
                prev = t;
                blocked = TokenSet{};
            }
        }
    }

    Layout layout = d.as_layout();
    if (!eval_point(spec, spec.constraint, layout, reg))
        throw std::logic_error("internal error: sampled layout violates the constraint");
    return layout;
}

} // namespace slate
