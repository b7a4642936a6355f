#pragma once

// Shared helpers for the test suite: tiny spec builders, an exhaustive
// enumeration oracle for satisfiability and interval soundness, and random
// generators for formulas over small domains.

#include <slate/eval.hpp>
#include <slate/parser.hpp>
#include <slate/rng.hpp>
#include <slate/search.hpp>

#include <functional>
#include <string>
#include <vector>

namespace ts {

using namespace slate;

// A spec with `n` anonymous objects and per-kind scene bounds; the
// constraint is attached afterwards.
inline DesignSpec blank_spec(int n, Interval x, Interval y, Interval w, Interval h) {
    DesignSpec spec;
    spec.scene_domain.of(Kind::X) = x;
    spec.scene_domain.of(Kind::Y) = y;
    spec.scene_domain.of(Kind::W) = w;
    spec.scene_domain.of(Kind::H) = h;
    for (int i = 0; i < n; ++i)
        spec.objects.push_back(ObjectDecl{i + 1, "object", {}, std::nullopt});
    spec.constraint = Formula::leaf(make_atom("true", {}));
    return spec;
}

inline DesignSpec blank_spec(int n, Interval all) { return blank_spec(n, all, all, all, all); }

// Object argument with the index pre-resolved (ids are 1-based, dense).
inline Arg obj(int id) { return Arg::object(id, id - 1); }

inline Formula atom(std::string pred, std::vector<Arg> args, bool negated = false) {
    return Formula::leaf(make_atom(std::move(pred), std::move(args), negated));
}

inline Formula pair_atom(std::string pred, int a, int b) {
    return atom(std::move(pred), {obj(a), obj(b)});
}
inline Formula pair_atom(std::string pred, int a, int b, long long c) {
    return atom(std::move(pred), {obj(a), obj(b), Arg::integer(c)});
}
inline Formula value_atom(std::string pred, int a, long long c) {
    return atom(std::move(pred), {obj(a), Arg::integer(c)});
}

// Calls fn for every complete assignment of d.  Returns false (without
// visiting anything further) as soon as fn does.
inline bool for_each_completion(const DomainBox& d, const std::function<bool(const Layout&)>& fn) {
    Layout layout(d.num_objects());
    size_t vars = d.iv.size();
    std::vector<unit_t> cur(vars);
    for (size_t i = 0; i < vars; ++i) cur[i] = d.iv[i].lo;
    while (true) {
        for (size_t o = 0; o < layout.size(); ++o)
            for (Kind k : all_kinds)
                layout[o].set(k, cur[o * 4 + static_cast<size_t>(k)]);
        if (!fn(layout)) return false;
        size_t i = 0;
        while (i < vars && cur[i] == d.iv[i].hi) cur[i] = d.iv[i].lo, ++i;
        if (i == vars) return true;
        ++cur[i];
    }
}

// Brute-force satisfiability by enumerating every completion of d.
inline bool exhaustive_sat(const DesignSpec& spec, const Formula& f, const DomainBox& d,
                           const PredicateRegistry& reg = PredicateRegistry::global()) {
    bool found = false;
    for_each_completion(d, [&](const Layout& l) {
        if (eval_point(spec, f, l, reg)) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

// Do all / none of the completions satisfy f?
struct ExhaustiveTally {
    long long sat = 0;
    long long total = 0;
};

inline ExhaustiveTally exhaustive_tally(const DesignSpec& spec, const Formula& f,
                                        const DomainBox& d,
                                        const PredicateRegistry& reg = PredicateRegistry::global()) {
    ExhaustiveTally t;
    for_each_completion(d, [&](const Layout& l) {
        ++t.total;
        if (eval_point(spec, f, l, reg)) ++t.sat;
        return true;
    });
    return t;
}

// --- random instance generation --------------------------------------------

// A random pairwise/value/equality atom over `n` objects with offsets scaled
// to the given coordinate range.
inline Formula random_atom(Rng& rng, int n, unit_t span) {
    static const char* pair_preds[] = {"above", "below",  "left",    "right",
                                       "cabove", "cbelow", "cleft",   "cright",
                                       "wider", "narrower", "taller", "shorter",
                                       "not_cleft", "not_cright", "not_cabove", "not_cbelow"};
    static const char* value_preds[] = {"above_value", "below_value",  "left_value",
                                        "right_value", "wider_value",  "narrower_value",
                                        "taller_value", "shorter_value", "in_bounds_x",
                                        "in_bounds_y", "exceeds_x",     "exceeds_y",
                                        "xeq_value",   "yeq_value",     "weq_value",
                                        "heq_value"};
    static const char* eq_preds[] = {"xeq", "yeq", "weq", "heq"};

    int family = static_cast<int>(rng.uniform_int(0, 9));
    if (family < 5) {
        const char* p = pair_preds[rng.uniform_int(0, 15)];
        int a = static_cast<int>(rng.uniform_int(1, n));
        int b = static_cast<int>(rng.uniform_int(1, n));
        if (b == a) b = a % n + 1;
        if (rng.bernoulli(0.5)) return pair_atom(p, a, b);
        return pair_atom(p, a, b, rng.uniform_int(-1, span));
    }
    if (family < 9) {
        const char* p = value_preds[rng.uniform_int(0, 15)];
        int a = static_cast<int>(rng.uniform_int(1, n));
        return value_atom(p, a, rng.uniform_int(0, 2 * span));
    }
    const char* p = eq_preds[rng.uniform_int(0, 3)];
    int a = static_cast<int>(rng.uniform_int(1, n));
    int b = static_cast<int>(rng.uniform_int(1, n));
    if (b == a) b = a % n + 1;
    return pair_atom(p, a, b);
}

// Random formula of bounded depth; And/Or/Not nodes above random atoms.
inline Formula random_formula(Rng& rng, int n, unit_t span, int depth) {
    if (depth == 0 || rng.bernoulli(0.35)) return random_atom(rng, n, span);
    int shape = static_cast<int>(rng.uniform_int(0, 2));
    if (shape == 2) return Formula::make_not(random_formula(rng, n, span, depth - 1));
    int kids = static_cast<int>(rng.uniform_int(2, 3));
    std::vector<Formula> ks;
    for (int i = 0; i < kids; ++i) ks.push_back(random_formula(rng, n, span, depth - 1));
    return shape == 0 ? Formula::make_and(std::move(ks)) : Formula::make_or(std::move(ks));
}

// Random sub-box of the spec's initial domains with at most `max_completions`
// total completions (interval widths shrink until the product fits).
inline DomainBox random_small_box(Rng& rng, const DesignSpec& spec, unit_t max_completions) {
    DomainBox d = spec.initial_domains();
    while (true) {
        DomainBox out = d;
        for (Interval& iv : out.iv) {
            unit_t width = rng.uniform_int(0, 2);
            unit_t lo = rng.uniform_int(iv.lo, std::max(iv.lo, iv.hi - width));
            iv = Interval{lo, std::min(iv.hi, lo + width)};
        }
        if (out.completions(max_completions) <= max_completions) return out;
    }
}

} // namespace ts
