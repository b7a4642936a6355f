#include <catch2/catch_amalgamated.hpp>

#include <slate/parser.hpp>
#include <slate/policy.hpp>
#include <slate/search.hpp>

#include "test_support.hpp"

using namespace slate;

TEST_CASE("satisfiable decides simple specs from the full domain") {
    DesignSpec spec = ts::blank_spec(1, Interval{0, 1000});
    DomainBox d = spec.initial_domains();
    REQUIRE(satisfiable(spec, ts::value_atom("left_value", 1, 500), d) == SatStatus::Sat);
    d.at(0, Kind::X) = Interval{600, 600};
    REQUIRE(satisfiable(spec, ts::value_atom("left_value", 1, 500), d) == SatStatus::Unsat);
    // mutually exclusive halves are unsatisfiable from anywhere
    DesignSpec two = ts::blank_spec(1, Interval{0, 1000});
    Formula conflict = Formula::make_and(ts::value_atom("left_value", 1, 300),
                                         ts::value_atom("right_value", 1, 700));
    REQUIRE(satisfiable(two, conflict, two.initial_domains()) == SatStatus::Unsat);
}

TEST_CASE("satisfiable agrees with exhaustive enumeration") {
    DesignSpec spec = ts::blank_spec(2, Interval{0, 12});
    Rng rng(4242);
    int sat_seen = 0, unsat_seen = 0;
    for (int trial = 0; trial < 250; ++trial) {
        Formula f = to_nnf(ts::random_formula(rng, 2, 12, 3));
        DomainBox d = ts::random_small_box(rng, spec, 4096);
        bool truth = ts::exhaustive_sat(spec, f, d);
        SatStatus got = satisfiable(spec, f, d);
        INFO(pretty_print(f));
        REQUIRE(got == (truth ? SatStatus::Sat : SatStatus::Unsat));
        (truth ? sat_seen : unsat_seen)++;
    }
    // the generator must exercise both outcomes for this to mean anything
    REQUIRE(sat_seen > 20);
    REQUIRE(unsat_seen > 20);
}

TEST_CASE("a zero budget reports inconclusive exactly when branching is needed") {
    DesignSpec spec = ts::blank_spec(1, Interval{0, 1000});
    DomainBox d = spec.initial_domains();
    Formula needs_split = Formula::make_or(ts::value_atom("xeq_value", 1, 3),
                                           ts::value_atom("xeq_value", 1, 900));
    REQUIRE(satisfiable(spec, needs_split, d, 0) == SatStatus::BudgetExceeded);
    REQUIRE(satisfiable(spec, needs_split, d) == SatStatus::Sat);
    // decided domains never charge the budget
    d.at(0, Kind::X) = Interval{3, 3};
    REQUIRE(satisfiable(spec, needs_split, d, 0) == SatStatus::Sat);
    d.at(0, Kind::X) = Interval{4, 4};
    REQUIRE(satisfiable(spec, needs_split, d, 0) == SatStatus::Unsat);
}

TEST_CASE("bounds propagation decides degenerate chains without search") {
    // Touching reciprocal boxes admit only zero-width layouts; the forced-
    // atom sweep pins that witness right after the first split instead of
    // crawling an exponential frontier of fruitless refinements.
    DesignSpec touching = parse("cleft(1,2,0) & cright(1,2,0)");
    REQUIRE(satisfiable(touching, to_nnf(touching.constraint), touching.initial_domains(), 16) ==
            SatStatus::Sat);
    // With the default strict separation the same pair is infeasible, and
    // propagation alone refutes it, so a verdict arrives before any budget
    // is charged; so does a cyclic gap chain.
    DesignSpec separated = parse("cleft(1,2) & cright(1,2)");
    REQUIRE(satisfiable(separated, to_nnf(separated.constraint), separated.initial_domains(), 0) ==
            SatStatus::Unsat);
    DesignSpec cycle = parse("left(1,2,6) & left(2,3,6) & left(3,1,6)");
    REQUIRE(satisfiable(cycle, to_nnf(cycle.constraint), cycle.initial_domains(), 0) ==
            SatStatus::Unsat);
}

TEST_CASE("feasible token filtering matches the sub-domain truth") {
    DesignSpec spec = ts::blank_spec(1, Interval{0, 100});
    DomainBox d = spec.initial_domains();

    SECTION("an equality pinned left of the midpoint leaves only left") {
        Formula f = ts::value_atom("xeq_value", 1, 37);
        TokenSet feas = filter_feasible_tokens(spec, f, d, VarRef{0, Kind::X});
        REQUIRE(feas.contains(Token::Left));
        REQUIRE_FALSE(feas.contains(Token::Right));
        REQUIRE_FALSE(feas.contains(Token::Stop));
    }

    SECTION("an unconstrained variable keeps all legal tokens") {
        Formula f = ts::atom("true", {});
        TokenSet feas = filter_feasible_tokens(spec, f, d, VarRef{0, Kind::X});
        REQUIRE(feas.all());
        d.at(0, Kind::X) = Interval{50, 50};
        feas = filter_feasible_tokens(spec, f, d, VarRef{0, Kind::X});
        REQUIRE(feas == TokenSet{{false, false, true}});
    }

    SECTION("the filter leaves the domain untouched") {
        DomainBox before = d;
        (void)filter_feasible_tokens(spec, ts::value_atom("left_value", 1, 10), d,
                                     VarRef{0, Kind::X});
        REQUIRE(d == before);
    }
}

TEST_CASE("token feasibility coincides with child-domain satisfiability") {
    DesignSpec spec = ts::blank_spec(2, Interval{0, 12});
    Rng rng(77);
    for (int trial = 0; trial < 120; ++trial) {
        Formula f = to_nnf(ts::random_formula(rng, 2, 12, 2));
        DomainBox d = ts::random_small_box(rng, spec, 2048);
        VarRef var{static_cast<int>(rng.uniform_int(0, 1)),
                   static_cast<Kind>(rng.uniform_int(0, 3))};
        TokenSet feas = filter_feasible_tokens(spec, f, d, var);
        Interval full = d.at(var);
        unit_t mid = full.mid();
        for (int i = 0; i < 3; ++i) {
            Token t = decision_token(i);
            if (!token_legal(full, t)) {
                REQUIRE_FALSE(feas.contains(t));
                continue;
            }
            DomainBox child = d;
            child.at(var) = t == Token::Stop    ? Interval{mid, mid}
                            : t == Token::Left  ? Interval{full.lo, mid - 1}
                                                : Interval{mid + 1, full.hi};
            REQUIRE(feas.contains(t) == ts::exhaustive_sat(spec, f, child));
        }
    }
}

TEST_CASE("resampling renormalizes over the unblocked tokens") {
    TokenSet none;
    std::array<double, 3> p{0.75, 0.05, 0.20};
    REQUIRE(resample_distribution(p, none) == p);

    TokenSet left_blocked;
    left_blocked.add(Token::Left);
    auto q = resample_distribution(p, left_blocked);
    REQUIRE(q[0] == 0.0);
    REQUIRE(q[1] == Catch::Approx(0.20).margin(1e-15));
    REQUIRE(q[2] == Catch::Approx(0.80).margin(1e-15));

    // vanishing surviving mass falls back to uniform over the unblocked
    std::array<double, 3> loaded{0.5, 0.5, 0.0};
    TokenSet lr;
    lr.add(Token::Left);
    lr.add(Token::Right);
    auto u = resample_distribution(loaded, lr);
    REQUIRE(u == std::array<double, 3>{0.0, 0.0, 1.0});

    std::array<double, 3> tiny{1e-14, 2e-14, 1.0};
    TokenSet stop_blocked;
    stop_blocked.add(Token::Stop);
    auto v = resample_distribution(tiny, stop_blocked);
    REQUIRE(v[0] == 0.5);
    REQUIRE(v[1] == 0.5);
    REQUIRE(v[2] == 0.0);

    TokenSet all;
    all.add(Token::Left);
    all.add(Token::Right);
    all.add(Token::Stop);
    REQUIRE_THROWS_AS(resample_distribution(p, all), std::invalid_argument);
}

TEST_CASE("sampling always satisfies the constraint") {
    Rng gen(12021);
    int done = 0;
    for (int trial = 0; trial < 60; ++trial) {
        DesignSpec spec = ts::blank_spec(2, Interval{0, 40});
        Formula f = to_nnf(ts::random_formula(gen, 2, 40, 2));
        if (satisfiable(spec, f, spec.initial_domains()) != SatStatus::Sat) continue;
        spec.constraint = f;
        UniformPolicy policy;
        Rng rng(derive_seed(99, 0xAB, static_cast<uint64_t>(trial)));
        Layout layout = sample_layout(spec, policy, rng);
        REQUIRE(eval_point(spec, spec.constraint, layout));
        ++done;
    }
    REQUIRE(done > 25);
}

TEST_CASE("sampling is deterministic per seed") {
    DesignSpec spec = parse("cleft(1,2,30) & cabove(1,2)");
    UniformPolicy policy;
    Rng a(505), b(505), c(506);
    Layout la = sample_layout(spec, policy, a);
    Layout lb = sample_layout(spec, policy, b);
    Layout lc = sample_layout(spec, policy, c);
    REQUIRE(la == lb);
    REQUIRE(la != lc);
}

TEST_CASE("completely-left pairs never overlap") {
    DesignSpec spec = parse("cleft(1,2)");
    UniformPolicy policy;
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(3, 0xCC, static_cast<uint64_t>(i)));
        Layout l = sample_layout(spec, policy, rng);
        REQUIRE(l[0].x + l[0].w < l[1].x);
    }
}

TEST_CASE("pinned objects are replayed verbatim") {
    DesignSpec spec = parse("given(1,\"sink\",100,450,250,120) & cright(2,1)");
    UniformPolicy policy;
    for (int i = 0; i < 30; ++i) {
        Rng rng(derive_seed(8, 0xDD, static_cast<uint64_t>(i)));
        Layout l = sample_layout(spec, policy, rng);
        REQUIRE(l[0] == BoundingBox{100, 450, 250, 120});
        REQUIRE(l[0].x + l[0].w + 1 <= l[1].x);
    }
}

TEST_CASE("an unsatisfiable spec is rejected before sampling") {
    DesignSpec spec = parse("left_value(1,300) & right_value(1,700)");
    UniformPolicy policy;
    Rng rng(1);
    REQUIRE_THROWS_AS(sample_layout(spec, policy, rng), UnsatSpecError);
}

namespace {

// Wraps another policy and counts snapshot restores, i.e. sampler rewinds.
class CountingPolicy final : public Policy {
public:
    explicit CountingPolicy(Policy& inner) : inner_(inner) {}

    void reset(const DesignSpec& spec) override { inner_.reset(spec); }
    void begin_variable(const VarRef& v, const std::string& t) override {
        inner_.begin_variable(v, t);
    }
    std::array<double, 3> step(Token prev) override { return inner_.step(prev); }
    PolicySnapshot save() const override { return inner_.save(); }
    void load(const PolicySnapshot& snap) override {
        ++rewinds;
        inner_.load(snap);
    }

    int rewinds = 0;

private:
    Policy& inner_;
};

} // namespace

TEST_CASE("budgeted sampling rewinds out of dead ends and still satisfies") {
    // The second disjunct's y-clauses are jointly unsatisfiable, but each
    // clause keeps two live branches until y is pinned, so zero-budget
    // checks stay inconclusive through every x decision.  The sampler only
    // discovers the dead end at y and must rewind back across the x frames
    // until it reaches the sole model x = 12, y = 0.
    DesignSpec spec = parse("(xeq_value(1,12) & yeq_value(1,0)) | "
                            "((yeq_value(1,2) | yeq_value(1,12)) & "
                            "(yeq_value(1,5) | yeq_value(1,9)))");
    for (Kind k : {Kind::W, Kind::H}) spec.scene_domain.of(k) = Interval{0, 1};
    for (Kind k : {Kind::X, Kind::Y}) spec.scene_domain.of(k) = Interval{0, 15};

    int rewound_runs = 0;
    for (int i = 0; i < 20; ++i) {
        UniformPolicy uniform;
        CountingPolicy policy(uniform);
        Rng rng(derive_seed(17, 0xEE, static_cast<uint64_t>(i)));
        Layout l = sample_layout(spec, policy, rng, 0);
        REQUIRE(eval_point(spec, spec.constraint, l));
        REQUIRE(l[0].x == 12);
        REQUIRE(l[0].y == 0);
        if (policy.rewinds > 0) ++rewound_runs;
    }
    REQUIRE(rewound_runs > 0);
}

TEST_CASE("budgeted sampling of an undetected unsatisfiable spec fails cleanly") {
    // {2,12} and {5,9} are disjoint, so the spec has no model, but both
    // clauses keep two live branches on the full domain and zero-budget
    // checks cannot prove that up front; the sampler exhausts the tree and
    // reports the budget failure.
    DesignSpec spec = parse("(yeq_value(1,2) | yeq_value(1,12)) & "
                            "(yeq_value(1,5) | yeq_value(1,9))");
    for (Kind k : {Kind::W, Kind::H}) spec.scene_domain.of(k) = Interval{0, 1};
    for (Kind k : {Kind::X, Kind::Y}) spec.scene_domain.of(k) = Interval{0, 15};
    REQUIRE(satisfiable(spec, to_nnf(spec.constraint), spec.initial_domains(), 0) ==
            SatStatus::BudgetExceeded);

    UniformPolicy policy;
    Rng rng(9);
    REQUIRE_THROWS_AS(sample_layout(spec, policy, rng, 0), BudgetError);
    // with an unlimited budget the impossibility is detected up front instead
    Rng rng2(9);
    REQUIRE_THROWS_AS(sample_layout(spec, policy, rng2), UnsatSpecError);
}

TEST_CASE("sampling respects disjunctive choices") {
    DesignSpec spec = parse("(left_value(1,100) & taller_value(1,500)) | "
                            "(right_value(1,900) & shorter_value(1,100))");
    UniformPolicy policy;
    bool saw_left = false, saw_right = false;
    for (int i = 0; i < 60; ++i) {
        Rng rng(derive_seed(21, 0xF0, static_cast<uint64_t>(i)));
        Layout l = sample_layout(spec, policy, rng);
        REQUIRE(eval_point(spec, spec.constraint, l));
        if (l[0].x < 100) saw_left = true;
        if (l[0].x > 900) saw_right = true;
    }
    // both arms of the disjunction are reachable
    REQUIRE(saw_left);
    REQUIRE(saw_right);
}

TEST_CASE("sampling with extension predicates uses their interval semantics") {
    PredicateRegistry reg;
    // "sits on": equal bottom edge against the other's top, horizontally contained
    reg.register_predicate(
        "atop", 2,
        [](const Layout& l, const std::vector<int>& o) {
            const BoundingBox &a = l[o[0]], &b = l[o[1]];
            return a.y + a.h == b.y && b.x <= a.x && a.x + a.w <= b.x + b.w;
        },
        [](const DomainBox& d, const std::vector<int>& o) {
            auto le = [](Interval p, Interval q) {
                if (p.hi <= q.lo) return Tri::True;
                if (p.lo > q.hi) return Tri::False;
                return Tri::Unknown;
            };
            Interval ay = d.at(o[0], Kind::Y), ah = d.at(o[0], Kind::H);
            Interval bottom{ay.lo + ah.lo, ay.hi + ah.hi};
            Interval by = d.at(o[1], Kind::Y);
            Tri touch = Tri::Unknown;
            if (bottom.is_point() && by.is_point()) touch = tri_of(bottom.lo == by.lo);
            else if (bottom.hi < by.lo || by.hi < bottom.lo) touch = Tri::False;
            Interval ax = d.at(o[0], Kind::X), aw = d.at(o[0], Kind::W);
            Interval bx = d.at(o[1], Kind::X), bw = d.at(o[1], Kind::W);
            Tri contained = tri_and(le(bx, ax), le(Interval{ax.lo + aw.lo, ax.hi + aw.hi},
                                                   Interval{bx.lo + bw.lo, bx.hi + bw.hi}));
            return tri_and(touch, contained);
        });

    ParseOptions opts;
    opts.registry = &reg;
    DesignSpec spec = parse("given(1,\"table\",400,500,150,50) & atop(2,1)", opts);
    UniformPolicy policy;
    for (int i = 0; i < 25; ++i) {
        Rng rng(derive_seed(33, 0xF1, static_cast<uint64_t>(i)));
        Layout l = sample_layout(spec, policy, rng, -1, reg);
        REQUIRE(l[1].y + l[1].h == 500);
        REQUIRE(l[1].x >= 400);
        REQUIRE(l[1].x + l[1].w <= 550);
    }
}
