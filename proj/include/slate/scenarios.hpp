#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ast.hpp"
#include "eval.hpp"
#include "parser.hpp"
#include "policy_base.hpp"
#include "rng.hpp"
#include "search.hpp"
#include "trainer.hpp"

namespace slate {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A bound that may reference an earlier variable: value = ref * mul + add.
struct BoundExpr {
    std::optional<VarRef> ref;
    double mul = 1.0;
    double add = 0.0;

    static BoundExpr constant(double c) {
        BoundExpr b;
        b.add = c;
        return b;
    }
    static BoundExpr of(VarRef r, double mul = 1.0, double add = 0.0) {
        BoundExpr b;
        b.ref = r;
        b.mul = mul;
        b.add = add;
        return b;
    }

    double value(const Layout& layout) const {
        double base = ref ? static_cast<double>(layout[ref->obj].get(ref->kind)) * mul : 0.0;
        return base + add;
    }
};

// Per-variable generator: rnd(j, k) is a rounded normal with mean (j+k)/2
// and standard deviation (k-j)/12, clamped into [j, k]; uni(j, k) is an
// integer uniform.  A degenerate k < j collapses to the single value j.
struct VarGen {
    enum class Dist : uint8_t { Rnd, Uni };
    Dist dist = Dist::Rnd;
    BoundExpr lo, hi;

    static VarGen rnd(BoundExpr lo, BoundExpr hi) { return {Dist::Rnd, std::move(lo), std::move(hi)}; }
    static VarGen uni(BoundExpr lo, BoundExpr hi) { return {Dist::Uni, std::move(lo), std::move(hi)}; }

    unit_t draw(const Layout& layout, Rng& rng) const {
        double j = lo.value(layout);
        double k = hi.value(layout);
        if (k < j) k = j;
        // tiny slack so exact fractional bounds are not lost to rounding noise
        unit_t ilo = static_cast<unit_t>(std::ceil(j - 1e-9));
        unit_t ihi = static_cast<unit_t>(std::floor(k + 1e-9));
        if (ihi < ilo) ihi = ilo;
        if (dist == Dist::Uni) return rng.uniform_int(ilo, ihi);
        double v = rng.normal(j + (k - j) / 2.0, (k - j) / 12.0);
        unit_t r = static_cast<unit_t>(std::llround(v));
        return std::clamp(r, ilo, ihi);
    }
};

// Soft goal: lo <= variable <= hi, both bounds possibly depending on other
// variables of the same layout.
struct PrefClause {
    VarRef var;
    BoundExpr lo, hi;

    bool holds(const Layout& layout) const {
        double v = static_cast<double>(layout[var.obj].get(var.kind));
        return lo.value(layout) <= v && v <= hi.value(layout);
    }
};

// A named evaluation setting: a constraint over N anonymous objects, a
// generator table that fabricates training layouts (ignoring the
// constraint), and preference clauses that probe how well samples match the
// generators' shape.
struct Scenario {
    std::string name;
    int num_objects = 0;
    SceneDomain domain;
    std::string constraint_text;
    std::vector<std::array<VarGen, 4>> gens; // [object][kind]
    std::vector<PrefClause> preferences;
    DesignSpec spec; // built by finalize()

    std::vector<std::string> class_vocab() const {
        std::vector<std::string> v;
        v.reserve(static_cast<size_t>(num_objects));
        for (int i = 1; i <= num_objects; ++i) v.push_back("obj" + std::to_string(i));
        return v;
    }

    // Builds the design spec (objects obj1..objN, parsed constraint) and
    // validates the generator table; rejects unsatisfiable constraints.
    void finalize() {
        if (name.empty()) throw ScenarioError("scenario has no name");
        if (num_objects < 1) throw ScenarioError("scenario '" + name + "' has no objects");
        if (static_cast<int>(gens.size()) != num_objects)
            throw ScenarioError("scenario '" + name + "' defines generators for " +
                                std::to_string(gens.size()) + " of " +
                                std::to_string(num_objects) + " objects");
        if (constraint_text.empty())
            throw ScenarioError("scenario '" + name + "' has no constraint");

        spec = DesignSpec{};
        spec.scene_domain = domain;
        for (int i = 1; i <= num_objects; ++i) {
            ObjectDecl decl;
            decl.id = i;
            decl.type_name = "obj" + std::to_string(i);
            spec.objects.push_back(std::move(decl));
        }
        ParseOptions opts;
        opts.scene_domain = domain;
        DesignSpec parsed;
        try {
            parsed = parse(constraint_text, opts);
        } catch (const ParseError& e) {
            throw ScenarioError("scenario '" + name + "' constraint: " + e.what());
        }
        spec.constraint = parsed.constraint;
        auto resolve = [&](auto&& self, Formula& f) -> void {
            if (f.op == Formula::Op::Leaf) {
                for (Arg& a : f.atom.args) {
                    if (a.type != Arg::Type::Object) continue;
                    if (a.num < 1 || a.num > num_objects)
                        throw ScenarioError("scenario '" + name + "' constraint references object " +
                                            std::to_string(a.num) + " outside 1.." +
                                            std::to_string(num_objects));
                    a.obj_index = static_cast<int>(a.num) - 1;
                }
                return;
            }
            for (Formula& k : f.kids) self(self, k);
        };
        resolve(resolve, spec.constraint);

        auto check_ref = [&](const BoundExpr& b, int obj, int kind, const char* what) {
            if (!b.ref) return;
            if (b.ref->obj < 0 || b.ref->obj >= num_objects)
                throw ScenarioError("scenario '" + name + "': " + what +
                                    " references an unknown object");
            bool earlier = b.ref->obj < obj ||
                           (kind >= 0 && b.ref->obj == obj &&
                            static_cast<int>(b.ref->kind) < kind);
            if (kind >= 0 && !earlier)
                throw ScenarioError("scenario '" + name + "': " + what +
                                    " must reference an earlier variable");
        };
        for (int o = 0; o < num_objects; ++o)
            for (Kind k : all_kinds) {
                const VarGen& g = gens[static_cast<size_t>(o)][static_cast<size_t>(k)];
                check_ref(g.lo, o, static_cast<int>(k), "generator bound");
                check_ref(g.hi, o, static_cast<int>(k), "generator bound");
            }
        for (const PrefClause& p : preferences) {
            if (p.var.obj < 0 || p.var.obj >= num_objects)
                throw ScenarioError("scenario '" + name + "' preference references an unknown object");
            check_ref(p.lo, p.var.obj, -1, "preference bound");
            check_ref(p.hi, p.var.obj, -1, "preference bound");
        }

        DomainBox d = spec.initial_domains();
        if (satisfiable(spec, to_nnf(spec.constraint), d) != SatStatus::Sat)
            throw ScenarioError("scenario '" + name + "' constraint is unsatisfiable");
    }

    // Draws one layout from the generator table alone; the constraint is
    // deliberately not consulted.  Bounds resolve in x, y, w, h order,
    // objects first to last.
    Layout generate(Rng& rng) const {
        Layout layout(static_cast<size_t>(num_objects));
        for (int o = 0; o < num_objects; ++o)
            for (Kind k : all_kinds) {
                unit_t v = gens[static_cast<size_t>(o)][static_cast<size_t>(k)].draw(layout, rng);
                layout[static_cast<size_t>(o)].set(k, v);
            }
        return layout;
    }
};

inline Dataset make_dataset(const Scenario& scn, int count, uint64_t seed) {
    Dataset data;
    data.spec = scn.spec;
    data.layouts.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, 0xDA7A, static_cast<uint64_t>(i)));
        data.layouts.push_back(scn.generate(rng));
    }
    return data;
}

struct EvalResult {
    double constraint_accuracy = 0.0;
    double preference_accuracy = 0.0;
    int episodes = 0;
};

// Samples n layouts and scores them clause by clause: constraint accuracy
// over the top-level conjuncts of the scenario constraint, preference
// accuracy over the preference clauses.  Each episode gets its own derived
// random stream.
inline EvalResult evaluate(Policy& policy, const Scenario& scn, int n, uint64_t seed,
                           long long budget = -1) {
    if (n < 1) throw std::invalid_argument("evaluation needs at least one episode");
    auto clauses = top_clauses(scn.spec.constraint);
    long long clause_sat = 0, pref_sat = 0;
    for (int ep = 0; ep < n; ++ep) {
        Rng rng(derive_seed(seed, 0xE7A1, static_cast<uint64_t>(ep)));
        Layout layout = sample_layout(scn.spec, policy, rng, budget);
        for (const Formula* c : clauses)
            if (eval_point(scn.spec, *c, layout)) ++clause_sat;
        for (const PrefClause& p : scn.preferences)
            if (p.holds(layout)) ++pref_sat;
    }
    EvalResult r;
    r.episodes = n;
    r.constraint_accuracy =
        static_cast<double>(clause_sat) / (static_cast<double>(n) * clauses.size());
    r.preference_accuracy =
        scn.preferences.empty()
            ? 1.0
            : static_cast<double>(pref_sat) / (static_cast<double>(n) * scn.preferences.size());
    return r;
}

namespace detail {

inline BoundExpr cst(double v) { return BoundExpr::constant(v); }
inline BoundExpr ref(int obj1, Kind k, double mul = 1.0, double add = 0.0) {
    return BoundExpr::of(VarRef{obj1 - 1, k}, mul, add);
}

} // namespace detail

// The three reference settings used throughout evaluation.  Generator
// ranges, constraints and preferences follow the published tables; the
// third setting widens the x domain to [0, 1050].
inline std::vector<Scenario> builtin_scenarios() {
    using detail::cst;
    using detail::ref;
    using VG = VarGen;
    std::vector<Scenario> out;

    {
        Scenario s;
        s.name = "basic";
        s.num_objects = 2;
        s.constraint_text = "above(1, 2, 300)";
        s.gens = {
            std::array<VG, 4>{VG::rnd(cst(1), cst(500)), VG::uni(cst(400), cst(550)),
                              VG::rnd(cst(192), cst(256)), VG::rnd(cst(128), cst(256))},
            std::array<VG, 4>{VG::rnd(cst(500), cst(1000)), VG::uni(cst(400), cst(550)),
                              VG::rnd(cst(192), cst(256)), VG::rnd(cst(128), cst(256))},
        };
        s.preferences = {
            {VarRef{0, Kind::X}, cst(1), cst(500)},
            {VarRef{1, Kind::X}, cst(500), cst(1000)},
        };
        s.finalize();
        out.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "tight";
        s.num_objects = 3;
        s.constraint_text = "left(1, 2, 180) & left(2, 3, 180)";
        s.gens = {
            std::array<VG, 4>{VG::rnd(cst(1), cst(1000)), VG::rnd(cst(300), cst(700)),
                              VG::rnd(cst(220), cst(256)), VG::rnd(cst(120), cst(150))},
            std::array<VG, 4>{VG::rnd(cst(1), cst(1000)), VG::rnd(cst(300), cst(700)),
                              VG::rnd(cst(120), cst(150)), VG::rnd(cst(120), cst(150))},
            std::array<VG, 4>{VG::rnd(cst(1), cst(1000)), VG::rnd(cst(300), cst(700)),
                              VG::rnd(cst(120), cst(150)), VG::rnd(cst(220), cst(256))},
        };
        s.preferences = {
            {VarRef{0, Kind::W}, cst(220), cst(256)}, {VarRef{1, Kind::W}, cst(120), cst(150)},
            {VarRef{2, Kind::W}, cst(120), cst(150)}, {VarRef{0, Kind::H}, cst(120), cst(150)},
            {VarRef{1, Kind::H}, cst(120), cst(150)}, {VarRef{2, Kind::H}, cst(220), cst(256)},
        };
        s.finalize();
        out.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "complex";
        s.num_objects = 4;
        s.domain.of(Kind::X) = Interval{0, 1050};
        s.constraint_text = "left(1, 2, 400) & above(2, 4, 200) & right(4, 1, 250) & "
                            "right_value(1, 500) & wider_value(4, 250) & above_value(3, 250)";
        s.gens = {
            std::array<VG, 4>{VG::rnd(cst(1), cst(1050)), VG::rnd(cst(375), cst(565)),
                              VG::rnd(cst(64), cst(128)),
                              VG::rnd(ref(1, Kind::W, 1.5), cst(200))},
            std::array<VG, 4>{VG::rnd(cst(1), cst(1050)),
                              VG::rnd(ref(1, Kind::Y, 1.0, -10), ref(1, Kind::Y, 1.0, 10)),
                              VG::rnd(cst(64), cst(128)),
                              VG::rnd(ref(2, Kind::W, 1.5), cst(200))},
            std::array<VG, 4>{VG::rnd(cst(1), cst(900)), VG::rnd(cst(1), cst(144)),
                              VG::rnd(cst(64), cst(128)),
                              VG::rnd(ref(3, Kind::W, 2.0), ref(3, Kind::W, 2.0))},
            std::array<VG, 4>{VG::rnd(cst(1), cst(1050)), VG::rnd(cst(400), cst(665)),
                              VG::rnd(cst(64), cst(128)),
                              VG::rnd(ref(4, Kind::W, 1.0, -10), ref(4, Kind::W, 1.0, 10))},
        };
        s.preferences = {
            {VarRef{0, Kind::X}, cst(1), cst(1050)},
            {VarRef{1, Kind::X}, cst(1), cst(1050)},
            {VarRef{2, Kind::X}, cst(1), cst(900)},
            {VarRef{3, Kind::X}, cst(1), cst(1050)},
            {VarRef{0, Kind::Y}, cst(375), cst(565)},
            {VarRef{1, Kind::Y}, ref(1, Kind::Y, 1.0, -10), ref(1, Kind::Y, 1.0, 10)},
            {VarRef{2, Kind::Y}, cst(1), cst(144)},
            {VarRef{3, Kind::Y}, cst(400), cst(665)},
            {VarRef{0, Kind::W}, cst(64), cst(128)},
            {VarRef{1, Kind::W}, cst(64), cst(128)},
            {VarRef{2, Kind::W}, cst(64), cst(128)},
            {VarRef{3, Kind::W}, cst(64), cst(128)},
            {VarRef{0, Kind::H}, ref(1, Kind::W, 1.5), cst(200)},
            {VarRef{1, Kind::H}, ref(2, Kind::W, 1.5), cst(200)},
            {VarRef{2, Kind::H}, ref(3, Kind::W, 2.0), ref(3, Kind::W, 2.0)},
            {VarRef{3, Kind::H}, ref(4, Kind::W, 1.0, -10), ref(4, Kind::W, 1.0, 10)},
        };
        s.finalize();
        out.push_back(std::move(s));
    }

    return out;
}

inline const Scenario& find_scenario(const std::vector<Scenario>& all, const std::string& name) {
    for (const Scenario& s : all)
        if (s.name == name) return s;
    throw ScenarioError("unknown scenario '" + name + "'");
}

// ---- text form ------------------------------------------------------------
//
//   name tight
//   objects 3
//   domain x 0 1000
//   gen 1 x rnd(1, 1000)
//   gen 2 y rnd(y[1] - 10, y[1] + 10)
//   constraint left(1, 2, 180) & left(2, 3, 180)
//   prefer 220 <= w[1] <= 256
//
// Bounds are either numbers or kind[object] with an optional "* m" scale and
// "+ a" / "- a" shift.

namespace detail {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline std::string bound_to_string(const BoundExpr& b) {
    if (!b.ref) return fmt_num(b.add);
    std::string s = std::string(to_string(b.ref->kind)) + "[" + std::to_string(b.ref->obj + 1) + "]";
    if (b.mul != 1.0) s += " * " + fmt_num(b.mul);
    if (b.add > 0.0) s += " + " + fmt_num(b.add);
    if (b.add < 0.0) s += " - " + fmt_num(-b.add);
    return s;
}

// scans bound / generator expressions inside one scenario line
struct LineScan {
    const std::string& s;
    size_t i = 0;
    int line;

    LineScan(const std::string& text, int line_no) : s(text), line(line_no) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ScenarioError("line " + std::to_string(line) + ": " + msg);
    }
    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool at_end() {
        skip_ws();
        return i >= s.size();
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    double number() {
        skip_ws();
        size_t start = i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        while (i < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'))
            ++i;
        if (i == start) fail("expected a number");
        try {
            return std::stod(s.substr(start, i - start));
        } catch (const std::exception&) {
            fail("bad number '" + s.substr(start, i - start) + "'");
        }
    }
    std::string word() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
            ++i;
        if (i == start) fail("expected a word");
        return s.substr(start, i - start);
    }

    BoundExpr bound(int num_objects) {
        skip_ws();
        if (i < s.size() &&
            (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == '+'))
            return BoundExpr::constant(number());
        std::string kind_word = word();
        Kind k;
        if (auto parsed = parse_kind(kind_word))
            k = *parsed;
        else
            fail("unknown variable kind '" + kind_word + "'");
        expect('[');
        double obj = number();
        expect(']');
        if (obj < 1 || obj > num_objects || obj != std::floor(obj))
            fail("object reference " + fmt_num(obj) + " out of range");
        BoundExpr b = BoundExpr::of(VarRef{static_cast<int>(obj) - 1, k});
        if (eat('*')) b.mul = number();
        skip_ws();
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            char op = s[i++];
            double v = number();
            b.add = op == '+' ? v : -v;
        }
        return b;
    }
};

} // namespace detail

inline std::string print_scenario(const Scenario& scn) {
    std::ostringstream os;
    os << "name " << scn.name << "\n";
    os << "objects " << scn.num_objects << "\n";
    for (Kind k : all_kinds) {
        Interval iv = scn.domain.of(k);
        os << "domain " << to_string(k) << " " << iv.lo << " " << iv.hi << "\n";
    }
    for (int o = 0; o < scn.num_objects; ++o)
        for (Kind k : all_kinds) {
            const VarGen& g = scn.gens[static_cast<size_t>(o)][static_cast<size_t>(k)];
            os << "gen " << (o + 1) << " " << to_string(k) << " "
               << (g.dist == VarGen::Dist::Rnd ? "rnd" : "uni") << "("
               << detail::bound_to_string(g.lo) << ", " << detail::bound_to_string(g.hi) << ")\n";
        }
    os << "constraint " << scn.constraint_text << "\n";
    for (const PrefClause& p : scn.preferences)
        os << "prefer " << detail::bound_to_string(p.lo) << " <= " << to_string(p.var.kind) << "["
           << (p.var.obj + 1) << "] <= " << detail::bound_to_string(p.hi) << "\n";
    return os.str();
}

inline Scenario parse_scenario(const std::string& text) {
    Scenario scn;
    bool have_objects = false;
    std::vector<std::string> gen_lines, prefer_lines;
    std::vector<int> gen_line_nos, prefer_line_nos;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string rest;
        std::getline(ls, rest);
        if (size_t r = rest.find_first_not_of(" \t"); r != std::string::npos)
            rest = rest.substr(r);
        else
            rest.clear();

        if (key == "name") {
            scn.name = rest;
        } else if (key == "objects") {
            detail::LineScan sc(rest, line_no);
            double n = sc.number();
            if (n < 1 || n != std::floor(n)) sc.fail("object count must be a positive integer");
            scn.num_objects = static_cast<int>(n);
            scn.gens.assign(static_cast<size_t>(scn.num_objects), {});
            have_objects = true;
        } else if (key == "domain") {
            detail::LineScan sc(rest, line_no);
            std::string kw = sc.word();
            auto k = parse_kind(kw);
            if (!k) sc.fail("unknown variable kind '" + kw + "'");
            double lo = sc.number();
            double hi = sc.number();
            if (lo > hi) sc.fail("empty domain");
            scn.domain.of(*k) = Interval{static_cast<unit_t>(lo), static_cast<unit_t>(hi)};
        } else if (key == "gen") {
            gen_lines.push_back(rest);
            gen_line_nos.push_back(line_no);
        } else if (key == "constraint") {
            scn.constraint_text = rest;
        } else if (key == "prefer") {
            prefer_lines.push_back(rest);
            prefer_line_nos.push_back(line_no);
        } else {
            throw ScenarioError("line " + std::to_string(line_no) + ": unknown directive '" + key +
                                "'");
        }
    }
    if (!have_objects) throw ScenarioError("scenario file has no 'objects' line");

    std::vector<std::array<bool, 4>> seen(static_cast<size_t>(scn.num_objects),
                                          {false, false, false, false});
    for (size_t g = 0; g < gen_lines.size(); ++g) {
        detail::LineScan sc(gen_lines[g], gen_line_nos[g]);
        double obj = sc.number();
        if (obj < 1 || obj > scn.num_objects || obj != std::floor(obj))
            sc.fail("object index out of range");
        std::string kw = sc.word();
        auto k = parse_kind(kw);
        if (!k) sc.fail("unknown variable kind '" + kw + "'");
        std::string dist = sc.word();
        VarGen vg;
        if (dist == "rnd")
            vg.dist = VarGen::Dist::Rnd;
        else if (dist == "uni")
            vg.dist = VarGen::Dist::Uni;
        else
            sc.fail("unknown distribution '" + dist + "'");
        sc.expect('(');
        vg.lo = sc.bound(scn.num_objects);
        sc.expect(',');
        vg.hi = sc.bound(scn.num_objects);
        sc.expect(')');
        if (!sc.at_end()) sc.fail("trailing text after generator");
        scn.gens[static_cast<size_t>(obj) - 1][static_cast<size_t>(*k)] = vg;
        seen[static_cast<size_t>(obj) - 1][static_cast<size_t>(*k)] = true;
    }
    for (int o = 0; o < scn.num_objects; ++o)
        for (Kind k : all_kinds)
            if (!seen[static_cast<size_t>(o)][static_cast<size_t>(k)])
                throw ScenarioError("no generator for object " + std::to_string(o + 1) + " " +
                                    to_string(k));

    for (size_t p = 0; p < prefer_lines.size(); ++p) {
        detail::LineScan sc(prefer_lines[p], prefer_line_nos[p]);
        PrefClause pc;
        pc.lo = sc.bound(scn.num_objects);
        sc.expect('<');
        sc.expect('=');
        std::string kw = sc.word();
        auto k = parse_kind(kw);
        if (!k) sc.fail("unknown variable kind '" + kw + "'");
        sc.expect('[');
        double obj = sc.number();
        sc.expect(']');
        if (obj < 1 || obj > scn.num_objects || obj != std::floor(obj))
            sc.fail("object index out of range");
        pc.var = VarRef{static_cast<int>(obj) - 1, *k};
        sc.expect('<');
        sc.expect('=');
        pc.hi = sc.bound(scn.num_objects);
        if (!sc.at_end()) sc.fail("trailing text after preference");
        scn.preferences.push_back(pc);
    }

    scn.finalize();
    return scn;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace slate
