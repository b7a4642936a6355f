#pragma once

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ast.hpp"
#include "geom.hpp"
#include "rng.hpp"

namespace slate {

// Dyadic refinement: a variable's value is pinned down by a string of
// decisions over a shrinking closed interval.  With mid = floor((lo+hi)/2),
// Left keeps [lo, mid-1], Right keeps [mid+1, hi], and Stop selects mid.
// Start is the conventional first input to the policy, never part of the
// decision string itself.

enum class Token : uint8_t { Start = 0, Left = 1, Right = 2, Stop = 3 };

constexpr const char* to_string(Token t) {
    switch (t) {
    case Token::Start: return "start";
    case Token::Left: return "left";
    case Token::Right: return "right";
    case Token::Stop: return "stop";
    }
    return "?";
}

inline std::ostream& operator<<(std::ostream& os, Token t) { return os << to_string(t); }

// Distributions range over the three decision tokens in this fixed order.
constexpr int decision_index(Token t) {
    switch (t) {
    case Token::Left: return 0;
    case Token::Right: return 1;
    case Token::Stop: return 2;
    default: throw std::invalid_argument("start is not a decision token");
    }
}

constexpr Token decision_token(int index) {
    switch (index) {
    case 0: return Token::Left;
    case 1: return Token::Right;
    case 2: return Token::Stop;
    default: throw std::invalid_argument("decision index out of range");
    }
}

using DecisionString = std::vector<Token>;

class RefineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VarState {
    Interval iv;
    DecisionString history;

    explicit VarState(Interval initial = Interval{0, 1000}) : iv(initial) {}

    friend bool operator==(const VarState& a, const VarState& b) {
        return a.iv == b.iv && a.history == b.history;
    }
};

// Left needs at least two values below-or-at mid; Right needs at least one
// value above mid; Stop is always available.
inline bool token_legal(const Interval& iv, Token t) {
    switch (t) {
    case Token::Left: return iv.mid() > iv.lo;
    case Token::Right: return iv.mid() < iv.hi;
    case Token::Stop: return true;
    default: return false;
    }
}

inline std::array<bool, 3> legal_decisions(const Interval& iv) {
    return {token_legal(iv, Token::Left), token_legal(iv, Token::Right), true};
}

// Stop yields the chosen value; Left/Right yield the refined state.
using ApplyResult = std::variant<VarState, unit_t>;

inline ApplyResult apply_token(const VarState& s, Token t) {
    unit_t mid = s.iv.mid();
    if (!token_legal(s.iv, t))
        throw RefineError(std::string("illegal token '") + to_string(t) + "' on interval [" +
                          std::to_string(s.iv.lo) + "," + std::to_string(s.iv.hi) + "]");
    if (t == Token::Stop) return mid;
    VarState next = s;
    next.history.push_back(t);
    if (t == Token::Left)
        next.iv = Interval{s.iv.lo, mid - 1};
    else
        next.iv = Interval{mid + 1, s.iv.hi};
    return next;
}

// Greedy canonical encoding; total length is at most ceil(log2(size)) + 1.
inline DecisionString encode(unit_t value, Interval initial) {
    if (!initial.contains(value))
        throw RefineError("value " + std::to_string(value) + " outside initial interval [" +
                          std::to_string(initial.lo) + "," + std::to_string(initial.hi) + "]");
    DecisionString out;
    Interval iv = initial;
    while (true) {
        unit_t mid = iv.mid();
        if (value == mid) {
            out.push_back(Token::Stop);
            return out;
        }
        if (value < mid) {
            out.push_back(Token::Left);
            iv = Interval{iv.lo, mid - 1};
        } else {
            out.push_back(Token::Right);
            iv = Interval{mid + 1, iv.hi};
        }
    }
}

inline unit_t decode(const DecisionString& ds, Interval initial) {
    VarState s(initial);
    for (size_t i = 0; i < ds.size(); ++i) {
        ApplyResult r = apply_token(s, ds[i]);
        if (std::holds_alternative<unit_t>(r)) {
            if (i + 1 != ds.size())
                throw RefineError("decision string continues past stop");
            return std::get<unit_t>(r);
        }
        s = std::get<VarState>(std::move(r));
    }
    throw RefineError("decision string does not terminate with stop");
}

enum class OrderMode { Inference, Training };

// Canonical processing order: given objects first (spec order), then new
// objects, with x, y, w, h per object.  Training shuffles the new-object
// block so the policy cannot memorize positions.
inline std::vector<VarRef> variable_order(const DesignSpec& spec, OrderMode mode,
                                          Rng* rng = nullptr) {
    std::vector<int> given, fresh;
    for (size_t i = 0; i < spec.objects.size(); ++i)
        (spec.objects[i].is_given() ? given : fresh).push_back(static_cast<int>(i));
    if (mode == OrderMode::Training && rng) {
        for (size_t i = fresh.size(); i > 1; --i)
            std::swap(fresh[i - 1], fresh[rng->uniform_int(0, static_cast<long long>(i) - 1)]);
    }
    std::vector<VarRef> order;
    order.reserve(spec.objects.size() * 4);
    for (int o : given)
        for (Kind k : all_kinds) order.push_back(VarRef{o, k});
    for (int o : fresh)
        for (Kind k : all_kinds) order.push_back(VarRef{o, k});
    return order;
}

} // namespace slate
