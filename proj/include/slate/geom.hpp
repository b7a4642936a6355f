#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slate {

// Coordinates are integers in per-mille of the scene edge.  The y axis grows
// downward: smaller y means higher up.
using unit_t = long long;

enum class Kind : uint8_t { X = 0, Y = 1, W = 2, H = 3 };

constexpr std::array<Kind, 4> all_kinds{Kind::X, Kind::Y, Kind::W, Kind::H};

constexpr const char* to_string(Kind k) {
    switch (k) {
    case Kind::X: return "x";
    case Kind::Y: return "y";
    case Kind::W: return "w";
    case Kind::H: return "h";
    }
    return "?";
}

inline std::optional<Kind> parse_kind(const std::string& s) {
    if (s == "x") return Kind::X;
    if (s == "y") return Kind::Y;
    if (s == "w") return Kind::W;
    if (s == "h") return Kind::H;
    return std::nullopt;
}

inline Kind kind_from_string(const std::string& s) {
    if (auto k = parse_kind(s)) return *k;
    throw std::invalid_argument("unknown variable kind: " + s);
}

// One scalar variable of one object (object index is the dense position in
// the spec's object list, not the surface id).
struct VarRef {
    int obj = -1;
    Kind kind = Kind::X;

    friend bool operator==(const VarRef& a, const VarRef& b) {
        return a.obj == b.obj && a.kind == b.kind;
    }
    friend bool operator!=(const VarRef& a, const VarRef& b) { return !(a == b); }
    friend bool operator<(const VarRef& a, const VarRef& b) {
        if (a.obj != b.obj) return a.obj < b.obj;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    }
    int flat() const { return obj * 4 + static_cast<int>(kind); }
};

inline std::ostream& operator<<(std::ostream& os, const VarRef& v) {
    return os << to_string(v.kind) << "[" << v.obj << "]";
}

// Closed integer interval [lo, hi].  All intervals handled by the refinement
// machinery are non-empty.
struct Interval {
    unit_t lo = 0;
    unit_t hi = 0;

    Interval() = default;
    Interval(unit_t l, unit_t h) : lo(l), hi(h) {}

    bool contains(unit_t v) const { return lo <= v && v <= hi; }
    bool is_point() const { return lo == hi; }
    unit_t size() const { return hi - lo + 1; }
    unit_t mid() const {
        // floor((lo+hi)/2) without overflow; lo <= hi always holds here
        return lo + (hi - lo) / 2;
    }

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
    friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }
};

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
    return os << "[" << iv.lo << "," << iv.hi << "]";
}

struct BoundingBox {
    unit_t x = 0, y = 0, w = 0, h = 0;

    unit_t get(Kind k) const {
        switch (k) {
        case Kind::X: return x;
        case Kind::Y: return y;
        case Kind::W: return w;
        case Kind::H: return h;
        }
        return 0;
    }
    void set(Kind k, unit_t v) {
        switch (k) {
        case Kind::X: x = v; break;
        case Kind::Y: y = v; break;
        case Kind::W: w = v; break;
        case Kind::H: h = v; break;
        }
    }

    friend bool operator==(const BoundingBox& a, const BoundingBox& b) {
        return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
    }
    friend bool operator!=(const BoundingBox& a, const BoundingBox& b) { return !(a == b); }
};

inline std::ostream& operator<<(std::ostream& os, const BoundingBox& b) {
    return os << "(" << b.x << "," << b.y << "," << b.w << "," << b.h << ")";
}

// Complete assignment: one box per object, in spec object order.
using Layout = std::vector<BoundingBox>;

// Interval domain for every variable of every object, indexed obj*4+kind.
struct DomainBox {
    std::vector<Interval> iv;

    DomainBox() = default;
    explicit DomainBox(size_t num_objects) : iv(num_objects * 4) {}

    size_t num_objects() const { return iv.size() / 4; }

    Interval& at(const VarRef& v) { return iv[v.flat()]; }
    const Interval& at(const VarRef& v) const { return iv[v.flat()]; }
    Interval& at(int obj, Kind k) { return iv[obj * 4 + static_cast<int>(k)]; }
    const Interval& at(int obj, Kind k) const { return iv[obj * 4 + static_cast<int>(k)]; }

    bool all_points() const {
        for (const auto& i : iv)
            if (!i.is_point()) return false;
        return true;
    }

    // Number of complete assignments, saturating at `cap`.
    unit_t completions(unit_t cap) const {
        unit_t n = 1;
        for (const auto& i : iv) {
            n *= i.size();
            if (n > cap) return cap + 1;
        }
        return n;
    }

    // Valid only when all intervals are points.
    Layout as_layout() const {
        Layout out(num_objects());
        for (size_t o = 0; o < out.size(); ++o)
            for (Kind k : all_kinds) out[o].set(k, at(static_cast<int>(o), k).lo);
        return out;
    }

    friend bool operator==(const DomainBox& a, const DomainBox& b) { return a.iv == b.iv; }
};

} // namespace slate
