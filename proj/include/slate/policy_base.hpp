#pragma once

#include <array>
#include <memory>
#include <string>

#include "ast.hpp"
#include "geom.hpp"
#include "refine.hpp"

namespace slate {

// Opaque copy of a policy's internal state, used by the sampler to rewind.
using PolicySnapshot = std::shared_ptr<const void>;

// A policy produces a probability distribution over the decision tokens
// {Left, Right, Stop} (indexed by decision_index) one step at a time.  The
// sampler drives it episode-by-episode: reset once per layout, then for each
// variable a begin_variable call followed by one step per emitted token; the
// first step of a variable receives Start as its previous token.
class Policy {
public:
    virtual ~Policy() = default;

    virtual void reset(const DesignSpec& spec) = 0;
    virtual void begin_variable(const VarRef& var, const std::string& type_name) = 0;
    virtual std::array<double, 3> step(Token prev) = 0;

    virtual PolicySnapshot save() const = 0;
    virtual void load(const PolicySnapshot& snap) = 0;
};

} // namespace slate
