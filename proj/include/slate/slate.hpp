#pragma once

// Umbrella header: pulls in the whole library.

#include "slate/ast.hpp"
#include "slate/eval.hpp"
#include "slate/geom.hpp"
#include "slate/layout_io.hpp"
#include "slate/parser.hpp"
#include "slate/policy.hpp"
#include "slate/policy_base.hpp"
#include "slate/refine.hpp"
#include "slate/relations.hpp"
#include "slate/rng.hpp"
#include "slate/scenarios.hpp"
#include "slate/search.hpp"
#include "slate/trainer.hpp"
#include "slate/tri.hpp"
