#pragma once

// Umbrella header for the finite-domain refinement checker.

#include "refine/ast.hpp"
#include "refine/assertions.hpp"
#include "refine/diag.hpp"
#include "refine/entail.hpp"
#include "refine/execpred.hpp"
#include "refine/parser.hpp"
#include "refine/pretty.hpp"
#include "refine/prover.hpp"
#include "refine/properties.hpp"
#include "refine/report.hpp"
#include "refine/semantics.hpp"
#include "refine/state.hpp"
#include "refine/testkit.hpp"
#include "refine/triples.hpp"
#include "refine/typecheck.hpp"
