#pragma once

// Self-paced transfer classifier learning: a joint source/target classifier
// fit by alternating closed-form updates and progressively adapted to the
// target domain by self-paced exclusion of source examples.

#include "sptcl/common.hpp"
#include "sptcl/datamodel.hpp"
#include "sptcl/eval.hpp"
#include "sptcl/graph.hpp"
#include "sptcl/io.hpp"
#include "sptcl/kernel.hpp"
#include "sptcl/solver.hpp"
#include "sptcl/types.hpp"
