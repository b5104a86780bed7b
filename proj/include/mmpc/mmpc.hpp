#pragma once

// Max-min power control beyond the UatF bound: MSP fixed-point solver,
// sample-based rate utilities, and a cell-less massive MIMO simulator.

#include "mmpc/cache.hpp"
#include "mmpc/errors.hpp"
#include "mmpc/experiment.hpp"
#include "mmpc/norms.hpp"
#include "mmpc/rates.hpp"
#include "mmpc/reduction.hpp"
#include "mmpc/rng.hpp"
#include "mmpc/sample_set.hpp"
#include "mmpc/scenario.hpp"
#include "mmpc/sim.hpp"
#include "mmpc/solver.hpp"
