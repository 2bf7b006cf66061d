#pragma once

// Privacy-preserving average consensus over polynomial secret shares:
// sharing primitives, graph/spectral utilities, the per-node protocol,
// finite-step key distribution, and a deterministic round simulator with
// adversary checks.

#include "ppcon/config.hpp"
#include "ppcon/errors.hpp"
#include "ppcon/graph.hpp"
#include "ppcon/keydist.hpp"
#include "ppcon/linalg.hpp"
#include "ppcon/protocol.hpp"
#include "ppcon/rng.hpp"
#include "ppcon/shamir.hpp"
#include "ppcon/simnet.hpp"
#include "ppcon/trace_io.hpp"
