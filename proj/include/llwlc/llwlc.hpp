#pragma once

// Umbrella header: constrained spectral graph encodings, end to end.

#include "llwlc/constraint.hpp"
#include "llwlc/dataset.hpp"
#include "llwlc/errors.hpp"
#include "llwlc/generators.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/lanczos.hpp"
#include "llwlc/net.hpp"
#include "llwlc/projector.hpp"
#include "llwlc/rng.hpp"
#include "llwlc/signature.hpp"
#include "llwlc/subgraph.hpp"
#include "llwlc/verify.hpp"
#include "llwlc/wl.hpp"
