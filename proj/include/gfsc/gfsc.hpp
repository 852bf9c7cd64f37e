#pragma once

// Umbrella header for the graph-filtered subspace clustering toolkit.

#include "gfsc/config.hpp"
#include "gfsc/data.hpp"
#include "gfsc/errors.hpp"
#include "gfsc/graph.hpp"
#include "gfsc/matrix.hpp"
#include "gfsc/metrics.hpp"
#include "gfsc/numerics.hpp"
#include "gfsc/pipeline.hpp"
#include "gfsc/selfexpress.hpp"
#include "gfsc/spectral.hpp"
