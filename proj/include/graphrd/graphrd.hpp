#pragma once

// Umbrella header for the conditioned colored-graph rate-distortion library.

#include "graphrd/alphabet.hpp"
#include "graphrd/ball.hpp"
#include "graphrd/cli.hpp"
#include "graphrd/config.hpp"
#include "graphrd/constraint.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/experiments.hpp"
#include "graphrd/graph.hpp"
#include "graphrd/io.hpp"
#include "graphrd/kernel.hpp"
#include "graphrd/measure.hpp"
#include "graphrd/metabolic.hpp"
#include "graphrd/oracle.hpp"
#include "graphrd/rng.hpp"
#include "graphrd/sampler.hpp"
