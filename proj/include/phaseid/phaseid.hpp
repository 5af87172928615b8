#pragma once

// Umbrella header: phase identification of low-voltage customers from
// smart-meter voltage/power time series, a synthetic feeder simulator for
// ground-truth benchmarking, and the Monte Carlo experiment harness.

#include "phaseid/bench.hpp"
#include "phaseid/ensemble.hpp"
#include "phaseid/identify.hpp"
#include "phaseid/io.hpp"
#include "phaseid/matrix.hpp"
#include "phaseid/metrology.hpp"
#include "phaseid/model.hpp"
#include "phaseid/phase.hpp"
#include "phaseid/rng.hpp"
#include "phaseid/simfeeder.hpp"
#include "phaseid/timeutil.hpp"
