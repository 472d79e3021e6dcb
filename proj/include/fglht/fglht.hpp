#pragma once

// Global testing of linear hypotheses on the mean curves of multivariate
// functional samples: data model, estimators, the adjusted chi-square
// approximate test, a residual bootstrap, simulation designs and a Monte
// Carlo harness.

#include "fglht/bootstrap.hpp"
#include "fglht/chisq.hpp"
#include "fglht/csv.hpp"
#include "fglht/designs.hpp"
#include "fglht/error.hpp"
#include "fglht/gram.hpp"
#include "fglht/grid.hpp"
#include "fglht/harness.hpp"
#include "fglht/hypothesis.hpp"
#include "fglht/moments.hpp"
#include "fglht/power.hpp"
#include "fglht/reconstruct.hpp"
#include "fglht/rng.hpp"
#include "fglht/sample.hpp"
#include "fglht/smoothing_spline.hpp"
#include "fglht/test.hpp"
