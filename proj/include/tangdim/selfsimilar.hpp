#pragma once

#include <gmpxx.h>

#include <vector>

#include "tangdim/estimate.hpp"
#include "tangdim/schedule.hpp"

namespace tangdim {

// Solves sum of ratios[j]^d = 1 by bisection on [0, log p / log(1/max ratio)].
// Each ratio must lie in (0, 1). `residual`, when given, receives the final
// sum - 1.
double moran_dimension(const std::vector<mpq_class>& ratios, double tol,
                       double* residual = nullptr);

struct CollapseReport {
    double formula_dim = 0;    // log p / log m of the repeating step
    DimensionEstimate dims;    // measured at the requested depth
    double max_deviation = 0;  // worst |estimate - formula_dim|
    double band_width = 0;     // spread of f(t) - formula_dim*t over the first
                               // band_levels samples, hull of both f ends
    long band_levels = 0;
};

// For a schedule repeating one step, all four dimension estimates should
// land on log p / log m and f(t) should track that slope from the start.
// Throws ConfigError when the schedule is not constant through `depth`.
CollapseReport selfsimilar_collapse_check(const Schedule& s, long depth,
                                          long guard);

}
