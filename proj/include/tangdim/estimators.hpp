#pragma once

#include <vector>

#include "tangdim/estimate.hpp"
#include "tangdim/measure.hpp"

namespace tangdim {

// One certified slope reading g(t,h)/h = (f(t+h) - f(t))/h between two
// sampled levels; lo/hi account for the f interval slack at both ends.
struct SlopePoint {
    long level = 0;  // base level (the t end)
    long gap = 0;    // level difference to the t+h end
    double t = 0, h = 0;
    double lo = 0, hi = 0;
};

struct SlopeSurface {
    std::vector<SlopePoint> points;  // sorted by (gap, level)
    std::vector<long> gaps;          // distinct level gaps, ascending
    double h_lo = 0, h_hi = 0;       // h band actually used
};

// Collects slope readings whose base level lies in the trailing
// tail_fraction of samples and whose h falls in [h_min, 1.5*h_min]; the band
// is widened one sample spacing at a time until at least 5 distinct level
// gaps appear. h_min <= 0 picks the default t_max/sqrt(#samples).
SlopeSurface slope_surface(const ScaleFunction& f, double h_min,
                           double tail_fraction);

struct LocalPair {
    Estimate lower, upper;
};

// min/max of f(t)/t midpoints over the trailing window; the uncertainty
// covers the interval slack.
LocalPair local_dims(const ScaleFunction& f, double tail_fraction);

struct TangentialPair {
    Estimate lower, upper;
};

// lower = max over gaps of (min over tail t of g_lo/h); upper = min over
// gaps of (max over tail t of g_hi/h). The outer max/min realizes the
// sup/inf over h, so finite sampling errs toward the inside of the bracket.
TangentialPair tangential_dims(const ScaleFunction& f, const SlopeSurface& surf);

struct EstimateResult {
    ScaleFunction f;
    SlopeSurface slopes;
    DimensionEstimate dims;
};

EstimateResult estimate_dimensions(const MeasureExpr& e, const MeasurePoint& x,
                                   long depth, long guard, double h_min,
                                   double tail_fraction);

struct DoublingSample {
    long level = 0;
    double log2_ratio = 0;  // log2 of the certified mu(B(x,2r))/mu(B(x,r)) bound
    bool flagged = false;
};

struct DoublingReport {
    std::vector<DoublingSample> rows;
    double max_log2_ratio = 0;  // over the trailing half of the rows
    bool any_flagged = false;
};

// Doubled-radius mass ratios read off the stored brackets: for each sample
// the deepest coarser sample with at least twice its radius supplies the
// numerator. Requires sample spacing <= 3*log 2 so such a sample exists.
// Rows with vanished lower bounds or log2 ratio above `flag_threshold` are
// flagged.
DoublingReport doubling_diagnostic(const ScaleFunction& f, double flag_threshold);

struct MetricDims {
    Estimate lower, upper;
};

// Covering-count analogue of the tangential dimensions: counts kept cells of
// level n+k meeting the closed ball of radius Lambda_n and applies the same
// sup/inf slope form to log counts. Base levels step by `stride`; counts are
// bracketed with the given descent budget.
MetricDims metric_tangential_dims(const Schedule& s, const PointAddress& x,
                                  long depth, long stride, long budget,
                                  double tail_fraction);

struct NeighborhoodReport {
    double c_max = 0;   // worst two-sided ratio mu(B(y,r))/mu(B(x,r))
    long samples = 0;   // neighbor points actually tested
    bool degenerate = false;  // some lower bound vanished
};

// Compares the ball mass at x against balls of the same radius centered at
// nearby fractal points (centers of kept cells two levels below, inside the
// ball), over the given radius levels. Sample order is deterministic, so a
// larger `count` extends the smaller run's sample set.
NeighborhoodReport newassum_check(const Schedule& s, const PointAddress& x,
                                  const std::vector<long>& levels, long guard,
                                  long count);

struct ExtremaReport {
    MeasureInterval smallest, largest;
    long samples = 0;
};

// min/max mass of balls of radius Lambda_{level+sub_gap} centered at sampled
// fractal points inside B(x, Lambda_level).
ExtremaReport ball_measure_extrema(const Schedule& s, const PointAddress& x,
                                   long level, long sub_gap, long guard,
                                   long count);

enum class Extremal { Min, Max };

struct ExtremalSequence {
    long gap = 0;              // column realizing the tangential extreme
    std::vector<long> levels;  // witness base levels, ascending
};

// Witnesses of a tangential extreme. Min picks the gap column whose slope
// floor is highest (the column realizing sup over h of the running minimum)
// and within it the `per_gap` base levels with the smallest lo slope; Max
// mirrors this with the lowest slope ceiling and the largest hi slopes.
// Feeding levels to blowup_dims with gaps = {gap} reproduces the matching
// tangential reading.
ExtremalSequence extremal_level_sequence(const SlopeSurface& surf,
                                         Extremal target, long per_gap);

}
