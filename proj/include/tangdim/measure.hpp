#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <vector>

#include "tangdim/geometry.hpp"
#include "tangdim/schedule.hpp"

namespace tangdim {

// Certified bracket of a ball mass: lo <= mu(B) <= hi.
struct MeasureInterval {
    mpq_class lo, hi;
};

// A measure built from schedules by composition. Nodes are immutable and
// cheap to copy (shared subtrees).
class MeasureExpr {
  public:
    static MeasureExpr base(Schedule s);
    static MeasureExpr sum(MeasureExpr a, MeasureExpr b);
    static MeasureExpr product(MeasureExpr a, MeasureExpr b);
    static MeasureExpr lipschitz(MeasureExpr a, mpq_class distortion);

    // Grammar: generator name | sum(E,E) | product(E,E) | lipschitz(E,L)
    // with L a positive rational like 2 or 3/2. Whitespace is ignored.
    static MeasureExpr parse(const std::string& text);

    int dimension() const;
    std::string description() const;

    // True for a plain schedule with no composition on top.
    bool is_schedule() const;
    const Schedule& schedule() const;

    // Number of schedule leaves, which is the number of point legs needed.
    int leaf_count() const;

    // Reference radius for sampling at `level`: the smallest cell side any
    // leaf schedule has there.
    mpq_class natural_scale(long level) const;

    struct Node;
    const Node& node() const { return *node_; }

  private:
    explicit MeasureExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// One point address per schedule leaf, in expression order.
struct MeasurePoint {
    std::vector<PointAddress> legs;

    static MeasurePoint default_for(const MeasureExpr& e);
    // '&'-separated leaf specs; empty spec means first-kept everywhere; a
    // single spec is replicated across all leaves.
    static MeasurePoint parse(const MeasureExpr& e, const std::string& spec);

    std::string describe() const;
};

// Certified mu(B(x, r)) bracket evaluated with level-n cells. The point is
// resolved `guard` levels below n (deeper when r is small relative to a
// leaf's cells, so the resolution requirement is always met). Sum averages
// the legs, product multiplies per-leg brackets at the same radius (balls in
// the max metric split into factor balls), and a distortion-L image is
// sandwiched between the radii r/L and r*L.
MeasureInterval ball_measure(const MeasureExpr& e, const MeasurePoint& x,
                             const mpq_class& r, long level, long guard);

// One sample of the scale function f(t) = -log mu(B(x, e^-t)).
struct ScaleSample {
    long level = 0;
    double t = 0;
    double f_lo = 0;  // -log mu_hi
    double f_hi = 0;  // -log mu_lo, +inf when mu_lo vanishes
    MeasureInterval mu;
};

struct ScaleFunction {
    std::vector<ScaleSample> samples;
    long guard = 0;
    std::string source;
    std::string point;

    size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

// Samples f at the natural scales r = natural_scale(n) for each n in
// `levels` (strictly increasing), each bracket evaluated with cells guard
// levels below the sample level.
ScaleFunction f_samples(const MeasureExpr& e, const MeasurePoint& x,
                        const std::vector<long>& levels, long guard);
ScaleFunction f_samples(const MeasureExpr& e, const MeasurePoint& x, long depth,
                        long guard);

// Local dimensions of the blow-up of the measure along the scales of
// level_seq: for each level gap k in `gaps`, the slopes
// (f(t_{n+k*}) - f(t_n))/h are tail-averaged over level_seq, and the
// lower/upper results are the min/max of those averages over the larger half
// of the gap grid. `spread` reports max - min over that grid half; when it
// stays large the sequence does not pin a single blow-up behavior and
// `converged` is false.
struct BlowupReport {
    double lower = 0, upper = 0;
    double spread = 0;
    bool converged = false;
};

BlowupReport blowup_dims(const MeasureExpr& e, const MeasurePoint& x,
                         const std::vector<long>& level_seq,
                         const std::vector<long>& gaps, long guard);

}
