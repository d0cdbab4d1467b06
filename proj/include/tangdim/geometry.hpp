#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "tangdim/schedule.hpp"

namespace tangdim {

// Closed axis-aligned cube with exact rational corner and side. A zero side
// is allowed and represents an exactly known point.
struct RationalBox {
    std::vector<mpq_class> corner;
    mpq_class side;

    int dimension() const { return static_cast<int>(corner.size()); }
    mpq_class center_coord(int axis) const { return corner[axis] + side / 2; }
};

// Cylinder name: the chosen kept cell at each level, outermost first.
using CellAddress = std::vector<Cell>;

// Infinite address: explicit prefix plus a total tail rule. The nested cubes
// it names intersect in a single fractal point.
struct PointAddress {
    enum class Tail { FirstKept, Periodic };

    CellAddress prefix;
    Tail tail = Tail::FirstKept;
    std::vector<Cell> cycle;  // used when tail == Periodic

    // Grammar: "prefix=c1|c2|...;tail=first-kept" or "tail=periodic:c1|c2",
    // each cell "v1,...,vN". Empty spec means pure first-kept.
    static PointAddress parse(const std::string& spec, int dimension);
    static PointAddress first_kept() { return PointAddress{}; }

    // Kept cell chosen at level n; throws ConfigError if the address picks a
    // cell the schedule does not keep there.
    Cell cell_at(const Schedule& s, long n) const;

    std::string describe() const;
};

enum class BallClass { Inside, Meets, Outside };

// Exact comparison of box-to-box squared distances against r^2. INSIDE means
// the cell lies in the open ball B(y, r) for every y in the center box;
// OUTSIDE means it misses the closed ball for every such y. Distance ties
// classify MEETS (balls are open).
BallClass classify_cell(const RationalBox& cell, const RationalBox& center,
                        const mpq_class& r);

RationalBox address_to_box(const Schedule& s, const CellAddress& addr);
RationalBox point_box(const Schedule& s, const PointAddress& x, long depth);

struct EnumResult {
    mpz_class inner;  // level-n kept cells certainly inside the open ball
    mpz_class outer;  // level-n kept cells possibly meeting the closed ball
                      // enlarged by one cell diagonal (r + Lambda_n*sqrt(N))
};

// Depth-first descent over kept cells with exact integer predicates; subtrees
// entirely inside (or entirely within the enlarged ball) are counted in bulk,
// subtrees certainly outside the enlarged ball are pruned. The point is
// resolved to depth level+guard. Throws ResolutionError when the point box is
// wider than the ball diameter (no certainty possible at that resolution).
EnumResult enumerate_cells(const Schedule& s, const PointAddress& x,
                           const mpq_class& r, long level, long guard);

// Same descent with an explicit center box (used for off-fractal centers such
// as cell midpoints).
EnumResult enumerate_cells_at(const Schedule& s, const RationalBox& center,
                              const mpq_class& r, long level);

// Kept level-`level` cells meeting the plain closed ball (no enlargement);
// the possibly-meets count. Requires Lambda_level <= r.
mpz_class covering_count(const Schedule& s, const PointAddress& x,
                         const mpq_class& r, long level, long guard);

struct CountInterval {
    mpz_class lo, hi;
};

// Certified bracket of the covering count: bulk-inside subtrees count toward
// both ends exactly; boundary cells descend `budget` levels below the ball's
// own level and then contribute to the upper end only.
CountInterval covering_interval(const Schedule& s, const RationalBox& center,
                                const mpq_class& r, long level, long budget);

// First `count` kept cells at `level` (in address order) whose cubes lie
// certainly inside the open ball B(center, r); prefixes of this list are
// stable as `count` grows.
std::vector<CellAddress> cells_inside_ball(const Schedule& s, const RationalBox& center,
                                           const mpq_class& r, long level, long count);

}
