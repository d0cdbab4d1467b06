#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <vector>

#include "tangdim/estimate.hpp"

namespace tangdim {

using Cell = std::vector<int>;  // N coordinates, each in [0, m)

// One subdivision level: split every kept cube into m^N children of relative
// side 1/m and keep the listed children. Kept cells are stored sorted.
class GridStep {
public:
    GridStep(int dimension, int m, std::vector<Cell> kept);

    int dimension() const { return dim_; }
    int m() const { return m_; }
    long p() const { return static_cast<long>(kept_.size()); }
    const std::vector<Cell>& kept() const { return kept_; }
    bool contains(const Cell& c) const;
    double slope() const;  // log p / log m

    bool operator==(const GridStep& o) const {
        return dim_ == o.dim_ && m_ == o.m_ && kept_ == o.kept_;
    }

private:
    int dim_;
    int m_;
    std::vector<Cell> kept_;
};

// Total level rule: explicit prefix steps followed by either a periodic tail
// or a named block generator (indexed from the end of the prefix). Immutable
// after construction; the step cache is lock-guarded so concurrent readers
// see consistent values.
class Schedule {
public:
    static Schedule periodic(int dimension, std::vector<GridStep> steps, int tail_len);
    static Schedule named(const std::string& generator);
    static Schedule parse_text(const std::string& text, const std::string& origin = "<text>");
    static Schedule parse_file(const std::string& path);

    int dimension() const;
    const std::string& description() const;

    const GridStep& step(long n) const;  // levels are 1-based
    void prefetch(long n) const;

    double log_p_cum(long n) const;  // log P_n
    double log_m_cum(long n) const;  // log 1/Lambda_n

    mpz_class p_product(long n) const;  // P_n exactly
    mpz_class m_product(long n) const;  // 1/Lambda_n exactly
    mpq_class lambda(long n) const;     // Lambda_n exactly

    // deepest n with Lambda_n >= r; 0 when r >= 1
    long level_for_radius(const mpq_class& r) const;

    // minimum per-level slope log p_i / log m_i over levels 1..n
    double min_step_slope(long n) const;

private:
    struct Impl;
    explicit Schedule(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<Impl> impl_;
};

// Prefabricated steps used by the named generators and widely in tests.
GridStep cantor_step();        // N=1, m=3, keep {0,2}
GridStep carpet_step();        // N=2, m=3, keep all but the center
GridStep vicsek_step();        // N=2, m=3, keep the chessboard (corners+center)

// Block value of the carpet/vicsek mixing rule at level j >= 1
// (1 = carpet, 2 = vicsek; run lengths grow like sqrt(2j)).
int carpet_vicsek_q(long j);

// Windowed analytic dimensions from cumulative cell counts alone.
// Locals min/max log P_n / log(1/Lambda_n) over the tail half; tangentials
// min/max pairwise slopes with gap floor min(k_min, isqrt(n_max)).
// Throws ConfigError unless k_min >= 1 and n_max exceeds twice that floor.
DimensionEstimate oracle_dims(const Schedule& s, long n_max, long k_min);

struct HausdorffReport {
    double min_value = 0.0;
    long min_level = 0;
    bool drifting = false;      // thirds minima strictly decreasing
    double thirds_min[3] = {0, 0, 0};
};

// Windowed min of log P_n - d * log(1/Lambda_n) with a drift diagnostic:
// bounded below means the d-dimensional Hausdorff measure can be nontrivial.
HausdorffReport hausdorff_nontriviality(const Schedule& s, double d, long n_max);

}
