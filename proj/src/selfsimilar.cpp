#include "tangdim/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tangdim/errors.hpp"
#include "tangdim/estimators.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

double moran_dimension(const std::vector<mpq_class>& ratios, double tol,
                       double* residual) {
    if (ratios.empty()) throw ConfigError("need at least one contraction ratio");
    if (!(tol > 0)) throw ConfigError("tolerance must be positive");
    std::vector<double> logs;
    double log_max = -std::numeric_limits<double>::infinity();
    for (const mpq_class& q : ratios) {
        if (q <= 0 || q >= 1)
            throw ConfigError("contraction ratio " + rational_str(q) +
                              " outside (0, 1)");
        double lg = log_mpq(q);
        logs.push_back(lg);
        log_max = std::max(log_max, lg);
    }
    auto phi = [&](double d) {
        double sum = 0;
        for (double lg : logs) sum += std::exp(d * lg);
        return sum - 1.0;
    };

    double lo = 0.0;
    double hi = std::log(static_cast<double>(ratios.size())) / -log_max;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        mid = 0.5 * (lo + hi);
        (phi(mid) > 0 ? lo : hi) = mid;
    }
    mid = 0.5 * (lo + hi);
    double res = phi(mid);
    if (residual) *residual = res;
    if (std::fabs(res) > tol)
        throw EstimatorError("bisection residual " + std::to_string(res) +
                             " above tolerance");
    return mid;
}

CollapseReport selfsimilar_collapse_check(const Schedule& s, long depth,
                                          long guard) {
    if (depth < 20) throw ConfigError("collapse check needs depth >= 20");
    const GridStep& first = s.step(1);
    for (long n = 2; n <= depth + guard; ++n)
        if (!(s.step(n) == first))
            throw ConfigError("schedule is not one repeating step (level " +
                              std::to_string(n) + " differs)");

    CollapseReport rep;
    rep.formula_dim =
        std::log(static_cast<double>(first.p())) / std::log(static_cast<double>(first.m()));

    MeasureExpr e = MeasureExpr::base(s);
    MeasurePoint x = MeasurePoint::default_for(e);
    EstimateResult est = estimate_dimensions(e, x, depth, guard, 0, 0.5);
    rep.dims = est.dims;
    for (const Estimate* q : {&est.dims.lower_tangential, &est.dims.lower_local,
                              &est.dims.upper_local, &est.dims.upper_tangential})
        rep.max_deviation =
            std::max(rep.max_deviation, std::fabs(q->value - rep.formula_dim));

    rep.band_levels = std::min<long>(60, depth);
    double band_lo = std::numeric_limits<double>::infinity();
    double band_hi = -band_lo;
    for (long i = 0; i < rep.band_levels; ++i) {
        const ScaleSample& smp = est.f.samples[i];
        band_lo = std::min(band_lo, smp.f_lo - rep.formula_dim * smp.t);
        band_hi = std::max(band_hi, smp.f_hi - rep.formula_dim * smp.t);
    }
    rep.band_width = band_hi - band_lo;
    return rep;
}

}
