#include "tangdim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "tangdim/errors.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

size_t tail_start_index(size_t n, double tail_fraction) {
    if (!(tail_fraction > 0) || tail_fraction > 1)
        throw ConfigError("tail fraction must be in (0, 1]");
    size_t keep = static_cast<size_t>(std::ceil(n * tail_fraction));
    if (keep < 1) keep = 1;
    if (keep > n) keep = n;
    return n - keep;
}

void require_tail(size_t tail_count) {
    if (tail_count < 10)
        throw EstimatorError("tail window has " + std::to_string(tail_count) +
                             " samples; need at least 10");
}

}  // namespace

SlopeSurface slope_surface(const ScaleFunction& f, double h_min,
                           double tail_fraction) {
    const auto& s = f.samples;
    size_t i0 = tail_start_index(s.size(), tail_fraction);
    require_tail(s.size() - i0);

    double t_max = s.back().t;
    if (h_min <= 0) h_min = t_max / std::sqrt(static_cast<double>(s.size()));

    double max_dt = 0;
    for (size_t i = 1; i < s.size(); ++i)
        max_dt = std::max(max_dt, s[i].t - s[i - 1].t);

    SlopeSurface surf;
    surf.h_lo = h_min;
    surf.h_hi = 1.5 * h_min;
    std::set<long> gap_set;
    while (true) {
        surf.points.clear();
        gap_set.clear();
        for (size_t i = i0; i < s.size(); ++i) {
            if (!std::isfinite(s[i].f_hi)) continue;
            for (size_t j = i + 1; j < s.size(); ++j) {
                double h = s[j].t - s[i].t;
                if (h < surf.h_lo) continue;
                if (h > surf.h_hi) break;
                if (!std::isfinite(s[j].f_hi)) continue;
                SlopePoint p;
                p.level = s[i].level;
                p.gap = s[j].level - s[i].level;
                p.t = s[i].t;
                p.h = h;
                p.lo = (s[j].f_lo - s[i].f_hi) / h;
                p.hi = (s[j].f_hi - s[i].f_lo) / h;
                surf.points.push_back(p);
                gap_set.insert(p.gap);
            }
        }
        if (gap_set.size() >= 5) break;
        if (surf.h_hi > t_max - s[i0].t)
            throw EstimatorError("slope window too narrow: only " +
                                 std::to_string(gap_set.size()) +
                                 " distinct level gaps reachable above h = " +
                                 std::to_string(surf.h_lo));
        surf.h_hi += max_dt;
    }
    surf.gaps.assign(gap_set.begin(), gap_set.end());
    std::sort(surf.points.begin(), surf.points.end(),
              [](const SlopePoint& a, const SlopePoint& b) {
                  return a.gap != b.gap ? a.gap < b.gap : a.level < b.level;
              });
    return surf;
}

LocalPair local_dims(const ScaleFunction& f, double tail_fraction) {
    const auto& s = f.samples;
    size_t i0 = tail_start_index(s.size(), tail_fraction);
    require_tail(s.size() - i0);

    double lo = kInf, hi = -kInf, w_max = 0;
    for (size_t i = i0; i < s.size(); ++i) {
        if (!std::isfinite(s[i].f_hi))
            throw EstimatorError("measure lower bound vanished at level " +
                                 std::to_string(s[i].level) +
                                 "; raise the guard");
        double v = 0.5 * (s[i].f_lo + s[i].f_hi) / s[i].t;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        w_max = std::max(w_max, s[i].f_hi - s[i].f_lo);
    }
    double u = w_max / s[i0].t;
    WindowInfo w{s[i0].level, s.back().level, 0, 0, 0, 0};
    return {Estimate{lo, u, w}, Estimate{hi, u, w}};
}

TangentialPair tangential_dims(const ScaleFunction& f, const SlopeSurface& surf) {
    if (surf.points.empty())
        throw EstimatorError("empty slope surface");

    std::map<long, std::pair<double, double>> per_gap;  // gap -> (min lo, max hi)
    long lvl_lo = surf.points.front().level, lvl_hi = lvl_lo;
    for (const SlopePoint& p : surf.points) {
        auto [it, fresh] = per_gap.try_emplace(p.gap, p.lo, p.hi);
        if (!fresh) {
            it->second.first = std::min(it->second.first, p.lo);
            it->second.second = std::max(it->second.second, p.hi);
        }
        lvl_lo = std::min(lvl_lo, p.level);
        lvl_hi = std::max(lvl_hi, p.level + p.gap);
    }
    double lower = -kInf, upper = kInf;
    for (const auto& [gap, mm] : per_gap) {
        lower = std::max(lower, mm.first);
        upper = std::min(upper, mm.second);
    }

    double w_max = 0, t_min = kInf;
    std::map<long, const ScaleSample*> at;
    for (const ScaleSample& s : f.samples) at[s.level] = &s;
    for (const SlopePoint& p : surf.points) {
        const ScaleSample* a = at.at(p.level);
        const ScaleSample* b = at.at(p.level + p.gap);
        w_max = std::max({w_max, a->f_hi - a->f_lo, b->f_hi - b->f_lo});
        t_min = std::min(t_min, a->t);
    }
    double u = w_max * (1.0 / surf.h_lo + 1.0 / t_min);

    WindowInfo w{lvl_lo, lvl_hi, surf.h_lo, surf.h_hi, surf.gaps.front(),
                 surf.gaps.back()};
    return {Estimate{lower, u, w}, Estimate{upper, u, w}};
}

EstimateResult estimate_dimensions(const MeasureExpr& e, const MeasurePoint& x,
                                   long depth, long guard, double h_min,
                                   double tail_fraction) {
    EstimateResult res;
    res.f = f_samples(e, x, depth, guard);
    res.slopes = slope_surface(res.f, h_min, tail_fraction);
    TangentialPair tang = tangential_dims(res.f, res.slopes);
    LocalPair loc = local_dims(res.f, tail_fraction);
    res.dims.lower_tangential = tang.lower;
    res.dims.lower_local = loc.lower;
    res.dims.upper_local = loc.upper;
    res.dims.upper_tangential = tang.upper;
    return res;
}

DoublingReport doubling_diagnostic(const ScaleFunction& f, double flag_threshold) {
    const auto& s = f.samples;
    if (s.size() < 2) throw EstimatorError("need at least 2 samples");
    const double log2 = std::log(2.0);
    for (size_t i = 1; i < s.size(); ++i)
        if (s[i].t - s[i - 1].t > 3 * log2 + 1e-9)
            throw EstimatorError(
                "sample spacing too coarse to find the doubled radius (needs "
                "t steps <= 3*log 2)");

    DoublingReport rep;
    size_t half = s.size() / 2;
    double tail_max = -kInf;
    for (size_t i = 0; i < s.size(); ++i) {
        // coarsest usable numerator: deepest sample with radius >= 2*r_i
        size_t j = i;
        bool found = false;
        while (j > 0) {
            --j;
            if (s[j].t <= s[i].t - log2 + 1e-12) {
                found = true;
                break;
            }
        }
        if (!found) continue;
        DoublingSample row;
        row.level = s[i].level;
        if (s[i].mu.lo == 0) {
            row.log2_ratio = kInf;
            row.flagged = true;
        } else {
            mpq_class ratio = s[j].mu.hi / s[i].mu.lo;
            row.log2_ratio = log_mpq(ratio) / log2;
            row.flagged = row.log2_ratio > flag_threshold;
        }
        rep.any_flagged = rep.any_flagged || row.flagged;
        if (i >= half) tail_max = std::max(tail_max, row.log2_ratio);
        rep.rows.push_back(row);
    }
    if (rep.rows.empty())
        throw EstimatorError("no sample pair spans a doubled radius");
    rep.max_log2_ratio = tail_max;
    return rep;
}

MetricDims metric_tangential_dims(const Schedule& s, const PointAddress& x,
                                  long depth, long stride, long budget,
                                  double tail_fraction) {
    if (stride < 1) throw ConfigError("stride must be >= 1");
    if (depth < 6 * stride)
        throw ConfigError("depth must be at least 6 strides for the gap grid");
    std::vector<long> gaps{stride, 2 * stride, 3 * stride, 4 * stride};

    long n_last = depth - gaps.back();
    long n0 = static_cast<long>(std::ceil(depth * (1.0 - tail_fraction)));
    if (n0 < 1) n0 = 1;
    std::vector<long> bases;
    for (long n = n0; n <= n_last; n += stride) bases.push_back(n);
    if (bases.size() < 3)
        throw EstimatorError("metric window has only " +
                             std::to_string(bases.size()) +
                             " base levels; lower the stride or raise the depth");

    std::map<long, std::pair<double, double>> per_gap;  // gap -> (min lo, max hi)
    double slop = 0;
    for (long n : bases) {
        RationalBox box = point_box(s, x, n + gaps.back() + 4);
        mpq_class r = s.lambda(n);
        for (long k : gaps) {
            CountInterval c = covering_interval(s, box, r, n + k, budget);
            double h = s.log_m_cum(n + k) - s.log_m_cum(n);
            double lo = log_mpz(c.lo) / h;
            double hi = log_mpz(c.hi) / h;
            slop = std::max(slop, hi - lo);
            auto [it, fresh] = per_gap.try_emplace(k, lo, hi);
            if (!fresh) {
                it->second.first = std::min(it->second.first, lo);
                it->second.second = std::max(it->second.second, hi);
            }
        }
    }
    double lower = -kInf, upper = kInf;
    for (const auto& [gap, mm] : per_gap) {
        lower = std::max(lower, mm.first);
        upper = std::min(upper, mm.second);
    }

    double h_lo = s.log_m_cum(bases.front() + gaps.front()) - s.log_m_cum(bases.front());
    double h_hi = s.log_m_cum(bases.front() + gaps.back()) - s.log_m_cum(bases.front());
    WindowInfo w{bases.front(), bases.back() + gaps.back(), h_lo, h_hi,
                 gaps.front(), gaps.back()};
    return {Estimate{lower, slop, w}, Estimate{upper, slop, w}};
}

namespace {

RationalBox cell_center(const Schedule& s, const CellAddress& addr) {
    RationalBox box = address_to_box(s, addr);
    RationalBox center;
    center.corner.reserve(box.dimension());
    for (int j = 0; j < box.dimension(); ++j)
        center.corner.push_back(box.center_coord(j));
    center.side = 0;
    return center;
}

}  // namespace

NeighborhoodReport newassum_check(const Schedule& s, const PointAddress& x,
                                  const std::vector<long>& levels, long guard,
                                  long count) {
    if (levels.empty()) throw ConfigError("need at least one radius level");
    if (count < 1) throw ConfigError("sample count must be >= 1");

    NeighborhoodReport rep;
    double worst = 0;
    for (long lvl : levels) {
        mpq_class r = s.lambda(lvl);
        long n_eval = lvl + guard;
        EnumResult cx = enumerate_cells(s, x, r, n_eval, guard);

        RationalBox xbox = point_box(s, x, lvl + 2 + guard);
        std::vector<CellAddress> cells =
            cells_inside_ball(s, xbox, r, lvl + 2, count);
        if (cells.empty())
            throw EstimatorError("no sample cells inside the radius ball at level " +
                                 std::to_string(lvl));
        for (const CellAddress& addr : cells) {
            EnumResult cy = enumerate_cells_at(s, cell_center(s, addr), r, n_eval);
            ++rep.samples;
            if (cx.inner == 0 || cy.inner == 0) {
                rep.degenerate = true;
                continue;
            }
            mpq_class a(cy.outer, cx.inner), b(cx.outer, cy.inner);
            a.canonicalize();
            b.canonicalize();
            worst = std::max({worst, to_double(a), to_double(b)});
        }
    }
    rep.c_max = rep.degenerate ? kInf : worst;
    return rep;
}

ExtremaReport ball_measure_extrema(const Schedule& s, const PointAddress& x,
                                   long level, long sub_gap, long guard,
                                   long count) {
    if (sub_gap < 0) throw ConfigError("sub_gap must be >= 0");
    if (count < 1) throw ConfigError("sample count must be >= 1");
    mpq_class r = s.lambda(level);
    RationalBox xbox = point_box(s, x, level + 2 + guard);
    std::vector<CellAddress> cells = cells_inside_ball(s, xbox, r, level + 2, count);
    if (cells.empty())
        throw EstimatorError("no sample cells inside the radius ball at level " +
                             std::to_string(level));

    mpq_class r_small = s.lambda(level + sub_gap);
    long n_eval = level + sub_gap + guard;
    mpz_class total = s.p_product(n_eval);
    ExtremaReport rep;
    bool first = true;
    for (const CellAddress& addr : cells) {
        EnumResult c = enumerate_cells_at(s, cell_center(s, addr), r_small, n_eval);
        MeasureInterval mu{mpq_class(c.inner, total), mpq_class(c.outer, total)};
        mu.lo.canonicalize();
        mu.hi.canonicalize();
        if (first) {
            rep.smallest = mu;
            rep.largest = mu;
            first = false;
        } else {
            rep.smallest.lo = std::min(rep.smallest.lo, mu.lo);
            rep.smallest.hi = std::min(rep.smallest.hi, mu.hi);
            rep.largest.lo = std::max(rep.largest.lo, mu.lo);
            rep.largest.hi = std::max(rep.largest.hi, mu.hi);
        }
        ++rep.samples;
    }
    return rep;
}

ExtremalSequence extremal_level_sequence(const SlopeSurface& surf,
                                         Extremal target, long per_gap) {
    if (per_gap < 1) throw ConfigError("per_gap must be >= 1");
    if (surf.points.empty()) throw EstimatorError("empty slope surface");

    long best_gap = 0;
    double best_score = 0;
    bool first = true;
    for (long gap : surf.gaps) {
        double score = 0;
        bool seen = false;
        for (const SlopePoint& p : surf.points) {
            if (p.gap != gap) continue;
            double v = target == Extremal::Min ? p.lo : p.hi;
            score = seen ? (target == Extremal::Min ? std::min(score, v)
                                                    : std::max(score, v))
                         : v;
            seen = true;
        }
        if (!seen) continue;
        bool better = target == Extremal::Min ? score > best_score
                                              : score < best_score;
        if (first || better) {
            best_gap = gap;
            best_score = score;
            first = false;
        }
    }

    std::vector<const SlopePoint*> column;
    for (const SlopePoint& p : surf.points)
        if (p.gap == best_gap) column.push_back(&p);
    std::sort(column.begin(), column.end(),
              [target](const SlopePoint* a, const SlopePoint* b) {
                  double va = target == Extremal::Min ? a->lo : -a->hi;
                  double vb = target == Extremal::Min ? b->lo : -b->hi;
                  return va != vb ? va < vb : a->level < b->level;
              });
    if (column.size() > static_cast<size_t>(per_gap))
        column.resize(per_gap);

    ExtremalSequence out;
    out.gap = best_gap;
    for (const SlopePoint* p : column) out.levels.push_back(p->level);
    std::sort(out.levels.begin(), out.levels.end());
    out.levels.erase(std::unique(out.levels.begin(), out.levels.end()),
                     out.levels.end());
    return out;
}

}
