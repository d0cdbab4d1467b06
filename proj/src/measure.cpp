#include "tangdim/measure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "tangdim/errors.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

struct MeasureExpr::Node {
    enum class Kind { Base, Sum, Product, Lipschitz } kind;
    std::shared_ptr<const Schedule> sched;  // Base
    std::shared_ptr<const Node> a, b;
    mpq_class distortion;  // Lipschitz
    int dim = 0;
    int leaves = 0;
    std::string desc;
};

MeasureExpr MeasureExpr::base(Schedule s) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Base;
    n->sched = std::make_shared<Schedule>(std::move(s));
    n->dim = n->sched->dimension();
    n->leaves = 1;
    n->desc = n->sched->description();
    return MeasureExpr(std::move(n));
}

MeasureExpr MeasureExpr::sum(MeasureExpr a, MeasureExpr b) {
    if (a.dimension() != b.dimension())
        throw ConfigError("sum needs equal dimensions, got " +
                          std::to_string(a.dimension()) + " and " +
                          std::to_string(b.dimension()));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Sum;
    n->a = a.node_;
    n->b = b.node_;
    n->dim = a.dimension();
    n->leaves = a.leaf_count() + b.leaf_count();
    n->desc = "sum(" + a.description() + "," + b.description() + ")";
    return MeasureExpr(std::move(n));
}

MeasureExpr MeasureExpr::product(MeasureExpr a, MeasureExpr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Product;
    n->a = a.node_;
    n->b = b.node_;
    n->dim = a.dimension() + b.dimension();
    n->leaves = a.leaf_count() + b.leaf_count();
    n->desc = "product(" + a.description() + "," + b.description() + ")";
    return MeasureExpr(std::move(n));
}

MeasureExpr MeasureExpr::lipschitz(MeasureExpr a, mpq_class distortion) {
    if (distortion < 1)
        throw ConfigError("distortion must be >= 1, got " + rational_str(distortion));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Lipschitz;
    n->a = a.node_;
    n->distortion = std::move(distortion);
    n->dim = a.dimension();
    n->leaves = a.leaf_count();
    n->desc = "lipschitz(" + a.description() + "," + rational_str(n->distortion) + ")";
    return MeasureExpr(std::move(n));
}

namespace {

std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

// Splits "A,B" at the single top-level comma of a two-argument node.
size_t top_level_comma(const std::string& s) {
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') --depth;
        else if (s[i] == ',' && depth == 0) return i;
    }
    return std::string::npos;
}

MeasureExpr parse_expr(const std::string& text) {
    for (const char* head : {"sum", "product", "lipschitz"}) {
        std::string h = std::string(head) + "(";
        if (text.rfind(h, 0) != 0) continue;
        if (text.back() != ')')
            throw ConfigError("measure expression '" + text + "': missing ')'");
        std::string inner = text.substr(h.size(), text.size() - h.size() - 1);
        size_t comma = top_level_comma(inner);
        if (comma == std::string::npos)
            throw ConfigError("measure expression '" + text + "': expected two arguments");
        std::string left = inner.substr(0, comma);
        std::string right = inner.substr(comma + 1);
        if (h[0] == 's') return MeasureExpr::sum(parse_expr(left), parse_expr(right));
        if (h[0] == 'p') return MeasureExpr::product(parse_expr(left), parse_expr(right));
        mpq_class L;
        try {
            L = parse_rational(right);
        } catch (const std::invalid_argument&) {
            throw ConfigError("measure expression '" + text + "': bad distortion '" +
                              right + "'");
        }
        return MeasureExpr::lipschitz(parse_expr(left), L);
    }
    return MeasureExpr::base(Schedule::named(text));
}

}  // namespace

MeasureExpr MeasureExpr::parse(const std::string& text) {
    std::string t = strip_spaces(text);
    if (t.empty()) throw ConfigError("empty measure expression");
    return parse_expr(t);
}

int MeasureExpr::dimension() const { return node_->dim; }
std::string MeasureExpr::description() const { return node_->desc; }
bool MeasureExpr::is_schedule() const { return node_->kind == Node::Kind::Base; }
int MeasureExpr::leaf_count() const { return node_->leaves; }

const Schedule& MeasureExpr::schedule() const {
    if (!is_schedule())
        throw ConfigError("'" + node_->desc + "' is a composite measure, not a schedule");
    return *node_->sched;
}

namespace {

void leaf_schedules(const MeasureExpr::Node& n,
                    std::vector<const Schedule*>& out) {
    using Kind = MeasureExpr::Node::Kind;
    if (n.kind == Kind::Base) {
        out.push_back(n.sched.get());
        return;
    }
    leaf_schedules(*n.a, out);
    if (n.b) leaf_schedules(*n.b, out);
}

}  // namespace

mpq_class MeasureExpr::natural_scale(long level) const {
    std::vector<const Schedule*> leaves;
    leaf_schedules(*node_, leaves);
    mpq_class best = leaves.front()->lambda(level);
    for (size_t i = 1; i < leaves.size(); ++i) {
        mpq_class lam = leaves[i]->lambda(level);
        if (lam < best) best = lam;
    }
    return best;
}

MeasurePoint MeasurePoint::default_for(const MeasureExpr& e) {
    MeasurePoint p;
    p.legs.assign(e.leaf_count(), PointAddress::first_kept());
    return p;
}

MeasurePoint MeasurePoint::parse(const MeasureExpr& e, const std::string& spec) {
    if (spec.empty()) return default_for(e);
    std::vector<const Schedule*> leaves;
    leaf_schedules(e.node(), leaves);
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t amp = spec.find('&', start);
        std::string part = spec.substr(start, amp - start);
        size_t a = part.find_first_not_of(" \t");
        size_t b = part.find_last_not_of(" \t");
        parts.push_back(a == std::string::npos ? "" : part.substr(a, b - a + 1));
        if (amp == std::string::npos) break;
        start = amp + 1;
    }
    if (parts.size() == 1 && leaves.size() > 1)
        parts.assign(leaves.size(), parts.front());
    if (parts.size() != leaves.size())
        throw ConfigError("point spec has " + std::to_string(parts.size()) +
                          " legs but the measure has " + std::to_string(leaves.size()) +
                          " schedule leaves");
    MeasurePoint p;
    for (size_t i = 0; i < parts.size(); ++i)
        p.legs.push_back(PointAddress::parse(parts[i], leaves[i]->dimension()));
    return p;
}

std::string MeasurePoint::describe() const {
    std::string out;
    for (size_t i = 0; i < legs.size(); ++i) {
        if (i) out += " & ";
        out += legs[i].describe();
    }
    return out;
}

namespace {

MeasureInterval walk_measure(const MeasureExpr::Node& n,
                             const std::vector<PointAddress>& legs, size_t& leg,
                             const mpq_class& r, long level, long guard) {
    using Kind = MeasureExpr::Node::Kind;
    switch (n.kind) {
        case Kind::Base: {
            const Schedule& s = *n.sched;
            const PointAddress& x = legs[leg++];
            // Deepen the point until its box fits inside the ball even when r
            // is much smaller than this leaf's own cells at `level`.
            long g = guard;
            long fit = s.level_for_radius(r) + 1 + guard;
            if (fit > level + g) g = fit - level;
            EnumResult counts = enumerate_cells(s, x, r, level, g);
            mpz_class total = s.p_product(level);
            MeasureInterval out;
            out.lo = mpq_class(counts.inner, total);
            out.hi = mpq_class(counts.outer, total);
            out.lo.canonicalize();
            out.hi.canonicalize();
            return out;
        }
        case Kind::Sum: {
            MeasureInterval ma = walk_measure(*n.a, legs, leg, r, level, guard);
            MeasureInterval mb = walk_measure(*n.b, legs, leg, r, level, guard);
            return {(ma.lo + mb.lo) / 2, (ma.hi + mb.hi) / 2};
        }
        case Kind::Product: {
            MeasureInterval ma = walk_measure(*n.a, legs, leg, r, level, guard);
            MeasureInterval mb = walk_measure(*n.b, legs, leg, r, level, guard);
            return {ma.lo * mb.lo, ma.hi * mb.hi};
        }
        case Kind::Lipschitz: {
            size_t saved = leg;
            MeasureInterval shrunk =
                walk_measure(*n.a, legs, leg, r / n.distortion, level, guard);
            leg = saved;
            MeasureInterval grown =
                walk_measure(*n.a, legs, leg, r * n.distortion, level, guard);
            return {shrunk.lo, grown.hi};
        }
    }
    throw ConfigError("corrupt measure expression");
}

}  // namespace

MeasureInterval ball_measure(const MeasureExpr& e, const MeasurePoint& x,
                             const mpq_class& r, long level, long guard) {
    if (r <= 0) throw ConfigError("radius must be positive");
    if (guard < 0) throw ConfigError("guard must be >= 0");
    if (static_cast<int>(x.legs.size()) != e.leaf_count())
        throw ConfigError("point has " + std::to_string(x.legs.size()) +
                          " legs but the measure has " + std::to_string(e.leaf_count()) +
                          " schedule leaves");
    size_t leg = 0;
    return walk_measure(e.node(), x.legs, leg, r, level, guard);
}

ScaleFunction f_samples(const MeasureExpr& e, const MeasurePoint& x,
                        const std::vector<long>& levels, long guard) {
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1) throw ConfigError("levels are 1-based");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw ConfigError("sample levels must be strictly increasing");
    }
    ScaleFunction f;
    f.guard = guard;
    f.source = e.description();
    f.point = x.describe();
    f.samples.reserve(levels.size());
    for (long k : levels) {
        mpq_class r = e.natural_scale(k);
        ScaleSample s;
        s.level = k;
        s.mu = ball_measure(e, x, r, k + guard, guard);
        s.t = -log_mpq(r);
        s.f_lo = -log_mpq(s.mu.hi);
        s.f_hi = s.mu.lo > 0 ? -log_mpq(s.mu.lo)
                             : std::numeric_limits<double>::infinity();
        f.samples.push_back(std::move(s));
    }
    return f;
}

ScaleFunction f_samples(const MeasureExpr& e, const MeasurePoint& x, long depth,
                        long guard) {
    if (depth < 1) throw ConfigError("depth must be >= 1");
    std::vector<long> levels(depth);
    for (long k = 1; k <= depth; ++k) levels[k - 1] = k;
    return f_samples(e, x, levels, guard);
}

BlowupReport blowup_dims(const MeasureExpr& e, const MeasurePoint& x,
                         const std::vector<long>& level_seq,
                         const std::vector<long>& gaps, long guard) {
    if (level_seq.size() < 4)
        throw EstimatorError("blow-up needs at least 4 base levels for tail averaging");
    if (gaps.empty()) throw EstimatorError("blow-up needs at least one level gap");
    for (size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] < 1) throw EstimatorError("level gaps must be >= 1");
        if (i > 0 && gaps[i] <= gaps[i - 1])
            throw EstimatorError("level gaps must be strictly increasing");
    }

    std::vector<long> wanted;
    for (long n : level_seq) {
        wanted.push_back(n);
        for (long k : gaps) wanted.push_back(n + k);
    }
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    ScaleFunction f = f_samples(e, x, wanted, guard);

    std::map<long, const ScaleSample*> at;
    for (const ScaleSample& s : f.samples) {
        if (!std::isfinite(s.f_hi))
            throw EstimatorError("measure lower bound vanished at level " +
                                 std::to_string(s.level) +
                                 "; raise the guard to blow up here");
        at[s.level] = &s;
    }

    std::vector<std::pair<double, double>> per_gap;  // mean lo/hi slope per gap
    size_t tail_start = level_seq.size() / 2;
    for (long k : gaps) {
        double lo_sum = 0, hi_sum = 0;
        long used = 0;
        for (size_t i = tail_start; i < level_seq.size(); ++i) {
            const ScaleSample* a = at.at(level_seq[i]);
            const ScaleSample* b = at.at(level_seq[i] + k);
            double h = b->t - a->t;
            lo_sum += (b->f_lo - a->f_hi) / h;
            hi_sum += (b->f_hi - a->f_lo) / h;
            ++used;
        }
        per_gap.push_back({lo_sum / used, hi_sum / used});
    }

    BlowupReport rep;
    size_t g0 = per_gap.size() / 2;
    rep.lower = per_gap[g0].first;
    rep.upper = per_gap[g0].second;
    for (size_t i = g0; i < per_gap.size(); ++i) {
        rep.lower = std::min(rep.lower, per_gap[i].first);
        rep.upper = std::max(rep.upper, per_gap[i].second);
    }
    rep.spread = rep.upper - rep.lower;
    rep.converged = rep.spread <= 0.5;
    return rep;
}

}
