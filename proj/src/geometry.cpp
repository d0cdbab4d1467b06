#include "tangdim/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "tangdim/errors.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

namespace {

Cell parse_point_cell(const std::string& tok, int dim, const std::string& spec) {
    Cell c;
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(part, &used);
        } catch (const std::exception&) {
            throw ConfigError("point spec '" + spec + "': bad coordinate '" + part + "'");
        }
        if (used != part.size() || v < 0)
            throw ConfigError("point spec '" + spec + "': bad coordinate '" + part + "'");
        c.push_back(v);
    }
    if (static_cast<int>(c.size()) != dim)
        throw ConfigError("point spec '" + spec + "': cell '" + tok + "' needs " +
                          std::to_string(dim) + " coordinates");
    return c;
}

std::vector<Cell> parse_cell_list(const std::string& text, int dim, const std::string& spec) {
    std::vector<Cell> cells;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '|'))
        if (!tok.empty()) cells.push_back(parse_point_cell(tok, dim, spec));
    return cells;
}

}  // namespace

PointAddress PointAddress::parse(const std::string& spec, int dimension) {
    PointAddress out;
    if (spec.empty()) return out;
    std::stringstream ss(spec);
    std::string part;
    bool saw_tail = false;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw ConfigError("point spec '" + spec + "': expected key=value, got '" + part + "'");
        std::string key = part.substr(0, eq);
        std::string val = part.substr(eq + 1);
        if (key == "prefix") {
            out.prefix = parse_cell_list(val, dimension, spec);
        } else if (key == "tail") {
            saw_tail = true;
            if (val == "first-kept") {
                out.tail = Tail::FirstKept;
            } else if (val.rfind("periodic:", 0) == 0) {
                out.tail = Tail::Periodic;
                out.cycle = parse_cell_list(val.substr(9), dimension, spec);
                if (out.cycle.empty())
                    throw ConfigError("point spec '" + spec + "': empty periodic tail");
            } else {
                throw ConfigError("point spec '" + spec + "': unknown tail '" + val + "'");
            }
        } else {
            throw ConfigError("point spec '" + spec + "': unknown key '" + key + "'");
        }
    }
    (void)saw_tail;
    return out;
}

Cell PointAddress::cell_at(const Schedule& s, long n) const {
    if (n < 1) throw ConfigError("levels are 1-based");
    Cell c;
    if (n <= static_cast<long>(prefix.size())) {
        c = prefix[n - 1];
    } else if (tail == Tail::FirstKept) {
        return s.step(n).kept().front();
    } else {
        long i = (n - static_cast<long>(prefix.size()) - 1) % static_cast<long>(cycle.size());
        c = cycle[i];
    }
    if (!s.step(n).contains(c)) {
        std::string cs;
        for (size_t j = 0; j < c.size(); ++j) cs += (j ? "," : "") + std::to_string(c[j]);
        throw ConfigError("point address picks cell (" + cs + ") not kept at level " +
                          std::to_string(n));
    }
    return c;
}

std::string PointAddress::describe() const {
    std::string out;
    if (!prefix.empty()) {
        out += "prefix=";
        for (size_t i = 0; i < prefix.size(); ++i) {
            if (i) out += "|";
            for (size_t j = 0; j < prefix[i].size(); ++j)
                out += (j ? "," : "") + std::to_string(prefix[i][j]);
        }
        out += ";";
    }
    if (tail == Tail::FirstKept) {
        out += "tail=first-kept";
    } else {
        out += "tail=periodic:";
        for (size_t i = 0; i < cycle.size(); ++i) {
            if (i) out += "|";
            for (size_t j = 0; j < cycle[i].size(); ++j)
                out += (j ? "," : "") + std::to_string(cycle[i][j]);
        }
    }
    return out;
}

BallClass classify_cell(const RationalBox& cell, const RationalBox& center,
                        const mpq_class& r) {
    if (r <= 0) throw ConfigError("radius must be positive");
    if (cell.dimension() != center.dimension())
        throw ConfigError("cell and center dimension mismatch");
    mpq_class d2min = 0, d2max = 0;
    for (int j = 0; j < cell.dimension(); ++j) {
        mpq_class c_lo = cell.corner[j], c_hi = cell.corner[j] + cell.side;
        mpq_class b_lo = center.corner[j], b_hi = center.corner[j] + center.side;
        mpq_class g = c_lo - b_hi;
        if (b_lo - c_hi > g) g = b_lo - c_hi;
        if (g < 0) g = 0;
        d2min += g * g;
        mpq_class G = c_hi - b_lo;
        if (b_hi - c_lo > G) G = b_hi - c_lo;
        d2max += G * G;
    }
    mpq_class r2 = r * r;
    if (d2max < r2) return BallClass::Inside;
    if (d2min > r2) return BallClass::Outside;
    return BallClass::Meets;
}

RationalBox address_to_box(const Schedule& s, const CellAddress& addr) {
    int N = s.dimension();
    RationalBox box;
    box.corner.assign(N, mpq_class(0));
    box.side = 1;
    mpz_class mprod = 1;
    for (size_t i = 0; i < addr.size(); ++i) {
        long level = static_cast<long>(i) + 1;
        const GridStep& st = s.step(level);
        if (!st.contains(addr[i])) {
            std::string cs;
            for (size_t j = 0; j < addr[i].size(); ++j)
                cs += (j ? "," : "") + std::to_string(addr[i][j]);
            throw ConfigError("address picks cell (" + cs + ") not kept at level " +
                              std::to_string(level));
        }
        mprod *= st.m();
        for (int j = 0; j < N; ++j) {
            mpq_class off(addr[i][j], mprod);
            off.canonicalize();
            box.corner[j] += off;
        }
    }
    box.side = mpq_class(1, mprod);
    box.side.canonicalize();
    return box;
}

RationalBox point_box(const Schedule& s, const PointAddress& x, long depth) {
    if (depth < 0) throw ConfigError("depth must be >= 0");
    CellAddress addr;
    addr.reserve(depth);
    for (long n = 1; n <= depth; ++n) addr.push_back(x.cell_at(s, n));
    return address_to_box(s, addr);
}

namespace {

// All lengths multiplied by a common integer scale so the descent runs on
// plain big integers. The sqrt(N) enlargement is compared exactly via
// q = d^2 - r^2 - N*Lam^2 against 2*r*Lam*sqrt(N): negative q decides
// immediately, otherwise compare q^2 with 4*N*(r*Lam)^2.
struct Frame {
    const Schedule* s = nullptr;
    int N = 0;
    long H = 0;  // level of the counted cells
    mpz_class r_s, r_s2;
    mpz_class A, B4;  // enlarged-ball constants
    std::vector<mpz_class> side;     // scaled cube side per level 0..H
    std::vector<mpz_class> subtree;  // kept descendants at level H per level
    std::vector<mpz_class> b_lo, b_hi;
};

Frame make_frame(const Schedule& s, const RationalBox& center, const mpq_class& r,
                 long level) {
    if (r <= 0) throw ConfigError("radius must be positive");
    if (level < 1) throw ConfigError("levels are 1-based");
    if (center.dimension() != s.dimension())
        throw ConfigError("center dimension does not match the schedule");
    Frame F;
    F.s = &s;
    F.N = s.dimension();
    F.H = level;
    s.prefetch(level);

    mpz_class T = s.m_product(level);
    mpz_lcm(T.get_mpz_t(), T.get_mpz_t(), r.get_den().get_mpz_t());
    for (int j = 0; j < F.N; ++j)
        mpz_lcm(T.get_mpz_t(), T.get_mpz_t(), center.corner[j].get_den().get_mpz_t());
    mpz_lcm(T.get_mpz_t(), T.get_mpz_t(), center.side.get_den().get_mpz_t());

    F.side.resize(level + 1);
    F.side[0] = T;
    for (long l = 1; l <= level; ++l)
        mpz_divexact_ui(F.side[l].get_mpz_t(), F.side[l - 1].get_mpz_t(),
                        static_cast<unsigned long>(s.step(l).m()));
    F.subtree.resize(level + 1);
    F.subtree[level] = 1;
    for (long l = level - 1; l >= 0; --l)
        F.subtree[l] = F.subtree[l + 1] * s.step(l + 1).p();

    mpz_class t_over_rden;
    mpz_divexact(t_over_rden.get_mpz_t(), T.get_mpz_t(), r.get_den().get_mpz_t());
    F.r_s = r.get_num() * t_over_rden;
    F.r_s2 = F.r_s * F.r_s;

    const mpz_class& lam = F.side[level];
    F.A = F.r_s2 + F.N * lam * lam;
    mpz_class rl = F.r_s * lam;
    F.B4 = 4 * F.N * rl * rl;

    F.b_lo.resize(F.N);
    F.b_hi.resize(F.N);
    mpq_class scaled;
    for (int j = 0; j < F.N; ++j) {
        scaled = center.corner[j] * T;
        F.b_lo[j] = scaled.get_num();  // integral by construction of T
        scaled = (center.corner[j] + center.side) * T;
        F.b_hi[j] = scaled.get_num();
    }
    return F;
}

void axis_gaps(const Frame& F, long l, const std::vector<mpz_class>& corner,
               mpz_class& d2min, mpz_class& d2max) {
    d2min = 0;
    d2max = 0;
    mpz_class g, t;
    for (int j = 0; j < F.N; ++j) {
        const mpz_class& c_lo = corner[j];
        mpz_class c_hi = c_lo + F.side[l];
        g = c_lo - F.b_hi[j];
        t = F.b_lo[j] - c_hi;
        if (t > g) g = t;
        if (g < 0) g = 0;
        mpz_addmul(d2min.get_mpz_t(), g.get_mpz_t(), g.get_mpz_t());
        g = c_hi - F.b_lo[j];
        t = F.b_hi[j] - c_lo;
        if (t > g) g = t;
        mpz_addmul(d2max.get_mpz_t(), g.get_mpz_t(), g.get_mpz_t());
    }
}

bool beyond_enlarged(const Frame& F, const mpz_class& d2) {
    mpz_class q = d2 - F.A;
    return q > 0 && q * q > F.B4;
}

void enum_walk(const Frame& F, long l, const std::vector<mpz_class>& corner,
               bool count_outer, mpz_class& inner, mpz_class& outer) {
    mpz_class d2min, d2max;
    axis_gaps(F, l, corner, d2min, d2max);
    if (d2max < F.r_s2) {
        inner += F.subtree[l];
        if (count_outer) outer += F.subtree[l];
        return;
    }
    if (beyond_enlarged(F, d2min)) return;
    if (l == F.H) {
        if (count_outer) outer += 1;
        return;
    }
    if (count_outer && !beyond_enlarged(F, d2max)) {
        outer += F.subtree[l];
        count_outer = false;
    }
    if (!count_outer && d2min >= F.r_s2) return;  // nothing strictly inside below
    const GridStep& st = F.s->step(l + 1);
    std::vector<mpz_class> child(F.N);
    for (const Cell& c : st.kept()) {
        for (int j = 0; j < F.N; ++j) {
            child[j] = c[j] * F.side[l + 1];
            child[j] += corner[j];
        }
        enum_walk(F, l + 1, child, count_outer, inner, outer);
    }
}

void cover_walk(const Frame& F, long l, const std::vector<mpz_class>& corner,
                long cutoff, mpz_class& lo, mpz_class& hi) {
    mpz_class d2min, d2max;
    axis_gaps(F, l, corner, d2min, d2max);
    if (d2min > F.r_s2) return;
    if (d2max <= F.r_s2) {
        lo += F.subtree[l];
        hi += F.subtree[l];
        return;
    }
    if (l == F.H) {
        hi += 1;
        // certainly meets for every center in the box: max over y of dist(y, cell)
        mpz_class d2mm = 0, g, t;
        for (int j = 0; j < F.N; ++j) {
            const mpz_class& c_lo = corner[j];
            mpz_class c_hi = c_lo + F.side[l];
            g = c_lo - F.b_lo[j];
            t = F.b_hi[j] - c_hi;
            if (t > g) g = t;
            if (g < 0) g = 0;
            mpz_addmul(d2mm.get_mpz_t(), g.get_mpz_t(), g.get_mpz_t());
        }
        if (d2mm <= F.r_s2) lo += 1;
        return;
    }
    if (l >= cutoff) {
        hi += F.subtree[l];
        return;
    }
    const GridStep& st = F.s->step(l + 1);
    std::vector<mpz_class> child(F.N);
    for (const Cell& c : st.kept()) {
        for (int j = 0; j < F.N; ++j) {
            child[j] = c[j] * F.side[l + 1];
            child[j] += corner[j];
        }
        cover_walk(F, l + 1, child, cutoff, lo, hi);
    }
}

void collect_walk(const Frame& F, long l, const std::vector<mpz_class>& corner,
                  CellAddress& path, long count, std::vector<CellAddress>& out) {
    if (static_cast<long>(out.size()) >= count) return;
    mpz_class d2min, d2max;
    axis_gaps(F, l, corner, d2min, d2max);
    if (l == F.H) {
        if (d2max < F.r_s2) out.push_back(path);
        return;
    }
    if (d2min >= F.r_s2) return;  // no strictly-inside descendants
    const GridStep& st = F.s->step(l + 1);
    std::vector<mpz_class> child(F.N);
    for (const Cell& c : st.kept()) {
        if (static_cast<long>(out.size()) >= count) return;
        for (int j = 0; j < F.N; ++j) {
            child[j] = c[j] * F.side[l + 1];
            child[j] += corner[j];
        }
        path.push_back(c);
        collect_walk(F, l + 1, child, path, count, out);
        path.pop_back();
    }
}

}  // namespace

EnumResult enumerate_cells_at(const Schedule& s, const RationalBox& center,
                              const mpq_class& r, long level) {
    if (center.side > 2 * r)
        throw ResolutionError("point box side " + rational_str(center.side) +
                              " exceeds the ball diameter " + rational_str(2 * r) +
                              "; resolve the point deeper");
    Frame F = make_frame(s, center, r, level);
    EnumResult res{0, 0};
    std::vector<mpz_class> corner(F.N, mpz_class(0));
    enum_walk(F, 0, corner, true, res.inner, res.outer);
    return res;
}

EnumResult enumerate_cells(const Schedule& s, const PointAddress& x,
                           const mpq_class& r, long level, long guard) {
    if (guard < 0) throw ConfigError("guard must be >= 0");
    RationalBox box = point_box(s, x, level + guard);
    return enumerate_cells_at(s, box, r, level);
}

mpz_class covering_count(const Schedule& s, const PointAddress& x,
                         const mpq_class& r, long level, long guard) {
    if (guard < 0) throw ConfigError("guard must be >= 0");
    if (s.lambda(level) > r)
        throw ConfigError("covering level too shallow: cell side exceeds the radius");
    RationalBox box = point_box(s, x, level + guard);
    Frame F = make_frame(s, box, r, level);
    mpz_class lo = 0, hi = 0;
    std::vector<mpz_class> corner(F.N, mpz_class(0));
    cover_walk(F, 0, corner, level, lo, hi);
    return hi;
}

CountInterval covering_interval(const Schedule& s, const RationalBox& center,
                                const mpq_class& r, long level, long budget) {
    if (budget < 0) throw ConfigError("budget must be >= 0");
    if (s.lambda(level) > r)
        throw ConfigError("covering level too shallow: cell side exceeds the radius");
    Frame F = make_frame(s, center, r, level);
    long base = s.level_for_radius(r);
    long cutoff = std::min(level, base + budget);
    CountInterval res{0, 0};
    std::vector<mpz_class> corner(F.N, mpz_class(0));
    cover_walk(F, 0, corner, cutoff, res.lo, res.hi);
    return res;
}

std::vector<CellAddress> cells_inside_ball(const Schedule& s, const RationalBox& center,
                                           const mpq_class& r, long level, long count) {
    if (count < 1) throw ConfigError("sample count must be >= 1");
    Frame F = make_frame(s, center, r, level);
    std::vector<CellAddress> out;
    CellAddress path;
    std::vector<mpz_class> corner(F.N, mpz_class(0));
    collect_walk(F, 0, corner, path, count, out);
    return out;
}

}
