#include "tangdim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>

#include "tangdim/errors.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

GridStep::GridStep(int dimension, int m, std::vector<Cell> kept)
    : dim_(dimension), m_(m), kept_(std::move(kept)) {
    if (dim_ < 1) throw ScheduleParseError("step dimension must be >= 1");
    if (m_ < 2) throw ScheduleParseError("subdivision factor must be >= 2");
    if (kept_.size() < 2)
        throw ScheduleParseError("a step must keep at least 2 cells");
    for (const Cell& c : kept_) {
        if (static_cast<int>(c.size()) != dim_)
            throw ScheduleParseError("kept cell has wrong coordinate count");
        for (int v : c)
            if (v < 0 || v >= m_)
                throw ScheduleParseError("kept cell coordinate out of range [0, m)");
    }
    std::sort(kept_.begin(), kept_.end());
    if (std::adjacent_find(kept_.begin(), kept_.end()) != kept_.end())
        throw ScheduleParseError("duplicate kept cell");
    double capacity = std::pow(static_cast<double>(m_), dim_);
    if (static_cast<double>(kept_.size()) > capacity)
        throw ScheduleParseError("more kept cells than the grid has");
}

bool GridStep::contains(const Cell& c) const {
    return std::binary_search(kept_.begin(), kept_.end(), c);
}

double GridStep::slope() const {
    return std::log(static_cast<double>(p())) / std::log(static_cast<double>(m_));
}

GridStep cantor_step() { return GridStep(1, 3, {{0}, {2}}); }

GridStep carpet_step() {
    std::vector<Cell> kept;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!(i == 1 && j == 1)) kept.push_back({i, j});
    return GridStep(2, 3, kept);
}

GridStep vicsek_step() {
    std::vector<Cell> kept;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if ((i + j) % 2 == 0) kept.push_back({i, j});
    return GridStep(2, 3, kept);
}

int carpet_vicsek_q(long j) {
    if (j < 1) throw ConfigError("levels are 1-based");
    // blocks of consecutive equal q tile the levels at triangular-number
    // boundaries; odd blocks are carpet, even blocks vicsek
    long r = (isqrt_long(8 * j + 1) - 1) / 2;
    while (r * (r + 1) / 2 < j) ++r;
    while (r >= 1 && (r - 1) * r / 2 >= j) --r;
    return (r % 2 == 1) ? 1 : 2;
}

struct Schedule::Impl {
    int dim = 0;
    std::string desc;
    std::vector<GridStep> prefix;
    int period = 0;  // > 0: the last `period` prefix steps repeat forever
    std::function<GridStep(long)> block;  // tail-relative block rule

    mutable std::mutex mu;
    mutable std::deque<GridStep> cache;   // steps for levels 1..cache.size()
    mutable std::vector<double> lp{0.0};  // lp[n] = log P_n
    mutable std::vector<double> lm{0.0};  // lm[n] = log 1/Lambda_n

    void extend(long n) const {
        while (static_cast<long>(cache.size()) < n) {
            long level = static_cast<long>(cache.size()) + 1;
            if (level <= static_cast<long>(prefix.size())) {
                cache.push_back(prefix[level - 1]);
            } else if (period > 0) {
                long base = static_cast<long>(prefix.size()) - period;
                long idx = base + (level - static_cast<long>(prefix.size()) - 1) % period;
                cache.push_back(prefix[idx]);
            } else {
                GridStep st = block(level - static_cast<long>(prefix.size()));
                if (st.dimension() != dim)
                    throw ScheduleParseError("generator step dimension mismatch");
                cache.push_back(std::move(st));
            }
            const GridStep& st = cache.back();
            lp.push_back(lp.back() + std::log(static_cast<double>(st.p())));
            lm.push_back(lm.back() + std::log(static_cast<double>(st.m())));
        }
    }
};

Schedule Schedule::periodic(int dimension, std::vector<GridStep> steps, int tail_len) {
    if (steps.empty()) throw ScheduleParseError("schedule needs at least one step");
    if (tail_len < 1 || tail_len > static_cast<int>(steps.size()))
        throw ScheduleParseError("periodic tail length out of range");
    for (const GridStep& st : steps)
        if (st.dimension() != dimension)
            throw ScheduleParseError("step dimension differs from schedule dimension");
    auto impl = std::make_shared<Impl>();
    impl->dim = dimension;
    impl->prefix = std::move(steps);
    impl->period = tail_len;
    impl->desc = "periodic[" + std::to_string(impl->prefix.size()) + "," +
                 std::to_string(tail_len) + "]";
    return Schedule(impl);
}

Schedule Schedule::named(const std::string& generator) {
    auto impl = std::make_shared<Impl>();
    impl->desc = generator;
    if (generator == "cantor") {
        impl->dim = 1;
        impl->prefix = {cantor_step()};
        impl->period = 1;
    } else if (generator == "carpet") {
        impl->dim = 2;
        impl->prefix = {carpet_step()};
        impl->period = 1;
    } else if (generator == "vicsek") {
        impl->dim = 2;
        impl->prefix = {vicsek_step()};
        impl->period = 1;
    } else if (generator == "carpet-vicsek") {
        impl->dim = 2;
        impl->block = [](long j) {
            return carpet_vicsek_q(j) == 1 ? carpet_step() : vicsek_step();
        };
    } else if (generator == "alternating-cv") {
        impl->dim = 2;
        impl->block = [](long j) { return (j % 2 == 1) ? carpet_step() : vicsek_step(); };
    } else {
        throw ScheduleParseError("unknown generator: " + generator);
    }
    return Schedule(impl);
}

namespace {

std::string strip(const std::string& line) {
    std::string s = line.substr(0, line.find('#'));
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Cell parse_cell_token(const std::string& tok, int dim, const std::string& where) {
    Cell c;
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) {
        size_t used = 0;
        int v;
        try {
            v = std::stoi(part, &used);
        } catch (const std::exception&) {
            throw ScheduleParseError(where + ": bad cell coordinate '" + part + "'");
        }
        if (used != part.size())
            throw ScheduleParseError(where + ": bad cell coordinate '" + part + "'");
        c.push_back(v);
    }
    if (static_cast<int>(c.size()) != dim)
        throw ScheduleParseError(where + ": cell '" + tok + "' has " +
                                 std::to_string(c.size()) + " coordinates, schedule dim is " +
                                 std::to_string(dim));
    return c;
}

}  // namespace

Schedule Schedule::parse_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    int dim = 0;
    bool saw_dim = false;
    std::vector<GridStep> steps;
    int cur_m = 0;
    std::vector<Cell> cur_kept;
    bool in_step = false;
    int period = 0;
    std::string generator;
    bool saw_tail = false;

    auto where = [&]() { return origin + ":" + std::to_string(lineno); };
    auto line_done = [&](std::istringstream& ls) {
        std::string extra;
        if (ls >> extra)
            throw ScheduleParseError(where() + ": unexpected token '" + extra +
                                     "' (each directive goes on its own line)");
    };
    auto close_step = [&]() {
        if (!in_step) return;
        steps.emplace_back(dim, cur_m, std::move(cur_kept));
        cur_kept.clear();
        in_step = false;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip(raw);
        if (line.empty()) continue;
        if (saw_tail)
            throw ScheduleParseError(where() + ": content after the tail directive");
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "dim") {
            if (saw_dim) throw ScheduleParseError(where() + ": duplicate dim line");
            if (!(ls >> dim) || dim < 1)
                throw ScheduleParseError(where() + ": dim needs a positive integer");
            line_done(ls);
            saw_dim = true;
        } else if (word == "step") {
            if (!saw_dim) throw ScheduleParseError(where() + ": dim must come first");
            close_step();
            std::string rest;
            ls >> rest;
            if (rest.rfind("m=", 0) != 0)
                throw ScheduleParseError(where() + ": step needs m=<int>");
            try {
                cur_m = std::stoi(rest.substr(2));
            } catch (const std::exception&) {
                throw ScheduleParseError(where() + ": bad subdivision factor '" + rest + "'");
            }
            line_done(ls);
            in_step = true;
        } else if (word == "keep") {
            if (!in_step) throw ScheduleParseError(where() + ": keep outside a step block");
            std::string tok;
            while (ls >> tok) cur_kept.push_back(parse_cell_token(tok, dim, where()));
        } else if (word == "periodic") {
            if (!saw_dim) throw ScheduleParseError(where() + ": dim must come first");
            close_step();
            if (!(ls >> period))
                throw ScheduleParseError(where() + ": periodic needs a length");
            line_done(ls);
            saw_tail = true;
        } else if (word == "generator") {
            if (!saw_dim) throw ScheduleParseError(where() + ": dim must come first");
            close_step();
            if (!(ls >> generator))
                throw ScheduleParseError(where() + ": generator needs a name");
            line_done(ls);
            saw_tail = true;
        } else {
            throw ScheduleParseError(where() + ": unknown directive '" + word + "'");
        }
    }
    if (!saw_dim) throw ScheduleParseError(origin + ": missing dim line");
    if (!saw_tail)
        throw ScheduleParseError(origin + ": missing tail directive (periodic or generator)");

    if (!generator.empty()) {
        Schedule tail = Schedule::named(generator);
        if (tail.dimension() != dim)
            throw ScheduleParseError(origin + ": generator '" + generator + "' has dimension " +
                                     std::to_string(tail.dimension()) + ", schedule says " +
                                     std::to_string(dim));
        if (steps.empty()) return tail;
        auto impl = std::make_shared<Impl>();
        impl->dim = dim;
        impl->prefix = std::move(steps);
        impl->block = [tail](long j) { return tail.step(j); };
        impl->desc = origin + "+[" + generator + "]";
        return Schedule(impl);
    }
    Schedule s = Schedule::periodic(dim, std::move(steps), period);
    return s;
}

Schedule Schedule::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScheduleParseError("cannot open schedule file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

int Schedule::dimension() const { return impl_->dim; }
const std::string& Schedule::description() const { return impl_->desc; }

const GridStep& Schedule::step(long n) const {
    if (n < 1) throw ConfigError("levels are 1-based");
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->extend(n);
    return impl_->cache[n - 1];
}

void Schedule::prefetch(long n) const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->extend(n);
}

double Schedule::log_p_cum(long n) const {
    if (n < 0) throw ConfigError("negative level");
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->extend(n);
    return impl_->lp[n];
}

double Schedule::log_m_cum(long n) const {
    if (n < 0) throw ConfigError("negative level");
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->extend(n);
    return impl_->lm[n];
}

mpz_class Schedule::p_product(long n) const {
    prefetch(n);
    mpz_class out = 1;
    for (long i = 1; i <= n; ++i) out *= step(i).p();
    return out;
}

mpz_class Schedule::m_product(long n) const {
    prefetch(n);
    mpz_class out = 1;
    for (long i = 1; i <= n; ++i) out *= step(i).m();
    return out;
}

mpq_class Schedule::lambda(long n) const {
    mpq_class q(1, m_product(n));
    q.canonicalize();
    return q;
}

long Schedule::level_for_radius(const mpq_class& r) const {
    if (r <= 0) throw ConfigError("radius must be positive");
    if (r >= 1) return 0;
    long n = 0;
    mpz_class mprod = 1;
    // Lambda_n >= r  <=>  r.den >= r.num * mprod
    while (true) {
        mpz_class next = mprod * step(n + 1).m();
        if (r.get_num() * next > r.get_den()) return n;
        mprod = next;
        ++n;
    }
}

double Schedule::min_step_slope(long n) const {
    prefetch(n);
    double lo = std::numeric_limits<double>::infinity();
    for (long i = 1; i <= n; ++i) lo = std::min(lo, step(i).slope());
    return lo;
}

DimensionEstimate oracle_dims(const Schedule& s, long n_max, long k_min) {
    if (k_min < 1) throw ConfigError("gap floor must be >= 1");
    if (n_max < 1) throw ConfigError("depth must be >= 1");
    // finite windows never isolate long pure runs unless the gap grows with
    // the depth; cap the effective gap floor at isqrt(depth)
    long k_eff = std::min(k_min, std::max<long>(1, isqrt_long(n_max)));
    if (n_max <= 2 * k_eff)
        throw ConfigError("window too small: depth " + std::to_string(n_max) +
                          " needs to exceed twice the gap floor " + std::to_string(k_eff));
    s.prefetch(n_max);
    std::vector<double> lp(n_max + 1), lm(n_max + 1);
    for (long n = 0; n <= n_max; ++n) {
        lp[n] = s.log_p_cum(n);
        lm[n] = s.log_m_cum(n);
    }

    long n0 = (n_max + 1) / 2;

    double dlo = std::numeric_limits<double>::infinity();
    double dhi = -dlo;
    for (long n = n0; n <= n_max; ++n) {
        double v = lp[n] / lm[n];
        dlo = std::min(dlo, v);
        dhi = std::max(dhi, v);
    }

    double slo = std::numeric_limits<double>::infinity();
    double shi = -slo;
    double h_lo = std::numeric_limits<double>::infinity();
    double h_hi = 0.0;
    for (long n = n0; n + k_eff <= n_max; ++n) {
        for (long k = k_eff; n + k <= n_max; ++k) {
            double h = lm[n + k] - lm[n];
            double v = (lp[n + k] - lp[n]) / h;
            slo = std::min(slo, v);
            shi = std::max(shi, v);
            h_lo = std::min(h_lo, h);
            h_hi = std::max(h_hi, h);
        }
    }
    if (!std::isfinite(slo))
        throw ConfigError("window too small: no slope pairs available");

    WindowInfo local_w;
    local_w.level_lo = n0;
    local_w.level_hi = n_max;
    WindowInfo tang_w = local_w;
    tang_w.gap_lo = k_eff;
    tang_w.gap_hi = n_max - n0;
    tang_w.h_lo = h_lo;
    tang_w.h_hi = h_hi;

    const double u = 1e-9;  // double rounding in the cumulative logs
    DimensionEstimate est;
    est.lower_tangential = {slo, u, tang_w};
    est.lower_local = {dlo, u, local_w};
    est.upper_local = {dhi, u, local_w};
    est.upper_tangential = {shi, u, tang_w};
    return est;
}

HausdorffReport hausdorff_nontriviality(const Schedule& s, double d, long n_max) {
    if (d < 0) throw ConfigError("dimension candidate must be >= 0");
    if (n_max < 3) throw ConfigError("need at least 3 levels");
    s.prefetch(n_max);
    HausdorffReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    double part_min[3] = {std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
    for (long n = 1; n <= n_max; ++n) {
        double v = s.log_p_cum(n) - d * s.log_m_cum(n);
        if (v < rep.min_value) {
            rep.min_value = v;
            rep.min_level = n;
        }
        int third = static_cast<int>((3 * (n - 1)) / n_max);
        if (third > 2) third = 2;
        part_min[third] = std::min(part_min[third], v);
    }
    for (int i = 0; i < 3; ++i) rep.thirds_min[i] = part_min[i];
    const double eps = 1e-6;
    rep.drifting = part_min[1] < part_min[0] - eps && part_min[2] < part_min[1] - eps;
    return rep;
}

}
