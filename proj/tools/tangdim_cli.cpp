#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tangdim/errors.hpp"
#include "tangdim/estimators.hpp"
#include "tangdim/io.hpp"
#include "tangdim/rational.hpp"
#include "tangdim/selfsimilar.hpp"

namespace {

using namespace tangdim;

struct Options {
    std::string schedule_file;
    std::string generator;
    std::string point_spec;
    std::string out_dir;
    std::string ratios;
    long depth = 400;
    long guard = 4;
    long k_min = 100;
    double h_min = 0;
    double tail_fraction = 0.5;
    double tol = 1e-10;
    bool exact = false;
};

void add_source_flags(CLI::App* sub, Options& o) {
    auto* s = sub->add_option("--schedule", o.schedule_file,
                              "Schedule file to load");
    auto* g = sub->add_option(
        "--generator", o.generator,
        "Named generator or measure expression (sum/product/lipschitz)");
    s->excludes(g);
    g->excludes(s);
}

MeasureExpr load_expr(const Options& o) {
    if (!o.schedule_file.empty())
        return MeasureExpr::base(Schedule::parse_file(o.schedule_file));
    if (!o.generator.empty()) return MeasureExpr::parse(o.generator);
    throw ConfigError("a schedule source is required (--schedule or --generator)");
}

std::string resolve_out(const Options& o) {
    const char* env = std::getenv("TANGDIM_OUT");
    if (env && *env) return env;
    return o.out_dir;
}

std::filesystem::path prepare_out(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir);
    return p;
}

void print_dims(const DimensionEstimate& d) {
    const std::pair<const char*, const Estimate*> rows[] = {
        {"lower_tangential", &d.lower_tangential},
        {"lower_local", &d.lower_local},
        {"upper_local", &d.upper_local},
        {"upper_tangential", &d.upper_tangential},
    };
    for (const auto& [name, est] : rows)
        std::printf("%-17s %.9f  u=%.3g  [%s]\n", name, est->value,
                    est->uncertainty, est->window.describe().c_str());
}

void oracle_window_check(long depth, long k_min) {
    if (k_min < 1) throw ConfigError("gap floor must be >= 1");
    long k_eff = std::min(k_min, std::max<long>(1, isqrt_long(depth)));
    if (depth <= 2 * k_eff)
        throw ConfigError("window too small: depth " + std::to_string(depth) +
                          " needs to exceed twice the gap floor " +
                          std::to_string(k_eff));
}

int cmd_oracle(const Options& o) {
    oracle_window_check(o.depth, o.k_min);
    MeasureExpr e = load_expr(o);
    DimensionEstimate dims = oracle_dims(e.schedule(), o.depth, o.k_min);
    print_dims(dims);
    std::string dir = resolve_out(o);
    if (!dir.empty())
        write_dims_csv((prepare_out(dir) / "dims.csv").string(), dims);
    return 0;
}

int run_estimate(const Options& o, bool want_svg) {
    MeasureExpr e = load_expr(o);
    MeasurePoint x = MeasurePoint::parse(e, o.point_spec);
    EstimateResult est =
        estimate_dimensions(e, x, o.depth, o.guard, o.h_min, o.tail_fraction);
    print_dims(est.dims);
    std::printf("combined_uncertainty %.3g\n", est.dims.combined_uncertainty());

    std::string dir = resolve_out(o);
    if (!dir.empty()) {
        auto p = prepare_out(dir);
        write_scale_csv((p / "scale.csv").string(), est.f, o.exact);
        write_slopes_csv((p / "slopes.csv").string(), est.slopes);
        write_dims_csv((p / "dims.csv").string(), est.dims);
        if (want_svg) write_scale_svg((p / "plot.svg").string(), est.f, est.slopes);
    }
    if (!est.dims.ordering_holds()) {
        std::fprintf(stderr,
                     "ordering violated: the four estimates do not satisfy "
                     "lower_tangential - u <= lower_local <= upper_local <= "
                     "upper_tangential + u\n");
        return 5;
    }
    return 0;
}

int cmd_estimate(const Options& o) { return run_estimate(o, false); }

int cmd_export(const Options& o) {
    if (resolve_out(o).empty())
        throw ConfigError("export needs an output directory (--out)");
    int rc = run_estimate(o, true);
    std::printf("wrote %s\n", resolve_out(o).c_str());
    return rc;
}

int cmd_ball(const Options& o) {
    MeasureExpr e = load_expr(o);
    MeasurePoint x = MeasurePoint::parse(e, o.point_spec);
    std::vector<long> levels{o.depth};
    ScaleFunction f = f_samples(e, x, levels, o.guard);
    const ScaleSample& s = f.samples.front();
    std::printf("level %ld  t %.12g\n", s.level, s.t);
    std::printf("f  [%.12g, %.12g]\n", s.f_lo, s.f_hi);
    std::printf("mu [%.12g, %.12g]\n", to_double(s.mu.lo), to_double(s.mu.hi));
    if (o.exact)
        std::printf("mu_exact [%s, %s]\n", rational_str(s.mu.lo).c_str(),
                    rational_str(s.mu.hi).c_str());
    return 0;
}

int cmd_moran(const Options& o) {
    if (o.ratios.empty()) throw ConfigError("moran needs --ratios");
    std::vector<mpq_class> ratios;
    std::stringstream ss(o.ratios);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) {
            try {
                ratios.push_back(parse_rational(tok));
            } catch (const std::invalid_argument&) {
                throw ConfigError("bad ratio '" + tok + "'");
            }
        }
    double residual = 0;
    double d = moran_dimension(ratios, o.tol, &residual);
    std::printf("d %.12f residual %.3g\n", d, residual);
    return 0;
}

bool report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    return ok;
}

std::string fmt(const char* pattern, double a, double b) {
    char buf[96];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

int cmd_check(const Options& o) {
    MeasureExpr e = load_expr(o);
    const Schedule& s = e.schedule();
    MeasurePoint x = MeasurePoint::parse(e, o.point_spec);

    DimensionEstimate oracle = oracle_dims(s, o.depth, o.k_min);
    EstimateResult est =
        estimate_dimensions(e, x, o.depth, o.guard, o.h_min, o.tail_fraction);
    double u = est.dims.combined_uncertainty();
    bool all = true;

    all &= report("ordering", est.dims.ordering_holds(),
                  fmt("u=%.3g combined=%.3g", u, u));

    double agree = 0;
    const std::pair<const Estimate*, const Estimate*> quantities[] = {
        {&oracle.lower_tangential, &est.dims.lower_tangential},
        {&oracle.lower_local, &est.dims.lower_local},
        {&oracle.upper_local, &est.dims.upper_local},
        {&oracle.upper_tangential, &est.dims.upper_tangential},
    };
    for (const auto& [a, b] : quantities)
        agree = std::max(agree, std::fabs(a->value - b->value));
    all &= report("oracle_agreement", agree <= std::max(0.1, u),
                  fmt("max_delta=%.4f allowed=%.4f", agree, std::max(0.1, u)));

    double flag_threshold = 2.0 * s.dimension() + 1.0;
    DoublingReport doubling = doubling_diagnostic(est.f, flag_threshold);
    bool doubling_ok =
        est.dims.upper_tangential.value <= doubling.max_log2_ratio + u;
    all &= report("doubling_bound", doubling_ok,
                  fmt("upper_tangential=%.4f log2_ratio_max=%.4f",
                      est.dims.upper_tangential.value, doubling.max_log2_ratio));
    if (doubling.any_flagged)
        std::printf("INFO doubling_flagged_levels present\n");

    long base_level = std::max<long>(4, std::min<long>(20, o.depth / 5));
    std::vector<long> levels{base_level, base_level + 2};
    NeighborhoodReport small = newassum_check(s, x.legs.front(), levels, o.guard, 16);
    NeighborhoodReport big = newassum_check(s, x.legs.front(), levels, o.guard, 32);
    bool stable = !small.degenerate && !big.degenerate &&
                  big.c_max <= 1.10 * small.c_max;
    all &= report("neighborhood_ratio", stable,
                  fmt("c16=%.4f c32=%.4f", small.c_max, big.c_max));

    MetricDims md = metric_tangential_dims(s, x.legs.front(),
                                           std::min<long>(o.depth, 240), 4, 8,
                                           o.tail_fraction);
    double dlo = std::fabs(md.lower.value - est.dims.lower_tangential.value);
    double dhi = std::fabs(md.upper.value - est.dims.upper_tangential.value);
    double allowed = std::max(0.15, u + md.lower.uncertainty);
    all &= report("metric_agreement", dlo <= allowed && dhi <= allowed,
                  fmt("delta_lower=%.4f delta_upper=%.4f", dlo, dhi));

    HausdorffReport hs =
        hausdorff_nontriviality(s, oracle.lower_local.value, o.depth);
    std::printf("INFO hausdorff min=%.4f at_level=%ld drifting=%s\n",
                hs.min_value, hs.min_level, hs.drifting ? "yes" : "no");

    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified dimension estimates for grid-schedule fractals"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file");

    Options o;
    struct Cmd {
        const char* name;
        const char* help;
        int (*run)(const Options&);
        bool source, point, window, moran_flags;
    };
    const Cmd cmds[] = {
        {"oracle", "Dimension values from schedule counts alone", cmd_oracle,
         true, false, true, false},
        {"estimate", "Dimension estimates from certified ball masses",
         cmd_estimate, true, true, true, false},
        {"ball", "One certified ball mass at the natural scale of --depth",
         cmd_ball, true, true, false, false},
        {"check", "Property suite; exits 1 when any property fails", cmd_check,
         true, true, true, false},
        {"moran", "Solve sum ratios^d = 1", cmd_moran, false, false, false,
         true},
        {"export", "Estimate and write CSV tables plus an SVG plot",
         cmd_export, true, true, true, false},
    };

    int (*chosen)(const Options&) = nullptr;
    for (const Cmd& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        if (c.source) add_source_flags(sub, o);
        if (c.point)
            sub->add_option("--point", o.point_spec,
                            "Point address ('&'-separated legs for composites)");
        sub->add_option("--depth", o.depth, "Deepest sample level");
        if (c.source) {
            sub->add_option("--guard", o.guard, "Extra resolution levels");
            sub->add_flag("--exact", o.exact,
                          "Also emit exact rational ball masses");
        }
        if (c.window) {
            sub->add_option("--h-min", o.h_min,
                            "Smallest slope baseline (0 = auto)");
            sub->add_option("--k-min", o.k_min, "Oracle gap floor in levels");
            sub->add_option("--tail-fraction", o.tail_fraction,
                            "Trailing sample fraction used for limits");
        }
        if (c.moran_flags) {
            sub->add_option("--ratios", o.ratios,
                            "Comma-separated contraction ratios");
            sub->add_option("--tol", o.tol, "Residual tolerance");
        }
        sub->add_option("--out", o.out_dir, "Output directory for CSV/SVG");
        sub->callback([&chosen, &c]() { chosen = c.run; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return chosen(o);
    } catch (const ScheduleParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ResolutionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const EstimatorError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
