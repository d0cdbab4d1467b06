#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tangdim/errors.hpp"
#include "tangdim/estimators.hpp"
#include "tangdim/rational.hpp"
#include "tangdim/selfsimilar.hpp"

namespace py = pybind11;

namespace {

using namespace tangdim;

// A source string is either schedule text (it contains a newline or a dim
// directive) or a generator/measure expression.
MeasureExpr load_source(const std::string& src) {
    if (src.find('\n') != std::string::npos || src.rfind("dim ", 0) == 0)
        return MeasureExpr::base(Schedule::parse_text(src, "<python>"));
    return MeasureExpr::parse(src);
}

py::dict estimate_to_dict(const Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["uncertainty"] = e.uncertainty;
    d["window"] = e.window.describe();
    return d;
}

py::dict dims_to_dict(const DimensionEstimate& dims) {
    py::dict d;
    d["lower_tangential"] = estimate_to_dict(dims.lower_tangential);
    d["lower_local"] = estimate_to_dict(dims.lower_local);
    d["upper_local"] = estimate_to_dict(dims.upper_local);
    d["upper_tangential"] = estimate_to_dict(dims.upper_tangential);
    d["combined_uncertainty"] = dims.combined_uncertainty();
    d["ordering_holds"] = dims.ordering_holds();
    return d;
}

mpq_class rational_arg(const std::string& text) {
    try {
        return parse_rational(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad rational '" + text + "'");
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Certified dimension estimates for grid-schedule fractals";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ScheduleParseError>(m, "ScheduleParseError",
                                               PyExc_ValueError);
    py::register_exception<ResolutionError>(m, "ResolutionError",
                                            PyExc_RuntimeError);
    py::register_exception<EstimatorError>(m, "EstimatorError",
                                           PyExc_RuntimeError);

    m.def(
        "oracle",
        [](const std::string& source, long depth, long k_min) {
            return dims_to_dict(oracle_dims(load_source(source).schedule(),
                                            depth, k_min));
        },
        py::arg("source"), py::arg("depth") = 400, py::arg("k_min") = 100,
        "Dimension values from schedule counts alone");

    m.def(
        "moran",
        [](const std::vector<std::string>& ratios, double tol) {
            std::vector<mpq_class> qs;
            for (const std::string& r : ratios) qs.push_back(rational_arg(r));
            double residual = 0;
            double d = moran_dimension(qs, tol, &residual);
            return py::make_tuple(d, residual);
        },
        py::arg("ratios"), py::arg("tol") = 1e-10,
        "Solve sum ratios^d = 1; returns (d, residual)");

    m.def(
        "ball",
        [](const std::string& source, const std::string& point,
           const std::string& radius, long level, long guard) {
            MeasureExpr e = load_source(source);
            MeasurePoint x = MeasurePoint::parse(e, point);
            MeasureInterval mu =
                ball_measure(e, x, rational_arg(radius), level, guard);
            py::dict d;
            d["mu_lo"] = to_double(mu.lo);
            d["mu_hi"] = to_double(mu.hi);
            d["mu_lo_exact"] = rational_str(mu.lo);
            d["mu_hi_exact"] = rational_str(mu.hi);
            return d;
        },
        py::arg("source"), py::arg("point"), py::arg("radius"),
        py::arg("level"), py::arg("guard") = 4,
        "Certified ball mass bracket at an explicit radius and cell level");

    m.def(
        "scale_samples",
        [](const std::string& source, const std::string& point, long depth,
           long guard) {
            MeasureExpr e = load_source(source);
            MeasurePoint x = MeasurePoint::parse(e, point);
            ScaleFunction f = f_samples(e, x, depth, guard);
            py::list rows;
            for (const ScaleSample& s : f.samples) {
                py::dict d;
                d["level"] = s.level;
                d["t"] = s.t;
                d["f_lo"] = s.f_lo;
                d["f_hi"] = s.f_hi;
                d["mu_lo_exact"] = rational_str(s.mu.lo);
                d["mu_hi_exact"] = rational_str(s.mu.hi);
                rows.append(d);
            }
            return rows;
        },
        py::arg("source"), py::arg("point") = "", py::arg("depth") = 60,
        py::arg("guard") = 4, "Scale-function samples at natural scales");

    m.def(
        "estimate",
        [](const std::string& source, const std::string& point, long depth,
           long guard, double h_min, double tail_fraction) {
            MeasureExpr e = load_source(source);
            MeasurePoint x = MeasurePoint::parse(e, point);
            return dims_to_dict(
                estimate_dimensions(e, x, depth, guard, h_min, tail_fraction)
                    .dims);
        },
        py::arg("source"), py::arg("point") = "", py::arg("depth") = 60,
        py::arg("guard") = 4, py::arg("h_min") = 0.0,
        py::arg("tail_fraction") = 0.5,
        "Dimension estimates from certified ball masses");

    m.def(
        "covering_count",
        [](const std::string& source, const std::string& point,
           const std::string& radius, long level, long guard) {
            MeasureExpr e = load_source(source);
            const Schedule& s = e.schedule();
            PointAddress x = PointAddress::parse(point, s.dimension());
            mpz_class n =
                covering_count(s, x, rational_arg(radius), level, guard);
            return py::reinterpret_steal<py::object>(
                PyLong_FromString(n.get_str().c_str(), nullptr, 10));
        },
        py::arg("source"), py::arg("point"), py::arg("radius"),
        py::arg("level"), py::arg("guard") = 4,
        "Kept cells of `level` meeting the closed ball");
}
