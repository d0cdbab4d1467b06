#include "tangdim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "tangdim/errors.hpp"
#include "tangdim/rational.hpp"

namespace tangdim {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void write_scale_csv(const std::string& path, const ScaleFunction& f, bool exact) {
    std::ofstream out = open_out(path);
    out << "level,t,f_lo,f_hi";
    if (exact) out << ",mu_lo,mu_hi";
    out << "\n";
    for (const ScaleSample& s : f.samples) {
        out << s.level << ',' << num(s.t) << ',' << num(s.f_lo) << ','
            << num(s.f_hi);
        if (exact)
            out << ',' << rational_str(s.mu.lo) << ',' << rational_str(s.mu.hi);
        out << "\n";
    }
}

void write_slopes_csv(const std::string& path, const SlopeSurface& surf) {
    std::ofstream out = open_out(path);
    out << "t,h,g_lo_over_h,g_hi_over_h\n";
    for (const SlopePoint& p : surf.points)
        out << num(p.t) << ',' << num(p.h) << ',' << num(p.lo) << ','
            << num(p.hi) << "\n";
}

void write_dims_csv(const std::string& path, const DimensionEstimate& dims) {
    std::ofstream out = open_out(path);
    out << "quantity,value,uncertainty,window\n";
    const std::pair<const char*, const Estimate*> rows[] = {
        {"lower_tangential", &dims.lower_tangential},
        {"lower_local", &dims.lower_local},
        {"upper_local", &dims.upper_local},
        {"upper_tangential", &dims.upper_tangential},
    };
    for (const auto& [name, est] : rows)
        out << name << ',' << num(est->value) << ',' << num(est->uncertainty)
            << ',' << est->window.describe() << "\n";
}

void write_scale_svg(const std::string& path, const ScaleFunction& f,
                     const SlopeSurface& surf) {
    const double W = 800, H = 500, ML = 60, MR = 20, MT = 20, MB = 40;

    std::vector<std::pair<double, double>> lo_pts, hi_pts;
    double t0 = 0, t1 = 1, v0 = 0, v1 = 1;
    bool first = true;
    for (const ScaleSample& s : f.samples) {
        if (!std::isfinite(s.f_hi)) continue;
        double vlo = s.f_lo / s.t, vhi = s.f_hi / s.t;
        lo_pts.push_back({s.t, vlo});
        hi_pts.push_back({s.t, vhi});
        if (first) {
            t0 = t1 = s.t;
            v0 = vlo;
            v1 = vhi;
            first = false;
        } else {
            t0 = std::min(t0, s.t);
            t1 = std::max(t1, s.t);
            v0 = std::min(v0, vlo);
            v1 = std::max(v1, vhi);
        }
    }
    std::map<long, std::pair<double, double>> bands;
    for (const SlopePoint& p : surf.points) {
        auto [it, fresh] = bands.try_emplace(p.gap, p.lo, p.hi);
        if (!fresh) {
            it->second.first = std::min(it->second.first, p.lo);
            it->second.second = std::max(it->second.second, p.hi);
        }
        v0 = std::min(v0, p.lo);
        v1 = std::max(v1, p.hi);
    }
    if (first || t1 <= t0) throw ConfigError("nothing to plot");
    double pad = 0.05 * (v1 - v0 + 1e-9);
    v0 -= pad;
    v1 += pad;

    auto sx = [&](double t) { return ML + (t - t0) / (t1 - t0) * (W - ML - MR); };
    auto sy = [&](double v) { return H - MB - (v - v0) / (v1 - v0) * (H - MT - MB); };
    auto coord = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto polyline = [&](const std::vector<std::pair<double, double>>& pts,
                        const char* color) {
        std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                        "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [t, v] : pts)
            s += coord(sx(t)) + "," + coord(sy(v)) + " ";
        s += "\"/>\n";
        return s;
    };

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W
        << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (const auto& [gap, band] : bands) {
        double ytop = sy(band.second), ybot = sy(band.first);
        out << "<rect x=\"" << coord(ML) << "\" y=\"" << coord(ytop)
            << "\" width=\"" << coord(W - ML - MR) << "\" height=\""
            << coord(std::max(1.0, ybot - ytop))
            << "\" fill=\"#888888\" opacity=\"0.12\"/>\n";
    }
    out << polyline(lo_pts, "#1f77b4");
    out << polyline(hi_pts, "#d62728");
    out << "<line x1=\"" << coord(ML) << "\" y1=\"" << coord(H - MB)
        << "\" x2=\"" << coord(W - MR) << "\" y2=\"" << coord(H - MB)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << coord(ML) << "\" y1=\"" << coord(MT) << "\" x2=\""
        << coord(ML) << "\" y2=\"" << coord(H - MB) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(W / 2) << "\" y=\"" << coord(H - 10)
        << "\" font-size=\"14\" text-anchor=\"middle\">t</text>\n";
    out << "<text x=\"15\" y=\"" << coord(H / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
           "15 "
        << coord(H / 2) << ")\">f(t)/t</text>\n";
    out << "</svg>\n";
}

}
