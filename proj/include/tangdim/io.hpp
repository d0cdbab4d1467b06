#pragma once

#include <string>

#include "tangdim/estimators.hpp"

namespace tangdim {

// All writers emit LF line endings and %.12g numbers; identical inputs
// produce byte-identical files.

// header: level,t,f_lo,f_hi plus mu_lo,mu_hi rational columns when exact.
void write_scale_csv(const std::string& path, const ScaleFunction& f, bool exact);

// header: t,h,g_lo_over_h,g_hi_over_h
void write_slopes_csv(const std::string& path, const SlopeSurface& surf);

// header: quantity,value,uncertainty,window
void write_dims_csv(const std::string& path, const DimensionEstimate& dims);

// Static line plot of f(t)/t with one shaded horizontal band per level gap.
void write_scale_svg(const std::string& path, const ScaleFunction& f,
                     const SlopeSurface& surf);

}
