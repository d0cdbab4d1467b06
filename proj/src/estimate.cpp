#include "tangdim/estimate.hpp"

#include <algorithm>
#include <cstdio>

namespace tangdim {

std::string WindowInfo::describe() const {
    char buf[160];
    if (gap_hi > 0) {
        std::snprintf(buf, sizeof(buf), "levels %ld..%ld; h %.6g..%.6g; gaps %ld..%ld",
                      level_lo, level_hi, h_lo, h_hi, gap_lo, gap_hi);
    } else {
        std::snprintf(buf, sizeof(buf), "levels %ld..%ld", level_lo, level_hi);
    }
    return buf;
}

double DimensionEstimate::combined_uncertainty() const {
    return std::max({lower_tangential.uncertainty, lower_local.uncertainty,
                     upper_local.uncertainty, upper_tangential.uncertainty});
}

bool DimensionEstimate::ordering_holds() const {
    double u = combined_uncertainty();
    return lower_tangential.value - u <= lower_local.value &&
           lower_local.value <= upper_local.value &&
           upper_local.value <= upper_tangential.value + u;
}

}
