#pragma once

#include <string>

namespace tangdim {

// Where an estimate came from: every result is a statement about a finite
// window, never about the underlying limit.
struct WindowInfo {
    long level_lo = 0;
    long level_hi = 0;
    double h_lo = 0.0;  // log-scale gap range used for slopes; 0 when unused
    double h_hi = 0.0;
    long gap_lo = 0;    // same range in whole levels; 0 when unused
    long gap_hi = 0;

    std::string describe() const;  // semicolon-separated, safe inside CSV
};

struct Estimate {
    double value = 0.0;
    double uncertainty = 0.0;
    WindowInfo window;
};

// The four dimension readings of one run, ordered as they bracket:
// lower_tangential <= lower_local <= upper_local <= upper_tangential
// up to the combined uncertainty.
struct DimensionEstimate {
    Estimate lower_tangential;
    Estimate lower_local;
    Estimate upper_local;
    Estimate upper_tangential;

    double combined_uncertainty() const;
    bool ordering_holds() const;  // with the combined-uncertainty cushion
};

}
