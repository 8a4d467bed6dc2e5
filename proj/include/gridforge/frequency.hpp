#pragma once

#include <utility>
#include <vector>

#include "gridforge/rational.hpp"

namespace gridforge {

struct SweepGrid {
    double w_lo = 1e-2;
    double w_hi = 1e7;
    int points_per_decade = 400;
};

std::vector<double> log_grid(double w_lo, double w_hi, int points_per_decade);

// Phase of tf(jw) in degrees, continuous in w: accumulated from the argument
// of every zero/pole factor instead of wrapping atan2 of the whole value.
// A negative leading gain contributes -180.
class PhaseTracker {
public:
    explicit PhaseTracker(const RationalTF& tf);
    double phase_deg(double w) const;

private:
    std::vector<cplx> zeros_;
    std::vector<cplx> poles_;
    double gain_sign_offset_deg_ = 0.0;
};

struct Margin {
    double margin_deg = 0.0;
    double crossover = 0.0;  // rad/s
};

// Smallest phase margin over every unity-gain crossing on the sweep grid,
// each crossing refined by bisection in log w. Throws NoCrossover.
Margin phase_margin(const RationalTF& loop, double t0 = 0.0, const SweepGrid& grid = {});

// Phase of loop(jw) minus the transport delay w*t0, in degrees.
double delay_phase(const RationalTF& loop, double t0, double w);

struct SingularValues {
    double max = 0.0;
    double min = 0.0;
};

SingularValues singular_values(const CMat2& m);

struct GainPeak {
    double w = 0.0;
    double value = 0.0;
};

// Largest sigma_max of m(jw) over [w_lo, w_hi], refined by golden-section search.
GainPeak peak_sigma_max(const TFMatrix2& m, double w_lo, double w_hi, int points = 4000);

}  // namespace gridforge
