#pragma once

#include "gridforge/frequency.hpp"
#include "gridforge/plant.hpp"
#include "gridforge/rational.hpp"
#include "gridforge/synthesis.hpp"

namespace gridforge {

// Invariants: X = L*omega0, wn = Zbar/L, xi = R/Zbar.
struct LineModel {
    double R = 0.0;
    double L = 0.0;
    double omega0 = 0.0;
    double X = 0.0;
    double wn = 0.0;
    double xi = 0.0;

    static LineModel from_rl(double R, double L, double omega0);
    static LineModel from_rx(double R, double X, double omega0);
    double Zbar() const { return std::hypot(R, X); }
};

// Line current dynamics in the PCC-aligned frame driven by u = [dv, v2*delta].
DQPair line_derivatives(const DQPair& i, double dv, double vdelta, const LineModel& m);

TFMatrix2 line_tf(const LineModel& m);

// diag(1, 1/s)
TFMatrix2 lambda_matrix();

// The feedback law assembled from the individual compensators. Throws
// AssumptionViolated if the inner loop deviates from unity by 5% or more
// anywhere below w_band.
TFMatrix2 hsi_feedback_law(const ControllerSet& cs, double w_band);

// Closed form of K_i^-1 for the normalized family.
TFMatrix2 ki_inverse(const ControllerSet& cs);

struct LoopPair {
    TFMatrix2 S;
    TFMatrix2 T;
};

// S = (I + G Lambda Ki)^-1, T = I - S. Throws SingularLoop.
LoopPair sensitivity_pair(const TFMatrix2& G, const TFMatrix2& Ki);

struct DCPerformance {
    double smax = 0.0, smin = 0.0, tmax = 0.0, tmin = 0.0;
};

DCPerformance dc_performance(double gamma_d, const LineModel& line);

// Singular values of S and T at DC computed from the rational objects.
DCPerformance dc_performance_numeric(const LoopPair& lp);

// T * Ki^-1, the map from the grid disturbance to the injected current.
TFMatrix2 grid_disturbance_response(const ControllerSet& cs, const LineModel& line);

struct SigmaRow {
    double w = 0.0;
    double smax = 0.0, smin = 0.0, tmax = 0.0, tmin = 0.0;
};

std::vector<SigmaRow> sigma_sweep(const LoopPair& lp, const std::vector<double>& w);

// Closed-loop response of line + feedback law to d = e_col * sin(w t),
// integrated in the time domain. Returns the steady complex amplitude of
// each current component (phasor convention: x(t) = Im(X e^{j w t})).
struct InjectionResult {
    cplx id;
    cplx iq;
};

InjectionResult simulate_injection(const ControllerSet& cs, const LineModel& line, int col, double w);

}  // namespace gridforge
