#pragma once

#include "gridforge/droop.hpp"
#include "gridforge/rational.hpp"

namespace gridforge {

struct DQPair {
    double d = 0.0;
    double q = 0.0;
};

// Stationary-frame pair; alpha is the physical single-phase signal.
struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

struct InverterParams {
    double C = 0.0;
    double L = 0.0;
    double R = 0.0;
    double vdc = 0.0;

    void validate() const;  // all strictly positive, else std::invalid_argument
};

struct InverterState {
    DQPair iL;
    DQPair vC;
    double theta = 0.0;  // unwrapped frame angle
    double pll_aux = 0.0;
};

// Feedback-linearized current-loop inputs plus the frame rate.
struct ControlInput {
    double u_d = 0.0;
    double u_q = 0.0;
    double theta_dot = 0.0;
};

struct InverterDerivative {
    DQPair diL;
    DQPair dvC;
    double dtheta = 0.0;
};

// d + jq = (alpha + j beta) e^{-j theta}
DQPair dq_transform(double alpha, double beta, double theta);
AlphaBeta dq_inverse(const DQPair& x, double theta);

// Averaged dynamics with the rotating-frame inductor coupling absorbed into u,
// so each current axis is first order in u.
InverterDerivative plant_derivatives(const InverterState& x, const ControlInput& u,
                                     const DQPair& i_load, const InverterParams& p);

struct Modulation {
    double md = 0.0;
    double mq = 0.0;
    bool saturated = false;  // |m| > 1
};

Modulation modulation_from_u(const ControlInput& u, const InverterState& x, const InverterParams& p);
// Inverse map: the u implied by a modulation pair.
ControlInput u_from_modulation(const Modulation& m, double theta_dot, const InverterState& x,
                               const InverterParams& p);

struct SaturationBounds {
    double lo_d = 0.0, hi_d = 0.0;
    double lo_q = 0.0, hi_q = 0.0;

    ControlInput clamp(const ControlInput& u) const;
};

// Per-axis interval of u reachable with |m_d|, |m_q| <= 1.
SaturationBounds saturation_bounds(const InverterState& x, double theta_dot, const InverterParams& p);

// 1 / (L s + R)
RationalTF current_plant(const InverterParams& p);

PowerPair instantaneous_power(const DQPair& vC, const DQPair& i_load);

}  // namespace gridforge
