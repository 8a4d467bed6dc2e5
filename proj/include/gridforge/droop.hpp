#pragma once

#include <Eigen/Dense>
#include <optional>

#include "gridforge/rational.hpp"

namespace gridforge {

using Mat2 = Eigen::Matrix2d;

// Line seen from the inverter at fundamental frequency.
// Invariants: Zbar = hypot(R, X), phi = atan2(X, R), Zbar > 0, v2 > 0.
struct LinePhasor {
    double Zbar = 0.0;
    double phi = 0.0;
    double R = 0.0;
    double X = 0.0;
    double v2 = 0.0;
    double omega0 = 0.0;

    static LinePhasor from_rx(double R, double X, double v2, double omega0);
    double rho() const { return v2 / Zbar; }
};

struct PowerPair {
    double P = 0.0;
    double Q = 0.0;
    bool linear_valid = true;
};

// u = [dv, v2*delta]; `valid` marks the small-signal region |delta| < 0.2 rad
// and |dv|/v2 < 0.1.
struct DroopInput {
    double dv = 0.0;
    double vdelta = 0.0;
    bool valid = true;

    static DroopInput make(double dv, double delta, double v2);
};

// Droop law in loop-ready form: Lambda*K_phi = pre * Lambda * k, with
// Lambda = diag(1, 1/s). The integrator row stays structural so that k and
// pre are constant matrices and DC manipulations never divide by s.
struct DroopMatrix {
    Mat2 k = Mat2::Zero();
    Mat2 pre = Mat2::Identity();
    int integrator_row = 1;

    TFMatrix2 lambda_k() const;
};

// Classic laws expressed on the [dv, v2*delta] output, so the v2 factor of
// the angle channel is folded into the constant matrix.
DroopMatrix droop_k90(double kp, double kq, double v2);
DroopMatrix droop_k0(double kp, double kq, double v2);

PowerPair power_flow(double v1, double v2, double delta, const LinePhasor& line);
Mat2 h_matrix(double phi);
Mat2 rotation(double angle);
PowerPair linearized_power(const DroopInput& u, const LinePhasor& line);

// Generalized law for `line` that reproduces the closed loop of k0 on line0.
DroopMatrix droop_rotation(const DroopMatrix& k0, const LinePhasor& line0, const LinePhasor& line);

// (rho^-1 H_phi + Lambda K)^-1 Lambda K, the map from p0 + K^-1 d to p.
TFMatrix2 quasi_static_loop(const DroopMatrix& k, const LinePhasor& line);

struct DynamicDroop {
    RationalTF kp;    // droop transfer function acting on P0 - P
    RationalTF loop;  // resulting L_P, crossing unity at wc
    double gain = 0.0;
};

// Lead-compensated active-power droop; the loop gain is normalized so that
// |L_P(j wc)| = 1, which puts the lead maximum at the crossover.
DynamicDroop dynamic_droop_lead(const LinePhasor& line, double wc, double a);

struct DelayMargins {
    std::optional<double> marginP;  // degrees; empty when |L_P| never crosses 1
    std::optional<double> marginQ;
    RationalTF LP;
    RationalTF LQ;
};

// L_P = rho * k21 * Tf / s and L_Q = rho * k12 * Tv for an inductive-form law,
// each with the transport delay e^{-s t0} folded into the margin.
DelayMargins delay_limited_margin(const DroopMatrix& k, const LinePhasor& line, double t0,
                                  const RationalTF& Tv, const RationalTF& Tf);

}  // namespace gridforge
