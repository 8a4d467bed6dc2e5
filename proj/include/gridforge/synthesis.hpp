#pragma once

#include <optional>
#include <string>

#include "gridforge/droop.hpp"
#include "gridforge/plant.hpp"
#include "gridforge/rational.hpp"

namespace gridforge {

// Which gains the line normalization is allowed to populate.
//   resistive: alpha_d = alpha_q = 0
//   inductive: beta_d = 0 (PI voltage loop on d)
//   general:   every gain from the normalization
enum class DesignFamily { resistive, inductive, general };

const char* to_string(DesignFamily f);
DesignFamily family_from_string(const std::string& s);

struct DesignSpec {
    double wc = 0.0;        // voltage-loop crossover, rad/s
    double pm = 53.0;       // target phase margin, degrees, in (0, 90)
    double beta_lag = 0.01; // lag ratio when the family leaves beta_d free
    LinePhasor line;
    InverterParams inverter;
    double gamma_d = 0.0;   // ohms
    double gamma_q = 0.0;   // ohms
    DesignFamily family = DesignFamily::inductive;

    void validate() const;  // throws Infeasible for out-of-range pm/wc, invalid_argument otherwise
};

struct ControllerSet {
    RationalTF Kc, Kv_d, Kv_q, Keta_d, Keta_q, H_pll;
    std::optional<RationalTF> notch;  // H_n, multiplies the voltage compensators
    std::optional<RationalTF> pr;     // H_n^-1, multiplies the coupling filters
    double notch_w = 0.0, notch_xi = 0.0, notch_xi0 = 0.0;
    double tau = 0.0;
    double k = 0.0;
    double z = 0.0;
    double beta_d = 0.0, beta_q = 0.0;
    double alpha_d = 0.0, alpha_q = 0.0;
    double gamma_d = 0.0, gamma_q = 0.0;
    DesignFamily family = DesignFamily::inductive;
    // Plant values the feedback linearization uses.
    double L_nom = 0.0, R_nom = 0.0, C_nom = 0.0;

    // Voltage compensators and coupling filters with any resonance
    // augmentation applied.
    RationalTF Kv_d_eff() const;
    RationalTF Kv_q_eff() const;
    RationalTF Keta_d_eff() const;
    RationalTF Keta_q_eff() const;
};

struct InnerDesign {
    RationalTF Kc;
    RationalTF Tc;  // 1/(tau s + 1) after explicit cancellation
    RationalTF Lc;  // 1/(tau s)
};

InnerDesign design_inner(const InverterParams& p, double tau);

struct LagDesign {
    RationalTF Kv_d;
    RationalTF loop;  // L^d through the inner loop and capacitor
    double tau = 0.0, z = 0.0, k = 0.0, beta_d = 0.0;
};

// Places the lead maximum of the lag loop at wc with the requested phase, then
// scales k so |L^d(j wc)| = 1. beta_d may be overridden (spec.beta_lag otherwise).
LagDesign design_lag(const DesignSpec& spec, std::optional<double> beta_d = std::nullopt);

RationalTF lag_loop(double k, double z, double tau, double beta_d, double C);

RationalTF design_pi_q(double k, double z);

struct NormalizedGains {
    double alpha_d = 0.0, alpha_q = 0.0, beta_d = 0.0, beta_q = 0.0;
};

NormalizedGains normalize_gains(double gamma_d, double gamma_q, const LinePhasor& line, double k);

RationalTF design_pll(double beta_q, double z);

struct CouplingPair {
    RationalTF Keta_d;
    RationalTF Keta_q;  // includes H^-1, so it carries the blocking zero when beta_q > 0
};

CouplingPair design_coupling(double alpha_d, double alpha_q, double beta_q, double z);

// Full controller set for one inverter.
ControllerSet synthesize(const DesignSpec& spec);

// Rebuilds every transfer function of cs from its scalar gains (tau, k, z,
// alpha/beta, nominal plant values and notch parameters).
void assemble(ControllerSet& cs);

TFMatrix2 ki_matrix(const ControllerSet& cs);

struct Resonance {
    double w_i = 0.0;
    double xi_i = 0.0;
};

Resonance resonance_params(const ControllerSet& cs, const LinePhasor& line);

struct NotchPair {
    RationalTF Hn;
    RationalTF Hpr;
};

NotchPair design_notch(double w_i, double xi_i, double xi_0);

// Returns a copy of cs with the notch/PR pair for (w_i, xi_i, xi_0) installed.
ControllerSet with_notch(const ControllerSet& cs, double w_i, double xi_i, double xi_0);

struct DroopDeviation {
    double dv = 0.0;  // v_C^d - v0, volts
    double dw = 0.0;  // omega - omega0, rad/s
};

// Steady voltage/frequency deviation produced by a constant mismatch
// di = i0 - i_load. The resistive and inductive forms keep only the terms
// their family retains; `general` keeps both.
DroopDeviation steady_state_droop(const ControllerSet& cs, DesignFamily form, const DQPair& di, double v2);

// Same deviation through the polar form gamma*|di|*{cos,sin}(phi + angle(di)).
DroopDeviation steady_state_droop_polar(double gamma_d, double gamma_q, double phi, const DQPair& di,
                                        double v2);

// |di| recovered from a deviation pair.
double mismatch_norm(double gamma_d, double gamma_q, const DroopDeviation& dev, double v2);

}  // namespace gridforge
