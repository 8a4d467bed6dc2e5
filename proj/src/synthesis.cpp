#include "gridforge/synthesis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gridforge/errors.hpp"

namespace gridforge {

const char* to_string(DesignFamily f) {
    switch (f) {
        case DesignFamily::resistive: return "resistive";
        case DesignFamily::inductive: return "inductive";
        case DesignFamily::general: return "general";
    }
    return "?";
}

DesignFamily family_from_string(const std::string& s) {
    if (s == "resistive") return DesignFamily::resistive;
    if (s == "inductive") return DesignFamily::inductive;
    if (s == "general") return DesignFamily::general;
    throw std::invalid_argument("unknown design family '" + s + "'");
}

void DesignSpec::validate() const {
    if (!(pm > 0.0 && pm < 90.0))
        throw Infeasible("phase margin must lie in (0, 90) degrees; got " + std::to_string(pm));
    if (!(wc > 0.0)) throw Infeasible("crossover frequency must be positive");
    if (!(beta_lag >= 0.0 && beta_lag < 1.0)) throw Infeasible("lag ratio must lie in [0, 1)");
    if (gamma_d < 0.0 || gamma_q < 0.0) throw std::invalid_argument("scaling factors must be non-negative");
    inverter.validate();
}

RationalTF ControllerSet::Kv_d_eff() const { return notch ? *notch * Kv_d : Kv_d; }
RationalTF ControllerSet::Kv_q_eff() const { return notch ? *notch * Kv_q : Kv_q; }
RationalTF ControllerSet::Keta_d_eff() const { return pr ? *pr * Keta_d : Keta_d; }
RationalTF ControllerSet::Keta_q_eff() const { return pr ? *pr * Keta_q : Keta_q; }

InnerDesign design_inner(const InverterParams& p, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("inner-loop time constant must be positive");
    InnerDesign d;
    d.Kc = RationalTF(Poly{p.R, p.L}, Poly{0.0, tau});
    d.Lc = (d.Kc * current_plant(p)).cancelled();
    d.Tc = tf_feedback(d.Lc);
    return d;
}

RationalTF lag_loop(double k, double z, double tau, double beta_d, double C) {
    // k/(C tau) * (s + z)/(s + 1/tau) * 1/(s (s + beta_d z))
    return RationalTF(Poly{k * z / (C * tau), k / (C * tau)},
                      Poly{0.0, 1.0} * Poly{1.0 / tau, 1.0} * Poly{beta_d * z, 1.0});
}

LagDesign design_lag(const DesignSpec& spec, std::optional<double> beta_d) {
    spec.validate();
    const double sd = std::sin(spec.pm * std::numbers::pi / 180.0);
    const double r = (1.0 - sd) / (1.0 + sd);  // tau * z
    const double z = spec.wc * std::sqrt(r);
    const double tau = std::sqrt(r) / spec.wc;
    if (!(tau > 0.0)) throw Infeasible("phase target leaves no positive inner time constant");
    LagDesign d;
    d.tau = tau;
    d.z = z;
    d.beta_d = beta_d.value_or(spec.beta_lag);
    const double C = spec.inverter.C;
    const RationalTF unit = lag_loop(1.0, z, tau, d.beta_d, C);
    d.k = 1.0 / std::abs(unit.freq(spec.wc));
    d.loop = lag_loop(d.k, z, tau, d.beta_d, C);
    d.Kv_d = RationalTF(Poly{d.k * z, d.k}, Poly{d.beta_d * z, 1.0});
    return d;
}

RationalTF design_pi_q(double k, double z) {
    if (!(k > 0.0 && z > 0.0)) throw std::invalid_argument("PI gains must be positive");
    return RationalTF(Poly{k * z, k}, Poly{0.0, 1.0});
}

NormalizedGains normalize_gains(double gamma_d, double gamma_q, const LinePhasor& line, double k) {
    if (!(line.Zbar > 0.0)) throw std::invalid_argument("line impedance magnitude must be positive");
    const double cr = line.R / line.Zbar;
    const double cx = line.X / line.Zbar;
    return {gamma_d * cx, gamma_q * cx, gamma_d * k * cr, gamma_q * k * cr};
}

RationalTF design_pll(double beta_q, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("PLL zero must be positive");
    return RationalTF(Poly{beta_q * z, 1.0}, Poly{0.0, 1.0});
}

CouplingPair design_coupling(double alpha_d, double alpha_q, double beta_q, double z) {
    CouplingPair c;
    c.Keta_d = RationalTF(Poly{alpha_d * z}, Poly{z, 1.0});
    if (beta_q * z == 0.0) {
        // H = 1: no integrator to cancel, and no blocking zero.
        c.Keta_q = RationalTF(Poly{alpha_q * z}, Poly{z, 1.0});
    } else {
        c.Keta_q = RationalTF(Poly{0.0, alpha_q * z}, Poly{z, 1.0} * Poly{beta_q * z, 1.0});
    }
    return c;
}

ControllerSet synthesize(const DesignSpec& spec) {
    spec.validate();
    ControllerSet cs;
    cs.family = spec.family;
    cs.gamma_d = spec.gamma_d;
    cs.gamma_q = spec.gamma_q;
    cs.L_nom = spec.inverter.L;
    cs.R_nom = spec.inverter.R;
    cs.C_nom = spec.inverter.C;

    // beta_d depends on k through the normalization and k depends on beta_d
    // through the crossover condition; the map is a contraction for beta_d << 1.
    double beta_d = spec.family == DesignFamily::inductive ? 0.0 : spec.beta_lag;
    LagDesign lag = design_lag(spec, beta_d);
    NormalizedGains g = normalize_gains(spec.gamma_d, spec.gamma_q, spec.line, lag.k);
    if (spec.family != DesignFamily::inductive) {
        for (int it = 0; it < 100; ++it) {
            const double next = normalize_gains(spec.gamma_d, spec.gamma_q, spec.line, lag.k).beta_d;
            lag = design_lag(spec, next);
            if (std::abs(next - beta_d) <= 1e-15 * std::max(1.0, next)) break;
            beta_d = next;
        }
        g = normalize_gains(spec.gamma_d, spec.gamma_q, spec.line, lag.k);
        if (!(g.beta_d < 1.0)) throw Infeasible("normalized lag ratio beta_d >= 1; reduce gamma_d");
    }

    cs.tau = lag.tau;
    cs.k = lag.k;
    cs.z = lag.z;
    cs.beta_d = spec.family == DesignFamily::inductive ? 0.0 : g.beta_d;
    cs.beta_q = g.beta_q;
    cs.alpha_d = spec.family == DesignFamily::resistive ? 0.0 : g.alpha_d;
    cs.alpha_q = spec.family == DesignFamily::resistive ? 0.0 : g.alpha_q;

    assemble(cs);
    return cs;
}

void assemble(ControllerSet& cs) {
    if (!(cs.tau > 0.0 && cs.k > 0.0 && cs.z > 0.0))
        throw std::invalid_argument("controller gains tau, k, z must be positive");
    InverterParams nominal{cs.C_nom, cs.L_nom, cs.R_nom, 1.0};
    cs.Kc = design_inner(nominal, cs.tau).Kc;
    cs.Kv_d = RationalTF(Poly{cs.k * cs.z, cs.k}, Poly{cs.beta_d * cs.z, 1.0});
    cs.Kv_q = design_pi_q(cs.k, cs.z);
    cs.H_pll = design_pll(cs.beta_q, cs.z);
    const CouplingPair c = design_coupling(cs.alpha_d, cs.alpha_q, cs.beta_q, cs.z);
    cs.Keta_d = c.Keta_d;
    cs.Keta_q = c.Keta_q;
    if (cs.notch_w > 0.0) {
        const NotchPair n = design_notch(cs.notch_w, cs.notch_xi, cs.notch_xi0);
        cs.notch = n.Hn;
        cs.pr = n.Hpr;
    } else {
        cs.notch.reset();
        cs.pr.reset();
    }
}

TFMatrix2 ki_matrix(const ControllerSet& cs) {
    const double k = cs.k, z = cs.z;
    const Poly den{k * z, k};
    TFMatrix2 m(RationalTF(Poly{cs.beta_d * z, 1.0}, den), RationalTF(Poly{-k * cs.alpha_d * z}, den),
                RationalTF(Poly{k * cs.alpha_q * z}, den), RationalTF(Poly{cs.beta_q * z, 1.0}, den));
    if (cs.notch) {
        // Voltage compensators carry H_n and coupling filters carry H_n^-1, so
        // every entry of the law picks up the same factor H_n^-1.
        return *cs.pr * m;
    }
    return m;
}

Resonance resonance_params(const ControllerSet& cs, const LinePhasor& line) {
    if (!(cs.gamma_d > 0.0 && cs.gamma_q > 0.0))
        throw std::invalid_argument("resonance needs positive gamma_d and gamma_q");
    const double g = std::sqrt(cs.gamma_d * cs.gamma_q);
    return {cs.k * cs.z * g, (cs.gamma_d + cs.gamma_q) / (2.0 * g) * line.R / line.Zbar};
}

NotchPair design_notch(double w_i, double xi_i, double xi_0) {
    if (!(xi_0 > xi_i)) throw std::invalid_argument("notch needs xi_0 > xi_i");
    const Poly num{w_i * w_i, 2.0 * xi_i * w_i, 1.0};
    const Poly den{w_i * w_i, 2.0 * xi_0 * w_i, 1.0};
    return {RationalTF(num, den), RationalTF(den, num)};
}

ControllerSet with_notch(const ControllerSet& cs, double w_i, double xi_i, double xi_0) {
    ControllerSet out = cs;
    out.notch_w = w_i;
    out.notch_xi = xi_i;
    out.notch_xi0 = xi_0;
    assemble(out);
    return out;
}

DroopDeviation steady_state_droop(const ControllerSet& cs, DesignFamily form, const DQPair& di, double v2) {
    switch (form) {
        case DesignFamily::resistive:
            return {cs.beta_d / cs.k * di.d, cs.beta_q / (v2 * cs.k) * di.q};
        case DesignFamily::inductive:
            return {-cs.alpha_d * di.q, cs.alpha_q / v2 * di.d};
        case DesignFamily::general:
            break;
    }
    return {cs.beta_d / cs.k * di.d - cs.alpha_d * di.q,
            (cs.alpha_q * di.d + cs.beta_q / cs.k * di.q) / v2};
}

DroopDeviation steady_state_droop_polar(double gamma_d, double gamma_q, double phi, const DQPair& di,
                                        double v2) {
    const double mag = std::hypot(di.d, di.q);
    const double ang = std::atan2(di.q, di.d);
    return {gamma_d * mag * std::cos(phi + ang), gamma_q * mag * std::sin(phi + ang) / v2};
}

double mismatch_norm(double gamma_d, double gamma_q, const DroopDeviation& dev, double v2) {
    return std::hypot(v2 / gamma_q * dev.dw, dev.dv / gamma_d);
}

}  // namespace gridforge
