#include "gridforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "gridforge/errors.hpp"
#include "gridforge/frequency.hpp"

namespace gridforge {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v, int digits = 10) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string margin_line(const RationalTF& loop) {
    try {
        const Margin m = phase_margin(loop);
        return num(m.margin_deg, 6) + " deg at " + num(m.crossover, 6) + " rad/s";
    } catch (const NoCrossover&) {
        return "no unity-gain crossing";
    }
}

void tf_block(std::ostringstream& os, const std::string& label, const RationalTF& tf) {
    os << "  " << label << " = " << tf.to_string(10) << "\n";
    os << "    zeros: " << format_roots(tf.zeros()) << "\n";
    os << "    poles: " << format_roots(tf.poles()) << "\n";
}

std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string format_inner_compensator(const ControllerSet& cs) {
    return "(" + num(cs.L_nom) + "s+" + num(cs.R_nom) + ")/(" + num(cs.tau) + "s)";
}

std::string format_roots(const std::vector<cplx>& roots) {
    if (roots.empty()) return "none";
    std::vector<cplx> r = roots;
    // Deterministic order: by real part, then by imaginary part.
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    std::string out;
    for (const cplx& x : r) {
        if (x.imag() < 0.0 && std::abs(x.imag()) > 1e-12 * std::max(1.0, std::abs(x))) continue;
        if (!out.empty()) out += ", ";
        if (std::abs(x.imag()) <= 1e-12 * std::max(1.0, std::abs(x)))
            out += num(x.real(), 8);
        else
            out += num(x.real(), 8) + "±" + num(x.imag(), 8) + "j";
    }
    return out;
}

RationalTF voltage_loop_d(const ControllerSet& cs) {
    const RationalTF plant(Poly{1.0}, Poly{1.0, cs.tau} * Poly{0.0, cs.C_nom});
    return (cs.Kv_d_eff() * plant).cancelled();
}

RationalTF voltage_loop_q(const ControllerSet& cs) {
    const RationalTF plant(Poly{1.0}, Poly{1.0, cs.tau} * Poly{0.0, cs.C_nom});
    return (cs.Kv_q_eff() * plant).cancelled();
}

std::string design_report(const std::string& name, const DesignSpec& spec, const ControllerSet& cs) {
    std::ostringstream os;
    os << "gridforge design report\n";
    os << "name: " << name << "\n";
    os << "family: " << to_string(cs.family) << "\n\n";

    os << "inputs:\n";
    os << "  plant: C=" << num(spec.inverter.C) << " F, L=" << num(spec.inverter.L) << " H, R="
       << num(spec.inverter.R) << " ohm, vdc=" << num(spec.inverter.vdc) << " V\n";
    os << "  line: R=" << num(spec.line.R) << " ohm, X=" << num(spec.line.X) << " ohm, Zbar="
       << num(spec.line.Zbar) << " ohm, phi=" << num(spec.line.phi * 180.0 / kPi) << " deg\n";
    os << "  v2: " << num(spec.line.v2) << " V, omega0: " << num(spec.line.omega0) << " rad/s\n";
    os << "  target: wc=" << num(spec.wc) << " rad/s, pm=" << num(spec.pm) << " deg\n";
    os << "  gamma_d: " << num(spec.gamma_d) << " ohm, gamma_q: " << num(spec.gamma_q) << " ohm\n\n";

    os << "gains:\n";
    os << "  tau: " << num(cs.tau) << " s\n";
    os << "  k: " << num(cs.k) << "\n";
    os << "  z: " << num(cs.z) << " rad/s\n";
    os << "  beta_d: " << num(cs.beta_d) << "\n";
    os << "  beta_q: " << num(cs.beta_q) << "\n";
    os << "  alpha_d: " << num(cs.alpha_d) << " ohm\n";
    os << "  alpha_q: " << num(cs.alpha_q) << " ohm\n\n";

    os << "compensators:\n";
    os << "  K_c = " << format_inner_compensator(cs) << "\n";
    os << "    zeros: " << format_roots(cs.Kc.zeros()) << "\n";
    os << "    poles: " << format_roots(cs.Kc.poles()) << "\n";
    tf_block(os, "K_v^d", cs.Kv_d);
    tf_block(os, "K_v^q", cs.Kv_q);
    tf_block(os, "K_eta^d", cs.Keta_d);
    tf_block(os, "K_eta^q", cs.Keta_q);
    tf_block(os, "H", cs.H_pll);
    if (cs.notch) tf_block(os, "H_n", *cs.notch);
    if (cs.pr) tf_block(os, "H_n^-1", *cs.pr);
    os << "  roll-off poles inserted: none (every compensator is proper)\n\n";

    os << "margins:\n";
    os << "  L^d: " << margin_line(voltage_loop_d(cs)) << "\n";
    os << "  L^q: " << margin_line(voltage_loop_q(cs)) << "\n";
    const double tc_dev = std::abs(cs.tau * spec.wc) / std::hypot(1.0, cs.tau * spec.wc);
    os << "  inner loop |1 - T_c(j wc)|: " << num(tc_dev, 6) << "\n\n";

    os << "saturation:\n";
    const double m_nom = spec.line.v2 / spec.inverter.vdc;
    os << "  |m| at nominal voltage, no load: " << num(m_nom, 6) << "\n";
    os << "  modulation headroom: " << num(1.0 - m_nom, 6) << "\n";
    os << "  voltage headroom: " << num(spec.inverter.vdc - spec.line.v2, 6) << " V\n\n";

    os << "derivation rules:\n";
    os << "  element   | rule\n";
    os << "  K_c       | (L s + R)/(tau s); cancels the current-plant pole, closed loop 1/(tau s + 1)\n";
    os << "  tau, z    | tau z = (1 - sin pm)/(1 + sin pm), lead maximum at wc: z = wc sqrt(tau z)\n";
    os << "  k         | |L^d(j wc)| = 1 with L^d = K_v^d/((tau s + 1) C s)\n";
    os << "  K_v^d     | k (s + z)/(s + beta_d z)\n";
    os << "  K_v^q     | k (s + z)/s\n";
    os << "  H         | (s + beta_q z)/s\n";
    os << "  K_eta^d   | alpha_d z/(s + z)\n";
    os << "  K_eta^q   | alpha_q z s/((s + z)(s + beta_q z)); alpha_q z/(s + z) when beta_q = 0\n";
    os << "  alpha     | gamma X/Zbar\n";
    os << "  beta      | gamma k R/Zbar\n";
    if (cs.notch)
        os << "  H_n       | (s^2 + 2 xi_i w_i s + w_i^2)/(s^2 + 2 xi_0 w_i s + w_i^2) on K_v; inverse on K_eta\n";
    return os.str();
}

std::vector<BodeRow> bode(const RationalTF& tf, const std::vector<double>& w) {
    const PhaseTracker ph(tf);
    std::vector<BodeRow> rows;
    rows.reserve(w.size());
    for (double x : w) rows.push_back({x, 20.0 * std::log10(std::abs(tf.freq(x))), ph.phase_deg(x)});
    return rows;
}

std::string bode_csv(const std::vector<BodeRow>& rows) {
    std::string s = "freq_rad_s,mag_db,phase_deg\n";
    for (const BodeRow& r : rows) s += csv_num(r.w) + "," + csv_num(r.mag_db) + "," + csv_num(r.phase_deg) + "\n";
    return s;
}

std::string sigma_csv(const std::vector<SigmaRow>& rows) {
    std::string s = "freq_rad_s,smax,smin,tmax,tmin\n";
    for (const SigmaRow& r : rows)
        s += csv_num(r.w) + "," + csv_num(r.smax) + "," + csv_num(r.smin) + "," + csv_num(r.tmax) + "," +
             csv_num(r.tmin) + "\n";
    return s;
}

AnalysisOutput analyze_controller(const ControllerSet& cs, const LineModel& line, double v2,
                                  const std::vector<double>& w) {
    AnalysisOutput out;
    const LoopPair lp = sensitivity_pair(line_tf(line), ki_matrix(cs));
    out.sigma_csv = sigma_csv(sigma_sweep(lp, w));

    const TFMatrix2 resp = (lp.T * ki_matrix(cs).inverse()).cancelled();
    out.disturbance_csv = "freq_rad_s,smax,smin\n";
    for (double x : w) {
        const SingularValues sv = singular_values(resp.eval(cplx(0.0, x)));
        out.disturbance_csv += csv_num(x) + "," + csv_num(sv.max) + "," + csv_num(sv.min) + "\n";
    }

    const std::pair<const char*, const RationalTF*> comps[] = {
        {"Kc", &cs.Kc}, {"Kv_d", &cs.Kv_d}, {"Kv_q", &cs.Kv_q}, {"Keta_d", &cs.Keta_d},
        {"Keta_q", &cs.Keta_q}, {"H", &cs.H_pll}};
    for (const auto& [nm, tf] : comps) out.bode_csvs.emplace_back(nm, bode_csv(bode(*tf, w)));
    if (cs.notch) out.bode_csvs.emplace_back("Hn", bode_csv(bode(*cs.notch, w)));
    if (cs.pr) out.bode_csvs.emplace_back("Hpr", bode_csv(bode(*cs.pr, w)));

    std::ostringstream os;
    os << "gridforge analysis\n";
    os << "line: R=" << num(line.R) << " ohm, X=" << num(line.X) << " ohm, wn=" << num(line.wn, 6)
       << " rad/s, xi=" << num(line.xi, 6) << "\n";
    // |G_11| = |G_12| where |R + j w L| = X.
    if (line.X > line.R)
        os << "line entry dominance crossover: " << num(std::sqrt(line.X * line.X - line.R * line.R) / line.L, 6)
           << " rad/s\n";
    else
        os << "line entry dominance crossover: none (R >= X)\n";

    os << "\nDC performance (numeric):\n";
    const DCPerformance num_dc = dc_performance_numeric(lp);
    os << "  smax=" << num(num_dc.smax) << " smin=" << num(num_dc.smin) << " tmax=" << num(num_dc.tmax)
       << " tmin=" << num(num_dc.tmin) << "\n";
    // The closed form holds for the general family, whose beta_d follows gamma_d.
    if (cs.family == DesignFamily::general && cs.gamma_d > 0.0) {
        const DCPerformance f = dc_performance(cs.gamma_d, line);
        os << "DC performance (closed form, gamma_d=" << num(cs.gamma_d) << "):\n";
        os << "  smax=" << num(f.smax) << " smin=" << num(f.smin) << " tmax=" << num(f.tmax)
           << " tmin=" << num(f.tmin) << "\n";
    }

    os << "\nresonance:\n";
    if (cs.gamma_d > 0.0 && cs.gamma_q > 0.0) {
        const LinePhasor ph = LinePhasor::from_rx(line.R, line.X, v2, line.omega0);
        const Resonance r = resonance_params(cs, ph);
        os << "  w_i=" << num(r.w_i, 8) << " rad/s, xi_i=" << num(r.xi_i, 8) << "\n";
        const GainPeak pk = peak_sigma_max(resp, 0.2 * r.w_i, 5.0 * r.w_i);
        os << "  disturbance response peak: " << num(pk.value, 8) << " at " << num(pk.w, 8) << " rad/s\n";
        const double dev = std::abs(cs.tau * r.w_i) / std::hypot(1.0, cs.tau * r.w_i);
        os << "  inner-loop assumption error |1 - T_c(j w_i)|: " << num(dev, 6) << "\n";
    } else {
        os << "  not defined (gamma_d and gamma_q must both be positive)\n";
    }
    out.summary = os.str();
    return out;
}

}  // namespace gridforge
