#include "gridforge/droop.hpp"

#include <cmath>
#include <stdexcept>

#include "gridforge/errors.hpp"
#include "gridforge/frequency.hpp"

namespace gridforge {

LinePhasor LinePhasor::from_rx(double R, double X, double v2, double omega0) {
    LinePhasor l;
    l.R = R;
    l.X = X;
    l.Zbar = std::hypot(R, X);
    l.phi = std::atan2(X, R);
    l.v2 = v2;
    l.omega0 = omega0;
    if (!(l.Zbar > 0.0)) throw std::invalid_argument("line impedance magnitude must be positive");
    if (!(v2 > 0.0)) throw std::invalid_argument("PCC voltage amplitude must be positive");
    return l;
}

DroopInput DroopInput::make(double dv, double delta, double v2) {
    DroopInput u;
    u.dv = dv;
    u.vdelta = v2 * delta;
    u.valid = std::abs(delta) < 0.2 && std::abs(dv) / v2 < 0.1;
    return u;
}

TFMatrix2 DroopMatrix::lambda_k() const {
    TFMatrix2 lk;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            lk(r, c) = r == integrator_row ? RationalTF(Poly{k(r, c)}, Poly::s()) : RationalTF(k(r, c));
    TFMatrix2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(r, c) = RationalTF(pre(r, 0)) * lk(0, c) + RationalTF(pre(r, 1)) * lk(1, c);
    return out;
}

DroopMatrix droop_k90(double kp, double kq, double v2) {
    DroopMatrix m;
    m.k << 0.0, kq, v2 * kp, 0.0;
    return m;
}

DroopMatrix droop_k0(double kp, double kq, double v2) {
    DroopMatrix m;
    m.k << kp, 0.0, 0.0, v2 * kq;
    return m;
}

PowerPair power_flow(double v1, double v2, double delta, const LinePhasor& line) {
    const double a = v1 * v1 / line.Zbar;
    const double b = v1 * v2 / line.Zbar;
    return {a * std::cos(line.phi) - b * std::cos(line.phi + delta),
            a * std::sin(line.phi) - b * std::sin(line.phi + delta), true};
}

Mat2 h_matrix(double phi) {
    Mat2 h;
    h << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
    return h;
}

Mat2 rotation(double angle) {
    Mat2 r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

PowerPair linearized_power(const DroopInput& u, const LinePhasor& line) {
    const Eigen::Vector2d p = line.rho() * h_matrix(line.phi) * Eigen::Vector2d(u.dv, u.vdelta);
    return {p(0), p(1), u.valid};
}

DroopMatrix droop_rotation(const DroopMatrix& k0, const LinePhasor& line0, const LinePhasor& line) {
    // rotation(phi - phi0) * H(phi0) == H(phi), so the rotated law turns the
    // rotated plant back into the baseline one.
    DroopMatrix out = k0;
    out.pre = (line0.rho() / line.rho()) * rotation(line.phi - line0.phi) * k0.pre;
    return out;
}

TFMatrix2 quasi_static_loop(const DroopMatrix& k, const LinePhasor& line) {
    const Mat2 h = h_matrix(line.phi) / line.rho();
    const TFMatrix2 lk = k.lambda_k();
    const TFMatrix2 plant(h(0, 0), h(0, 1), h(1, 0), h(1, 1));
    TFMatrix2 inv;
    try {
        inv = (plant + lk).inverse();
    } catch (const SingularLoop& e) {
        throw SingularAtDC(std::string("quasi-static loop not invertible: ") + e.what());
    }
    return (inv * lk).cancelled();
}

DynamicDroop dynamic_droop_lead(const LinePhasor& line, double wc, double a) {
    if (!(a >= 1.0) || !(wc > 0.0)) throw std::invalid_argument("lead droop needs a >= 1 and wc > 0");
    const double sa = std::sqrt(a);
    const RationalTF lead(Poly{wc / sa, 1.0}, Poly{wc * sa, 1.0});
    // |lead(j wc)| = 1/sqrt(a), so the crossover condition fixes the gain.
    const double g = sa * wc * wc;
    DynamicDroop d;
    d.gain = g;
    d.kp = RationalTF(line.X / (line.v2 * line.v2) * g) * lead * RationalTF::integrator();
    d.loop = RationalTF(g) * lead * RationalTF(Poly{1.0}, Poly{0.0, 0.0, 1.0});
    return d;
}

DelayMargins delay_limited_margin(const DroopMatrix& k, const LinePhasor& line, double t0,
                                  const RationalTF& Tv, const RationalTF& Tf) {
    if (t0 < 0.0) throw std::invalid_argument("transport delay must be non-negative");
    const double rho = line.v2 / line.X;
    DelayMargins m;
    m.LP = RationalTF(rho * k.k(1, 0)) * RationalTF::integrator() * Tf;
    m.LQ = RationalTF(rho * k.k(0, 1)) * Tv;
    try {
        m.marginP = phase_margin(m.LP, t0).margin_deg;
    } catch (const NoCrossover&) {
    }
    try {
        m.marginQ = phase_margin(m.LQ, t0).margin_deg;
    } catch (const NoCrossover&) {
    }
    return m;
}

}  // namespace gridforge
