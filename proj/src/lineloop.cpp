#include "gridforge/lineloop.hpp"

#include <array>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gridforge/errors.hpp"
#include "gridforge/statespace.hpp"

namespace gridforge {

LineModel LineModel::from_rl(double R, double L, double omega0) {
    if (!(L > 0.0)) throw std::invalid_argument("line inductance must be positive");
    LineModel m;
    m.R = R;
    m.L = L;
    m.omega0 = omega0;
    m.X = L * omega0;
    m.wn = std::hypot(R, m.X) / L;
    m.xi = R / std::hypot(R, m.X);
    return m;
}

LineModel LineModel::from_rx(double R, double X, double omega0) { return from_rl(R, X / omega0, omega0); }

DQPair line_derivatives(const DQPair& i, double dv, double vdelta, const LineModel& m) {
    return {(-m.R * i.d + m.X * i.q + dv) / m.L, (-m.X * i.d - m.R * i.q + vdelta) / m.L};
}

TFMatrix2 line_tf(const LineModel& m) {
    const Poly den = m.L * m.L * Poly{m.wn * m.wn, 2.0 * m.xi * m.wn, 1.0};
    const Poly diag{m.R, m.L};
    return TFMatrix2(RationalTF(diag, den), RationalTF(Poly{m.X}, den), RationalTF(Poly{-m.X}, den),
                     RationalTF(diag, den));
}

TFMatrix2 lambda_matrix() { return TFMatrix2::diag(1.0, RationalTF::integrator()); }

TFMatrix2 hsi_feedback_law(const ControllerSet& cs, double w_band) {
    const double dev = std::abs(cs.tau * w_band) / std::hypot(1.0, cs.tau * w_band);
    if (!(dev < 0.05))
        throw AssumptionViolated("inner loop deviates from unity by " + std::to_string(dev) +
                                 " at the band edge");
    const RationalTF H = cs.H_pll;
    TFMatrix2 m(cs.Kv_d_eff().inverse(), -cs.Keta_d_eff(), H * cs.Keta_q_eff(), H / cs.Kv_q_eff());
    return m.cancelled();
}

TFMatrix2 ki_inverse(const ControllerSet& cs) {
    const double k = cs.k, z = cs.z;
    // det of the bracket in ki_matrix; under the normalization this is
    // s^2 + 2 xi_i w_i s + w_i^2.
    const Poly den = Poly{cs.beta_d * z, 1.0} * Poly{cs.beta_q * z, 1.0} +
                     Poly{k * k * cs.alpha_d * cs.alpha_q * z * z};
    const Poly kz{k * z, k};
    TFMatrix2 m(RationalTF(kz * Poly{cs.beta_q * z, 1.0}, den), RationalTF(kz * Poly{k * cs.alpha_d * z}, den),
                RationalTF(kz * Poly{-k * cs.alpha_q * z}, den), RationalTF(kz * Poly{cs.beta_d * z, 1.0}, den));
    if (cs.notch) return *cs.notch * m;
    return m;
}

namespace {

// M = num / den with one polynomial denominator shared by all entries.
struct CommonForm {
    Poly den;
    std::array<Poly, 4> num;  // row-major
};

bool same_poly(const Poly& a, const Poly& b) {
    if (a.degree() != b.degree()) return false;
    const double scale = std::max(a.max_abs_coeff(), b.max_abs_coeff());
    for (int i = 0; i <= a.degree(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * scale) return false;
    return true;
}

// Denominators that agree coefficient-wise are merged; distinct ones are
// multiplied. No root finding is involved, so repeated poles survive intact.
CommonForm common_form(const TFMatrix2& m) {
    std::vector<Poly> distinct;
    std::array<std::size_t, 4> which{};
    for (int e = 0; e < 4; ++e) {
        const Poly& d = m(e / 2, e % 2).den();
        std::size_t j = 0;
        while (j < distinct.size() && !same_poly(distinct[j], d)) ++j;
        if (j == distinct.size()) distinct.push_back(d);
        which[e] = j;
    }
    CommonForm f;
    f.den = Poly{1.0};
    for (const Poly& d : distinct) f.den = f.den * d;
    for (int e = 0; e < 4; ++e) {
        Poly n = m(e / 2, e % 2).num();
        for (std::size_t j = 0; j < distinct.size(); ++j)
            if (j != which[e]) n = n * distinct[j];
        f.num[e] = n;
    }
    return f;
}

CommonForm product(const CommonForm& a, const CommonForm& b) {
    CommonForm f;
    f.den = a.den * b.den;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) f.num[2 * i + j] = a.num[2 * i] * b.num[j] + a.num[2 * i + 1] * b.num[2 + j];
    return f;
}

}  // namespace

LoopPair sensitivity_pair(const TFMatrix2& G, const TFMatrix2& Ki) {
    // With G Lambda Ki = N / d, S = d adj(d I + N) / det(d I + N).
    const CommonForm f =
        product(product(common_form(G.cancelled()), common_form(lambda_matrix())), common_form(Ki.cancelled()));
    const Poly a = f.den + f.num[0], b = f.num[1], c = f.num[2], e = f.den + f.num[3];
    const Poly det = a * e - b * c;
    if (det.is_zero()) throw SingularLoop("I + G Lambda K_i is singular");
    LoopPair lp;
    lp.S = TFMatrix2(RationalTF(f.den * e, det), RationalTF(-1.0 * (f.den * b), det),
                     RationalTF(-1.0 * (f.den * c), det), RationalTF(f.den * a, det))
               .cancelled();
    lp.T = TFMatrix2::identity() - lp.S;
    return lp;
}

DCPerformance dc_performance(double gamma_d, const LineModel& line) {
    if (gamma_d < 0.0) throw std::invalid_argument("gamma_d must be non-negative");
    const double Z = line.Zbar();
    return {Z / (gamma_d + Z), 0.0, 1.0, gamma_d / (gamma_d + Z)};
}

DCPerformance dc_performance_numeric(const LoopPair& lp) {
    const SingularValues s = singular_values(lp.S.eval(cplx(0.0)));
    const SingularValues t = singular_values(lp.T.eval(cplx(0.0)));
    return {s.max, s.min, t.max, t.min};
}

TFMatrix2 grid_disturbance_response(const ControllerSet& cs, const LineModel& line) {
    const LoopPair lp = sensitivity_pair(line_tf(line), ki_matrix(cs));
    return lp.T * ki_matrix(cs).inverse();
}

std::vector<SigmaRow> sigma_sweep(const LoopPair& lp, const std::vector<double>& w) {
    std::vector<SigmaRow> rows;
    rows.reserve(w.size());
    for (double x : w) {
        const cplx s(0.0, x);
        const SingularValues a = singular_values(lp.S.eval(s));
        const SingularValues b = singular_values(lp.T.eval(s));
        rows.push_back({x, a.max, a.min, b.max, b.min});
    }
    return rows;
}

InjectionResult simulate_injection(const ControllerSet& cs, const LineModel& line, int col, double w) {
    if (col != 0 && col != 1) throw std::invalid_argument("disturbance column must be 0 or 1");
    if (!(w > 0.0)) throw std::invalid_argument("injection frequency must be positive");
    const TFMatrix2 Ki = ki_matrix(cs);
    std::array<StateSpace, 4> blk;
    std::array<int, 4> off{};
    int n = 3;  // line currents + angle integrator
    for (int e = 0; e < 4; ++e) {
        blk[e] = tf_to_ss(Ki(e / 2, e % 2).cancelled());
        off[e] = n;
        n += blk[e].n();
    }

    const LoopPair lp = sensitivity_pair(line_tf(line), Ki);
    std::vector<cplx> poles;
    for (int e = 0; e < 4; ++e)
        for (const cplx& p : lp.S(e / 2, e % 2).poles()) poles.push_back(p);
    double fastest = std::max({w, line.wn, cs.z});
    double slowest = 1e30;
    for (const cplx& p : poles) {
        if (p.real() >= 0.0) throw AssumptionViolated("closed loop is not asymptotically stable");
        fastest = std::max(fastest, std::abs(p));
        slowest = std::min(slowest, -p.real());
    }
    const double period = 2.0 * std::numbers::pi / w;
    // RK4 with |lambda| dt <= 0.1 keeps the per-period phase error far below
    // the fit tolerance.
    const int steps_per_period = std::max(200, static_cast<int>(std::ceil(period * fastest / 0.1)));
    const double dt = period / steps_per_period;
    // Transients decay to 1e-6 of their initial size before fitting.
    const int settle_periods = std::max(10, static_cast<int>(std::ceil(std::log(1e6) / slowest / period)));
    const int fit_periods = 10;

    auto f = [&](double t, const Vec& x) {
        const double d = std::sin(w * t);
        const DQPair i{x(0), x(1)};
        const double e[2] = {-i.d, -i.q};
        double y[2] = {0.0, 0.0};
        Vec dx(n);
        for (int k = 0; k < 4; ++k) {
            const int r = k / 2, c = k % 2;
            const StateSpace& b = blk[k];
            const int m = b.n();
            if (m) {
                const auto xs = x.segment(off[k], m);
                y[r] += (b.C * xs)(0) + b.D(0, 0) * e[c];
                dx.segment(off[k], m) = b.A * xs + b.B.col(0) * e[c];
            } else {
                y[r] += b.D(0, 0) * e[c];
            }
        }
        const double u0 = y[0] + (col == 0 ? d : 0.0);
        dx(2) = y[1] + (col == 1 ? d : 0.0);
        const DQPair di = line_derivatives(i, u0, x(2), line);
        dx(0) = di.d;
        dx(1) = di.q;
        return dx;
    };

    Vec x = Vec::Zero(n);
    const long total = static_cast<long>(settle_periods + fit_periods) * steps_per_period;
    const long fit_from = static_cast<long>(settle_periods) * steps_per_period;
    // Least-squares projection on sin/cos over whole periods reduces to sums.
    double ss[2] = {0, 0}, sc[2] = {0, 0};
    double norm = 0.0;
    for (long k = 0; k < total; ++k) {
        const double t = k * dt;
        const Vec k1 = f(t, x);
        const Vec k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
        const Vec k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
        const Vec k4 = f(t + dt, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw NonFinite("injection simulation diverged");
        if (k + 1 > fit_from) {
            const double tn = (k + 1) * dt;
            const double sn = std::sin(w * tn), cn = std::cos(w * tn);
            for (int a = 0; a < 2; ++a) {
                ss[a] += x(a) * sn;
                sc[a] += x(a) * cn;
            }
            norm += sn * sn;
        }
    }
    // x = a sin + b cos  ->  phasor a + j b
    return {cplx(ss[0] / norm, sc[0] / norm), cplx(ss[1] / norm, sc[1] / norm)};
}

}  // namespace gridforge
