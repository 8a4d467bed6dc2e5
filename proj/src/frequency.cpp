#include "gridforge/frequency.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "gridforge/errors.hpp"

namespace gridforge {

std::vector<double> log_grid(double w_lo, double w_hi, int points_per_decade) {
    const double decades = std::log10(w_hi / w_lo);
    const int n = static_cast<int>(std::ceil(decades * points_per_decade)) + 1;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = w_lo * std::pow(10.0, decades * static_cast<double>(i) / (n - 1));
    return w;
}

PhaseTracker::PhaseTracker(const RationalTF& tf) : zeros_(tf.zeros()), poles_(tf.poles()) {
    if (tf.num().lead() < 0.0) gain_sign_offset_deg_ = -180.0;
}

double PhaseTracker::phase_deg(double w) const {
    const cplx jw(0.0, w);
    double ph = 0.0;
    for (const cplx& z : zeros_) ph += std::arg(jw - z);
    for (const cplx& p : poles_) ph -= std::arg(jw - p);
    return ph * 180.0 / std::numbers::pi + gain_sign_offset_deg_;
}

Margin phase_margin(const RationalTF& loop, double t0, const SweepGrid& grid) {
    const auto w = log_grid(grid.w_lo, grid.w_hi, grid.points_per_decade);
    auto lmag = [&](double x) { return std::log(std::abs(loop.freq(x))); };
    const PhaseTracker tracker(loop);
    std::optional<Margin> best;
    double f_prev = lmag(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double f = lmag(w[i]);
        if ((f_prev > 0.0) != (f > 0.0) || f == 0.0) {
            double lo = std::log(w[i - 1]);
            double hi = std::log(w[i]);
            const bool rising = f > f_prev;
            while (hi - lo > 1e-13) {
                const double mid = 0.5 * (lo + hi);
                const double fm = lmag(std::exp(mid));
                if ((fm > 0.0) == rising) hi = mid;
                else lo = mid;
            }
            const double wc = std::exp(0.5 * (lo + hi));
            const double pm = 180.0 + tracker.phase_deg(wc) - wc * t0 * 180.0 / std::numbers::pi;
            if (!best || pm < best->margin_deg) best = Margin{pm, wc};
        }
        f_prev = f;
    }
    if (!best) throw NoCrossover("loop magnitude never crosses unity on the sweep range");
    return *best;
}

double delay_phase(const RationalTF& loop, double t0, double w) {
    return PhaseTracker(loop).phase_deg(w) - w * t0 * 180.0 / std::numbers::pi;
}

SingularValues singular_values(const CMat2& m) {
    // Eigenvalues of the Hermitian m^H m in closed form; sigma_min follows from
    // |det m| = sigma_max * sigma_min, which stays accurate when sigma_min << sigma_max.
    const Eigen::Matrix2cd g = m.adjoint() * m;
    const double a = g(0, 0).real();
    const double d = g(1, 1).real();
    const double b2 = std::norm(g(0, 1));
    const double half_tr = 0.5 * (a + d);
    const double disc = std::sqrt(0.25 * (a - d) * (a - d) + b2);
    const double smax = std::sqrt(std::max(half_tr + disc, 0.0));
    const double det = std::abs(m.determinant());
    const double smin = smax > 0.0 ? det / smax : 0.0;
    return {smax, smin};
}

GainPeak peak_sigma_max(const TFMatrix2& m, double w_lo, double w_hi, int points) {
    auto f = [&](double lw) { return singular_values(m.eval(cplx(0.0, std::exp(lw)))).max; };
    const double a = std::log(w_lo);
    const double b = std::log(w_hi);
    int best_i = 0;
    double best_v = -1.0;
    for (int i = 0; i < points; ++i) {
        const double v = f(a + (b - a) * i / (points - 1));
        if (v > best_v) {
            best_v = v;
            best_i = i;
        }
    }
    const double step = (b - a) / (points - 1);
    double lo = a + (best_i - 1) * step;
    double hi = a + (best_i + 1) * step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 > f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = f(x2);
        }
    }
    const double xm = 0.5 * (lo + hi);
    const double vm = f(xm);
    if (vm >= best_v) return {std::exp(xm), vm};
    return {std::exp(a + best_i * step), best_v};
}

}  // namespace gridforge
