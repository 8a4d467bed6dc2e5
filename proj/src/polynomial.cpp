#include "gridforge/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace gridforge {

Poly::Poly(std::initializer_list<double> c) : c_(c) { strip(); }
Poly::Poly(std::vector<double> c) : c_(std::move(c)) { strip(); }

void Poly::strip() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Poly Poly::from_roots(const std::vector<cplx>& roots, double lead) {
    std::vector<cplx> acc{cplx(1.0)};
    for (const auto& r : roots) {
        std::vector<cplx> next(acc.size() + 1, cplx(0.0));
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i + 1] += acc[i];
            next[i] -= r * acc[i];
        }
        acc = std::move(next);
    }
    std::vector<double> c(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) c[i] = lead * acc[i].real();
    return Poly(std::move(c));
}

double Poly::operator[](int i) const {
    return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : 0.0;
}

double Poly::max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

cplx Poly::eval(cplx s) const {
    cplx acc(0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Poly::eval(double s) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Poly::eval_scale(cplx s) const {
    const double r = std::abs(s);
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly{};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Poly(std::move(d));
}

std::vector<cplx> Poly::roots() const {
    const int n = degree();
    if (n < 1) return {};
    // Exact zero roots are split off first so the companion matrix stays
    // well conditioned for the integrators that appear everywhere.
    int k0 = 0;
    while (k0 < n && c_[k0] == 0.0) ++k0;
    std::vector<cplx> out(k0, cplx(0.0));
    const int m = n - k0;
    if (m == 0) return out;
    // Roots are found for p(rho x) with rho the geometric mean of the root
    // magnitudes, which keeps the companion entries near unity when the
    // coefficients span many decades.
    const double rho = std::pow(std::abs(c_[k0] / c_.back()), 1.0 / m);
    const double sc = rho > 0.0 && std::isfinite(rho) ? rho : 1.0;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) comp(i, m - 1) = -c_[k0 + i] / c_.back() * std::pow(sc, i - m);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < m; ++i) out.push_back(sc * es.eigenvalues()[i]);
    return out;
}

Poly Poly::trimmed(double rel_tol) const {
    const double thr = rel_tol * max_abs_coeff();
    std::vector<double> c = c_;
    while (!c.empty() && std::abs(c.back()) <= thr) c.pop_back();
    for (double& v : c)
        if (std::abs(v) <= thr) v = 0.0;
    return Poly(std::move(c));
}

Poly Poly::operator-() const { return -1.0 * *this; }

Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0 * b); }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly{};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(c));
}

Poly operator*(double k, const Poly& a) {
    std::vector<double> c = a.c_;
    for (double& v : c) v *= k;
    return Poly(std::move(c));
}

}  // namespace gridforge
