#include "gridforge/rational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridforge/errors.hpp"

namespace gridforge {

RationalTF::RationalTF(Poly num, Poly den) {
    if (den.is_zero()) throw std::invalid_argument("transfer function with zero denominator");
    const double lead = den.lead();
    num_ = (1.0 / lead) * num;
    den_ = (1.0 / lead) * den;
}

cplx RationalTF::eval(cplx s) const {
    const cplx d = den_.eval(s);
    if (std::abs(d) <= 1e-12 * den_.eval_scale(s)) {
        std::ostringstream os;
        os << "evaluation at pole s=" << s;
        throw PoleEvaluation(os.str());
    }
    return num_.eval(s) / d;
}

namespace {

// Roots closer than abs_floor are indistinguishable from roundoff next to
// the fastest root and always match.
bool roots_match(cplx a, cplx b, double rel_tol, double abs_floor) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(rel_tol * scale, abs_floor);
}

}  // namespace

RationalTF RationalTF::cancelled(double rel_tol) const {
    if (num_.degree() < 1 || den_.degree() < 1) return *this;
    std::vector<cplx> z = zeros();
    std::vector<cplx> p = poles();
    double rmax = 1.0;
    for (const cplx& r : z) rmax = std::max(rmax, std::abs(r));
    for (const cplx& r : p) rmax = std::max(rmax, std::abs(r));
    const double floor = 1e-10 * rmax;
    std::vector<bool> p_used(p.size(), false);
    std::vector<cplx> z_keep;
    std::vector<std::pair<cplx, cplx>> pairs;
    bool any = false;
    for (const cplx& zi : z) {
        bool matched = false;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!p_used[j] && roots_match(zi, p[j], rel_tol, floor)) {
                p_used[j] = true;
                pairs.emplace_back(zi, p[j]);
                matched = true;
                any = true;
                break;
            }
        }
        if (!matched) z_keep.push_back(zi);
    }
    if (!any) return *this;
    std::vector<cplx> p_keep;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (!p_used[j]) p_keep.push_back(p[j]);
    RationalTF out(Poly::from_roots(z_keep, num_.lead()), Poly::from_roots(p_keep));

    // Probe on a ring away from the retained singularities.
    for (double frac : {0.37, 1.3, 3.1}) {
        const cplx s = std::polar(frac * rmax, 1.234);
        try {
            const cplx a = eval(s);
            const cplx b = out.eval(s);
            // Each removed pair perturbs the value by about |z - p| / |s - p|.
            double allowed = 1e-9;
            for (const auto& [zc, pc] : pairs) allowed += 2.0 * std::abs(zc - pc) / std::abs(s - pc);
            if (std::abs(a - b) > allowed * std::max(std::abs(a), 1e-300)) return *this;
        } catch (const PoleEvaluation&) {
            return *this;
        }
    }
    return out;
}

RationalTF RationalTF::inverse() const {
    if (num_.is_zero()) throw DegenerateLoop("inverse of a zero transfer function");
    return RationalTF(den_, num_);
}

RationalTF RationalTF::operator-() const { return RationalTF(-num_, den_); }

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_ == b.den_) return RationalTF(a.num_ + b.num_, a.den_);
    return RationalTF(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) { return a + (-b); }

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
    if (a.is_zero() || b.is_zero()) return RationalTF();
    return RationalTF(a.num_ * b.num_, a.den_ * b.den_);
}

RationalTF operator/(const RationalTF& a, const RationalTF& b) { return a * b.inverse(); }

std::string RationalTF::to_string(int precision) const {
    auto poly_str = [precision](const Poly& p) {
        if (p.is_zero()) return std::string("0");
        std::ostringstream os;
        os.precision(precision);
        bool first = true;
        for (int i = p.degree(); i >= 0; --i) {
            const double c = p[i];
            if (c == 0.0) continue;
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            const double m = std::abs(c);
            if (i == 0 || m != 1.0) os << m;
            if (i >= 1) os << "s";
            if (i >= 2) os << "^" << i;
            first = false;
        }
        return os.str();
    };
    return "(" + poly_str(num_) + ")/(" + poly_str(den_) + ")";
}

RationalTF tf_series(const RationalTF& a, const RationalTF& b) { return a * b; }

RationalTF tf_feedback(const RationalTF& loop) {
    const Poly one_plus = loop.den() + loop.num();
    if (one_plus.trimmed(1e-14).is_zero()) throw DegenerateLoop("1 + loop vanishes identically");
    return RationalTF(loop.num(), one_plus);
}

RationalTF tf_sensitivity(const RationalTF& loop) {
    const Poly one_plus = loop.den() + loop.num();
    if (one_plus.trimmed(1e-14).is_zero()) throw DegenerateLoop("1 + loop vanishes identically");
    return RationalTF(loop.den(), one_plus);
}

double max_rel_diff(const RationalTF& a, const RationalTF& b, const std::vector<cplx>& points,
                    double floor) {
    double worst = 0.0;
    for (const cplx& s : points) {
        const cplx va = a.eval(s);
        const cplx vb = b.eval(s);
        const double scale = std::max({std::abs(va), std::abs(vb), floor});
        worst = std::max(worst, std::abs(va - vb) / scale);
    }
    return worst;
}

CMat2 TFMatrix2::eval(cplx s) const {
    CMat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = (*this)(r, c).eval(s);
    return m;
}

CMat2 mimo_eval(const TFMatrix2& m, cplx s) { return m.eval(s); }

RationalTF TFMatrix2::det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }

TFMatrix2 TFMatrix2::inverse() const {
    const RationalTF d = det();
    if (d.num().trimmed(1e-13).is_zero()) throw SingularLoop("2x2 transfer matrix is singular");
    const RationalTF inv = d.inverse();
    return TFMatrix2(e_[3] * inv, -e_[1] * inv, -e_[2] * inv, e_[0] * inv);
}

TFMatrix2 TFMatrix2::transpose() const { return TFMatrix2(e_[0], e_[2], e_[1], e_[3]); }

TFMatrix2 TFMatrix2::cancelled(double rel_tol) const {
    return TFMatrix2(e_[0].cancelled(rel_tol), e_[1].cancelled(rel_tol), e_[2].cancelled(rel_tol),
                     e_[3].cancelled(rel_tol));
}

TFMatrix2 operator+(const TFMatrix2& a, const TFMatrix2& b) {
    TFMatrix2 r;
    for (int i = 0; i < 4; ++i) r.e_[i] = a.e_[i] + b.e_[i];
    return r;
}

TFMatrix2 operator-(const TFMatrix2& a, const TFMatrix2& b) {
    TFMatrix2 r;
    for (int i = 0; i < 4; ++i) r.e_[i] = a.e_[i] - b.e_[i];
    return r;
}

TFMatrix2 operator*(const TFMatrix2& a, const TFMatrix2& b) {
    TFMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
    return r;
}

TFMatrix2 operator*(const RationalTF& k, const TFMatrix2& a) {
    TFMatrix2 r;
    for (int i = 0; i < 4; ++i) r.e_[i] = k * a.e_[i];
    return r;
}

}  // namespace gridforge
