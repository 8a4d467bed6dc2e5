#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "gridforge/polynomial.hpp"

namespace gridforge {

// SISO transfer function num(s)/den(s). The denominator is kept monic, which
// is the only normalization ever applied: common factors survive until
// cancelled() is called explicitly.
class RationalTF {
public:
    RationalTF() : num_{}, den_{1.0} {}
    RationalTF(Poly num, Poly den);
    RationalTF(double gain) : num_{gain}, den_{1.0} {}  // NOLINT: implicit gain

    static RationalTF s() { return RationalTF(Poly::s(), Poly{1.0}); }
    static RationalTF integrator() { return RationalTF(Poly{1.0}, Poly::s()); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_proper() const { return num_.degree() <= den_.degree(); }
    bool is_strictly_proper() const { return num_.degree() < den_.degree(); }

    // Throws PoleEvaluation when |den(s)| is below 1e-12 of its coefficient scale.
    cplx eval(cplx s) const;
    cplx freq(double w) const { return eval(cplx(0.0, w)); }

    std::vector<cplx> poles() const { return den_.roots(); }
    std::vector<cplx> zeros() const { return num_.roots(); }

    // Removes zero/pole pairs closer than rel_tol (relative to their
    // magnitude). Falls back to the original object if the rebuilt fraction
    // disagrees with it at probe points, so cancellation never changes values.
    RationalTF cancelled(double rel_tol = 1e-9) const;

    RationalTF inverse() const;
    RationalTF operator-() const;
    friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator-(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator/(const RationalTF& a, const RationalTF& b);

    std::string to_string(int precision = 6) const;

private:
    Poly num_;
    Poly den_;
};

RationalTF tf_series(const RationalTF& a, const RationalTF& b);
// loop/(1+loop); throws DegenerateLoop when 1+loop vanishes identically.
RationalTF tf_feedback(const RationalTF& loop);
// 1/(1+loop).
RationalTF tf_sensitivity(const RationalTF& loop);

// Largest relative discrepancy |a(s)-b(s)| / max(|a(s)|,|b(s)|,floor) over points.
double max_rel_diff(const RationalTF& a, const RationalTF& b, const std::vector<cplx>& points,
                    double floor = 1e-300);

using CMat2 = Eigen::Matrix2cd;

// 2x2 matrix of transfer functions, row-major storage.
class TFMatrix2 {
public:
    TFMatrix2() = default;
    TFMatrix2(RationalTF a, RationalTF b, RationalTF c, RationalTF d) : e_{a, b, c, d} {}

    static TFMatrix2 identity() { return TFMatrix2(1.0, 0.0, 0.0, 1.0); }
    static TFMatrix2 zero() { return TFMatrix2(0.0, 0.0, 0.0, 0.0); }
    static TFMatrix2 diag(const RationalTF& a, const RationalTF& d) { return TFMatrix2(a, 0.0, 0.0, d); }

    const RationalTF& operator()(int r, int c) const { return e_[2 * r + c]; }
    RationalTF& operator()(int r, int c) { return e_[2 * r + c]; }

    CMat2 eval(cplx s) const;
    RationalTF det() const;
    // Adjugate over determinant; throws SingularLoop if det is identically zero.
    TFMatrix2 inverse() const;
    TFMatrix2 transpose() const;
    TFMatrix2 cancelled(double rel_tol = 1e-9) const;

    friend TFMatrix2 operator+(const TFMatrix2& a, const TFMatrix2& b);
    friend TFMatrix2 operator-(const TFMatrix2& a, const TFMatrix2& b);
    friend TFMatrix2 operator*(const TFMatrix2& a, const TFMatrix2& b);
    friend TFMatrix2 operator*(const RationalTF& k, const TFMatrix2& a);

private:
    std::array<RationalTF, 4> e_{};
};

CMat2 mimo_eval(const TFMatrix2& m, cplx s);

}  // namespace gridforge
