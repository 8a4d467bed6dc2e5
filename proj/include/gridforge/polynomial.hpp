#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace gridforge {

using cplx = std::complex<double>;

// Real polynomial, coefficients ascending in s: c[0] + c[1] s + ... .
// Trailing exact zeros are stripped so degree() is the index of the last
// nonzero coefficient; the zero polynomial has degree -1.
class Poly {
public:
    Poly() = default;
    Poly(std::initializer_list<double> c);
    explicit Poly(std::vector<double> c);

    static Poly constant(double c) { return Poly{c}; }
    static Poly s() { return Poly{0.0, 1.0}; }
    // Monic polynomial with the given roots; complex roots must come in
    // conjugate pairs (imaginary residue is discarded).
    static Poly from_roots(const std::vector<cplx>& roots, double lead = 1.0);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    double lead() const { return c_.empty() ? 0.0 : c_.back(); }
    double operator[](int i) const;
    const std::vector<double>& coeffs() const { return c_; }
    double max_abs_coeff() const;

    cplx eval(cplx s) const;
    double eval(double s) const;
    // Sum of |c_i||s|^i; the natural scale for judging |p(s)| as "zero".
    double eval_scale(cplx s) const;

    Poly derivative() const;
    // Roots via eigenvalues of the companion matrix.
    std::vector<cplx> roots() const;

    // Drops trailing coefficients smaller than rel_tol * max |c|.
    Poly trimmed(double rel_tol) const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(double k, const Poly& a);
    friend Poly operator*(const Poly& a, double k) { return k * a; }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

private:
    void strip();
    std::vector<double> c_;
};

}  // namespace gridforge
