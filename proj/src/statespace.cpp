#include "gridforge/statespace.hpp"

#include <stdexcept>

#include "gridforge/errors.hpp"

namespace gridforge {

void StateSpace::validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() ||
        D.cols() != B.cols())
        throw std::invalid_argument("inconsistent state-space dimensions");
}

Eigen::MatrixXcd StateSpace::eval(cplx s) const {
    const Eigen::MatrixXcd sI_A = s * Eigen::MatrixXcd::Identity(n(), n()) - A.cast<cplx>();
    return C.cast<cplx>() * sI_A.partialPivLu().solve(B.cast<cplx>()) + D.cast<cplx>();
}

StateSpace tf_to_ss(const RationalTF& tf) {
    if (!tf.is_proper()) throw ImproperTF("improper transfer function " + tf.to_string());
    const int n = tf.den().degree();
    const Poly& a = tf.den();  // monic
    const Poly& b = tf.num();
    StateSpace ss;
    ss.A = Mat::Zero(n, n);
    ss.B = Mat::Zero(n, 1);
    ss.C = Mat::Zero(1, n);
    ss.D = Mat::Constant(1, 1, b[n]);
    for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        ss.A(n - 1, i) = -a[i];
        ss.C(0, i) = b[i] - b[n] * a[i];
    }
    if (n > 0) ss.B(n - 1, 0) = 1.0;
    return ss;
}

namespace {

void check_finite(const Vec& x) {
    if (!x.allFinite()) throw NonFinite("integration produced a non-finite state");
}

}  // namespace

Vec rk4_step(const StateSpace& model, const Vec& x, const Vec& u, double dt) {
    const Vec bu = model.B * u;
    const Vec k1 = model.A * x + bu;
    const Vec k2 = model.A * (x + 0.5 * dt * k1) + bu;
    const Vec k3 = model.A * (x + 0.5 * dt * k2) + bu;
    const Vec k4 = model.A * (x + dt * k3) + bu;
    Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(out);
    return out;
}

Vec rk4_step(const Dynamics& f, const Vec& x, double dt) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * dt * k1);
    const Vec k3 = f(x + 0.5 * dt * k2);
    const Vec k4 = f(x + dt * k3);
    Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(out);
    return out;
}

Eigen::MatrixXcd DiscreteSS::eval_z(cplx z) const {
    const auto n = Ad.rows();
    const Eigen::MatrixXcd zI_A = z * Eigen::MatrixXcd::Identity(n, n) - Ad.cast<cplx>();
    return Cd.cast<cplx>() * zI_A.partialPivLu().solve(Bd.cast<cplx>()) + Dd.cast<cplx>();
}

DiscreteSS bilinear(const StateSpace& ss, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("sample period must be positive");
    const auto n = ss.A.rows();
    const Mat I = Mat::Identity(n, n);
    const Eigen::PartialPivLU<Mat> lu(I - 0.5 * T * ss.A);
    DiscreteSS d;
    d.T = T;
    d.Ad = lu.solve(I + 0.5 * T * ss.A);
    d.Bd = lu.solve(ss.B) * T;
    const Mat M = lu.inverse();
    d.Cd = ss.C * M;
    d.Dd = ss.D + 0.5 * T * ss.C * M * ss.B;
    return d;
}

DiscreteFilter::DiscreteFilter(const RationalTF& tf, double T) {
    const DiscreteSS d = bilinear(tf_to_ss(tf), T);
    A_ = d.Ad;
    b_ = d.Bd.col(0);
    c_ = d.Cd.row(0).transpose();
    d_ = d.Dd(0, 0);
    x_ = Vec::Zero(A_.rows());
}

double DiscreteFilter::free_response() const { return x_.size() ? c_.dot(x_) : 0.0; }

double DiscreteFilter::output(double u) const { return free_response() + d_ * u; }

void DiscreteFilter::update(double u) {
    if (x_.size()) x_ = A_ * x_ + b_ * u;
}

}  // namespace gridforge
