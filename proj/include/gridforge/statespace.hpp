#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gridforge/rational.hpp"

namespace gridforge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct StateSpace {
    Mat A, B, C, D;

    int n() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }
    // Throws std::invalid_argument on inconsistent dimensions.
    void validate() const;

    Eigen::MatrixXcd eval(cplx s) const;
    Vec derivative(const Vec& x, const Vec& u) const { return A * x + B * u; }
    Vec output(const Vec& x, const Vec& u) const { return C * x + D * u; }
};

// Controllable canonical realization; throws ImproperTF if deg num > deg den.
StateSpace tf_to_ss(const RationalTF& tf);

using Dynamics = std::function<Vec(const Vec&)>;

// One classical RK4 step. Throws NonFinite if the result is not finite.
Vec rk4_step(const StateSpace& model, const Vec& x, const Vec& u, double dt);
Vec rk4_step(const Dynamics& f, const Vec& x, double dt);

// Bilinear (Tustin) equivalent x[k+1] = Ad x[k] + Bd u[k], y[k] = Cd x[k] + Dd u[k];
// its transfer function equals the continuous one at s = (2/T)(z-1)/(z+1).
struct DiscreteSS {
    Mat Ad, Bd, Cd, Dd;
    double T = 0.0;
    Eigen::MatrixXcd eval_z(cplx z) const;
};

DiscreteSS bilinear(const StateSpace& ss, double T);

// Runtime wrapper for a discretized SISO block.
class DiscreteFilter {
public:
    DiscreteFilter() = default;
    DiscreteFilter(const RationalTF& tf, double T);

    // Output for input u given the current state (no state change).
    double output(double u) const;
    // Contribution of the state alone and the direct-feedthrough gain;
    // output(u) == free_response() + feedthrough() * u.
    double free_response() const;
    double feedthrough() const { return d_; }
    void update(double u);
    void reset() { x_.setZero(); }
    const Vec& state() const { return x_; }
    void set_state(const Vec& x) { x_ = x; }
    int order() const { return static_cast<int>(x_.size()); }

private:
    Mat A_;
    Vec b_, c_;
    double d_ = 0.0;
    Vec x_;
};

}  // namespace gridforge
