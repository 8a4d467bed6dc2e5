#include "gridforge/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridforge {

void InverterParams::validate() const {
    if (!(C > 0.0 && L > 0.0 && R > 0.0 && vdc > 0.0))
        throw std::invalid_argument("inverter parameters C, L, R, vdc must be strictly positive");
}

DQPair dq_transform(double alpha, double beta, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {alpha * c + beta * s, -alpha * s + beta * c};
}

AlphaBeta dq_inverse(const DQPair& x, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {x.d * c - x.q * s, x.d * s + x.q * c};
}

InverterDerivative plant_derivatives(const InverterState& x, const ControlInput& u,
                                     const DQPair& i_load, const InverterParams& p) {
    InverterDerivative dx;
    dx.diL.d = (u.u_d - p.R * x.iL.d) / p.L;
    dx.diL.q = (u.u_q - p.R * x.iL.q) / p.L;
    dx.dvC.d = (x.iL.d - i_load.d) / p.C + u.theta_dot * x.vC.q;
    dx.dvC.q = (x.iL.q - i_load.q) / p.C - u.theta_dot * x.vC.d;
    dx.dtheta = u.theta_dot;
    return dx;
}

Modulation modulation_from_u(const ControlInput& u, const InverterState& x, const InverterParams& p) {
    if (!(p.vdc > 0.0)) throw std::invalid_argument("vdc must be positive");
    Modulation m;
    m.md = (u.u_d - p.L * u.theta_dot * x.iL.q + x.vC.d) / p.vdc;
    m.mq = (u.u_q + p.L * u.theta_dot * x.iL.d + x.vC.q) / p.vdc;
    m.saturated = std::hypot(m.md, m.mq) > 1.0;
    return m;
}

ControlInput u_from_modulation(const Modulation& m, double theta_dot, const InverterState& x,
                               const InverterParams& p) {
    return {m.md * p.vdc + p.L * theta_dot * x.iL.q - x.vC.d,
            m.mq * p.vdc - p.L * theta_dot * x.iL.d - x.vC.q, theta_dot};
}

ControlInput SaturationBounds::clamp(const ControlInput& u) const {
    return {std::clamp(u.u_d, lo_d, hi_d), std::clamp(u.u_q, lo_q, hi_q), u.theta_dot};
}

SaturationBounds saturation_bounds(const InverterState& x, double theta_dot, const InverterParams& p) {
    const double cd = p.L * theta_dot * x.iL.q - x.vC.d;
    const double cq = -p.L * theta_dot * x.iL.d - x.vC.q;
    return {-p.vdc + cd, p.vdc + cd, -p.vdc + cq, p.vdc + cq};
}

RationalTF current_plant(const InverterParams& p) { return RationalTF(Poly{1.0}, Poly{p.R, p.L}); }

PowerPair instantaneous_power(const DQPair& vC, const DQPair& i_load) {
    return {vC.d * i_load.d + vC.q * i_load.q, vC.q * i_load.d - vC.d * i_load.q, true};
}

}  // namespace gridforge
