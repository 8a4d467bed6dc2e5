#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "gridforge/errors.hpp"
#include "gridforge/frequency.hpp"
#include "gridforge/plant.hpp"
#include "gridforge/rational.hpp"
#include "gridforge/statespace.hpp"
#include "gridforge/synthesis.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<cplx> random_points(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-50.0, 50.0), im(-500.0, 500.0);
    std::vector<cplx> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(re(rng), im(rng));
    return pts;
}

}  // namespace

TEST_CASE("polynomial arithmetic and roots", "[numerics]") {
    const Poly p{2.0, -3.0, 1.0};  // (s - 1)(s - 2)
    CHECK(p.degree() == 2);
    CHECK(p.eval(3.0) == 2.0);
    auto r = p.roots();
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK_THAT(r[0].real(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(r[1].real(), WithinAbs(2.0, 1e-12));
    CHECK((Poly{1.0, 1.0} * Poly{-1.0, 1.0}) == Poly({-1.0, 0.0, 1.0}));
    CHECK(Poly::from_roots({cplx(-1.0, 2.0), cplx(-1.0, -2.0)}) == Poly({5.0, 2.0, 1.0}));
    CHECK(Poly().degree() == -1);
}

TEST_CASE("roots of badly scaled polynomials stay accurate", "[numerics]") {
    // Roots spanning six decades, the spread a closed-loop determinant reaches.
    const std::vector<cplx> want{-1e-2, -3.0, cplx(-50.0, 377.0), cplx(-50.0, -377.0), -6e3, -2e4};
    const Poly p = Poly::from_roots(want);
    const auto got = p.roots();
    REQUIRE(got.size() == want.size());
    for (const cplx& w : want) {
        double best = 1e300;
        for (const cplx& g : got) best = std::min(best, std::abs(g - w));
        CHECK(best <= 1e-6 * std::max(1.0, std::abs(w)));
    }
}

TEST_CASE("series composition keeps factors until cancelled explicitly", "[numerics]") {
    const RationalTF a(Poly{1.0}, Poly{1.0, 1.0});
    const RationalTF b(Poly{1.0, 1.0}, Poly{1.0});
    const RationalTF ab = tf_series(a, b);
    CHECK(ab.num().degree() == 1);
    CHECK(ab.den().degree() == 1);
    const RationalTF c = ab.cancelled();
    CHECK(c.num().degree() == 0);
    CHECK(c.den().degree() == 0);
    CHECK_THAT(c.eval(cplx(0.3, 0.1)).real(), WithinAbs(1.0, 1e-12));
    // Identity is neutral.
    CHECK(max_rel_diff(tf_series(RationalTF(1.0), a), a, random_points(10, 1)) < 1e-15);
}

TEST_CASE("cancellation pairs a roundoff-sized root with an exact zero", "[numerics]") {
    // num has a root at 1e-13 that is really the origin; den has s.
    const RationalTF t(Poly::from_roots({cplx(1e-13), cplx(-5.0)}), Poly::from_roots({cplx(0.0), cplx(-7.0), cplx(-900.0)}));
    const RationalTF c = t.cancelled();
    CHECK(c.den().degree() == 2);
    CHECK_NOTHROW(c.eval(cplx(0.0)));
}

TEST_CASE("inner plant times compensator cancels to an integrator", "[numerics]") {
    const InverterParams p{40e-6, 3.3e-3, 0.2, 250.0};
    const double tau = 1e-3;
    const RationalTF Kc(Poly{p.R, p.L}, Poly{0.0, tau});
    const RationalTF Lc = (Kc * current_plant(p)).cancelled();
    CHECK(Lc.num().degree() == 0);
    CHECK(Lc.den().degree() == 1);
    CHECK_THAT(Lc.num()[0], WithinRel(1.0 / tau, 1e-9));
    CHECK_THAT(Lc.den()[0], WithinAbs(0.0, 1e-9));
}

TEST_CASE("feedback and sensitivity", "[numerics]") {
    const double tau = 1e-3;
    const RationalTF T = tf_feedback(RationalTF(Poly{1.0}, Poly{0.0, tau}));
    const RationalTF want(Poly{1.0}, Poly{1.0, tau});
    CHECK(max_rel_diff(T, want, random_points(20, 2)) < 1e-12);

    // Integrator loop tracks DC exactly.
    CHECK_THAT(std::abs(tf_feedback(RationalTF(Poly{5.0}, Poly::s())).eval(cplx(0.0))), WithinAbs(1.0, 1e-15));

    // Constant loop.
    const double LQ = 0.8;
    CHECK_THAT(tf_feedback(RationalTF(LQ)).eval(cplx(0.0)).real(), WithinRel(LQ / (1.0 + LQ), 1e-15));

    CHECK_THROWS_AS(tf_feedback(RationalTF(-1.0)), DegenerateLoop);
}

TEST_CASE("property: feedback plus sensitivity is one", "[numerics][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const RationalTF loop(Poly{u(rng), u(rng)}, Poly{u(rng), u(rng), 1.0} * Poly{0.0, 1.0});
        const RationalTF T = tf_feedback(loop), S = tf_sensitivity(loop);
        for (const cplx& s : random_points(30, 100 + trial)) {
            const cplx sum = T.eval(s) + S.eval(s);
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("phase margin", "[numerics]") {
    const Margin m = phase_margin(RationalTF(Poly{1.0}, Poly{0.0, 1e-3}));
    CHECK_THAT(m.crossover, WithinRel(1000.0, 1e-6));
    CHECK_THAT(m.margin_deg, WithinAbs(90.0, 1e-6));

    const Margin dbl = phase_margin(RationalTF(Poly{100.0}, Poly{0.0, 0.0, 1.0}));
    CHECK_THAT(dbl.margin_deg, WithinAbs(0.0, 1e-9));
    CHECK_THAT(dbl.crossover, WithinRel(10.0, 1e-6));

    CHECK_THROWS_AS(phase_margin(RationalTF(Poly{0.5}, Poly{1.0, 1.0})), NoCrossover);
}

TEST_CASE("delay phase", "[numerics]") {
    const RationalTF L(Poly{1.0}, Poly{0.0, 1e-3});
    CHECK_THAT(delay_phase(L, 0.0, 500.0), WithinAbs(-90.0, 1e-9));
    CHECK_THAT(delay_phase(RationalTF(1.0), 1e-3, 1000.0), WithinAbs(-57.29577951308232, 1e-9));
    const double t0 = 5e-5;
    const double with = phase_margin(L, t0).margin_deg;
    CHECK_THAT(90.0 - with, WithinAbs(1000.0 * t0 * 180.0 / std::numbers::pi, 1e-6));
}

TEST_CASE("singular values", "[numerics]") {
    const SingularValues id = singular_values(CMat2::Identity());
    CHECK_THAT(id.max, WithinAbs(1.0, 1e-15));
    CHECK_THAT(id.min, WithinAbs(1.0, 1e-15));

    const double R = 0.1, X = 0.7, Z2 = R * R + X * X;
    CMat2 g;
    g << R / Z2, X / Z2, -X / Z2, R / Z2;
    const SingularValues sg = singular_values(g);
    CHECK_THAT(sg.max, WithinRel(1.4142135623730951, 1e-12));
    CHECK_THAT(sg.min, WithinRel(1.4142135623730951, 1e-12));

    CMat2 d = CMat2::Zero();
    d(0, 0) = 0.5;
    const SingularValues sd = singular_values(d);
    CHECK_THAT(sd.max, WithinAbs(0.5, 1e-15));
    CHECK_THAT(sd.min, WithinAbs(0.0, 1e-15));
}

TEST_CASE("property: singular values multiply to |det| and ignore rotations", "[numerics][property]") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> ang(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        CMat2 m;
        m << cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng));
        const SingularValues s = singular_values(m);
        CHECK(s.max >= s.min);
        CHECK(s.min >= 0.0);
        CHECK_THAT(s.max * s.min, WithinRel(std::abs(m.determinant()), 1e-9));
        const double a = ang(rng);
        CMat2 r;
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        const SingularValues sr = singular_values(r * m);
        CHECK_THAT(sr.max, WithinRel(s.max, 1e-12));
        CHECK_THAT(sr.min, WithinAbs(s.min, 1e-12 * s.max));
    }
}

TEST_CASE("mimo evaluation", "[numerics]") {
    const CMat2 id = mimo_eval(TFMatrix2::identity(), cplx(3.0, 4.0));
    CHECK((id - CMat2::Identity()).norm() == 0.0);
}

TEST_CASE("state-space realization", "[numerics]") {
    const StateSpace a = tf_to_ss(RationalTF(Poly{1.0}, Poly{1.0, 1.0}));
    REQUIRE(a.n() == 1);
    CHECK(a.A(0, 0) == -1.0);
    CHECK(a.B(0, 0) * a.C(0, 0) == 1.0);
    CHECK(a.D(0, 0) == 0.0);

    const StateSpace pi = tf_to_ss(RationalTF(Poly{40.0, 1.0}, Poly{0.0, 1.0}));
    CHECK(pi.n() == 1);
    CHECK(pi.D(0, 0) != 0.0);

    CHECK_THROWS_AS(tf_to_ss(RationalTF(Poly{0.0, 0.0, 1.0}, Poly{1.0, 1.0})), ImproperTF);
}

TEST_CASE("property: realization reproduces the frequency response", "[numerics][property]") {
    // Closed voltage loop of a lag design, a realistic fourth-order TF.
    DesignSpec s;
    s.wc = 2500.0;
    s.inverter = {40e-6, 3.3e-3, 0.2, 250.0};
    s.line = LinePhasor::from_rx(0.1, 0.7, 170.0, 2.0 * std::numbers::pi * 60.0);
    s.gamma_d = 1.0;
    s.gamma_q = 1.0;
    const LagDesign lag = design_lag(s);
    const RationalTF Td = tf_feedback(lag.loop);
    const StateSpace ss = tf_to_ss(Td);
    for (double w : log_grid(1.0, 1e5, 4)) {
        const cplx want = Td.freq(w);
        const cplx got = ss.eval(cplx(0.0, w))(0, 0);
        CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
    }
}

TEST_CASE("rk4 step", "[numerics]") {
    StateSpace decay;
    decay.A = Mat::Constant(1, 1, -1.0);
    decay.B = Mat::Zero(1, 1);
    decay.C = Mat::Identity(1, 1);
    decay.D = Mat::Zero(1, 1);
    const Vec x = rk4_step(decay, Vec::Constant(1, 1.0), Vec::Zero(1), 0.1);
    CHECK_THAT(x(0), WithinAbs(0.9048375, 1e-12));
    CHECK_THAT(x(0), WithinAbs(std::exp(-0.1), 1e-6));

    const Vec y = rk4_step([](const Vec& v) { return Vec::Zero(v.size()); }, Vec::Constant(2, 3.0), 0.5);
    CHECK(y(0) == 3.0);

    CHECK_THROWS_AS(rk4_step([](const Vec& v) { return Vec::Constant(v.size(), std::nan("")); }, Vec::Zero(1), 0.1),
                    NonFinite);
}

TEST_CASE("property: rk4 reaches the LTI equilibrium", "[numerics][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 20.0);
    for (int trial = 0; trial < 10; ++trial) {
        // Stable 2-state system with real poles -p1, -p2.
        const double p1 = u(rng), p2 = u(rng) * 10.0, c = u(rng);
        StateSpace m;
        m.A.resize(2, 2);
        m.A << -p1, c, 0.0, -p2;
        m.B = Mat::Identity(2, 2);
        m.C = Mat::Identity(2, 2);
        m.D = Mat::Zero(2, 2);
        const Vec uin = Vec::Constant(2, 1.0);
        const double tau_min = 1.0 / std::max(p1, p2), tau_max = 1.0 / std::min(p1, p2);
        const double dt = tau_min / 20.0;
        Vec x = Vec::Zero(2);
        for (double t = 0.0; t < 20.0 * tau_max; t += dt) x = rk4_step(m, x, uin, dt);
        const Vec want = -m.A.inverse() * m.B * uin;
        CHECK((x - want).norm() <= 1e-3 * want.norm());
    }
}

TEST_CASE("bilinear discretization matches the Tustin substitution", "[numerics]") {
    const RationalTF tf(Poly{150.0, 1.0}, Poly{0.0, 1.0} * Poly{1000.0, 1.0});
    const double T = 5e-5;
    const DiscreteSS d = bilinear(tf_to_ss(tf), T);
    for (double w : {10.0, 300.0, 5000.0}) {
        const cplx z = std::exp(cplx(0.0, w * T));
        const cplx s = (2.0 / T) * (z - 1.0) / (z + 1.0);
        CHECK(std::abs(d.eval_z(z)(0, 0) - tf.eval(s)) <= 1e-9 * std::abs(tf.eval(s)));
    }

    DiscreteFilter f(tf, T);
    CHECK_THAT(f.output(2.0), WithinAbs(f.free_response() + f.feedthrough() * 2.0, 1e-15));
}
