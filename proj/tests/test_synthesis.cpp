#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "gridforge/errors.hpp"
#include "gridforge/frequency.hpp"
#include "gridforge/lineloop.hpp"
#include "gridforge/synthesis.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;
const double kW0 = 2.0 * kPi * 60.0;
const InverterParams kInv1{40e-6, 3.3e-3, 0.2, 250.0};

DesignSpec base_spec(DesignFamily fam, double gd = 1.0, double gq = 1.0) {
    DesignSpec s;
    s.wc = 2500.0;
    s.pm = 53.0;
    s.inverter = kInv1;
    s.line = LinePhasor::from_rx(0.1, 0.7, 170.0, kW0);
    s.gamma_d = gd;
    s.gamma_q = gq;
    s.family = fam;
    return s;
}

std::vector<cplx> probe_points(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-300.0, 300.0), im(-3000.0, 3000.0);
    std::vector<cplx> p;
    for (int i = 0; i < n; ++i) p.emplace_back(re(rng), im(rng));
    return p;
}

}  // namespace

TEST_CASE("inner current loop", "[synthesis]") {
    const InnerDesign d = design_inner(kInv1, 1e-3);
    // Stored monic: (0.0033 s + 0.2) / (0.001 s) becomes (3.3 s + 200) / s.
    CHECK_THAT(d.Kc.num()[1], WithinRel(3.3, 1e-12));
    CHECK_THAT(d.Kc.num()[0], WithinRel(200.0, 1e-12));
    CHECK(d.Kc.den() == Poly({0.0, 1.0}));
    CHECK_THAT(d.Kc.freq(1.0).real(), WithinRel(0.0033 / 0.001, 1e-12));
    // Composition with the plant collapses to 1/(tau s).
    const cplx s(0.0, 50.0);
    CHECK(std::abs(d.Lc.eval(s) - 1.0 / (1e-3 * s)) < 1e-12 * std::abs(1.0 / (1e-3 * s)));
    CHECK(std::abs((d.Kc * current_plant(kInv1)).eval(s) - 1.0 / (1e-3 * s)) < 1e-12 * 20.0);
    CHECK_THAT(std::abs(d.Tc.freq(1000.0)), WithinRel(1.0 / std::sqrt(2.0), 1e-12));
    CHECK(d.Tc.den().degree() == 1);
    CHECK_THROWS(design_inner(kInv1, 0.0));
}

TEST_CASE("lag voltage design", "[synthesis]") {
    DesignSpec s = base_spec(DesignFamily::general);
    s.wc = 100.0;
    s.pm = 45.0;
    const LagDesign d = design_lag(s);
    CHECK_THAT(d.tau * d.z, WithinAbs(0.17157, 5e-6));
    CHECK_THAT(d.z, WithinAbs(41.42, 5e-3));
    CHECK_THAT(d.tau, WithinAbs(4.142e-3, 5e-7));
    const Margin m = phase_margin(d.loop);
    CHECK_THAT(m.margin_deg, WithinAbs(45.0, 0.5));
    CHECK_THAT(m.crossover, WithinRel(100.0, 1e-3));
    CHECK_THAT(std::abs(d.loop.freq(100.0)), WithinRel(1.0, 1e-12));
}

TEST_CASE("property: small lag ratio costs under a degree of phase", "[synthesis][property]") {
    for (double pm : {40.0, 53.0, 60.0}) {
        DesignSpec s = base_spec(DesignFamily::general);
        s.pm = pm;
        const LagDesign pi = design_lag(s, 0.0);
        const LagDesign lag = design_lag(s, 0.01);
        const double ph_pi = std::arg(pi.loop.freq(s.wc)), ph_lag = std::arg(lag.loop.freq(s.wc));
        CHECK(std::abs(ph_pi - ph_lag) * 180.0 / kPi < 1.0);
        CHECK_THAT(phase_margin(pi.loop).margin_deg, WithinAbs(pm, 1e-6));
    }
}

TEST_CASE("infeasible design targets", "[synthesis]") {
    DesignSpec s = base_spec(DesignFamily::inductive);
    s.pm = 95.0;
    CHECK_THROWS_AS(design_lag(s), Infeasible);
    s.pm = 0.0;
    CHECK_THROWS_AS(synthesize(s), Infeasible);
    s.pm = 53.0;
    s.wc = -1.0;
    CHECK_THROWS_AS(synthesize(s), Infeasible);
}

TEST_CASE("q-axis PI and PLL filter", "[synthesis]") {
    const RationalTF kq = design_pi_q(2.0, 40.0);
    CHECK_THAT(std::abs(kq.freq(40.0)), WithinRel(2.0 * std::sqrt(2.0), 1e-12));
    CHECK(kq.poles().size() == 1);
    CHECK(std::abs(kq.poles()[0]) == 0.0);

    const RationalTF h = design_pll(0.3, 40.0);
    REQUIRE(h.poles().size() == 1);
    CHECK(std::abs(h.poles()[0]) == 0.0);
    const RationalTF flat = design_pll(0.0, 40.0).cancelled();
    CHECK_THAT(std::abs(flat.freq(7.0) - 1.0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("normalized gains", "[synthesis]") {
    const NormalizedGains g = normalize_gains(1.0, 1.0, LinePhasor::from_rx(0.1, 0.7, 1.0, kW0), 1.0);
    CHECK_THAT(g.beta_d, WithinAbs(0.1414, 5e-5));
    CHECK_THAT(g.alpha_d, WithinAbs(0.9899, 5e-5));
    CHECK(g.beta_d == g.beta_q);

    const NormalizedGains ind = normalize_gains(2.0, 3.0, LinePhasor::from_rx(0.0, 0.7, 1.0, kW0), 5.0);
    CHECK(ind.beta_d == 0.0);
    CHECK(ind.beta_q == 0.0);
    const NormalizedGains res = normalize_gains(2.0, 3.0, LinePhasor::from_rx(0.7, 0.0, 1.0, kW0), 5.0);
    CHECK(res.alpha_d == 0.0);
    CHECK(res.alpha_q == 0.0);
}

TEST_CASE("property: normalization geometry", "[synthesis][property]") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> z(0.01, 3.0), g(0.1, 200.0), kk(0.01, 10.0);
    for (int i = 0; i < 100; ++i) {
        const LinePhasor line = LinePhasor::from_rx(z(rng), z(rng), 170.0, kW0);
        const double gd = g(rng), gq = g(rng), k = kk(rng);
        const NormalizedGains n = normalize_gains(gd, gq, line, k);
        CHECK_THAT(std::pow(n.beta_d / (k * gd), 2) + std::pow(n.alpha_d / gd, 2), WithinRel(1.0, 1e-12));
        CHECK_THAT(std::pow(n.beta_q / (k * gq), 2) + std::pow(n.alpha_q / gq, 2), WithinRel(1.0, 1e-12));
        CHECK_THAT(n.beta_d / (k * n.alpha_d), WithinRel(line.R / line.X, 1e-12));
        CHECK_THAT(n.beta_q / (k * n.alpha_q), WithinRel(line.R / line.X, 1e-12));
    }
}

TEST_CASE("family constraints on synthesized sets", "[synthesis]") {
    const ControllerSet ind = synthesize(base_spec(DesignFamily::inductive, 0.5, 107.9));
    CHECK(ind.beta_d == 0.0);
    CHECK(ind.alpha_d > 0.0);
    CHECK(ind.tau > 0.0);
    CHECK(ind.z > 0.0);
    CHECK(ind.k > 0.0);
    CHECK_THAT(phase_margin(RationalTF(ind.Kv_d) * RationalTF(Poly{1.0}, Poly{1.0, ind.tau} * Poly{0.0, ind.C_nom}))
                   .margin_deg,
               WithinAbs(53.0, 1e-6));

    const ControllerSet res = synthesize(base_spec(DesignFamily::resistive));
    CHECK(res.alpha_d == 0.0);
    CHECK(res.alpha_q == 0.0);
    CHECK(res.Keta_d.is_zero());
    CHECK(res.Keta_q.is_zero());

    const ControllerSet gen = synthesize(base_spec(DesignFamily::general, 2.0, 2.0));
    const NormalizedGains n = normalize_gains(2.0, 2.0, base_spec(DesignFamily::general).line, gen.k);
    CHECK_THAT(gen.beta_d, WithinRel(n.beta_d, 1e-12));
    CHECK_THAT(gen.alpha_q, WithinRel(n.alpha_q, 1e-12));
}

TEST_CASE("coupling filters", "[synthesis]") {
    const CouplingPair c = design_coupling(0.8, 0.6, 0.05, 40.0);
    CHECK_THAT(c.Keta_d.eval(cplx(0.0)).real(), WithinRel(0.8, 1e-15));
    // Blocking zero: K_eta^q vanishes at DC, K_eta^q H does not.
    CHECK(std::abs(c.Keta_q.eval(cplx(0.0))) == 0.0);
    const RationalTF kh = (c.Keta_q * design_pll(0.05, 40.0)).cancelled();
    CHECK_THAT(kh.eval(cplx(0.0)).real(), WithinRel(0.6, 1e-9));

    const CouplingPair zero = design_coupling(0.0, 0.0, 0.05, 40.0);
    CHECK(zero.Keta_d.is_zero());
    CHECK(zero.Keta_q.is_zero());
}

TEST_CASE("virtual inductor equality for equal scaling", "[synthesis]") {
    for (double gamma : {0.5, 3.0, 20.0}) {
        const ControllerSet cs = synthesize(base_spec(DesignFamily::general, gamma, gamma));
        const cplx kd = cs.Keta_d.eval(cplx(0.0));
        const cplx kqh = (cs.Keta_q * cs.H_pll).cancelled().eval(cplx(0.0));
        CHECK(std::abs(kd - kqh) <= 1e-9 * std::abs(kd));
        // The shared DC value is gamma X / Zbar, an inductance at the line frequency.
        CHECK_THAT(kd.real(), WithinRel(gamma * 0.7 / std::sqrt(0.5), 1e-9));
    }
}

TEST_CASE("PLL filter recovers the current-error combination", "[synthesis]") {
    const ControllerSet cs = synthesize(base_spec(DesignFamily::general, 2.0, 3.0));
    // Near DC, H/K_v^q tends to beta_q/k and K_eta^q H to alpha_q: the weights
    // on the q and d current errors in the PLL input.
    const double w = 1e-4;
    const cplx Hv = cs.H_pll.freq(w);
    const cplx Kq = cs.Kv_q.freq(w);
    const cplx Kh = (cs.Keta_q * cs.H_pll).cancelled().freq(w);
    const cplx coef_q = Hv / Kq;
    CHECK(std::abs(Kh - cs.alpha_q) < 1e-6 * cs.alpha_q);
    CHECK(std::abs(coef_q - cs.beta_q / cs.k) < 1e-5 * (cs.beta_q / cs.k));
}

TEST_CASE("ki matrix", "[synthesis]") {
    const ControllerSet cs = synthesize(base_spec(DesignFamily::general, 2.0, 3.0));
    const TFMatrix2 ki = ki_matrix(cs);
    const LineModel lm = LineModel::from_rx(0.1, 0.7, kW0);
    const CMat2 g0 = line_tf(lm).eval(cplx(0.0));
    const CMat2 prod = ki.eval(cplx(0.0)) * g0;
    CMat2 want = CMat2::Zero();
    want(0, 0) = 2.0 / lm.Zbar();
    want(1, 1) = 3.0 / lm.Zbar();
    CHECK((prod - want).norm() < 1e-10);

    const CMat2 hi = ki.eval(cplx(0.0, 1e12));
    CHECK((hi - CMat2::Identity() / cs.k).norm() < 1e-7 / cs.k);

    const ControllerSet res = synthesize(base_spec(DesignFamily::resistive));
    const CMat2 r = ki_matrix(res).eval(cplx(3.0, 40.0));
    CHECK(std::abs(r(0, 1)) == 0.0);
    CHECK(std::abs(r(1, 0)) == 0.0);
}

TEST_CASE("property: DC identity holds on any line", "[synthesis][property]") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> z(0.01, 3.0), g(0.1, 50.0);
    for (int i = 0; i < 30; ++i) {
        const double R = z(rng), X = z(rng), gd = g(rng), gq = g(rng);
        DesignSpec s = base_spec(DesignFamily::general, gd, gq);
        s.line = LinePhasor::from_rx(R, X, 170.0, kW0);
        ControllerSet cs;
        try {
            cs = synthesize(s);
        } catch (const Infeasible&) {
            continue;  // beta_d >= 1 for this draw
        }
        const LineModel lm = LineModel::from_rx(R, X, kW0);
        const CMat2 prod = ki_matrix(cs).eval(cplx(0.0)) * line_tf(lm).eval(cplx(0.0));
        CMat2 want = CMat2::Zero();
        want(0, 0) = gd / lm.Zbar();
        want(1, 1) = gq / lm.Zbar();
        CHECK((prod - want).norm() < 1e-10 * want.norm());
    }
}

TEST_CASE("resonance parameters", "[synthesis]") {
    ControllerSet cs;
    cs.k = 2.0;
    cs.z = 40.0;
    cs.gamma_d = 1.0;
    cs.gamma_q = 4.0;
    const LinePhasor line = LinePhasor::from_rx(0.1, 0.7, 170.0, kW0);
    CHECK_THAT(resonance_params(cs, line).w_i, WithinRel(160.0, 1e-15));
    cs.gamma_q = 1.0;
    CHECK_THAT(resonance_params(cs, line).xi_i, WithinRel(0.1 / line.Zbar, 1e-15));
    CHECK(resonance_params(cs, LinePhasor::from_rx(0.0, 0.7, 170.0, kW0)).xi_i == 0.0);
    cs.gamma_d = 0.0;
    CHECK_THROWS(resonance_params(cs, line));
}

TEST_CASE("notch and PR pair", "[synthesis]") {
    const double wi = 300.0, xi = 0.02, xi0 = 0.2;
    const NotchPair n = design_notch(wi, xi, xi0);
    CHECK_THAT(std::abs(n.Hn.freq(wi)), WithinRel(xi / xi0, 1e-12));
    CHECK_THAT(std::abs(n.Hn.eval(cplx(0.0))), WithinRel(1.0, 1e-15));
    CHECK_THAT(std::abs(n.Hn.freq(1e9)), WithinRel(1.0, 1e-9));
    // Explicit PR form 1 + 2(xi0 - xi) wi s / (s^2 + 2 xi wi s + wi^2).
    const RationalTF pr = RationalTF(1.0) + RationalTF(Poly{0.0, 2.0 * (xi0 - xi) * wi}, Poly{wi * wi, 2.0 * xi * wi, 1.0});
    for (const cplx& s : probe_points(20, 61)) {
        CHECK(std::abs(n.Hn.eval(s) * n.Hpr.eval(s) - 1.0) < 1e-10);
        CHECK(std::abs(pr.eval(s) - n.Hpr.eval(s)) < 1e-10 * std::abs(n.Hpr.eval(s)));
    }
    CHECK_THROWS(design_notch(wi, 0.2, 0.1));
}

TEST_CASE("notch installation keeps the law consistent", "[synthesis]") {
    const ControllerSet cs = synthesize(base_spec(DesignFamily::general, 2.0, 2.0));
    const ControllerSet nc = with_notch(cs, 300.0, 0.02, 0.2);
    REQUIRE(nc.notch);
    REQUIRE(nc.pr);
    for (const cplx& s : probe_points(10, 67)) {
        const CMat2 a = ki_matrix(nc).eval(s), b = ki_matrix(cs).eval(s) * nc.pr->eval(s);
        CHECK((a - b).norm() < 1e-10 * b.norm());
        CHECK(std::abs(nc.Kv_d_eff().eval(s) - cs.Kv_d.eval(s) * nc.notch->eval(s)) <
              1e-10 * std::abs(nc.Kv_d_eff().eval(s)));
    }
    const ControllerSet plain = with_notch(nc, 0.0, 0.0, 0.0);
    CHECK_FALSE(plain.notch);
}

TEST_CASE("steady-state droop equivalence", "[synthesis]") {
    const ControllerSet cs = synthesize(base_spec(DesignFamily::general, 2.0, 3.0));
    const DroopDeviation zero = steady_state_droop(cs, DesignFamily::general, {}, 170.0);
    CHECK(zero.dv == 0.0);
    CHECK(zero.dw == 0.0);

    ControllerSet unit;
    unit.alpha_q = 1.0;
    unit.k = 1.0;
    const DroopDeviation d = steady_state_droop(unit, DesignFamily::inductive, {0.2, 0.0}, 1.0);
    CHECK_THAT(d.dw, WithinRel(0.2, 1e-15));
}

TEST_CASE("property: polar droop form agrees with the component form", "[synthesis][property]") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> ang(0.0, kPi / 2.0), cur(-20.0, 20.0), g(0.2, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double phi = ang(rng), gd = g(rng), gq = g(rng), v2 = 170.0;
        DesignSpec s = base_spec(DesignFamily::general, gd, gq);
        s.line = LinePhasor::from_rx(0.7 * std::cos(phi), 0.7 * std::sin(phi), v2, kW0);
        const ControllerSet cs = synthesize(s);
        const DQPair di{cur(rng), cur(rng)};
        const DroopDeviation a = steady_state_droop(cs, DesignFamily::general, di, v2);
        const DroopDeviation b = steady_state_droop_polar(gd, gq, s.line.phi, di, v2);
        CHECK_THAT(a.dv, WithinAbs(b.dv, 1e-9 * (1.0 + std::abs(b.dv))));
        CHECK_THAT(a.dw, WithinAbs(b.dw, 1e-9 * (1.0 + std::abs(b.dw))));
        CHECK_THAT(mismatch_norm(gd, gq, b, v2), WithinRel(std::hypot(di.d, di.q), 1e-12));
    }
}

TEST_CASE("general droop reduces to the resistive and inductive forms", "[synthesis]") {
    const DQPair di{3.0, -4.0};
    const double v2 = 170.0;
    ControllerSet cs = synthesize(base_spec(DesignFamily::general, 2.0, 3.0));

    DesignSpec res = base_spec(DesignFamily::general, 2.0, 3.0);
    res.line = LinePhasor::from_rx(0.7, 0.0, v2, kW0);
    cs = synthesize(res);
    const DroopDeviation gr = steady_state_droop(cs, DesignFamily::general, di, v2);
    const DroopDeviation rr = steady_state_droop(cs, DesignFamily::resistive, di, v2);
    const DroopDeviation pr = steady_state_droop_polar(2.0, 3.0, 0.0, di, v2);
    CHECK_THAT(gr.dv, WithinRel(rr.dv, 1e-12));
    CHECK_THAT(gr.dw, WithinRel(rr.dw, 1e-12));
    CHECK_THAT(pr.dv, WithinRel(rr.dv, 1e-12));

    DesignSpec ind = base_spec(DesignFamily::inductive, 2.0, 3.0);
    ind.line = LinePhasor::from_rx(0.0, 0.7, v2, kW0);
    cs = synthesize(ind);
    const DroopDeviation gi = steady_state_droop(cs, DesignFamily::general, di, v2);
    const DroopDeviation ii = steady_state_droop(cs, DesignFamily::inductive, di, v2);
    const DroopDeviation pi = steady_state_droop_polar(2.0, 3.0, kPi / 2.0, di, v2);
    CHECK_THAT(gi.dv, WithinRel(ii.dv, 1e-12));
    CHECK_THAT(gi.dw, WithinRel(ii.dw, 1e-12));
    CHECK_THAT(pi.dv, WithinRel(ii.dv, 1e-12));
    CHECK_THAT(pi.dw, WithinRel(ii.dw, 1e-12));
}
