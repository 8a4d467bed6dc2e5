#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "gridforge/errors.hpp"
#include "gridforge/metrics.hpp"
#include "gridforge/simulator.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* kSingle = R"({
  "schema_version": 1, "name": "one", "base": {"V": 170, "I": 30},
  "inverters": [{"name": "a", "C": 4e-05, "L": 0.0033, "R": 0.2, "vdc": 250, "line": {"R": 0.1, "X": 0.7}}],
  "load": {"events": [{"t": 0, "pu": 1.0}, {"t": 0.8, "pu": 1.2}]},
  "sim": {"duration": 1.6, "decimate": 10}
})";

// Piecewise-constant record whose d-current steps at each event, with
// omega and v_C^d following prescribed linear laws of the mismatch.
TimeSeries fixture(const Scenario& sc, const std::vector<double>& event_t, const std::vector<double>& ild,
                   double slope_w, double slope_v, double t_end, double dt) {
    TimeSeries ts;
    for (const char* c : {"t", "P_a", "Q_a", "vd_a", "vq_a", "w_a", "ild_a", "ilq_a", "m_a", "pcc_vd", "pcc_v",
                          "pcc_f", "P_load", "P_grid", "P_loss", "breaker"})
        ts.add_column(c, "");
    const InverterSetup& inv = sc.inverters[0];
    for (double t = 0.0; t < t_end - 1e-12; t += dt) {
        std::size_t seg = 0;
        while (seg < event_t.size() && t >= event_t[seg]) ++seg;
        const double id = ild[seg];
        const double iq = 3.0 * static_cast<double>(seg);
        const double w = sc.omega0 + slope_w * (inv.i0.d - id);
        const double vd = inv.v0 + slope_v * (inv.i0.q - iq);
        ts.append_row({t, vd * id, -vd * iq, vd, 0.0, w, id, iq, 0.7, vd, sc.v2, w / (2.0 * 3.141592653589793),
                       vd * id, 0.0, 0.0, 0.0});
    }
    for (double te : event_t) ts.events.push_back({te, "load set to 1 ohm"});
    ts.events.push_back({0.05, "a modulation saturated"});
    return ts;
}

}  // namespace

TEST_CASE("least-squares slope", "[metrics]") {
    CHECK_THAT(ls_slope({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0}), WithinRel(2.0, 1e-15));
    CHECK(std::isnan(ls_slope({1.0, 1.0}, {2.0, 3.0})));
    CHECK(std::isnan(ls_slope({1.0}, {2.0})));
}

TEST_CASE("synthetic fixture recovers the injected slopes", "[metrics]") {
    const Scenario sc = build_scenario(kSingle);
    const double sw = -0.0123, sv = 0.456;
    const TimeSeries ts = fixture(sc, {1.0, 2.0, 3.0}, {90.0, 110.0, 100.0, 80.0}, sw, sv, 4.0, 1e-3);
    const MetricsReport m = compute_metrics(ts, sc);
    REQUIRE(m.windows.size() == 4);
    REQUIRE(m.events.size() == 3);
    CHECK_THAT(m.dw_per_did[0], WithinRel(sw, 1e-9));
    CHECK_THAT(m.dv_per_diq[0], WithinRel(sv, 1e-9));
    // Non-boundary events do not split windows.
    CHECK(m.events[0].t == 1.0);
    CHECK_THAT(m.events[0].sharing[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(m.events[0].settle_time, WithinAbs(0.0, 1e-12));
    const double f_pre = (sc.omega0 + sw * (sc.inverters[0].i0.d - 90.0)) / (2.0 * 3.141592653589793);
    const double f_post = (sc.omega0 + sw * (sc.inverters[0].i0.d - 110.0)) / (2.0 * 3.141592653589793);
    CHECK_THAT(m.events[0].freq_step_hz, WithinAbs(f_post - f_pre, 1e-9));

    CHECK(m.csv_header().rfind("windows,events,share0_a", 0) == 0);
    CHECK(m.to_text().find("droop slopes:") != std::string::npos);
}

TEST_CASE("short segments are rejected", "[metrics]") {
    const Scenario sc = build_scenario(kSingle);
    // 0.3 s between events leaves a 0.15 s window, 9 periods at 60 Hz.
    const TimeSeries ts = fixture(sc, {1.0, 1.3}, {90.0, 110.0, 100.0}, 0.01, 0.1, 2.5, 1e-3);
    CHECK_THROWS_AS(compute_metrics(ts, sc), InsufficientWindow);
    MetricsOptions relaxed;
    relaxed.min_periods = 5.0;
    CHECK_NOTHROW(compute_metrics(ts, sc, relaxed));

    TimeSeries tiny;
    tiny.add_column("t", "s");
    tiny.append_row({0.0});
    CHECK_THROWS_AS(compute_metrics(tiny, sc), InsufficientWindow);
}

TEST_CASE("settling time", "[metrics]") {
    TimeSeries ts;
    ts.add_column("t", "s");
    ts.add_column("y", "");
    for (int i = 0; i < 1000; ++i) {
        const double t = i * 1e-3;
        ts.append_row({t, t < 0.5 ? 0.0 : 1.0 + std::exp(-(t - 0.5) / 0.02)});
    }
    // 1 + e^{-x/0.02} enters the 2% band once x > 0.02 ln 50.
    const double got = settling_time(ts, {"y"}, 0.5, 1.0, 0.9, 0.02);
    CHECK_THAT(got, WithinAbs(0.02 * std::log(50.0), 2e-3));
}

TEST_CASE("simulated droop slope follows the frequency gain", "[metrics]") {
    const Scenario sc = build_scenario(kSingle);
    const TimeSeries ts = Simulator(sc).run();
    const MetricsReport m = compute_metrics(ts, sc);
    const ControllerSet& cs = sc.inverters[0].controller;
    CHECK_THAT(m.dw_per_did[0], WithinRel(cs.alpha_q / sc.v2, 0.05));
}
