#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "gridforge/errors.hpp"
#include "gridforge/report.hpp"
#include "gridforge/scenario.hpp"

using namespace gridforge;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* kSingle = R"({
  "schema_version": 1,
  "name": "single",
  "base": {"V": 170, "I": 30},
  "inverters": [
    {"C": 4e-05, "L": 0.0033, "R": 0.2, "vdc": 250, "line": {"R": 0.1, "X": 0.7}}
  ],
  "load": {"events": [{"t": 0, "pu": 1.0}, {"t": 0.5, "pu": 1.2}]},
  "sim": {"duration": 1.0}
})";

std::string validation_path(const std::string& text, const std::vector<std::string>& ov = {}) {
    try {
        build_scenario(text, ov);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("bundled three-inverter scenario", "[scenario]") {
    const Scenario sc = load_scenario_file(bundled_scenario_path("table1_three_inverter"));
    REQUIRE(sc.inverters.size() == 3);
    CHECK_THAT(sc.inverters[0].share, WithinAbs(0.2, 1e-15));
    CHECK_THAT(sc.inverters[1].share, WithinAbs(0.3, 1e-15));
    CHECK_THAT(sc.inverters[2].share, WithinAbs(0.5, 1e-15));
    CHECK(sc.base.I == 100.0);
    CHECK_THAT(sc.base.Z(), WithinRel(1.7, 1e-15));
    // 1 pu of resistive load draws I_base at V_base.
    CHECK_THAT(sc.load_at(0.0), WithinRel(1.7, 1e-15));
    CHECK_THAT(sc.load_at(5.0), WithinRel(1.7 / 1.2, 1e-15));
    CHECK_THAT(sc.load_at(4.999), WithinRel(1.7, 1e-15));
    CHECK(sc.inverters[2].theta0 == 0.02);
    for (const InverterSetup& inv : sc.inverters) {
        CHECK(inv.controller.beta_d == 0.0);
        CHECK(inv.controller.alpha_q > 0.0);
    }
}

TEST_CASE("minimal single-inverter scenario", "[scenario]") {
    const Scenario sc = build_scenario(kSingle);
    CHECK(sc.name == "single");
    REQUIRE(sc.inverters.size() == 1);
    CHECK_FALSE(sc.has_grid);
    CHECK(sc.inverters[0].name == "inv1");
    CHECK(sc.inverters[0].share == 1.0);
    CHECK(sc.sim.dt == 5e-6);
    CHECK(sc.sim.ts == 5e-5);
    CHECK_THAT(sc.omega0, WithinRel(2.0 * 3.141592653589793 * 60.0, 1e-15));
    // Operating-point setpoints place the full load on the single unit.
    const InverterSetup& inv = sc.inverters[0];
    CHECK_THAT(std::hypot(inv.i0.d, inv.i0.q), WithinRel(30.0, 1e-12));
    CHECK(inv.v0 > 170.0);
}

TEST_CASE("overrides", "[scenario]") {
    const Scenario sc = build_scenario(kSingle, {"sim.duration=0.25", "inverters.0.line.X=0.9", "name=renamed"});
    CHECK(sc.sim.duration == 0.25);
    CHECK_THAT(sc.inverters[0].line.X, WithinRel(0.9, 1e-15));
    CHECK(sc.name == "renamed");
    CHECK(sc.overrides.size() == 3);
    CHECK(sc.hash() != build_scenario(kSingle).hash());
    CHECK(build_scenario(kSingle).hash() == build_scenario(kSingle).hash());
    CHECK(sc.hash().size() == 16);

    CHECK_THROWS_AS(build_scenario(kSingle, {"no_equals_sign"}), ValidationError);
    CHECK_THROWS_AS(build_scenario(kSingle, {"sim..dt=1"}), ValidationError);
}

TEST_CASE("validation errors name the offending field", "[scenario]") {
    CHECK(validation_path(kSingle, {"inverters.0.L=-1"}) == "inverters[0].L");
    CHECK(validation_path(kSingle, {"inverters.0.line.X=0"}) == "inverters[0].line.X");
    CHECK(validation_path(kSingle, {"schema_version=2"}) == "schema_version");
    CHECK(validation_path(kSingle, {"sim.ts=7e-6"}) == "sim.ts");
    CHECK(validation_path(kSingle, {"sim.ts=1e-6"}) == "sim.ts");
    CHECK(validation_path(kSingle, {"load.events.1.t=0"}) == "load.events[1].t");
    CHECK(validation_path(kSingle, {"load.kind=\"battery\""}) == "load.kind");
    CHECK(validation_path(kSingle, {"inverters=[]"}) == "inverters");
    CHECK(validation_path(kSingle, {"design={\"family\":\"capacitive\"}"}) == "design.family");
    CHECK(validation_path("{not json") == "");
    CHECK(validation_path(kSingle) == "<accepted>");
    // A full 100 A through one unit needs more than vdc at the bridge.
    CHECK(validation_path(kSingle, {"base.I=100"}) == "inverters[0].vdc");
}

TEST_CASE("grid section", "[scenario]") {
    const Scenario sc = load_scenario_file(bundled_scenario_path("grid_tie"));
    REQUIRE(sc.has_grid);
    CHECK(sc.grid.amplitude > 0.0);
    CHECK_FALSE(sc.grid.events.empty());
    CHECK(validation_path(sc.source_text, {"grid.breaker.0.action=\"toggle\""}) == "grid.breaker[0].action");
}

TEST_CASE("design spec documents", "[scenario]") {
    const std::string text = R"({
      "schema_version": 1, "name": "inv1", "f0_hz": 60, "v2": 170,
      "inverter": {"C": 4e-05, "L": 0.0033, "R": 0.2, "vdc": 250},
      "line": {"R": 0.1, "X": 0.7},
      "family": "inductive", "pm": 53, "tau": 0.001, "gamma_d": 0.5, "gamma_q": 107.9
    })";
    const DesignDocument doc = parse_design_spec(text);
    CHECK(doc.name == "inv1");
    const ControllerSet cs = synthesize(doc.spec);
    CHECK_THAT(cs.tau, WithinRel(1e-3, 1e-12));
    CHECK(format_inner_compensator(cs) == "(0.0033s+0.2)/(0.001s)");

    CHECK_THROWS_AS(parse_design_spec(text, {"pm=95"}).spec.validate(), Infeasible);
    CHECK_THROWS_AS(parse_design_spec(apply_overrides(text, {"tau=null"})), ValidationError);
}

TEST_CASE("controller files round-trip", "[scenario]") {
    const Scenario sc = build_scenario(kSingle);
    ControllerSet cs = with_notch(sc.inverters[0].controller, 400.0, 0.05, 0.5);
    const ControllerSet back = controller_from_json(controller_to_json(cs));
    CHECK(back.k == cs.k);
    CHECK(back.z == cs.z);
    CHECK(back.tau == cs.tau);
    CHECK(back.alpha_q == cs.alpha_q);
    CHECK(back.family == cs.family);
    REQUIRE(back.notch);
    CHECK(controller_to_json(back) == controller_to_json(cs));

    CHECK_THROWS_AS(controller_from_json(apply_overrides(controller_to_json(cs), {"notch.xi0=0.01"})),
                    ValidationError);
}
