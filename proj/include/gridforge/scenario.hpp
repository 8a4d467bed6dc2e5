#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridforge/lineloop.hpp"
#include "gridforge/plant.hpp"
#include "gridforge/synthesis.hpp"

namespace gridforge {

inline constexpr int kScenarioSchemaVersion = 1;

struct PerUnitBase {
    double V = 170.0;  // volts (peak)
    double I = 100.0;  // amps (peak)
    double S() const { return V * I; }
    double Z() const { return V / I; }
};

struct InverterSetup {
    std::string name;
    InverterParams plant;
    LineModel line;
    ControllerSet controller;
    DQPair i0;            // amps
    double v0 = 0.0;      // volts
    double share = 0.0;   // informational fraction of the nominal load
    double theta0 = 0.0;  // initial frame angle, rad
};

enum class LoadKind { resistive, current_sink };

// Value is ohms for a resistive load and amps for a current sink.
struct LoadEvent {
    double t = 0.0;
    double value = 0.0;
};

enum class BreakerAction { close, open };

struct BreakerEvent {
    double t = 0.0;
    BreakerAction action = BreakerAction::close;
};

struct GridSource {
    double amplitude = 0.0;  // volts
    double omega = 0.0;      // rad/s
    double phase = 0.0;      // rad at t = 0
    double tolerance = 0.02; // rad, phase window for closing
    std::vector<BreakerEvent> events;
};

struct SimSettings {
    double dt = 5e-6;
    double ts = 5e-5;
    double duration = 1.0;
    int decimate = 100;
    double c_bus = 1e-6;  // farads, used only by the current-sink load
};

struct Scenario {
    std::string name;
    PerUnitBase base;
    double omega0 = 0.0;
    double v2 = 0.0;  // nominal PCC amplitude seen by the PLL scaling
    std::vector<InverterSetup> inverters;
    LoadKind load_kind = LoadKind::resistive;
    std::vector<LoadEvent> load;  // first entry at t = 0
    bool has_grid = false;
    GridSource grid;
    SimSettings sim;
    std::vector<std::string> overrides;  // as applied, for output metadata
    std::string source_text;             // canonical JSON after overrides

    void validate() const;  // throws ValidationError
    double load_at(double t) const;
    // FNV-1a of the canonical source text, printed as hex.
    std::string hash() const;
};

// Parses a scenario document, applies `key=value` overrides (dotted paths,
// numeric indices for arrays) and synthesizes any controller not given
// verbatim.
Scenario build_scenario(const std::string& json_text, const std::vector<std::string>& overrides = {});
Scenario load_scenario_file(const std::string& path, const std::vector<std::string>& overrides = {});

// Directory holding the bundled scenarios.
std::string bundled_scenario_dir();
std::string bundled_scenario_path(const std::string& name);

// Design-spec documents used by the design subcommand.
struct DesignDocument {
    DesignSpec spec;
    std::string name;
};

DesignDocument parse_design_spec(const std::string& json_text, const std::vector<std::string>& overrides = {});

std::string controller_to_json(const ControllerSet& cs);
ControllerSet controller_from_json(const std::string& json_text);

// Applies a list of `key=value` overrides to a JSON document and returns the
// resulting canonical text.
std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& overrides);

}  // namespace gridforge
