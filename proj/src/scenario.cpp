#include "gridforge/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "gridforge/errors.hpp"

namespace gridforge {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Field access with the dotted path carried into every error.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return j_; }
    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Node child(const char* key) const {
        if (!has(key)) throw ValidationError(sub(key), "required field missing");
        return Node(j_.at(key), sub(key));
    }
    Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
    std::size_t size() const { return j_.size(); }

    double number(const char* key) const {
        const Node c = child(key);
        if (!c.j_.is_number()) throw ValidationError(c.path_, "expected a number");
        const double v = c.j_.get<double>();
        if (!std::isfinite(v)) throw ValidationError(c.path_, "value is not finite");
        return v;
    }
    double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
    double positive(const char* key) const {
        const double v = number(key);
        if (!(v > 0.0)) throw ValidationError(sub(key), "must be strictly positive");
        return v;
    }
    double positive_or(const char* key, double fallback) const { return has(key) ? positive(key) : fallback; }
    double nonneg_or(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const double v = number(key);
        if (v < 0.0) throw ValidationError(sub(key), "must be non-negative");
        return v;
    }
    std::string string_or(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const Node c = child(key);
        if (!c.j_.is_string()) throw ValidationError(c.path_, "expected a string");
        return c.j_.get<std::string>();
    }
    Node array(const char* key) const {
        const Node c = child(key);
        if (!c.j_.is_array()) throw ValidationError(c.path_, "expected an array");
        return c;
    }

    std::string sub(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
};

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
}

void check_schema(const Node& root) {
    if (!root.raw().is_object()) throw ValidationError("", "document root must be an object");
    const double v = root.number("schema_version");
    if (v != kScenarioSchemaVersion)
        throw ValidationError("schema_version", "unsupported version " + root.raw().at("schema_version").dump());
}

DesignFamily parse_family(const Node& n, const char* key, DesignFamily fallback) {
    if (!n.has(key)) return fallback;
    try {
        return family_from_string(n.string_or(key, ""));
    } catch (const std::invalid_argument& e) {
        throw ValidationError(n.sub(key), e.what());
    }
}

InverterParams parse_plant(const Node& n) {
    InverterParams p;
    p.C = n.positive("C");
    p.L = n.positive("L");
    p.R = n.positive("R");
    p.vdc = n.positive("vdc");
    return p;
}

std::string to_pointer(const std::string& dotted) {
    std::string out;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ValidationError(dotted, "empty path component in override");
        out += "/" + part;
    }
    return out;
}

ControllerSet parse_controller(const Node& n) {
    ControllerSet cs;
    cs.tau = n.positive("tau");
    cs.k = n.positive("k");
    cs.z = n.positive("z");
    cs.beta_d = n.nonneg_or("beta_d", 0.0);
    cs.beta_q = n.nonneg_or("beta_q", 0.0);
    cs.alpha_d = n.nonneg_or("alpha_d", 0.0);
    cs.alpha_q = n.nonneg_or("alpha_q", 0.0);
    cs.gamma_d = n.nonneg_or("gamma_d", 0.0);
    cs.gamma_q = n.nonneg_or("gamma_q", 0.0);
    cs.family = parse_family(n, "family", DesignFamily::inductive);
    cs.L_nom = n.positive("L_nom");
    cs.R_nom = n.positive("R_nom");
    cs.C_nom = n.positive("C_nom");
    if (n.has("notch")) {
        const Node nt = n.child("notch");
        cs.notch_w = nt.positive("w");
        cs.notch_xi = nt.positive("xi");
        cs.notch_xi0 = nt.positive("xi0");
        if (!(cs.notch_xi0 > cs.notch_xi)) throw ValidationError(nt.sub("xi0"), "must exceed xi");
    }
    assemble(cs);
    return cs;
}

}  // namespace

std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& overrides) {
    json doc = parse_json(json_text);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError(ov, "override must have the form key=value");
        const std::string key = ov.substr(0, eq);
        const std::string text = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;
        }
        try {
            doc[json::json_pointer(to_pointer(key))] = value;
        } catch (const json::exception& e) {
            throw ValidationError(key, std::string("cannot apply override: ") + e.what());
        }
    }
    return doc.dump(2);
}

void Scenario::validate() const {
    if (inverters.empty()) throw ValidationError("inverters", "at least one inverter is required");
    if (!(sim.dt > 0.0)) throw ValidationError("sim.dt", "must be strictly positive");
    if (!(sim.ts >= sim.dt)) throw ValidationError("sim.ts", "control period must be at least dt");
    const double ratio = sim.ts / sim.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ValidationError("sim.ts", "control period must be an integer multiple of dt");
    if (!(sim.duration > 0.0)) throw ValidationError("sim.duration", "must be strictly positive");
    if (sim.decimate < 1) throw ValidationError("sim.decimate", "must be at least 1");
    if (sim.c_bus < 0.0) throw ValidationError("sim.c_bus", "must be non-negative");
    if (load.empty() || load.front().t != 0.0) throw ValidationError("load.events", "first event must be at t = 0");
    for (std::size_t i = 1; i < load.size(); ++i)
        if (!(load[i].t > load[i - 1].t))
            throw ValidationError("load.events[" + std::to_string(i) + "].t", "events must be strictly time-sorted");
    for (std::size_t i = 0; i < load.size(); ++i) {
        const double v = load[i].value;
        const std::string p = "load.events[" + std::to_string(i) + "]";
        if (load_kind == LoadKind::resistive && !(v > 0.0 && std::isfinite(v)))
            throw ValidationError(p, "resistance must be positive and finite");
        if (load_kind == LoadKind::current_sink && !(v >= 0.0)) throw ValidationError(p, "sink current must be >= 0");
    }
    if (has_grid) {
        for (std::size_t i = 1; i < grid.events.size(); ++i)
            if (!(grid.events[i].t >= grid.events[i - 1].t))
                throw ValidationError("grid.breaker[" + std::to_string(i) + "].t", "events must be time-sorted");
        if (!(grid.amplitude > 0.0)) throw ValidationError("grid.amplitude", "must be strictly positive");
        if (!(grid.tolerance > 0.0)) throw ValidationError("grid.tolerance", "must be strictly positive");
    }
}

double Scenario::load_at(double t) const {
    double v = load.front().value;
    for (const LoadEvent& e : load) {
        if (e.t <= t) v = e.value;
        else break;
    }
    return v;
}

std::string Scenario::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : source_text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario build_scenario(const std::string& json_text, const std::vector<std::string>& overrides) {
    Scenario sc;
    sc.source_text = apply_overrides(json_text, overrides);
    sc.overrides = overrides;
    const json doc = json::parse(sc.source_text);
    const Node root(doc, "");
    check_schema(root);

    sc.name = root.string_or("name", "scenario");
    if (root.has("base")) {
        const Node b = root.child("base");
        sc.base.V = b.positive_or("V", sc.base.V);
        sc.base.I = b.positive_or("I", sc.base.I);
    }
    const double f0 = root.positive_or("f0_hz", 60.0);
    sc.omega0 = 2.0 * kPi * f0;
    const double v0 = root.positive_or("v0", sc.base.V);
    sc.v2 = root.positive_or("v2", sc.base.V);

    // Design defaults shared by every inverter that is synthesized here.
    json empty_design = json::object();
    const Node design = root.has("design") ? root.child("design") : Node(empty_design, "design");
    const double wc = design.positive_or("wc", 2500.0);
    const double pm = design.number_or("pm", 53.0);
    const double beta_lag = design.nonneg_or("beta_lag", 0.01);
    const DesignFamily family = parse_family(design, "family", DesignFamily::inductive);
    const double droop_hz_per_pu = design.nonneg_or("freq_droop_hz_per_pu", 2.0);
    const double gamma_d_agg = design.nonneg_or("gamma_d_agg", 0.1);
    const bool has_nominal = design.has("nominal");
    const std::string setpoints = design.string_or("setpoints", "operating_point");
    if (setpoints != "operating_point" && setpoints != "share")
        throw ValidationError(design.sub("setpoints"), "expected 'operating_point' or 'share'");

    const Node load = root.child("load");
    const std::string kind = load.string_or("kind", "resistive");
    if (kind == "resistive") sc.load_kind = LoadKind::resistive;
    else if (kind == "current_sink") sc.load_kind = LoadKind::current_sink;
    else throw ValidationError(load.sub("kind"), "expected 'resistive' or 'current_sink'");
    const Node events = load.array("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Node e = events.at(i);
        LoadEvent ev;
        ev.t = e.number("t");
        if (sc.load_kind == LoadKind::resistive) {
            if (e.has("ohms")) ev.value = e.positive("ohms");
            else ev.value = sc.base.Z() / e.positive("pu");
        } else {
            if (e.has("amps")) ev.value = e.nonneg_or("amps", 0.0);
            else ev.value = e.nonneg_or("pu", 0.0) * sc.base.I;
        }
        sc.load.push_back(ev);
    }
    // No events: a constant 1 pu load.
    if (sc.load.empty())
        sc.load.push_back({0.0, sc.load_kind == LoadKind::resistive ? sc.base.Z() : sc.base.I});
    if (sc.load.front().t != 0.0) throw ValidationError("load.events", "first event must be at t = 0");

    const Node invs = root.array("inverters");
    if (invs.size() == 0) throw ValidationError("inverters", "at least one inverter is required");
    // Aggregate slope v2*dw = alpha_agg * di_total.
    const double alpha_agg = 2.0 * kPi * droop_hz_per_pu * sc.v2 / sc.base.I;

    for (std::size_t i = 0; i < invs.size(); ++i) {
        const Node n = invs.at(i);
        InverterSetup inv;
        inv.name = n.string_or("name", "inv" + std::to_string(i + 1));
        inv.plant = parse_plant(n);
        const Node ln = n.child("line");
        inv.line = LineModel::from_rx(ln.nonneg_or("R", 0.0), ln.positive("X"), sc.omega0);
        inv.share = n.positive_or("share", 1.0 / static_cast<double>(invs.size()));
        inv.theta0 = n.number_or("theta0", 0.0);
        inv.v0 = v0;
        inv.i0 = {inv.share * sc.base.I, 0.0};
        if (setpoints == "operating_point") {
            // Setpoints of the nominal operating point: PCC at v2 carrying the
            // initial load, split by share, seen through the inverter's own
            // line from a frame aligned with its capacitor voltage.
            const double i_total = sc.load_kind == LoadKind::resistive ? sc.v2 / sc.load.front().value
                                                                       : sc.load.front().value;
            const std::complex<double> i_k = inv.share * i_total;
            const std::complex<double> vc = sc.v2 + std::complex<double>(inv.line.R, inv.line.X) * i_k;
            const std::complex<double> i_frame = i_k * std::polar(1.0, -std::arg(vc));
            inv.v0 = std::abs(vc);
            inv.i0 = {i_frame.real(), i_frame.imag()};
        }
        inv.v0 = n.positive_or("v0", inv.v0);
        if (n.has("i0")) {
            const Node i0 = n.child("i0");
            inv.i0 = {i0.number_or("d", 0.0), i0.number_or("q", 0.0)};
        }
        // The bridge must reach the operating point with |m| <= 1.
        const double v_bridge = std::abs(inv.v0 + std::complex<double>(inv.plant.R, sc.omega0 * inv.plant.L) *
                                                      std::complex<double>(inv.i0.d, inv.i0.q));
        if (v_bridge > inv.plant.vdc)
            throw ValidationError("inverters[" + std::to_string(i) + "].vdc",
                                  "operating point needs " + std::to_string(v_bridge) + " V at the bridge");

        if (n.has("controller")) {
            inv.controller = parse_controller(n.child("controller"));
        } else {
            DesignSpec spec;
            spec.wc = n.positive_or("wc", wc);
            spec.pm = n.number_or("pm", pm);
            spec.beta_lag = beta_lag;
            spec.family = parse_family(n, "family", family);
            spec.inverter = inv.plant;
            double dR = inv.line.R, dX = inv.line.X;
            if (has_nominal) {
                const Node nom = design.child("nominal");
                spec.inverter.L = nom.positive_or("L", spec.inverter.L);
                spec.inverter.R = nom.positive_or("R", spec.inverter.R);
                spec.inverter.C = nom.positive_or("C", spec.inverter.C);
                dR = nom.nonneg_or("line_R", dR);
                dX = nom.nonneg_or("line_X", dX);
            }
            spec.line = LinePhasor::from_rx(dR, dX, sc.v2, sc.omega0);
            // The aggregate slope splits in inverse proportion to the share.
            const double alpha_k = alpha_agg / inv.share;
            // The slope is carried by alpha_q (X share) or, for the resistive
            // family, by beta_q/k (R share) of the normalization.
            const double part = spec.family == DesignFamily::resistive ? dR : dX;
            if (!n.has("gamma_q") && !(part > 0.0))
                throw ValidationError(n.sub("gamma_q"), "design line cannot carry the frequency droop; give gamma_q");
            spec.gamma_q = n.has("gamma_q") ? n.nonneg_or("gamma_q", 0.0) : alpha_k * spec.line.Zbar / part;
            spec.gamma_d = n.nonneg_or("gamma_d", gamma_d_agg / inv.share);
            try {
                inv.controller = synthesize(spec);
            } catch (const std::invalid_argument& e) {
                throw ValidationError(n.path(), e.what());
            }
        }
        sc.inverters.push_back(std::move(inv));
    }

    if (root.has("grid")) {
        const Node g = root.child("grid");
        sc.has_grid = true;
        sc.grid.amplitude = g.has("amplitude") ? g.positive("amplitude") : g.positive_or("amplitude_pu", 1.0) * sc.base.V;
        sc.grid.omega = 2.0 * kPi * g.positive_or("frequency_hz", f0);
        sc.grid.phase = g.number_or("phase", 0.0);
        sc.grid.tolerance = g.positive_or("tolerance", 0.02);
        if (g.has("breaker")) {
            const Node br = g.array("breaker");
            for (std::size_t i = 0; i < br.size(); ++i) {
                const Node e = br.at(i);
                BreakerEvent ev;
                ev.t = e.number("t");
                const std::string a = e.string_or("action", "");
                if (a == "close") ev.action = BreakerAction::close;
                else if (a == "open") ev.action = BreakerAction::open;
                else throw ValidationError(e.sub("action"), "expected 'close' or 'open'");
                sc.grid.events.push_back(ev);
            }
        }
    }

    if (root.has("sim")) {
        const Node s = root.child("sim");
        sc.sim.dt = s.positive_or("dt", sc.sim.dt);
        sc.sim.ts = s.positive_or("ts", sc.sim.ts);
        sc.sim.duration = s.positive_or("duration", sc.sim.duration);
        sc.sim.decimate = static_cast<int>(s.positive_or("decimate", sc.sim.decimate));
        sc.sim.c_bus = s.nonneg_or("c_bus", sc.sim.c_bus);
    }
    sc.validate();
    return sc;
}

Scenario load_scenario_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path, "cannot open scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    return build_scenario(ss.str(), overrides);
}

std::string bundled_scenario_dir() {
#ifdef GRIDFORGE_SCENARIO_DIR
    return GRIDFORGE_SCENARIO_DIR;
#else
    return "scenarios";
#endif
}

std::string bundled_scenario_path(const std::string& name) { return bundled_scenario_dir() + "/" + name + ".json"; }

DesignDocument parse_design_spec(const std::string& json_text, const std::vector<std::string>& overrides) {
    const json doc = json::parse(apply_overrides(json_text, overrides));
    const Node root(doc, "");
    check_schema(root);
    DesignDocument out;
    out.name = root.string_or("name", "design");
    DesignSpec& s = out.spec;
    const double f0 = root.positive_or("f0_hz", 60.0);
    const double v2 = root.positive_or("v2", 170.0);
    s.inverter = parse_plant(root.child("inverter"));
    const Node ln = root.child("line");
    s.line = LinePhasor::from_rx(ln.nonneg_or("R", 0.0), ln.positive("X"), v2, 2.0 * kPi * f0);
    s.pm = root.number_or("pm", s.pm);
    s.beta_lag = root.nonneg_or("beta_lag", s.beta_lag);
    s.family = parse_family(root, "family", s.family);
    s.gamma_d = root.nonneg_or("gamma_d", 0.0);
    s.gamma_q = root.nonneg_or("gamma_q", 0.0);
    if (root.has("wc")) {
        s.wc = root.positive("wc");
    } else if (root.has("tau")) {
        // A fixed inner time constant pins the crossover: wc = sqrt(r) / tau.
        const double sd = std::sin(s.pm * kPi / 180.0);
        s.wc = std::sqrt((1.0 - sd) / (1.0 + sd)) / root.positive("tau");
    } else {
        throw ValidationError("wc", "either wc or tau is required");
    }
    return out;
}

std::string controller_to_json(const ControllerSet& cs) {
    json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["family"] = to_string(cs.family);
    j["tau"] = cs.tau;
    j["k"] = cs.k;
    j["z"] = cs.z;
    j["beta_d"] = cs.beta_d;
    j["beta_q"] = cs.beta_q;
    j["alpha_d"] = cs.alpha_d;
    j["alpha_q"] = cs.alpha_q;
    j["gamma_d"] = cs.gamma_d;
    j["gamma_q"] = cs.gamma_q;
    j["L_nom"] = cs.L_nom;
    j["R_nom"] = cs.R_nom;
    j["C_nom"] = cs.C_nom;
    if (cs.notch_w > 0.0) j["notch"] = {{"w", cs.notch_w}, {"xi", cs.notch_xi}, {"xi0", cs.notch_xi0}};
    return j.dump(2) + "\n";
}

ControllerSet controller_from_json(const std::string& json_text) {
    const json doc = parse_json(json_text);
    const Node root(doc, "");
    check_schema(root);
    return parse_controller(root);
}

}  // namespace gridforge
