#include "gridforge/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <thread>

#include "gridforge/errors.hpp"

namespace gridforge {

namespace {

constexpr int kPerInverter = 7;  // iL(a,b), vC(a,b), theta, iline(a,b)
constexpr std::size_t kRecent = 100;

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

cplx grid_phasor(const GridSource& g, double t) { return std::polar(g.amplitude, g.omega * t + g.phase); }

cplx pcc_solve(const std::vector<cplx>& line_currents, LoadKind kind, double load_value, const GridSource* grid,
               bool breaker_closed, double t) {
    if (breaker_closed) {
        if (!grid) throw std::invalid_argument("breaker closed without a grid source");
        return grid_phasor(*grid, t);
    }
    cplx sum = 0.0;
    for (const cplx& i : line_currents) sum += i;
    if (kind == LoadKind::resistive) {
        if (!(load_value > 0.0)) throw std::invalid_argument("load resistance must be positive");
        return load_value * sum;
    }
    if (load_value > std::abs(sum))
        throw NoVoltageSolution("current-sink demand " + fmt("%.6g", load_value) + " A exceeds total injection " +
                                fmt("%.6g", std::abs(sum)) + " A");
    throw NoVoltageSolution("an islanded current sink leaves the PCC voltage magnitude undetermined; set sim.c_bus > 0");
}

bool breaker_logic(cplx v_pcc, cplx v_grid, double tolerance) {
    if (std::abs(v_pcc) == 0.0 || std::abs(v_grid) == 0.0) return false;
    return std::abs(wrap_angle(std::arg(v_pcc) - std::arg(v_grid))) < tolerance;
}

Simulator::Simulator(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    substeps_ = static_cast<int>(std::lround(sc_.sim.ts / sc_.sim.dt));
    if (sc_.load_kind == LoadKind::current_sink && !(sc_.sim.c_bus > 0.0))
        throw NoVoltageSolution("an islanded current sink needs a bus capacitance; set sim.c_bus > 0");
    load_value_ = sc_.load.front().value;

    const double T = sc_.sim.ts;
    for (const InverterSetup& s : sc_.inverters) {
        InverterSimState st;
        const ControllerSet& cs = s.controller;
        st.ctl.Kc_d = DiscreteFilter(cs.Kc, T);
        st.ctl.Kc_q = DiscreteFilter(cs.Kc, T);
        st.ctl.Kv_d = DiscreteFilter(cs.Kv_d_eff(), T);
        st.ctl.Kv_q = DiscreteFilter(cs.Kv_q_eff(), T);
        st.ctl.Keta_d = DiscreteFilter(cs.Keta_d_eff(), T);
        st.ctl.Keta_q = DiscreteFilter(cs.Keta_q_eff(), T);
        st.ctl.H = DiscreteFilter(cs.H_pll, T);
        st.ctl.theta_dot = sc_.omega0;
        st.theta = s.theta0;
        st.vC = std::polar(s.v0, s.theta0);
        x_.inv.push_back(std::move(st));
    }
    x_.v_pcc = x_.inv.front().vC;

    const std::size_t n = kPerInverter * sc_.inverters.size() + 2;
    xv_.assign(n, 0.0);
    k1_ = k2_ = k3_ = k4_ = tmp_ = xv_;
    pack(xv_);
    unpack(xv_);
}

void Simulator::pack(std::vector<double>& x) const {
    for (std::size_t k = 0; k < x_.inv.size(); ++k) {
        const InverterSimState& s = x_.inv[k];
        double* p = x.data() + kPerInverter * k;
        p[0] = s.iL.real();
        p[1] = s.iL.imag();
        p[2] = s.vC.real();
        p[3] = s.vC.imag();
        p[4] = s.theta;
        p[5] = s.iline.real();
        p[6] = s.iline.imag();
    }
    const std::size_t o = kPerInverter * x_.inv.size();
    x[o] = x_.v_pcc.real();
    x[o + 1] = x_.v_pcc.imag();
}

void Simulator::unpack(const std::vector<double>& x) {
    for (std::size_t k = 0; k < x_.inv.size(); ++k) {
        InverterSimState& s = x_.inv[k];
        const double* p = x.data() + kPerInverter * k;
        s.iL = {p[0], p[1]};
        s.vC = {p[2], p[3]};
        s.theta = p[4];
        s.iline = {p[5], p[6]};
    }
    x_.v_pcc = pcc_from_packed(x_.t, x);
}

cplx Simulator::pcc_from_packed(double t, const std::vector<double>& x) const {
    if (x_.breaker_closed) return grid_phasor(sc_.grid, t);
    const std::size_t n = x_.inv.size();
    if (sc_.load_kind == LoadKind::current_sink) return {x[kPerInverter * n], x[kPerInverter * n + 1]};
    cplx sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += cplx(x[kPerInverter * k + 5], x[kPerInverter * k + 6]);
    return load_value_ * sum;
}

void Simulator::derivative(double t, const std::vector<double>& x, std::vector<double>& dx) const {
    const std::size_t n = x_.inv.size();
    const cplx vp = pcc_from_packed(t, x);
    cplx sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const InverterSetup& s = sc_.inverters[k];
        const ControllerState& c = x_.inv[k].ctl;
        const double* p = x.data() + kPerInverter * k;
        double* d = dx.data() + kPerInverter * k;
        const cplx iL(p[0], p[1]), vC(p[2], p[3]), il(p[5], p[6]);
        const cplx m = cplx(c.md, c.mq) * cplx(std::cos(p[4]), std::sin(p[4])) * s.plant.vdc;
        const cplx diL = (m - vC - s.plant.R * iL) / s.plant.L;
        const cplx dvC = (iL - il) / s.plant.C;
        const cplx dil = (vC - vp - s.line.R * il) / s.line.L;
        d[0] = diL.real();
        d[1] = diL.imag();
        d[2] = dvC.real();
        d[3] = dvC.imag();
        d[4] = c.theta_dot;
        d[5] = dil.real();
        d[6] = dil.imag();
        sum += il;
    }
    const std::size_t o = kPerInverter * n;
    if (sc_.load_kind == LoadKind::current_sink && !x_.breaker_closed) {
        const double mag = std::abs(vp);
        const cplx sink = mag > 1e-9 ? load_value_ * vp / mag : cplx(0.0);
        const cplx dv = (sum - sink) / sc_.sim.c_bus;
        dx[o] = dv.real();
        dx[o + 1] = dv.imag();
    } else {
        dx[o] = 0.0;
        dx[o + 1] = 0.0;
    }
}

void Simulator::log(double t, std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    events_.push_back({t, std::move(text)});
}

void Simulator::handle_events() {
    const double t = x_.t;
    const double eps = 0.5 * sc_.sim.dt;
    while (next_load_ < sc_.load.size() && sc_.load[next_load_].t <= t + eps) {
        load_value_ = sc_.load[next_load_].value;
        log(t, fmt(sc_.load_kind == LoadKind::resistive ? "load set to %.6g ohm" : "load set to %.6g A", load_value_));
        ++next_load_;
    }
    if (!sc_.has_grid) return;
    while (next_breaker_ < sc_.grid.events.size() && sc_.grid.events[next_breaker_].t <= t + eps) {
        const BreakerEvent& e = sc_.grid.events[next_breaker_++];
        if (e.action == BreakerAction::close) {
            if (!x_.breaker_closed) {
                close_pending_ = true;
                deferral_logged_ = false;
                log(t, "breaker close requested");
            }
        } else {
            close_pending_ = false;
            if (x_.breaker_closed) {
                x_.breaker_closed = false;
                // The bus state continues from the grid voltage it was tied to.
                const std::size_t o = kPerInverter * x_.inv.size();
                const cplx vg = grid_phasor(sc_.grid, t);
                xv_[o] = vg.real();
                xv_[o + 1] = vg.imag();
                unpack(xv_);
                log(t, "breaker opened");
            }
        }
    }
    if (close_pending_ && !x_.breaker_closed) {
        const cplx vg = grid_phasor(sc_.grid, t);
        const double err = wrap_angle(std::arg(x_.v_pcc) - std::arg(vg));
        if (breaker_logic(x_.v_pcc, vg, sc_.grid.tolerance)) {
            x_.breaker_closed = true;
            close_pending_ = false;
            unpack(xv_);
            log(t, fmt("breaker closed with phase error %.6g rad", err));
        } else if (!deferral_logged_) {
            deferral_logged_ = true;
            log(t, fmt("breaker close deferred, phase error %.6g rad", err));
        }
    }
}

void Simulator::control_update() {
    const double v2 = sc_.v2;
    for (std::size_t k = 0; k < x_.inv.size(); ++k) {
        InverterSimState& st = x_.inv[k];
        const InverterSetup& s = sc_.inverters[k];
        const ControllerSet& cs = s.controller;
        ControllerState& c = st.ctl;
        const cplx rot = std::polar(1.0, -st.theta);
        const cplx v = st.vC * rot;
        const cplx i = st.iL * rot;
        const double vd = v.real(), vq = v.imag();

        const double hq = c.H.output(vq);
        const double theta_dot = sc_.omega0 + hq / v2;

        // Both voltage loops share an algebraic loop through the coupling
        // filters' feedthrough; a = u_v^d, b = u_v^q.
        const double Dvd = c.Kv_d.feedthrough(), Fvd = c.Kv_d.free_response();
        const double Dvq = c.Kv_q.feedthrough(), Fvq = c.Kv_q.free_response();
        const double Ded = c.Keta_d.feedthrough(), Fed = c.Keta_d.free_response();
        const double Deq = c.Keta_q.feedthrough(), Feq = c.Keta_q.free_response();
        const double r1 = Fvd + Dvd * (s.v0 - vd + Fed);
        const double r2 = Fvq - Dvq * (Feq + vq);
        const double a11 = 1.0, a12 = -Dvd * Ded, a21 = Dvq * Deq, a22 = 1.0;
        const double det = a11 * a22 - a12 * a21;
        if (!(std::abs(det) > 1e-12)) throw SingularLoop("discrete voltage-loop algebraic loop is singular");
        const double a = (r1 * a22 - a12 * r2) / det;
        const double b = (a11 * r2 - a21 * r1) / det;
        const double eta_d = Fed + Ded * b;
        const double eta_q = -(Feq + Deq * a);
        const double ed = s.v0 + eta_d - vd;
        const double eq = eta_q - vq;

        const double ird = a + s.i0.d - cs.C_nom * theta_dot * vq;
        const double irq = b + s.i0.q + cs.C_nom * theta_dot * vd;
        const double ecd = ird - i.real();
        const double ecq = irq - i.imag();
        const double uid = c.Kc_d.output(ecd);
        const double uiq = c.Kc_q.output(ecq);

        double md = (uid - cs.L_nom * theta_dot * i.imag() + vd) / s.plant.vdc;
        double mq = (uiq + cs.L_nom * theta_dot * i.real() + vq) / s.plant.vdc;
        const double mag = std::hypot(md, mq);
        if (mag > 1.0) {
            md /= mag;
            mq /= mag;
            if (c.saturations++ == 0) log(x_.t, s.name + " modulation saturated");
        }

        c.H.update(vq);
        c.Kv_d.update(ed);
        c.Kv_q.update(eq);
        c.Keta_d.update(b);
        c.Keta_q.update(a);
        c.Kc_d.update(ecd);
        c.Kc_q.update(ecq);
        c.md = md;
        c.mq = mq;
        c.theta_dot = theta_dot;
    }

    const double ph = std::arg(x_.v_pcc);
    if (have_prev_phase_) pcc_freq_ = wrap_angle(ph - prev_pcc_phase_) / sc_.sim.ts / (2.0 * std::numbers::pi);
    else pcc_freq_ = sc_.omega0 / (2.0 * std::numbers::pi);
    prev_pcc_phase_ = ph;
    have_prev_phase_ = true;
}

void Simulator::step() {
    if (x_.step % substeps_ == 0) {
        handle_events();
        control_update();
        recent_.push_back(sample());
        if (recent_.size() > kRecent) recent_.pop_front();
    }
    const double dt = sc_.sim.dt;
    const double t = x_.t;
    const std::size_t n = xv_.size();
    derivative(t, xv_, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv_[i] + 0.5 * dt * k1_[i];
    derivative(t + 0.5 * dt, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv_[i] + 0.5 * dt * k2_[i];
    derivative(t + 0.5 * dt, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv_[i] + dt * k3_[i];
    derivative(t + dt, tmp_, k4_);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        xv_[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        finite = finite && std::isfinite(xv_[i]);
    }
    ++x_.step;
    x_.t = static_cast<double>(x_.step) * dt;
    if (!finite) throw NonFinite("non-finite state at t = " + fmt("%.9g", x_.t) + " s in scenario " + sc_.name);
    unpack(xv_);
}

TimeSeries Simulator::empty_series() const {
    TimeSeries ts;
    ts.add_column("t", "s");
    for (const InverterSetup& s : sc_.inverters) {
        ts.add_column("P_" + s.name, "W");
        ts.add_column("Q_" + s.name, "var");
        ts.add_column("vd_" + s.name, "V");
        ts.add_column("vq_" + s.name, "V");
        ts.add_column("w_" + s.name, "rad/s");
        ts.add_column("ild_" + s.name, "A");
        ts.add_column("ilq_" + s.name, "A");
        ts.add_column("m_" + s.name, "1");
    }
    ts.add_column("pcc_vd", "V");
    ts.add_column("pcc_v", "V");
    ts.add_column("pcc_f", "Hz");
    ts.add_column("P_load", "W");
    ts.add_column("P_grid", "W");
    ts.add_column("P_loss", "W");
    ts.add_column("breaker", "1");
    return ts;
}

std::vector<double> Simulator::sample() const {
    std::vector<double> row;
    row.reserve(8 * x_.inv.size() + 8);
    row.push_back(x_.t);
    cplx sum = 0.0;
    double loss = 0.0;
    for (std::size_t k = 0; k < x_.inv.size(); ++k) {
        const InverterSimState& st = x_.inv[k];
        const cplx rot = std::polar(1.0, -st.theta);
        const cplx v = st.vC * rot;
        const cplx il = st.iline * rot;
        const PowerPair pq = instantaneous_power({v.real(), v.imag()}, {il.real(), il.imag()});
        row.push_back(pq.P);
        row.push_back(pq.Q);
        row.push_back(v.real());
        row.push_back(v.imag());
        row.push_back(st.ctl.theta_dot);
        row.push_back(il.real());
        row.push_back(il.imag());
        row.push_back(std::hypot(st.ctl.md, st.ctl.mq));
        sum += st.iline;
        loss += sc_.inverters[k].line.R * std::norm(st.iline);
    }
    const cplx vp = x_.v_pcc;
    cplx i_load = 0.0;
    if (sc_.load_kind == LoadKind::resistive) {
        i_load = vp / load_value_;
    } else {
        const double mag = std::abs(vp);
        i_load = mag > 1e-9 ? load_value_ * vp / mag : cplx(0.0);
    }
    // The stiff grid supplies whatever the inverters do not.
    const cplx i_grid = x_.breaker_closed ? i_load - sum : cplx(0.0);
    row.push_back((vp * std::polar(1.0, -x_.inv.front().theta)).real());
    row.push_back(std::abs(vp));
    row.push_back(pcc_freq_);
    row.push_back((vp * std::conj(i_load)).real());
    row.push_back((vp * std::conj(i_grid)).real());
    row.push_back(loss);
    row.push_back(x_.breaker_closed ? 1.0 : 0.0);
    return row;
}

TimeSeries Simulator::recent_series() const {
    TimeSeries ts = empty_series();
    for (const auto& r : recent_) ts.append_row(r);
    ts.metadata.emplace_back("scenario", sc_.name);
    ts.metadata.emplace_back("note", "last control-rate samples before abort");
    return ts;
}

TimeSeries Simulator::run() {
    TimeSeries ts = empty_series();
    const long total = std::lround(sc_.sim.duration / sc_.sim.dt);
    const long record_every = static_cast<long>(substeps_) * sc_.sim.decimate;
    while (x_.step < total) {
        const bool record = x_.step % record_every == 0;
        step();
        // step() ran the controller for the instant it started from; the
        // recorded row is the one it pushed.
        if (record) ts.append_row(recent_.back());
    }
    ts.metadata.emplace_back("tool_version", kToolVersion);
    ts.metadata.emplace_back("scenario", sc_.name);
    ts.metadata.emplace_back("scenario_hash", sc_.hash());
    for (const std::string& o : sc_.overrides) ts.metadata.emplace_back("override", o);
    ts.metadata.emplace_back("dt_s", fmt("%.17g", sc_.sim.dt));
    ts.metadata.emplace_back("ts_s", fmt("%.17g", sc_.sim.ts));
    ts.metadata.emplace_back("decimate", std::to_string(sc_.sim.decimate));
    long sat = 0;
    for (const auto& st : x_.inv) sat += st.ctl.saturations;
    ts.metadata.emplace_back("saturations", std::to_string(sat));
    ts.events = events_;
    return ts;
}

namespace {

unsigned worker_count(unsigned threads, std::size_t jobs) {
    if (threads == 0) {
        if (const char* env = std::getenv("GRIDFORGE_THREADS")) threads = static_cast<unsigned>(std::atoi(env));
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    }
    return std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs)));
}

}  // namespace

std::vector<RunOutcome> run_batch_isolated(const std::vector<Scenario>& scenarios, unsigned threads) {
    std::vector<RunOutcome> out(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            RunOutcome& o = out[i];
            try {
                Simulator sim(scenarios[i]);
                try {
                    o.series = sim.run();
                } catch (const NonFinite&) {
                    o.dump = sim.recent_series();
                    throw;
                }
            } catch (...) {
                o.error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = worker_count(threads, scenarios.size());
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

std::vector<TimeSeries> run_batch(const std::vector<Scenario>& scenarios, unsigned threads) {
    std::vector<RunOutcome> res = run_batch_isolated(scenarios, threads);
    std::vector<TimeSeries> out;
    out.reserve(res.size());
    for (RunOutcome& r : res) {
        if (r.error) std::rethrow_exception(r.error);
        out.push_back(std::move(r.series));
    }
    return out;
}

}  // namespace gridforge
