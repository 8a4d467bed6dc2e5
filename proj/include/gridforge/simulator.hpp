#pragma once

#include <complex>
#include <deque>
#include <exception>
#include <functional>
#include <vector>

#include "gridforge/scenario.hpp"
#include "gridforge/statespace.hpp"
#include "gridforge/timeseries.hpp"

namespace gridforge {

using cplx = std::complex<double>;

// Discretized compensators of one inverter; the realization order matches the
// effective (resonance-augmented) transfer functions.
struct ControllerState {
    DiscreteFilter Kc_d, Kc_q, Kv_d, Kv_q, Keta_d, Keta_q, H;
    // Values held over the current control period.
    double md = 0.0, mq = 0.0;
    double theta_dot = 0.0;
    long saturations = 0;
};

struct InverterSimState {
    cplx iL;     // stationary frame
    cplx vC;     // stationary frame
    cplx iline;  // stationary frame
    double theta = 0.0;
    ControllerState ctl;
};

struct SimState {
    std::vector<InverterSimState> inv;
    cplx v_pcc;  // stationary frame; a state only for the current-sink load
    bool breaker_closed = false;
    double t = 0.0;
    long step = 0;  // plant steps taken
};

// Algebraic PCC node. Resistive: R * sum(i). Current sink with no bus
// capacitance has no solution unless the sink is zero and throws
// NoVoltageSolution. Grid closed: the grid phasor.
cplx pcc_solve(const std::vector<cplx>& line_currents, LoadKind kind, double load_value, const GridSource* grid,
               bool breaker_closed, double t);

// True when |wrap(angle(v_pcc) - angle(v_grid))| < tolerance.
bool breaker_logic(cplx v_pcc, cplx v_grid, double tolerance);

cplx grid_phasor(const GridSource& g, double t);

class Simulator {
public:
    explicit Simulator(Scenario sc);

    const Scenario& scenario() const { return sc_; }
    const SimState& state() const { return x_; }
    SimState& mutable_state() { return x_; }

    // One plant RK4 step of dt; the controllers run first when t lands on a
    // control instant. Throws NonFinite with a dump of the recent history.
    void step();
    // Runs to scenario.sim.duration recording every `decimate` control periods.
    TimeSeries run();

    const std::vector<SimEvent>& events() const { return events_; }
    // Last rows recorded at control rate, oldest first; same columns as run().
    const std::deque<std::vector<double>>& recent() const { return recent_; }
    TimeSeries recent_series() const;

    // Column layout of the recorded series.
    TimeSeries empty_series() const;
    std::vector<double> sample() const;

private:
    void control_update();
    void handle_events();
    void derivative(double t, const std::vector<double>& x, std::vector<double>& dx) const;
    void pack(std::vector<double>& x) const;
    void unpack(const std::vector<double>& x);
    cplx pcc_from_packed(double t, const std::vector<double>& x) const;
    void log(double t, std::string text);

    Scenario sc_;
    SimState x_;
    int substeps_ = 1;
    std::size_t next_load_ = 1;
    std::size_t next_breaker_ = 0;
    bool close_pending_ = false;
    bool deferral_logged_ = false;
    double load_value_ = 0.0;
    double prev_pcc_phase_ = 0.0;
    double pcc_freq_ = 0.0;
    bool have_prev_phase_ = false;
    std::vector<SimEvent> events_;
    std::deque<std::vector<double>> recent_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_, xv_;
};

// Runs independent scenarios on up to `threads` workers (0 reads
// GRIDFORGE_THREADS, falling back to the hardware concurrency).
std::vector<TimeSeries> run_batch(const std::vector<Scenario>& scenarios, unsigned threads = 0);

// Per-scenario result of an isolated batch: a failure in one scenario leaves
// the others untouched. After a NonFinite abort, dump holds the recent
// control-rate history.
struct RunOutcome {
    TimeSeries series;
    TimeSeries dump;
    std::exception_ptr error;
};

std::vector<RunOutcome> run_batch_isolated(const std::vector<Scenario>& scenarios, unsigned threads = 0);

}  // namespace gridforge
