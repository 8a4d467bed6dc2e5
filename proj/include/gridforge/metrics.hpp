#pragma once

#include <string>
#include <vector>

#include "gridforge/scenario.hpp"
#include "gridforge/timeseries.hpp"

namespace gridforge {

// Means over the steady tail of one inter-event segment.
struct WindowStats {
    double t0 = 0.0, t1 = 0.0;
    std::vector<double> P, Q, vd, w, ild, ilq;  // per inverter
    double pcc_v = 0.0;
    double pcc_f = 0.0;  // Hz
};

struct EventMetrics {
    double t = 0.0;
    std::string label;
    std::vector<double> sharing;  // P_k / sum P in the post-event window
    double freq_dev_hz = 0.0;     // post-event PCC frequency minus nominal
    double freq_step_hz = 0.0;    // post-event minus pre-event PCC frequency
    double pcc_v_dev = 0.0;       // volts, post-event PCC amplitude minus v2
    double settle_time = 0.0;     // seconds after the event until every P stays in its 2% band
};

struct MetricsOptions {
    double window = 1.0;          // longest steady window, seconds
    double band = 0.02;           // relative settling band
    double min_periods = 20.0;    // fundamental periods a window must span
};

struct MetricsReport {
    std::vector<std::string> inverter_names;
    std::vector<WindowStats> windows;  // segment 0 precedes the first event
    std::vector<EventMetrics> events;
    // Least-squares slopes over all windows, per inverter, of omega against
    // di^d and of v_C^d against di^q, with di = i0 - i_line.
    std::vector<double> dw_per_did;  // (rad/s)/A
    std::vector<double> dv_per_diq;  // V/A

    std::string to_text() const;
    std::string csv_header() const;
    std::string csv_row() const;
};

// Segment boundaries are load changes and actual breaker transitions.
// Throws InsufficientWindow when a steady window would span fewer than
// min_periods fundamental periods.
MetricsReport compute_metrics(const TimeSeries& ts, const Scenario& sc, const MetricsOptions& opt = {});

// Ordinary least-squares slope of y on x; NaN when x has no spread.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// First time after t_event from which every listed column stays within
// band*|final| of its final value (final = mean over [t_final0, t_final1)).
double settling_time(const TimeSeries& ts, const std::vector<std::string>& columns, double t_event, double t_end,
                     double t_final0, double band);

}  // namespace gridforge
