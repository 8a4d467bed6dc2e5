#include "gridforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "gridforge/errors.hpp"

namespace gridforge {

namespace {

double mean_over(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] < t1) {
            s += y[i];
            ++n;
        }
    if (n == 0) throw InsufficientWindow("no samples in window");
    return s / static_cast<double>(n);
}

bool is_boundary(const std::string& text) {
    return text.rfind("load set", 0) == 0 || text.rfind("breaker closed", 0) == 0 ||
           text.rfind("breaker opened", 0) == 0;
}

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

double settling_time(const TimeSeries& ts, const std::vector<std::string>& columns, double t_event, double t_end,
                     double t_final0, double band) {
    const auto& t = ts.column("t");
    double last_out = t_event;
    for (const std::string& c : columns) {
        const auto& y = ts.column(c);
        const double fin = mean_over(t, y, t_final0, t_end);
        const double tol = band * std::abs(fin);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= t_event && t[i] < t_end && std::abs(y[i] - fin) > tol) last_out = std::max(last_out, t[i]);
    }
    return last_out - t_event;
}

MetricsReport compute_metrics(const TimeSeries& ts, const Scenario& sc, const MetricsOptions& opt) {
    if (ts.rows() < 2) throw InsufficientWindow("time series has fewer than two samples");
    const auto& t = ts.column("t");
    const double dt_rec = t[1] - t[0];
    const double t_end = t.back() + dt_rec;
    const double f0 = sc.omega0 / (2.0 * std::numbers::pi);
    const double min_window = opt.min_periods / f0;

    std::vector<double> bounds{t.front()};
    std::vector<std::string> labels{"start"};
    for (const SimEvent& e : ts.events)
        if (e.t > t.front() && is_boundary(e.text)) {
            if (e.t - bounds.back() < 1e-12) {
                labels.back() += "; " + e.text;
                continue;
            }
            bounds.push_back(e.t);
            labels.push_back(e.text);
        }
    bounds.push_back(t_end);

    MetricsReport rep;
    for (const InverterSetup& inv : sc.inverters) rep.inverter_names.push_back(inv.name);
    const std::size_t n = sc.inverters.size();

    std::vector<double> window_start;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const double len = bounds[s + 1] - bounds[s];
        const double w = std::min(opt.window, 0.5 * len);
        if (w + 1e-12 < min_window)
            throw InsufficientWindow("steady window after t = " + g(bounds[s]) + " s spans " + g(w * f0) +
                                     " fundamental periods; at least " + g(opt.min_periods) + " are required");
        WindowStats ws;
        ws.t1 = bounds[s + 1];
        ws.t0 = ws.t1 - w;
        for (const std::string& name : rep.inverter_names) {
            ws.P.push_back(mean_over(t, ts.column("P_" + name), ws.t0, ws.t1));
            ws.Q.push_back(mean_over(t, ts.column("Q_" + name), ws.t0, ws.t1));
            ws.vd.push_back(mean_over(t, ts.column("vd_" + name), ws.t0, ws.t1));
            ws.w.push_back(mean_over(t, ts.column("w_" + name), ws.t0, ws.t1));
            ws.ild.push_back(mean_over(t, ts.column("ild_" + name), ws.t0, ws.t1));
            ws.ilq.push_back(mean_over(t, ts.column("ilq_" + name), ws.t0, ws.t1));
        }
        ws.pcc_v = mean_over(t, ts.column("pcc_v"), ws.t0, ws.t1);
        ws.pcc_f = mean_over(t, ts.column("pcc_f"), ws.t0, ws.t1);
        rep.windows.push_back(std::move(ws));
        window_start.push_back(rep.windows.back().t0);
    }

    std::vector<std::string> pcols;
    for (const std::string& name : rep.inverter_names) pcols.push_back("P_" + name);
    for (std::size_t s = 1; s + 1 < bounds.size(); ++s) {
        const WindowStats& pre = rep.windows[s - 1];
        const WindowStats& post = rep.windows[s];
        EventMetrics em;
        em.t = bounds[s];
        em.label = labels[s];
        double total = 0.0;
        for (double p : post.P) total += p;
        for (double p : post.P) em.sharing.push_back(p / total);
        em.freq_dev_hz = post.pcc_f - f0;
        em.freq_step_hz = post.pcc_f - pre.pcc_f;
        em.pcc_v_dev = post.pcc_v - sc.v2;
        em.settle_time = settling_time(ts, pcols, bounds[s], bounds[s + 1], post.t0, opt.band);
        rep.events.push_back(std::move(em));
    }

    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> did, diq, w, vd;
        for (const WindowStats& ws : rep.windows) {
            did.push_back(sc.inverters[k].i0.d - ws.ild[k]);
            diq.push_back(sc.inverters[k].i0.q - ws.ilq[k]);
            w.push_back(ws.w[k]);
            vd.push_back(ws.vd[k]);
        }
        rep.dw_per_did.push_back(ls_slope(did, w));
        rep.dv_per_diq.push_back(ls_slope(diq, vd));
    }
    return rep;
}

std::string MetricsReport::to_text() const {
    std::ostringstream os;
    os << "windows:\n";
    for (std::size_t s = 0; s < windows.size(); ++s) {
        const WindowStats& w = windows[s];
        os << "  [" << g(w.t0) << ", " << g(w.t1) << ") pcc_v=" << g(w.pcc_v) << " V pcc_f=" << g(w.pcc_f) << " Hz";
        for (std::size_t k = 0; k < inverter_names.size(); ++k) os << " P_" << inverter_names[k] << "=" << g(w.P[k]);
        os << "\n";
    }
    os << "events:\n";
    for (const EventMetrics& e : events) {
        os << "  t=" << g(e.t) << " (" << e.label << ") sharing={";
        for (std::size_t k = 0; k < e.sharing.size(); ++k) os << (k ? ", " : "") << g(e.sharing[k]);
        os << "} df=" << g(e.freq_dev_hz) << " Hz step=" << g(e.freq_step_hz) << " Hz dv_pcc=" << g(e.pcc_v_dev)
           << " V settle=" << g(e.settle_time) << " s\n";
    }
    os << "droop slopes:\n";
    for (std::size_t k = 0; k < inverter_names.size(); ++k)
        os << "  " << inverter_names[k] << " dw/di_d=" << g(dw_per_did[k]) << " (rad/s)/A dv/di_q=" << g(dv_per_diq[k])
           << " V/A\n";
    return os.str();
}

std::string MetricsReport::csv_header() const {
    std::string h = "windows,events";
    for (const auto& n : inverter_names) h += ",share0_" + n;
    h += ",pcc_f0_hz,pcc_v0";
    for (const auto& n : inverter_names) h += ",dw_per_did_" + n + ",dv_per_diq_" + n;
    h += ",max_settle_s";
    return h;
}

std::string MetricsReport::csv_row() const {
    std::ostringstream os;
    os << windows.size() << "," << events.size();
    double total = 0.0;
    for (double p : windows.front().P) total += p;
    for (double p : windows.front().P) os << "," << g(p / total);
    os << "," << g(windows.front().pcc_f) << "," << g(windows.front().pcc_v);
    for (std::size_t k = 0; k < inverter_names.size(); ++k) os << "," << g(dw_per_did[k]) << "," << g(dv_per_diq[k]);
    double ms = 0.0;
    for (const auto& e : events) ms = std::max(ms, e.settle_time);
    os << "," << g(ms);
    return os.str();
}

}  // namespace gridforge
