#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridforge/lineloop.hpp"
#include "gridforge/synthesis.hpp"

namespace gridforge {

// Inner current compensator in its unnormalized physical form, e.g.
// "(0.0033s+0.2)/(0.001s)".
std::string format_inner_compensator(const ControllerSet& cs);

// Roots listed once per conjugate pair ("-53.86±377j"), real roots plain.
std::string format_roots(const std::vector<cplx>& roots);

// Voltage-loop gains seen through the closed inner loop 1/(tau s + 1) and the
// filter capacitor, with any resonance augmentation applied.
RationalTF voltage_loop_d(const ControllerSet& cs);
RationalTF voltage_loop_q(const ControllerSet& cs);

// Structured text; deterministic for a given input so repeated runs are
// byte-identical.
std::string design_report(const std::string& name, const DesignSpec& spec, const ControllerSet& cs);

struct BodeRow {
    double w = 0.0;
    double mag_db = 0.0;
    double phase_deg = 0.0;  // continuous in w
};

std::vector<BodeRow> bode(const RationalTF& tf, const std::vector<double>& w);
std::string bode_csv(const std::vector<BodeRow>& rows);

// Header "freq_rad_s,smax,smin,tmax,tmin".
std::string sigma_csv(const std::vector<SigmaRow>& rows);

struct AnalysisOutput {
    std::string sigma_csv;
    std::string disturbance_csv;  // freq_rad_s,smax,smin of T K_i^-1
    std::vector<std::pair<std::string, std::string>> bode_csvs;  // compensator name, csv
    std::string summary;
};

// Throws SingularLoop when I + G Lambda K_i is singular.
AnalysisOutput analyze_controller(const ControllerSet& cs, const LineModel& line, double v2,
                                  const std::vector<double>& w);

}  // namespace gridforge
