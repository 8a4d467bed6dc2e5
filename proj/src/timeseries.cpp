#include "gridforge/timeseries.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridforge/errors.hpp"

namespace gridforge {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw ValidationError("line " + std::to_string(line), "cannot parse number '" + s + "'");
    return v;
}

}  // namespace

void TimeSeries::add_column(std::string name, std::string unit) {
    if (rows() != 0) throw std::logic_error("columns must be added before rows");
    if (name.find(',') != std::string::npos) throw std::invalid_argument("column name contains a comma");
    names_.push_back(std::move(name));
    units_.push_back(std::move(unit));
    data_.emplace_back();
}

void TimeSeries::append_row(const std::vector<double>& row) {
    if (row.size() != names_.size()) throw std::invalid_argument("row width does not match column count");
    for (std::size_t i = 0; i < row.size(); ++i) data_[i].push_back(row[i]);
}

std::size_t TimeSeries::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw std::out_of_range("no column named '" + name + "'");
}

bool TimeSeries::has(const std::string& name) const {
    for (const auto& n : names_)
        if (n == name) return true;
    return false;
}

const std::vector<double>& TimeSeries::column(const std::string& name) const { return data_[index_of(name)]; }

std::vector<double> TimeSeries::row(std::size_t r) const {
    std::vector<double> out(cols());
    for (std::size_t i = 0; i < cols(); ++i) out[i] = data_[i].at(r);
    return out;
}

void TimeSeries::write_csv(std::ostream& os) const {
    os << "# gridforge timeseries\n";
    for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << "\n";
    os << "# units:";
    for (std::size_t i = 0; i < cols(); ++i) os << (i ? "," : " ") << names_[i] << "=" << units_[i];
    os << "\n";
    for (const SimEvent& e : events) os << "# event: " << fmt17(e.t) << " " << e.text << "\n";
    for (std::size_t i = 0; i < cols(); ++i) os << (i ? "," : "") << names_[i];
    os << "\n";
    std::string line;
    for (std::size_t r = 0; r < rows(); ++r) {
        line.clear();
        for (std::size_t i = 0; i < cols(); ++i) {
            if (i) line += ',';
            line += fmt17(data_[i][r]);
        }
        line += '\n';
        os << line;
    }
}

TimeSeries TimeSeries::read_csv(std::istream& is) {
    TimeSeries ts;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> units_spec;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line == "# gridforge timeseries") continue;
            const std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
            const auto colon = body.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = body.substr(0, colon);
            const std::string val = body.substr(colon + 2);
            if (key == "units") {
                units_spec = split(val, ',');
            } else if (key == "event") {
                const auto sp = val.find(' ');
                SimEvent e;
                e.t = parse_double(val.substr(0, sp), lineno);
                e.text = sp == std::string::npos ? "" : val.substr(sp + 1);
                ts.events.push_back(e);
            } else {
                ts.metadata.emplace_back(key, val);
            }
            continue;
        }
        const std::vector<std::string> cells = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                std::string unit;
                if (i < units_spec.size()) {
                    const auto eq = units_spec[i].find('=');
                    if (eq != std::string::npos) unit = units_spec[i].substr(eq + 1);
                }
                ts.add_column(cells[i], unit);
            }
            continue;
        }
        if (cells.size() != ts.cols())
            throw ValidationError("line " + std::to_string(lineno), "row width does not match header");
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) row[i] = parse_double(cells[i], lineno);
        ts.append_row(row);
    }
    if (!header_seen) throw ValidationError("", "no header row found");
    return ts;
}

void TimeSeries::write_csv_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_csv(out);
}

TimeSeries TimeSeries::read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return read_csv(in);
}

bool TimeSeries::operator==(const TimeSeries& o) const {
    return names_ == o.names_ && units_ == o.units_ && data_ == o.data_ && metadata == o.metadata &&
           events == o.events;
}

}  // namespace gridforge
