#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gridforge {

inline constexpr const char* kToolVersion = "0.1.0";

struct SimEvent {
    double t = 0.0;
    std::string text;

    bool operator==(const SimEvent&) const = default;
};

// Column-major table with uniform sampling in the first column "t".
// Every column carries a unit string; metadata is an ordered key/value list.
class TimeSeries {
public:
    TimeSeries() = default;

    void add_column(std::string name, std::string unit);
    void append_row(const std::vector<double>& row);

    std::size_t rows() const { return data_.empty() ? 0 : data_.front().size(); }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::string>& units() const { return units_; }

    // Throws std::out_of_range naming the missing column.
    std::size_t index_of(const std::string& name) const;
    bool has(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    const std::vector<double>& column(std::size_t i) const { return data_.at(i); }
    std::vector<double> row(std::size_t r) const;

    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<SimEvent> events;

    // Values are written with 17 significant digits so read_csv restores
    // every double exactly.
    void write_csv(std::ostream& os) const;
    static TimeSeries read_csv(std::istream& is);

    void write_csv_file(const std::string& path) const;
    static TimeSeries read_csv_file(const std::string& path);

    bool operator==(const TimeSeries& o) const;

private:
    std::vector<std::string> names_;
    std::vector<std::string> units_;
    std::vector<std::vector<double>> data_;
};

}  // namespace gridforge
