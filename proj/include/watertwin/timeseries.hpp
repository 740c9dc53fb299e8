#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/dates.hpp"

namespace watertwin::data {

enum class Frequency { daily, weekly, monthly };

inline const char* frequency_name(Frequency f) {
    switch (f) {
        case Frequency::daily: return "daily";
        case Frequency::weekly: return "weekly";
        case Frequency::monthly: return "monthly";
    }
    return "?";
}

inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Date-indexed table of numeric columns plus optional per-row text columns
/// (used for fields that are clock times rather than measurements).
/// Missing numeric cells are NaN. Dates are strictly increasing.
struct TimeSeriesFrame {
    Frequency frequency = Frequency::daily;
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::map<std::string, std::vector<std::string>> text;

    std::size_t rows() const { return dates.size(); }

    bool has_column(const std::string& name) const {
        for (const auto& n : names)
            if (n == name) return true;
        return false;
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        std::string known;
        for (const auto& n : names) {
            if (!known.empty()) known += ", ";
            known += n;
        }
        throw std::invalid_argument("unknown column '" + name + "' (available: " + known + ")");
    }

    const std::vector<double>& column(const std::string& name) const {
        return columns[column_index(name)];
    }
    std::vector<double>& column(const std::string& name) {
        return columns[column_index(name)];
    }

    void add_column(const std::string& name, std::vector<double> values) {
        if (has_column(name)) throw std::invalid_argument("duplicate column '" + name + "'");
        if (values.size() != dates.size())
            throw std::invalid_argument("column '" + name + "' has " +
                                        std::to_string(values.size()) + " rows, frame has " +
                                        std::to_string(dates.size()));
        names.push_back(name);
        columns.push_back(std::move(values));
    }

    /// Structural invariants: aligned sizes and strictly increasing dates.
    void check() const {
        if (names.size() != columns.size())
            throw std::logic_error("frame: name/column count mismatch");
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].size() != dates.size())
                throw std::logic_error("frame: column '" + names[i] + "' size mismatch");
        for (const auto& [name, col] : text)
            if (col.size() != dates.size())
                throw std::logic_error("frame: text column '" + name + "' size mismatch");
        for (std::size_t i = 1; i < dates.size(); ++i)
            if (!(dates[i - 1] < dates[i]))
                throw std::logic_error("frame: dates not strictly increasing at row " +
                                       std::to_string(i));
    }
};

/// Copy of rows [begin, end).
inline TimeSeriesFrame take_rows(const TimeSeriesFrame& f, std::size_t begin, std::size_t end) {
    if (begin > end || end > f.rows()) throw std::out_of_range("take_rows: bad range");
    TimeSeriesFrame out;
    out.frequency = f.frequency;
    out.names = f.names;
    out.dates.assign(f.dates.begin() + begin, f.dates.begin() + end);
    out.columns.reserve(f.columns.size());
    for (const auto& c : f.columns)
        out.columns.emplace_back(c.begin() + begin, c.begin() + end);
    for (const auto& [name, col] : f.text)
        out.text[name] = std::vector<std::string>(col.begin() + begin, col.begin() + end);
    return out;
}

}  // namespace watertwin::data
