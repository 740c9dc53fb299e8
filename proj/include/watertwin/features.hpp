#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/timeseries.hpp"

namespace watertwin::features {

using data::TimeSeriesFrame;
using data::is_missing;
using data::missing_value;

/// Shift a series back by k steps: output[t] = input[t-k]. The first k
/// entries are missing.
inline std::vector<double> lag(const std::vector<double>& xs, int k) {
    if (k < 1) throw std::invalid_argument("lag must be >= 1, got " + std::to_string(k));
    std::vector<double> out(xs.size(), missing_value);
    for (std::size_t t = static_cast<std::size_t>(k); t < xs.size(); ++t)
        out[t] = xs[t - static_cast<std::size_t>(k)];
    return out;
}

/// Trailing mean over the window ending at (and including) each point.
/// The first w-1 entries are missing, as is any window containing a gap.
inline std::vector<double> rolling_mean(const std::vector<double>& xs, int w) {
    if (w < 1) throw std::invalid_argument("rolling window must be >= 1, got " + std::to_string(w));
    std::vector<double> out(xs.size(), missing_value);
    for (std::size_t t = static_cast<std::size_t>(w) - 1; t < xs.size(); ++t) {
        double acc = 0.0;
        bool complete = true;
        for (std::size_t i = t + 1 - static_cast<std::size_t>(w); i <= t; ++i) {
            if (is_missing(xs[i])) {
                complete = false;
                break;
            }
            acc += xs[i];
        }
        out[t] = complete ? acc / w : missing_value;
    }
    return out;
}

struct FeatureSpec {
    std::string target = "consumption_m3";
    std::vector<int> lags = {1, 7};          // applied to the target and each regressor
    int rolling_window = 7;                  // 0 disables rolling means
    bool temporal = true;                    // day_of_week (Monday=0) and is_weekend
    std::vector<std::string> regressors;     // same-day columns carried through
};

/// Supervised design matrix, column-major; rows align with dates and y.
struct FeatureMatrix {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<double> y;

    std::size_t rows() const { return dates.size(); }
    std::size_t n_features() const { return names.size(); }
    double at(std::size_t row, std::size_t col) const { return columns[col][row]; }

    std::vector<double> row(std::size_t r) const {
        std::vector<double> out(names.size());
        for (std::size_t c = 0; c < names.size(); ++c) out[c] = columns[c][r];
        return out;
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw std::invalid_argument("feature matrix has no column '" + name + "'");
    }

    FeatureMatrix take(std::size_t begin, std::size_t end) const {
        if (begin > end || end > rows()) throw std::out_of_range("feature take: bad range");
        FeatureMatrix out;
        out.names = names;
        out.dates.assign(dates.begin() + begin, dates.begin() + end);
        out.y.assign(y.begin() + begin, y.begin() + end);
        for (const auto& c : columns) out.columns.emplace_back(c.begin() + begin, c.begin() + end);
        return out;
    }
};

/// Build the design matrix for one frame. Column order is fixed: lags of the
/// target then of each regressor (ascending k), rolling means in the same
/// column order, temporal indicators, then the same-day regressor values.
/// Rows with any missing cell (warm-up rows in particular) are dropped.
inline FeatureMatrix assemble(const TimeSeriesFrame& frame, const FeatureSpec& spec) {
    const auto& target = frame.column(spec.target);
    for (int k : spec.lags)
        if (k < 1) throw std::invalid_argument("lag must be >= 1, got " + std::to_string(k));

    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    std::vector<std::string> lag_sources = {spec.target};
    for (const auto& r : spec.regressors) lag_sources.push_back(r);

    std::vector<int> sorted_lags = spec.lags;
    std::sort(sorted_lags.begin(), sorted_lags.end());
    for (const auto& src : lag_sources)
        for (int k : sorted_lags) {
            names.push_back(src + "_lag" + std::to_string(k));
            cols.push_back(lag(frame.column(src), k));
        }
    if (spec.rolling_window > 0)
        for (const auto& src : lag_sources) {
            names.push_back(src + "_roll" + std::to_string(spec.rolling_window));
            cols.push_back(rolling_mean(frame.column(src), spec.rolling_window));
        }
    if (spec.temporal) {
        std::vector<double> dow, wkend;
        for (Date d : frame.dates) {
            dow.push_back(static_cast<double>(d.day_of_week()));
            wkend.push_back(d.is_weekend() ? 1.0 : 0.0);
        }
        names.push_back("day_of_week");
        cols.push_back(std::move(dow));
        names.push_back("is_weekend");
        cols.push_back(std::move(wkend));
    }
    for (const auto& r : spec.regressors) {
        names.push_back(r);
        cols.push_back(frame.column(r));
    }

    FeatureMatrix out;
    out.names = std::move(names);
    out.columns.assign(out.names.size(), {});
    for (std::size_t t = 0; t < frame.rows(); ++t) {
        bool ok = !is_missing(target[t]);
        for (const auto& c : cols)
            if (is_missing(c[t])) {
                ok = false;
                break;
            }
        if (!ok) continue;
        out.dates.push_back(frame.dates[t]);
        out.y.push_back(target[t]);
        for (std::size_t c = 0; c < cols.size(); ++c) out.columns[c].push_back(cols[c][t]);
    }
    return out;
}

}  // namespace watertwin::features
