#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/timeseries.hpp"

namespace watertwin::data {

enum class AggPolicy { sum, mean, max, min };

/// Column defaults: volumes are summed, temperature extremes keep their
/// extreme, everything else is averaged.
inline std::map<std::string, AggPolicy> default_agg_policies(const TimeSeriesFrame& f) {
    std::map<std::string, AggPolicy> p;
    for (const auto& n : f.names) {
        if (n == "consumption_m3") p[n] = AggPolicy::sum;
        else if (n == "tmax" || n == "presMax" || n == "racha") p[n] = AggPolicy::max;
        else if (n == "tmin" || n == "presMin") p[n] = AggPolicy::min;
        else p[n] = AggPolicy::mean;
    }
    return p;
}

/// Aggregate a daily frame into weekly (ISO weeks, labeled by their Monday)
/// or monthly (labeled by the first of the month) buckets. Missing cells are
/// skipped; a bucket where every cell is missing stays missing. Text columns
/// are dropped. Aggregating to the same frequency returns a copy.
inline TimeSeriesFrame aggregate(const TimeSeriesFrame& f, Frequency target,
                                 const std::map<std::string, AggPolicy>& policies) {
    if (f.frequency == target) return f;
    if (f.frequency != Frequency::daily)
        throw std::invalid_argument(std::string("aggregate: cannot go from ") +
                                    frequency_name(f.frequency) + " to " +
                                    frequency_name(target) +
                                    " (only daily input can be coarsened)");
    for (const auto& n : f.names)
        if (!policies.count(n))
            throw std::invalid_argument("aggregate: no policy for column '" + n + "'");

    auto label_of = [&](Date d) {
        return target == Frequency::weekly ? d.week_start() : d.month_start();
    };

    TimeSeriesFrame out;
    out.frequency = target;
    out.names = f.names;
    out.columns.assign(f.names.size(), {});

    std::size_t i = 0;
    while (i < f.rows()) {
        Date label = label_of(f.dates[i]);
        std::size_t j = i;
        while (j < f.rows() && label_of(f.dates[j]) == label) ++j;

        out.dates.push_back(label);
        for (std::size_t c = 0; c < f.columns.size(); ++c) {
            AggPolicy pol = policies.at(f.names[c]);
            double acc = 0.0;
            std::size_t n = 0;
            for (std::size_t r = i; r < j; ++r) {
                double v = f.columns[c][r];
                if (is_missing(v)) continue;
                if (n == 0) {
                    acc = v;
                } else {
                    switch (pol) {
                        case AggPolicy::sum:
                        case AggPolicy::mean: acc += v; break;
                        case AggPolicy::max: acc = std::max(acc, v); break;
                        case AggPolicy::min: acc = std::min(acc, v); break;
                    }
                }
                ++n;
            }
            if (n == 0) {
                out.columns[c].push_back(missing_value);
            } else if (pol == AggPolicy::mean) {
                out.columns[c].push_back(acc / static_cast<double>(n));
            } else {
                out.columns[c].push_back(acc);
            }
        }
        i = j;
    }
    out.check();
    return out;
}

inline TimeSeriesFrame aggregate(const TimeSeriesFrame& f, Frequency target) {
    return aggregate(f, target, default_agg_policies(f));
}

/// Carry the last seen value forward over missing cells. Leading missing
/// cells are left untouched. Returns the number of cells filled.
inline std::size_t forward_fill(TimeSeriesFrame& f, const std::string& column) {
    auto& col = f.column(column);
    std::size_t filled = 0;
    double last = missing_value;
    for (double& v : col) {
        if (is_missing(v)) {
            if (!is_missing(last)) {
                v = last;
                ++filled;
            }
        } else {
            last = v;
        }
    }
    return filled;
}

struct SplitResult {
    TimeSeriesFrame train;
    TimeSeriesFrame test;
};

/// Chronological split: the first floor(fraction * rows) rows train.
inline SplitResult train_test_split(const TimeSeriesFrame& f, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("train fraction must be in (0, 1)");
    std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(f.rows())));
    if (n_train == 0 || n_train == f.rows())
        throw std::invalid_argument("split leaves an empty train or test set");
    return {take_rows(f, 0, n_train), take_rows(f, n_train, f.rows())};
}

/// Chronological split at a date: train takes rows strictly before it.
inline SplitResult train_test_split(const TimeSeriesFrame& f, Date split_date) {
    std::size_t n_train = 0;
    while (n_train < f.rows() && f.dates[n_train] < split_date) ++n_train;
    if (n_train == 0 || n_train == f.rows())
        throw std::invalid_argument("split date " + split_date.to_string() +
                                    " leaves an empty train or test set");
    return {take_rows(f, 0, n_train), take_rows(f, n_train, f.rows())};
}

}  // namespace watertwin::data
