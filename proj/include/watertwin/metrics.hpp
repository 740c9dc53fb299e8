#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/forecast.hpp"
#include "watertwin/timeseries.hpp"

namespace watertwin::eval {

inline void check_lengths(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("metric inputs differ in length (" +
                                    std::to_string(actual.size()) + " vs " +
                                    std::to_string(predicted.size()) + ")");
    if (actual.empty()) throw std::invalid_argument("metric inputs are empty");
}

inline double mae(const std::vector<double>& actual, const std::vector<double>& predicted) {
    check_lengths(actual, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) acc += std::fabs(actual[i] - predicted[i]);
    return acc / static_cast<double>(actual.size());
}

inline double rmse(const std::vector<double>& actual, const std::vector<double>& predicted) {
    check_lengths(actual, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        double d = actual[i] - predicted[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(actual.size()));
}

struct MapeResult {
    double percent = 0.0;
    std::size_t excluded = 0;  // rows skipped because |actual| was below the floor
};

inline constexpr double mape_denominator_floor = 1e-9;

/// Mean absolute percentage error; rows with |actual| at or below the floor
/// are excluded and counted rather than poisoning the mean.
inline MapeResult mape(const std::vector<double>& actual, const std::vector<double>& predicted) {
    check_lengths(actual, predicted);
    double acc = 0.0;
    std::size_t n = 0, excluded = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (std::fabs(actual[i]) <= mape_denominator_floor) {
            ++excluded;
            continue;
        }
        acc += std::fabs(actual[i] - predicted[i]) / std::fabs(actual[i]);
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mape: every row has a near-zero actual");
    return {100.0 * acc / static_cast<double>(n), excluded};
}

struct MetricReport {
    std::string model;
    int horizon_days = 0;
    double mae = 0.0;
    double rmse = 0.0;
    double mape_pct = 0.0;
    std::size_t n = 0;
    std::size_t mape_excluded = 0;
};

inline MetricReport score(const std::string& model_name, int horizon_days,
                          const std::vector<double>& actual, const std::vector<double>& predicted) {
    MetricReport r;
    r.model = model_name;
    r.horizon_days = horizon_days;
    r.mae = mae(actual, predicted);
    r.rmse = rmse(actual, predicted);
    auto mp = mape(actual, predicted);
    r.mape_pct = mp.percent;
    r.n = actual.size();
    r.mape_excluded = mp.excluded;
    return r;
}

/// Evaluation window of `days` rows ending at `end_row` (exclusive).
struct EvalWindow {
    int horizon_days = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Assign one window per horizon, packed back from the end of the frame so
/// that windows never overlap: the shortest horizon takes the final rows,
/// the next one the rows immediately before it, and so on.
inline std::vector<EvalWindow> horizon_windows(std::size_t test_begin, std::size_t n_rows,
                                               std::vector<int> horizons) {
    if (horizons.empty()) throw std::invalid_argument("no evaluation horizons given");
    std::sort(horizons.begin(), horizons.end());
    std::vector<EvalWindow> out;
    std::size_t end = n_rows;
    for (int h : horizons) {
        if (h < 1) throw std::invalid_argument("horizon must be >= 1 day");
        if (static_cast<std::size_t>(h) > end - test_begin)
            throw std::invalid_argument("horizon of " + std::to_string(h) +
                                        " days does not fit in the " +
                                        std::to_string(end - test_begin) +
                                        " unassigned test rows");
        out.push_back({h, end - static_cast<std::size_t>(h), end});
        end -= static_cast<std::size_t>(h);
    }
    return out;
}

/// Train every model on the rows before `test_begin` and score it on each
/// horizon window. Rows come back grouped by horizon, models in input order.
inline std::vector<MetricReport> compare_models(
    const std::vector<models::ForecastModel*>& model_list, const data::TimeSeriesFrame& frame,
    const std::string& target, std::size_t test_begin, const std::vector<int>& horizons) {
    if (test_begin == 0 || test_begin >= frame.rows())
        throw std::invalid_argument("test split leaves an empty train or test set");
    auto windows = horizon_windows(test_begin, frame.rows(), horizons);
    auto train_frame = data::take_rows(frame, 0, test_begin);
    for (auto* m : model_list) m->train(train_frame);

    const auto& y = frame.column(target);
    std::vector<MetricReport> out;
    for (const auto& w : windows) {
        std::vector<double> actual(y.begin() + w.begin, y.begin() + w.end);
        for (auto* m : model_list) {
            auto predicted = m->predict(frame, w.begin, w.end);
            out.push_back(score(m->name(), w.horizon_days, actual, predicted));
        }
    }
    return out;
}

inline std::string format_double(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// CSV emission: model,horizon,mae,rmse,mape_pct,n
inline void write_report_csv(std::ostream& out, const std::vector<MetricReport>& rows) {
    out << "model,horizon,mae,rmse,mape_pct,n\n";
    for (const auto& r : rows)
        out << r.model << ',' << r.horizon_days << ',' << format_double(r.mae, 6) << ','
            << format_double(r.rmse, 6) << ',' << format_double(r.mape_pct, 6) << ',' << r.n
            << '\n';
}

/// Aligned text table, one block per horizon; the best value in each metric
/// column is flagged with '*'.
inline void write_report_table(std::ostream& out, const std::vector<MetricReport>& rows) {
    std::vector<int> horizons;
    for (const auto& r : rows)
        if (std::find(horizons.begin(), horizons.end(), r.horizon_days) == horizons.end())
            horizons.push_back(r.horizon_days);

    std::size_t name_w = 5;
    for (const auto& r : rows) name_w = std::max(name_w, r.model.size());

    for (int h : horizons) {
        std::vector<const MetricReport*> block;
        for (const auto& r : rows)
            if (r.horizon_days == h) block.push_back(&r);
        double best_mae = 1e300, best_rmse = 1e300, best_mape = 1e300;
        for (const auto* r : block) {
            best_mae = std::min(best_mae, r->mae);
            best_rmse = std::min(best_rmse, r->rmse);
            best_mape = std::min(best_mape, r->mape_pct);
        }
        out << "horizon: " << h << " days (n=" << block.front()->n << ")\n";
        char line[256];
        std::snprintf(line, sizeof line, "  %-*s  %12s  %12s  %12s\n", static_cast<int>(name_w),
                      "model", "mae", "rmse", "mape_pct");
        out << line;
        for (const auto* r : block) {
            auto cell = [&](double v, double best) {
                return format_double(v, 2) + (v == best ? "*" : " ");
            };
            std::snprintf(line, sizeof line, "  %-*s  %12s  %12s  %12s\n", static_cast<int>(name_w),
                          r->model.c_str(), cell(r->mae, best_mae).c_str(),
                          cell(r->rmse, best_rmse).c_str(), cell(r->mape_pct, best_mape).c_str());
            out << line;
        }
    }
}

}  // namespace watertwin::eval
