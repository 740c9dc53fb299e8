#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/timeseries.hpp"

namespace watertwin::models {

/// Common face of the forecasting families. A model is trained on a frame
/// and then asked for predictions over a row range of a (possibly longer)
/// frame that shares the training history, so lagged features can be built
/// from observed values.
class ForecastModel {
public:
    virtual ~ForecastModel() = default;

    virtual std::string name() const = 0;

    virtual void train(const data::TimeSeriesFrame& frame) = 0;

    /// Predictions for rows [begin, end) of `frame`.
    virtual std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                        std::size_t end) const = 0;
};

/// Seasonal persistence: tomorrow looks like the same weekday last week.
/// Serves as the floor every trained model has to clear.
class NaiveSeasonalModel : public ForecastModel {
public:
    explicit NaiveSeasonalModel(std::string target = "consumption_m3", int season = 7)
        : target_(std::move(target)), season_(season) {
        if (season < 1) throw std::invalid_argument("season must be >= 1");
    }

    std::string name() const override { return "naive_lag" + std::to_string(season_); }

    void train(const data::TimeSeriesFrame&) override {}

    std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                std::size_t end) const override {
        const auto& y = frame.column(target_);
        std::vector<double> out;
        out.reserve(end - begin);
        for (std::size_t r = begin; r < end; ++r) {
            if (r < static_cast<std::size_t>(season_))
                throw std::invalid_argument("not enough history before row " + std::to_string(r));
            out.push_back(y[r - static_cast<std::size_t>(season_)]);
        }
        return out;
    }

private:
    std::string target_;
    int season_;
};

}  // namespace watertwin::models
