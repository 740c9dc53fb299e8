#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "watertwin/features.hpp"
#include "watertwin/forecast.hpp"
#include "watertwin/timeseries.hpp"

namespace watertwin::models {

struct Seasonality {
    std::string name;
    double period_days = 7.0;
    int fourier_order = 3;
};

enum class HolidayRule { none, spanish_fixed };

/// Fixed-date national holidays (month, day); recurring every year.
inline const std::vector<std::pair<unsigned, unsigned>>& spanish_fixed_holidays() {
    static const std::vector<std::pair<unsigned, unsigned>> days = {
        {1, 1}, {1, 6}, {5, 1}, {8, 15}, {10, 12}, {12, 6}, {12, 25}};
    return days;
}

struct AdditiveSpec {
    std::string variant_name = "additive";
    std::string target = "consumption_m3";

    int changepoint_count = 10;
    double changepoint_range = 0.8;  // changepoints live in this leading fraction of training

    std::vector<Seasonality> seasonalities = {{"yearly", 365.25, 10}, {"weekly", 7.0, 3}};
    HolidayRule holiday_rule = HolidayRule::none;
    std::vector<Date> extra_holidays;

    std::vector<std::string> regressors;   // same-day columns, e.g. tmax
    bool engineered_features = false;      // lag1, lag7 and rolling-7 of the target
    bool multiplicative_seasonality = false;

    double ridge = 1e-8;  // never applied to the intercept
};

/// The four ready-made configurations, each a superset of the previous one.
inline std::vector<AdditiveSpec> additive_variants(const std::string& target = "consumption_m3",
                                                   const std::string& temperature = "tmax") {
    AdditiveSpec basic;
    basic.variant_name = "additive_basic";
    basic.target = target;
    basic.regressors = {temperature};

    AdditiveSpec seasonal = basic;
    seasonal.variant_name = "additive_seasonality";
    seasonal.seasonalities.push_back({"monthly", 30.44, 5});

    AdditiveSpec advanced = seasonal;
    advanced.variant_name = "additive_advanced";
    advanced.holiday_rule = HolidayRule::spanish_fixed;

    AdditiveSpec adv_fe = advanced;
    adv_fe.variant_name = "additive_adv_fe";
    adv_fe.engineered_features = true;

    return {basic, seasonal, advanced, adv_fe};
}

class AdditiveModel : public ForecastModel {
public:
    explicit AdditiveModel(AdditiveSpec spec) : spec_(std::move(spec)) {
        if (spec_.changepoint_count < 0) throw std::invalid_argument("negative changepoint count");
        if (!(spec_.changepoint_range > 0.0 && spec_.changepoint_range <= 1.0))
            throw std::invalid_argument("changepoint range must be in (0, 1]");
        for (const auto& s : spec_.seasonalities) {
            if (s.period_days <= 0) throw std::invalid_argument("seasonal period must be positive");
            if (s.fourier_order < 1) throw std::invalid_argument("fourier order must be >= 1");
        }
    }

    std::string name() const override { return spec_.variant_name; }
    const AdditiveSpec& spec() const { return spec_; }

    void train(const data::TimeSeriesFrame& frame) override {
        if (frame.rows() < 3) throw std::invalid_argument("additive fit needs at least 3 rows");
        t0_ = frame.dates.front();
        span_days_ = std::max(1.0, static_cast<double>(frame.dates.back() - frame.dates.front()));
        changepoints_.clear();
        for (int j = 1; j <= spec_.changepoint_count; ++j)
            changepoints_.push_back(spec_.changepoint_range * j /
                                    static_cast<double>(spec_.changepoint_count + 1));

        auto [X, names, kinds, rows] = design(frame, 0, frame.rows(), true);
        if (rows.size() < names.size())
            throw std::invalid_argument("additive fit: " + std::to_string(rows.size()) +
                                        " usable rows for " + std::to_string(names.size()) +
                                        " columns");
        const auto& target = frame.column(spec_.target);
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = target[rows[i]];

        names_ = names;
        kinds_ = kinds;

        if (spec_.multiplicative_seasonality) {
            // first pass: trend alone, used to scale the seasonal block
            Eigen::MatrixXd T = select(X, kinds, ColKind::trend);
            trend_theta_ = solve(T, y, trend_names());
            Eigen::VectorXd g = T * trend_theta_;
            Eigen::MatrixXd Xs = X;
            for (Eigen::Index c = 0; c < Xs.cols(); ++c)
                if (kinds[static_cast<std::size_t>(c)] == ColKind::seasonal)
                    Xs.col(c) = Xs.col(c).cwiseProduct(g);
            theta_ = solve(Xs, y, names_);
            residual_sse_ = (y - Xs * theta_).squaredNorm();
        } else {
            theta_ = solve(X, y, names_);
            residual_sse_ = (y - X * theta_).squaredNorm();
        }
        trained_ = true;
    }

    std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                std::size_t end) const override {
        if (!trained_) throw std::logic_error("predict before train");
        auto [X, names, kinds, rows] = design(frame, begin, end, false);
        (void)names;
        Eigen::VectorXd yhat;
        if (spec_.multiplicative_seasonality) {
            Eigen::MatrixXd T = select(X, kinds, ColKind::trend);
            Eigen::VectorXd g = T * trend_theta_;
            Eigen::MatrixXd Xs = X;
            for (Eigen::Index c = 0; c < Xs.cols(); ++c)
                if (kinds[static_cast<std::size_t>(c)] == ColKind::seasonal)
                    Xs.col(c) = Xs.col(c).cwiseProduct(g);
            yhat = Xs * theta_;
        } else {
            yhat = X * theta_;
        }
        return std::vector<double>(yhat.data(), yhat.data() + yhat.size());
    }

    double training_sse() const {
        if (!trained_) throw std::logic_error("no fit yet");
        return residual_sse_;
    }

    const std::vector<std::string>& coefficient_names() const { return names_; }
    std::vector<double> coefficients() const {
        return std::vector<double>(theta_.data(), theta_.data() + theta_.size());
    }

    bool is_holiday(Date d) const {
        if (spec_.holiday_rule == HolidayRule::spanish_fixed)
            for (auto [m, dd] : spanish_fixed_holidays())
                if (d.month() == m && d.day() == dd) return true;
        for (Date h : spec_.extra_holidays)
            if (h == d) return true;
        return false;
    }

private:
    enum class ColKind { trend, seasonal, holiday, regressor, engineered };

    std::vector<std::string> trend_names() const {
        std::vector<std::string> n = {"intercept", "trend"};
        for (std::size_t j = 0; j < changepoints_.size(); ++j)
            n.push_back("changepoint" + std::to_string(j + 1));
        return n;
    }

    /// Design matrix over rows [begin, end). During fit, rows with any
    /// non-finite cell are dropped; during prediction they are an error.
    std::tuple<Eigen::MatrixXd, std::vector<std::string>, std::vector<ColKind>,
               std::vector<std::size_t>>
    design(const data::TimeSeriesFrame& frame, std::size_t begin, std::size_t end,
           bool drop_bad_rows) const {
        if (begin >= end || end > frame.rows()) throw std::out_of_range("bad design row range");

        std::vector<std::string> names = trend_names();
        std::vector<ColKind> kinds(names.size(), ColKind::trend);
        for (const auto& s : spec_.seasonalities)
            for (int k = 1; k <= s.fourier_order; ++k) {
                names.push_back(s.name + "_sin" + std::to_string(k));
                kinds.push_back(ColKind::seasonal);
                names.push_back(s.name + "_cos" + std::to_string(k));
                kinds.push_back(ColKind::seasonal);
            }
        bool any_holidays =
            spec_.holiday_rule != HolidayRule::none || !spec_.extra_holidays.empty();
        if (any_holidays) {
            names.push_back("holiday");
            kinds.push_back(ColKind::holiday);
        }
        for (const auto& r : spec_.regressors) {
            names.push_back(r);
            kinds.push_back(ColKind::regressor);
        }
        std::vector<std::vector<double>> engineered;
        if (spec_.engineered_features) {
            const auto& y = frame.column(spec_.target);
            engineered.push_back(features::lag(y, 1));
            engineered.push_back(features::lag(y, 7));
            engineered.push_back(features::rolling_mean(y, 7));
            for (const char* n : {"_lag1", "_lag7", "_roll7"}) {
                names.push_back(spec_.target + n);
                kinds.push_back(ColKind::engineered);
            }
        }

        std::vector<std::size_t> rows;
        std::vector<double> cells;
        cells.reserve((end - begin) * names.size());
        for (std::size_t r = begin; r < end; ++r) {
            std::vector<double> row;
            row.reserve(names.size());
            double tau = static_cast<double>(frame.dates[r] - t0_);
            double tn = tau / span_days_;
            row.push_back(1.0);
            row.push_back(tn);
            for (double cp : changepoints_) row.push_back(std::max(0.0, tn - cp));
            for (const auto& s : spec_.seasonalities)
                for (int k = 1; k <= s.fourier_order; ++k) {
                    double a = 2.0 * M_PI * k * tau / s.period_days;
                    row.push_back(std::sin(a));
                    row.push_back(std::cos(a));
                }
            if (any_holidays) row.push_back(is_holiday(frame.dates[r]) ? 1.0 : 0.0);
            for (const auto& reg : spec_.regressors) row.push_back(frame.column(reg)[r]);
            for (const auto& col : engineered) row.push_back(col[r]);

            bool ok = true;
            for (double v : row)
                if (!std::isfinite(v)) {
                    ok = false;
                    break;
                }
            if (!ok) {
                if (!drop_bad_rows)
                    throw std::invalid_argument("cannot build prediction features for " +
                                                frame.dates[r].to_string() +
                                                " (missing value or not enough history)");
                continue;
            }
            rows.push_back(r);
            cells.insert(cells.end(), row.begin(), row.end());
        }
        if (rows.empty()) throw std::invalid_argument("no usable rows in the requested range");

        Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < names.size(); ++c)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    cells[i * names.size() + c];
        return {std::move(X), std::move(names), std::move(kinds), std::move(rows)};
    }

    static Eigen::MatrixXd select(const Eigen::MatrixXd& X, const std::vector<ColKind>& kinds,
                                  ColKind want) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index c = 0; c < X.cols(); ++c)
            if (kinds[static_cast<std::size_t>(c)] == want) idx.push_back(c);
        Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = X.col(idx[i]);
        return out;
    }

    static std::string collinear_columns(const Eigen::MatrixXd& X,
                                         const std::vector<std::string>& names) {
        std::string cols;
        auto append = [&](const std::string& s) { cols += (cols.empty() ? "" : ", ") + s; };
        for (Eigen::Index a = 0; a < X.cols(); ++a) {
            double na = X.col(a).norm();
            if (na == 0.0) {
                append(names[static_cast<std::size_t>(a)] + " (all zero)");
                continue;
            }
            for (Eigen::Index b = a + 1; b < X.cols(); ++b) {
                double nb = X.col(b).norm();
                if (nb == 0.0) continue;
                double cosab = X.col(a).dot(X.col(b)) / (na * nb);
                if (std::fabs(cosab) > 1.0 - 1e-12)
                    append(names[static_cast<std::size_t>(a)] + "~" +
                           names[static_cast<std::size_t>(b)]);
            }
        }
        return cols;
    }

    /// Penalized normal equations; the intercept is never shrunk. Throws on
    /// rank deficiency the ridge cannot rescue, naming the columns involved.
    Eigen::VectorXd solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<std::string>& names) const {
        if (spec_.ridge == 0.0) {
            std::string cols = collinear_columns(X, names);
            if (!cols.empty())
                throw std::runtime_error(
                    "additive fit is rank deficient (no ridge); collinear columns: " + cols);
        }
        Eigen::MatrixXd G = X.transpose() * X;
        for (Eigen::Index c = 1; c < G.cols(); ++c) G(c, c) += spec_.ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        Eigen::VectorXd theta;
        bool bad = ldlt.info() != Eigen::Success;
        if (!bad) {
            theta = ldlt.solve(X.transpose() * y);
            bad = !theta.allFinite();
        }
        if (bad) {
            std::string cols = collinear_columns(X, names);
            throw std::runtime_error("additive fit is rank deficient; collinear columns: " +
                                     (cols.empty() ? std::string("(not identified)") : cols));
        }
        return theta;
    }

    AdditiveSpec spec_;
    bool trained_ = false;
    Date t0_;
    double span_days_ = 1.0;
    std::vector<double> changepoints_;
    std::vector<std::string> names_;
    std::vector<ColKind> kinds_;
    Eigen::VectorXd theta_;
    Eigen::VectorXd trend_theta_;
    double residual_sse_ = 0.0;
};

}  // namespace watertwin::models
