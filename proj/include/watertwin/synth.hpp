#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/additive.hpp"
#include "watertwin/dates.hpp"
#include "watertwin/rng.hpp"
#include "watertwin/timeseries.hpp"

namespace watertwin::synth {

/// Tunable town: a drifting baseline, a strong weekly rhythm, summer peaks
/// driven by temperature, and holiday spikes. Defaults give a few years of
/// believable daily demand for exercising the forecasting stack end to end.
struct SynthSpec {
    Date start = Date::from_ymd(2020, 1, 1);
    int n_days = 1460;
    std::uint64_t seed = 42;

    double base_m3 = 120.0;        // demand level at day zero
    double trend_per_day = 0.01;   // slow growth as the network expands
    double weekly_amp = 6.0;       // weekday-vs-weekend swing
    double yearly_amp = 10.0;      // seasonal swing beyond the weather effect
    double temp_beta = 0.8;        // extra m3 per degree of daily maximum
    double holiday_uplift = 9.0;   // garden watering on days off
    double noise_sd = 2.0;         // unexplained demand noise
    double temp_noise_sd = 2.5;    // weather around its seasonal normals
};

namespace synth_detail {

inline int day_of_year(Date d) { return d - Date::from_ymd(d.year(), 1, 1); }

inline bool fixed_holiday(Date d) {
    for (auto [m, dd] : models::spanish_fixed_holidays())
        if (d.month() == m && d.day() == dd) return true;
    return false;
}

}  // namespace synth_detail

/// One frame with demand and the weather that drove it. Columns:
/// consumption_m3, tmax, tmin, prec.
inline data::TimeSeriesFrame generate_daily(const SynthSpec& spec) {
    if (spec.n_days < 1) throw std::invalid_argument("need at least one day of data");
    Rng rng(spec.seed);

    // relative weekday demand; people water gardens and wash cars on weekends
    constexpr double week_shape[7] = {0.1, 0.0, -0.1, 0.0, 0.2, 1.0, 0.7};
    constexpr double two_pi = 6.283185307179586;

    data::TimeSeriesFrame frame;
    frame.frequency = data::Frequency::daily;
    std::vector<double> demand, tmax_col, tmin_col, prec_col;
    for (int t = 0; t < spec.n_days; ++t) {
        Date d = spec.start.plus_days(t);
        double doy = static_cast<double>(synth_detail::day_of_year(d));

        double tmax = 20.0 + 8.0 * std::sin(two_pi * (doy - 105.0) / 365.25) +
                      rng.normal(0.0, spec.temp_noise_sd);
        double tmin = tmax - 8.0 - rng.normal(0.0, 1.5);
        double prec = rng.uniform01() < 0.25 ? -std::log(rng.uniform01()) * 4.0 : 0.0;

        double level = spec.base_m3 + spec.trend_per_day * t +
                       spec.weekly_amp * week_shape[d.day_of_week()] +
                       spec.yearly_amp * std::sin(two_pi * (doy - 15.0) / 365.25) +
                       spec.temp_beta * tmax + rng.normal(0.0, spec.noise_sd);
        if (synth_detail::fixed_holiday(d)) level += spec.holiday_uplift;

        frame.dates.push_back(d);
        demand.push_back(std::max(0.0, level));
        tmax_col.push_back(tmax);
        tmin_col.push_back(tmin);
        prec_col.push_back(prec);
    }
    frame.add_column("consumption_m3", std::move(demand));
    frame.add_column("tmax", std::move(tmax_col));
    frame.add_column("tmin", std::move(tmin_col));
    frame.add_column("prec", std::move(prec_col));
    frame.check();
    return frame;
}

/// Writes the two-column meter export that the consumption loader reads.
/// The generating recipe rides along as a comment so a dataset is always
/// traceable to its knobs.
inline void write_consumption_csv(const data::TimeSeriesFrame& frame, const std::string& path,
                                  const SynthSpec& spec = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const auto& y = frame.column("consumption_m3");
    char doc[320];
    std::snprintf(doc, sizeof doc,
                  "# consumption = %.3f + %.4f*t + %.3f*week_shape(dow) + "
                  "%.3f*sin(2*pi*(doy-15)/365.25) + %.3f*tmax + noise(sd=%.3f) "
                  "+ %.3f*is_holiday, floored at 0\n",
                  spec.base_m3, spec.trend_per_day, spec.weekly_amp, spec.yearly_amp,
                  spec.temp_beta, spec.noise_sd, spec.holiday_uplift);
    out << doc;
    out << "date,consumption_m3\n";
    char buf[64];
    for (std::size_t r = 0; r < frame.dates.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%s,%.3f\n", frame.dates[r].to_string().c_str(), y[r]);
        out << buf;
    }
}

/// Writes weather in the station-export layout the meteo loader reads.
inline void write_meteo_csv(const data::TimeSeriesFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const auto& tmax = frame.column("tmax");
    const auto& tmin = frame.column("tmin");
    const auto& prec = frame.column("prec");
    out << "# tmax = 20 + 8*sin(2*pi*(doy-105)/365.25) + noise; tmin trails it; "
           "prec is exponential on a quarter of days\n";
    out << "fecha,tmed,prec,tmin,tmax\n";
    char buf[96];
    for (std::size_t r = 0; r < frame.dates.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%.1f,%.1f\n",
                      frame.dates[r].to_string().c_str(), (tmax[r] + tmin[r]) / 2.0, prec[r],
                      tmin[r], tmax[r]);
        out << buf;
    }
}

}  // namespace watertwin::synth
