#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/timeseries.hpp"

namespace watertwin::data {

/// Min-max range of a column; scales into [0, 1].
struct MinMaxParams {
    double lo = 0.0;
    double hi = 1.0;

    double scale(double v) const { return (v - lo) / (hi - lo); }
    double unscale(double v) const { return lo + v * (hi - lo); }
};

inline MinMaxParams fit_minmax(const std::vector<double>& xs) {
    bool seen = false;
    MinMaxParams p;
    for (double v : xs) {
        if (is_missing(v)) continue;
        if (!seen) {
            p.lo = p.hi = v;
            seen = true;
        } else {
            p.lo = std::min(p.lo, v);
            p.hi = std::max(p.hi, v);
        }
    }
    if (!seen) throw std::invalid_argument("min-max fit: no observed values");
    if (p.lo == p.hi)
        throw std::invalid_argument("min-max fit: constant input (" + std::to_string(p.lo) +
                                    "), range is degenerate");
    return p;
}

/// Mean and population standard deviation; scales to zero mean, unit sd.
struct ZScoreParams {
    double mu = 0.0;
    double sigma = 1.0;

    double scale(double v) const { return (v - mu) / sigma; }
    double unscale(double v) const { return mu + v * sigma; }
};

inline ZScoreParams fit_zscore(const std::vector<double>& xs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : xs) {
        if (is_missing(v)) continue;
        sum += v;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("z-score fit: no observed values");
    double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : xs) {
        if (is_missing(v)) continue;
        ss += (v - mu) * (v - mu);
    }
    double sigma = std::sqrt(ss / static_cast<double>(n));
    if (sigma == 0.0)
        throw std::invalid_argument("z-score fit: constant input, sigma is zero");
    return {mu, sigma};
}

template <typename Params>
inline std::vector<double> apply_scale(const Params& p, const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double v : xs) out.push_back(is_missing(v) ? missing_value : p.scale(v));
    return out;
}

template <typename Params>
inline std::vector<double> apply_unscale(const Params& p, const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double v : xs) out.push_back(is_missing(v) ? missing_value : p.unscale(v));
    return out;
}

}  // namespace watertwin::data
