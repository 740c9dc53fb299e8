#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/timeseries.hpp"

namespace watertwin::data {

/// Pearson correlation with pairwise-complete deletion: rows where either
/// value is missing are dropped. Throws when fewer than two complete pairs
/// remain or when either side is constant. The result is in [-1, 1].
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson_r: length mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_missing(x[i]) || is_missing(y[i])) continue;
        sx += x[i];
        sy += y[i];
        ++n;
    }
    if (n < 2) throw std::invalid_argument("pearson_r: fewer than two complete pairs");
    double mx = sx / static_cast<double>(n);
    double my = sy / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_missing(x[i]) || is_missing(y[i])) continue;
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson_r: constant input, correlation undefined");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

struct CorrelationEntry {
    std::string column;
    double r = missing_value;      // NaN when undefined for this pair
    std::string note;              // why it is undefined, when it is
    std::size_t n_pairs = 0;
};

/// Correlation of one target column against every other numeric column,
/// sorted by |r| descending. Pairs where the coefficient is undefined are
/// kept with a note instead of failing the whole screen.
inline std::vector<CorrelationEntry> correlate_against(const TimeSeriesFrame& f,
                                                       const std::string& target) {
    const auto& ty = f.column(target);
    std::vector<CorrelationEntry> out;
    for (std::size_t c = 0; c < f.names.size(); ++c) {
        if (f.names[c] == target) continue;
        CorrelationEntry e;
        e.column = f.names[c];
        for (std::size_t i = 0; i < f.rows(); ++i)
            if (!is_missing(ty[i]) && !is_missing(f.columns[c][i])) ++e.n_pairs;
        try {
            e.r = pearson_r(ty, f.columns[c]);
        } catch (const std::exception& ex) {
            e.note = ex.what();
        }
        out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
        bool va = !is_missing(a.r), vb = !is_missing(b.r);
        if (va != vb) return va;
        if (!va) return false;
        return std::fabs(a.r) > std::fabs(b.r);
    });
    return out;
}

/// Full symmetric correlation matrix over the given columns (all numeric
/// columns when empty). Undefined cells are NaN; the diagonal is 1.
struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> r;          // r[i][j]
    std::vector<std::string> failures;           // "a vs b: why"
};

inline CorrelationMatrix correlation_matrix(const TimeSeriesFrame& f,
                                            std::vector<std::string> columns = {}) {
    CorrelationMatrix m;
    m.names = columns.empty() ? f.names : std::move(columns);
    std::size_t k = m.names.size();
    m.r.assign(k, std::vector<double>(k, missing_value));
    for (std::size_t i = 0; i < k; ++i) {
        m.r[i][i] = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            try {
                double v = pearson_r(f.column(m.names[i]), f.column(m.names[j]));
                m.r[i][j] = m.r[j][i] = v;
            } catch (const std::exception& ex) {
                m.failures.push_back(m.names[i] + " vs " + m.names[j] + ": " + ex.what());
            }
        }
    }
    return m;
}

}  // namespace watertwin::data
