#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "watertwin/csv.hpp"
#include "watertwin/timeseries.hpp"

namespace watertwin::data {

struct ParseIssue {
    std::size_t line_no = 0;  // 0 when the source has no line structure
    std::string message;
};

struct IngestResult {
    TimeSeriesFrame frame;
    std::vector<ParseIssue> issues;  // rejected rows and unparsable cells
};

namespace detail {

inline const std::vector<std::string>& meteo_numeric_fields() {
    static const std::vector<std::string> f = {"tmed",     "prec", "tmin",    "tmax",
                                               "dir",      "velmedia", "racha", "sol",
                                               "presMax",  "presMin"};
    return f;
}

inline const std::vector<std::string>& meteo_text_fields() {
    static const std::vector<std::string> f = {"horatmin", "horatmax", "horaracha",
                                               "horaPresMax", "horaPresMin"};
    return f;
}

struct DatedRow {
    Date date;
    std::vector<double> nums;
    std::vector<std::string> texts;
    std::size_t line_no;
};

/// Sort by date and fail on duplicates, naming the offending dates.
inline void sort_and_check_dates(std::vector<DatedRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const DatedRow& a, const DatedRow& b) { return a.date < b.date; });
    std::string dups;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date) {
            if (!dups.empty()) dups += ", ";
            dups += rows[i].date.to_string();
        }
    if (!dups.empty()) throw std::runtime_error("duplicate date rows: " + dups);
}

}  // namespace detail

/// Daily consumption readings from a two-column CSV (date, consumption_m3).
/// Header matching is case-insensitive; extra columns are ignored. Malformed
/// rows (bad date, missing or negative consumption) are rejected and
/// reported; duplicate dates are an error; rows are sorted by date.
inline IngestResult load_consumption_csv(const std::string& path) {
    auto rows = csv::read_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty file");

    const auto& header = rows.front().fields;
    std::optional<std::size_t> date_col, cons_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string h = csv::lower(csv::trim(header[i]));
        if (h == "date") date_col = i;
        if (h == "consumption_m3") cons_col = i;
    }
    if (!date_col || !cons_col)
        throw std::runtime_error(path + ": header must contain 'date' and 'consumption_m3'");

    IngestResult out;
    std::vector<detail::DatedRow> parsed;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto reject = [&](const std::string& why) {
            out.issues.push_back({row.line_no, why});
        };
        if (row.fields.size() <= std::max(*date_col, *cons_col)) {
            reject("too few fields");
            continue;
        }
        Date d{};
        try {
            d = Date::parse(csv::trim(row.fields[*date_col]));
        } catch (const std::exception& e) {
            reject(e.what());
            continue;
        }
        auto v = csv::parse_number(row.fields[*cons_col]);
        if (!v) {
            reject("consumption not numeric: '" + row.fields[*cons_col] + "'");
            continue;
        }
        if (*v < 0.0) {
            reject("negative consumption: " + row.fields[*cons_col]);
            continue;
        }
        parsed.push_back({d, {*v}, {}, row.line_no});
    }
    detail::sort_and_check_dates(parsed);

    out.frame.frequency = Frequency::daily;
    out.frame.names = {"consumption_m3"};
    out.frame.columns.resize(1);
    for (const auto& p : parsed) {
        out.frame.dates.push_back(p.date);
        out.frame.columns[0].push_back(p.nums[0]);
    }
    out.frame.check();
    return out;
}

/// Daily weather observations in the AEMET climatological CSV layout
/// (fecha, tmed, prec, tmin, horatmin, tmax, horatmax, dir, velmedia, racha,
/// horaracha, sol, presMax, horaPresMax, presMin, horaPresMin).
/// Headers match case-insensitively; decimal commas are accepted; empty
/// cells become missing values and unparsable cells are reported as issues.
/// 'fecha' and 'tmax' must be present; hora* fields are kept as text.
inline IngestResult load_meteo_csv(const std::string& path) {
    auto rows = csv::read_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty file");

    std::map<std::string, std::size_t> header_pos;
    for (std::size_t i = 0; i < rows.front().fields.size(); ++i)
        header_pos[csv::lower(csv::trim(rows.front().fields[i]))] = i;

    if (!header_pos.count("fecha"))
        throw std::runtime_error(path + ": mandatory column 'fecha' missing");
    if (!header_pos.count("tmax"))
        throw std::runtime_error(path + ": mandatory column 'tmax' missing");

    const auto& nums = detail::meteo_numeric_fields();
    const auto& texts = detail::meteo_text_fields();
    std::vector<std::optional<std::size_t>> num_pos, text_pos;
    for (const auto& n : nums) {
        auto it = header_pos.find(csv::lower(n));
        num_pos.push_back(it == header_pos.end() ? std::nullopt
                                                 : std::optional<std::size_t>(it->second));
    }
    for (const auto& n : texts) {
        auto it = header_pos.find(csv::lower(n));
        text_pos.push_back(it == header_pos.end() ? std::nullopt
                                                  : std::optional<std::size_t>(it->second));
    }

    IngestResult out;
    std::vector<detail::DatedRow> parsed;
    auto cell = [](const csv::Row& row, std::optional<std::size_t> pos) -> std::string {
        if (!pos || *pos >= row.fields.size()) return "";
        return csv::trim(row.fields[*pos]);
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        Date d{};
        try {
            d = Date::parse(cell(row, header_pos.at("fecha")));
        } catch (const std::exception& e) {
            out.issues.push_back({row.line_no, e.what()});
            continue;
        }
        detail::DatedRow pr{d, {}, {}, row.line_no};
        for (std::size_t i = 0; i < nums.size(); ++i) {
            std::string raw = cell(row, num_pos[i]);
            if (raw.empty()) {
                pr.nums.push_back(missing_value);
                continue;
            }
            auto v = csv::parse_number(raw);
            if (!v) {
                out.issues.push_back({row.line_no, nums[i] + " not numeric: '" + raw + "'"});
                pr.nums.push_back(missing_value);
            } else {
                pr.nums.push_back(*v);
            }
        }
        for (std::size_t i = 0; i < texts.size(); ++i)
            pr.texts.push_back(cell(row, text_pos[i]));
        parsed.push_back(std::move(pr));
    }
    detail::sort_and_check_dates(parsed);

    out.frame.frequency = Frequency::daily;
    out.frame.names = nums;
    out.frame.columns.assign(nums.size(), {});
    for (const auto& t : texts) out.frame.text[t] = {};
    for (const auto& p : parsed) {
        out.frame.dates.push_back(p.date);
        for (std::size_t i = 0; i < nums.size(); ++i) out.frame.columns[i].push_back(p.nums[i]);
        for (std::size_t i = 0; i < texts.size(); ++i) out.frame.text[texts[i]].push_back(p.texts[i]);
    }
    out.frame.check();
    return out;
}

/// Adapter for the AEMET OpenData JSON export: an array of objects whose
/// values are strings with decimal commas ("tmed": "12,5"). Produces a frame
/// with the same shape as the CSV path.
inline IngestResult load_meteo_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error(path + ": expected a JSON array of records");

    const auto& nums = detail::meteo_numeric_fields();
    const auto& texts = detail::meteo_text_fields();

    IngestResult out;
    std::vector<detail::DatedRow> parsed;
    std::size_t record_no = 0;
    for (const auto& rec : doc) {
        ++record_no;
        if (!rec.is_object()) {
            out.issues.push_back({record_no, "record is not an object"});
            continue;
        }
        auto field = [&](const std::string& name) -> std::string {
            for (auto it = rec.begin(); it != rec.end(); ++it)
                if (csv::lower(it.key()) == csv::lower(name)) {
                    if (it->is_string()) return csv::trim(it->get<std::string>());
                    if (it->is_number()) return std::to_string(it->get<double>());
                    return "";
                }
            return "";
        };
        std::string fecha = field("fecha");
        if (fecha.empty()) {
            out.issues.push_back({record_no, "record has no fecha"});
            continue;
        }
        Date d{};
        try {
            d = Date::parse(fecha);
        } catch (const std::exception& e) {
            out.issues.push_back({record_no, e.what()});
            continue;
        }
        detail::DatedRow pr{d, {}, {}, record_no};
        for (std::size_t i = 0; i < nums.size(); ++i) {
            std::string raw = field(nums[i]);
            if (raw.empty()) {
                pr.nums.push_back(missing_value);
                continue;
            }
            auto v = csv::parse_number(raw);
            if (!v) {
                out.issues.push_back({record_no, nums[i] + " not numeric: '" + raw + "'"});
                pr.nums.push_back(missing_value);
            } else {
                pr.nums.push_back(*v);
            }
        }
        for (const auto& t : texts) pr.texts.push_back(field(t));
        parsed.push_back(std::move(pr));
    }
    detail::sort_and_check_dates(parsed);

    out.frame.frequency = Frequency::daily;
    out.frame.names = nums;
    out.frame.columns.assign(nums.size(), {});
    for (const auto& t : texts) out.frame.text[t] = {};
    for (const auto& p : parsed) {
        out.frame.dates.push_back(p.date);
        for (std::size_t i = 0; i < nums.size(); ++i) out.frame.columns[i].push_back(p.nums[i]);
        for (std::size_t i = 0; i < texts.size(); ++i) out.frame.text[texts[i]].push_back(p.texts[i]);
    }
    out.frame.check();
    return out;
}

/// Inner join of two daily frames on date.
inline TimeSeriesFrame join_on_date(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
    TimeSeriesFrame out;
    out.frequency = a.frequency;
    out.names = a.names;
    for (const auto& n : b.names)
        out.names.push_back(n);
    out.columns.assign(out.names.size(), {});
    std::size_t ia = 0, ib = 0;
    while (ia < a.rows() && ib < b.rows()) {
        if (a.dates[ia] < b.dates[ib]) { ++ia; continue; }
        if (b.dates[ib] < a.dates[ia]) { ++ib; continue; }
        out.dates.push_back(a.dates[ia]);
        std::size_t c = 0;
        for (const auto& col : a.columns) out.columns[c++].push_back(col[ia]);
        for (const auto& col : b.columns) out.columns[c++].push_back(col[ib]);
        ++ia;
        ++ib;
    }
    out.check();
    return out;
}

}  // namespace watertwin::data
