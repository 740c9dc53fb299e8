#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "watertwin/correlation.hpp"
#include "watertwin/ingest.hpp"
#include "watertwin/rng.hpp"
#include "watertwin/scaling.hpp"
#include "watertwin/transform.hpp"

using namespace watertwin;
using namespace watertwin::data;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

// Reference route for the correlation tests: raw accumulator form
// n*Sxy - Sx*Sy over sqrt(n*Sxx - Sx^2) * sqrt(n*Syy - Sy^2).
double pearson_raw_sums(const std::vector<double>& x, const std::vector<double>& y) {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        n += 1;
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

TimeSeriesFrame daily_frame(Date start, std::vector<std::pair<std::string, std::vector<double>>> cols) {
    TimeSeriesFrame f;
    f.frequency = Frequency::daily;
    std::size_t n = cols.front().second.size();
    for (std::size_t i = 0; i < n; ++i) f.dates.push_back(start.plus_days(static_cast<int>(i)));
    for (auto& [name, values] : cols) f.add_column(name, std::move(values));
    f.check();
    return f;
}

}  // namespace

TEST_CASE("dates parse, format and expose weekday structure") {
    Date d = Date::parse("2024-01-01");
    CHECK(d.to_string() == "2024-01-01");
    CHECK(d.day_of_week() == 0);  // a Monday
    CHECK_FALSE(d.is_weekend());
    CHECK(d.plus_days(5).day_of_week() == 5);
    CHECK(d.plus_days(5).is_weekend());
    CHECK(d.plus_days(31).to_string() == "2024-02-01");
    CHECK(Date::parse("2021-01-28").week_start().to_string() == "2021-01-25");
    CHECK(Date::parse("2021-01-28").month_start().to_string() == "2021-01-01");
    CHECK(Date::parse("2024-03-05") - Date::parse("2024-02-28") == 6);  // leap year

    CHECK_THROWS_AS(Date::parse("2024-13-01"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2023-02-29"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("01/02/2024"), std::invalid_argument);
}

TEST_CASE("consumption csv ingest sorts, validates and reports bad rows") {
    auto path = write_temp("wt_cons.csv",
                           "Date,Consumption_m3\n"
                           "2023-01-03,120.5\n"
                           "2023-01-01,100\n"
                           "2023-01-02,110,extra\n"
                           "2023-01-04,-5\n"
                           "not-a-date,50\n"
                           "2023-01-05,abc\n");
    auto result = load_consumption_csv(path);
    REQUIRE(result.frame.rows() == 3);
    CHECK(result.frame.dates.front().to_string() == "2023-01-01");
    CHECK(result.frame.dates.back().to_string() == "2023-01-03");
    CHECK(result.frame.column("consumption_m3") == std::vector<double>{100, 110, 120.5});

    REQUIRE(result.issues.size() == 3);
    CHECK(result.issues[0].line_no == 5);  // negative value
    CHECK(result.issues[1].line_no == 6);  // bad date
    CHECK(result.issues[2].line_no == 7);  // non-numeric
}

TEST_CASE("consumption csv ingest fails on duplicate dates naming them") {
    auto path = write_temp("wt_cons_dup.csv",
                           "date,consumption_m3\n"
                           "2023-01-01,100\n"
                           "2023-01-02,101\n"
                           "2023-01-01,102\n");
    CHECK_THROWS_WITH(load_consumption_csv(path), Catch::Matchers::ContainsSubstring("2023-01-01"));
}

TEST_CASE("consumption csv ingest requires the expected header") {
    auto path = write_temp("wt_cons_hdr.csv", "day,volume\n2023-01-01,100\n");
    CHECK_THROWS_WITH(load_consumption_csv(path), Catch::Matchers::ContainsSubstring("consumption_m3"));
}

namespace {
const char* kMeteoCsv =
    "FECHA,TMED,PREC,TMIN,HORATMIN,TMAX,HORATMAX,DIR,VELMEDIA,RACHA,HORARACHA,SOL,PRESMAX,HORAPRESMAX,PRESMIN,HORAPRESMIN\n"
    "2023-07-02,\"24,5\",\"0,0\",\"18,1\",06:10,\"31,2\",15:40,18,\"2,8\",\"9,4\",13:20,\"11,2\",\"1018,4\",09:00,\"1014,2\",16:00\n"
    "2023-07-01,\"23,0\",Ip,\"17,5\",05:50,\"30,0\",15:10,20,\"3,1\",\"8,9\",14:00,\"10,8\",\"1019,0\",10:00,\"1015,1\",17:00\n"
    "2023-07-03,,\"1,2\",\"19,0\",06:30,\"29,4\",14:50,22,\"2,2\",\"7,7\",12:40,\"9,9\",\"1017,2\",09:30,\"1013,8\",15:30\n";
}

TEST_CASE("meteo csv ingest handles the full station schema") {
    auto path = write_temp("wt_meteo.csv", kMeteoCsv);
    auto result = load_meteo_csv(path);
    const auto& f = result.frame;

    REQUIRE(f.rows() == 3);
    CHECK(f.dates.front().to_string() == "2023-07-01");  // sorted
    CHECK(f.column("tmax") == std::vector<double>{30.0, 31.2, 29.4});
    CHECK(f.column("tmed")[0] == 23.0);
    CHECK(is_missing(f.column("tmed")[2]));            // empty cell
    CHECK(is_missing(f.column("prec")[0]));            // "Ip" is not numeric
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].message.find("prec") != std::string::npos);

    REQUIRE(f.text.count("horatmax") == 1);
    CHECK(f.text.at("horatmax")[0] == "15:10");
    CHECK(f.column("presMax")[1] == 1018.4);
}

TEST_CASE("meteo csv ingest requires fecha and tmax") {
    auto path = write_temp("wt_meteo_bad.csv", "fecha,tmed\n2023-07-01,20\n");
    CHECK_THROWS_WITH(load_meteo_csv(path), Catch::Matchers::ContainsSubstring("tmax"));
    auto path2 = write_temp("wt_meteo_bad2.csv", "dia,tmax\n2023-07-01,20\n");
    CHECK_THROWS_WITH(load_meteo_csv(path2), Catch::Matchers::ContainsSubstring("fecha"));
}

TEST_CASE("meteo json adapter yields the same frame shape as the csv path") {
    auto csv_path = write_temp("wt_meteo2.csv", kMeteoCsv);
    auto json_path = write_temp(
        "wt_meteo.json",
        R"([{"fecha":"2023-07-01","tmed":"23,0","prec":"Ip","tmin":"17,5","horatmin":"05:50",
             "tmax":"30,0","horatmax":"15:10","dir":"20","velmedia":"3,1","racha":"8,9",
             "horaracha":"14:00","sol":"10,8","presMax":"1019,0","horaPresMax":"10:00",
             "presMin":"1015,1","horaPresMin":"17:00"},
            {"fecha":"2023-07-02","tmed":"24,5","prec":"0,0","tmin":"18,1","horatmin":"06:10",
             "tmax":"31,2","horatmax":"15:40","dir":"18","velmedia":"2,8","racha":"9,4",
             "horaracha":"13:20","sol":"11,2","presMax":"1018,4","horaPresMax":"09:00",
             "presMin":"1014,2","horaPresMin":"16:00"},
            {"fecha":"2023-07-03","prec":"1,2","tmin":"19,0","horatmin":"06:30",
             "tmax":"29,4","horatmax":"14:50","dir":"22","velmedia":"2,2","racha":"7,7",
             "horaracha":"12:40","sol":"9,9","presMax":"1017,2","horaPresMax":"09:30",
             "presMin":"1013,8","horaPresMin":"15:30"}])");
    auto from_csv = load_meteo_csv(csv_path).frame;
    auto from_json = load_meteo_json(json_path).frame;

    REQUIRE(from_json.names == from_csv.names);
    REQUIRE(from_json.rows() == from_csv.rows());
    for (std::size_t i = 0; i < from_csv.rows(); ++i) {
        CHECK(from_json.dates[i] == from_csv.dates[i]);
        for (std::size_t c = 0; c < from_csv.columns.size(); ++c) {
            if (is_missing(from_csv.columns[c][i]))
                CHECK(is_missing(from_json.columns[c][i]));
            else
                CHECK(from_json.columns[c][i] == from_csv.columns[c][i]);
        }
    }
    CHECK(from_json.text.at("horatmax") == from_csv.text.at("horatmax"));
}

TEST_CASE("aggregation reproduces the spreadsheet fixture") {
    auto f = daily_frame(Date::parse("2021-01-28"),
                         {{"consumption_m3", {100, 110, 90, 120, 130, 95, 105, 115}},
                          {"tmax", {10, 12, 11, 9, 15, 14, 8, 13}},
                          {"tmin", {2, 1, 3, 0, 5, 4, -1, 2}},
                          {"tmed", {6, missing_value, 7, 4.5, 10, 9, missing_value, 7.5}}});

    auto monthly = aggregate(f, Frequency::monthly);
    REQUIRE(monthly.rows() == 2);
    CHECK(monthly.dates[0].to_string() == "2021-01-01");
    CHECK(monthly.dates[1].to_string() == "2021-02-01");
    CHECK(monthly.column("consumption_m3") == std::vector<double>{420, 445});
    CHECK(monthly.column("tmax") == std::vector<double>{12, 15});
    CHECK(monthly.column("tmin") == std::vector<double>{0, -1});
    CHECK_THAT(monthly.column("tmed")[0], Catch::Matchers::WithinAbs(5.833333333333, 1e-9));
    CHECK_THAT(monthly.column("tmed")[1], Catch::Matchers::WithinAbs(8.833333333333, 1e-9));

    auto weekly = aggregate(f, Frequency::weekly);
    REQUIRE(weekly.rows() == 2);
    CHECK(weekly.dates[0].to_string() == "2021-01-25");
    CHECK(weekly.dates[1].to_string() == "2021-02-01");
    CHECK(weekly.column("consumption_m3") == std::vector<double>{420, 445});
}

TEST_CASE("aggregation conserves totals and respects missing buckets") {
    Rng rng(7);
    std::vector<double> cons;
    for (int i = 0; i < 35; ++i) cons.push_back(std::floor(rng.uniform(50, 150)));
    auto f = daily_frame(Date::parse("2022-03-07"), {{"consumption_m3", cons}});
    auto weekly = aggregate(f, Frequency::weekly);

    double total = 0;
    for (double v : cons) total += v;
    double weekly_total = 0;
    for (double v : weekly.column("consumption_m3")) weekly_total += v;
    CHECK_THAT(weekly_total, Catch::Matchers::WithinAbs(total, 1e-9));
    CHECK(weekly.rows() == 5);

    auto g = daily_frame(Date::parse("2022-03-07"),
                         {{"tmed", {missing_value, missing_value, missing_value, 4, 5, 6, 7}}});
    auto wk = aggregate(g, Frequency::weekly);
    REQUIRE(wk.rows() == 1);
    CHECK_THAT(wk.column("tmed")[0], Catch::Matchers::WithinAbs(5.5, 1e-12));

    auto h = daily_frame(Date::parse("2022-03-07"), {{"tmed", {missing_value, missing_value}}});
    CHECK(is_missing(aggregate(h, Frequency::weekly).column("tmed")[0]));
}

TEST_CASE("aggregation rejects coarser-to-finer requests and identity copies") {
    auto f = daily_frame(Date::parse("2022-01-01"), {{"consumption_m3", {1, 2, 3}}});
    auto monthly = aggregate(f, Frequency::monthly);
    CHECK_THROWS_AS(aggregate(monthly, Frequency::daily), std::invalid_argument);
    CHECK_THROWS_AS(aggregate(monthly, Frequency::weekly), std::invalid_argument);
    auto same = aggregate(f, Frequency::daily);
    CHECK(same.rows() == f.rows());
    CHECK(same.column("consumption_m3") == f.column("consumption_m3"));
}

TEST_CASE("forward fill carries values but leaves leading gaps") {
    auto f = daily_frame(Date::parse("2022-01-01"),
                         {{"tmed", {missing_value, missing_value, 5, missing_value, missing_value, 8, missing_value}}});
    std::size_t filled = forward_fill(f, "tmed");
    CHECK(filled == 3);
    CHECK(is_missing(f.column("tmed")[0]));
    CHECK(is_missing(f.column("tmed")[1]));
    CHECK(f.column("tmed")[3] == 5);
    CHECK(f.column("tmed")[4] == 5);
    CHECK(f.column("tmed")[6] == 8);
}

TEST_CASE("chronological split by fraction and by date") {
    std::vector<double> v(10);
    for (int i = 0; i < 10; ++i) v[i] = i;
    auto f = daily_frame(Date::parse("2022-01-01"), {{"consumption_m3", v}});

    auto s = train_test_split(f, 0.8);
    CHECK(s.train.rows() == 8);
    CHECK(s.test.rows() == 2);
    CHECK(s.train.dates.back() < s.test.dates.front());
    CHECK(s.test.column("consumption_m3") == std::vector<double>{8, 9});

    auto by_date = train_test_split(f, Date::parse("2022-01-04"));
    CHECK(by_date.train.rows() == 3);                                // strictly before
    CHECK(by_date.test.dates.front().to_string() == "2022-01-04");  // on-or-after

    CHECK_THROWS_AS(train_test_split(f, Date::parse("2021-12-01")), std::invalid_argument);
    CHECK_THROWS_AS(train_test_split(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(train_test_split(f, 1.0), std::invalid_argument);
}

TEST_CASE("min-max scaling maps observed range onto the unit interval") {
    std::vector<double> xs = {0, 5, 10};
    auto p = fit_minmax(xs);
    CHECK(apply_scale(p, xs) == std::vector<double>{0, 0.5, 1});
    auto round = apply_unscale(p, apply_scale(p, xs));
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK_THAT(round[i], Catch::Matchers::WithinAbs(xs[i], 1e-12));

    auto p2 = fit_minmax({missing_value, 2, 4, missing_value});
    CHECK(p2.lo == 2);
    CHECK(p2.hi == 4);

    CHECK_THROWS_AS(fit_minmax({3, 3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(fit_minmax({missing_value}), std::invalid_argument);
}

TEST_CASE("z-score uses the population standard deviation") {
    auto p = fit_zscore({-1, 0, 1});
    auto z = apply_scale(p, {-1, 0, 1});
    CHECK_THAT(z[0], Catch::Matchers::WithinAbs(-1.224744871392, 1e-10));
    CHECK_THAT(z[1], Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(z[2], Catch::Matchers::WithinAbs(1.224744871392, 1e-10));
    CHECK_THROWS_AS(fit_zscore({2, 2}), std::invalid_argument);
}

TEST_CASE("pearson correlation matches the raw-sums route") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = {2, 1, 4, 3, 5};
    CHECK_THAT(pearson_r(x, y), Catch::Matchers::WithinAbs(0.8, 1e-12));
    CHECK_THAT(pearson_r(x, y), Catch::Matchers::WithinAbs(pearson_raw_sums(x, y), 1e-12));

    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> a, b;
        int n = rng.uniform_int(5, 60);
        for (int i = 0; i < n; ++i) {
            a.push_back(rng.normal(0, 3));
            b.push_back(0.4 * a.back() + rng.normal(0, 2));
        }
        double r = pearson_r(a, b);
        CHECK(std::fabs(r) <= 1.0);
        CHECK_THAT(r, Catch::Matchers::WithinAbs(pearson_raw_sums(a, b), 1e-10));
    }
}

TEST_CASE("pearson correlation is symmetric and affine invariant") {
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> a, b;
        for (int i = 0; i < 40; ++i) {
            a.push_back(rng.uniform(-5, 5));
            b.push_back(rng.uniform(-5, 5));
        }
        double r = pearson_r(a, b);
        CHECK_THAT(pearson_r(b, a), Catch::Matchers::WithinAbs(r, 1e-14));

        double alpha = rng.uniform(0.1, 4), beta = rng.uniform(-10, 10);
        double gamma = rng.uniform(0.1, 4), delta = rng.uniform(-10, 10);
        if (rep % 2 == 0) alpha = -alpha;
        std::vector<double> ax, gy;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ax.push_back(alpha * a[i] + beta);
            gy.push_back(gamma * b[i] + delta);
        }
        double sign = alpha * gamma > 0 ? 1.0 : -1.0;
        CHECK_THAT(pearson_r(ax, gy), Catch::Matchers::WithinAbs(sign * r, 1e-12));
    }
}

TEST_CASE("pearson correlation drops incomplete pairs") {
    std::vector<double> x = {1, 2, missing_value, 4, 5, 6};
    std::vector<double> y = {2, 1, 10, missing_value, 5, 7};
    // complete pairs: rows 0, 1, 4, 5
    double expected = pearson_r({1, 2, 5, 6}, {2, 1, 5, 7});
    CHECK_THAT(pearson_r(x, y), Catch::Matchers::WithinAbs(expected, 1e-14));

    CHECK_THROWS_AS(pearson_r({1, missing_value, 3}, {missing_value, 2, missing_value}),
                    std::invalid_argument);
    CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("correlation screen orders columns by absolute strength") {
    Rng rng(17);
    TimeSeriesFrame f;
    f.frequency = Frequency::daily;
    std::vector<double> target, strong, weak, inverse, flat;
    for (int i = 0; i < 300; ++i) {
        f.dates.push_back(Date::parse("2020-01-01").plus_days(i));
        double t = rng.normal(100, 10);
        target.push_back(t);
        strong.push_back(0.9 * t + rng.normal(0, 2));
        weak.push_back(0.05 * t + rng.normal(0, 10));
        inverse.push_back(-0.6 * t + rng.normal(0, 4));
        flat.push_back(42.0);
    }
    f.add_column("consumption_m3", target);
    f.add_column("strong", strong);
    f.add_column("weak", weak);
    f.add_column("inverse", inverse);
    f.add_column("flat", flat);

    auto entries = correlate_against(f, "consumption_m3");
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].column == "strong");
    CHECK(entries[1].column == "inverse");
    CHECK(entries[1].r < 0);
    CHECK(entries[2].column == "weak");
    CHECK(entries[3].column == "flat");  // undefined sorts last, with a note
    CHECK(is_missing(entries[3].r));
    CHECK_FALSE(entries[3].note.empty());

    auto m = correlation_matrix(f, {"consumption_m3", "strong", "flat"});
    CHECK(m.r[0][0] == 1.0);
    CHECK_THAT(m.r[0][1], Catch::Matchers::WithinAbs(m.r[1][0], 1e-15));
    CHECK(is_missing(m.r[0][2]));
    REQUIRE_FALSE(m.failures.empty());
}

TEST_CASE("frame lookups fail loudly with the available names") {
    auto f = daily_frame(Date::parse("2022-01-01"), {{"consumption_m3", {1, 2}}});
    CHECK_THROWS_WITH(f.column("tmax"), Catch::Matchers::ContainsSubstring("consumption_m3"));
    CHECK_THROWS_AS(f.add_column("consumption_m3", {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(f.add_column("short", {1}), std::invalid_argument);
}
