#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "watertwin/additive.hpp"
#include "watertwin/metrics.hpp"
#include "watertwin/rng.hpp"

using namespace watertwin;
using namespace watertwin::models;
using data::TimeSeriesFrame;

namespace {

TimeSeriesFrame frame_from(std::function<double(int)> gen, int n,
                           Date start = Date::parse("2021-01-01")) {
    TimeSeriesFrame f;
    f.frequency = data::Frequency::daily;
    std::vector<double> y;
    for (int i = 0; i < n; ++i) {
        f.dates.push_back(start.plus_days(i));
        y.push_back(gen(i));
    }
    f.add_column("consumption_m3", y);
    return f;
}

AdditiveSpec weekly_only_spec() {
    AdditiveSpec spec;
    spec.changepoint_count = 0;
    spec.seasonalities = {{"weekly", 7.0, 1}};
    return spec;
}

}  // namespace

TEST_CASE("additive fit reproduces a noiseless trend plus weekly cycle") {
    auto truth = [](int t) {
        return 50.0 + 0.01 * t + 3.0 * std::sin(2 * M_PI * t / 7.0) + 1.5 * std::cos(2 * M_PI * t / 7.0);
    };
    auto f = frame_from(truth, 140);
    AdditiveModel m(weekly_only_spec());
    m.train(f);

    auto yhat = m.predict(f, 0, f.rows());
    for (std::size_t i = 0; i < f.rows(); ++i)
        CHECK_THAT(yhat[i], Catch::Matchers::WithinAbs(truth(static_cast<int>(i)), 1e-6));

    auto names = m.coefficient_names();
    auto theta = m.coefficients();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "weekly_sin1") CHECK_THAT(theta[i], Catch::Matchers::WithinAbs(3.0, 1e-6));
        if (names[i] == "weekly_cos1") CHECK_THAT(theta[i], Catch::Matchers::WithinAbs(1.5, 1e-6));
    }
}

TEST_CASE("additive fit recovers seasonal amplitude within five percent under noise") {
    Rng rng(101);
    auto f = frame_from(
        [&](int t) { return 100.0 + 8.0 * std::sin(2 * M_PI * t / 7.0) + rng.normal(0, 1.0); }, 364);
    AdditiveModel m(weekly_only_spec());
    m.train(f);

    auto names = m.coefficient_names();
    auto theta = m.coefficients();
    double sin_amp = 0, cos_amp = 0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "weekly_sin1") sin_amp = theta[i];
        if (names[i] == "weekly_cos1") cos_amp = theta[i];
    }
    double amp = std::sqrt(sin_amp * sin_amp + cos_amp * cos_amp);
    CHECK_THAT(amp, Catch::Matchers::WithinRel(8.0, 0.05));
}

TEST_CASE("additive fit is optimal within its own basis") {
    Rng rng(103);
    auto truth = [](int t) { return 20.0 + 0.05 * t + 2.0 * std::cos(2 * M_PI * t / 7.0); };
    auto f = frame_from([&](int t) { return truth(t) + rng.normal(0, 2.0); }, 200);
    AdditiveModel m(weekly_only_spec());
    m.train(f);

    // the generator lives inside the basis, so the fit cannot lose to it
    const auto& y = f.column("consumption_m3");
    double truth_sse = 0;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        double d = y[i] - truth(static_cast<int>(i));
        truth_sse += d * d;
    }
    CHECK(m.training_sse() <= truth_sse + 1e-9);
}

TEST_CASE("an all-zero target forecasts identically zero") {
    auto f = frame_from([](int) { return 0.0; }, 60);
    AdditiveModel m(weekly_only_spec());
    m.train(f);
    for (double v : m.predict(f, 0, f.rows()))
        CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("changepoint hinges track a broken linear trend") {
    auto f = frame_from([](int t) { return t < 50 ? 10.0 + 1.0 * t : 60.0 - 1.0 * (t - 50); }, 100);
    AdditiveSpec spec;
    spec.changepoint_count = 9;
    spec.changepoint_range = 0.9;
    spec.seasonalities.clear();
    AdditiveModel m(spec);
    m.train(f);
    auto yhat = m.predict(f, 0, f.rows());
    const auto& y = f.column("consumption_m3");
    CHECK(eval::mae(std::vector<double>(y.begin(), y.end()), yhat) < 0.5);
}

TEST_CASE("adding columns never hurts the training fit") {
    Rng rng(107);
    auto f = frame_from(
        [&](int t) {
            return 90.0 + 0.02 * t + 6.0 * std::sin(2 * M_PI * t / 365.25) +
                   2.0 * std::sin(2 * M_PI * t / 7.0) + rng.normal(0, 3.0);
        },
        730);
    std::vector<double> tmax;
    for (int t = 0; t < 730; ++t) tmax.push_back(20.0 + 8.0 * std::sin(2 * M_PI * t / 365.25));
    f.add_column("tmax", tmax);

    auto variants = additive_variants();
    AdditiveModel basic(variants[0]), seasonal(variants[1]), advanced(variants[2]);
    basic.train(f);
    seasonal.train(f);
    advanced.train(f);
    CHECK(seasonal.training_sse() <= basic.training_sse() + 1e-6);
    CHECK(advanced.training_sse() <= seasonal.training_sse() + 1e-6);
}

TEST_CASE("holiday indicator fires only on configured dates") {
    AdditiveSpec spec = weekly_only_spec();
    spec.holiday_rule = HolidayRule::spanish_fixed;
    spec.extra_holidays = {Date::parse("2021-03-19")};
    AdditiveModel m(spec);
    CHECK(m.is_holiday(Date::parse("2021-01-01")));
    CHECK(m.is_holiday(Date::parse("2022-12-25")));
    CHECK(m.is_holiday(Date::parse("2021-03-19")));
    CHECK_FALSE(m.is_holiday(Date::parse("2021-03-20")));
    CHECK_FALSE(m.is_holiday(Date::parse("2021-07-13")));

    AdditiveModel none(weekly_only_spec());
    CHECK_FALSE(none.is_holiday(Date::parse("2021-01-01")));
}

TEST_CASE("holiday column absorbs uplift that plain seasonality cannot") {
    Rng rng(109);
    auto base = [&](int t) { return 100.0 + 2.0 * std::sin(2 * M_PI * t / 7.0); };
    auto f = frame_from(base, 730);
    {
        auto& y = f.column("consumption_m3");
        for (std::size_t i = 0; i < f.rows(); ++i) {
            Date d = f.dates[i];
            for (auto [mo, da] : spanish_fixed_holidays())
                if (d.month() == mo && d.day() == da) y[i] += 25.0;
            y[i] += rng.normal(0, 1.0);
        }
    }
    AdditiveSpec with_h = weekly_only_spec();
    with_h.holiday_rule = HolidayRule::spanish_fixed;
    AdditiveModel holidays(with_h), plain(weekly_only_spec());
    holidays.train(f);
    plain.train(f);
    CHECK(holidays.training_sse() < 0.25 * plain.training_sse());

    auto names = holidays.coefficient_names();
    auto theta = holidays.coefficients();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == "holiday") CHECK_THAT(theta[i], Catch::Matchers::WithinAbs(25.0, 1.5));
}

TEST_CASE("multiplicative seasonality scales the cycle with the trend") {
    auto truth = [](int t) {
        double g = 100.0 + 0.5 * t;
        return g * (1.0 + 0.2 * std::sin(2 * M_PI * t / 7.0));
    };
    auto f = frame_from(truth, 280);

    AdditiveSpec mult = weekly_only_spec();
    mult.multiplicative_seasonality = true;
    AdditiveModel m_mult(mult), m_add(weekly_only_spec());
    m_mult.train(f);
    m_add.train(f);

    CHECK(m_mult.training_sse() < 0.05 * m_add.training_sse());

    // late-window amplitude is roughly double the early one; the
    // multiplicative fit must track it closely out of sample too
    auto yhat = m_mult.predict(f, 200, 280);
    const auto& y = f.column("consumption_m3");
    for (std::size_t i = 0; i < yhat.size(); ++i)
        CHECK_THAT(yhat[i], Catch::Matchers::WithinRel(y[200 + i], 0.03));
}

TEST_CASE("engineered features extend the variant family") {
    Rng rng(113);
    auto f = frame_from(
        [&](int t) { return 80.0 + 4.0 * std::sin(2 * M_PI * t / 7.0) + rng.normal(0, 2.0); }, 400);
    std::vector<double> tmax;
    for (int t = 0; t < 400; ++t) tmax.push_back(18.0 + 6.0 * std::sin(2 * M_PI * t / 365.25));
    f.add_column("tmax", tmax);

    auto specs = additive_variants();
    REQUIRE(specs.size() == 4);
    CHECK(specs[0].variant_name == "additive_basic");
    CHECK(specs[3].variant_name == "additive_adv_fe");
    CHECK(specs[3].engineered_features);
    CHECK_FALSE(specs[0].engineered_features);

    AdditiveModel adv_fe(specs[3]);
    adv_fe.train(f);
    auto yhat = adv_fe.predict(f, 390, 400);
    CHECK(yhat.size() == 10);
    // the first rows lack lag history, so prediction there must refuse
    CHECK_THROWS_AS(adv_fe.predict(f, 0, 5), std::invalid_argument);
}

TEST_CASE("rank deficiency without ridge names the collinear columns") {
    auto f = frame_from([](int t) { return 50.0 + t; }, 60);
    std::vector<double> tmax, tmax2;
    for (int t = 0; t < 60; ++t) {
        tmax.push_back(10.0 + 0.1 * t);
        tmax2.push_back(20.0 + 0.2 * t);  // exactly collinear direction after scaling
    }
    f.add_column("tmax", tmax);
    f.add_column("tmax_dup", tmax2);

    AdditiveSpec spec = weekly_only_spec();
    spec.ridge = 0.0;
    spec.regressors = {"tmax", "tmax_dup"};
    AdditiveModel m(spec);
    CHECK_THROWS_WITH(m.train(f), Catch::Matchers::ContainsSubstring("tmax~tmax_dup"));

    spec.ridge = 1e-8;  // ridge rescues the same design
    AdditiveModel rescued(spec);
    CHECK_NOTHROW(rescued.train(f));
}

TEST_CASE("additive training is deterministic and guards misuse") {
    Rng rng(127);
    auto f = frame_from([&](int t) { return 60.0 + rng.normal(0, 1.0) + 0.1 * t; }, 90);
    AdditiveModel a(weekly_only_spec()), b(weekly_only_spec());
    a.train(f);
    b.train(f);
    CHECK(a.coefficients() == b.coefficients());

    AdditiveModel untrained(weekly_only_spec());
    CHECK_THROWS_AS(untrained.predict(f, 0, 5), std::logic_error);
    CHECK_THROWS_AS(untrained.train(frame_from([](int) { return 1.0; }, 2)), std::invalid_argument);
    CHECK_THROWS_AS(AdditiveModel(AdditiveSpec{.changepoint_count = -1}), std::invalid_argument);
}
