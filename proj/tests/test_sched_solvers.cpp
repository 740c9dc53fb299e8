#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "sched_fixtures.hpp"
#include "watertwin/rng.hpp"
#include "watertwin/sched/compare.hpp"
#include "watertwin/sched/solvers.hpp"

using namespace watertwin;
using sched::SchedulingInstance;
using sched::ticks_from_hours;

namespace {

// one long routine job and one co-located emergency: interrupting the long
// job at the emergency's arrival is strictly cheaper than any fixed order
SchedulingInstance interrupt_pays_off() {
    SchedulingInstance inst;
    inst.day_start = ticks_from_hours(8.0);
    inst.day_end = ticks_from_hours(22.0);
    inst.vehicles = {{"van", 12.0, 2.64}};
    sched::TaskSpec a;
    a.id = 1;
    a.label = "trunk main relining";
    a.processing = ticks_from_hours(4.0);
    a.priority = 1;
    a.max_segments = 2;
    sched::TaskSpec b;
    b.id = 2;
    b.label = "contamination alarm";
    b.processing = ticks_from_hours(1.0);
    b.release = ticks_from_hours(1.0);
    b.priority = 5;
    b.emergency = true;
    inst.tasks = {a, b};
    inst.travel_time = {{0, 0}, {0, 0}};  // same street corner
    inst.travel_km = {{0.0, 0.0}, {0.0, 0.0}};
    return inst;
}

// nine identical-priority stops: ordering is pure routing, so the search
// tree is wide and bounds are weak; good for exercising the time budget
SchedulingInstance nine_stop_tour() {
    SchedulingInstance inst;
    inst.day_start = ticks_from_hours(8.0);
    inst.day_end = ticks_from_hours(38.0);
    inst.vehicles = {{"van", 12.0, 2.64}};
    Rng rng(99);
    for (int i = 0; i < 9; ++i) {
        sched::TaskSpec t;
        t.id = i + 1;
        t.label = "stop_" + std::to_string(t.id);
        t.processing = ticks_from_hours(1.0);
        inst.tasks.push_back(t);
    }
    inst.travel_time.assign(9, std::vector<sched::ticks>(9, 0));
    inst.travel_km.assign(9, std::vector<double>(9, 0.0));
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = i + 1; j < 9; ++j) {
            double km = rng.uniform(5.0, 15.0);
            inst.travel_km[i][j] = inst.travel_km[j][i] = km;
            inst.travel_time[i][j] = inst.travel_time[j][i] = ticks_from_hours(km / 40.0);
        }
    return inst;
}

}  // namespace

TEST_CASE("dispatcher heuristic reproduces the hand-worked day") {
    auto inst = fixtures::five_task_day();
    auto out = sched::solve_baseline(inst);
    REQUIRE(out.solution.has_value());
    const auto& sol = *out.solution;

    // highest released priority first, no interruptions, idle when blocked
    CHECK(sched::visit_sequence(inst, sol) == std::vector<int>{2, 5, 4, 1, 3});
    CHECK(sol.breakdown.z == Catch::Approx(135.126667).margin(1e-6));
    CHECK(sol.breakdown.makespan_h == Catch::Approx(12.4).margin(1e-9));
    CHECK(sol.breakdown.fuel_l == Catch::Approx(29.666667).margin(1e-6));
    CHECK(sol.breakdown.co2_kg == Catch::Approx(78.46).margin(1e-6));
    CHECK(sol.breakdown.delay_emergency_h == Catch::Approx(14.6).margin(1e-9));
    CHECK(sched::validate(inst, sol).empty());
    CHECK_FALSE(out.optimal);
    CHECK(out.infeasible_reason.empty());
}

TEST_CASE("exact solver finds the cheaper plan the heuristic misses") {
    auto inst = fixtures::five_task_day();
    auto out = sched::solve_exact(inst);
    REQUIRE(out.solution.has_value());
    const auto& sol = *out.solution;

    CHECK(out.optimal);
    CHECK(out.nodes > 0);
    CHECK(sched::visit_sequence(inst, sol) == std::vector<int>{1, 5, 3, 2, 4});
    CHECK(sol.breakdown.z == Catch::Approx(127.96).margin(1e-6));
    CHECK(sol.breakdown.makespan_h == Catch::Approx(12.0).margin(1e-9));
    CHECK(sol.breakdown.fuel_l == Catch::Approx(28.75).margin(1e-6));
    CHECK(sol.breakdown.co2_kg == Catch::Approx(76.01).margin(1e-6));
    CHECK(sol.breakdown.delay_emergency_h == Catch::Approx(11.2).margin(1e-9));
    CHECK(sol.breakdown.efficiency_pct == Catch::Approx(1000.0 / 12.0).margin(1e-6));
    CHECK(sched::validate(inst, sol).empty());

    auto base = sched::solve_baseline(inst);
    CHECK(sol.breakdown.z <= base.solution->breakdown.z + 1e-9);
}

TEST_CASE("exhaustive enumeration agrees with the exact solver") {
    auto inst = fixtures::five_task_day();
    auto brute = sched::brute_force(inst);
    auto exact = sched::solve_exact(inst);
    REQUIRE(brute.solution.has_value());
    CHECK(brute.optimal);
    CHECK(brute.solution->breakdown.z == Catch::Approx(exact.solution->breakdown.z).margin(1e-9));
    CHECK(sched::validate(inst, *brute.solution).empty());
}

TEST_CASE("interrupting a job for an emergency can beat every fixed order") {
    auto inst = interrupt_pays_off();

    auto base = sched::solve_baseline(inst);   // starts the long job, never stops
    auto brute = sched::brute_force(inst);     // best order without interruptions
    auto exact = sched::solve_exact(inst);     // may split the long job

    REQUIRE(base.solution.has_value());
    REQUIRE(brute.solution.has_value());
    REQUIRE(exact.solution.has_value());
    CHECK(base.solution->breakdown.z == Catch::Approx(9.0).margin(1e-9));
    CHECK(brute.solution->breakdown.z == Catch::Approx(7.0).margin(1e-9));
    CHECK(exact.solution->breakdown.z == Catch::Approx(6.0).margin(1e-9));
    CHECK(exact.optimal);

    const auto& sol = *exact.solution;
    REQUIRE(sol.segments.size() == 3);  // job, emergency, job again
    CHECK(sched::visit_sequence(inst, sol) == std::vector<int>{1, 2});
    CHECK(sched::validate(inst, sol).empty());

    auto j = sched::solution_to_json(inst, sol);
    CHECK(j.at("tasks")[0].at("preempted") == true);
}

TEST_CASE("exact matches enumeration across random uninterruptible days") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        sched::InstanceRecipe recipe;
        recipe.n_tasks = 3 + static_cast<int>(seed % 2);
        recipe.max_segments = 1;  // keep both solvers in the same move space
        recipe.dependency_rate = 0.2;
        auto inst = sched::random_instance(seed, recipe);

        auto brute = sched::brute_force(inst);
        auto exact = sched::solve_exact(inst, 30000);
        REQUIRE(brute.solution.has_value() == exact.solution.has_value());
        if (!brute.solution) continue;
        ++checked;

        INFO("seed " << seed);
        CHECK(exact.optimal);
        CHECK(exact.solution->breakdown.z ==
              Catch::Approx(brute.solution->breakdown.z).margin(1e-6));
        CHECK(sched::validate(inst, *exact.solution).empty());
        CHECK(sched::validate(inst, *brute.solution).empty());
        CHECK(exact.solution->breakdown.efficiency_pct > 0.0);
        CHECK(exact.solution->breakdown.efficiency_pct <= 100.0 + 1e-9);

        auto base = sched::solve_baseline(inst);
        REQUIRE(base.solution.has_value());
        CHECK(exact.solution->breakdown.z <= base.solution->breakdown.z + 1e-9);
    }
    CHECK(checked >= 50);  // the generator rarely draws an impossible day
}

TEST_CASE("raising a cost weight never lowers the optimal objective") {
    auto inst = fixtures::five_task_day();
    double z0 = sched::solve_exact(inst).solution->breakdown.z;

    auto heavier_fuel = inst;
    heavier_fuel.w_fuel = 2.0;
    double z_fuel = sched::solve_exact(heavier_fuel).solution->breakdown.z;
    CHECK(z_fuel > z0 + 1.0);  // fuel is a big cost block here

    auto heavier_delay = inst;
    heavier_delay.w_delay = 3.0;
    double z_delay = sched::solve_exact(heavier_delay).solution->breakdown.z;
    CHECK(z_delay >= z0 - 1e-9);

    auto negative = inst;
    negative.w_co2 = -1.0;
    CHECK_THROWS_AS(sched::solve_exact(negative), std::invalid_argument);
}

TEST_CASE("time budget is honored and reported honestly") {
    auto inst = nine_stop_tour();

    auto rushed = sched::solve_exact(inst, 0);
    REQUIRE(rushed.solution.has_value());  // the heuristic seed is always kept
    CHECK_FALSE(rushed.optimal);

    auto relaxed = sched::solve_exact(inst, 120000);
    REQUIRE(relaxed.solution.has_value());
    CHECK(relaxed.optimal);
    CHECK(relaxed.nodes > rushed.nodes);
    CHECK(relaxed.solution->breakdown.z <= rushed.solution->breakdown.z + 1e-9);
    CHECK(sched::validate(inst, *relaxed.solution).empty());
}

TEST_CASE("days that cannot fit are reported, not silently truncated") {
    SchedulingInstance inst;
    inst.day_start = ticks_from_hours(8.0);
    inst.day_end = ticks_from_hours(10.0);
    inst.vehicles = {{"van", 12.0, 2.64}};
    for (int i = 0; i < 2; ++i) {
        sched::TaskSpec t;
        t.id = i + 1;
        t.processing = ticks_from_hours(1.5);
        inst.tasks.push_back(t);
    }
    inst.travel_time = {{0, ticks_from_hours(0.1)}, {ticks_from_hours(0.1), 0}};
    inst.travel_km = {{0.0, 2.0}, {2.0, 0.0}};

    auto base = sched::solve_baseline(inst);
    CHECK_FALSE(base.solution.has_value());
    CHECK_THAT(base.infeasible_reason, Catch::Matchers::ContainsSubstring("after the day ends"));

    auto exact = sched::solve_exact(inst);
    CHECK_FALSE(exact.solution.has_value());
    CHECK_FALSE(exact.optimal);
    CHECK_THAT(exact.infeasible_reason,
               Catch::Matchers::ContainsSubstring("no schedule fits inside the work day"));

    auto brute = sched::brute_force(inst);
    CHECK_FALSE(brute.solution.has_value());
    CHECK_THAT(brute.infeasible_reason, Catch::Matchers::ContainsSubstring("no task order fits"));
}

TEST_CASE("enumeration reference refuses oversized instances") {
    sched::InstanceRecipe recipe;
    recipe.n_tasks = 9;
    auto inst = sched::random_instance(3, recipe);
    CHECK_THROWS_AS(sched::brute_force(inst), std::invalid_argument);
}

TEST_CASE("generated days are valid and reproducible") {
    sched::InstanceRecipe recipe;
    recipe.n_tasks = 5;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto inst = sched::random_instance(seed, recipe);
        CHECK_NOTHROW(inst.check());
        CHECK_NOTHROW(inst.check_acyclic());
    }
    auto a = sched::random_instance(42, recipe);
    auto b = sched::random_instance(42, recipe);
    CHECK(sched::instance_to_json(a) == sched::instance_to_json(b));
    auto c = sched::random_instance(43, recipe);
    CHECK(sched::instance_to_json(a) != sched::instance_to_json(c));
}

TEST_CASE("paired benchmark runs always favor the exact plan") {
    sched::InstanceRecipe recipe;
    recipe.n_tasks = 4;
    auto make = [&](std::uint64_t attempt) { return sched::random_instance(1000 + attempt, recipe); };

    auto report = sched::compare_runs(make, 6, 5000);
    REQUIRE(report.runs.size() == 6);
    for (const auto& r : report.runs) {
        CHECK(r.exact.z <= r.baseline.z + 1e-9);
        CHECK(r.exact_optimal);
    }
    CHECK(report.mean_z_improvement_pct >= -1e-9);

    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("improvement %"));
    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("total completion time (h)"));
    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("delays and penalties (h)"));
    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("co2 emissions (kg)"));
    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("fuel consumption (l)"));
    CHECK_THAT(report.table, Catch::Matchers::ContainsSubstring("efficiency and utilization (%)"));

    auto again = sched::compare_runs(make, 6, 5000);
    CHECK(again.table == report.table);  // same seeds, same story
}

TEST_CASE("impossible draws are replaced and counted") {
    sched::InstanceRecipe recipe;
    recipe.n_tasks = 2;
    recipe.emergency_share = 0.0;
    recipe.day_hours = 2.6;  // two jobs of 0.5 to 2 h rarely both fit
    auto make = [&](std::uint64_t attempt) { return sched::random_instance(5000 + attempt, recipe); };

    auto report = sched::compare_runs(make, 6, 2000);
    REQUIRE(report.runs.size() == 6);
    CHECK(report.regenerated >= 1);
}
