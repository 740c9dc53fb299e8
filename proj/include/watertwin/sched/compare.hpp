#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/rng.hpp"
#include "watertwin/sched/solvers.hpp"

namespace watertwin::sched {

/// Knobs for the synthetic instance generator used in benchmark batches.
struct InstanceRecipe {
    int n_tasks = 5;
    int max_segments = 2;            // per-task cap is drawn from [1, this]
    double emergency_share = 0.4;    // chance a task arrives mid-day
    double dependency_rate = 0.15;   // chance of an edge between a task pair
    double day_hours = 14.0;
};

/// Draws a plausible maintenance day: short jobs around town, a couple of
/// emergencies landing mid-morning, light dependency structure. Distances
/// are symmetric and drive times assume roughly 40 km/h through traffic.
inline SchedulingInstance random_instance(std::uint64_t seed, const InstanceRecipe& recipe = {}) {
    if (recipe.n_tasks < 1) throw std::invalid_argument("need at least one task");
    Rng rng(seed);
    SchedulingInstance inst;
    inst.day_start = ticks_from_hours(8.0);
    inst.day_end = ticks_from_hours(8.0 + recipe.day_hours);
    inst.vehicles = {{"van", 12.0, 2.64}, {"small_truck", 8.0, 2.68}};

    auto n = static_cast<std::size_t>(recipe.n_tasks);
    for (std::size_t i = 0; i < n; ++i) {
        TaskSpec t;
        t.id = static_cast<int>(i) + 1;
        t.label = "task_" + std::to_string(t.id);
        t.processing = ticks_from_hours(rng.uniform(0.5, 2.0));
        t.emergency = rng.uniform01() < recipe.emergency_share;
        t.release = t.emergency ? ticks_from_hours(rng.uniform(0.5, 4.0)) : 0;
        t.priority = t.emergency ? rng.uniform_int(4, 5) : rng.uniform_int(1, 3);
        t.vehicle = rng.uniform_int(0, 1);
        t.max_segments = recipe.max_segments <= 1 ? 1 : rng.uniform_int(1, recipe.max_segments);
        t.latitude = 51.45 + rng.uniform01() * 0.12;
        t.longitude = -0.20 + rng.uniform01() * 0.12;
        t.fuel_l = rng.uniform(2.0, 8.0);
        t.co2_kg = t.fuel_l * inst.vehicles[static_cast<std::size_t>(t.vehicle)].co2_per_liter;
        inst.tasks.push_back(t);
    }

    inst.travel_time.assign(n, std::vector<ticks>(n, 0));
    inst.travel_km.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double km = rng.uniform(3.0, 18.0);
            ticks hours = ticks_from_hours(km / 40.0);
            inst.travel_km[i][j] = inst.travel_km[j][i] = km;
            inst.travel_time[i][j] = inst.travel_time[j][i] = hours;
        }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform01() < recipe.dependency_rate)
                inst.dependencies.push_back({static_cast<int>(i), static_cast<int>(j)});

    inst.check();
    inst.check_acyclic();
    return inst;
}

struct RunRecord {
    ObjectiveBreakdown baseline;
    ObjectiveBreakdown exact;
    bool exact_optimal = false;
};

struct CompareReport {
    std::vector<RunRecord> runs;
    int regenerated = 0;  // infeasible draws that had to be replaced
    double mean_z_improvement_pct = 0.0;
    std::string table;
};

namespace compare_detail {

inline double improvement_pct(double conventional, double proposed, bool higher_is_better) {
    if (std::abs(conventional) < 1e-12) return 0.0;
    double delta = higher_is_better ? proposed - conventional : conventional - proposed;
    return delta / conventional * 100.0;
}

inline std::string comparison_table(const std::vector<RunRecord>& runs) {
    double n = static_cast<double>(runs.size());
    auto mean = [&](auto pick) {
        double s = 0.0;
        for (const auto& r : runs) s += pick(r);
        return s / n;
    };
    struct Row {
        const char* label;
        double conventional;
        double proposed;
        bool higher_is_better;
    };
    const Row rows[] = {
        {"total completion time (h)", mean([](const RunRecord& r) { return r.baseline.makespan_h; }),
         mean([](const RunRecord& r) { return r.exact.makespan_h; }), false},
        {"delays and penalties (h)", mean([](const RunRecord& r) { return r.baseline.delay_all_h; }),
         mean([](const RunRecord& r) { return r.exact.delay_all_h; }), false},
        {"co2 emissions (kg)", mean([](const RunRecord& r) { return r.baseline.co2_kg; }),
         mean([](const RunRecord& r) { return r.exact.co2_kg; }), false},
        {"fuel consumption (l)", mean([](const RunRecord& r) { return r.baseline.fuel_l; }),
         mean([](const RunRecord& r) { return r.exact.fuel_l; }), false},
        {"efficiency and utilization (%)",
         mean([](const RunRecord& r) { return r.baseline.efficiency_pct; }),
         mean([](const RunRecord& r) { return r.exact.efficiency_pct; }), true},
    };
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-32s %14s %14s %14s\n", "metric", "conventional",
                  "proposed", "improvement %");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-32s %14.2f %14.2f %14.2f\n", r.label, r.conventional,
                      r.proposed,
                      improvement_pct(r.conventional, r.proposed, r.higher_is_better));
        out += line;
    }
    return out;
}

}  // namespace compare_detail

/// Solves a batch of generated instances with both the dispatcher heuristic
/// and the exact solver and reports paired results. Draws that no schedule
/// can satisfy are replaced (and counted). The exact solver starts from the
/// heuristic schedule, so it never comes out worse on any run.
inline CompareReport compare_runs(const std::function<SchedulingInstance(std::uint64_t)>& make,
                                  int n_runs = 20, int budget_ms = 10000) {
    if (n_runs < 1) throw std::invalid_argument("need at least one run");
    CompareReport report;
    std::uint64_t attempt = 0;
    const std::uint64_t attempt_cap = static_cast<std::uint64_t>(n_runs) * 50;
    while (report.runs.size() < static_cast<std::size_t>(n_runs)) {
        if (attempt >= attempt_cap)
            throw std::runtime_error("generator keeps producing infeasible days; "
                                     "loosen the recipe or widen the work day");
        SchedulingInstance inst = make(attempt++);
        auto base = solve_baseline(inst);
        if (!base.solution) {
            ++report.regenerated;
            continue;
        }
        auto exact = solve_exact(inst, budget_ms);
        if (!exact.solution) {  // cannot happen while the baseline is feasible
            ++report.regenerated;
            continue;
        }
        report.runs.push_back(
            {base.solution->breakdown, exact.solution->breakdown, exact.optimal});
    }
    double acc = 0.0;
    for (const auto& r : report.runs)
        acc += compare_detail::improvement_pct(r.baseline.z, r.exact.z, false);
    report.mean_z_improvement_pct = acc / static_cast<double>(report.runs.size());
    report.table = compare_detail::comparison_table(report.runs);
    return report;
}

}  // namespace watertwin::sched
