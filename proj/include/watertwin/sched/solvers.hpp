#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "watertwin/sched/instance.hpp"
#include "watertwin/sched/solution.hpp"

namespace watertwin::sched {

struct SolveOutcome {
    std::optional<ScheduleSolution> solution;
    bool optimal = false;
    std::uint64_t nodes = 0;
    std::string infeasible_reason;  // non-empty when no schedule exists
};

namespace solver_detail {

inline std::vector<std::vector<int>> prerequisite_lists(const SchedulingInstance& inst) {
    std::vector<std::vector<int>> pre(inst.n());
    for (auto [a, b] : inst.dependencies) pre[static_cast<std::size_t>(b)].push_back(a);
    return pre;
}

inline bool ready(const std::vector<int>& prereqs, const std::vector<ticks>& remaining) {
    for (int p : prereqs)
        if (remaining[static_cast<std::size_t>(p)] > 0) return false;
    return true;
}

}  // namespace solver_detail

/// What a dispatcher without tooling would do: always run the highest
/// priority task that is released and unblocked, break ties by the shortest
/// drive and then the lowest id, never interrupt work, and idle until the
/// next release when nothing is available.
inline SolveOutcome solve_baseline(const SchedulingInstance& inst) {
    inst.check();
    auto prereqs = solver_detail::prerequisite_lists(inst);
    std::vector<ticks> remaining(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) remaining[i] = inst.tasks[i].processing;

    SolveOutcome out;
    ScheduleSolution sol;
    ticks cursor = 0;
    int loc = -1;
    std::size_t done = 0;

    while (done < inst.n()) {
        int pick = -1;
        ticks pick_travel = 0;
        ticks next_release = std::numeric_limits<ticks>::max();
        for (std::size_t j = 0; j < inst.n(); ++j) {
            if (remaining[j] == 0 || !solver_detail::ready(prereqs[j], remaining)) continue;
            const auto& t = inst.tasks[j];
            if (t.release > cursor) {
                next_release = std::min(next_release, t.release);
                continue;
            }
            ticks travel = loc < 0 ? 0 : inst.travel_time[static_cast<std::size_t>(loc)][j];
            if (pick < 0 || t.priority > inst.tasks[static_cast<std::size_t>(pick)].priority ||
                (t.priority == inst.tasks[static_cast<std::size_t>(pick)].priority &&
                 (travel < pick_travel ||
                  (travel == pick_travel &&
                   t.id < inst.tasks[static_cast<std::size_t>(pick)].id)))) {
                pick = static_cast<int>(j);
                pick_travel = travel;
            }
        }
        if (pick < 0) {
            if (next_release == std::numeric_limits<ticks>::max()) {
                out.infeasible_reason = "no runnable task and nothing left to wait for";
                return out;
            }
            cursor = next_release;  // idle until something is released
            continue;
        }
        auto pj = static_cast<std::size_t>(pick);
        ticks start = std::max(cursor + pick_travel, inst.tasks[pj].release);
        ticks end = start + remaining[pj];
        if (end > inst.horizon()) {
            out.infeasible_reason =
                "task " + std::to_string(inst.tasks[pj].id) + " would finish at " +
                sched_detail::clock(inst, end) + ", after the day ends at " +
                sched_detail::clock(inst, inst.horizon());
            return out;
        }
        sol.segments.push_back({pick, start, end});
        remaining[pj] = 0;
        cursor = end;
        loc = pick;
        ++done;
    }
    sol.breakdown = objective(inst, sol);
    out.solution = std::move(sol);
    out.optimal = inst.n() == 1;  // with one task there is nothing to decide
    return out;
}

/// Exhaustive reference: every dependency-respecting task order, timed as
/// early as possible, never interrupting work. Exists to cross-check the
/// branch-and-bound solver on small instances; not a production path.
inline SolveOutcome brute_force(const SchedulingInstance& inst) {
    inst.check();
    if (inst.n() > 8)
        throw std::invalid_argument("the enumeration reference is limited to 8 tasks");
    auto prereqs = solver_detail::prerequisite_lists(inst);

    std::vector<int> order(inst.n());
    std::iota(order.begin(), order.end(), 0);

    SolveOutcome out;
    double best_z = std::numeric_limits<double>::infinity();
    std::vector<int> best_order;

    do {
        // dependency filter: prerequisites must appear earlier
        std::vector<int> pos(inst.n());
        for (std::size_t k = 0; k < order.size(); ++k)
            pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
        bool ok = true;
        for (auto [a, b] : inst.dependencies)
            if (pos[static_cast<std::size_t>(a)] > pos[static_cast<std::size_t>(b)]) {
                ok = false;
                break;
            }
        if (!ok) continue;

        ScheduleSolution sol;
        ticks cursor = 0;
        int loc = -1;
        for (int j : order) {
            auto pj = static_cast<std::size_t>(j);
            ticks travel = loc < 0 ? 0 : inst.travel_time[static_cast<std::size_t>(loc)][pj];
            ticks start = std::max(cursor + travel, inst.tasks[pj].release);
            ticks end = start + inst.tasks[pj].processing;
            if (end > inst.horizon()) {
                ok = false;
                break;
            }
            sol.segments.push_back({j, start, end});
            cursor = end;
            loc = j;
        }
        if (!ok) continue;
        ++out.nodes;
        double z = objective(inst, sol).z;
        if (z < best_z - 1e-12 || (z < best_z + 1e-12 && order < best_order)) {
            best_z = z;
            best_order = order;
        }
    } while (std::next_permutation(order.begin(), order.end()));

    if (best_order.empty()) {
        out.infeasible_reason = "no task order fits inside the work day";
        return out;
    }
    ScheduleSolution sol;
    ticks cursor = 0;
    int loc = -1;
    for (int j : best_order) {
        auto pj = static_cast<std::size_t>(j);
        ticks travel = loc < 0 ? 0 : inst.travel_time[static_cast<std::size_t>(loc)][pj];
        ticks start = std::max(cursor + travel, inst.tasks[pj].release);
        sol.segments.push_back({j, start, start + inst.tasks[pj].processing});
        cursor = start + inst.tasks[pj].processing;
        loc = j;
    }
    sol.breakdown = objective(inst, sol);
    out.solution = std::move(sol);
    out.optimal = true;
    return out;
}

/// Depth-first branch-and-bound over (task, stop point) decisions.
///
/// At each node the crew either runs an unblocked task to completion, or
/// starts it and stops exactly when an emergency task is released mid-work
/// (the emergency is then served next; segment budgets are respected).
/// Admissible lower bounds on time, fuel, emissions and delay prune the
/// tree; the incumbent starts from the baseline heuristic, so the result
/// never loses to it. Single-threaded and deterministic: equal-cost
/// solutions resolve to the lexicographically smallest visit order.
inline SolveOutcome solve_exact(const SchedulingInstance& inst, int budget_ms = 60000) {
    inst.check();
    if (inst.w_time < 0 || inst.w_fuel < 0 || inst.w_co2 < 0 || inst.w_delay < 0)
        throw std::invalid_argument("negative objective weights are not supported");

    const std::size_t n = inst.n();
    auto prereqs = solver_detail::prerequisite_lists(inst);

    // constant processing costs; only travel legs and times vary by decision
    double fuel_base = 0.0, co2_base = 0.0;
    for (const auto& t : inst.tasks) {
        fuel_base += t.fuel_l;
        co2_base += t.co2_kg;
    }

    std::vector<ticks> min_in_time(n, 0);
    std::vector<double> min_in_fuel(n, 0.0), min_in_co2(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        ticks bt = std::numeric_limits<ticks>::max();
        double bf = std::numeric_limits<double>::infinity(), bc = bf;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            bt = std::min(bt, inst.travel_time[i][j]);
            bf = std::min(bf, travel_fuel(inst, static_cast<int>(i), static_cast<int>(j)));
            bc = std::min(bc, travel_co2(inst, static_cast<int>(i), static_cast<int>(j)));
        }
        if (n > 1) {
            min_in_time[j] = bt;
            min_in_fuel[j] = bf;
            min_in_co2[j] = bc;
        }
    }

    std::vector<int> branch_order(n);
    std::iota(branch_order.begin(), branch_order.end(), 0);
    std::sort(branch_order.begin(), branch_order.end(), [&](int a, int b) {
        const auto& ta = inst.tasks[static_cast<std::size_t>(a)];
        const auto& tb = inst.tasks[static_cast<std::size_t>(b)];
        if (ta.priority != tb.priority) return ta.priority > tb.priority;
        if (ta.release != tb.release) return ta.release < tb.release;
        return ta.id < tb.id;
    });

    SolveOutcome out;
    double best_z = std::numeric_limits<double>::infinity();
    std::vector<Segment> best_segments;
    std::vector<int> best_visits;

    auto seed = solve_baseline(inst);
    if (seed.solution) {
        best_z = seed.solution->breakdown.z;
        best_segments = seed.solution->segments;
        for (const auto& s : best_segments) best_visits.push_back(s.task);
    }

    std::vector<ticks> remaining(n);
    std::vector<int> segs_used(n, 0);
    for (std::size_t i = 0; i < n; ++i) remaining[i] = inst.tasks[i].processing;
    std::vector<Segment> partial;
    std::vector<int> visits;

    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(budget_ms);
    bool timed_out = false;

    double w_t = inst.w_time, w_f = inst.w_fuel, w_c = inst.w_co2, w_d = inst.w_delay;
    ticks horizon = inst.horizon();

    auto search = [&](auto&& self, ticks cursor, int loc, std::size_t done, double tf, double tc,
                      double delay_h, int forced) -> void {
        if (timed_out) return;
        if ((++out.nodes & 0x3f) == 0 && std::chrono::steady_clock::now() > deadline) {
            timed_out = true;
            return;
        }

        if (done == n) {
            double z = w_t * hours_from_ticks(cursor) + w_f * (fuel_base + tf) +
                       w_c * (co2_base + tc) + w_d * delay_h;
            if (z < best_z - 1e-12 || (z < best_z + 1e-12 && visits < best_visits)) {
                best_z = z;
                best_segments = partial;
                best_visits = visits;
            }
            return;
        }

        // admissible lower bound on the finished cost of this branch
        ticks rem_total = 0, finish_lb = cursor;
        double fuel_lb = tf, co2_lb = tc, delay_lb = delay_h;
        ticks free_leg_time = 0;
        double free_leg_fuel = 0.0, free_leg_co2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (remaining[j] == 0) continue;
            rem_total += remaining[j];
            ticks done_at = std::max(cursor, inst.tasks[j].release) + remaining[j];
            finish_lb = std::max(finish_lb, done_at);
            fuel_lb += min_in_fuel[j];
            co2_lb += min_in_co2[j];
            if (loc < 0) {  // the first drive of the day is free for one task
                free_leg_time = std::max(free_leg_time, min_in_time[j]);
                free_leg_fuel = std::max(free_leg_fuel, min_in_fuel[j]);
                free_leg_co2 = std::max(free_leg_co2, min_in_co2[j]);
            }
            if (inst.tasks[j].emergency)
                delay_lb += hours_from_ticks(std::max<ticks>(0, cursor - inst.tasks[j].release) +
                                             remaining[j]);
        }
        ticks legs_time = -free_leg_time;
        for (std::size_t j = 0; j < n; ++j)
            if (remaining[j] > 0) legs_time += min_in_time[j];
        finish_lb = std::max(finish_lb, cursor + rem_total + std::max<ticks>(0, legs_time));
        double z_lb = w_t * hours_from_ticks(finish_lb) + w_f * (fuel_base + fuel_lb - free_leg_fuel) +
                      w_c * (co2_base + co2_lb - free_leg_co2) + w_d * delay_lb;
        if (z_lb >= best_z - 1e-12) return;

        for (int j : branch_order) {
            if (forced >= 0 && j != forced) continue;
            auto pj = static_cast<std::size_t>(j);
            if (remaining[pj] == 0 || !solver_detail::ready(prereqs[pj], remaining)) continue;
            const auto& t = inst.tasks[pj];

            ticks travel = loc < 0 ? 0 : inst.travel_time[static_cast<std::size_t>(loc)][pj];
            ticks start = std::max(cursor + travel, segs_used[pj] == 0 ? t.release : 0);
            double leg_f = loc < 0 ? 0.0 : travel_fuel(inst, loc, j);
            double leg_c = loc < 0 ? 0.0 : travel_co2(inst, loc, j);
            bool first_visit = segs_used[pj] == 0;

            // option 1: run what is left of the task to completion
            ticks end = start + remaining[pj];
            if (end <= horizon) {
                ticks saved_rem = remaining[pj];
                partial.push_back({j, start, end});
                if (first_visit) visits.push_back(j);
                remaining[pj] = 0;
                ++segs_used[pj];
                double extra_delay =
                    t.emergency ? hours_from_ticks(std::max<ticks>(0, end - t.release)) : 0.0;
                self(self, end, j, done + 1, tf + leg_f, tc + leg_c, delay_h + extra_delay, -1);
                --segs_used[pj];
                remaining[pj] = saved_rem;
                if (first_visit) visits.pop_back();
                partial.pop_back();
                if (timed_out) return;
            }

            // option 2: start it, then hand over to an emergency released
            // mid-segment (needs one segment now and at least one later)
            if (segs_used[pj] + 2 > t.max_segments) continue;
            for (std::size_t e = 0; e < n; ++e) {
                const auto& te = inst.tasks[e];
                if (!te.emergency || remaining[e] != te.processing || e == pj) continue;
                if (segs_used[e] != 0) continue;
                if (!solver_detail::ready(prereqs[e], remaining)) continue;
                ticks stop = te.release;
                if (stop <= start || stop >= start + remaining[pj]) continue;
                if (stop > horizon) continue;

                ticks saved_rem = remaining[pj];
                partial.push_back({j, start, stop});
                if (first_visit) visits.push_back(j);
                remaining[pj] = saved_rem - (stop - start);
                ++segs_used[pj];
                self(self, stop, j, done, tf + leg_f, tc + leg_c, delay_h, static_cast<int>(e));
                --segs_used[pj];
                remaining[pj] = saved_rem;
                if (first_visit) visits.pop_back();
                partial.pop_back();
                if (timed_out) return;
            }
        }
    };
    search(search, 0, -1, 0, 0.0, 0.0, 0.0, -1);

    if (best_segments.empty()) {
        out.infeasible_reason = timed_out
                                    ? "time budget exhausted before any schedule was found"
                                    : "no schedule fits inside the work day";
        out.optimal = false;
        return out;
    }
    ScheduleSolution sol;
    sol.segments = best_segments;
    std::sort(sol.segments.begin(), sol.segments.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });
    sol.breakdown = objective(inst, sol);
    out.solution = std::move(sol);
    out.optimal = !timed_out;
    return out;
}

}  // namespace watertwin::sched
