#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/sched/instance.hpp"

namespace watertwin::sched {

/// One uninterrupted stretch of work on a task. Times are ticks relative to
/// the day start.
struct Segment {
    int task = 0;  // internal index
    ticks start = 0;
    ticks end = 0;

    ticks length() const { return end - start; }
};

struct ObjectiveBreakdown {
    double z = std::numeric_limits<double>::quiet_NaN();
    double makespan_h = 0.0;        // time from day start to the last segment end
    double fuel_l = 0.0;            // processing plus travel
    double co2_kg = 0.0;
    double travel_fuel_l = 0.0;     // travel share of the above
    double travel_co2_kg = 0.0;
    double delay_emergency_h = 0.0; // clamped, emergency tasks only (objective form)
    double delay_all_h = 0.0;       // clamped, every task (reporting form)
    double efficiency_pct = 0.0;    // processing share of the makespan
};

struct ScheduleSolution {
    std::vector<Segment> segments;  // chronological
    ObjectiveBreakdown breakdown;
};

namespace sched_detail {

inline std::vector<Segment> sorted_segments(const ScheduleSolution& sol) {
    std::vector<Segment> segs = sol.segments;
    std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.end < b.end;
    });
    return segs;
}

inline std::string clock(const SchedulingInstance& inst, ticks rel) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", hours_from_ticks(inst.day_start + rel));
    return buf;
}

}  // namespace sched_detail

/// Weighted cost of a complete schedule:
///   Z = w_time * makespan + w_fuel * F + w_co2 * C + w_delay * D
/// F and C cover processing plus every realized travel leg (the first drive
/// of the day, from the base, is free); D is the clamped lateness of the
/// emergency tasks past their release times.
inline ObjectiveBreakdown objective(const SchedulingInstance& inst, const ScheduleSolution& sol) {
    auto segs = sched_detail::sorted_segments(sol);
    std::vector<ticks> completion(inst.n(), -1);
    ticks p_sum = 0, makespan = 0;
    for (const auto& s : segs) {
        if (s.task < 0 || s.task >= static_cast<int>(inst.n()))
            throw std::invalid_argument("segment references a task that does not exist");
        completion[static_cast<std::size_t>(s.task)] =
            std::max(completion[static_cast<std::size_t>(s.task)], s.end);
        makespan = std::max(makespan, s.end);
    }
    for (std::size_t i = 0; i < inst.n(); ++i) {
        if (completion[i] < 0)
            throw std::invalid_argument("task " + std::to_string(inst.tasks[i].id) +
                                        " has no segment; the schedule is incomplete");
        p_sum += inst.tasks[i].processing;
    }

    ObjectiveBreakdown b;
    b.makespan_h = hours_from_ticks(makespan);

    for (const auto& t : inst.tasks) {
        b.fuel_l += t.fuel_l;
        b.co2_kg += t.co2_kg;
    }
    for (std::size_t k = 1; k < segs.size(); ++k) {
        if (segs[k].task == segs[k - 1].task) continue;  // validator flags this
        b.travel_fuel_l += travel_fuel(inst, segs[k - 1].task, segs[k].task);
        b.travel_co2_kg += travel_co2(inst, segs[k - 1].task, segs[k].task);
    }
    b.fuel_l += b.travel_fuel_l;
    b.co2_kg += b.travel_co2_kg;

    for (std::size_t i = 0; i < inst.n(); ++i) {
        double late = hours_from_ticks(std::max<ticks>(0, completion[i] - inst.tasks[i].release));
        b.delay_all_h += late;
        if (inst.tasks[i].emergency) b.delay_emergency_h += late;
    }

    if (makespan <= 0) throw std::invalid_argument("schedule spans no time; efficiency undefined");
    b.efficiency_pct = 100.0 * static_cast<double>(p_sum) / static_cast<double>(makespan);

    b.z = inst.w_time * b.makespan_h + inst.w_fuel * b.fuel_l + inst.w_co2 * b.co2_kg +
          inst.w_delay * b.delay_emergency_h;
    return b;
}

struct ScheduleMetrics {
    double delay_all_h = 0.0;
    double efficiency_pct = 0.0;
};

/// Reporting metrics: total clamped lateness over every task, and the share
/// of the makespan spent actually processing.
inline ScheduleMetrics schedule_metrics(const SchedulingInstance& inst,
                                        const ScheduleSolution& sol) {
    auto b = objective(inst, sol);
    return {b.delay_all_h, b.efficiency_pct};
}

/// Checks every scheduling rule on a finished solution and returns one
/// message per violation; an empty list means the schedule is feasible.
inline std::vector<std::string> validate(const SchedulingInstance& inst,
                                         const ScheduleSolution& sol) {
    std::vector<std::string> out;
    auto segs = sched_detail::sorted_segments(sol);
    auto id = [&](int internal) { return std::to_string(inst.tasks[static_cast<std::size_t>(internal)].id); };

    std::vector<std::vector<Segment>> per_task(inst.n());
    for (const auto& s : segs) {
        if (s.task < 0 || s.task >= static_cast<int>(inst.n())) {
            out.push_back("a segment references a task that is not in the instance");
            return out;
        }
        per_task[static_cast<std::size_t>(s.task)].push_back(s);
    }

    for (std::size_t i = 0; i < inst.n(); ++i) {
        const auto& t = inst.tasks[i];
        const auto& mine = per_task[i];
        if (mine.empty()) {
            out.push_back("task " + id(static_cast<int>(i)) + " is never scheduled");
            continue;
        }
        ticks total = 0;
        for (const auto& s : mine) {
            if (s.length() <= 0)
                out.push_back("task " + id(s.task) + " has an empty segment at " +
                              sched_detail::clock(inst, s.start));
            total += s.length();
        }
        if (total != t.processing)
            out.push_back("task " + id(static_cast<int>(i)) + " segments sum to " +
                          std::to_string(hours_from_ticks(total)) + " h, processing time is " +
                          std::to_string(hours_from_ticks(t.processing)) + " h");
        if (static_cast<int>(mine.size()) > t.max_segments)
            out.push_back("task " + id(static_cast<int>(i)) + " is split into " +
                          std::to_string(mine.size()) + " segments, at most " +
                          std::to_string(t.max_segments) + " allowed");
        if (mine.front().start < t.release)
            out.push_back("task " + id(static_cast<int>(i)) + " starts at " +
                          sched_detail::clock(inst, mine.front().start) +
                          ", before its release at " +
                          sched_detail::clock(inst, t.release));
        if (mine.front().start < 0 || mine.back().end > inst.horizon())
            out.push_back("task " + id(static_cast<int>(i)) + " runs outside the work day [" +
                          sched_detail::clock(inst, 0) + ", " +
                          sched_detail::clock(inst, inst.horizon()) + "]");
    }

    for (std::size_t k = 1; k < segs.size(); ++k) {
        const auto& a = segs[k - 1];
        const auto& b = segs[k];
        if (b.start < a.end)
            out.push_back("segments of tasks " + id(a.task) + " and " + id(b.task) +
                          " overlap around " + sched_detail::clock(inst, b.start) +
                          "; the crew can only do one thing at a time");
        else if (a.task == b.task && b.start == a.end)
            out.push_back("task " + id(a.task) +
                          " resumes immediately after itself; adjacent segments must be merged");
        else if (a.task == b.task)
            continue;  // a gap back to the same site needs no travel
        else if (b.start < a.end + inst.travel_time[static_cast<std::size_t>(a.task)]
                                                   [static_cast<std::size_t>(b.task)])
            out.push_back("not enough travel time between task " + id(a.task) + " (ends " +
                          sched_detail::clock(inst, a.end) + ") and task " + id(b.task) +
                          " (starts " + sched_detail::clock(inst, b.start) + ")");
    }

    // an interrupted task may only stop exactly when an emergency task is
    // released, and that emergency must be served next
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        const auto& mine = per_task[static_cast<std::size_t>(s.task)];
        if (s.end == mine.back().end) continue;  // the task's final segment
        bool justified = false;
        if (k + 1 < segs.size()) {
            const auto& nxt = segs[k + 1];
            const auto& nt = inst.tasks[static_cast<std::size_t>(nxt.task)];
            justified = nt.emergency && nxt.start == per_task[static_cast<std::size_t>(nxt.task)]
                                                         .front()
                                                         .start &&
                        s.end == nt.release;
        }
        if (!justified)
            out.push_back("task " + id(s.task) + " is interrupted at " +
                          sched_detail::clock(inst, s.end) +
                          ", which is not the release of an emergency task served next");
    }

    for (auto [a, b] : inst.dependencies) {
        if (per_task[static_cast<std::size_t>(a)].empty() ||
            per_task[static_cast<std::size_t>(b)].empty())
            continue;  // already reported as unscheduled
        if (per_task[static_cast<std::size_t>(b)].front().start <
            per_task[static_cast<std::size_t>(a)].back().end)
            out.push_back("task " + id(b) + " starts before its prerequisite task " + id(a) +
                          " is finished");
    }

    if (out.empty() && std::isfinite(sol.breakdown.z)) {
        auto fresh = objective(inst, sol);
        if (std::fabs(fresh.z - sol.breakdown.z) > 1e-9 ||
            std::fabs(fresh.fuel_l - sol.breakdown.fuel_l) > 1e-9 ||
            std::fabs(fresh.co2_kg - sol.breakdown.co2_kg) > 1e-9)
            out.push_back("stored objective breakdown disagrees with recomputation");
    }
    return out;
}

/// Visit order by first segment start, as external task ids.
inline std::vector<int> visit_sequence(const SchedulingInstance& inst,
                                       const ScheduleSolution& sol) {
    auto segs = sched_detail::sorted_segments(sol);
    std::vector<int> seq;
    std::vector<bool> seen(inst.n(), false);
    for (const auto& s : segs)
        if (!seen[static_cast<std::size_t>(s.task)]) {
            seen[static_cast<std::size_t>(s.task)] = true;
            seq.push_back(inst.tasks[static_cast<std::size_t>(s.task)].id);
        }
    return seq;
}

inline nlohmann::json solution_to_json(const SchedulingInstance& inst,
                                       const ScheduleSolution& sol) {
    auto segs = sched_detail::sorted_segments(sol);
    nlohmann::json j;
    j["sequence"] = visit_sequence(inst, sol);
    j["segments"] = nlohmann::json::array();
    std::vector<int> seg_counts(inst.n(), 0);
    for (const auto& s : segs) {
        auto ti = static_cast<std::size_t>(s.task);
        j["segments"].push_back({{"task", inst.tasks[ti].id},
                                 {"segment", ++seg_counts[ti]},
                                 {"start_hour", hours_from_ticks(inst.day_start + s.start)},
                                 {"end_hour", hours_from_ticks(inst.day_start + s.end)}});
    }
    j["tasks"] = nlohmann::json::array();
    for (std::size_t i = 0; i < inst.n(); ++i) {
        ticks done = -1;
        for (const auto& s : segs)
            if (s.task == static_cast<int>(i)) done = std::max(done, s.end);
        j["tasks"].push_back({{"id", inst.tasks[i].id},
                              {"completion_hour", hours_from_ticks(inst.day_start + done)},
                              {"preempted", seg_counts[i] > 1}});
    }
    j["transitions"] = nlohmann::json::array();
    for (std::size_t k = 1; k < segs.size(); ++k) {
        if (segs[k].task == segs[k - 1].task) continue;
        j["transitions"].push_back(
            {{"from", inst.tasks[static_cast<std::size_t>(segs[k - 1].task)].id},
             {"to", inst.tasks[static_cast<std::size_t>(segs[k].task)].id},
             {"fuel_l", travel_fuel(inst, segs[k - 1].task, segs[k].task)},
             {"co2_kg", travel_co2(inst, segs[k - 1].task, segs[k].task)}});
    }
    const auto& b = sol.breakdown;
    j["objective"] = {{"z", b.z},
                      {"makespan_h", b.makespan_h},
                      {"fuel_l", b.fuel_l},
                      {"co2_kg", b.co2_kg},
                      {"travel_fuel_l", b.travel_fuel_l},
                      {"travel_co2_kg", b.travel_co2_kg},
                      {"delay_emergency_h", b.delay_emergency_h}};
    j["metrics"] = {{"delay_all_h", b.delay_all_h}, {"efficiency_pct", b.efficiency_pct}};
    return j;
}

/// Plot-ready rows, one per segment: task, segment number, clock start/end.
inline void write_gantt_csv(const SchedulingInstance& inst, const ScheduleSolution& sol,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "task,segment,start_hour,end_hour\n";
    auto segs = sched_detail::sorted_segments(sol);
    std::vector<int> seg_counts(inst.n(), 0);
    char buf[80];
    for (const auto& s : segs) {
        auto ti = static_cast<std::size_t>(s.task);
        std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", inst.tasks[ti].id, ++seg_counts[ti],
                      hours_from_ticks(inst.day_start + s.start),
                      hours_from_ticks(inst.day_start + s.end));
        out << buf;
    }
}

}  // namespace watertwin::sched
