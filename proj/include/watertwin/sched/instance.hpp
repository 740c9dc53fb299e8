#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace watertwin::sched {

/// All times are integer seconds ("ticks") so constraint checks are exact.
/// Ticks inside a schedule are relative to the start of the work day.
using ticks = std::int64_t;

inline ticks ticks_from_hours(double h) { return std::llround(h * 3600.0); }
inline double hours_from_ticks(ticks t) { return static_cast<double>(t) / 3600.0; }

struct VehicleSpec {
    std::string name;
    double km_per_liter = 1.0;   // fuel efficiency
    double co2_per_liter = 0.0;  // kg emitted per liter burned
};

struct TaskSpec {
    int id = 0;            // external id used in files and reports
    std::string label;
    ticks processing = 0;  // total work content
    ticks release = 0;     // earliest start, relative to day start
    int priority = 1;      // larger means more urgent; drives heuristics only
    int vehicle = 0;       // index into vehicles
    int max_segments = 1;  // 1 forbids interrupting the task
    bool emergency = false;
    double latitude = 0.0, longitude = 0.0;  // metadata; travel comes from the matrix
    double fuel_l = 0.0;   // consumed while processing
    double co2_kg = 0.0;
};

/// One crew, one work day, travel between task sites, optional dependencies.
struct SchedulingInstance {
    ticks day_start = 8 * 3600;   // clock time the day opens
    ticks day_end = 22 * 3600;    // clock time the day closes
    double w_time = 1.0, w_fuel = 1.0, w_co2 = 1.0, w_delay = 1.0;
    std::vector<VehicleSpec> vehicles;
    std::vector<TaskSpec> tasks;
    std::vector<std::pair<int, int>> dependencies;  // (prerequisite, dependent), internal indices
    std::vector<std::vector<ticks>> travel_time;    // -1 where no pair was given
    std::vector<std::vector<double>> travel_km;

    std::size_t n() const { return tasks.size(); }
    ticks horizon() const { return day_end - day_start; }

    /// A constant strictly larger than any feasible time difference, for
    /// anyone exporting the timing constraints to a solver that needs one.
    double big_m_hours() const {
        ticks p_sum = 0, d_max = 0;
        for (const auto& t : tasks) p_sum += t.processing;
        for (const auto& row : travel_time)
            for (ticks d : row) d_max = std::max(d_max, d);
        return hours_from_ticks(horizon() + d_max + p_sum);
    }

    int index_of(int external_id) const {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].id == external_id) return static_cast<int>(i);
        throw std::invalid_argument("no task with id " + std::to_string(external_id));
    }

    /// Structural validation; throws on the first defect found.
    void check() const {
        if (tasks.empty()) throw std::invalid_argument("instance has no tasks");
        if (vehicles.empty()) throw std::invalid_argument("instance has no vehicles");
        if (day_end <= day_start) throw std::invalid_argument("work day ends before it starts");

        std::set<int> ids;
        for (const auto& t : tasks) {
            if (!ids.insert(t.id).second)
                throw std::invalid_argument("duplicate task id " + std::to_string(t.id));
            if (t.processing <= 0)
                throw std::invalid_argument("task " + std::to_string(t.id) +
                                            " has non-positive processing time");
            if (t.release < 0)
                throw std::invalid_argument("task " + std::to_string(t.id) +
                                            " has a negative release time");
            if (t.max_segments < 1)
                throw std::invalid_argument("task " + std::to_string(t.id) +
                                            " allows fewer than one segment");
            if (t.vehicle < 0 || t.vehicle >= static_cast<int>(vehicles.size()))
                throw std::invalid_argument("task " + std::to_string(t.id) +
                                            " references an unknown vehicle");
        }
        if (travel_time.size() != n() || travel_km.size() != n())
            throw std::invalid_argument("travel matrix size does not match the task count");
        for (std::size_t i = 0; i < n(); ++i) {
            if (travel_time[i].size() != n() || travel_km[i].size() != n())
                throw std::invalid_argument("travel matrix is not square");
            for (std::size_t j = 0; j < n(); ++j) {
                if (i == j) continue;
                if (travel_time[i][j] < 0 || travel_km[i][j] < 0.0)
                    throw std::invalid_argument(
                        "missing travel entry between tasks " + std::to_string(tasks[i].id) +
                        " and " + std::to_string(tasks[j].id));
                if (travel_time[i][j] != travel_time[j][i] ||
                    travel_km[i][j] != travel_km[j][i])
                    throw std::invalid_argument(
                        "travel entries between tasks " + std::to_string(tasks[i].id) + " and " +
                        std::to_string(tasks[j].id) + " disagree with their mirror");
            }
        }
        for (auto [a, b] : dependencies) {
            if (a < 0 || b < 0 || a >= static_cast<int>(n()) || b >= static_cast<int>(n()))
                throw std::invalid_argument("dependency references a task that does not exist");
        }
        check_acyclic();
    }

    /// Dependency graph must be a DAG; reports one offending cycle by task id.
    void check_acyclic() const {
        std::vector<std::vector<int>> next(n());
        for (auto [a, b] : dependencies) next[static_cast<std::size_t>(a)].push_back(b);
        std::vector<int> state(n(), 0);  // 0 new, 1 on stack, 2 done
        std::vector<int> stack;

        auto dfs = [&](auto&& self, int v) -> std::vector<int> {
            state[static_cast<std::size_t>(v)] = 1;
            stack.push_back(v);
            for (int w : next[static_cast<std::size_t>(v)]) {
                if (state[static_cast<std::size_t>(w)] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), w);
                    return std::vector<int>(it, stack.end());
                }
                if (state[static_cast<std::size_t>(w)] == 0) {
                    auto cyc = self(self, w);
                    if (!cyc.empty()) return cyc;
                }
            }
            stack.pop_back();
            state[static_cast<std::size_t>(v)] = 2;
            return {};
        };
        for (int v = 0; v < static_cast<int>(n()); ++v) {
            if (state[static_cast<std::size_t>(v)] != 0) continue;
            auto cyc = dfs(dfs, v);
            if (!cyc.empty()) {
                std::string msg = "dependencies form a cycle: ";
                for (std::size_t i = 0; i < cyc.size(); ++i)
                    msg += (i ? " -> " : "") +
                           std::to_string(tasks[static_cast<std::size_t>(cyc[i])].id);
                msg += " -> " + std::to_string(tasks[static_cast<std::size_t>(cyc[0])].id);
                throw std::invalid_argument(msg);
            }
        }
    }
};

/// Fuel burned driving from task i to task j, using the vehicle that serves
/// the destination (the crew drives whatever gear task j needs).
inline double travel_fuel(const SchedulingInstance& inst, int i, int j) {
    if (i == j) return 0.0;
    double km = inst.travel_km[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (km < 0.0)
        throw std::invalid_argument("no travel entry between tasks " +
                                    std::to_string(inst.tasks[static_cast<std::size_t>(i)].id) +
                                    " and " +
                                    std::to_string(inst.tasks[static_cast<std::size_t>(j)].id));
    const auto& veh =
        inst.vehicles[static_cast<std::size_t>(inst.tasks[static_cast<std::size_t>(j)].vehicle)];
    return km / veh.km_per_liter;
}

inline double travel_co2(const SchedulingInstance& inst, int i, int j) {
    if (i == j) return 0.0;
    const auto& veh =
        inst.vehicles[static_cast<std::size_t>(inst.tasks[static_cast<std::size_t>(j)].vehicle)];
    return travel_fuel(inst, i, j) * veh.co2_per_liter;
}

// ---------------------------------------------------------------------------
// file format

/// Reads the human-editable instance document. Hours are decimals; releases
/// are offsets from the day start; travel pairs may be listed once and are
/// mirrored automatically.
inline SchedulingInstance load_instance_json(const nlohmann::json& j) {
    SchedulingInstance inst;
    try {
        const auto& wd = j.at("work_day");
        inst.day_start = ticks_from_hours(wd.at("start_hour").get<double>());
        inst.day_end = ticks_from_hours(wd.at("end_hour").get<double>());

        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            inst.w_time = w.value("time", 1.0);
            inst.w_fuel = w.value("fuel", 1.0);
            inst.w_co2 = w.value("co2", 1.0);
            inst.w_delay = w.value("delay", 1.0);
        }

        std::map<std::string, int> vehicle_index;
        for (const auto& vj : j.at("vehicles")) {
            VehicleSpec v;
            v.name = vj.at("name").get<std::string>();
            v.km_per_liter = vj.at("fuel_efficiency_km_per_l").get<double>();
            v.co2_per_liter = vj.at("emission_factor_kg_per_l").get<double>();
            if (v.km_per_liter <= 0.0)
                throw std::invalid_argument("vehicle " + v.name +
                                            " has non-positive fuel efficiency");
            vehicle_index[v.name] = static_cast<int>(inst.vehicles.size());
            inst.vehicles.push_back(std::move(v));
        }

        int default_segments = j.value("max_segments_default", 1);
        for (const auto& tj : j.at("tasks")) {
            TaskSpec t;
            t.id = tj.at("id").get<int>();
            t.label = tj.value("name", "task " + std::to_string(t.id));
            t.processing = ticks_from_hours(tj.at("processing_hours").get<double>());
            t.release = ticks_from_hours(tj.value("release_hours", 0.0));
            t.priority = tj.value("priority", 1);
            t.max_segments = tj.value("max_segments", default_segments);
            t.latitude = tj.value("latitude", 0.0);
            t.longitude = tj.value("longitude", 0.0);
            t.fuel_l = tj.value("fuel_l", 0.0);
            t.co2_kg = tj.value("co2_kg", 0.0);
            t.emergency = tj.value("emergency", t.release > 0);  // late release implies urgent

            std::string veh = tj.at("vehicle").get<std::string>();
            auto it = vehicle_index.find(veh);
            if (it == vehicle_index.end())
                throw std::invalid_argument("task " + std::to_string(t.id) +
                                            " uses unknown vehicle '" + veh + "'");
            t.vehicle = it->second;
            inst.tasks.push_back(std::move(t));
        }

        std::size_t m = inst.tasks.size();
        inst.travel_time.assign(m, std::vector<ticks>(m, -1));
        inst.travel_km.assign(m, std::vector<double>(m, -1.0));
        for (std::size_t i = 0; i < m; ++i) {
            inst.travel_time[i][i] = 0;
            inst.travel_km[i][i] = 0.0;
        }
        for (const auto& ej : j.at("travel")) {
            int a = inst.index_of(ej.at("from").get<int>());
            int b = inst.index_of(ej.at("to").get<int>());
            ticks d = ticks_from_hours(ej.at("hours").get<double>());
            double km = ej.at("km").get<double>();
            auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
            inst.travel_time[ia][ib] = d;
            inst.travel_km[ia][ib] = km;
            if (inst.travel_time[ib][ia] < 0) {  // mirror unless the file gave both directions
                inst.travel_time[ib][ia] = d;
                inst.travel_km[ib][ia] = km;
            }
        }

        if (j.contains("dependencies"))
            for (const auto& dj : j.at("dependencies")) {
                int a = inst.index_of(dj.at(0).get<int>());
                int b = inst.index_of(dj.at(1).get<int>());
                inst.dependencies.emplace_back(a, b);
            }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed instance file: ") + e.what());
    }
    inst.check();
    return inst;
}

inline SchedulingInstance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);  // allow comments
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + " is not valid JSON: " + e.what());
    }
    return load_instance_json(j);
}

inline nlohmann::json instance_to_json(const SchedulingInstance& inst) {
    nlohmann::json j;
    j["work_day"] = {{"start_hour", hours_from_ticks(inst.day_start)},
                     {"end_hour", hours_from_ticks(inst.day_end)}};
    j["weights"] = {{"time", inst.w_time},
                    {"fuel", inst.w_fuel},
                    {"co2", inst.w_co2},
                    {"delay", inst.w_delay}};
    j["vehicles"] = nlohmann::json::array();
    for (const auto& v : inst.vehicles)
        j["vehicles"].push_back({{"name", v.name},
                                 {"fuel_efficiency_km_per_l", v.km_per_liter},
                                 {"emission_factor_kg_per_l", v.co2_per_liter}});
    j["tasks"] = nlohmann::json::array();
    for (const auto& t : inst.tasks)
        j["tasks"].push_back({{"id", t.id},
                              {"name", t.label},
                              {"processing_hours", hours_from_ticks(t.processing)},
                              {"release_hours", hours_from_ticks(t.release)},
                              {"priority", t.priority},
                              {"vehicle", inst.vehicles[static_cast<std::size_t>(t.vehicle)].name},
                              {"max_segments", t.max_segments},
                              {"emergency", t.emergency},
                              {"latitude", t.latitude},
                              {"longitude", t.longitude},
                              {"fuel_l", t.fuel_l},
                              {"co2_kg", t.co2_kg}});
    j["dependencies"] = nlohmann::json::array();
    for (auto [a, b] : inst.dependencies)
        j["dependencies"].push_back({inst.tasks[static_cast<std::size_t>(a)].id,
                                     inst.tasks[static_cast<std::size_t>(b)].id});
    j["travel"] = nlohmann::json::array();
    for (std::size_t i = 0; i < inst.n(); ++i)
        for (std::size_t k = i + 1; k < inst.n(); ++k)
            j["travel"].push_back({{"from", inst.tasks[i].id},
                                   {"to", inst.tasks[k].id},
                                   {"hours", hours_from_ticks(inst.travel_time[i][k])},
                                   {"km", inst.travel_km[i][k]}});
    return j;
}

}  // namespace watertwin::sched
