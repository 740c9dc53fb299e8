// command line front end: synthetic data, correlation screening, demand
// forecasting and maintenance-day scheduling behind one binary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "watertwin/additive.hpp"
#include "watertwin/config.hpp"
#include "watertwin/correlation.hpp"
#include "watertwin/forecast.hpp"
#include "watertwin/gbt.hpp"
#include "watertwin/ingest.hpp"
#include "watertwin/lstm.hpp"
#include "watertwin/metrics.hpp"
#include "watertwin/sched/compare.hpp"
#include "watertwin/sched/solvers.hpp"
#include "watertwin/synth.hpp"
#include "watertwin/transform.hpp"

namespace fs = std::filesystem;
using namespace watertwin;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_infeasible = 2;
constexpr int exit_input_error = 3;

data::TimeSeriesFrame load_joined(const std::string& consumption_path,
                                  const std::string& meteo_path, const std::string& target) {
    auto consumption = data::load_consumption_csv(consumption_path);
    auto meteo = meteo_path.size() > 5 && meteo_path.substr(meteo_path.size() - 5) == ".json"
                     ? data::load_meteo_json(meteo_path)
                     : data::load_meteo_csv(meteo_path);
    if (!consumption.issues.empty())
        std::cerr << consumption_path << ": skipped " << consumption.issues.size()
                  << " unusable row(s)\n";
    if (!meteo.issues.empty())
        std::cerr << meteo_path << ": skipped " << meteo.issues.size() << " unusable cell(s)\n";

    auto joined = data::join_on_date(consumption.frame, meteo.frame);
    if (joined.rows() == 0)
        throw std::runtime_error("the consumption and weather files share no dates");
    for (const auto& name : joined.names)
        if (name != target) data::forward_fill(joined, name);
    return joined;
}

std::unique_ptr<models::ForecastModel> make_model(const std::string& name,
                                                  const std::string& target,
                                                  std::uint64_t seed) {
    if (name == "naive") return std::make_unique<models::NaiveSeasonalModel>(target, 7);

    for (const auto& spec : models::additive_variants(target, "tmax"))
        if (spec.variant_name == name) return std::make_unique<models::AdditiveModel>(spec);

    if (name == "lstm") {
        models::LstmParams p;
        p.hidden = 16;
        p.seq_len = 14;
        p.epochs = 60;
        p.learning_rate = 0.01;
        p.seed = seed;
        return std::make_unique<models::LstmModel>(p, target,
                                                   std::vector<std::string>{"tmax"});
    }

    if (name == "gbt_leafwise" || name == "gbt_depthwise") {
        features::FeatureSpec fs;
        fs.target = target;
        fs.lags = {1, 7};
        fs.rolling_window = 7;
        fs.temporal = true;
        fs.regressors = {"tmax"};
        models::GbtParams p;
        p.growth = name == "gbt_leafwise" ? models::GbtParams::Growth::leafwise
                                          : models::GbtParams::Growth::depthwise;
        p.n_rounds = 300;
        p.learning_rate = 0.05;
        p.num_leaves = 31;
        p.max_depth = 6;
        p.min_samples_leaf = 5;
        p.lambda_l2 = 1.0;
        p.bagging_fraction = 0.8;
        p.seed = seed;
        return std::make_unique<models::GbtModel>(fs, p);
    }

    if (name == "stacking") {
        // the naive member acts as a stabilizer: its weight soaks up what the
        // two strong members agree on poorly, which transfers better to the
        // holdout than a two-member blend
        std::vector<std::shared_ptr<models::ForecastModel>> members;
        for (const auto& spec : models::additive_variants(target, "tmax"))
            if (spec.variant_name == "additive_adv_fe")
                members.push_back(std::make_shared<models::AdditiveModel>(spec));
        members.push_back(std::shared_ptr<models::ForecastModel>(
            make_model("gbt_leafwise", target, seed).release()));
        members.push_back(std::make_shared<models::NaiveSeasonalModel>(target, 7));
        return std::make_unique<models::StackingModel>(members, target, 0.25);
    }

    throw std::invalid_argument(
        "unknown model '" + name +
        "'; choose from naive, additive_basic, additive_seasonality, additive_advanced, "
        "additive_adv_fe, lstm, gbt_leafwise, gbt_depthwise, stacking");
}

void write_predictions_csv(const std::string& path, const data::TimeSeriesFrame& frame,
                           std::size_t begin, const std::vector<double>& actual,
                           const std::vector<double>& predicted) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "date,actual,predicted\n";
    char buf[96];
    for (std::size_t i = 0; i < actual.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n",
                      frame.dates[begin + i].to_string().c_str(), actual[i], predicted[i]);
        out << buf;
    }
}

void print_schedule_summary(const sched::SchedulingInstance& inst,
                            const sched::SolveOutcome& outcome, const std::string& method) {
    const auto& sol = *outcome.solution;
    const auto& b = sol.breakdown;
    std::cout << "method: " << method << (outcome.optimal ? " (proven optimal)" : "") << "\n";
    std::cout << "visit order:";
    for (int id : sched::visit_sequence(inst, sol)) std::cout << " " << id;
    std::cout << "\n";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "objective %.6f = time %.4f h + fuel %.4f l + co2 %.4f kg + delay %.4f h\n",
                  b.z, b.makespan_h, b.fuel_l, b.co2_kg, b.delay_emergency_h);
    std::cout << buf;
    std::snprintf(buf, sizeof buf,
                  "all-task delay %.4f h, crew utilization %.2f%%, search nodes %llu\n",
                  b.delay_all_h, b.efficiency_pct,
                  static_cast<unsigned long long>(outcome.nodes));
    std::cout << buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"water network digital twin: demand forecasting and maintenance scheduling"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "flat JSON settings file (see README)");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "write a synthetic consumption and weather pair");
    std::string gen_dir = ".";
    int gen_days = 1460;
    std::uint64_t gen_seed = 42;
    std::string gen_start = "2020-01-01";
    gen->add_option("--out-dir", gen_dir, "directory for consumption.csv and meteo.csv");
    auto* gen_days_opt = gen->add_option("--days", gen_days, "number of days to generate");
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--start", gen_start, "first date, YYYY-MM-DD");

    // correlate
    auto* corr = app.add_subcommand("correlate", "screen weather columns against demand");
    std::string corr_cons, corr_meteo, corr_out;
    std::string corr_target = "consumption_m3";
    corr->add_option("--consumption", corr_cons, "meter export CSV")->required();
    corr->add_option("--meteo", corr_meteo, "weather CSV or JSON")->required();
    corr->add_option("--target", corr_target, "demand column name");
    corr->add_option("--out", corr_out, "write the screen as CSV here");

    // forecast
    auto* fc = app.add_subcommand("forecast", "train one model and score a holdout");
    std::string fc_cons, fc_meteo, fc_out;
    std::string fc_model = "gbt_leafwise";
    std::string fc_target = "consumption_m3";
    int fc_holdout = 183;
    std::uint64_t fc_seed = 42;
    fc->add_option("--consumption", fc_cons, "meter export CSV")->required();
    fc->add_option("--meteo", fc_meteo, "weather CSV or JSON")->required();
    fc->add_option("--model", fc_model, "model name (see README for the list)");
    fc->add_option("--target", fc_target, "demand column name");
    auto* fc_holdout_opt = fc->add_option("--holdout-days", fc_holdout, "trailing days to score");
    auto* fc_seed_opt = fc->add_option("--seed", fc_seed, "random seed");
    fc->add_option("--out", fc_out, "write date,actual,predicted rows here");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "compare every model family on one dataset");
    std::string ev_cons, ev_meteo, ev_dir = ".";
    std::string ev_target = "consumption_m3";
    int ev_holdout = 183;
    std::uint64_t ev_seed = 42;
    std::vector<int> ev_horizons = {7, 30};
    ev->add_option("--consumption", ev_cons, "meter export CSV")->required();
    ev->add_option("--meteo", ev_meteo, "weather CSV or JSON")->required();
    ev->add_option("--target", ev_target, "demand column name");
    auto* ev_holdout_opt = ev->add_option("--holdout-days", ev_holdout, "trailing days to score");
    auto* ev_seed_opt = ev->add_option("--seed", ev_seed, "random seed");
    ev->add_option("--horizons", ev_horizons, "forecast horizons in days");
    ev->add_option("--out-dir", ev_dir, "directory for model_report.csv and model_report.txt");

    // schedule
    auto* sc = app.add_subcommand("schedule", "plan one maintenance day from an instance file");
    std::string sc_instance, sc_out, sc_gantt;
    std::string sc_method = "exact";
    int sc_budget = 60000;
    sc->add_option("--instance", sc_instance, "instance JSON")->required();
    sc->add_option("--method", sc_method, "exact or baseline")
        ->check(CLI::IsMember({"exact", "baseline"}));
    auto* sc_budget_opt = sc->add_option("--budget-ms", sc_budget, "search budget for exact");
    sc->add_option("--out", sc_out, "write the solution JSON here");
    sc->add_option("--gantt", sc_gantt, "write plot-ready segment rows here");

    // compare
    auto* cp = app.add_subcommand("compare",
                                  "benchmark the exact solver against the dispatcher heuristic");
    int cp_runs = 20, cp_tasks = 5, cp_budget = 10000;
    std::uint64_t cp_seed = 42;
    std::string cp_out;
    auto* cp_runs_opt = cp->add_option("--runs", cp_runs, "number of generated days");
    cp->add_option("--tasks", cp_tasks, "tasks per generated day");
    auto* cp_seed_opt = cp->add_option("--seed", cp_seed, "random seed");
    auto* cp_budget_opt = cp->add_option("--budget-ms", cp_budget, "per-day search budget");
    cp->add_option("--out", cp_out, "write the comparison table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input_error;
    }

    try {
        ToolConfig cfg = config_path.empty() ? ToolConfig() : ToolConfig::from_file(config_path);
        auto seed_or_cfg = [&](const CLI::Option* opt, std::uint64_t cli_value) {
            return opt->count() ? cli_value
                                : static_cast<std::uint64_t>(cfg.integer("seed", 42));
        };

        if (app.got_subcommand(gen)) {
            synth::SynthSpec spec;
            spec.start = Date::parse(gen_start);
            spec.n_days = gen_days_opt->count()
                              ? gen_days
                              : static_cast<int>(cfg.integer("days", gen_days));
            spec.seed = seed_or_cfg(gen_seed_opt, gen_seed);
            auto frame = synth::generate_daily(spec);
            fs::create_directories(gen_dir);
            synth::write_consumption_csv(frame, gen_dir + "/consumption.csv", spec);
            synth::write_meteo_csv(frame, gen_dir + "/meteo.csv");
            std::cout << "wrote " << frame.rows() << " days starting " << gen_start << " to "
                      << gen_dir << "/consumption.csv and " << gen_dir << "/meteo.csv\n";
            return exit_ok;
        }

        if (app.got_subcommand(corr)) {
            auto frame = load_joined(corr_cons, corr_meteo, corr_target);
            auto entries = correlate_against(frame, corr_target);
            std::printf("%-16s %10s %8s  %s\n", "column", "r", "pairs", "note");
            for (const auto& e : entries) {
                if (std::isnan(e.r))
                    std::printf("%-16s %10s %8zu  %s\n", e.column.c_str(), "-", e.n_pairs,
                                e.note.c_str());
                else
                    std::printf("%-16s %10.6f %8zu  %s\n", e.column.c_str(), e.r, e.n_pairs,
                                e.note.c_str());
            }
            if (!corr_out.empty()) {
                std::ofstream out(corr_out);
                if (!out) throw std::runtime_error("cannot write " + corr_out);
                out << "column,r,n_pairs,note\n";
                char buf[160];
                for (const auto& e : entries) {
                    if (std::isnan(e.r))
                        std::snprintf(buf, sizeof buf, "%s,,%zu,%s\n", e.column.c_str(),
                                      e.n_pairs, e.note.c_str());
                    else
                        std::snprintf(buf, sizeof buf, "%s,%.6f,%zu,%s\n", e.column.c_str(), e.r,
                                      e.n_pairs, e.note.c_str());
                    out << buf;
                }
            }
            return exit_ok;
        }

        if (app.got_subcommand(fc)) {
            auto frame = load_joined(fc_cons, fc_meteo, fc_target);
            int holdout = fc_holdout_opt->count()
                              ? fc_holdout
                              : static_cast<int>(cfg.integer("holdout_days", fc_holdout));
            if (holdout < 1 || static_cast<std::size_t>(holdout) >= frame.rows())
                throw std::invalid_argument("holdout must leave both training and test rows");
            std::size_t begin = frame.rows() - static_cast<std::size_t>(holdout);

            auto model = make_model(fc_model, fc_target, seed_or_cfg(fc_seed_opt, fc_seed));
            model->train(data::take_rows(frame, 0, begin));
            auto predicted = model->predict(frame, begin, frame.rows());
            const auto& y = frame.column(fc_target);
            std::vector<double> actual(y.begin() + static_cast<std::ptrdiff_t>(begin), y.end());

            auto mape = eval::mape(actual, predicted);
            std::printf("model %s on %d holdout days: mae %.4f rmse %.4f mape %.2f%%\n",
                        model->name().c_str(), holdout, eval::mae(actual, predicted),
                        eval::rmse(actual, predicted), mape.percent);
            if (!fc_out.empty()) write_predictions_csv(fc_out, frame, begin, actual, predicted);
            return exit_ok;
        }

        if (app.got_subcommand(ev)) {
            auto frame = load_joined(ev_cons, ev_meteo, ev_target);
            int holdout = ev_holdout_opt->count()
                              ? ev_holdout
                              : static_cast<int>(cfg.integer("holdout_days", ev_holdout));
            if (holdout < 1 || static_cast<std::size_t>(holdout) >= frame.rows())
                throw std::invalid_argument("holdout must leave both training and test rows");
            std::size_t begin = frame.rows() - static_cast<std::size_t>(holdout);
            std::uint64_t seed = seed_or_cfg(ev_seed_opt, ev_seed);

            std::vector<std::unique_ptr<models::ForecastModel>> owned;
            for (const char* name :
                 {"naive", "additive_basic", "additive_seasonality", "additive_advanced",
                  "additive_adv_fe", "gbt_leafwise", "gbt_depthwise", "lstm", "stacking"})
                owned.push_back(make_model(name, ev_target, seed));
            std::vector<models::ForecastModel*> list;
            for (auto& m : owned) list.push_back(m.get());

            auto rows = eval::compare_models(list, frame, ev_target, begin, ev_horizons);
            fs::create_directories(ev_dir);
            std::ofstream csv(ev_dir + "/model_report.csv");
            if (!csv) throw std::runtime_error("cannot write " + ev_dir + "/model_report.csv");
            eval::write_report_csv(csv, rows);
            std::ofstream txt(ev_dir + "/model_report.txt");
            if (!txt) throw std::runtime_error("cannot write " + ev_dir + "/model_report.txt");
            eval::write_report_table(txt, rows);
            eval::write_report_table(std::cout, rows);
            return exit_ok;
        }

        if (app.got_subcommand(sc)) {
            auto inst = sched::load_instance_file(sc_instance);
            inst.check_acyclic();
            int budget = sc_budget_opt->count()
                             ? sc_budget
                             : static_cast<int>(cfg.integer("budget_ms", sc_budget));
            auto outcome = sc_method == "exact" ? sched::solve_exact(inst, budget)
                                                : sched::solve_baseline(inst);
            if (!outcome.solution) {
                std::cerr << "no feasible schedule: " << outcome.infeasible_reason << "\n";
                return exit_infeasible;
            }
            auto violations = sched::validate(inst, *outcome.solution);
            if (!violations.empty()) {
                for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
                throw std::logic_error("solver produced an invalid schedule");
            }
            print_schedule_summary(inst, outcome, sc_method);
            if (!sc_out.empty()) {
                std::ofstream out(sc_out);
                if (!out) throw std::runtime_error("cannot write " + sc_out);
                out << sched::solution_to_json(inst, *outcome.solution).dump(2) << "\n";
            }
            if (!sc_gantt.empty()) sched::write_gantt_csv(inst, *outcome.solution, sc_gantt);
            return exit_ok;
        }

        if (app.got_subcommand(cp)) {
            sched::InstanceRecipe recipe;
            recipe.n_tasks = cp_tasks;
            int runs = cp_runs_opt->count() ? cp_runs
                                            : static_cast<int>(cfg.integer("runs", cp_runs));
            int budget = cp_budget_opt->count()
                             ? cp_budget
                             : static_cast<int>(cfg.integer("budget_ms", cp_budget));
            std::uint64_t seed = seed_or_cfg(cp_seed_opt, cp_seed);
            auto make = [&](std::uint64_t attempt) {
                return sched::random_instance(seed + attempt, recipe);
            };
            auto report = sched::compare_runs(make, runs, budget);
            std::cout << report.table;
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "mean objective improvement %.2f%% over %zu runs (%d draws replaced)\n",
                          report.mean_z_improvement_pct, report.runs.size(), report.regenerated);
            std::cout << buf;
            if (!cp_out.empty()) {
                std::ofstream out(cp_out);
                if (!out) throw std::runtime_error("cannot write " + cp_out);
                out << report.table << buf;
            }
            return exit_ok;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    return exit_input_error;  // unreachable: a subcommand is required
}
