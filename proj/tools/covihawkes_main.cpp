// covihawkes: daily count forecasting with a self-exciting model whose
// reproduction number is driven by mobility. Subcommands cover synthetic
// data generation, per-region training, rolling-origin validation, and
// scenario-conditioned long-horizon forecasting.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "covihawkes/csv.hpp"
#include "covihawkes/errors.hpp"
#include "covihawkes/evaluate.hpp"
#include "covihawkes/ingest.hpp"
#include "covihawkes/model_io.hpp"
#include "covihawkes/parallel.hpp"
#include "covihawkes/rng.hpp"
#include "covihawkes/scenario.hpp"
#include "covihawkes/synth.hpp"
#include "covihawkes/trainer.hpp"

namespace {

namespace ch = covihawkes;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct DataPaths {
    std::string data_dir;
    std::string cases, mobility, vaccination, population, regions;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--data-dir", data_dir,
                        "Directory holding cases.csv, mobility.csv, vaccination.csv, "
                        "population.csv, regions.csv");
        cmd->add_option("--cases", cases, "cases.csv path");
        cmd->add_option("--mobility", mobility, "mobility.csv path");
        cmd->add_option("--vaccination", vaccination, "vaccination.csv path");
        cmd->add_option("--population", population, "population.csv path");
        cmd->add_option("--regions", regions, "regions.csv path");
    }

    void resolve() {
        const auto fallback = [&](std::string& path, const char* name) {
            if (path.empty() && !data_dir.empty()) path = (fs::path(data_dir) / name).string();
        };
        fallback(cases, "cases.csv");
        fallback(mobility, "mobility.csv");
        fallback(vaccination, "vaccination.csv");
        fallback(population, "population.csv");
        fallback(regions, "regions.csv");
        for (const auto& [path, flag] :
             {std::pair{cases, "--cases"}, {mobility, "--mobility"},
              {vaccination, "--vaccination"}, {population, "--population"},
              {regions, "--regions"}}) {
            if (path.empty()) {
                throw CLI::ValidationError(std::string(flag) + " (or --data-dir) is required");
            }
            if (!fs::exists(path)) {
                throw CLI::ValidationError("path not found: " + path);
            }
        }
    }

    ch::DatasetBundle load() const {
        return ch::load_bundle(cases, mobility, vaccination, population, regions);
    }
};

struct ConfigFlags {
    ch::ModelConfig config;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--lag-window", config.lag_window, "Days of excitation history (L)")
            ->capture_default_str();
        cmd->add_option("--incubation-gap", config.incubation_gap,
                        "Extra lag on mobility features, days")
            ->capture_default_str();
        cmd->add_option("--hidden", config.hidden, "Recurrent hidden size")
            ->capture_default_str();
        cmd->add_option("--learning-rate", config.learning_rate, "Optimizer step size")
            ->capture_default_str();
        cmd->add_option("--max-iters", config.max_iterations, "Optimizer iteration budget")
            ->capture_default_str();
        cmd->add_option("--tolerance", config.tolerance,
                        "Relative objective change treated as no progress")
            ->capture_default_str();
        cmd->add_option("--patience", config.patience,
                        "No-progress iterations before stopping")
            ->capture_default_str();
        cmd->add_option("--seed", config.seed, "Training seed")
            ->envname("COVIHAWKES_SEED")
            ->capture_default_str();
    }
};

struct RegionSelect {
    std::vector<std::string> ids;
    std::string level;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--region", ids, "Region id to process (repeatable)");
        cmd->add_option("--regions-level", level,
                        "Process every region at this level (nation|state|district)")
            ->check(CLI::IsMember({"nation", "state", "district"}));
    }

    std::vector<std::string> resolve(const ch::DatasetBundle& bundle) const {
        if (!ids.empty() && !level.empty()) {
            throw CLI::ValidationError("use either --region or --regions-level, not both");
        }
        if (ids.empty() && level.empty()) {
            throw CLI::ValidationError("select regions with --region or --regions-level");
        }
        std::vector<std::string> selected;
        if (!level.empty()) {
            selected = bundle.region_ids(ch::region_level_from_string(level));
            if (selected.empty()) {
                throw ch::UnknownRegionError("no regions at level '" + level + "' in the dataset");
            }
        } else {
            for (const std::string& id : ids) {
                bundle.at(id);  // throws UnknownRegionError
                selected.push_back(id);
            }
        }
        return selected;
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_train(const DataPaths& paths, const ConfigFlags& flags, const RegionSelect& select,
              const std::string& output_dir, int workers) {
    const ch::DatasetBundle bundle = paths.load();
    print_warnings(bundle.warnings);
    const std::vector<std::string> regions = select.resolve(bundle);
    fs::create_directories(output_dir);

    struct RowResult {
        std::string region;
        ch::TrainReport report;
        std::string error;
    };
    std::vector<RowResult> results(regions.size());

    ch::parallel_for(static_cast<int>(regions.size()), workers, [&](int i) {
        const auto idx = static_cast<std::size_t>(i);
        results[idx].region = regions[idx];
        try {
            const ch::RegionRecord& record = bundle.at(regions[idx]);
            results[idx].report = ch::fit(record, flags.config);
            ch::save_model(fs::path(output_dir) / ("model_" + regions[idx] + ".json"),
                           ch::ModelFile{regions[idx], flags.config,
                                         results[idx].report.final_params});
        } catch (const std::exception& e) {
            results[idx].error = e.what();
        }
    });

    std::ofstream summary(fs::path(output_dir) / "train_summary.csv");
    summary << "region,iterations,converged,final_nll\n";
    bool failed = false;
    for (const RowResult& row : results) {
        if (!row.error.empty()) {
            failed = true;
            std::cerr << "error: region " << row.region << ": " << row.error << "\n";
            continue;
        }
        summary << row.region << ',' << row.report.iterations_run << ','
                << (row.report.converged ? 1 : 0) << ','
                << ch::fixed6(row.report.nll_trace.back()) << '\n';
        std::cout << "trained " << row.region << ": iterations " << row.report.iterations_run
                  << (row.report.converged ? " (converged)" : " (budget)") << ", nll "
                  << ch::fixed6(row.report.nll_trace.back()) << "\n";
    }
    return failed ? kExitRuntime : kExitOk;
}

int run_validate(const DataPaths& paths, const ConfigFlags& flags, const RegionSelect& select,
                 const std::string& output_dir, int workers, std::vector<int> windows, int span,
                 int validation_start) {
    const ch::DatasetBundle bundle = paths.load();
    print_warnings(bundle.warnings);
    const std::vector<std::string> regions = select.resolve(bundle);
    fs::create_directories(output_dir);
    if (windows.empty()) windows = {7, 14, 28};
    for (const int w : windows) {
        if (w > span) {
            throw CLI::ValidationError("window " + std::to_string(w) + " exceeds span " +
                                       std::to_string(span));
        }
    }

    for (const std::string& id : regions) {
        const ch::RegionRecord& record = bundle.at(id);
        const ch::DayIndex start =
            validation_start > 0 ? validation_start : record.length() - span + 1;
        std::vector<ch::ValidationReport> reports;
        reports.reserve(windows.size());
        for (const int w : windows) {
            const ch::ValidationPlan plan = ch::ValidationPlan::make(start, span, w);
            reports.push_back(ch::rolling_validate(record, flags.config, plan, workers));
            std::cout << id << ": E(" << w << ") = " << ch::fixed6(reports.back().aggregate)
                      << " over " << reports.back().evaluated << " intervals";
            if (reports.back().skipped > 0) {
                std::cout << " (" << reports.back().skipped << " skipped)";
            }
            std::cout << "\n";
        }
        std::ofstream out(fs::path(output_dir) / ("validation_" + id + ".csv"));
        ch::write_validation_csv(out, reports);
    }
    return kExitOk;
}

int run_scenario(const DataPaths& paths, const std::string& model_path,
                 const std::string& output_dir, std::vector<std::string> presets,
                 const std::vector<std::string>& custom_interval, int horizon,
                 const std::string& mode_name, std::optional<std::uint64_t> seed,
                 bool plot_data) {
    const ch::ModelFile model = ch::load_model(model_path);
    const ch::DatasetBundle bundle = paths.load();
    print_warnings(bundle.warnings);
    const ch::RegionRecord& record = bundle.at(model.region);

    struct Request {
        std::string name;
        ch::Date start, end;
    };
    std::vector<Request> requests;
    const std::vector<ch::ScenarioPreset> known = ch::builtin_presets();
    for (const std::string& name : presets) {
        const auto it = std::find_if(known.begin(), known.end(),
                                     [&](const ch::ScenarioPreset& p) { return p.name == name; });
        if (it == known.end()) {
            throw CLI::ValidationError("unknown preset '" + name + "'");
        }
        requests.push_back(Request{it->name, it->start, it->end});
    }
    if (!custom_interval.empty()) {
        requests.push_back(Request{"custom", ch::Date::parse_iso(custom_interval[0]),
                                   ch::Date::parse_iso(custom_interval[1])});
    }
    if (requests.empty()) {
        throw CLI::ValidationError("request at least one --preset or a --custom-interval");
    }

    const ch::Date observed_first = record.start_date;
    const ch::Date observed_last = record.date_of(record.length());
    for (const Request& req : requests) {
        if (req.start < observed_first || observed_last < req.end) {
            throw std::out_of_range("scenario '" + req.name + "' needs mobility for " +
                                    req.start.to_iso() + ".." + req.end.to_iso() +
                                    " but the dataset covers " + observed_first.to_iso() + ".." +
                                    observed_last.to_iso());
        }
    }

    ch::ForecastOptions options;
    options.mode = mode_name == "sample" ? ch::ForecastMode::sampled : ch::ForecastMode::mean_path;
    options.seed = seed.value_or(model.config.seed);

    fs::create_directories(output_dir);
    for (const Request& req : requests) {
        const ch::ScenarioTable table = ch::weekday_mobility(record, req.start, req.end, req.name);
        print_warnings(table.warnings);
        const ch::LongForecast forecast =
            ch::long_forecast(model.params, model.config, record, table, horizon, options);
        std::ofstream out(fs::path(output_dir) / ("scenario_" + req.name + ".csv"));
        ch::write_forecast_csv(out, forecast);
        if (plot_data) {
            std::ofstream plot(fs::path(output_dir) / ("scenario_" + req.name + "_plot.csv"));
            ch::write_plot_data(plot, forecast);
        }
        std::cout << "scenario " << req.name << ": " << horizon << " days, final cumulative "
                  << ch::fixed6(forecast.series.back().cumulative_predicted) << "\n";
    }
    return kExitOk;
}

int run_synth(const std::string& out_dir, int days, int states, int districts, double mu,
              double r0, const std::vector<std::string>& r_pieces, double weight_decay,
              int lag_window, std::int64_t population, double vax_rate, double mobility_amplitude,
              std::uint64_t seed, const std::string& start_date) {
    ch::SynthWorldSpec world;
    world.states = states;
    world.districts = districts;
    world.mobility_amplitude = mobility_amplitude;
    world.base.mu_true = mu;
    world.base.horizon = days;
    world.base.population = population;
    world.base.seed = seed;
    world.base.start_date = ch::Date::parse_iso(start_date);

    if (weight_decay <= 0.0 || weight_decay > 1.0) {
        throw CLI::ValidationError("--weight-decay must be in (0, 1]");
    }
    world.base.weights_true.resize(static_cast<std::size_t>(lag_window));
    double total = 0.0;
    for (int j = 0; j < lag_window; ++j) {
        // geometric decay toward older lags; the last entry is the newest day
        const double v = std::pow(weight_decay, static_cast<double>(lag_window - 1 - j));
        world.base.weights_true[static_cast<std::size_t>(j)] = v;
        total += v;
    }
    for (double& v : world.base.weights_true) v /= total;

    world.base.r_schedule.assign(static_cast<std::size_t>(days), r0);
    for (const std::string& piece : r_pieces) {
        const auto colon = piece.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--r-piece expects DAY:VALUE, got '" + piece + "'");
        }
        const int day = std::stoi(piece.substr(0, colon));
        const double value = std::stod(piece.substr(colon + 1));
        if (day < 1 || day > days || value < 0.0) {
            throw CLI::ValidationError("--r-piece outside range: '" + piece + "'");
        }
        for (int t = day; t <= days; ++t) {
            world.base.r_schedule[static_cast<std::size_t>(t) - 1] = value;
        }
    }

    if (vax_rate < 0.0 || vax_rate >= 1.0) {
        throw CLI::ValidationError("--vax-rate must be in [0, 1)");
    }
    if (vax_rate > 0.0) {
        world.base.vaccination.resize(static_cast<std::size_t>(days));
        for (int t = 1; t <= days; ++t) {
            world.base.vaccination[static_cast<std::size_t>(t) - 1] = static_cast<std::int64_t>(
                vax_rate * static_cast<double>(population) * static_cast<double>(t));
        }
    }

    const ch::DatasetBundle bundle = ch::build_synth_world(world);
    ch::write_bundle_csvs(bundle, out_dir);
    std::cout << "wrote synthetic world (" << bundle.records.size() << " regions, " << days
              << " days) to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Daily count forecasting with a mobility-driven self-exciting model"};
    app.require_subcommand(1);

    DataPaths paths;
    ConfigFlags flags;
    RegionSelect select;
    std::string output_dir = "out";
    int workers = 1;

    // train
    auto* train = app.add_subcommand("train", "Fit one model per selected region");
    paths.add_options(train);
    flags.add_options(train);
    select.add_options(train);
    train->add_option("--output-dir", output_dir, "Output directory")->capture_default_str();
    train->add_option("--workers", workers, "Parallel region fits")->capture_default_str();

    // validate
    std::vector<int> windows;
    int span = 84;
    int validation_start = 0;
    auto* validate = app.add_subcommand(
        "validate", "Rolling-origin validation: refit before each interval, score its error");
    paths.add_options(validate);
    flags.add_options(validate);
    select.add_options(validate);
    validate->add_option("--windows", windows, "Forecast window sizes (default 7,14,28)")
        ->delimiter(',');
    validate->add_option("--span", span, "Validation period length, days")->capture_default_str();
    validate->add_option("--validation-start", validation_start,
                         "First day of the validation period (default: last span days)");
    validate->add_option("--output-dir", output_dir, "Output directory")->capture_default_str();
    validate->add_option("--workers", workers, "Parallel interval fits")->capture_default_str();

    // scenario
    std::string model_path;
    std::vector<std::string> presets;
    std::vector<std::string> custom_interval;
    int horizon = 120;
    std::string mode_name = "mean";
    std::optional<std::uint64_t> scenario_seed;
    bool plot_data = false;
    auto* scenario = app.add_subcommand(
        "scenario", "Long-horizon forecast under a historical mobility regime "
                    "(weekday indices use 1 = Sunday)");
    paths.add_options(scenario);
    scenario->add_option("--model", model_path, "Trained model file")->required();
    scenario->add_option("--preset", presets,
                         "Built-in mobility regime: strict|unlock7|none|current (repeatable)");
    scenario
        ->add_option("--custom-interval", custom_interval,
                     "Custom historical interval: START END (ISO dates)")
        ->expected(2);
    scenario->add_option("--horizon", horizon, "Forecast length, days")->capture_default_str();
    scenario->add_option("--mode", mode_name, "mean|sample")
        ->check(CLI::IsMember({"mean", "sample"}))
        ->capture_default_str();
    scenario->add_option("--seed", scenario_seed, "Sampling seed (default: training seed)")
        ->envname("COVIHAWKES_SEED");
    scenario->add_flag("--plot-data", plot_data, "Also write per-scenario plot-data files");
    scenario->add_option("--output-dir", output_dir, "Output directory")->capture_default_str();

    // synth
    std::string synth_out = "synth";
    int days = 200;
    int states = 1;
    int districts = 3;
    double mu = 3.0;
    double r0 = 0.95;
    std::vector<std::string> r_pieces;
    double weight_decay = 0.6;
    int synth_lag = 7;
    std::int64_t population = 10'000'000;
    double vax_rate = 0.0001;
    double mobility_amplitude = 15.0;
    std::uint64_t synth_seed = 42;
    std::string start_date = "2020-03-02";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic world in the input schemas");
    synth->add_option("--out-dir", synth_out, "Directory for the five CSVs")
        ->capture_default_str();
    synth->add_option("--days", days, "Series length")->capture_default_str();
    synth->add_option("--states", states, "State count")->capture_default_str();
    synth->add_option("--districts", districts, "District count (round-robin across states)")
        ->capture_default_str();
    synth->add_option("--mu", mu, "True base rate per district")->capture_default_str();
    synth->add_option("--r0", r0, "Constant true reproduction number")->capture_default_str();
    synth->add_option("--r-piece", r_pieces, "Override reproduction from DAY onward (DAY:VALUE)");
    synth->add_option("--weight-decay", weight_decay,
                      "Geometric decay of true lag weights toward older days")
        ->capture_default_str();
    synth->add_option("--lag-window", synth_lag, "True lag window length")->capture_default_str();
    synth->add_option("--population", population, "Population per district")
        ->capture_default_str();
    synth->add_option("--vax-rate", vax_rate, "Daily vaccinated fraction of the population")
        ->capture_default_str();
    synth->add_option("--mobility-amplitude", mobility_amplitude,
                      "Weekly mobility sinusoid amplitude")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "World seed")
        ->envname("COVIHAWKES_SEED")
        ->capture_default_str();
    synth->add_option("--start-date", start_date, "First calendar date")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) {
            paths.resolve();
            return run_train(paths, flags, select, output_dir, workers);
        }
        if (validate->parsed()) {
            paths.resolve();
            return run_validate(paths, flags, select, output_dir, workers, windows, span,
                                validation_start);
        }
        if (scenario->parsed()) {
            paths.resolve();
            return run_scenario(paths, model_path, output_dir, presets, custom_interval, horizon,
                                mode_name, scenario_seed, plot_data);
        }
        if (synth->parsed()) {
            return run_synth(synth_out, days, states, districts, mu, r0, r_pieces, weight_decay,
                             synth_lag, population, vax_rate, mobility_amplitude, synth_seed,
                             start_date);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ch::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ch::DataConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ch::UnknownRegionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
