#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "covihawkes/forecast.hpp"
#include "covihawkes/types.hpp"

namespace covihawkes {

/// Per-weekday average mobility vectors taken from one historical interval.
/// Weekday indices are 1..7 with 1 = Sunday.
struct ScenarioTable {
    std::string name;
    std::array<std::vector<double>, 7> weekday_mobility;  // slot k holds weekday k+1
    Date interval_start;
    Date interval_end;
    std::vector<std::string> warnings;

    const std::vector<double>& for_weekday(int weekday1) const;
    const std::vector<double>& for_date(const Date& date) const;
};

/// Averages the record's mobility vectors by weekday over the given calendar
/// interval (clipped to the observed range). A weekday absent from the
/// interval borrows the all-days mean, with a warning. Throws
/// std::out_of_range when the interval misses the observed history entirely.
ScenarioTable weekday_mobility(const RegionRecord& record, const Date& from, const Date& to,
                               const std::string& name);

struct ScenarioPreset {
    std::string name;
    Date start;
    Date end;
};

/// The four built-in mobility regimes with their historical date ranges.
std::vector<ScenarioPreset> builtin_presets();

struct LongForecast {
    std::string scenario;
    ForecastMode mode = ForecastMode::mean_path;
    std::uint64_t seed = 0;
    Date first_date;  // calendar date of the first forecast day
    std::vector<ForecastDay> series;
};

/// Day-by-day forecast past the record's end. Mobility for unobserved days
/// comes from the scenario table by weekday; vaccination holds at its last
/// observed value; counts bootstrap the model's own predictions.
LongForecast long_forecast(const HawkesParams& params, const ModelConfig& config,
                           const RegionRecord& record, const ScenarioTable& table, int horizon,
                           const ForecastOptions& options = {});

/// CSV: date,scenario,lambda_tilde,predicted_count,cumulative_predicted
void write_forecast_csv(std::ostream& out, const LongForecast& forecast);

/// Plot-data file: date,value pairs of the predicted counts.
void write_plot_data(std::ostream& out, const LongForecast& forecast);

}  // namespace covihawkes
