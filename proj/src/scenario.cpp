#include "covihawkes/scenario.hpp"

#include <algorithm>
#include <stdexcept>

#include "covihawkes/csv.hpp"

namespace covihawkes {

const std::vector<double>& ScenarioTable::for_weekday(int weekday1) const {
    if (weekday1 < 1 || weekday1 > 7) {
        throw std::out_of_range("weekday index must be in 1..7");
    }
    return weekday_mobility[static_cast<std::size_t>(weekday1) - 1];
}

const std::vector<double>& ScenarioTable::for_date(const Date& date) const {
    return for_weekday(date.weekday1());
}

ScenarioTable weekday_mobility(const RegionRecord& record, const Date& from, const Date& to,
                               const std::string& name) {
    if (to < from) {
        throw std::invalid_argument("scenario interval ends before it starts");
    }
    const Date observed_first = record.start_date;
    const Date observed_last = record.date_of(record.length());
    if (to < observed_first || observed_last < from) {
        throw std::out_of_range("scenario interval " + from.to_iso() + ".." + to.to_iso() +
                                " lies outside the observed history " + observed_first.to_iso() +
                                ".." + observed_last.to_iso());
    }
    const Date lo = from < observed_first ? observed_first : from;
    const Date hi = observed_last < to ? observed_last : to;

    const std::size_t dim = record.mobility.front().size();
    std::array<std::vector<double>, 7> sums;
    std::array<int, 7> counts{};
    sums.fill(std::vector<double>(dim, 0.0));
    std::vector<double> overall(dim, 0.0);
    int total_days = 0;

    for (Date date = lo; date <= hi; date = date + 1) {
        const auto idx = static_cast<std::size_t>(record.day_of(date)) - 1;
        const auto slot = static_cast<std::size_t>(date.weekday1()) - 1;
        for (std::size_t k = 0; k < dim; ++k) {
            sums[slot][k] += record.mobility[idx][k];
            overall[k] += record.mobility[idx][k];
        }
        ++counts[slot];
        ++total_days;
    }
    for (std::size_t k = 0; k < dim; ++k) overall[k] /= total_days;

    ScenarioTable table;
    table.name = name;
    table.interval_start = lo;
    table.interval_end = hi;
    for (int weekday = 0; weekday < 7; ++weekday) {
        const auto slot = static_cast<std::size_t>(weekday);
        if (counts[slot] == 0) {
            table.weekday_mobility[slot] = overall;
            table.warnings.push_back("scenario " + name + ": weekday " +
                                     std::to_string(weekday + 1) +
                                     " absent from interval; using the all-days mean");
            continue;
        }
        table.weekday_mobility[slot] = sums[slot];
        for (double& v : table.weekday_mobility[slot]) v /= counts[slot];
    }
    return table;
}

std::vector<ScenarioPreset> builtin_presets() {
    return {
        ScenarioPreset{"strict", Date(2020, 3, 25), Date(2020, 4, 14)},
        ScenarioPreset{"unlock7", Date(2020, 12, 13), Date(2020, 12, 19)},
        ScenarioPreset{"none", Date(2020, 2, 15), Date(2020, 3, 3)},
        ScenarioPreset{"current", Date(2021, 8, 13), Date(2021, 8, 19)},
    };
}

LongForecast long_forecast(const HawkesParams& params, const ModelConfig& config,
                           const RegionRecord& record, const ScenarioTable& table, int horizon,
                           const ForecastOptions& options) {
    const std::int64_t last_vaccinated =
        record.vaccinated.empty() ? 0 : record.vaccinated.back();
    LongForecast forecast;
    forecast.scenario = table.name;
    forecast.mode = options.mode;
    forecast.seed = options.seed;
    forecast.first_date = record.date_of(record.length()) + 1;
    forecast.series = bootstrap_forecast(
        params, config, record, horizon,
        [&record, &table](DayIndex u) { return table.for_date(record.date_of(u)); },
        [last_vaccinated](DayIndex) { return last_vaccinated; }, options);
    return forecast;
}

void write_forecast_csv(std::ostream& out, const LongForecast& forecast) {
    out << "date,scenario,lambda_tilde,predicted_count,cumulative_predicted\n";
    const DayIndex first_day = forecast.series.empty() ? 0 : forecast.series.front().day;
    for (const ForecastDay& day : forecast.series) {
        out << (forecast.first_date + (day.day - first_day)).to_iso() << ',' << forecast.scenario
            << ',' << fixed6(day.lambda_tilde) << ',' << fixed6(day.predicted) << ','
            << fixed6(day.cumulative_predicted) << '\n';
    }
}

void write_plot_data(std::ostream& out, const LongForecast& forecast) {
    out << "date,value\n";
    const DayIndex first_day = forecast.series.empty() ? 0 : forecast.series.front().day;
    for (const ForecastDay& day : forecast.series) {
        out << (forecast.first_date + (day.day - first_day)).to_iso() << ','
            << fixed6(day.predicted) << '\n';
    }
}

}  // namespace covihawkes
