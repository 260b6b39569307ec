#include "covihawkes/evaluate.hpp"

#include <cmath>
#include <stdexcept>

#include "covihawkes/csv.hpp"
#include "covihawkes/forecast.hpp"
#include "covihawkes/parallel.hpp"
#include "covihawkes/trainer.hpp"

namespace covihawkes {

std::vector<Interval> make_intervals(DayIndex start, int span, int window) {
    if (window < 1) throw std::invalid_argument("window must be positive");
    if (span < 1) throw std::invalid_argument("span must be positive");
    if (window > span) {
        throw std::invalid_argument("window " + std::to_string(window) + " exceeds span " +
                                    std::to_string(span));
    }
    std::vector<Interval> intervals;
    for (int i = 1; 7 * (i - 1) + window <= span; ++i) {
        intervals.push_back(Interval{i, start + 7 * (i - 1), window});
    }
    return intervals;
}

ValidationPlan ValidationPlan::make(DayIndex start, int span, int window) {
    ValidationPlan plan;
    plan.start = start;
    plan.span = span;
    plan.window = window;
    plan.intervals = make_intervals(start, span, window);
    return plan;
}

double mape(std::span<const std::int64_t> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw std::invalid_argument("mape: series lengths differ");
    }
    double actual_sum = 0.0;
    double predicted_sum = 0.0;
    for (const std::int64_t a : actual) actual_sum += static_cast<double>(a);
    for (const double p : predicted) predicted_sum += p;
    if (actual_sum <= 0.0) {
        throw std::domain_error("mape undefined: actual counts sum to zero");
    }
    return std::abs(actual_sum - predicted_sum) / actual_sum * 100.0;
}

IntervalForecaster default_interval_forecaster() {
    return [](const RegionRecord& record, const ModelConfig& config, const Interval& interval) {
        const RegionRecord train = record.prefix(interval.start - 1);
        const TrainReport report = fit(train, config);
        ForecastOptions options;
        options.mode = ForecastMode::mean_path;
        const std::vector<ForecastDay> days = bootstrap_forecast(
            report.final_params, config, train, interval.width,
            [&record](DayIndex u) { return record.mobility_at(u); },
            [&record](DayIndex u) { return record.vaccinated_at(u); }, options);
        std::vector<double> predictions;
        predictions.reserve(days.size());
        for (const ForecastDay& day : days) predictions.push_back(day.predicted);
        return predictions;
    };
}

ValidationReport rolling_validate(const RegionRecord& record, const ModelConfig& config,
                                  const ValidationPlan& plan, int workers,
                                  IntervalForecaster forecaster) {
    if (plan.intervals.empty()) {
        throw std::invalid_argument("validation plan holds no intervals");
    }
    const DayIndex train_len = plan.start - 1;
    if (train_len < first_scored_day(config) + 1) {
        throw std::out_of_range("validation start " + std::to_string(plan.start) +
                                " leaves too little training history (need " +
                                std::to_string(first_scored_day(config) + 1) + " days)");
    }
    if (plan.intervals.back().last() > record.length()) {
        throw std::out_of_range("validation plan extends past the observed range");
    }
    if (!forecaster) forecaster = default_interval_forecaster();

    ValidationReport report;
    report.window = plan.window;
    report.per_interval.resize(plan.intervals.size());
    const int n = static_cast<int>(plan.intervals.size());
    parallel_for(n, workers, [&](int i) {
        const Interval& interval = plan.intervals[static_cast<std::size_t>(i)];
        const std::vector<double> predictions = forecaster(record, config, interval);
        if (static_cast<int>(predictions.size()) != interval.width) {
            throw std::runtime_error("forecaster returned " + std::to_string(predictions.size()) +
                                     " predictions for a " + std::to_string(interval.width) +
                                     "-day interval");
        }
        const auto offset = static_cast<std::size_t>(interval.start) - 1;
        const std::span<const std::int64_t> actual(record.cases.data() + offset,
                                                   static_cast<std::size_t>(interval.width));
        IntervalScore score;
        score.index = interval.index;
        score.start = interval.start;
        score.end = interval.last();
        for (const std::int64_t a : actual) score.actual_sum += a;
        for (const double p : predictions) score.predicted_sum += p;
        if (score.actual_sum == 0) {
            score.skipped = true;
        } else {
            score.psi = mape(actual, predictions);
        }
        report.per_interval[static_cast<std::size_t>(i)] = std::move(score);
    });

    double total = 0.0;
    for (const IntervalScore& score : report.per_interval) {
        if (score.skipped) {
            ++report.skipped;
        } else {
            total += score.psi;
            ++report.evaluated;
        }
    }
    report.aggregate = report.evaluated > 0 ? total / report.evaluated : 0.0;
    return report;
}

void write_validation_csv(std::ostream& out, std::span<const ValidationReport> reports) {
    out << "window,interval_index,start_day,end_day,actual_sum,predicted_sum,mape\n";
    for (const ValidationReport& report : reports) {
        for (const IntervalScore& score : report.per_interval) {
            out << report.window << ',' << score.index << ',' << score.start << ',' << score.end
                << ',' << score.actual_sum << ',' << fixed6(score.predicted_sum) << ',';
            if (score.skipped) {
                out << "skipped";
            } else {
                out << fixed6(score.psi);
            }
            out << '\n';
        }
        out << report.window << ",summary,,,,," << fixed6(report.aggregate) << '\n';
    }
}

}  // namespace covihawkes
