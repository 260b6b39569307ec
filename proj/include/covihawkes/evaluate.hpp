#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "covihawkes/types.hpp"

namespace covihawkes {

struct Interval {
    int index = 0;       // 1-based
    DayIndex start = 0;  // first day
    int width = 0;
    DayIndex last() const { return start + width - 1; }
};

/// Overlapping validation intervals at stride 7: interval i covers days
/// start + 7(i-1) .. start + 7(i-1) + window - 1, for as many i as fit
/// inside the span.
std::vector<Interval> make_intervals(DayIndex start, int span, int window);

struct ValidationPlan {
    DayIndex start = 0;  // first day of the validation period
    int span = 84;
    int window = 7;
    std::vector<Interval> intervals;

    static ValidationPlan make(DayIndex start, int span, int window);
};

/// Interval-summed absolute percentage error:
/// |sum(actual) - sum(predicted)| / sum(actual) * 100.
/// Throws std::domain_error when the actual sum is zero.
double mape(std::span<const std::int64_t> actual, std::span<const double> predicted);

struct IntervalScore {
    int index = 0;
    DayIndex start = 0;
    DayIndex end = 0;
    std::int64_t actual_sum = 0;
    double predicted_sum = 0.0;
    double psi = 0.0;
    bool skipped = false;  // zero actual sum: excluded from the aggregate
};

struct ValidationReport {
    int window = 0;
    std::vector<IntervalScore> per_interval;
    double aggregate = 0.0;  // mean psi over evaluated intervals
    int evaluated = 0;
    int skipped = 0;
};

/// Produces the predictions for one interval given the full record; the
/// default implementation re-fits on all data before the interval start and
/// bootstraps the interval. Tests substitute oracles here.
using IntervalForecaster = std::function<std::vector<double>(
    const RegionRecord& record, const ModelConfig& config, const Interval& interval)>;

IntervalForecaster default_interval_forecaster();

/// For each interval in the plan: train a fresh model on data strictly
/// before the interval, forecast the interval (observed mobility and
/// vaccination, bootstrapped counts), and score it. Intervals run in
/// parallel across `workers` threads; the report is independent of
/// completion order.
ValidationReport rolling_validate(const RegionRecord& record, const ModelConfig& config,
                                  const ValidationPlan& plan, int workers = 1,
                                  IntervalForecaster forecaster = {});

/// CSV report: one row per interval plus a summary row per window.
void write_validation_csv(std::ostream& out, std::span<const ValidationReport> reports);

}  // namespace covihawkes
