#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "covihawkes/trainer.hpp"
#include "covihawkes/types.hpp"

namespace covihawkes {

enum class ForecastMode { mean_path, sampled };

struct ForecastDay {
    DayIndex day = 0;             // absolute index continuing the history's day numbering
    double lambda_tilde = 0.0;    // discounted intensity
    double predicted = 0.0;       // point prediction; equals lambda_tilde on the mean path
    double cumulative_predicted = 0.0;
};

struct ForecastOptions {
    ForecastMode mode = ForecastMode::mean_path;
    std::uint64_t seed = 0;
    /// Overrides the recurrent reproduction estimate with an explicit per-day
    /// value; bypasses the network entirely (oracle and monotonicity tests).
    std::optional<std::function<double(DayIndex)>> fixed_reproduction;
};

/// Rolls the model forward day by day past the observed history. Counts for
/// unobserved days feed back the model's own predictions; mobility and
/// vaccination for unobserved days come from the callbacks. The cumulative
/// infected total accumulates the bootstrapped counts, so the susceptible
/// discount keeps tightening, and predictions are capped so infected plus
/// vaccinated never exceed the population.
std::vector<ForecastDay> bootstrap_forecast(
    const HawkesParams& params, const ModelConfig& config, const RegionRecord& history,
    int horizon, const std::function<std::vector<double>(DayIndex)>& future_mobility,
    const std::function<std::int64_t(DayIndex)>& future_vaccinated,
    const ForecastOptions& options = {});

}  // namespace covihawkes
