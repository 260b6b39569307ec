#include "covihawkes/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "covihawkes/hawkes.hpp"
#include "covihawkes/rng.hpp"

namespace covihawkes {

std::vector<ForecastDay> bootstrap_forecast(
    const HawkesParams& params, const ModelConfig& config, const RegionRecord& history,
    int horizon, const std::function<std::vector<double>(DayIndex)>& future_mobility,
    const std::function<std::int64_t(DayIndex)>& future_vaccinated,
    const ForecastOptions& options) {
    config.validate();
    if (horizon < 1) {
        throw std::invalid_argument("forecast horizon must be positive");
    }
    const DayIndex T0 = history.length();
    const int L = config.lag_window;
    if (T0 < 2 * L + config.incubation_gap) {
        throw std::out_of_range("history has " + std::to_string(T0) + " days; warm start needs " +
                                std::to_string(2 * L + config.incubation_gap));
    }

    std::vector<double> predicted;  // bootstrapped counts for days T0+1..
    predicted.reserve(static_cast<std::size_t>(horizon));

    const auto count_at = [&](DayIndex u) -> double {
        return u <= T0 ? static_cast<double>(history.cases[static_cast<std::size_t>(u) - 1])
                       : predicted[static_cast<std::size_t>(u - T0) - 1];
    };
    const auto mobility_at = [&](DayIndex u) -> std::vector<double> {
        return u <= T0 ? history.mobility[static_cast<std::size_t>(u) - 1] : future_mobility(u);
    };
    const auto vaccinated_at = [&](DayIndex u) -> std::int64_t {
        return u <= T0 ? history.vaccinated[static_cast<std::size_t>(u) - 1]
                       : future_vaccinated(u);
    };

    // reproduction values for days first_r .. T0+horizon-1, filled in order
    const DayIndex first_r = T0 + 1 - L;
    std::vector<double> r_values;
    r_values.reserve(static_cast<std::size_t>(L + horizon - 1));
    const LstmState init = LstmState::zeros(config.hidden);
    const auto extend_r_through = [&](DayIndex s_last) {
        for (DayIndex s = first_r + static_cast<DayIndex>(r_values.size()); s <= s_last; ++s) {
            if (options.fixed_reproduction) {
                r_values.push_back((*options.fixed_reproduction)(s));
                continue;
            }
            const FeatureWindow window =
                build_features(mobility_at, count_at, history.population, s, config);
            const LstmState state = lstm_forward(window, params.lstm, init);
            r_values.push_back(reproduction(state, params.head));
        }
    };

    const std::vector<double> w = params.lags.weights();
    if (static_cast<int>(w.size()) != L) {
        throw std::invalid_argument("lag weight count does not match the configured window");
    }
    const double mu = params.base.mu();
    const double population = static_cast<double>(history.population);

    double cumulative_before = 0.0;  // all counts strictly before the current day
    for (const std::int64_t c : history.cases) cumulative_before += static_cast<double>(c);
    double cumulative_predicted = 0.0;

    std::mt19937_64 rng(options.seed);
    std::vector<ForecastDay> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int k = 1; k <= horizon; ++k) {
        const DayIndex t = T0 + k;
        extend_r_through(t - 1);

        double excitation = 0.0;
        for (int j = 0; j < L; ++j) {
            const DayIndex day = t - L + j;
            excitation += w[static_cast<std::size_t>(j)] *
                          r_values[static_cast<std::size_t>(day - first_r)] * count_at(day);
        }
        const double lambda = mu + excitation;

        const double v_prev = static_cast<double>(vaccinated_at(t - 1));
        const double susceptible =
            std::clamp(1.0 - (cumulative_before + v_prev) / population, 0.0, 1.0);
        const double lambda_tilde = susceptible * lambda;

        const std::int64_t v_today = future_vaccinated(t);
        const double room =
            std::max(0.0, population - cumulative_before - static_cast<double>(v_today));
        double point;
        if (options.mode == ForecastMode::sampled) {
            point = static_cast<double>(poisson_sample(lambda_tilde, rng));
        } else {
            point = lambda_tilde;
        }
        if (point > room) point = room;

        predicted.push_back(point);
        cumulative_before += point;
        cumulative_predicted += point;
        out.push_back(ForecastDay{t, lambda_tilde, point, cumulative_predicted});
    }
    return out;
}

}  // namespace covihawkes
