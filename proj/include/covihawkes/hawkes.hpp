#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace covihawkes {

/// Discounted intensities are clamped here before entering the likelihood so
/// a fully saturated population cannot produce log(0).
inline constexpr double kLambdaFloor = 1e-8;

/// ln(1 + exp(x)), overflow-safe.
double softplus(double x);

/// Logistic function, overflow-safe. Also the derivative of softplus.
double sigmoid(double x);

/// Numerically stable softmax; finite logits always land on the simplex.
std::vector<double> softmax(std::span<const double> logits);

/// Base count rate, kept non-negative through a softplus of the raw value.
struct BaseRate {
    double raw = 0.0;
    double mu() const { return softplus(raw); }
};

/// Distribution over the last L days, kept on the simplex through a softmax
/// of unconstrained logits. Weights run oldest to newest: weights()[L-1]
/// multiplies yesterday's contribution.
struct LagWeights {
    std::vector<double> logits;
    std::vector<double> weights() const { return softmax(logits); }
    int size() const { return static_cast<int>(logits.size()); }
};

/// Conditional mean of today's count: base rate plus the lag-weighted sum of
/// recent counts, each scaled by that day's reproduction number. All three
/// windows run oldest to newest and must share the weights' length.
double intensity(double mu, std::span<const double> weights, std::span<const double> r_window,
                 std::span<const double> c_window);

/// Scales the intensity by the susceptible fraction of the population:
/// (1 - (n_prev + v_prev) / population) * lambda.
double discount(double lambda, std::int64_t n_prev, std::int64_t v_prev, std::int64_t population);

/// Poisson negative log-likelihood of one observed count, up to the constant
/// ln(count!): lambda_tilde - count * ln(lambda_tilde). The mean is floored
/// at kLambdaFloor first.
double poisson_nll(double lambda_tilde, std::int64_t count);

}  // namespace covihawkes
