#include "covihawkes/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace covihawkes {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax of empty vector");
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

double intensity(double mu, std::span<const double> weights, std::span<const double> r_window,
                 std::span<const double> c_window) {
    if (r_window.size() != weights.size() || c_window.size() != weights.size()) {
        throw std::invalid_argument("intensity: window length " + std::to_string(r_window.size()) +
                                    "/" + std::to_string(c_window.size()) +
                                    " does not match weight count " +
                                    std::to_string(weights.size()));
    }
    double excitation = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        excitation += weights[j] * r_window[j] * c_window[j];
    }
    return mu + excitation;
}

double discount(double lambda, std::int64_t n_prev, std::int64_t v_prev, std::int64_t population) {
    if (population <= 0) {
        throw std::domain_error("discount: population must be positive");
    }
    const std::int64_t removed = n_prev + v_prev;
    if (removed < 0 || removed > population) {
        throw std::domain_error("discount: infected plus vaccinated (" + std::to_string(removed) +
                                ") outside 0.." + std::to_string(population));
    }
    const double susceptible =
        1.0 - static_cast<double>(removed) / static_cast<double>(population);
    return susceptible * lambda;
}

double poisson_nll(double lambda_tilde, std::int64_t count) {
    const double rate = std::max(lambda_tilde, kLambdaFloor);
    return rate - static_cast<double>(count) * std::log(rate);
}

}  // namespace covihawkes
