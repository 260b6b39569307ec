#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "covihawkes/types.hpp"

namespace covihawkes {

/// Input sequence for one reproduction-number evaluation at day t. Steps run
/// oldest to newest; the step for lag i (i = L..1) concatenates the mobility
/// vector of day t-i-delta scaled by 1/100 with the count feature
/// ln(1 + C(t-i)) / ln(1 + population).
struct FeatureWindow {
    std::vector<Eigen::VectorXd> steps;
};

FeatureWindow build_features(const RegionRecord& record, DayIndex t, const ModelConfig& config);

/// Callback-driven variant used when part of the referenced history is
/// synthetic (bootstrapped counts, scenario mobility).
FeatureWindow build_features(const std::function<std::vector<double>(DayIndex)>& mobility_at,
                             const std::function<double(DayIndex)>& count_at,
                             std::int64_t population, DayIndex t, const ModelConfig& config);

struct GateWeights {
    Eigen::MatrixXd input;      // hidden x input_dim
    Eigen::MatrixXd recurrent;  // hidden x hidden
    Eigen::VectorXd bias;       // hidden
};

struct LstmWeights {
    GateWeights in_gate, forget_gate, cell_gate, out_gate;

    int hidden() const { return static_cast<int>(in_gate.bias.size()); }
    int input_dim() const { return static_cast<int>(in_gate.input.cols()); }

    static LstmWeights zeros(int hidden, int input_dim);
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zeros(int hidden);
};

/// Per-step activations recorded during a forward pass, consumed by
/// backpropagation through time.
struct LstmTrace {
    std::vector<Eigen::VectorXd> in, forget, cell, out;  // gate outputs
    std::vector<Eigen::VectorXd> c, tanh_c, h_prev;
};

/// Standard LSTM recursion over the window's steps (sigmoid input/forget/
/// output gates, tanh candidate). Returns the final state; fills `trace`
/// when provided.
LstmState lstm_forward(const FeatureWindow& window, const LstmWeights& weights,
                       const LstmState& init, LstmTrace* trace = nullptr);

/// Affine readout squashed through softplus; strictly positive.
struct ReproHead {
    Eigen::VectorXd w;
    double b = 0.0;
};

double reproduction(const LstmState& state, const ReproHead& head);

}  // namespace covihawkes
