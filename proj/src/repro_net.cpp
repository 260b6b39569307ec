#include "covihawkes/repro_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "covihawkes/hawkes.hpp"

namespace covihawkes {

namespace {

Eigen::VectorXd make_step(const std::vector<double>& mobility, double count_feature) {
    Eigen::VectorXd step(static_cast<Eigen::Index>(mobility.size()) + 1);
    for (std::size_t k = 0; k < mobility.size(); ++k) {
        step[static_cast<Eigen::Index>(k)] = mobility[k] / 100.0;
    }
    step[step.size() - 1] = count_feature;
    return step;
}

void check_window_start(DayIndex t, const ModelConfig& config) {
    const DayIndex oldest = t - config.lag_window - config.incubation_gap;
    if (oldest < 1) {
        throw std::out_of_range("build_features: day " + std::to_string(t) +
                                " needs history back to day " + std::to_string(oldest));
    }
}

}  // namespace

FeatureWindow build_features(const RegionRecord& record, DayIndex t, const ModelConfig& config) {
    check_window_start(t, config);
    if (t - 1 > record.length()) {
        throw std::out_of_range("build_features: day " + std::to_string(t) +
                                " references counts beyond the observed range");
    }
    const double log_pop = std::log1p(static_cast<double>(record.population));
    FeatureWindow window;
    window.steps.reserve(static_cast<std::size_t>(config.lag_window));
    for (int i = config.lag_window; i >= 1; --i) {
        const double count_feature =
            std::log1p(static_cast<double>(record.case_count(t - i))) / log_pop;
        window.steps.push_back(make_step(record.mobility_at(t - i - config.incubation_gap),
                                         count_feature));
    }
    return window;
}

FeatureWindow build_features(const std::function<std::vector<double>(DayIndex)>& mobility_at,
                             const std::function<double(DayIndex)>& count_at,
                             std::int64_t population, DayIndex t, const ModelConfig& config) {
    check_window_start(t, config);
    const double log_pop = std::log1p(static_cast<double>(population));
    FeatureWindow window;
    window.steps.reserve(static_cast<std::size_t>(config.lag_window));
    for (int i = config.lag_window; i >= 1; --i) {
        const double count_feature = std::log1p(count_at(t - i)) / log_pop;
        window.steps.push_back(make_step(mobility_at(t - i - config.incubation_gap),
                                         count_feature));
    }
    return window;
}

LstmWeights LstmWeights::zeros(int hidden, int input_dim) {
    GateWeights gate{Eigen::MatrixXd::Zero(hidden, input_dim), Eigen::MatrixXd::Zero(hidden, hidden),
                     Eigen::VectorXd::Zero(hidden)};
    return LstmWeights{gate, gate, gate, gate};
}

LstmState LstmState::zeros(int hidden) {
    return LstmState{Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
}

namespace {

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& z) {
    return z.unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace

LstmState lstm_forward(const FeatureWindow& window, const LstmWeights& weights,
                       const LstmState& init, LstmTrace* trace) {
    const int d = weights.hidden();
    if (init.h.size() != d || init.c.size() != d) {
        throw std::invalid_argument("lstm_forward: state size does not match hidden size");
    }
    LstmState state = init;
    if (trace) {
        trace->in.clear();
        trace->forget.clear();
        trace->cell.clear();
        trace->out.clear();
        trace->c.clear();
        trace->tanh_c.clear();
        trace->h_prev.clear();
    }
    for (const Eigen::VectorXd& x : window.steps) {
        if (x.size() != weights.input_dim()) {
            throw std::invalid_argument("lstm_forward: step dimension " + std::to_string(x.size()) +
                                        " does not match input dimension " +
                                        std::to_string(weights.input_dim()));
        }
        const Eigen::VectorXd i_gate =
            sigmoid_vec(weights.in_gate.input * x + weights.in_gate.recurrent * state.h +
                        weights.in_gate.bias);
        const Eigen::VectorXd f_gate =
            sigmoid_vec(weights.forget_gate.input * x + weights.forget_gate.recurrent * state.h +
                        weights.forget_gate.bias);
        const Eigen::VectorXd g_cand =
            (weights.cell_gate.input * x + weights.cell_gate.recurrent * state.h +
             weights.cell_gate.bias)
                .array()
                .tanh();
        const Eigen::VectorXd o_gate =
            sigmoid_vec(weights.out_gate.input * x + weights.out_gate.recurrent * state.h +
                        weights.out_gate.bias);
        const Eigen::VectorXd c_new =
            f_gate.cwiseProduct(state.c) + i_gate.cwiseProduct(g_cand);
        const Eigen::VectorXd tanh_c = c_new.array().tanh();
        if (trace) {
            trace->h_prev.push_back(state.h);
            trace->in.push_back(i_gate);
            trace->forget.push_back(f_gate);
            trace->cell.push_back(g_cand);
            trace->out.push_back(o_gate);
            trace->c.push_back(c_new);
            trace->tanh_c.push_back(tanh_c);
        }
        state.c = c_new;
        state.h = o_gate.cwiseProduct(tanh_c);
    }
    return state;
}

double reproduction(const LstmState& state, const ReproHead& head) {
    if (head.w.size() != state.h.size()) {
        throw std::invalid_argument("reproduction: head size does not match hidden size");
    }
    return softplus(head.w.dot(state.h) + head.b);
}

}  // namespace covihawkes
