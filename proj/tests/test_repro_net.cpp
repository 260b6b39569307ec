#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "covihawkes/hawkes.hpp"
#include "covihawkes/repro_net.hpp"
#include "covihawkes/rng.hpp"
#include "covihawkes/trainer.hpp"

using namespace covihawkes;

namespace {

RegionRecord make_record(int days, std::int64_t population = 100000) {
    RegionRecord record;
    record.region = RegionId{"X", RegionLevel::district, "S"};
    record.population = population;
    record.start_date = Date(2020, 3, 2);
    record.cases.assign(static_cast<std::size_t>(days), 0);
    record.mobility.assign(static_cast<std::size_t>(days), std::vector<double>(6, 0.0));
    record.vaccinated.assign(static_cast<std::size_t>(days), 0);
    return record;
}

// Reference LSTM written against scalars only; deliberately shares no code
// with the library path it checks.
struct ScalarLstm {
    int d, in;
    // [gate][row][col], gates ordered i, f, g, o
    std::vector<std::vector<std::vector<double>>> W, U;
    std::vector<std::vector<double>> b;

    static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

    std::vector<double> run(const std::vector<std::vector<double>>& steps) const {
        std::vector<double> h(static_cast<std::size_t>(d), 0.0);
        std::vector<double> c(static_cast<std::size_t>(d), 0.0);
        for (const auto& x : steps) {
            std::vector<std::vector<double>> z(4, std::vector<double>(static_cast<std::size_t>(d)));
            for (int gate = 0; gate < 4; ++gate) {
                for (int row = 0; row < d; ++row) {
                    double acc = b[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)];
                    for (int col = 0; col < in; ++col) {
                        acc += W[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)]
                                [static_cast<std::size_t>(col)] *
                               x[static_cast<std::size_t>(col)];
                    }
                    for (int col = 0; col < d; ++col) {
                        acc += U[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)]
                                [static_cast<std::size_t>(col)] *
                               h[static_cast<std::size_t>(col)];
                    }
                    z[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)] = acc;
                }
            }
            for (int row = 0; row < d; ++row) {
                const auto r = static_cast<std::size_t>(row);
                const double ig = sig(z[0][r]);
                const double fg = sig(z[1][r]);
                const double gg = std::tanh(z[2][r]);
                const double og = sig(z[3][r]);
                c[r] = fg * c[r] + ig * gg;
                h[r] = og * std::tanh(c[r]);
            }
        }
        return h;
    }
};

ScalarLstm to_scalar(const LstmWeights& weights) {
    const int d = weights.hidden();
    const int in = weights.input_dim();
    ScalarLstm ref;
    ref.d = d;
    ref.in = in;
    ref.W.assign(4, std::vector<std::vector<double>>(
                        static_cast<std::size_t>(d),
                        std::vector<double>(static_cast<std::size_t>(in))));
    ref.U.assign(4, std::vector<std::vector<double>>(
                        static_cast<std::size_t>(d),
                        std::vector<double>(static_cast<std::size_t>(d))));
    ref.b.assign(4, std::vector<double>(static_cast<std::size_t>(d)));
    const GateWeights* gates[4] = {&weights.in_gate, &weights.forget_gate, &weights.cell_gate,
                                   &weights.out_gate};
    for (int gate = 0; gate < 4; ++gate) {
        for (int row = 0; row < d; ++row) {
            for (int col = 0; col < in; ++col) {
                ref.W[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)]
                     [static_cast<std::size_t>(col)] = gates[gate]->input(row, col);
            }
            for (int col = 0; col < d; ++col) {
                ref.U[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)]
                     [static_cast<std::size_t>(col)] = gates[gate]->recurrent(row, col);
            }
            ref.b[static_cast<std::size_t>(gate)][static_cast<std::size_t>(row)] =
                gates[gate]->bias[row];
        }
    }
    return ref;
}

}  // namespace

TEST_CASE("build_features: index arithmetic against the definition") {
    ModelConfig config;
    config.lag_window = 2;
    config.incubation_gap = 1;
    config.mobility_dim = 6;

    RegionRecord record = make_record(4, 1000);
    record.cases = {7, 11, 13, 17};
    for (int t = 0; t < 4; ++t) {
        for (int k = 0; k < 6; ++k) {
            record.mobility[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
                100.0 * (10.0 * (t + 1) + k);  // /100 scaling recovers 10(t+1)+k
        }
    }

    const FeatureWindow window = build_features(record, 4, config);
    REQUIRE(window.steps.size() == 2);
    REQUIRE(window.steps[0].size() == 7);

    const double log_pop = std::log1p(1000.0);
    // oldest step: lag i=2 -> mobility day 1, count day 2
    for (int k = 0; k < 6; ++k) CHECK(window.steps[0][k] == doctest::Approx(10.0 + k));
    CHECK(window.steps[0][6] == doctest::Approx(std::log1p(11.0) / log_pop));
    // newest step: lag i=1 -> mobility day 2, count day 3
    for (int k = 0; k < 6; ++k) CHECK(window.steps[1][k] == doctest::Approx(20.0 + k));
    CHECK(window.steps[1][6] == doctest::Approx(std::log1p(13.0) / log_pop));

    CHECK_THROWS_AS(build_features(record, 3, config), std::out_of_range);
}

TEST_CASE("build_features: zeros map to zeros, count at population maps to one") {
    ModelConfig config;
    config.lag_window = 3;
    config.incubation_gap = 0;
    RegionRecord record = make_record(10, 500);
    const FeatureWindow zero_window = build_features(record, 8, config);
    for (const auto& step : zero_window.steps) {
        CHECK(step.cwiseAbs().maxCoeff() == 0.0);
    }
    record.cases[4] = record.population;  // day 5
    const FeatureWindow window = build_features(record, 6, config);
    CHECK(window.steps[2][6] == doctest::Approx(1.0).epsilon(1e-12));  // lag 1 is the last step
}

TEST_CASE("lstm_forward: zero weights give a zero state for any input") {
    const LstmWeights weights = LstmWeights::zeros(5, 7);
    FeatureWindow window;
    std::mt19937_64 rng(5);
    for (int p = 0; p < 6; ++p) {
        Eigen::VectorXd x(7);
        for (int k = 0; k < 7; ++k) x[k] = uniform_range(rng, -2.0, 2.0);
        window.steps.push_back(x);
    }
    const LstmState state = lstm_forward(window, weights, LstmState::zeros(5));
    CHECK(state.h.cwiseAbs().maxCoeff() == 0.0);
    CHECK(state.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm_forward matches the scalar reference to 1e-10") {
    ModelConfig config;
    config.hidden = 6;
    config.mobility_dim = 6;
    config.seed = 99;
    const HawkesParams params = HawkesParams::init(config);
    const ScalarLstm reference = to_scalar(params.lstm);

    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        FeatureWindow window;
        std::vector<std::vector<double>> raw_steps;
        const int steps = 1 + static_cast<int>(rng() % 12);
        for (int p = 0; p < steps; ++p) {
            Eigen::VectorXd x(7);
            std::vector<double> raw(7);
            for (int k = 0; k < 7; ++k) {
                x[k] = uniform_range(rng, -1.5, 1.5);
                raw[static_cast<std::size_t>(k)] = x[k];
            }
            window.steps.push_back(x);
            raw_steps.push_back(raw);
        }
        const LstmState state = lstm_forward(window, params.lstm, LstmState::zeros(6));
        const std::vector<double> expected = reference.run(raw_steps);
        for (int row = 0; row < 6; ++row) {
            CHECK(state.h[row] ==
                  doctest::Approx(expected[static_cast<std::size_t>(row)]).epsilon(1e-10));
        }
    }
}

TEST_CASE("lstm_forward output stays inside (-1, 1) and is deterministic") {
    ModelConfig config;
    config.hidden = 8;
    config.seed = 321;
    const HawkesParams params = HawkesParams::init(config);
    std::mt19937_64 rng(55);
    FeatureWindow window;
    for (int p = 0; p < 28; ++p) {
        Eigen::VectorXd x(7);
        for (int k = 0; k < 7; ++k) x[k] = uniform_range(rng, -3.0, 3.0);
        window.steps.push_back(x);
    }
    const LstmState a = lstm_forward(window, params.lstm, LstmState::zeros(8));
    const LstmState b = lstm_forward(window, params.lstm, LstmState::zeros(8));
    CHECK(a.h.cwiseAbs().maxCoeff() < 1.0);
    for (int row = 0; row < 8; ++row) CHECK(a.h[row] == b.h[row]);  // bit-identical
}

TEST_CASE("lstm_forward rejects shape mismatches") {
    const LstmWeights weights = LstmWeights::zeros(4, 7);
    FeatureWindow window;
    window.steps.emplace_back(Eigen::VectorXd::Zero(5));
    CHECK_THROWS_AS(lstm_forward(window, weights, LstmState::zeros(4)), std::invalid_argument);
    FeatureWindow fine;
    fine.steps.emplace_back(Eigen::VectorXd::Zero(7));
    CHECK_THROWS_AS(lstm_forward(fine, weights, LstmState::zeros(3)), std::invalid_argument);
}

TEST_CASE("reproduction: softplus readout values") {
    LstmState state = LstmState::zeros(3);
    ReproHead head;
    head.w = Eigen::VectorXd::Zero(3);

    head.b = 0.0;
    CHECK(reproduction(state, head) == doctest::Approx(0.6931472).epsilon(1e-6));
    head.b = 20.0;
    CHECK(reproduction(state, head) == doctest::Approx(20.0).epsilon(1e-8));
    head.b = -20.0;
    CHECK(reproduction(state, head) == doctest::Approx(2.061154e-9).epsilon(1e-6));

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        for (int k = 0; k < 3; ++k) {
            state.h[k] = uniform_range(rng, -1.0, 1.0);
            head.w[k] = uniform_range(rng, -5.0, 5.0);
        }
        head.b = uniform_range(rng, -30.0, 30.0);
        CHECK(reproduction(state, head) > 0.0);
    }
}
