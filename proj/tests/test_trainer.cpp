#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "covihawkes/errors.hpp"
#include "covihawkes/hawkes.hpp"
#include "covihawkes/model_io.hpp"
#include "covihawkes/synth.hpp"
#include "covihawkes/trainer.hpp"

using namespace covihawkes;

namespace {

ModelConfig toy_config() {
    ModelConfig config;
    config.lag_window = 7;
    config.incubation_gap = 3;
    config.hidden = 4;
    config.mobility_dim = 6;
    config.seed = 2024;
    return config;
}

// 30-day record with weekly mobility structure and self-excited counts.
RegionRecord toy_record(int days = 30, std::uint64_t seed = 5) {
    SynthSpec spec;
    spec.mu_true = 3.0;
    spec.weights_true = {0.05, 0.05, 0.1, 0.1, 0.1, 0.2, 0.4};
    spec.r_schedule = {0.9};
    spec.population = 50'000;
    spec.horizon = days;
    spec.seed = seed;
    spec.mobility_pattern = {
        {-10, 5, -20, 3, -8, 12},  {-12, 6, -18, 2, -9, 10}, {-8, 4, -22, 5, -7, 14},
        {-11, 7, -19, 1, -10, 11}, {-9, 3, -21, 4, -6, 13},  {-13, 8, -17, 6, -11, 9},
        {-7, 2, -23, 7, -5, 15},
    };
    return generate(spec);
}

// independent recomputation of the objective: chain the primitives day by day
double composed_nll(const HawkesParams& params, const RegionRecord& record,
                    const ModelConfig& config) {
    const int L = config.lag_window;
    const DayIndex first_r = L + config.incubation_gap + 1;
    std::vector<double> r_by_day(static_cast<std::size_t>(record.length()) + 1, 0.0);
    for (DayIndex s = first_r; s <= record.length() - 1; ++s) {
        const FeatureWindow window = build_features(record, s, config);
        const LstmState state = lstm_forward(window, params.lstm, LstmState::zeros(config.hidden));
        r_by_day[static_cast<std::size_t>(s)] = reproduction(state, params.head);
    }
    const std::vector<double> w = params.lags.weights();
    double total = 0.0;
    for (DayIndex t = first_scored_day(config); t <= record.length(); ++t) {
        std::vector<double> r_window, c_window;
        for (DayIndex day = t - L; day <= t - 1; ++day) {
            r_window.push_back(r_by_day[static_cast<std::size_t>(day)]);
            c_window.push_back(static_cast<double>(record.case_count(day)));
        }
        const double lambda = intensity(params.base.mu(), w, r_window, c_window);
        const double lambda_tilde = discount(lambda, cumulative_infected(record, t),
                                             record.vaccinated_at(t - 1), record.population);
        total += poisson_nll(lambda_tilde, record.case_count(t));
    }
    return total;
}

Eigen::VectorXd finite_difference_gradient(const HawkesParams& params, const RegionRecord& record,
                                           const ModelConfig& config, const FitOptions& options,
                                           double h = 1e-5) {
    const Eigen::VectorXd theta = flatten(params);
    Eigen::VectorXd fd(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd plus = theta;
        Eigen::VectorXd minus = theta;
        plus[i] += h;
        minus[i] -= h;
        fd[i] = (total_nll(unflatten(plus, params), record, config, options) -
                 total_nll(unflatten(minus, params), record, config, options)) /
                (2.0 * h);
    }
    return fd;
}

double gradient_relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

}  // namespace

TEST_CASE("total_nll equals the independently composed per-day chain") {
    const ModelConfig config = toy_config();
    const RegionRecord record = toy_record();
    const HawkesParams params = HawkesParams::init(config);
    CHECK(total_nll(params, record, config) ==
          doctest::Approx(composed_nll(params, record, config)).epsilon(1e-12));

    const auto terms = nll_terms(params, record, config);
    CHECK(static_cast<int>(terms.size()) == record.length() - first_scored_day(config) + 1);
    double summed = 0.0;
    for (const auto& [day, value] : terms) summed += value;
    CHECK(total_nll(params, record, config) == doctest::Approx(summed).epsilon(1e-12));
}

TEST_CASE("total_nll: single scored day with lambda_tilde = 2 and count 3") {
    ModelConfig config = toy_config();
    config.lag_window = 2;
    config.incubation_gap = 1;
    const DayIndex only_day = first_scored_day(config);  // 6

    RegionRecord record;
    record.region = RegionId{"X", RegionLevel::district, ""};
    record.population = 1'000'000;
    record.start_date = Date(2020, 3, 2);
    record.cases.assign(static_cast<std::size_t>(only_day), 0);
    record.cases.back() = 3;
    record.mobility.assign(record.cases.size(), std::vector<double>(6, 0.0));
    record.vaccinated.assign(record.cases.size(), 0);

    HawkesParams params = HawkesParams::init(config);
    params.base.raw = std::log(std::exp(2.0) - 1.0);  // softplus -> 2

    CHECK(total_nll(params, record, config) ==
          doctest::Approx(2.0 - 3.0 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("total_nll rejects too-short records") {
    const ModelConfig config = toy_config();
    const RegionRecord record = toy_record(first_scored_day(config) - 1);
    const HawkesParams params = HawkesParams::init(config);
    CHECK_THROWS_AS(total_nll(params, record, config), std::out_of_range);
}

TEST_CASE("gradient matches central finite differences on the toy instance") {
    const ModelConfig config = toy_config();
    const RegionRecord record = toy_record();
    const HawkesParams params = HawkesParams::init(config);

    const Eigen::VectorXd analytic = flatten(gradient(params, record, config));
    const Eigen::VectorXd numeric = finite_difference_gradient(params, record, config, {});
    REQUIRE(analytic.size() == numeric.size());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        worst = std::max(worst, gradient_relative_error(analytic[i], numeric[i]));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("gradient with a frozen reproduction constant also matches finite differences") {
    const ModelConfig config = toy_config();
    const RegionRecord record = toy_record();
    const HawkesParams params = HawkesParams::init(config);
    FitOptions options;
    options.fixed_reproduction = 1.2;

    const Eigen::VectorXd analytic = flatten(gradient(params, record, config, options));
    const Eigen::VectorXd numeric = finite_difference_gradient(params, record, config, options);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        CHECK(gradient_relative_error(analytic[i], numeric[i]) <= 1e-4);
    }
}

TEST_CASE("gradient: all-zero counts leave lag logits and the recurrent net untouched") {
    const ModelConfig config = toy_config();
    RegionRecord record = toy_record();
    for (auto& c : record.cases) c = 0;
    const HawkesParams params = HawkesParams::init(config);
    const HawkesParams grads = gradient(params, record, config);
    for (const double g : grads.lags.logits) CHECK(g == 0.0);
    CHECK(flatten(grads).tail(config.hidden + 1).cwiseAbs().maxCoeff() == 0.0);  // head
    CHECK(grads.lstm.in_gate.input.cwiseAbs().maxCoeff() == 0.0);
    CHECK(grads.base.raw != 0.0);  // the base rate still sees the loss
}

TEST_CASE("gradient is additive over scored days; duplicated days double it") {
    const ModelConfig config = toy_config();
    const RegionRecord record = toy_record();
    const HawkesParams params = HawkesParams::init(config);

    std::vector<DayIndex> days;
    for (DayIndex t = first_scored_day(config); t <= record.length(); ++t) days.push_back(t);
    std::vector<DayIndex> doubled;
    for (const DayIndex t : days) {
        doubled.push_back(t);
        doubled.push_back(t);
    }

    const Eigen::VectorXd g_all = flatten(gradient(params, record, config));
    const Eigen::VectorXd g_days = flatten(gradient_for_days(params, record, config, days));
    const Eigen::VectorXd g_doubled = flatten(gradient_for_days(params, record, config, doubled));
    CHECK((g_all - g_days).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g_doubled - 2.0 * g_all).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, g_all.cwiseAbs().maxCoeff()));

    CHECK_THROWS_AS(gradient_for_days(params, record, config,
                                      std::vector<DayIndex>{first_scored_day(config) - 1}),
                    std::out_of_range);
}

TEST_CASE("fit is deterministic and keeps the constraints after every step") {
    ModelConfig config = toy_config();
    config.max_iterations = 60;
    const RegionRecord record = toy_record(40);

    FitOptions checking;
    checking.on_iteration = [&](int, const HawkesParams& p, double) {
        const std::vector<double> w = p.lags.weights();
        double total = 0.0;
        for (const double v : w) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
        CHECK(p.base.mu() >= 0.0);
    };
    const TrainReport a = fit(record, config, checking);
    const TrainReport b = fit(record, config);
    CHECK(a.iterations_run == b.iterations_run);
    CHECK((flatten(a.final_params) - flatten(b.final_params)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.nll_trace == b.nll_trace);
    for (const double v : a.nll_trace) CHECK(std::isfinite(v));
}

TEST_CASE("fit recovers the base rate from pure background counts") {
    SynthSpec spec;
    spec.mu_true = 5.0;
    spec.weights_true = {0.05, 0.05, 0.1, 0.1, 0.1, 0.2, 0.4};
    spec.r_schedule = {0.0};  // counts are i.i.d. Poisson(mu)
    spec.population = 100'000'000;
    spec.horizon = 1000;
    spec.seed = 31;
    const RegionRecord record = generate(spec);

    ModelConfig config = toy_config();
    config.max_iterations = 500;
    config.learning_rate = 2e-2;
    const TrainReport report = fit(record, config);
    const double fitted_mu = report.final_params.base.mu();
    CHECK(fitted_mu == doctest::Approx(5.0).epsilon(0.10));
    // no persistent upward drift across 50-iteration windows; the slack covers
    // the terminal oscillation of a fixed-step optimizer
    const auto& trace = report.nll_trace;
    for (std::size_t k = 0; k + 50 < trace.size(); ++k) {
        CHECK(trace[k + 50] <= trace[k] + 1e-3 * (1.0 + std::abs(trace[k])));
    }
    // the best-seen objective never worsens
    double best = trace.front();
    for (const double v : trace) {
        CHECK(std::min(best, v) <= best);
        best = std::min(best, v);
    }
}

TEST_CASE("fit reports divergence with the iteration index") {
    const ModelConfig config = toy_config();
    RegionRecord record = toy_record();
    for (auto& c : record.cases) c = 10'000'000'000LL;  // overflow the intensity
    record.population = 2'000'000'000'000LL;
    FitOptions options;
    options.fixed_reproduction = 1e300;
    try {
        fit(record, config, options);
        FAIL("expected TrainingDivergedError");
    } catch (const TrainingDivergedError& e) {
        CHECK(e.iteration == 0);
    }
}

TEST_CASE("model file round trip preserves every parameter bit") {
    ModelConfig config = toy_config();
    config.hidden = 5;
    const HawkesParams params = HawkesParams::init(config);
    const auto path = std::filesystem::temp_directory_path() / "covihawkes_model_test.json";
    save_model(path, ModelFile{"D01", config, params});
    const ModelFile loaded = load_model(path);
    CHECK(loaded.region == "D01");
    CHECK(loaded.config.lag_window == config.lag_window);
    CHECK(loaded.config.hidden == 5);
    CHECK(loaded.config.seed == config.seed);
    CHECK((flatten(loaded.params) - flatten(params)).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("model loading rejects unknown format tags") {
    const auto path = std::filesystem::temp_directory_path() / "covihawkes_bad_model.json";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{\"format\": \"other-format\"}", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_model(path));
    std::filesystem::remove(path);
}
