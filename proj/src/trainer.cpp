#include "covihawkes/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "covihawkes/errors.hpp"
#include "covihawkes/rng.hpp"

namespace covihawkes {

namespace {

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& rng, double k) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = uniform_range(rng, -k, k);
        }
    }
}

void fill_uniform(Eigen::VectorXd& v, std::mt19937_64& rng, double k) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = uniform_range(rng, -k, k);
    }
}

}  // namespace

HawkesParams HawkesParams::init(const ModelConfig& config) {
    config.validate();
    const int d = config.hidden;
    const int in_dim = config.mobility_dim + 1;
    const double k = 1.0 / std::sqrt(static_cast<double>(d));

    HawkesParams params;
    params.base.raw = 0.0;
    params.lags.logits.assign(static_cast<std::size_t>(config.lag_window), 0.0);
    params.lstm = LstmWeights::zeros(d, in_dim);
    params.head.w = Eigen::VectorXd::Zero(d);
    params.head.b = 0.0;

    std::mt19937_64 rng(config.seed);
    for (GateWeights* gate : {&params.lstm.in_gate, &params.lstm.forget_gate,
                              &params.lstm.cell_gate, &params.lstm.out_gate}) {
        fill_uniform(gate->input, rng, k);
        fill_uniform(gate->recurrent, rng, k);
        fill_uniform(gate->bias, rng, k);
    }
    params.lstm.forget_gate.bias.setConstant(1.0);
    fill_uniform(params.head.w, rng, k);
    return params;
}

HawkesParams HawkesParams::zeros_like(const HawkesParams& shape) {
    HawkesParams out;
    out.base.raw = 0.0;
    out.lags.logits.assign(shape.lags.logits.size(), 0.0);
    out.lstm = LstmWeights::zeros(shape.lstm.hidden(), shape.lstm.input_dim());
    out.head.w = Eigen::VectorXd::Zero(shape.head.w.size());
    out.head.b = 0.0;
    return out;
}

std::size_t parameter_count(const HawkesParams& params) {
    const auto d = static_cast<std::size_t>(params.lstm.hidden());
    const auto in_dim = static_cast<std::size_t>(params.lstm.input_dim());
    return 1 + params.lags.logits.size() + 4 * (d * in_dim + d * d + d) + d + 1;
}

namespace {

void pack_gate(const GateWeights& gate, Eigen::VectorXd& flat, Eigen::Index& pos) {
    for (Eigen::Index r = 0; r < gate.input.rows(); ++r) {
        for (Eigen::Index c = 0; c < gate.input.cols(); ++c) flat[pos++] = gate.input(r, c);
    }
    for (Eigen::Index r = 0; r < gate.recurrent.rows(); ++r) {
        for (Eigen::Index c = 0; c < gate.recurrent.cols(); ++c) flat[pos++] = gate.recurrent(r, c);
    }
    for (Eigen::Index i = 0; i < gate.bias.size(); ++i) flat[pos++] = gate.bias[i];
}

void unpack_gate(GateWeights& gate, const Eigen::VectorXd& flat, Eigen::Index& pos) {
    for (Eigen::Index r = 0; r < gate.input.rows(); ++r) {
        for (Eigen::Index c = 0; c < gate.input.cols(); ++c) gate.input(r, c) = flat[pos++];
    }
    for (Eigen::Index r = 0; r < gate.recurrent.rows(); ++r) {
        for (Eigen::Index c = 0; c < gate.recurrent.cols(); ++c) gate.recurrent(r, c) = flat[pos++];
    }
    for (Eigen::Index i = 0; i < gate.bias.size(); ++i) gate.bias[i] = flat[pos++];
}

}  // namespace

Eigen::VectorXd flatten(const HawkesParams& params) {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(params)));
    Eigen::Index pos = 0;
    flat[pos++] = params.base.raw;
    for (const double logit : params.lags.logits) flat[pos++] = logit;
    for (const GateWeights* gate : {&params.lstm.in_gate, &params.lstm.forget_gate,
                                    &params.lstm.cell_gate, &params.lstm.out_gate}) {
        pack_gate(*gate, flat, pos);
    }
    for (Eigen::Index i = 0; i < params.head.w.size(); ++i) flat[pos++] = params.head.w[i];
    flat[pos++] = params.head.b;
    return flat;
}

HawkesParams unflatten(const Eigen::VectorXd& flat, const HawkesParams& shape) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count(shape))) {
        throw std::invalid_argument("unflatten: size mismatch");
    }
    HawkesParams params = HawkesParams::zeros_like(shape);
    Eigen::Index pos = 0;
    params.base.raw = flat[pos++];
    for (double& logit : params.lags.logits) logit = flat[pos++];
    for (GateWeights* gate : {&params.lstm.in_gate, &params.lstm.forget_gate,
                              &params.lstm.cell_gate, &params.lstm.out_gate}) {
        unpack_gate(*gate, flat, pos);
    }
    for (Eigen::Index i = 0; i < params.head.w.size(); ++i) params.head.w[i] = flat[pos++];
    params.head.b = flat[pos++];
    return params;
}

namespace {

/// Everything about a record that stays fixed across optimizer iterations.
struct TrainContext {
    const RegionRecord* record = nullptr;
    ModelConfig config;
    std::optional<double> fixed_reproduction;

    DayIndex first_r = 0;  // earliest day with an observable feature window
    DayIndex last_r = 0;   // latest reproduction value the likelihood touches (T - 1)
    DayIndex first_t = 0;  // earliest scored day
    std::vector<FeatureWindow> windows;     // windows[s - first_r]
    std::vector<std::int64_t> cum;          // cum[t] = C(1) + ... + C(t), cum[0] = 0
};

TrainContext make_context(const RegionRecord& record, const ModelConfig& config,
                          const FitOptions& options) {
    config.validate();
    const DayIndex T = record.length();
    const DayIndex first_t = first_scored_day(config);
    if (T < first_t) {
        throw std::out_of_range("record has " + std::to_string(T) + " days; need at least " +
                                std::to_string(first_t) + " for one scored day");
    }
    TrainContext ctx;
    ctx.record = &record;
    ctx.config = config;
    ctx.fixed_reproduction = options.fixed_reproduction;
    ctx.first_r = config.lag_window + config.incubation_gap + 1;
    ctx.last_r = T - 1;
    ctx.first_t = first_t;
    if (!ctx.fixed_reproduction) {
        ctx.windows.reserve(static_cast<std::size_t>(ctx.last_r - ctx.first_r + 1));
        for (DayIndex s = ctx.first_r; s <= ctx.last_r; ++s) {
            ctx.windows.push_back(build_features(record, s, config));
        }
    }
    ctx.cum.assign(static_cast<std::size_t>(T) + 1, 0);
    for (DayIndex t = 1; t <= T; ++t) {
        ctx.cum[static_cast<std::size_t>(t)] =
            ctx.cum[static_cast<std::size_t>(t) - 1] + record.cases[static_cast<std::size_t>(t) - 1];
    }
    return ctx;
}

/// Reproduction values for every day the likelihood touches, indexed by
/// s - ctx.first_r.
std::vector<double> reproduction_series(const TrainContext& ctx, const HawkesParams& params) {
    const auto n = static_cast<std::size_t>(ctx.last_r - ctx.first_r + 1);
    std::vector<double> r(n);
    if (ctx.fixed_reproduction) {
        std::fill(r.begin(), r.end(), *ctx.fixed_reproduction);
        return r;
    }
    const LstmState init = LstmState::zeros(ctx.config.hidden);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const LstmState state = lstm_forward(ctx.windows[idx], params.lstm, init);
        r[idx] = reproduction(state, params.head);
    }
    return r;
}

struct DayTerm {
    double lambda_tilde = 0.0;
    double susceptible = 0.0;  // discount factor, constant w.r.t. parameters
};

DayTerm day_term(const TrainContext& ctx, DayIndex t, double mu, const std::vector<double>& w,
                 const std::vector<double>& r) {
    const RegionRecord& record = *ctx.record;
    const int L = ctx.config.lag_window;
    double excitation = 0.0;
    for (int j = 0; j < L; ++j) {
        const DayIndex day = t - L + j;  // windows run oldest to newest
        excitation += w[static_cast<std::size_t>(j)] *
                      r[static_cast<std::size_t>(day - ctx.first_r)] *
                      static_cast<double>(record.cases[static_cast<std::size_t>(day) - 1]);
    }
    const double lambda = mu + excitation;
    const std::int64_t n_prev = ctx.cum[static_cast<std::size_t>(t) - 1];
    const std::int64_t v_prev = record.vaccinated[static_cast<std::size_t>(t) - 2];
    DayTerm term;
    term.lambda_tilde = discount(lambda, n_prev, v_prev, record.population);
    term.susceptible = lambda > 0.0 ? term.lambda_tilde / lambda
                                    : 1.0 - static_cast<double>(n_prev + v_prev) /
                                                static_cast<double>(record.population);
    return term;
}

std::vector<DayIndex> all_scored_days(const TrainContext& ctx) {
    std::vector<DayIndex> days(static_cast<std::size_t>(ctx.record->length() - ctx.first_t + 1));
    std::iota(days.begin(), days.end(), ctx.first_t);
    return days;
}

double nll_with_context(const TrainContext& ctx, const HawkesParams& params) {
    const std::vector<double> r = reproduction_series(ctx, params);
    const std::vector<double> w = params.lags.weights();
    const double mu = params.base.mu();
    double total = 0.0;
    for (DayIndex t = ctx.first_t; t <= ctx.record->length(); ++t) {
        const DayTerm term = day_term(ctx, t, mu, w, r);
        total += poisson_nll(term.lambda_tilde,
                             ctx.record->cases[static_cast<std::size_t>(t) - 1]);
    }
    return total;
}

void backprop_day(const TrainContext& ctx, const HawkesParams& params, DayIndex s, double gr,
                  HawkesParams& grads) {
    const FeatureWindow& window = ctx.windows[static_cast<std::size_t>(s - ctx.first_r)];
    LstmTrace trace;
    const LstmState init = LstmState::zeros(ctx.config.hidden);
    const LstmState state = lstm_forward(window, params.lstm, init, &trace);

    const double activation = params.head.w.dot(state.h) + params.head.b;
    const double da = gr * sigmoid(activation);  // softplus'
    grads.head.w += da * state.h;
    grads.head.b += da;

    Eigen::VectorXd dh = da * params.head.w;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(ctx.config.hidden);
    for (int p = static_cast<int>(window.steps.size()) - 1; p >= 0; --p) {
        const auto idx = static_cast<std::size_t>(p);
        const Eigen::VectorXd& i_gate = trace.in[idx];
        const Eigen::VectorXd& f_gate = trace.forget[idx];
        const Eigen::VectorXd& g_cand = trace.cell[idx];
        const Eigen::VectorXd& o_gate = trace.out[idx];
        const Eigen::VectorXd& tanh_c = trace.tanh_c[idx];
        const Eigen::VectorXd& h_prev = trace.h_prev[idx];
        const Eigen::VectorXd c_prev =
            p > 0 ? trace.c[idx - 1] : Eigen::VectorXd::Zero(ctx.config.hidden);

        dc += dh.cwiseProduct(o_gate)
                  .cwiseProduct(Eigen::VectorXd::Ones(tanh_c.size()) -
                                tanh_c.cwiseProduct(tanh_c));
        const Eigen::VectorXd dz_o = dh.cwiseProduct(tanh_c)
                                         .cwiseProduct(o_gate)
                                         .cwiseProduct(Eigen::VectorXd::Ones(o_gate.size()) -
                                                       o_gate);
        const Eigen::VectorXd dz_i = dc.cwiseProduct(g_cand)
                                         .cwiseProduct(i_gate)
                                         .cwiseProduct(Eigen::VectorXd::Ones(i_gate.size()) -
                                                       i_gate);
        const Eigen::VectorXd dz_f = dc.cwiseProduct(c_prev)
                                         .cwiseProduct(f_gate)
                                         .cwiseProduct(Eigen::VectorXd::Ones(f_gate.size()) -
                                                       f_gate);
        const Eigen::VectorXd dz_g = dc.cwiseProduct(i_gate)
                                         .cwiseProduct(Eigen::VectorXd::Ones(g_cand.size()) -
                                                       g_cand.cwiseProduct(g_cand));

        const Eigen::VectorXd& x = window.steps[idx];
        grads.lstm.out_gate.input += dz_o * x.transpose();
        grads.lstm.out_gate.recurrent += dz_o * h_prev.transpose();
        grads.lstm.out_gate.bias += dz_o;
        grads.lstm.in_gate.input += dz_i * x.transpose();
        grads.lstm.in_gate.recurrent += dz_i * h_prev.transpose();
        grads.lstm.in_gate.bias += dz_i;
        grads.lstm.forget_gate.input += dz_f * x.transpose();
        grads.lstm.forget_gate.recurrent += dz_f * h_prev.transpose();
        grads.lstm.forget_gate.bias += dz_f;
        grads.lstm.cell_gate.input += dz_g * x.transpose();
        grads.lstm.cell_gate.recurrent += dz_g * h_prev.transpose();
        grads.lstm.cell_gate.bias += dz_g;

        dh = params.lstm.in_gate.recurrent.transpose() * dz_i +
             params.lstm.forget_gate.recurrent.transpose() * dz_f +
             params.lstm.cell_gate.recurrent.transpose() * dz_g +
             params.lstm.out_gate.recurrent.transpose() * dz_o;
        dc = dc.cwiseProduct(f_gate);
    }
}

HawkesParams gradient_with_context(const TrainContext& ctx, const HawkesParams& params,
                                   std::span<const DayIndex> days) {
    const RegionRecord& record = *ctx.record;
    const int L = ctx.config.lag_window;
    const std::vector<double> r = reproduction_series(ctx, params);
    const std::vector<double> w = params.lags.weights();
    const double mu = params.base.mu();

    HawkesParams grads = HawkesParams::zeros_like(params);
    std::vector<double> grad_w(static_cast<std::size_t>(L), 0.0);
    std::vector<double> grad_r(r.size(), 0.0);

    for (const DayIndex t : days) {
        if (t < ctx.first_t || t > record.length()) {
            throw std::out_of_range("gradient: day " + std::to_string(t) +
                                    " outside scored range " + std::to_string(ctx.first_t) + ".." +
                                    std::to_string(record.length()));
        }
        const DayTerm term = day_term(ctx, t, mu, w, r);
        if (term.lambda_tilde <= kLambdaFloor) continue;  // clamped region is flat
        const std::int64_t count = record.cases[static_cast<std::size_t>(t) - 1];
        const double dnll = 1.0 - static_cast<double>(count) / term.lambda_tilde;
        const double g = dnll * term.susceptible;  // d nll / d lambda

        grads.base.raw += g * sigmoid(params.base.raw);
        for (int j = 0; j < L; ++j) {
            const DayIndex day = t - L + j;
            const auto r_idx = static_cast<std::size_t>(day - ctx.first_r);
            const double count_j =
                static_cast<double>(record.cases[static_cast<std::size_t>(day) - 1]);
            grad_w[static_cast<std::size_t>(j)] += g * r[r_idx] * count_j;
            grad_r[r_idx] += g * w[static_cast<std::size_t>(j)] * count_j;
        }
    }

    // chain rule through the softmax
    double dot = 0.0;
    for (std::size_t j = 0; j < grad_w.size(); ++j) dot += grad_w[j] * w[j];
    for (std::size_t j = 0; j < grad_w.size(); ++j) {
        grads.lags.logits[j] = w[j] * (grad_w[j] - dot);
    }

    if (!ctx.fixed_reproduction) {
        for (DayIndex s = ctx.first_r; s <= ctx.last_r; ++s) {
            const double gr = grad_r[static_cast<std::size_t>(s - ctx.first_r)];
            if (gr != 0.0) backprop_day(ctx, params, s, gr, grads);
        }
    }
    return grads;
}

}  // namespace

double total_nll(const HawkesParams& params, const RegionRecord& record, const ModelConfig& config,
                 const FitOptions& options) {
    return nll_with_context(make_context(record, config, options), params);
}

std::vector<std::pair<DayIndex, double>> nll_terms(const HawkesParams& params,
                                                   const RegionRecord& record,
                                                   const ModelConfig& config,
                                                   const FitOptions& options) {
    const TrainContext ctx = make_context(record, config, options);
    const std::vector<double> r = reproduction_series(ctx, params);
    const std::vector<double> w = params.lags.weights();
    const double mu = params.base.mu();
    std::vector<std::pair<DayIndex, double>> terms;
    for (DayIndex t = ctx.first_t; t <= record.length(); ++t) {
        const DayTerm term = day_term(ctx, t, mu, w, r);
        terms.emplace_back(t, poisson_nll(term.lambda_tilde,
                                          record.cases[static_cast<std::size_t>(t) - 1]));
    }
    return terms;
}

HawkesParams gradient(const HawkesParams& params, const RegionRecord& record,
                      const ModelConfig& config, const FitOptions& options) {
    const TrainContext ctx = make_context(record, config, options);
    return gradient_with_context(ctx, params, all_scored_days(ctx));
}

HawkesParams gradient_for_days(const HawkesParams& params, const RegionRecord& record,
                               const ModelConfig& config, std::span<const DayIndex> days,
                               const FitOptions& options) {
    const TrainContext ctx = make_context(record, config, options);
    return gradient_with_context(ctx, params, days);
}

TrainReport fit(const RegionRecord& record, const ModelConfig& config, const FitOptions& options) {
    const TrainContext ctx = make_context(record, config, options);
    const std::vector<DayIndex> days = all_scored_days(ctx);

    HawkesParams params = HawkesParams::init(config);
    Eigen::VectorXd theta = flatten(params);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;

    TrainReport report;
    report.nll_trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
    double best_nll = std::numeric_limits<double>::infinity();
    int no_progress = 0;

    int iter = 0;
    for (; iter < config.max_iterations; ++iter) {
        const double nll = nll_with_context(ctx, params);
        if (!std::isfinite(nll)) {
            throw TrainingDivergedError(iter, "objective is not finite");
        }
        report.nll_trace.push_back(nll);
        if (options.on_iteration) options.on_iteration(iter, params, nll);

        // progress = the best objective improved by more than the tolerance
        if (nll < best_nll - config.tolerance * (1.0 + std::abs(best_nll))) {
            best_nll = nll;
            no_progress = 0;
        } else if (++no_progress >= config.patience) {
            report.converged = true;
            break;
        }

        const HawkesParams grads = gradient_with_context(ctx, params, days);
        const Eigen::VectorXd g = flatten(grads);
        if (!g.allFinite()) {
            throw TrainingDivergedError(iter, "gradient is not finite");
        }
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        const double step = iter + 1;
        const double correction1 = 1.0 - std::pow(kBeta1, step);
        const double correction2 = 1.0 - std::pow(kBeta2, step);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
        }
        params = unflatten(theta, params);
    }

    if (!report.converged) {
        // budget exhausted after a step; record the objective at the final point
        const double final_nll = nll_with_context(ctx, params);
        if (!std::isfinite(final_nll)) {
            throw TrainingDivergedError(iter, "objective is not finite");
        }
        report.nll_trace.push_back(final_nll);
    }
    report.iterations_run = iter;
    report.final_params = std::move(params);
    return report;
}

}  // namespace covihawkes
