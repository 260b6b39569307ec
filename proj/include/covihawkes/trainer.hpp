#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "covihawkes/hawkes.hpp"
#include "covihawkes/repro_net.hpp"
#include "covihawkes/types.hpp"

namespace covihawkes {

/// Every learnable parameter. Constrained quantities (simplex lag weights,
/// non-negative base rate) are derived from the unconstrained storage, so any
/// optimizer step lands on a valid model.
struct HawkesParams {
    BaseRate base;
    LagWeights lags;
    LstmWeights lstm;
    ReproHead head;

    /// Seeded initialization: zero logits and raw base rate, recurrent
    /// weights and head uniform in [-k, k] with k = 1/sqrt(hidden), forget
    /// gate bias at 1.
    static HawkesParams init(const ModelConfig& config);

    static HawkesParams zeros_like(const HawkesParams& shape);
};

std::size_t parameter_count(const HawkesParams& params);

/// Row-major packing in a fixed order: raw base rate, lag logits, the four
/// LSTM gates (input matrix, recurrent matrix, bias each), head weights,
/// head bias.
Eigen::VectorXd flatten(const HawkesParams& params);
HawkesParams unflatten(const Eigen::VectorXd& flat, const HawkesParams& shape);

struct FitOptions {
    /// Replaces the recurrent estimate with a constant reproduction number;
    /// recurrent-net and head parameters are then frozen. Used for ablations
    /// and parameter-recovery fixtures.
    std::optional<double> fixed_reproduction;

    /// Invoked after each optimizer step with (iteration, params, nll).
    std::function<void(int, const HawkesParams&, double)> on_iteration;
};

/// Total Poisson negative log-likelihood over all fully observed days
/// (first_scored_day(config) .. record length).
double total_nll(const HawkesParams& params, const RegionRecord& record, const ModelConfig& config,
                 const FitOptions& options = {});

/// Per-day likelihood terms; their sum equals total_nll.
std::vector<std::pair<DayIndex, double>> nll_terms(const HawkesParams& params,
                                                   const RegionRecord& record,
                                                   const ModelConfig& config,
                                                   const FitOptions& options = {});

/// Exact gradient of total_nll with respect to every unconstrained parameter,
/// via backpropagation through time. Returned in HawkesParams shape: each
/// field holds the partial derivative of the matching parameter.
HawkesParams gradient(const HawkesParams& params, const RegionRecord& record,
                      const ModelConfig& config, const FitOptions& options = {});

/// Gradient restricted to an explicit list of scored days (repeats allowed);
/// the full gradient is the `days = all scored days` case.
HawkesParams gradient_for_days(const HawkesParams& params, const RegionRecord& record,
                               const ModelConfig& config, std::span<const DayIndex> days,
                               const FitOptions& options = {});

struct TrainReport {
    std::vector<double> nll_trace;  // objective at the start of each iteration, plus final
    int iterations_run = 0;
    bool converged = false;
    HawkesParams final_params;
};

/// Full-batch Adam on the unconstrained parameters. Deterministic given
/// config.seed. Throws TrainingDivergedError if the objective or gradient
/// turns non-finite.
TrainReport fit(const RegionRecord& record, const ModelConfig& config,
                const FitOptions& options = {});

}  // namespace covihawkes
