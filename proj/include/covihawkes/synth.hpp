#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covihawkes/ingest.hpp"
#include "covihawkes/types.hpp"

namespace covihawkes {

/// Ground-truth description of one synthetic region. Counts are drawn from
/// the generative model itself: intensity from the true parameters and the
/// sampled history, discounted, then a Poisson draw.
struct SynthSpec {
    double mu_true = 3.0;
    std::vector<double> weights_true;   // simplex over the lag window, oldest to newest
    std::vector<double> r_schedule;     // per-day reproduction; size 1 broadcasts
    std::int64_t population = 10'000'000;
    std::vector<std::int64_t> vaccination;  // cumulative per day; empty means none
    int horizon = 365;
    std::uint64_t seed = 1;
    std::vector<std::vector<double>> mobility_pattern;  // cycled daily; empty means zeros
    int mobility_dim = 6;
    Date start_date = Date(2020, 3, 2);
    std::string region_id = "R1";

    void validate() const;
    double reproduction_at(DayIndex t) const;
};

RegionRecord generate(const SynthSpec& spec);

/// Hierarchical synthetic world: districts carry independently generated
/// series, their states and the nation are exact aggregates, so the written
/// CSVs satisfy every ingest invariant.
struct SynthWorldSpec {
    SynthSpec base;      // per-district template; seeds and phases derive per region
    int states = 1;
    int districts = 3;   // assigned round-robin to states
    double mobility_amplitude = 15.0;
};

DatasetBundle build_synth_world(const SynthWorldSpec& spec);

}  // namespace covihawkes
