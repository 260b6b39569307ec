#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "covihawkes/ingest.hpp"
#include "covihawkes/synth.hpp"
#include "covihawkes/trainer.hpp"

using namespace covihawkes;
namespace fs = std::filesystem;

TEST_CASE("background-only generation matches the Poisson mean within 3 standard errors") {
    SynthSpec spec;
    spec.mu_true = 5.0;
    spec.weights_true = {0.2, 0.8};
    spec.r_schedule = {0.0};
    spec.population = 1'000'000'000;
    spec.horizon = 4000;
    spec.seed = 9;
    const RegionRecord record = generate(spec);
    double mean = 0.0;
    for (const auto c : record.cases) mean += static_cast<double>(c);
    mean /= static_cast<double>(record.length());
    const double standard_error = std::sqrt(5.0 / static_cast<double>(record.length()));
    CHECK(std::abs(mean - 5.0) <= 3.0 * standard_error);
}

TEST_CASE("zero base rate and empty history stay at zero forever") {
    SynthSpec spec;
    spec.mu_true = 0.0;
    spec.weights_true = {0.5, 0.5};
    spec.r_schedule = {2.5};
    spec.horizon = 200;
    const RegionRecord record = generate(spec);
    for (const auto c : record.cases) CHECK(c == 0);
}

TEST_CASE("generation is deterministic per seed") {
    SynthSpec spec;
    spec.mu_true = 4.0;
    spec.weights_true = {0.3, 0.7};
    spec.r_schedule = {0.8};
    spec.horizon = 300;
    spec.seed = 77;
    const RegionRecord a = generate(spec);
    const RegionRecord b = generate(spec);
    CHECK(a.cases == b.cases);
    spec.seed = 78;
    CHECK(generate(spec).cases != a.cases);
}

TEST_CASE("invalid specs are rejected") {
    SynthSpec spec;
    spec.weights_true = {0.5, 0.4};  // not a simplex
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec.weights_true = {0.5, 0.5};
    spec.r_schedule = {0.9, 0.9};  // shorter than the horizon and not size 1
    spec.horizon = 10;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec.r_schedule = {-0.1};
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("true parameters score better than perturbed ones on average") {
    const std::vector<double> w_true = {0.05, 0.05, 0.1, 0.1, 0.1, 0.2, 0.4};
    ModelConfig config;
    config.lag_window = 7;
    config.incubation_gap = 2;
    config.hidden = 4;

    int wins = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        SynthSpec spec;
        spec.mu_true = 3.0;
        spec.weights_true = w_true;
        spec.r_schedule = {0.9};
        spec.population = 10'000'000;
        spec.horizon = 200;
        spec.seed = 1000 + static_cast<std::uint64_t>(trial);
        const RegionRecord record = generate(spec);

        HawkesParams truth = HawkesParams::init(config);
        truth.base.raw = std::log(std::exp(spec.mu_true) - 1.0);
        for (std::size_t j = 0; j < w_true.size(); ++j) {
            truth.lags.logits[j] = std::log(w_true[j]);
        }
        FitOptions at_truth;
        at_truth.fixed_reproduction = 0.9;

        HawkesParams off = truth;
        off.base.raw = std::log(std::exp(1.2 * spec.mu_true) - 1.0);
        for (std::size_t j = 0; j < w_true.size(); ++j) {
            off.lags.logits[j] = std::log(w_true[w_true.size() - 1 - j]);  // reversed weights
        }
        FitOptions off_truth;
        off_truth.fixed_reproduction = 1.25 * 0.9;

        const double nll_true = total_nll(truth, record, config, at_truth);
        const double nll_off = total_nll(off, record, config, off_truth);
        if (nll_true < nll_off) ++wins;
    }
    CHECK(wins >= 17);  // on average, with room for sampling noise
}

TEST_CASE("synthetic world aggregates exactly and round-trips through the CSV schemas") {
    SynthWorldSpec world;
    world.states = 2;
    world.districts = 3;
    world.base.mu_true = 3.0;
    world.base.weights_true = {0.1, 0.2, 0.7};
    world.base.r_schedule = {0.9};
    world.base.horizon = 40;
    world.base.seed = 5;
    world.base.population = 200'000;
    world.base.vaccination.resize(40);
    for (int t = 0; t < 40; ++t) world.base.vaccination[static_cast<std::size_t>(t)] = 10 * t;

    const DatasetBundle bundle = build_synth_world(world);
    REQUIRE(bundle.records.size() == 6);  // 3 districts + 2 states + nation

    const RegionRecord& nat = bundle.at("NAT");
    for (DayIndex t = 1; t <= 40; ++t) {
        std::int64_t district_sum = 0;
        for (const std::string id : {"D01", "D02", "D03"}) {
            district_sum += bundle.at(id).case_count(t);
        }
        CHECK(nat.case_count(t) == district_sum);
    }
    CHECK(nat.population == 600'000);

    const fs::path dir = fs::temp_directory_path() / "covihawkes_synth_roundtrip";
    fs::remove_all(dir);
    write_bundle_csvs(bundle, dir);
    const DatasetBundle loaded = load_bundle(dir / "cases.csv", dir / "mobility.csv",
                                             dir / "vaccination.csv", dir / "population.csv",
                                             dir / "regions.csv");
    CHECK(loaded.warnings.empty());
    REQUIRE(loaded.records.size() == bundle.records.size());
    for (const auto& [id, record] : bundle.records) {
        const RegionRecord& back = loaded.at(id);
        CHECK(back.cases == record.cases);
        CHECK(back.vaccinated == record.vaccinated);
        CHECK(back.population == record.population);
        CHECK(back.region.level == record.region.level);
        CHECK(back.region.parent == record.region.parent);
        REQUIRE(back.length() == record.length());
        for (DayIndex t = 1; t <= record.length(); ++t) {
            for (std::size_t k = 0; k < 6; ++k) {
                // mobility is written with six decimals
                CHECK(back.mobility_at(t)[k] ==
                      doctest::Approx(record.mobility_at(t)[k]).epsilon(1e-6));
            }
        }
    }
    fs::remove_all(dir);
}
