#include "covihawkes/synth.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "covihawkes/hawkes.hpp"
#include "covihawkes/rng.hpp"

namespace covihawkes {

void SynthSpec::validate() const {
    if (weights_true.empty()) {
        throw std::invalid_argument("weights_true must not be empty");
    }
    double total = 0.0;
    for (const double w : weights_true) {
        if (w < 0.0) throw std::invalid_argument("weights_true must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("weights_true must sum to 1, got " + std::to_string(total));
    }
    if (mu_true < 0.0) throw std::invalid_argument("mu_true must be non-negative");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (population <= 0) throw std::invalid_argument("population must be positive");
    if (r_schedule.empty()) throw std::invalid_argument("r_schedule must not be empty");
    if (r_schedule.size() != 1 && static_cast<int>(r_schedule.size()) < horizon) {
        throw std::invalid_argument("r_schedule must cover the horizon or broadcast (size 1)");
    }
    for (const double r : r_schedule) {
        if (r < 0.0) throw std::invalid_argument("r_schedule must be non-negative");
    }
    if (!vaccination.empty() && static_cast<int>(vaccination.size()) < horizon) {
        throw std::invalid_argument("vaccination schedule shorter than horizon");
    }
}

double SynthSpec::reproduction_at(DayIndex t) const {
    if (r_schedule.size() == 1) return r_schedule.front();
    return r_schedule[static_cast<std::size_t>(t) - 1];
}

RegionRecord generate(const SynthSpec& spec) {
    spec.validate();
    const int L = static_cast<int>(spec.weights_true.size());

    RegionRecord record;
    record.region = RegionId{spec.region_id, RegionLevel::district, ""};
    record.population = spec.population;
    record.start_date = spec.start_date;
    record.cases.reserve(static_cast<std::size_t>(spec.horizon));
    record.mobility.reserve(static_cast<std::size_t>(spec.horizon));
    record.vaccinated.reserve(static_cast<std::size_t>(spec.horizon));

    std::mt19937_64 rng(spec.seed);
    std::int64_t cum = 0;
    for (DayIndex t = 1; t <= spec.horizon; ++t) {
        // lag-weighted excitation over whatever history exists; days before
        // the first observation contribute nothing
        double excitation = 0.0;
        for (int j = 0; j < L; ++j) {
            const DayIndex day = t - L + j;
            if (day < 1) continue;
            excitation += spec.weights_true[static_cast<std::size_t>(j)] *
                          spec.reproduction_at(day) *
                          static_cast<double>(record.cases[static_cast<std::size_t>(day) - 1]);
        }
        const double lambda = spec.mu_true + excitation;

        const std::int64_t v_prev =
            t >= 2 ? record.vaccinated[static_cast<std::size_t>(t) - 2] : 0;
        const double lambda_tilde = discount(lambda, cum, v_prev, spec.population);

        const std::int64_t v_today =
            spec.vaccination.empty() ? 0 : spec.vaccination[static_cast<std::size_t>(t) - 1];
        std::int64_t count = poisson_sample(lambda_tilde, rng);
        const std::int64_t room = spec.population - cum - v_today;
        if (count > room) count = room < 0 ? 0 : room;

        cum += count;
        record.cases.push_back(count);
        record.vaccinated.push_back(v_today);
        if (spec.mobility_pattern.empty()) {
            record.mobility.emplace_back(static_cast<std::size_t>(spec.mobility_dim), 0.0);
        } else {
            const auto& m = spec.mobility_pattern[(static_cast<std::size_t>(t) - 1) %
                                                  spec.mobility_pattern.size()];
            if (static_cast<int>(m.size()) != spec.mobility_dim) {
                throw std::invalid_argument("mobility pattern dimension mismatch");
            }
            record.mobility.push_back(m);
        }
    }
    return record;
}

namespace {

std::vector<std::vector<double>> weekly_mobility_pattern(double amplitude, int dims, int phase) {
    std::vector<std::vector<double>> pattern(7, std::vector<double>(static_cast<std::size_t>(dims)));
    for (int day = 0; day < 7; ++day) {
        for (int k = 0; k < dims; ++k) {
            const double angle =
                6.283185307179586 * static_cast<double>(day + phase + 2 * k) / 7.0;
            pattern[static_cast<std::size_t>(day)][static_cast<std::size_t>(k)] =
                -amplitude * 0.5 + amplitude * std::sin(angle);
        }
    }
    return pattern;
}

}  // namespace

DatasetBundle build_synth_world(const SynthWorldSpec& spec) {
    if (spec.states < 1 || spec.districts < 1) {
        throw std::invalid_argument("world needs at least one state and one district");
    }
    spec.base.validate();

    const std::string nation_id = "NAT";
    DatasetBundle bundle;
    bundle.first_date = spec.base.start_date;
    bundle.last_date = spec.base.start_date + (spec.base.horizon - 1);

    std::map<std::string, std::vector<const RegionRecord*>> state_children;
    std::vector<std::string> state_ids;
    for (int s = 0; s < spec.states; ++s) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "S%02d", s + 1);
        state_ids.emplace_back(buf);
    }

    for (int d = 0; d < spec.districts; ++d) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "D%02d", d + 1);
        const std::string district_id = buf;
        const std::string& state_id = state_ids[static_cast<std::size_t>(d % spec.states)];

        SynthSpec district_spec = spec.base;
        district_spec.region_id = district_id;
        district_spec.seed = mix_seed(spec.base.seed, district_id);
        district_spec.mobility_pattern =
            weekly_mobility_pattern(spec.mobility_amplitude, spec.base.mobility_dim, d);
        RegionRecord record = generate(district_spec);
        record.region = RegionId{district_id, RegionLevel::district, state_id};
        bundle.records.emplace(district_id, std::move(record));
    }
    for (const auto& [id, record] : bundle.records) {
        if (record.region.level == RegionLevel::district) {
            state_children[record.region.parent].push_back(&record);
        }
    }

    std::vector<RegionRecord> states;
    states.reserve(state_ids.size());
    for (const std::string& state_id : state_ids) {
        const auto it = state_children.find(state_id);
        if (it == state_children.end()) continue;  // state with no districts is skipped
        states.push_back(aggregate_children(
            RegionId{state_id, RegionLevel::state, nation_id},
            std::span<const RegionRecord* const>(it->second.data(), it->second.size())));
    }
    std::vector<const RegionRecord*> state_ptrs;
    state_ptrs.reserve(states.size());
    for (const RegionRecord& s : states) state_ptrs.push_back(&s);
    RegionRecord nation = aggregate_children(
        RegionId{nation_id, RegionLevel::nation, ""},
        std::span<const RegionRecord* const>(state_ptrs.data(), state_ptrs.size()));

    for (RegionRecord& s : states) bundle.records.emplace(s.region.id, std::move(s));
    bundle.records.emplace(nation_id, std::move(nation));
    return bundle;
}

}  // namespace covihawkes
