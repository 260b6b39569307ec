#include "covihawkes/types.hpp"

#include <stdexcept>

#include "covihawkes/errors.hpp"

namespace covihawkes {

RegionLevel region_level_from_string(std::string_view text) {
    if (text == "nation") return RegionLevel::nation;
    if (text == "state") return RegionLevel::state;
    if (text == "district") return RegionLevel::district;
    throw std::invalid_argument("unknown region level '" + std::string(text) + "'");
}

std::string_view to_string(RegionLevel level) {
    switch (level) {
        case RegionLevel::nation: return "nation";
        case RegionLevel::state: return "state";
        case RegionLevel::district: return "district";
    }
    throw std::logic_error("unreachable region level");
}

namespace {

void check_day(const RegionRecord& record, DayIndex t, const char* what) {
    if (t < 1 || t > record.length()) {
        throw std::out_of_range(std::string(what) + ": day " + std::to_string(t) +
                                " outside observed range 1.." + std::to_string(record.length()));
    }
}

}  // namespace

Date RegionRecord::date_of(DayIndex t) const { return start_date.plus_days(t - 1); }

DayIndex RegionRecord::day_of(const Date& date) const { return (date - start_date) + 1; }

std::int64_t RegionRecord::case_count(DayIndex t) const {
    check_day(*this, t, "case_count");
    return cases[static_cast<std::size_t>(t) - 1];
}

const std::vector<double>& RegionRecord::mobility_at(DayIndex t) const {
    check_day(*this, t, "mobility_at");
    return mobility[static_cast<std::size_t>(t) - 1];
}

std::int64_t RegionRecord::vaccinated_at(DayIndex t) const {
    check_day(*this, t, "vaccinated_at");
    return vaccinated[static_cast<std::size_t>(t) - 1];
}

RegionRecord RegionRecord::prefix(DayIndex last_day) const {
    check_day(*this, last_day, "prefix");
    RegionRecord out = *this;
    const auto n = static_cast<std::size_t>(last_day);
    out.cases.resize(n);
    out.mobility.resize(n);
    out.vaccinated.resize(n);
    return out;
}

void RegionRecord::validate(int mobility_dim) const {
    if (population <= 0) {
        throw std::invalid_argument("region " + region.id + ": population must be positive");
    }
    if (mobility.size() != cases.size() || vaccinated.size() != cases.size()) {
        throw std::invalid_argument("region " + region.id + ": series lengths differ");
    }
    for (const auto& m : mobility) {
        if (static_cast<int>(m.size()) != mobility_dim) {
            throw std::invalid_argument("region " + region.id + ": mobility vector dimension " +
                                        std::to_string(m.size()) + " != " +
                                        std::to_string(mobility_dim));
        }
    }
    std::int64_t cum = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (cases[i] < 0) {
            throw DataConsistencyError("region " + region.id + ": negative case count on " +
                                       date_of(static_cast<DayIndex>(i + 1)).to_iso());
        }
        if (i > 0 && vaccinated[i] < vaccinated[i - 1]) {
            throw DataConsistencyError("region " + region.id +
                                       ": cumulative vaccination decreases on " +
                                       date_of(static_cast<DayIndex>(i + 1)).to_iso());
        }
        cum += cases[i];
        if (cum + vaccinated[i] > population) {
            throw DataConsistencyError(
                "region " + region.id + ": infected plus vaccinated exceed population on " +
                date_of(static_cast<DayIndex>(i + 1)).to_iso());
        }
    }
}

std::int64_t cumulative_infected(const RegionRecord& record, DayIndex t) {
    if (t < 1 || t > record.length() + 1) {
        throw std::out_of_range("cumulative_infected: day " + std::to_string(t) +
                                " outside range 1.." + std::to_string(record.length() + 1));
    }
    std::int64_t sum = 0;
    for (DayIndex s = 1; s < t; ++s) {
        sum += record.cases[static_cast<std::size_t>(s) - 1];
    }
    return sum;
}

void ModelConfig::validate() const {
    if (lag_window < 1) throw std::invalid_argument("lag_window must be >= 1");
    if (incubation_gap < 0) throw std::invalid_argument("incubation_gap must be >= 0");
    if (mobility_dim < 1) throw std::invalid_argument("mobility_dim must be >= 1");
    if (hidden < 1) throw std::invalid_argument("hidden size must be >= 1");
    if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (tolerance < 0) throw std::invalid_argument("tolerance must be non-negative");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

DayIndex first_scored_day(const ModelConfig& config) {
    return 2 * config.lag_window + config.incubation_gap + 1;
}

}  // namespace covihawkes
