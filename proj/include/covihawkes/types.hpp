#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "covihawkes/dates.hpp"

namespace covihawkes {

/// 1-based day ordinal counted from a record's first observed date.
using DayIndex = int;

enum class RegionLevel { nation, state, district };

RegionLevel region_level_from_string(std::string_view text);
std::string_view to_string(RegionLevel level);

struct RegionId {
    std::string id;
    RegionLevel level = RegionLevel::district;
    std::string parent;  // empty for the nation
};

/// One region's aligned daily series. Immutable after construction; shared
/// freely across parallel per-region jobs.
struct RegionRecord {
    RegionId region;
    std::vector<std::int64_t> cases;            // new cases C(t)
    std::vector<std::vector<double>> mobility;  // m(t), percentage-change units
    std::vector<std::int64_t> vaccinated;       // cumulative V(t)
    std::int64_t population = 0;                // N
    Date start_date;

    DayIndex length() const { return static_cast<DayIndex>(cases.size()); }
    Date date_of(DayIndex t) const;
    DayIndex day_of(const Date& date) const;  // inverse of date_of, may fall outside 1..length()

    std::int64_t case_count(DayIndex t) const;
    const std::vector<double>& mobility_at(DayIndex t) const;
    std::int64_t vaccinated_at(DayIndex t) const;

    /// Copy truncated to days 1..last_day.
    RegionRecord prefix(DayIndex last_day) const;

    /// Checks the series cover one contiguous day range, vaccination is
    /// non-decreasing, and cumulative cases plus vaccinated never exceed the
    /// population. Throws DataConsistencyError / std::invalid_argument.
    void validate(int mobility_dim) const;
};

/// Total infected strictly before day t: sum of C(1..t-1). Accepts
/// t in 1..length()+1; t = 1 gives 0.
std::int64_t cumulative_infected(const RegionRecord& record, DayIndex t);

/// Structural hyperparameters and optimizer settings.
struct ModelConfig {
    int lag_window = 28;      // L, days of excitation history
    int incubation_gap = 14;  // delta, extra lag on mobility features
    int mobility_dim = 6;     // d_m
    int hidden = 32;          // recurrent hidden size

    double learning_rate = 1e-2;
    int max_iterations = 2000;
    double tolerance = 1e-6;  // relative best-NLL improvement counted as progress
    int patience = 50;        // consecutive no-progress iterations before stopping
    std::uint64_t seed = 42;

    void validate() const;
};

/// Earliest day whose likelihood term is fully observed: the intensity at day
/// t consumes reproduction values for days t-1..t-L, and each of those needs
/// its own lag window of mobility (shifted by the incubation gap) and counts.
DayIndex first_scored_day(const ModelConfig& config);

}  // namespace covihawkes
