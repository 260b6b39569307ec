#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "covihawkes/types.hpp"

namespace covihawkes {

/// All regions' records aligned to one shared date range.
struct DatasetBundle {
    std::map<std::string, RegionRecord> records;  // keyed by region id
    Date first_date;
    Date last_date;
    std::vector<std::string> warnings;  // fill/clamp events collected during loading

    const RegionRecord& at(const std::string& region_id) const;
    std::vector<std::string> region_ids(RegionLevel level) const;
};

/// Loads and aligns the five input files. Series are clipped to the
/// intersection of all regions' observed dates. Interior gaps: case counts
/// fill with 0, mobility interpolates linearly between nearest observations
/// (nearest-value at the edges), cumulative vaccination carries the previous
/// value forward. Negative daily counts clamp to 0. Every fill or clamp adds
/// a warning.
DatasetBundle load_bundle(const std::filesystem::path& cases_path,
                          const std::filesystem::path& mobility_path,
                          const std::filesystem::path& vaccination_path,
                          const std::filesystem::path& population_path,
                          const std::filesystem::path& regions_path);

/// Builds records at `level` by combining each parent's children: case and
/// vaccination series and population are summed, mobility is averaged with
/// child-population weights. The returned bundle holds only the aggregated
/// level's records.
DatasetBundle aggregate_up(const DatasetBundle& bundle, RegionLevel level);

/// Combines explicit child records into one parent record (the aggregation
/// primitive behind aggregate_up, also used to build consistent synthetic
/// hierarchies).
RegionRecord aggregate_children(const RegionId& parent,
                                std::span<const RegionRecord* const> children);

/// Writes a bundle back out in the five input schemas; inverse of
/// load_bundle for fully aligned data. Row order is deterministic.
void write_bundle_csvs(const DatasetBundle& bundle, const std::filesystem::path& directory);

}  // namespace covihawkes
