#include "covihawkes/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "covihawkes/csv.hpp"
#include "covihawkes/errors.hpp"

namespace covihawkes {

const RegionRecord& DatasetBundle::at(const std::string& region_id) const {
    const auto it = records.find(region_id);
    if (it == records.end()) {
        throw UnknownRegionError("region '" + region_id + "' not present in the dataset");
    }
    return it->second;
}

std::vector<std::string> DatasetBundle::region_ids(RegionLevel level) const {
    std::vector<std::string> out;
    for (const auto& [id, record] : records) {
        if (record.region.level == level) out.push_back(id);
    }
    return out;
}

namespace {

constexpr int kMobilityDim = 6;

const std::vector<std::string> kCasesHeader = {"date", "region_id", "count"};
const std::vector<std::string> kMobilityHeader = {
    "date",    "region_id",  "retail_recreation", "grocery_pharmacy",
    "parks",   "transit",    "workplaces",        "residential"};
const std::vector<std::string> kVaccinationHeader = {"date", "region_id", "cumulative_vaccinated"};
const std::vector<std::string> kPopulationHeader = {"region_id", "population"};
const std::vector<std::string> kRegionsHeader = {"region_id", "level", "parent_id"};

std::map<std::string, RegionId> load_regions(const std::filesystem::path& path) {
    CsvReader reader(path, kRegionsHeader);
    std::map<std::string, RegionId> regions;
    while (auto row = reader.next()) {
        RegionId region;
        region.id = row->fields[0];
        try {
            region.level = region_level_from_string(row->fields[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(reader.file_name(), row->line, e.what());
        }
        region.parent = row->fields[2];
        if (region.id.empty()) {
            throw ParseError(reader.file_name(), row->line, "empty region id");
        }
        if (!regions.emplace(region.id, region).second) {
            throw ParseError(reader.file_name(), row->line, "duplicate region '" + region.id + "'");
        }
    }
    // hierarchy invariants
    for (const auto& [id, region] : regions) {
        switch (region.level) {
            case RegionLevel::nation:
                if (!region.parent.empty()) {
                    throw DataConsistencyError("nation '" + id + "' must not have a parent");
                }
                break;
            case RegionLevel::state:
            case RegionLevel::district: {
                const auto parent_it = regions.find(region.parent);
                if (parent_it == regions.end()) {
                    throw UnknownRegionError("region '" + id + "' references unknown parent '" +
                                             region.parent + "'");
                }
                const RegionLevel expected = region.level == RegionLevel::district
                                                 ? RegionLevel::state
                                                 : RegionLevel::nation;
                if (parent_it->second.level != expected) {
                    throw DataConsistencyError("region '" + id + "' has parent '" + region.parent +
                                               "' of level " +
                                               std::string(to_string(parent_it->second.level)) +
                                               ", expected " + std::string(to_string(expected)));
                }
                break;
            }
        }
    }
    return regions;
}

Date parse_date_field(const std::string& field, const std::string& file, int line) {
    try {
        return Date::parse_iso(field);
    } catch (const std::invalid_argument& e) {
        throw ParseError(file, line, e.what());
    }
}

void require_known(const std::map<std::string, RegionId>& regions, const std::string& id,
                   const std::string& file, int line) {
    if (!regions.contains(id)) {
        throw UnknownRegionError(file + " line " + std::to_string(line) + ": region '" + id +
                                 "' not listed in regions file");
    }
}

template <typename T>
using SeriesMap = std::map<std::string, std::map<Date, T>>;

/// Tracks the intersection of per-series observed ranges.
struct RangeTracker {
    Date first{1900, 1, 1};
    Date last{3000, 1, 1};
    bool any = false;

    template <typename T>
    void include(const std::map<Date, T>& series) {
        if (first < series.begin()->first) first = series.begin()->first;
        if (series.rbegin()->first < last) last = series.rbegin()->first;
        any = true;
    }
};

}  // namespace

DatasetBundle load_bundle(const std::filesystem::path& cases_path,
                          const std::filesystem::path& mobility_path,
                          const std::filesystem::path& vaccination_path,
                          const std::filesystem::path& population_path,
                          const std::filesystem::path& regions_path) {
    const std::map<std::string, RegionId> regions = load_regions(regions_path);

    std::map<std::string, std::int64_t> population;
    {
        CsvReader reader(population_path, kPopulationHeader);
        while (auto row = reader.next()) {
            require_known(regions, row->fields[0], reader.file_name(), row->line);
            const std::int64_t pop = parse_int64(row->fields[1], reader.file_name(), row->line);
            if (pop <= 0) {
                throw ParseError(reader.file_name(), row->line,
                                 "population must be positive for region '" + row->fields[0] + "'");
            }
            population[row->fields[0]] = pop;
        }
    }

    SeriesMap<std::int64_t> cases;
    {
        CsvReader reader(cases_path, kCasesHeader);
        while (auto row = reader.next()) {
            const Date date = parse_date_field(row->fields[0], reader.file_name(), row->line);
            require_known(regions, row->fields[1], reader.file_name(), row->line);
            cases[row->fields[1]][date] =
                parse_int64(row->fields[2], reader.file_name(), row->line);
        }
    }

    SeriesMap<std::vector<double>> mobility;
    {
        CsvReader reader(mobility_path, kMobilityHeader);
        while (auto row = reader.next()) {
            const Date date = parse_date_field(row->fields[0], reader.file_name(), row->line);
            require_known(regions, row->fields[1], reader.file_name(), row->line);
            std::vector<double> m(kMobilityDim);
            for (int k = 0; k < kMobilityDim; ++k) {
                m[static_cast<std::size_t>(k)] = parse_double(
                    row->fields[static_cast<std::size_t>(k) + 2], reader.file_name(), row->line);
            }
            mobility[row->fields[1]][date] = std::move(m);
        }
    }

    SeriesMap<std::int64_t> vaccination;
    {
        CsvReader reader(vaccination_path, kVaccinationHeader);
        while (auto row = reader.next()) {
            const Date date = parse_date_field(row->fields[0], reader.file_name(), row->line);
            require_known(regions, row->fields[1], reader.file_name(), row->line);
            vaccination[row->fields[1]][date] =
                parse_int64(row->fields[2], reader.file_name(), row->line);
        }
    }

    RangeTracker range;
    for (const auto& [id, region] : regions) {
        if (!cases.contains(id)) {
            throw DataConsistencyError("region '" + id + "' has no rows in cases file");
        }
        if (!mobility.contains(id)) {
            throw DataConsistencyError("region '" + id + "' has no rows in mobility file");
        }
        if (!vaccination.contains(id)) {
            throw DataConsistencyError("region '" + id + "' has no rows in vaccination file");
        }
        if (!population.contains(id)) {
            throw DataConsistencyError("region '" + id + "' has no row in population file");
        }
        range.include(cases.at(id));
        range.include(mobility.at(id));
        range.include(vaccination.at(id));
    }
    if (!range.any || range.last < range.first) {
        throw DataConsistencyError("input series share no common date range");
    }

    DatasetBundle bundle;
    bundle.first_date = range.first;
    bundle.last_date = range.last;
    const int days = (range.last - range.first) + 1;

    for (const auto& [id, region] : regions) {
        RegionRecord record;
        record.region = region;
        record.population = population.at(id);
        record.start_date = range.first;
        record.cases.reserve(static_cast<std::size_t>(days));
        record.mobility.reserve(static_cast<std::size_t>(days));
        record.vaccinated.reserve(static_cast<std::size_t>(days));

        const auto& case_series = cases.at(id);
        const auto& mobility_series = mobility.at(id);
        const auto& vaccination_series = vaccination.at(id);

        for (int d = 0; d < days; ++d) {
            const Date date = range.first + d;

            // counts: gaps are 0, negatives clamp to 0
            std::int64_t count = 0;
            if (const auto it = case_series.find(date); it != case_series.end()) {
                count = it->second;
                if (count < 0) {
                    bundle.warnings.push_back("region " + id + " " + date.to_iso() +
                                              ": negative case count " + std::to_string(count) +
                                              " clamped to 0");
                    count = 0;
                }
            } else {
                bundle.warnings.push_back("region " + id + " " + date.to_iso() +
                                          ": missing case count filled with 0");
            }
            record.cases.push_back(count);

            // mobility: linear interpolation between nearest observations
            if (const auto it = mobility_series.find(date); it != mobility_series.end()) {
                record.mobility.push_back(it->second);
            } else {
                const auto after = mobility_series.lower_bound(date);
                std::vector<double> filled(kMobilityDim, 0.0);
                if (after == mobility_series.begin()) {
                    filled = after->second;  // nearest-value extension at the left edge
                } else if (after == mobility_series.end()) {
                    filled = std::prev(after)->second;
                } else {
                    const auto before = std::prev(after);
                    const double gap = after->first - before->first;
                    const double alpha = static_cast<double>(date - before->first) / gap;
                    for (int k = 0; k < kMobilityDim; ++k) {
                        const auto ks = static_cast<std::size_t>(k);
                        filled[ks] = (1.0 - alpha) * before->second[ks] + alpha * after->second[ks];
                    }
                }
                bundle.warnings.push_back("region " + id + " " + date.to_iso() +
                                          ": missing mobility interpolated");
                record.mobility.push_back(std::move(filled));
            }

            // vaccination: carry the previous observation forward
            if (const auto it = vaccination_series.find(date); it != vaccination_series.end()) {
                record.vaccinated.push_back(it->second);
            } else {
                const auto after = vaccination_series.lower_bound(date);
                const std::int64_t filled = after == vaccination_series.begin()
                                                ? after->second
                                                : std::prev(after)->second;
                bundle.warnings.push_back("region " + id + " " + date.to_iso() +
                                          ": missing vaccination carried forward");
                record.vaccinated.push_back(filled);
            }
        }

        record.validate(kMobilityDim);  // throws DataConsistencyError naming region and date
        bundle.records.emplace(id, std::move(record));
    }
    return bundle;
}

RegionRecord aggregate_children(const RegionId& parent,
                                std::span<const RegionRecord* const> children) {
    if (children.empty()) {
        throw EmptyAggregationError("no child records for region '" + parent.id + "'");
    }
    const RegionRecord& first = *children.front();
    RegionRecord out;
    out.region = parent;
    out.start_date = first.start_date;
    const std::size_t days = first.cases.size();
    const std::size_t dim = first.mobility.empty() ? 0 : first.mobility.front().size();

    out.cases.assign(days, 0);
    out.vaccinated.assign(days, 0);
    out.mobility.assign(days, std::vector<double>(dim, 0.0));
    double total_pop = 0.0;
    for (const RegionRecord* child : children) {
        if (child->cases.size() != days || !(child->start_date == first.start_date)) {
            throw std::invalid_argument("child records of '" + parent.id +
                                        "' do not share one date range");
        }
        out.population += child->population;
        total_pop += static_cast<double>(child->population);
    }
    for (const RegionRecord* child : children) {
        const double weight = static_cast<double>(child->population) / total_pop;
        for (std::size_t d = 0; d < days; ++d) {
            out.cases[d] += child->cases[d];
            out.vaccinated[d] += child->vaccinated[d];
            for (std::size_t k = 0; k < dim; ++k) {
                out.mobility[d][k] += weight * child->mobility[d][k];
            }
        }
    }
    return out;
}

DatasetBundle aggregate_up(const DatasetBundle& bundle, RegionLevel level) {
    if (level == RegionLevel::district) {
        throw std::invalid_argument("districts have no child level to aggregate");
    }
    const RegionLevel child_level =
        level == RegionLevel::nation ? RegionLevel::state : RegionLevel::district;

    std::map<std::string, std::vector<const RegionRecord*>> by_parent;
    std::map<std::string, RegionId> parent_ids;
    for (const auto& [id, record] : bundle.records) {
        if (record.region.level == child_level) {
            by_parent[record.region.parent].push_back(&record);
        }
        if (record.region.level == level) {
            parent_ids[id] = record.region;
        }
    }
    if (by_parent.empty()) {
        throw EmptyAggregationError("bundle holds no " +
                                    std::string(to_string(child_level)) +
                                    "-level records to aggregate");
    }

    DatasetBundle out;
    out.first_date = bundle.first_date;
    out.last_date = bundle.last_date;
    for (const auto& [parent_id, children] : by_parent) {
        RegionId parent;
        if (const auto it = parent_ids.find(parent_id); it != parent_ids.end()) {
            parent = it->second;
        } else {
            parent.id = parent_id;
            parent.level = level;
            parent.parent.clear();
        }
        out.records.emplace(parent_id,
                            aggregate_children(parent, std::span<const RegionRecord* const>(
                                                           children.data(), children.size())));
    }
    return out;
}

void write_bundle_csvs(const DatasetBundle& bundle, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::ofstream cases_out(directory / "cases.csv");
    std::ofstream mobility_out(directory / "mobility.csv");
    std::ofstream vaccination_out(directory / "vaccination.csv");
    std::ofstream population_out(directory / "population.csv");
    std::ofstream regions_out(directory / "regions.csv");
    if (!cases_out || !mobility_out || !vaccination_out || !population_out || !regions_out) {
        throw std::runtime_error("cannot write dataset files under " + directory.string());
    }

    cases_out << "date,region_id,count\n";
    mobility_out << "date,region_id,retail_recreation,grocery_pharmacy,parks,transit,workplaces,"
                    "residential\n";
    vaccination_out << "date,region_id,cumulative_vaccinated\n";
    population_out << "region_id,population\n";
    regions_out << "region_id,level,parent_id\n";

    for (const auto& [id, record] : bundle.records) {
        regions_out << id << ',' << to_string(record.region.level) << ',' << record.region.parent
                    << '\n';
        population_out << id << ',' << record.population << '\n';
        for (DayIndex t = 1; t <= record.length(); ++t) {
            const std::string date = record.date_of(t).to_iso();
            const auto idx = static_cast<std::size_t>(t) - 1;
            cases_out << date << ',' << id << ',' << record.cases[idx] << '\n';
            mobility_out << date << ',' << id;
            for (const double m : record.mobility[idx]) mobility_out << ',' << fixed6(m);
            mobility_out << '\n';
            vaccination_out << date << ',' << id << ',' << record.vaccinated[idx] << '\n';
        }
    }
}

}  // namespace covihawkes
