#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace covihawkes {

struct CsvRow {
    std::vector<std::string> fields;
    int line = 0;
};

/// Minimal comma-separated reader: one header row, no quoting. Every data row
/// must match the header's field count; violations raise ParseError with the
/// offending line number.
class CsvReader {
public:
    CsvReader(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

    std::optional<CsvRow> next();

    const std::string& file_name() const { return file_name_; }

private:
    std::ifstream in_;
    std::string file_name_;
    std::size_t field_count_ = 0;
    int line_ = 1;
};

std::int64_t parse_int64(const std::string& field, const std::string& file, int line);
double parse_double(const std::string& field, const std::string& file, int line);

/// Fixed 6-decimal formatting used by every numeric output column.
std::string fixed6(double value);

}  // namespace covihawkes
