#include "covihawkes/csv.hpp"

#include <charconv>
#include <cstdio>

#include "covihawkes/errors.hpp"

namespace covihawkes {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        std::string field = line.substr(begin, comma == std::string::npos ? comma : comma - begin);
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(std::move(field));
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ',';
        out += fields[i];
    }
    return out;
}

}  // namespace

CsvReader::CsvReader(const std::filesystem::path& path,
                     const std::vector<std::string>& expected_header)
    : in_(path), file_name_(path.filename().string()), field_count_(expected_header.size()) {
    if (!in_) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string header_line;
    if (!std::getline(in_, header_line)) {
        throw ParseError(file_name_, 1, "missing header row");
    }
    const auto header = split_fields(header_line);
    if (header != expected_header) {
        throw ParseError(file_name_, 1,
                         "header '" + join(header) + "' does not match expected '" +
                             join(expected_header) + "'");
    }
}

std::optional<CsvRow> CsvReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (line.empty() || line == "\r") continue;
        CsvRow row{split_fields(line), line_};
        if (row.fields.size() != field_count_) {
            throw ParseError(file_name_, line_,
                             "expected " + std::to_string(field_count_) + " fields, got " +
                                 std::to_string(row.fields.size()));
        }
        return row;
    }
    return std::nullopt;
}

std::int64_t parse_int64(const std::string& field, const std::string& file, int line) {
    std::int64_t value = 0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(file, line, "invalid integer '" + field + "'");
    }
    return value;
}

double parse_double(const std::string& field, const std::string& file, int line) {
    if (field.empty()) {
        throw ParseError(file, line, "empty numeric field");
    }
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) {
        throw ParseError(file, line, "invalid number '" + field + "'");
    }
    return value;
}

std::string fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

}  // namespace covihawkes
