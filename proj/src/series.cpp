#include "cyclecast/series.hpp"

#include <stdexcept>

#include "cyclecast/errors.hpp"
#include "cyclecast/io_util.hpp"

namespace cyclecast {

void validate(const CycleRecord& record) {
    if (record.period_length < 1 || record.period_length >= record.cycle_length) {
        throw std::invalid_argument(
            "period_length must satisfy 1 <= period_length < cycle_length, got " +
            std::to_string(record.period_length) + " in a cycle of " +
            std::to_string(record.cycle_length));
    }
    const int last_valid_start = record.cycle_length - record.period_length + 1;
    if (record.period_start_day < 1 || record.period_start_day > last_valid_start) {
        throw std::invalid_argument(
            "period_start_day must be in [1, " + std::to_string(last_valid_start) +
            "], got " + std::to_string(record.period_start_day));
    }
}

void validate(const CycleSeries& series) {
    if (series.empty()) throw EmptyInput("series has no records");
    for (const auto& record : series.records) validate(record);
}

std::vector<double> CycleSeries::cycle_values() const {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(static_cast<double>(r.cycle_length));
    return values;
}

std::vector<double> CycleSeries::period_values() const {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(static_cast<double>(r.period_length));
    return values;
}

namespace {

constexpr const char* kSeriesHeader = "index,cycle_length,period_length,period_start_day";

int parse_field(const std::string& text, std::size_t row, const char* column) {
    try {
        const long long value = parse_int(text);
        if (value < -(1LL << 31) || value > (1LL << 31)) {
            throw std::invalid_argument("out of range");
        }
        return static_cast<int>(value);
    } catch (const std::invalid_argument&) {
        throw CsvParseError("row " + std::to_string(row) + ", column " + column +
                                ": not an integer: '" + text + "'",
                            row, column);
    }
}

}  // namespace

std::string series_to_csv(const CycleSeries& series) {
    std::string out = kSeriesHeader;
    out += '\n';
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const auto& r = series.records[i];
        out += std::to_string(i);
        out += ',';
        out += std::to_string(r.cycle_length);
        out += ',';
        out += std::to_string(r.period_length);
        out += ',';
        out += std::to_string(r.period_start_day);
        out += '\n';
    }
    return out;
}

CycleSeries series_from_csv(const std::string& text) {
    auto lines = split(text, '\n');
    // A trailing LF leaves one empty final element.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines[0] != kSeriesHeader) {
        throw CsvParseError("row 0: expected header '" + std::string(kSeriesHeader) + "'",
                            0, "header");
    }

    CycleSeries series;
    series.provenance = "external";
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const auto fields = split(lines[row], ',');
        if (fields.size() != 4) {
            throw CsvParseError("row " + std::to_string(row) + ": expected 4 fields, got " +
                                    std::to_string(fields.size()),
                                row, "row");
        }
        parse_field(fields[0], row, "index");
        CycleRecord record;
        record.cycle_length = parse_field(fields[1], row, "cycle_length");
        record.period_length = parse_field(fields[2], row, "period_length");
        record.period_start_day = parse_field(fields[3], row, "period_start_day");
        try {
            validate(record);
        } catch (const std::invalid_argument& err) {
            throw CsvParseError("row " + std::to_string(row) + ": " + err.what(), row,
                                "record");
        }
        series.records.push_back(record);
    }
    if (series.empty()) throw CsvParseError("no data rows", 0, "rows");
    return series;
}

}  // namespace cyclecast
