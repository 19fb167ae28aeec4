#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cyclecast {

/// One observed cycle: total length in days, bleeding length in days, and the
/// 1-based day-of-cycle on which bleeding starts.
struct CycleRecord {
    int cycle_length = 0;
    int period_length = 0;
    int period_start_day = 1;
};

/// Throws std::invalid_argument when the record is internally inconsistent
/// (period at least as long as the cycle, or a start day that would push the
/// period past the cycle end).
void validate(const CycleRecord& record);

struct CycleSeries {
    std::vector<CycleRecord> records;
    /// Generator config as key=value text, or "external" for loaded data.
    std::string provenance = "external";

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    std::vector<double> cycle_values() const;
    std::vector<double> period_values() const;
};

/// Non-empty and every record valid.
void validate(const CycleSeries& series);

/// CSV with header `index,cycle_length,period_length,period_start_day`,
/// LF line endings, one row per cycle.
std::string series_to_csv(const CycleSeries& series);
CycleSeries series_from_csv(const std::string& text);

}  // namespace cyclecast
