#pragma once

#include <cstdint>
#include <string>

#include "cyclecast/series.hpp"

namespace cyclecast::datagen {

/// Where the period sits inside its cycle.
enum class Anchor { CycleStart, CycleEnd, MidCycle };

enum class CaseId { Case1 = 1, Case2 = 2, Case3 = 3 };

struct Bounds {
    int lo = 0;
    int hi = 0;

    bool contains(int v) const { return v >= lo && v <= hi; }
    int width() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// Sampling parameters for one synthetic series. Cycle and period lengths are
/// drawn as mean + std * z with z standard normal, rounded to whole days, and
/// rejection-resampled until they land inside their bounds.
struct GeneratorConfig {
    double cycle_mean = 29.0;
    double cycle_std = 0.0;
    double period_mean = 5.0;
    double period_std = 0.0;
    Bounds cycle_bounds{28, 30};
    Bounds period_bounds{5, 5};
    Anchor anchor = Anchor::CycleStart;
    int n_cycles = 100;
    std::uint64_t seed = 42;
};

void validate(const GeneratorConfig& config);

/// Bounds, anchor, and moments for one of the three study regimes.
/// Means are interval midpoints; stds are interval width / 6.
GeneratorConfig case_preset(CaseId case_id);

CycleSeries generate(const GeneratorConfig& config);

struct ChannelSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1 denominator)
    int min = 0;
    int max = 0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct SeriesSummary {
    std::size_t count = 0;
    ChannelSummary cycle;
    ChannelSummary period;
};

/// Quartiles use midpoint interpolation: when the quartile position falls
/// between two order statistics, their average is taken.
SeriesSummary summarize(const CycleSeries& series);

std::string anchor_name(Anchor anchor);
Anchor anchor_from_name(const std::string& name);

/// Flat key=value serialization, field names matching GeneratorConfig.
std::string config_to_kv(const GeneratorConfig& config);
GeneratorConfig config_from_kv(const std::string& text);

}  // namespace cyclecast::datagen
