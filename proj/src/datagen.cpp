#include "cyclecast/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyclecast/errors.hpp"
#include "cyclecast/io_util.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast::datagen {

void validate(const GeneratorConfig& config) {
    if (config.cycle_std < 0.0 || config.period_std < 0.0) {
        throw std::invalid_argument("standard deviations must be non-negative");
    }
    if (config.cycle_bounds.lo > config.cycle_bounds.hi ||
        config.period_bounds.lo > config.period_bounds.hi) {
        throw std::invalid_argument("bounds must satisfy lo <= hi");
    }
    if (config.period_bounds.lo < 1) {
        throw std::invalid_argument("period bounds must start at 1 day or later");
    }
    if (config.period_bounds.hi >= config.cycle_bounds.lo) {
        throw std::invalid_argument(
            "period_bounds.hi must be below cycle_bounds.lo (a period never exceeds its cycle)");
    }
    if (config.cycle_bounds.lo < 21 || config.cycle_bounds.hi > 60) {
        throw std::invalid_argument("cycle bounds must stay inside the [21, 60] day envelope");
    }
    if (config.n_cycles < 1) {
        throw std::invalid_argument("n_cycles must be positive");
    }
}

GeneratorConfig case_preset(CaseId case_id) {
    GeneratorConfig config;
    switch (case_id) {
        case CaseId::Case1:
            config.cycle_bounds = {28, 30};
            config.period_bounds = {5, 5};
            config.anchor = Anchor::CycleStart;
            break;
        case CaseId::Case2:
            config.cycle_bounds = {28, 35};
            config.period_bounds = {5, 6};
            config.anchor = Anchor::CycleEnd;
            break;
        case CaseId::Case3:
            config.cycle_bounds = {28, 49};
            config.period_bounds = {4, 8};
            config.anchor = Anchor::MidCycle;
            break;
        default:
            throw std::invalid_argument("unknown case id");
    }
    config.cycle_mean = config.cycle_bounds.midpoint();
    config.cycle_std = config.cycle_bounds.width() / 6.0;
    config.period_mean = config.period_bounds.midpoint();
    config.period_std = config.period_bounds.width() / 6.0;
    return config;
}

namespace {

constexpr int kMaxDrawsPerValue = 10000;

int draw_bounded(Rng& rng, double mean, double stddev, const Bounds& bounds,
                 const char* label) {
    for (int attempt = 0; attempt < kMaxDrawsPerValue; ++attempt) {
        const double z = rng.normal();
        const int value = static_cast<int>(std::lround(mean + stddev * z));
        if (bounds.contains(value)) return value;
    }
    throw DistributionInfeasible(std::string(label) + " bounds [" +
                                 std::to_string(bounds.lo) + ", " + std::to_string(bounds.hi) +
                                 "] unreachable from mean " + format_double(mean) +
                                 ", std " + format_double(stddev));
}

int anchored_start_day(Anchor anchor, int cycle_length, int period_length) {
    const int last_valid = cycle_length - period_length + 1;
    switch (anchor) {
        case Anchor::CycleStart:
            return 1;
        case Anchor::CycleEnd:
            return last_valid;
        case Anchor::MidCycle: {
            const int start = cycle_length / 2 - period_length / 2;
            return std::clamp(start, 1, last_valid);
        }
    }
    throw std::invalid_argument("unknown anchor");
}

}  // namespace

CycleSeries generate(const GeneratorConfig& config) {
    validate(config);

    Rng rng(config.seed);
    CycleSeries series;
    series.provenance = config_to_kv(config);
    series.records.reserve(static_cast<std::size_t>(config.n_cycles));

    for (int i = 0; i < config.n_cycles; ++i) {
        CycleRecord record;
        record.cycle_length =
            draw_bounded(rng, config.cycle_mean, config.cycle_std, config.cycle_bounds, "cycle");
        record.period_length = draw_bounded(rng, config.period_mean, config.period_std,
                                            config.period_bounds, "period");
        record.period_start_day =
            anchored_start_day(config.anchor, record.cycle_length, record.period_length);
        series.records.push_back(record);
    }
    return series;
}

namespace {

// Midpoint interpolation: position (n-1)*q lands either on an order statistic
// or between two, in which case their average is taken.
double quartile(const std::vector<int>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double pos = static_cast<double>(n - 1) * q;
    const auto lower = static_cast<std::size_t>(std::floor(pos));
    const auto upper = static_cast<std::size_t>(std::ceil(pos));
    if (lower == upper) return sorted[lower];
    return 0.5 * (sorted[lower] + sorted[upper]);
}

ChannelSummary summarize_channel(std::vector<int> values) {
    ChannelSummary summary;
    const std::size_t n = values.size();
    double sum = 0.0;
    for (int v : values) sum += v;
    summary.mean = sum / static_cast<double>(n);

    double ss = 0.0;
    for (int v : values) {
        const double d = v - summary.mean;
        ss += d * d;
    }
    summary.stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

    std::sort(values.begin(), values.end());
    summary.min = values.front();
    summary.max = values.back();
    summary.q1 = quartile(values, 0.25);
    summary.median = quartile(values, 0.5);
    summary.q3 = quartile(values, 0.75);
    return summary;
}

}  // namespace

SeriesSummary summarize(const CycleSeries& series) {
    if (series.empty()) throw EmptyInput("cannot summarize an empty series");

    std::vector<int> cycles, periods;
    cycles.reserve(series.size());
    periods.reserve(series.size());
    for (const auto& record : series.records) {
        cycles.push_back(record.cycle_length);
        periods.push_back(record.period_length);
    }

    SeriesSummary summary;
    summary.count = series.size();
    summary.cycle = summarize_channel(std::move(cycles));
    summary.period = summarize_channel(std::move(periods));
    return summary;
}

std::string anchor_name(Anchor anchor) {
    switch (anchor) {
        case Anchor::CycleStart: return "CycleStart";
        case Anchor::CycleEnd: return "CycleEnd";
        case Anchor::MidCycle: return "MidCycle";
    }
    throw std::invalid_argument("unknown anchor");
}

Anchor anchor_from_name(const std::string& name) {
    if (name == "CycleStart") return Anchor::CycleStart;
    if (name == "CycleEnd") return Anchor::CycleEnd;
    if (name == "MidCycle") return Anchor::MidCycle;
    throw std::invalid_argument("unknown anchor: '" + name + "'");
}

std::string config_to_kv(const GeneratorConfig& config) {
    KvPairs pairs;
    pairs.emplace_back("cycle_mean", format_double(config.cycle_mean));
    pairs.emplace_back("cycle_std", format_double(config.cycle_std));
    pairs.emplace_back("period_mean", format_double(config.period_mean));
    pairs.emplace_back("period_std", format_double(config.period_std));
    pairs.emplace_back("cycle_bounds", std::to_string(config.cycle_bounds.lo) + "," +
                                           std::to_string(config.cycle_bounds.hi));
    pairs.emplace_back("period_bounds", std::to_string(config.period_bounds.lo) + "," +
                                            std::to_string(config.period_bounds.hi));
    pairs.emplace_back("anchor", anchor_name(config.anchor));
    pairs.emplace_back("n_cycles", std::to_string(config.n_cycles));
    pairs.emplace_back("seed", std::to_string(config.seed));
    return kv_to_string(pairs);
}

namespace {

Bounds parse_bounds(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw std::invalid_argument("bounds must be 'lo,hi', got '" + text + "'");
    return Bounds{static_cast<int>(parse_int(parts[0])), static_cast<int>(parse_int(parts[1]))};
}

}  // namespace

GeneratorConfig config_from_kv(const std::string& text) {
    const KvPairs pairs = kv_parse(text);
    GeneratorConfig config;
    config.cycle_mean = parse_double(kv_get(pairs, "cycle_mean"));
    config.cycle_std = parse_double(kv_get(pairs, "cycle_std"));
    config.period_mean = parse_double(kv_get(pairs, "period_mean"));
    config.period_std = parse_double(kv_get(pairs, "period_std"));
    config.cycle_bounds = parse_bounds(kv_get(pairs, "cycle_bounds"));
    config.period_bounds = parse_bounds(kv_get(pairs, "period_bounds"));
    config.anchor = anchor_from_name(kv_get(pairs, "anchor"));
    config.n_cycles = static_cast<int>(parse_int(kv_get(pairs, "n_cycles")));
    config.seed = static_cast<std::uint64_t>(parse_int(kv_get(pairs, "seed")));
    return config;
}

}  // namespace cyclecast::datagen
