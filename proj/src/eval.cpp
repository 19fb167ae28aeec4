#include "cyclecast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "cyclecast/errors.hpp"
#include "cyclecast/io_util.hpp"

namespace cyclecast::eval {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

// Interleaved lag windows over a history of (cycle, period) pairs: the same
// layout features::make_windows emits, but double-native so fed-back
// fractional predictions stay exact.
features::SupervisedWindows history_windows(const History& history,
                                            int window_len, int horizon) {
    if (window_len < 1 || horizon < 1) {
        throw std::invalid_argument("window_len and horizon must be >= 1");
    }
    const int n = static_cast<int>(history.size());
    const int rows = n - window_len - horizon + 1;
    if (rows < 1) {
        throw InsufficientHistory(
            "history of " + std::to_string(n) + " records supports no (" +
                std::to_string(window_len) + ", " + std::to_string(horizon) +
                ") windows",
            static_cast<std::size_t>(window_len + horizon));
    }

    features::SupervisedWindows out;
    out.window_len = window_len;
    out.horizon = horizon;
    out.inputs.resize(rows, 2 * window_len);
    out.targets.resize(rows, 2 * horizon);
    for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < window_len; ++k) {
            out.inputs(r, 2 * k) = history[r + k].cycle;
            out.inputs(r, 2 * k + 1) = history[r + k].period;
        }
        for (int k = 0; k < horizon; ++k) {
            out.targets(r, 2 * k) = history[r + window_len + k].cycle;
            out.targets(r, 2 * k + 1) = history[r + window_len + k].period;
        }
    }
    return out;
}

// Repeats the two channel ranges across n_cols columns (even: cycle, odd:
// period) so one scaler serves lag rows and target rows alike.
features::ScalerParams tile_scaler(const features::ScalerParams& channel_params,
                                   int n_cols) {
    features::ScalerParams out;
    out.col_min.resize(n_cols);
    out.col_max.resize(n_cols);
    for (int c = 0; c < n_cols; ++c) {
        out.col_min(c) = channel_params.col_min(c % 2);
        out.col_max(c) = channel_params.col_max(c % 2);
    }
    return out;
}

// The last window_len records flattened oldest-first as (cycle, period).
Eigen::RowVectorXd lag_row(const History& history, int window_len) {
    const int n = static_cast<int>(history.size());
    if (n < window_len) {
        throw InsufficientHistory(
            "history of " + std::to_string(n) +
                " records is shorter than the lag window",
            static_cast<std::size_t>(window_len));
    }
    Eigen::RowVectorXd row(2 * window_len);
    for (int k = 0; k < window_len; ++k) {
        row(2 * k) = history[n - window_len + k].cycle;
        row(2 * k + 1) = history[n - window_len + k].period;
    }
    return row;
}

// One-step conditional forecast for a single channel: replays the fitted
// innovation recursion over any observations past the fitted range (their
// shocks are whatever the frozen parameters leave over), then forecasts the
// next differenced value with a zero shock and integrates back to a level.
double arima_next(const arima::ArimaFit& fit, const arima::ArimaConfig& config,
                  const std::vector<double>& levels) {
    const int d = config.d;
    const int p = config.p;
    const int q = config.q;
    const int fitted_levels = static_cast<int>(fit.diffed.size()) + d;
    const int n_levels = static_cast<int>(levels.size());
    if (n_levels < fitted_levels) {
        throw std::invalid_argument(
            "history is shorter than the series the model was fitted on");
    }

    std::vector<double> w = fit.diffed;
    std::vector<double> e(w.size(), 0.0);
    const int warmup = std::max(p, q);
    const int known = std::min(static_cast<int>(w.size()) - warmup,
                               static_cast<int>(fit.residuals.size()));
    for (int t = warmup; t < warmup + known; ++t) {
        e[static_cast<std::size_t>(t)] =
            fit.residuals[static_cast<std::size_t>(t - warmup)];
    }

    const auto conditional_mean = [&](int t) {
        double next = fit.c;
        for (int i = 1; i <= p; ++i) next += fit.phi(i - 1) * w[t - i];
        for (int j = 1; j <= q; ++j) next += fit.theta(j - 1) * e[t - j];
        return next;
    };

    for (int m = fitted_levels; m < n_levels; ++m) {
        // d-times-differenced value at m from the trailing d+1 levels; the
        // stagewise subtraction matches arima::difference exactly.
        std::vector<double> tail(levels.begin() + (m - d),
                                 levels.begin() + m + 1);
        for (int stage = 0; stage < d; ++stage) {
            for (int i = 0; i < d - stage; ++i) tail[i] = tail[i + 1] - tail[i];
        }
        const double w_new = tail[0];
        const int t = static_cast<int>(w.size());
        const double shock = w_new - conditional_mean(t);
        w.push_back(w_new);
        e.push_back(shock);
    }

    std::vector<double> w_ext = w;
    w_ext.push_back(conditional_mean(static_cast<int>(w.size())));
    const auto level_path =
        arima::inverse_difference(w_ext, fit.initial_values, d);
    return level_path.back();
}

int checked_train_len(const CycleSeries& series, const EvalConfig& config) {
    if (config.horizon < 1) {
        throw std::invalid_argument("horizon must be >= 1");
    }
    const int n = static_cast<int>(series.size());
    if (n <= config.horizon) {
        throw InsufficientHistory(
            "series of " + std::to_string(n) +
                " records cannot hold out a horizon of " +
                std::to_string(config.horizon),
            static_cast<std::size_t>(config.horizon) + 1);
    }
    return n - config.horizon;
}

std::vector<std::string> selected_channels(const EvalConfig& config) {
    switch (config.channels) {
        case ChannelSelect::CycleOnly:
            return {"cycle"};
        case ChannelSelect::PeriodOnly:
            return {"period"};
        case ChannelSelect::Both:
            return {"cycle", "period"};
    }
    throw std::invalid_argument("unknown channel selection");
}

EvalOutcome run_protocol(const PredictFn& predict, const std::string& tag,
                         const CycleSeries& series, const EvalConfig& config) {
    const int train_len = checked_train_len(series, config);
    const History full = to_history(series);
    History working(full.begin(), full.begin() + train_len);

    EvalOutcome out;
    out.artifacts.model_tag = tag;
    auto& art = out.artifacts;
    for (int step = 0; step < config.horizon; ++step) {
        const ChannelPair actual = full[train_len + step];
        const ChannelPair raw = predict(working);
        ChannelPair scored = raw;
        if (config.round_predictions) {
            scored.cycle = std::round(raw.cycle);
            scored.period = std::round(raw.period);
        }
        art.actual_cycle.push_back(actual.cycle);
        art.predicted_cycle.push_back(scored.cycle);
        art.actual_period.push_back(actual.period);
        art.predicted_period.push_back(scored.period);
        // Feed-back always uses the raw prediction; rounding is a metric-
        // time reporting choice, not part of the forecast recursion.
        working.push_back(
            config.protocol == Protocol::RecursiveMultiStep ? raw : actual);
    }

    for (const auto& channel : selected_channels(config)) {
        const bool cycle = channel == "cycle";
        MetricReport report =
            compute_metrics(cycle ? art.actual_cycle : art.actual_period,
                            cycle ? art.predicted_cycle : art.predicted_period);
        report.model_tag = tag;
        report.channel = channel;
        report.horizon = config.horizon;
        out.reports.push_back(std::move(report));
    }
    return out;
}

}  // namespace

std::string protocol_name(Protocol protocol) {
    switch (protocol) {
        case Protocol::RecursiveMultiStep:
            return "recursive";
        case Protocol::RollingOneStep:
            return "rolling";
    }
    throw std::invalid_argument("unknown protocol");
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "recursive") return Protocol::RecursiveMultiStep;
    if (name == "rolling") return Protocol::RollingOneStep;
    throw std::invalid_argument("unknown protocol '" + name + "'");
}

std::string channel_select_name(ChannelSelect channels) {
    switch (channels) {
        case ChannelSelect::CycleOnly:
            return "cycle";
        case ChannelSelect::PeriodOnly:
            return "period";
        case ChannelSelect::Both:
            return "both";
    }
    throw std::invalid_argument("unknown channel selection");
}

ChannelSelect channel_select_from_name(const std::string& name) {
    if (name == "cycle") return ChannelSelect::CycleOnly;
    if (name == "period") return ChannelSelect::PeriodOnly;
    if (name == "both") return ChannelSelect::Both;
    throw std::invalid_argument("unknown channel selection '" + name + "'");
}

MetricReport compute_metrics(const std::vector<double>& actual,
                             const std::vector<double>& predicted) {
    if (actual.size() != predicted.size()) {
        throw ShapeError("actual has " + std::to_string(actual.size()) +
                         " entries but predicted has " +
                         std::to_string(predicted.size()));
    }
    if (actual.empty()) {
        throw EmptyInput("metric vectors are empty");
    }

    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double err = actual[i] - predicted[i];
        abs_sum += std::abs(err);
        sq_sum += err * err;
    }
    const double n = static_cast<double>(actual.size());

    MetricReport report;
    report.mae = abs_sum / n;
    report.mse = sq_sum / n;
    report.rmse = std::sqrt(report.mse);
    report.horizon = static_cast<int>(actual.size());
    return report;
}

History to_history(const CycleSeries& series) {
    History history;
    history.reserve(series.size());
    for (const auto& record : series.records) {
        history.push_back({static_cast<double>(record.cycle_length),
                           static_cast<double>(record.period_length)});
    }
    return history;
}

FittedModel fit_model(const ModelSpec& spec, const History& train) {
    if (spec.tag == "arima") {
        ArimaModel model;
        model.config = spec.arima_orders;
        std::vector<double> cycles;
        std::vector<double> periods;
        cycles.reserve(train.size());
        periods.reserve(train.size());
        for (const auto& pair : train) {
            cycles.push_back(pair.cycle);
            periods.push_back(pair.period);
        }
        model.cycle_fit = arima::fit_arima(cycles, model.config);
        model.period_fit = arima::fit_arima(periods, model.config);
        return model;
    }

    if (spec.tag == "lstm") {
        const auto windows = history_windows(train, spec.window_len, 1);
        LstmModel model;
        model.window_len = spec.window_len;
        model.scaler = features::fit_channel_scaler(windows, 2);

        features::SupervisedWindows scaled = windows;
        scaled.inputs = features::apply_scaler(
            windows.inputs, tile_scaler(model.scaler, 2 * spec.window_len));
        scaled.targets =
            features::apply_scaler(windows.targets, tile_scaler(model.scaler, 2));

        model.net = lstm::init_network(spec.lstm_train.architecture,
                                       spec.lstm_train.seed);
        model.loss_curve = lstm::train(model.net, scaled, spec.lstm_train).loss_curve;
        return model;
    }

    if (spec.tag == "ols" || spec.tag == "huber" || spec.tag == "lasso" ||
        spec.tag == "omp") {
        const auto windows = history_windows(train, spec.window_len, 1);
        linear::LinearFit fit;
        if (spec.tag == "ols") {
            fit = linear::fit_ols(windows.inputs, windows.targets);
        } else if (spec.tag == "huber") {
            fit = linear::fit_huber(windows.inputs, windows.targets, spec.huber);
        } else if (spec.tag == "lasso") {
            fit = linear::fit_lasso(windows.inputs, windows.targets, spec.lasso);
        } else {
            fit = linear::fit_omp(windows.inputs, windows.targets, spec.omp);
        }
        return LinearModel{std::move(fit), spec.window_len};
    }

    throw std::invalid_argument("unknown model tag '" + spec.tag + "'");
}

ChannelPair predict_next(const FittedModel& model, const History& history) {
    return std::visit(
        Overloaded{
            [&](const LinearModel& m) {
                const Eigen::RowVectorXd out =
                    linear::predict_linear(m.fit, lag_row(history, m.window_len));
                return ChannelPair{out(0), out(1)};
            },
            [&](const ArimaModel& m) {
                std::vector<double> cycles;
                std::vector<double> periods;
                cycles.reserve(history.size());
                periods.reserve(history.size());
                for (const auto& pair : history) {
                    cycles.push_back(pair.cycle);
                    periods.push_back(pair.period);
                }
                return ChannelPair{arima_next(m.cycle_fit, m.config, cycles),
                                   arima_next(m.period_fit, m.config, periods)};
            },
            [&](const LstmModel& m) {
                Eigen::MatrixXd row(1, 2 * m.window_len);
                row.row(0) = lag_row(history, m.window_len);
                const Eigen::MatrixXd scaled = features::apply_scaler(
                    row, tile_scaler(m.scaler, 2 * m.window_len));
                const Eigen::Vector2d pred = lstm::forward_sequence(
                    m.net, lstm::window_row_to_sequence(scaled.row(0)));
                Eigen::MatrixXd out(1, 2);
                out << pred(0), pred(1);
                const Eigen::MatrixXd levels =
                    features::invert_scaler(out, m.scaler);
                return ChannelPair{levels(0, 0), levels(0, 1)};
            },
        },
        model);
}

std::vector<MetricReport> rolling_eval(const PredictFn& predict,
                                       const std::string& tag,
                                       const CycleSeries& series,
                                       const EvalConfig& config) {
    return run_protocol(predict, tag, series, config).reports;
}

std::vector<MetricReport> rolling_eval(const ModelSpec& spec,
                                       const CycleSeries& series,
                                       const EvalConfig& config) {
    return evaluate_model(spec, series, config).reports;
}

EvalOutcome evaluate_model(const ModelSpec& spec, const CycleSeries& series,
                           const EvalConfig& config) {
    const int train_len = checked_train_len(series, config);
    const History full = to_history(series);
    const History train(full.begin(), full.begin() + train_len);

    const FittedModel model = fit_model(spec, train);
    EvalOutcome out = run_protocol(
        [&](const History& history) { return predict_next(model, history); },
        spec.tag, series, config);

    std::visit(Overloaded{
                   [&](const LinearModel& m) {
                       out.artifacts.fit_texts = {
                           {"model", kv_to_string(linear::fit_to_kv(m.fit))}};
                   },
                   [&](const ArimaModel& m) {
                       out.artifacts.fit_texts = {
                           {"cycle", kv_to_string(arima::arima_to_kv(m.cycle_fit))},
                           {"period",
                            kv_to_string(arima::arima_to_kv(m.period_fit))}};
                   },
                   [&](const LstmModel& m) {
                       out.artifacts.loss_curve = m.loss_curve;
                       out.artifacts.fit_texts = {
                           {"network", kv_to_string(lstm::network_to_kv(m.net))}};
                   },
               },
               model);
    return out;
}

void sort_table(std::vector<TableRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TableRow& a, const TableRow& b) {
                         if (a.failed != b.failed) return !a.failed;
                         if (a.failed) return false;  // keep input order
                         if (a.report.mae != b.report.mae)
                             return a.report.mae < b.report.mae;
                         if (a.report.rmse != b.report.rmse)
                             return a.report.rmse < b.report.rmse;
                         if (a.report.model_tag != b.report.model_tag)
                             return a.report.model_tag < b.report.model_tag;
                         return a.report.channel < b.report.channel;
                     });
}

Comparison compare_models(const CycleSeries& series,
                          const std::vector<ModelSpec>& specs,
                          const EvalConfig& config) {
    if (specs.empty()) {
        throw EmptyInput("model list is empty");
    }

    Comparison comparison;
    comparison.protocol = config.protocol;
    for (const auto& spec : specs) {
        try {
            EvalOutcome out = evaluate_model(spec, series, config);
            for (auto& report : out.reports) {
                comparison.rows.push_back({std::move(report), false, ""});
            }
            comparison.artifacts.push_back(std::move(out.artifacts));
        } catch (const std::exception& err) {
            for (const auto& channel : selected_channels(config)) {
                TableRow row;
                row.failed = true;
                row.error = err.what();
                row.report.model_tag = spec.tag;
                row.report.channel = channel;
                row.report.horizon = config.horizon;
                row.report.mae = std::numeric_limits<double>::quiet_NaN();
                row.report.mse = std::numeric_limits<double>::quiet_NaN();
                row.report.rmse = std::numeric_limits<double>::quiet_NaN();
                comparison.rows.push_back(std::move(row));
            }
        }
    }
    sort_table(comparison.rows);
    return comparison;
}

std::string table_to_csv(const Comparison& comparison) {
    std::string out = "model,channel,mae,mse,rmse,horizon,protocol\n";
    for (const auto& row : comparison.rows) {
        const auto& r = row.report;
        out += r.model_tag + "," + r.channel + ",";
        if (row.failed) {
            out += "nan,nan,nan";
        } else {
            out += format_double(r.mae) + "," + format_double(r.mse) + "," +
                   format_double(r.rmse);
        }
        out += "," + std::to_string(r.horizon) + "," +
               protocol_name(comparison.protocol) + "\n";
    }
    return out;
}

std::string table_to_text(const Comparison& comparison) {
    const std::vector<std::string> headers = {"model", "channel", "mae",
                                              "mse",   "rmse",    "status"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : comparison.rows) {
        const auto& r = row.report;
        if (row.failed) {
            cells.push_back({r.model_tag, r.channel, "-", "-", "-",
                             "failed: " + row.error});
        } else {
            cells.push_back({r.model_tag, r.channel, format_fixed(r.mae, 4),
                             format_fixed(r.mse, 4), format_fixed(r.rmse, 4),
                             "ok"});
        }
    }

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
    }
    const auto emit_row = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) line += "  ";
            line += row[c];
            if (c + 1 < row.size()) {
                line += std::string(widths[c] - row[c].size(), ' ');
            }
        }
        return line + "\n";
    };

    std::string out = emit_row(headers);
    std::string rule;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c > 0) rule += "  ";
        rule += std::string(widths[c], '-');
    }
    out += rule + "\n";
    for (const auto& row : cells) out += emit_row(row);
    return out;
}

}  // namespace cyclecast::eval
