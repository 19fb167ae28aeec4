#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "cyclecast/arima.hpp"
#include "cyclecast/features.hpp"
#include "cyclecast/linear_models.hpp"
#include "cyclecast/lstm.hpp"
#include "cyclecast/series.hpp"

namespace cyclecast::eval {

// How held-out cycles are predicted: RecursiveMultiStep fits once on the
// training prefix and feeds each prediction back as a lag input for the
// next step; RollingOneStep also fits once but consumes the true value of
// each held-out cycle as soon as it is past.
enum class Protocol { RecursiveMultiStep, RollingOneStep };

std::string protocol_name(Protocol protocol);
Protocol protocol_from_name(const std::string& name);

enum class ChannelSelect { CycleOnly, PeriodOnly, Both };

std::string channel_select_name(ChannelSelect channels);
ChannelSelect channel_select_from_name(const std::string& name);

struct MetricReport {
    std::string model_tag;
    std::string channel;  // "cycle" or "period"
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    int horizon = 0;
};

// MAE, MSE, RMSE between equal-length nonempty vectors; horizon is set to
// the vector length, model_tag/channel are left for the caller.
MetricReport compute_metrics(const std::vector<double>& actual,
                             const std::vector<double>& predicted);

struct EvalConfig {
    int horizon = 14;
    Protocol protocol = Protocol::RecursiveMultiStep;
    ChannelSelect channels = ChannelSelect::Both;
    // Round predictions to whole days before computing metrics. Off by
    // default: the raw-valued metrics are the comparable ones; rounding is
    // for calendar-style reporting.
    bool round_predictions = false;
};

// One observation of both channels, kept as doubles so fed-back predictions
// can be fractional.
struct ChannelPair {
    double cycle = 0.0;
    double period = 0.0;
};

using History = std::vector<ChannelPair>;

History to_history(const CycleSeries& series);

// ---------------------------------------------------------------------------
// Fitted model wrappers

struct LinearModel {
    linear::LinearFit fit;
    int window_len = 3;
};

struct ArimaModel {
    arima::ArimaConfig config;
    arima::ArimaFit cycle_fit;
    arima::ArimaFit period_fit;
};

struct LstmModel {
    lstm::LstmNetwork net;
    // Channel ranges (cycle, period) pooled over the training windows; lag
    // and target columns reuse them so inputs and outputs share one scale.
    features::ScalerParams scaler;
    int window_len = 3;
    std::vector<double> loss_curve;
};

using FittedModel = std::variant<LinearModel, ArimaModel, LstmModel>;

// Everything needed to fit one model. `tag` selects the family
// (ols|huber|lasso|omp|arima|lstm); only the matching config member is read.
struct ModelSpec {
    std::string tag = "ols";
    int window_len = 3;
    linear::HuberConfig huber;
    linear::LassoConfig lasso;
    linear::OmpConfig omp;
    arima::ArimaConfig arima_orders;
    lstm::TrainConfig lstm_train;
};

// Fits the requested model on the given history only. Linear models and the
// LSTM are trained on interleaved lag windows (window_len records in, the
// next record out); ARIMA fits each channel's univariate series.
FittedModel fit_model(const ModelSpec& spec, const History& train);

// One-step-ahead prediction from the trailing history. Linear models and
// the LSTM read the last window_len records; ARIMA extends its innovation
// recursion over the full history with the parameters frozen at fit time.
ChannelPair predict_next(const FittedModel& model, const History& history);

// A one-step predictor: receives the history available so far (training
// prefix plus, per protocol, fed-back predictions or revealed actuals) and
// returns the next (cycle, period).
using PredictFn = std::function<ChannelPair(const History&)>;

// Runs the protocol over the last `horizon` records of the series using an
// injected predictor, and scores each selected channel. The held-out
// actuals never reach the predictor in RecursiveMultiStep mode.
std::vector<MetricReport> rolling_eval(const PredictFn& predict,
                                       const std::string& tag,
                                       const CycleSeries& series,
                                       const EvalConfig& config);

// Fits the requested model on everything but the last `horizon` records,
// then scores it with the protocol.
std::vector<MetricReport> rolling_eval(const ModelSpec& spec,
                                       const CycleSeries& series,
                                       const EvalConfig& config);

// ---------------------------------------------------------------------------
// Model comparison

struct TableRow {
    MetricReport report;
    bool failed = false;
    std::string error;  // fit/predict error message when failed
};

struct ModelArtifacts {
    std::string model_tag;
    // Held-out actuals and the predictions scored against them, in step
    // order (rounded when the config asked for rounding).
    std::vector<double> actual_cycle;
    std::vector<double> predicted_cycle;
    std::vector<double> actual_period;
    std::vector<double> predicted_period;
    std::vector<double> loss_curve;  // LSTM training curve; empty otherwise
    // (label, flat key=value text) per fitted parameter set: one entry for
    // linear models and the LSTM, one per channel for ARIMA.
    std::vector<std::pair<std::string, std::string>> fit_texts;
};

struct EvalOutcome {
    std::vector<MetricReport> reports;
    ModelArtifacts artifacts;
};

// rolling_eval plus the artifacts behind the scores.
EvalOutcome evaluate_model(const ModelSpec& spec, const CycleSeries& series,
                           const EvalConfig& config);

struct Comparison {
    std::vector<TableRow> rows;  // sorted; see sort_table
    std::vector<ModelArtifacts> artifacts;  // successful models, input order
    Protocol protocol = Protocol::RecursiveMultiStep;
};

// Ascending MAE, ties broken by RMSE, then model tag, then channel; failed
// rows sort last. Stable and deterministic.
void sort_table(std::vector<TableRow>& rows);

// Evaluates every spec and assembles the sorted table. A model whose fit or
// prediction throws contributes one failed row per selected channel
// carrying the error message; the other models are unaffected.
Comparison compare_models(const CycleSeries& series,
                          const std::vector<ModelSpec>& specs,
                          const EvalConfig& config);

// CSV table `model,channel,mae,mse,rmse,horizon,protocol`; failed rows
// carry nan metrics.
std::string table_to_csv(const Comparison& comparison);

// Aligned plain-text table for terminals.
std::string table_to_text(const Comparison& comparison);

}  // namespace cyclecast::eval
