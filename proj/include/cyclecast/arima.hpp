#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cyclecast/io_util.hpp"

namespace cyclecast::arima {

struct ArimaConfig {
    int p = 1;  // autoregressive order
    int d = 1;  // differencing order
    int q = 1;  // moving-average order
};

// Fitted ARIMA model on one channel. phi/theta/c/sigma2 describe the ARMA
// recursion on the d-times differenced scale; initial_values holds the d
// leading values consumed by differencing so forecasts can be mapped back to
// the original scale; diffed and residuals carry the lag context the
// forecast recursion needs.
struct ArimaFit {
    ArimaConfig orders;
    double c = 0.0;
    Eigen::VectorXd phi;    // length p
    Eigen::VectorXd theta;  // length q
    double sigma2 = 0.0;
    std::vector<double> residuals;       // innovations after max(p,q) warmup
    std::vector<double> initial_values;  // length d
    std::vector<double> diffed;          // differenced training series
    bool mean_fallback = false;  // regression was singular; mean model used
    bool stationary = true;      // AR roots outside the unit circle
};

struct DifferenceResult {
    std::vector<double> differenced;
    std::vector<double> initial_values;  // leading value of each stage
};

// Applies the first-difference operator d times; the returned initial
// values are exactly what inverse_difference needs to undo it.
DifferenceResult difference(const std::vector<double>& series, int d);

// Exact left inverse of difference.
std::vector<double> inverse_difference(const std::vector<double>& differenced,
                                       const std::vector<double>& initial_values,
                                       int d);

// Hannan-Rissanen estimation: a long autoregression (order min(10, n/4))
// provides proxy residuals, the series is regressed on its p lags and q
// lagged proxy residuals, and one refinement pass re-estimates with
// residuals recomputed from the first-round parameters. A singular
// regression (for example a constant differenced series) falls back to the
// mean model with mean_fallback set. Deterministic.
ArimaFit fit_arima(const std::vector<double>& series, const ArimaConfig& config);

// Iterates the ARMA recursion h steps on the differenced scale with future
// shocks at zero, then inverse-differences back to the original scale.
std::vector<double> forecast_arima(const ArimaFit& fit, const ArimaConfig& config,
                                   int h);

// True when every root of 1 - phi_1 z - ... - phi_p z^p lies outside the
// unit circle.
bool ar_stationary(const Eigen::VectorXd& phi);

// Key=value serialization (orders, c, phi, theta, sigma2, initial_values,
// plus the forecast state). Numeric fields round-trip exactly.
KvPairs arima_to_kv(const ArimaFit& fit);
ArimaFit arima_from_kv(const KvPairs& kv);

}  // namespace cyclecast::arima
