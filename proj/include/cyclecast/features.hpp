#pragma once

#include <Eigen/Dense>

#include "cyclecast/series.hpp"

namespace cyclecast::features {

// Lagged supervised windows over the two series channels.
//
// Each input row holds `window_len` consecutive records flattened
// oldest-first as (cycle, period) pairs; the matching target row holds the
// next `horizon` records in the same interleaved layout.
struct SupervisedWindows {
    Eigen::MatrixXd inputs;   // rows x (2 * window_len)
    Eigen::MatrixXd targets;  // rows x (2 * horizon)
    int window_len = 0;
    int horizon = 0;

    Eigen::Index rows() const { return inputs.rows(); }
};

// Builds sliding windows from a series. A series of n records yields
// n - window_len - horizon + 1 windows; fewer records raise
// InsufficientHistory carrying the minimum length needed.
SupervisedWindows make_windows(const CycleSeries& series, int window_len,
                               int horizon);

// Per-column min-max scaling parameters mapping data to [0, 1].
struct ScalerParams {
    Eigen::VectorXd col_min;
    Eigen::VectorXd col_max;

    Eigen::Index cols() const { return col_min.size(); }
};

// Fits per-column minima/maxima. Throws EmptyInput on an empty matrix.
ScalerParams fit_scaler(const Eigen::MatrixXd& data);

// Fits a scaler that pools the min/max per channel over every column of the
// window matrices that belongs to that channel (even columns: cycle, odd
// columns: period), then tiles the channel ranges across `n_cols` columns.
// This keeps lag columns and target columns on an identical scale.
ScalerParams fit_channel_scaler(const SupervisedWindows& windows, int n_cols);

// Maps each column x to (x - min) / (max - min). Columns with min == max map
// to 0.5. Throws ShapeError when the column count disagrees with the params.
Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& data,
                             const ScalerParams& params);

// Inverse of apply_scaler; degenerate columns map back to their min.
Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& scaled,
                              const ScalerParams& params);

}  // namespace cyclecast::features
