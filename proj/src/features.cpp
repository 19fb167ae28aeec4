#include "cyclecast/features.hpp"

#include <string>

#include "cyclecast/errors.hpp"

namespace cyclecast::features {

SupervisedWindows make_windows(const CycleSeries& series, int window_len,
                               int horizon) {
    if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

    const int n = static_cast<int>(series.size());
    const int required = window_len + horizon;
    if (n < required) {
        throw InsufficientHistory(
            "series of " + std::to_string(n) + " records is too short; need " +
                std::to_string(required),
            static_cast<std::size_t>(required));
    }

    const int rows = n - window_len - horizon + 1;
    SupervisedWindows out;
    out.window_len = window_len;
    out.horizon = horizon;
    out.inputs.resize(rows, 2 * window_len);
    out.targets.resize(rows, 2 * horizon);

    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < window_len; ++j) {
            const auto& rec = series.records[r + j];
            out.inputs(r, 2 * j) = static_cast<double>(rec.cycle_length);
            out.inputs(r, 2 * j + 1) = static_cast<double>(rec.period_length);
        }
        for (int j = 0; j < horizon; ++j) {
            const auto& rec = series.records[r + window_len + j];
            out.targets(r, 2 * j) = static_cast<double>(rec.cycle_length);
            out.targets(r, 2 * j + 1) = static_cast<double>(rec.period_length);
        }
    }
    return out;
}

ScalerParams fit_scaler(const Eigen::MatrixXd& data) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw EmptyInput("cannot fit a scaler on an empty matrix");
    }
    ScalerParams params;
    params.col_min = data.colwise().minCoeff();
    params.col_max = data.colwise().maxCoeff();
    return params;
}

ScalerParams fit_channel_scaler(const SupervisedWindows& windows, int n_cols) {
    if (n_cols < 1) throw std::invalid_argument("n_cols must be >= 1");
    if (windows.rows() == 0) {
        throw EmptyInput("cannot fit a scaler on empty windows");
    }

    double ch_min[2], ch_max[2];
    for (int ch = 0; ch < 2; ++ch) {
        ch_min[ch] = std::numeric_limits<double>::infinity();
        ch_max[ch] = -std::numeric_limits<double>::infinity();
    }
    auto pool = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const int ch = static_cast<int>(c % 2);
            ch_min[ch] = std::min(ch_min[ch], m.col(c).minCoeff());
            ch_max[ch] = std::max(ch_max[ch], m.col(c).maxCoeff());
        }
    };
    pool(windows.inputs);
    pool(windows.targets);

    ScalerParams params;
    params.col_min.resize(n_cols);
    params.col_max.resize(n_cols);
    for (int c = 0; c < n_cols; ++c) {
        params.col_min(c) = ch_min[c % 2];
        params.col_max(c) = ch_max[c % 2];
    }
    return params;
}

Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& data,
                             const ScalerParams& params) {
    if (data.cols() != params.cols()) {
        throw ShapeError("scaler expects " + std::to_string(params.cols()) +
                         " columns, got " + std::to_string(data.cols()));
    }
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double lo = params.col_min(c);
        const double span = params.col_max(c) - lo;
        if (span == 0.0) {
            out.col(c).setConstant(0.5);
        } else {
            out.col(c) = (data.col(c).array() - lo) / span;
        }
    }
    return out;
}

Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& scaled,
                              const ScalerParams& params) {
    if (scaled.cols() != params.cols()) {
        throw ShapeError("scaler expects " + std::to_string(params.cols()) +
                         " columns, got " + std::to_string(scaled.cols()));
    }
    Eigen::MatrixXd out(scaled.rows(), scaled.cols());
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
        const double lo = params.col_min(c);
        const double span = params.col_max(c) - lo;
        if (span == 0.0) {
            out.col(c).setConstant(lo);
        } else {
            out.col(c) = scaled.col(c).array() * span + lo;
        }
    }
    return out;
}

}  // namespace cyclecast::features
