#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cyclecast/io_util.hpp"

namespace cyclecast::linear {

enum class ModelTag { OLS, Huber, Lasso, OMP };

std::string model_tag_name(ModelTag tag);
ModelTag model_tag_from_name(const std::string& name);

// A fitted linear predictor. Every target channel gets its own coefficient
// column and intercept; channels are fit independently.
struct LinearFit {
    ModelTag model_tag = ModelTag::OLS;
    Eigen::MatrixXd coefficients;  // n_features x n_channels
    Eigen::VectorXd intercepts;    // n_channels
    // Selected column indices per channel, in selection order (OMP only).
    std::vector<std::vector<int>> selected_support;
    bool converged = true;
    int iterations = 0;
    // Per-channel traces: Huber loss per IRLS iteration, Lasso objective per
    // sweep, OMP residual norm per step. Empty for OLS.
    std::vector<std::vector<double>> loss_trace;

    Eigen::Index n_features() const { return coefficients.rows(); }
    Eigen::Index n_channels() const { return coefficients.cols(); }
};

struct HuberConfig {
    double delta = 1.35;  // knee of the loss; 1.35 gives ~95% normal efficiency
    int max_iter = 100;
    double tol = 1e-8;
};

struct LassoConfig {
    double lambda = 1.0;
    int max_iter = 1000;
    double tol = 1e-8;
};

struct OmpConfig {
    int max_predictors = 1;
    double residual_tol = 0.0;
};

// Huber loss of a single residual: r^2/2 inside the knee, delta*(|r|-delta/2)
// beyond it.
double huber_loss(double residual, double delta);

// Soft-thresholding kernel sign(z) * max(|z| - threshold, 0).
double soft_threshold(double z, double threshold);

// Ordinary least squares with intercept via column-pivoted QR. Constant
// input columns carry no information beyond the intercept, so they get a
// zero coefficient and the intercept absorbs them; an exact linear
// dependence among the varying columns raises SingularDesign naming one
// dependent column.
LinearFit fit_ols(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

// Huber regression via iteratively reweighted least squares with weights
// w = 1 when |r| <= delta, delta/|r| otherwise. Starts from the OLS
// solution; stops when the coefficient change infinity-norm drops below
// config.tol or max_iter is reached (converged=false then).
LinearFit fit_huber(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const HuberConfig& config = {});

// Lasso via cyclic coordinate descent with soft-thresholding, minimizing
// (1/2n)*||y - X*a||^2 + lambda*||a||_1 on internally standardized columns
// (zero mean, unit variance); coefficients are mapped back to the original
// scale. The intercept is unpenalized.
LinearFit fit_lasso(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const LassoConfig& config = {});

// Orthogonal matching pursuit: greedily selects the column with the largest
// absolute correlation against the current residual (lowest index on ties),
// refits least squares on the selected set each step, and stops after
// max_predictors selections or when the residual norm falls to residual_tol.
LinearFit fit_omp(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const OmpConfig& config = {});

// intercept + row . coefficients, per channel.
Eigen::RowVectorXd predict_linear(const LinearFit& fit,
                                  const Eigen::RowVectorXd& input_row);
Eigen::MatrixXd predict_linear(const LinearFit& fit,
                               const Eigen::MatrixXd& inputs);

// Flat key=value serialization (model tag, per-channel coefficients,
// intercepts, OMP support). Numeric fields round-trip exactly.
KvPairs fit_to_kv(const LinearFit& fit);
LinearFit fit_from_kv(const KvPairs& kv);

}  // namespace cyclecast::linear
