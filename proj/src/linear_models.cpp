#include "cyclecast/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclecast/errors.hpp"

namespace cyclecast::linear {

namespace {

void check_design(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.rows() == 0 || targets.rows() == 0) {
        throw EmptyInput("cannot fit on an empty design");
    }
    if (inputs.cols() == 0 || targets.cols() == 0) {
        throw EmptyInput("design and targets need at least one column");
    }
    if (inputs.rows() != targets.rows()) {
        throw ShapeError("inputs have " + std::to_string(inputs.rows()) +
                         " rows but targets have " +
                         std::to_string(targets.rows()));
    }
    if (inputs.rows() < inputs.cols() + 1) {
        throw std::invalid_argument(
            "need at least " + std::to_string(inputs.cols() + 1) +
            " rows to fit " + std::to_string(inputs.cols()) +
            " columns plus an intercept, got " + std::to_string(inputs.rows()));
    }
}

// Centered design restricted to columns that actually vary; constant columns
// are indistinguishable from the intercept and are handled by it.
struct CenteredDesign {
    Eigen::MatrixXd Xc;          // rows x n_varying
    Eigen::VectorXd input_mean;  // all original columns
    std::vector<int> varying;    // original index of each Xc column
};

CenteredDesign center_design(const Eigen::MatrixXd& inputs) {
    CenteredDesign d;
    d.input_mean = inputs.colwise().mean();
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        if (inputs.col(c).minCoeff() != inputs.col(c).maxCoeff()) {
            d.varying.push_back(static_cast<int>(c));
        }
    }
    d.Xc.resize(inputs.rows(), static_cast<Eigen::Index>(d.varying.size()));
    for (std::size_t j = 0; j < d.varying.size(); ++j) {
        const Eigen::Index c = d.varying[j];
        d.Xc.col(static_cast<Eigen::Index>(j)) =
            inputs.col(c).array() - d.input_mean(c);
    }
    return d;
}

// Least squares on the centered design; raises SingularDesign when the
// varying columns are linearly dependent.
Eigen::MatrixXd solve_centered(const CenteredDesign& d,
                               const Eigen::MatrixXd& targets_centered) {
    if (d.Xc.cols() == 0) return Eigen::MatrixXd(0, targets_centered.cols());

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.Xc);
    if (qr.rank() < d.Xc.cols()) {
        const auto& perm = qr.colsPermutation().indices();
        int bad_original = -1;
        for (Eigen::Index k = 0; k < perm.size(); ++k) {
            if (perm(k) == qr.rank()) {
                bad_original = d.varying[static_cast<std::size_t>(k)];
                break;
            }
        }
        throw SingularDesign("design column " + std::to_string(bad_original) +
                                 " is linearly dependent on the others",
                             bad_original);
    }
    return qr.solve(targets_centered);
}

// Scatters coefficients of the varying columns back into a full-width
// coefficient matrix and recovers the intercepts.
void assemble_fit(LinearFit& fit, const CenteredDesign& d,
                  const Eigen::MatrixXd& beta_varying,
                  const Eigen::VectorXd& target_mean) {
    const Eigen::Index n_features = d.input_mean.size();
    const Eigen::Index n_channels = target_mean.size();
    fit.coefficients = Eigen::MatrixXd::Zero(n_features, n_channels);
    for (std::size_t j = 0; j < d.varying.size(); ++j) {
        fit.coefficients.row(d.varying[j]) =
            beta_varying.row(static_cast<Eigen::Index>(j));
    }
    fit.intercepts = target_mean - fit.coefficients.transpose() * d.input_mean;
}

}  // namespace

std::string model_tag_name(ModelTag tag) {
    switch (tag) {
        case ModelTag::OLS: return "ols";
        case ModelTag::Huber: return "huber";
        case ModelTag::Lasso: return "lasso";
        case ModelTag::OMP: return "omp";
    }
    throw std::invalid_argument("unknown model tag");
}

ModelTag model_tag_from_name(const std::string& name) {
    if (name == "ols") return ModelTag::OLS;
    if (name == "huber") return ModelTag::Huber;
    if (name == "lasso") return ModelTag::Lasso;
    if (name == "omp") return ModelTag::OMP;
    throw std::invalid_argument("unknown model tag '" + name + "'");
}

double huber_loss(double residual, double delta) {
    const double a = std::abs(residual);
    if (a <= delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

double soft_threshold(double z, double threshold) {
    if (z > threshold) return z - threshold;
    if (z < -threshold) return z + threshold;
    return 0.0;
}

LinearFit fit_ols(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    check_design(inputs, targets);
    const auto d = center_design(inputs);
    const Eigen::VectorXd target_mean = targets.colwise().mean();
    const Eigen::MatrixXd targets_centered = targets.rowwise() - target_mean.transpose();

    LinearFit fit;
    fit.model_tag = ModelTag::OLS;
    assemble_fit(fit, d, solve_centered(d, targets_centered), target_mean);
    return fit;
}

LinearFit fit_huber(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const HuberConfig& config) {
    check_design(inputs, targets);
    if (config.delta <= 0.0) throw std::invalid_argument("delta must be > 0");
    if (config.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (config.tol <= 0.0) throw std::invalid_argument("tol must be > 0");

    const auto d = center_design(inputs);
    const Eigen::Index n = inputs.rows();
    const Eigen::Index n_varying = d.Xc.cols();
    const Eigen::Index n_channels = targets.cols();

    // Augmented design: explicit intercept column, because the IRLS row
    // weights change the weighted means every iteration.
    Eigen::MatrixXd aug(n, n_varying + 1);
    aug.col(0).setOnes();
    aug.rightCols(n_varying) = d.Xc;

    // OLS start (also surfaces SingularDesign before any reweighting).
    const Eigen::VectorXd target_mean = targets.colwise().mean();
    const Eigen::MatrixXd beta0 =
        solve_centered(d, targets.rowwise() - target_mean.transpose());

    LinearFit fit;
    fit.model_tag = ModelTag::Huber;
    fit.converged = true;
    fit.iterations = 0;
    fit.loss_trace.resize(static_cast<std::size_t>(n_channels));

    Eigen::MatrixXd beta_varying(n_varying, n_channels);
    Eigen::VectorXd aug_intercepts(n_channels);

    for (Eigen::Index c = 0; c < n_channels; ++c) {
        Eigen::VectorXd theta(n_varying + 1);
        theta(0) = target_mean(c);
        theta.tail(n_varying) = beta0.col(c);

        auto& trace = fit.loss_trace[static_cast<std::size_t>(c)];
        auto total_loss = [&](const Eigen::VectorXd& t) {
            const Eigen::VectorXd r = targets.col(c) - aug * t;
            double loss = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) loss += huber_loss(r(i), config.delta);
            return loss;
        };
        trace.push_back(total_loss(theta));

        bool channel_converged = false;
        int used = 0;
        for (int it = 0; it < config.max_iter; ++it) {
            const Eigen::VectorXd r = targets.col(c) - aug * theta;
            Eigen::VectorXd sqrt_w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double a = std::abs(r(i));
                sqrt_w(i) = a <= config.delta ? 1.0 : std::sqrt(config.delta / a);
            }
            const Eigen::MatrixXd wa = sqrt_w.asDiagonal() * aug;
            const Eigen::VectorXd wy = sqrt_w.cwiseProduct(targets.col(c));
            const Eigen::VectorXd theta_new =
                wa.colPivHouseholderQr().solve(wy);

            const double change = (theta_new - theta).cwiseAbs().maxCoeff();
            theta = theta_new;
            ++used;
            trace.push_back(total_loss(theta));
            if (change < config.tol) {
                channel_converged = true;
                break;
            }
        }

        aug_intercepts(c) = theta(0);
        beta_varying.col(c) = theta.tail(n_varying);
        fit.converged = fit.converged && channel_converged;
        fit.iterations = std::max(fit.iterations, used);
    }

    fit.coefficients = Eigen::MatrixXd::Zero(inputs.cols(), n_channels);
    for (std::size_t j = 0; j < d.varying.size(); ++j) {
        fit.coefficients.row(d.varying[j]) =
            beta_varying.row(static_cast<Eigen::Index>(j));
    }
    // The augmented intercept is relative to centered columns; shift back.
    fit.intercepts =
        aug_intercepts - fit.coefficients.transpose() * d.input_mean;
    return fit;
}

LinearFit fit_lasso(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const LassoConfig& config) {
    check_design(inputs, targets);
    if (config.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (config.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (config.tol <= 0.0) throw std::invalid_argument("tol must be > 0");

    const auto d = center_design(inputs);
    const Eigen::Index n = inputs.rows();
    const Eigen::Index n_varying = d.Xc.cols();
    const Eigen::Index n_channels = targets.cols();

    // Standardize the varying columns to unit variance (1/n normalization),
    // so every coordinate-descent threshold acts on the same scale.
    Eigen::VectorXd col_std(n_varying);
    Eigen::MatrixXd Xs(n, n_varying);
    for (Eigen::Index j = 0; j < n_varying; ++j) {
        col_std(j) = std::sqrt(d.Xc.col(j).squaredNorm() / static_cast<double>(n));
        Xs.col(j) = d.Xc.col(j) / col_std(j);
    }

    const Eigen::VectorXd target_mean = targets.colwise().mean();

    LinearFit fit;
    fit.model_tag = ModelTag::Lasso;
    fit.converged = true;
    fit.iterations = 0;
    fit.loss_trace.resize(static_cast<std::size_t>(n_channels));

    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(n_varying, n_channels);
    for (Eigen::Index c = 0; c < n_channels; ++c) {
        const Eigen::VectorXd yc = targets.col(c).array() - target_mean(c);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n_varying);
        Eigen::VectorXd r = yc;  // residual with all coefficients at zero

        auto& trace = fit.loss_trace[static_cast<std::size_t>(c)];
        bool channel_converged = false;
        int used = 0;
        for (int sweep = 0; sweep < config.max_iter; ++sweep) {
            double max_change = 0.0;
            for (Eigen::Index j = 0; j < n_varying; ++j) {
                // (1/n)||Xs.col(j)||^2 == 1, so the update simplifies.
                const double z =
                    a(j) + Xs.col(j).dot(r) / static_cast<double>(n);
                const double a_new = soft_threshold(z, config.lambda);
                if (a_new != a(j)) {
                    r += Xs.col(j) * (a(j) - a_new);
                    max_change = std::max(max_change, std::abs(a_new - a(j)));
                    a(j) = a_new;
                }
            }
            ++used;
            trace.push_back(r.squaredNorm() / (2.0 * static_cast<double>(n)) +
                            config.lambda * a.cwiseAbs().sum());
            if (max_change < config.tol) {
                channel_converged = true;
                break;
            }
        }
        alpha.col(c) = a;
        fit.converged = fit.converged && channel_converged;
        fit.iterations = std::max(fit.iterations, used);
    }

    fit.coefficients = Eigen::MatrixXd::Zero(inputs.cols(), n_channels);
    for (std::size_t j = 0; j < d.varying.size(); ++j) {
        // Map standardized coefficients back to the raw column scale. An
        // exact zero stays exactly zero.
        fit.coefficients.row(d.varying[j]) =
            alpha.row(static_cast<Eigen::Index>(j)) /
            col_std(static_cast<Eigen::Index>(j));
    }
    fit.intercepts =
        target_mean - fit.coefficients.transpose() * d.input_mean;
    return fit;
}

LinearFit fit_omp(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const OmpConfig& config) {
    check_design(inputs, targets);
    if (config.max_predictors < 1) {
        throw std::invalid_argument("max_predictors must be >= 1");
    }
    if (config.max_predictors > inputs.cols()) {
        throw std::invalid_argument(
            "max_predictors exceeds the input column count");
    }
    if (config.residual_tol < 0.0) {
        throw std::invalid_argument("residual_tol must be >= 0");
    }

    const auto d = center_design(inputs);
    const Eigen::Index n = inputs.rows();
    const Eigen::Index n_varying = d.Xc.cols();
    const Eigen::Index n_channels = targets.cols();

    // Unit-norm copies drive the correlation screening only; the refit uses
    // the centered columns so the stored coefficients keep the raw scale.
    Eigen::MatrixXd Xu(n, n_varying);
    for (Eigen::Index j = 0; j < n_varying; ++j) {
        Xu.col(j) = d.Xc.col(j) / d.Xc.col(j).norm();
    }

    const Eigen::VectorXd target_mean = targets.colwise().mean();

    LinearFit fit;
    fit.model_tag = ModelTag::OMP;
    fit.selected_support.resize(static_cast<std::size_t>(n_channels));
    fit.loss_trace.resize(static_cast<std::size_t>(n_channels));
    fit.coefficients = Eigen::MatrixXd::Zero(inputs.cols(), n_channels);
    fit.intercepts = target_mean;
    fit.iterations = 0;

    for (Eigen::Index c = 0; c < n_channels; ++c) {
        const Eigen::VectorXd yc = targets.col(c).array() - target_mean(c);
        Eigen::VectorXd r = yc;
        std::vector<int> support;  // local (varying) indices, selection order
        std::vector<bool> used(static_cast<std::size_t>(n_varying), false);
        Eigen::VectorXd beta_sel;

        const int k = std::min<int>(config.max_predictors,
                                    static_cast<int>(n_varying));
        for (int step = 0; step < k; ++step) {
            if (r.norm() <= config.residual_tol) break;

            int best = -1;
            double best_corr = -1.0;
            for (Eigen::Index j = 0; j < n_varying; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double corr = std::abs(Xu.col(j).dot(r));
                if (corr > best_corr) {  // ties keep the lowest index
                    best_corr = corr;
                    best = static_cast<int>(j);
                }
            }
            if (best < 0) break;
            used[static_cast<std::size_t>(best)] = true;
            support.push_back(best);

            Eigen::MatrixXd Xsel(n, static_cast<Eigen::Index>(support.size()));
            for (std::size_t j = 0; j < support.size(); ++j) {
                Xsel.col(static_cast<Eigen::Index>(j)) = d.Xc.col(support[j]);
            }
            beta_sel = Xsel.colPivHouseholderQr().solve(yc);
            r = yc - Xsel * beta_sel;
            fit.loss_trace[static_cast<std::size_t>(c)].push_back(r.norm());
        }

        auto& channel_support = fit.selected_support[static_cast<std::size_t>(c)];
        for (std::size_t j = 0; j < support.size(); ++j) {
            const int original = d.varying[static_cast<std::size_t>(support[j])];
            channel_support.push_back(original);
            fit.coefficients(original, c) = beta_sel(static_cast<Eigen::Index>(j));
        }
        fit.iterations =
            std::max(fit.iterations, static_cast<int>(support.size()));
    }

    fit.intercepts =
        target_mean - fit.coefficients.transpose() * d.input_mean;
    return fit;
}

Eigen::RowVectorXd predict_linear(const LinearFit& fit,
                                  const Eigen::RowVectorXd& input_row) {
    if (input_row.size() != fit.n_features()) {
        throw ShapeError("fit expects " + std::to_string(fit.n_features()) +
                         " features, got " + std::to_string(input_row.size()));
    }
    return input_row * fit.coefficients + fit.intercepts.transpose();
}

Eigen::MatrixXd predict_linear(const LinearFit& fit,
                               const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != fit.n_features()) {
        throw ShapeError("fit expects " + std::to_string(fit.n_features()) +
                         " features, got " + std::to_string(inputs.cols()));
    }
    return (inputs * fit.coefficients).rowwise() + fit.intercepts.transpose();
}

KvPairs fit_to_kv(const LinearFit& fit) {
    KvPairs kv;
    kv.emplace_back("model_tag", model_tag_name(fit.model_tag));
    kv.emplace_back("n_features", std::to_string(fit.n_features()));
    kv.emplace_back("n_channels", std::to_string(fit.n_channels()));
    std::vector<double> icepts(fit.intercepts.data(),
                               fit.intercepts.data() + fit.intercepts.size());
    kv.emplace_back("intercepts", join_doubles(icepts));
    for (Eigen::Index c = 0; c < fit.n_channels(); ++c) {
        std::vector<double> col(fit.coefficients.col(c).data(),
                                fit.coefficients.col(c).data() +
                                    fit.n_features());
        kv.emplace_back("coefficients_" + std::to_string(c), join_doubles(col));
    }
    if (fit.model_tag == ModelTag::OMP) {
        for (std::size_t c = 0; c < fit.selected_support.size(); ++c) {
            std::string joined;
            for (std::size_t j = 0; j < fit.selected_support[c].size(); ++j) {
                if (j > 0) joined += ',';
                joined += std::to_string(fit.selected_support[c][j]);
            }
            kv.emplace_back("support_" + std::to_string(c), joined);
        }
    }
    kv.emplace_back("converged", fit.converged ? "1" : "0");
    kv.emplace_back("iterations", std::to_string(fit.iterations));
    return kv;
}

LinearFit fit_from_kv(const KvPairs& kv) {
    LinearFit fit;
    fit.model_tag = model_tag_from_name(kv_get(kv, "model_tag"));
    const int n_features = parse_int(kv_get(kv, "n_features"));
    const int n_channels = parse_int(kv_get(kv, "n_channels"));
    if (n_features < 1 || n_channels < 1) {
        throw std::invalid_argument("fit must have positive dimensions");
    }

    const auto icepts = parse_double_list(kv_get(kv, "intercepts"));
    if (static_cast<int>(icepts.size()) != n_channels) {
        throw std::invalid_argument("intercept count mismatch");
    }
    fit.intercepts = Eigen::Map<const Eigen::VectorXd>(
        icepts.data(), static_cast<Eigen::Index>(icepts.size()));

    fit.coefficients.resize(n_features, n_channels);
    for (int c = 0; c < n_channels; ++c) {
        const auto col =
            parse_double_list(kv_get(kv, "coefficients_" + std::to_string(c)));
        if (static_cast<int>(col.size()) != n_features) {
            throw std::invalid_argument("coefficient count mismatch");
        }
        for (int j = 0; j < n_features; ++j) fit.coefficients(j, c) = col[j];
    }

    if (fit.model_tag == ModelTag::OMP) {
        fit.selected_support.resize(static_cast<std::size_t>(n_channels));
        for (int c = 0; c < n_channels; ++c) {
            const auto* raw = kv_find(kv, "support_" + std::to_string(c));
            if (raw == nullptr || raw->empty()) continue;
            for (const auto& piece : split(*raw, ',')) {
                const int idx = parse_int(piece);
                if (idx < 0 || idx >= n_features) {
                    throw std::invalid_argument("support index out of range");
                }
                fit.selected_support[static_cast<std::size_t>(c)].push_back(idx);
            }
        }
    }

    if (const auto* conv = kv_find(kv, "converged")) fit.converged = *conv == "1";
    if (const auto* iters = kv_find(kv, "iterations")) {
        fit.iterations = parse_int(*iters);
    }
    return fit;
}

}  // namespace cyclecast::linear
