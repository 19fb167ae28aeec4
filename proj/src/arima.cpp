#include "cyclecast/arima.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyclecast/errors.hpp"

namespace cyclecast::arima {

namespace {

void check_config(const ArimaConfig& config) {
    if (config.p < 0 || config.d < 0 || config.q < 0) {
        throw std::invalid_argument("ARIMA orders must be non-negative");
    }
}

// Least squares with rank check; returns false (leaving coef untouched) when
// the design is rank deficient or has too few rows.
bool try_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               Eigen::VectorXd& coef) {
    if (design.rows() < design.cols()) return false;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) return false;
    coef = qr.solve(response);
    return true;
}

// Innovations of the ARMA recursion, zero during the max(p,q) warmup.
std::vector<double> arma_residual_path(const std::vector<double>& w, double c,
                                       const Eigen::VectorXd& phi,
                                       const Eigen::VectorXd& theta) {
    const int n = static_cast<int>(w.size());
    const int p = static_cast<int>(phi.size());
    const int q = static_cast<int>(theta.size());
    const int warmup = std::max(p, q);

    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int t = warmup; t < n; ++t) {
        double pred = c;
        for (int i = 1; i <= p; ++i) pred += phi(i - 1) * w[t - i];
        for (int j = 1; j <= q; ++j) pred += theta(j - 1) * e[t - j];
        e[t] = w[t] - pred;
    }
    return e;
}

void finalize_residuals(ArimaFit& fit) {
    const int warmup = std::max<int>(fit.phi.size(), fit.theta.size());
    const auto path = arma_residual_path(fit.diffed, fit.c, fit.phi, fit.theta);

    fit.residuals.assign(path.begin() + warmup, path.end());
    double ss = 0.0;
    for (double e : fit.residuals) ss += e * e;
    fit.sigma2 = fit.residuals.empty()
                     ? 0.0
                     : ss / static_cast<double>(fit.residuals.size());
    fit.stationary = ar_stationary(fit.phi);
}

void mean_model(ArimaFit& fit, bool flagged) {
    const auto& w = fit.diffed;
    double mean = 0.0;
    for (double v : w) mean += v;
    fit.c = w.empty() ? 0.0 : mean / static_cast<double>(w.size());
    fit.phi = Eigen::VectorXd::Zero(fit.orders.p);
    fit.theta = Eigen::VectorXd::Zero(fit.orders.q);
    fit.mean_fallback = flagged;
    finalize_residuals(fit);
}

}  // namespace

DifferenceResult difference(const std::vector<double>& series, int d) {
    if (d < 0) throw std::invalid_argument("d must be non-negative");
    if (static_cast<int>(series.size()) <= d) {
        throw InsufficientHistory(
            "need more than " + std::to_string(d) +
                " values to difference " + std::to_string(d) + " times",
            static_cast<std::size_t>(d + 1));
    }

    DifferenceResult result;
    result.differenced = series;
    for (int stage = 0; stage < d; ++stage) {
        result.initial_values.push_back(result.differenced.front());
        std::vector<double> next(result.differenced.size() - 1);
        for (std::size_t i = 0; i + 1 < result.differenced.size(); ++i) {
            next[i] = result.differenced[i + 1] - result.differenced[i];
        }
        result.differenced = std::move(next);
    }
    return result;
}

std::vector<double> inverse_difference(const std::vector<double>& differenced,
                                       const std::vector<double>& initial_values,
                                       int d) {
    if (d < 0) throw std::invalid_argument("d must be non-negative");
    if (static_cast<int>(initial_values.size()) != d) {
        throw ShapeError("expected " + std::to_string(d) +
                         " initial values, got " +
                         std::to_string(initial_values.size()));
    }

    std::vector<double> values = differenced;
    for (int stage = d - 1; stage >= 0; --stage) {
        std::vector<double> undone(values.size() + 1);
        undone[0] = initial_values[static_cast<std::size_t>(stage)];
        for (std::size_t i = 0; i < values.size(); ++i) {
            undone[i + 1] = undone[i] + values[i];
        }
        values = std::move(undone);
    }
    return values;
}

ArimaFit fit_arima(const std::vector<double>& series, const ArimaConfig& config) {
    check_config(config);

    const int hard_min_diffed = config.p + config.q + 2;
    if (static_cast<int>(series.size()) < hard_min_diffed + config.d) {
        throw InsufficientHistory(
            "series too short for ARIMA(" + std::to_string(config.p) + "," +
                std::to_string(config.d) + "," + std::to_string(config.q) +
                "); need at least " +
                std::to_string(hard_min_diffed + config.d) + " values",
            static_cast<std::size_t>(hard_min_diffed + config.d));
    }

    auto diff = difference(series, config.d);

    ArimaFit fit;
    fit.orders = config;
    fit.diffed = std::move(diff.differenced);
    fit.initial_values = std::move(diff.initial_values);

    const auto& w = fit.diffed;
    const int n = static_cast<int>(w.size());
    const int p = config.p;
    const int q = config.q;

    if (p == 0 && q == 0) {
        mean_model(fit, false);
        return fit;
    }

    // Step (i): long autoregression for proxy residuals.
    const int m = std::max(1, std::min(10, n / 4));
    std::vector<double> proxy(static_cast<std::size_t>(n), 0.0);
    {
        const int rows = n - m;
        Eigen::MatrixXd design(rows, m + 1);
        Eigen::VectorXd response(rows);
        for (int t = m; t < n; ++t) {
            design(t - m, 0) = 1.0;
            for (int i = 1; i <= m; ++i) design(t - m, i) = w[t - i];
            response(t - m) = w[t];
        }
        Eigen::VectorXd coef;
        if (!try_solve(design, response, coef)) {
            mean_model(fit, true);
            return fit;
        }
        for (int t = m; t < n; ++t) {
            double pred = coef(0);
            for (int i = 1; i <= m; ++i) pred += coef(i) * w[t - i];
            proxy[t] = w[t] - pred;
        }
    }

    // Step (ii): regress on p lags of the series and q lagged proxy
    // residuals. Proxy residuals only exist from index m on.
    auto arma_regression =
        [&](const std::vector<double>& innovations, int start,
            Eigen::VectorXd& coef) {
            const int rows = n - start;
            Eigen::MatrixXd design(rows, 1 + p + q);
            Eigen::VectorXd response(rows);
            for (int t = start; t < n; ++t) {
                design(t - start, 0) = 1.0;
                for (int i = 1; i <= p; ++i) design(t - start, i) = w[t - i];
                for (int j = 1; j <= q; ++j) {
                    design(t - start, p + j) = innovations[t - j];
                }
                response(t - start) = w[t];
            }
            return try_solve(design, response, coef);
        };

    Eigen::VectorXd coef;
    if (!arma_regression(proxy, std::max(p, m + q), coef)) {
        mean_model(fit, true);
        return fit;
    }
    fit.c = coef(0);
    fit.phi = coef.segment(1, p);
    fit.theta = coef.segment(1 + p, q);

    // Step (iii): one refinement pass with residuals recomputed from the
    // first-round parameters.
    const auto refined_innovations =
        arma_residual_path(w, fit.c, fit.phi, fit.theta);
    const int warmup = std::max(p, q);
    Eigen::VectorXd coef2;
    if (arma_regression(refined_innovations, warmup + q, coef2)) {
        fit.c = coef2(0);
        fit.phi = coef2.segment(1, p);
        fit.theta = coef2.segment(1 + p, q);
    }

    finalize_residuals(fit);
    return fit;
}

std::vector<double> forecast_arima(const ArimaFit& fit, const ArimaConfig& config,
                                   int h) {
    check_config(config);
    if (h < 1) throw std::invalid_argument("horizon must be >= 1");
    if (config.p != fit.phi.size() || config.q != fit.theta.size() ||
        config.d != static_cast<int>(fit.initial_values.size())) {
        throw std::invalid_argument("config orders disagree with the fit");
    }

    const int p = config.p;
    const int q = config.q;
    const int n = static_cast<int>(fit.diffed.size());
    if (n == 0 && (p > 0 || q > 0 || config.d > 0)) {
        throw std::invalid_argument("fit carries no series state to forecast from");
    }

    // Extended differenced series and innovation history; future shocks are
    // zero, and forecast innovations are exactly zero by construction.
    std::vector<double> w = fit.diffed;
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    const int warmup = std::max(p, q);
    const int known = std::min(n - warmup, static_cast<int>(fit.residuals.size()));
    for (int t = warmup; t < warmup + known; ++t) {
        e[static_cast<std::size_t>(t)] =
            fit.residuals[static_cast<std::size_t>(t - warmup)];
    }

    for (int s = 0; s < h; ++s) {
        const int t = n + s;
        double next = fit.c;
        for (int i = 1; i <= p; ++i) next += fit.phi(i - 1) * w[t - i];
        for (int j = 1; j <= q; ++j) next += fit.theta(j - 1) * e[t - j];
        w.push_back(next);
        e.push_back(0.0);
    }

    const auto levels = inverse_difference(w, fit.initial_values, config.d);
    return std::vector<double>(levels.end() - h, levels.end());
}

bool ar_stationary(const Eigen::VectorXd& phi) {
    const int p = static_cast<int>(phi.size());
    if (p == 0) return true;

    // Companion-matrix eigenvalues inside the unit circle are equivalent to
    // the AR polynomial roots lying outside it.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = phi.transpose();
    if (p > 1) {
        companion.block(1, 0, p - 1, p - 1) =
            Eigen::MatrixXd::Identity(p - 1, p - 1);
    }
    const auto eigenvalues = companion.eigenvalues();
    for (int i = 0; i < p; ++i) {
        if (std::abs(eigenvalues(i)) >= 1.0) return false;
    }
    return true;
}

KvPairs arima_to_kv(const ArimaFit& fit) {
    KvPairs kv;
    kv.emplace_back("orders", std::to_string(fit.orders.p) + "," +
                                  std::to_string(fit.orders.d) + "," +
                                  std::to_string(fit.orders.q));
    kv.emplace_back("c", format_double(fit.c));
    kv.emplace_back("phi", join_doubles(std::vector<double>(
                               fit.phi.data(), fit.phi.data() + fit.phi.size())));
    kv.emplace_back("theta",
                    join_doubles(std::vector<double>(
                        fit.theta.data(), fit.theta.data() + fit.theta.size())));
    kv.emplace_back("sigma2", format_double(fit.sigma2));
    kv.emplace_back("initial_values", join_doubles(fit.initial_values));
    kv.emplace_back("residuals", join_doubles(fit.residuals));
    kv.emplace_back("diffed", join_doubles(fit.diffed));
    kv.emplace_back("mean_fallback", fit.mean_fallback ? "1" : "0");
    kv.emplace_back("stationary", fit.stationary ? "1" : "0");
    return kv;
}

ArimaFit arima_from_kv(const KvPairs& kv) {
    ArimaFit fit;
    const auto orders = split(kv_get(kv, "orders"), ',');
    if (orders.size() != 3) {
        throw std::invalid_argument("orders must be three integers p,d,q");
    }
    fit.orders.p = static_cast<int>(parse_int(orders[0]));
    fit.orders.d = static_cast<int>(parse_int(orders[1]));
    fit.orders.q = static_cast<int>(parse_int(orders[2]));
    check_config(fit.orders);

    fit.c = parse_double(kv_get(kv, "c"));
    const auto phi = parse_double_list(kv_get(kv, "phi"));
    const auto theta = parse_double_list(kv_get(kv, "theta"));
    if (static_cast<int>(phi.size()) != fit.orders.p ||
        static_cast<int>(theta.size()) != fit.orders.q) {
        throw std::invalid_argument("phi/theta lengths disagree with orders");
    }
    fit.phi = Eigen::Map<const Eigen::VectorXd>(
        phi.data(), static_cast<Eigen::Index>(phi.size()));
    fit.theta = Eigen::Map<const Eigen::VectorXd>(
        theta.data(), static_cast<Eigen::Index>(theta.size()));
    fit.sigma2 = parse_double(kv_get(kv, "sigma2"));
    fit.initial_values = parse_double_list(kv_get(kv, "initial_values"));
    if (static_cast<int>(fit.initial_values.size()) != fit.orders.d) {
        throw std::invalid_argument("initial_values length disagrees with d");
    }
    if (const auto* residuals = kv_find(kv, "residuals")) {
        fit.residuals = parse_double_list(*residuals);
    }
    if (const auto* diffed = kv_find(kv, "diffed")) {
        fit.diffed = parse_double_list(*diffed);
    }
    if (const auto* fallback = kv_find(kv, "mean_fallback")) {
        fit.mean_fallback = *fallback == "1";
    }
    if (const auto* stationary = kv_find(kv, "stationary")) {
        fit.stationary = *stationary == "1";
    }
    return fit;
}

}  // namespace cyclecast::arima
