#include "ordprobit/mfvb.hpp"

#include <chrono>

namespace ordprobit {

Eigen::VectorXd initial_zbar(const OrdinalDataset& dataset, const GaussianPrior& prior,
                             const Thresholds& thresholds) {
    const Eigen::VectorXd eta = dataset.X * prior.mean;
    Eigen::VectorXd zbar(dataset.n());
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        zbar[i] = tn_moments(thresholds.interval(dataset.y[i]), eta[i], 1.0).mean;
    }
    return zbar;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> posterior_precision_pieces(
    const Eigen::MatrixXd& X, const GaussianPrior& prior) {
    const Eigen::Index p = X.cols();
    const Eigen::LLT<Eigen::MatrixXd> prior_llt = prior.covariance.llt();
    const Eigen::MatrixXd prior_precision =
        prior_llt.solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd precision = prior_precision;
    precision.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    precision = precision.selfadjointView<Eigen::Lower>();
    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("posterior precision is not SPD");
    }
    Eigen::MatrixXd V = llt.solve(Eigen::MatrixXd::Identity(p, p));
    V = 0.5 * (V + V.transpose()).eval();
    return {std::move(V), prior_llt.solve(prior.mean)};
}

double elbo_mfvb(const MfvbState& state, const OrdinalDataset& dataset,
                 const GaussianPrior& prior, const Thresholds& thresholds) {
    const Eigen::VectorXd eta = dataset.X * state.betabar;
    double value = 0.0;
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        const int y = dataset.y[i];
        value += log_gauss_prob(thresholds.lower(y) - eta[i], thresholds.upper(y) - eta[i]);
    }
    const Eigen::VectorXd dev = state.betabar - prior.mean;
    value -= 0.5 * dev.dot(prior.covariance.llt().solve(dev));
    return value;
}

MfvbResult fit_mfvb(const OrdinalDataset& dataset, const GaussianPrior& prior,
                    const Thresholds& thresholds, const MfvbOptions& options) {
    validate(dataset, prior, thresholds);
    if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be positive");
    const auto t0 = std::chrono::steady_clock::now();

    if (dataset.n() == 0) {
        FitReport report;
        report.objective_trace = {0.0};
        report.iterations = 1;
        report.converged = true;
        report.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return {GaussianPosterior{prior.mean, prior.covariance}, std::move(report)};
    }

    auto [V, prior_shift] = posterior_precision_pieces(dataset.X, prior);
    MfvbState state{initial_zbar(dataset, prior, thresholds), prior.mean, std::move(V),
                    std::move(prior_shift)};

    FitReport report;
    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < std::max(1, options.max_iterations); ++iter) {
        state.betabar.noalias() =
            state.V * (state.prior_shift + dataset.X.transpose() * state.zbar);
        const Eigen::VectorXd eta = dataset.X * state.betabar;
        for (Eigen::Index i = 0; i < dataset.n(); ++i) {
            const int y = dataset.y[i];
            state.zbar[i] =
                eta[i] - zeta1(thresholds.lower(y) - eta[i], thresholds.upper(y) - eta[i]);
        }
        const double elbo = elbo_mfvb(state, dataset, prior, thresholds);
        report.objective_trace.push_back(elbo);
        ++report.iterations;
        if (elbo - previous < options.epsilon) {
            report.converged = true;
            break;
        }
        previous = elbo;
    }
    report.final_objective = report.objective_trace.back();
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    return {GaussianPosterior{state.betabar, SpdMatrix(state.V)}, std::move(report)};
}

}  // namespace ordprobit
