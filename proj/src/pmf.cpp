#include "ordprobit/pmf.hpp"

#include <chrono>
#include <cmath>

#include "ordprobit/mfvb.hpp"

namespace ordprobit {

namespace {

// The additive constant is chosen to match elbo_mfvb's convention (both
// report the full bound plus log|I + X Sigma0 X'| / 2), so the two traces
// are directly comparable; the extra terms below are fixed by the problem
// and do not move during the optimization.
double elbo_pmf_impl(const PmfState& state, const OrdinalDataset& dataset,
                     const Thresholds& thresholds, const Eigen::MatrixXd& V,
                     const Eigen::VectorXd& xm, const Eigen::VectorXd& xtxm) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        const int y = dataset.y[i];
        const double s = state.sigma_star[i];
        const double u = (thresholds.lower(y) - state.xi[i]) / s;
        const double v = (thresholds.upper(y) - state.xi[i]) / s;
        value += log_gauss_prob(u, v);
        value += 0.5 * (state.zbar[i] - state.xi[i]) * (state.zbar[i] - state.xi[i]) / (s * s);
        value += std::log(state.sigma_star[i]);
    }
    const Eigen::VectorXd g = dataset.X.transpose() * state.zbar;  // X'z
    value -= 0.5 * (state.zbar.squaredNorm() - g.dot(V * g));
    value += state.zbar.dot(xm) - g.dot(V * xtxm);
    value -= 0.5 * (xm.squaredNorm() - xtxm.dot(V * xtxm));
    return value;
}

}  // namespace

double elbo_pmf(const PmfState& state, const OrdinalDataset& dataset,
                const GaussianPrior& prior, const Thresholds& thresholds) {
    if (dataset.n() == 0) return 0.0;
    auto [V, prior_shift] = posterior_precision_pieces(dataset.X, prior);
    const Eigen::VectorXd xm = dataset.X * prior.mean;
    return elbo_pmf_impl(state, dataset, thresholds, V, xm, dataset.X.transpose() * xm);
}

PmfResult fit_pmf(const OrdinalDataset& dataset, const GaussianPrior& prior,
                  const Thresholds& thresholds, const PmfOptions& options) {
    validate(dataset, prior, thresholds);
    if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index n = dataset.n();

    auto [V, prior_shift] = posterior_precision_pieces(dataset.X, prior);

    if (n == 0) {
        FitReport report;
        report.objective_trace = {0.0};
        report.iterations = 1;
        report.converged = true;
        report.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        PmfPosterior post{Eigen::VectorXd(0), Eigen::VectorXd(0), prior.covariance,
                          {},                 prior,              dataset.X};
        std::optional<GaussianPosterior> moments;
        if (options.compute_moments) moments = GaussianPosterior{prior.mean, prior.covariance};
        return {std::move(post), std::move(moments), std::move(report)};
    }

    const Eigen::MatrixXd XV = dataset.X * V;  // row i is x_i'V
    Eigen::VectorXd sigma2(n);                 // sigma_star_i^2
    for (Eigen::Index i = 0; i < n; ++i) {
        const double leverage = XV.row(i).dot(dataset.X.row(i));
        if (leverage >= 1.0 - 1e-10) {
            throw DegenerateLeverage("x_i'Vx_i reached 1; site scale undefined");
        }
        sigma2[i] = 1.0 / (1.0 - leverage);
    }
    const Eigen::VectorXd sigma_star = sigma2.cwiseSqrt();

    // Per-site constants of the location update:
    //   xi_i = c_i + sigma_i^2 (XV)_i (X'z - z_i x_i),
    //   c_i  = x_i'mu0 - sigma_i^2 (XV)_i (X'X mu0 - x_i x_i'mu0).
    const Eigen::VectorXd xm = dataset.X * prior.mean;
    const Eigen::VectorXd xtxm = dataset.X.transpose() * xm;
    Eigen::VectorXd site_const(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lev = 1.0 - 1.0 / sigma2[i];
        site_const[i] = xm[i] - sigma2[i] * (XV.row(i).dot(xtxm) - lev * xm[i]);
    }

    PmfState state{initial_zbar(dataset, prior, thresholds), Eigen::VectorXd::Zero(n),
                   sigma_star};
    Eigen::VectorXd g = dataset.X.transpose() * state.zbar;  // running X'zbar
    Eigen::VectorXd zeta1_cache(n), zeta2_cache(n);

    FitReport report;
    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < std::max(1, options.max_iterations); ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double leverage = 1.0 - 1.0 / sigma2[i];
            const double xi =
                site_const[i] + sigma2[i] * (XV.row(i).dot(g) - leverage * state.zbar[i]);
            state.xi[i] = xi;
            const int y = dataset.y[i];
            const double u = (thresholds.lower(y) - xi) / sigma_star[i];
            const double v = (thresholds.upper(y) - xi) / sigma_star[i];
            const ZetaValues z = zeta_values(u, v);
            zeta1_cache[i] = z.zeta1;
            zeta2_cache[i] = z.zeta2;
            const double znew = xi - sigma_star[i] * z.zeta1;
            g.noalias() += (znew - state.zbar[i]) * dataset.X.row(i).transpose();
            state.zbar[i] = znew;
        }
        const double elbo = elbo_pmf_impl(state, dataset, thresholds, V, xm, xtxm);
        report.objective_trace.push_back(elbo);
        ++report.iterations;
        if (elbo - previous < options.epsilon) {
            report.converged = true;
            break;
        }
        previous = elbo;
    }
    report.final_objective = report.objective_trace.back();

    std::vector<Interval> intervals;
    intervals.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) intervals.push_back(thresholds.interval(dataset.y[i]));

    std::optional<GaussianPosterior> moments;
    if (options.compute_moments) {
        Eigen::VectorXd mu = V * (prior_shift + g);
        Eigen::VectorXd omega(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            omega[i] = sigma2[i] * std::max(
                1.0 - zeta1_cache[i] * zeta1_cache[i] - zeta2_cache[i],
                std::numeric_limits<double>::min());
        }
        Eigen::MatrixXd cov = V + XV.transpose() * omega.asDiagonal() * XV;
        cov = 0.5 * (cov + cov.transpose()).eval();
        moments = GaussianPosterior{std::move(mu), SpdMatrix(std::move(cov))};
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    PmfPosterior post{state.xi, sigma_star, SpdMatrix(V), std::move(intervals), prior,
                      dataset.X};
    return {std::move(post), std::move(moments), std::move(report)};
}

Eigen::MatrixXd pmf_sample_beta(const PmfPosterior& post, int count, RngStream& rng) {
    if (count < 1) throw DomainError("count must be at least 1");
    const Eigen::Index n = post.n();
    const Eigen::Index p = post.p();
    const Eigen::LLT<Eigen::MatrixXd> vllt = post.V.llt();
    const Eigen::MatrixXd L = vllt.matrixL();
    const Eigen::VectorXd prior_shift = post.prior.covariance.llt().solve(post.prior.mean);

    Eigen::MatrixXd draws(count, p);
    Eigen::VectorXd z(n), eps(p);
    for (int d = 0; d < count; ++d) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z[i] = tn_sample(post.intervals[i], post.xi[i], post.sigma_star[i], rng);
        }
        for (Eigen::Index j = 0; j < p; ++j) eps[j] = rng.next_gaussian();
        const Eigen::VectorXd mean =
            post.V.mat() * (prior_shift + post.X.transpose() * z);
        draws.row(d) = (mean + L * eps).transpose();
    }
    return draws;
}

}  // namespace ordprobit
