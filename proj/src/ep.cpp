#include "ordprobit/ep.hpp"

#include <chrono>
#include <cmath>

namespace ordprobit {

namespace {

constexpr double kGuard = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454836;

double log_psi(const Eigen::MatrixXd& S, const Eigen::VectorXd& r) {
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("EP global covariance lost positive definiteness");
    }
    const double log_det_S = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return 0.5 * S.rows() * kLog2Pi + 0.5 * log_det_S + 0.5 * r.dot(S * r);
}

}  // namespace

HybridMoments hybrid_moments(const SpdMatrix& cavity_S, const Eigen::VectorXd& cavity_r,
                             const Eigen::VectorXd& x, const Interval& interval) {
    if (cavity_S.dim() != cavity_r.size() || cavity_S.dim() != x.size()) {
        throw DimensionMismatch("hybrid_moments: size mismatch");
    }
    const Eigen::VectorXd m = cavity_S.mat() * cavity_r;
    const Eigen::VectorXd Sx = cavity_S.mat() * x;
    const double s = 1.0 + x.dot(Sx);
    const double root = std::sqrt(s);
    const double xm = x.dot(m);
    const double u = interval.lower == -std::numeric_limits<double>::infinity()
                         ? interval.lower
                         : (interval.lower - xm) / root;
    const double v = interval.upper == std::numeric_limits<double>::infinity()
                         ? interval.upper
                         : (interval.upper - xm) / root;
    const double log_z = log_gauss_prob(u, v);
    const ZetaValues z = zeta_values(u, v);
    Eigen::VectorXd mean = m - Sx * (z.zeta1 / root);
    Eigen::MatrixXd cov =
        cavity_S.mat() - ((1.0 - z.variance_ratio) / s) * (Sx * Sx.transpose());
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {log_z, std::move(mean), SpdMatrix(std::move(cov))};
}

double ep_log_marginal(const EpGlobal& global, const EpSites& sites,
                       const GaussianPrior& prior) {
    const double psi_ep = log_psi(global.S.mat(), global.r);
    const Eigen::VectorXd r0 = prior.covariance.llt().solve(prior.mean);
    const double psi_0 = log_psi(prior.covariance.mat(), r0);
    return psi_ep - psi_0 - sites.log_z.sum();
}

EpResult fit_ep(const OrdinalDataset& dataset, const GaussianPrior& prior,
                const Thresholds& thresholds, const EpOptions& options) {
    validate(dataset, prior, thresholds);
    if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
        throw DomainError("damping must lie in (0, 1]");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index n = dataset.n();
    const Eigen::Index p = dataset.p();

    EpSites sites{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                  Eigen::VectorXd::Zero(n)};
    Eigen::MatrixXd S = prior.covariance.mat();
    Eigen::VectorXd r = prior.covariance.llt().solve(prior.mean);

    FitReport report;
    if (n == 0) {
        report.converged = true;
        report.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return {GaussianPosterior{prior.mean, prior.covariance}, std::move(sites),
                std::move(report)};
    }

    const double delta = options.damping;
    Eigen::VectorXd x(p), Sx(p), r_cav(p);
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int sweep = 0; sweep < std::max(1, options.max_sweeps); ++sweep) {
        for (Eigen::Index i = 0; i < n; ++i) {
            x = dataset.X.row(i).transpose();
            Sx.noalias() = S * x;
            const double s_ep = x.dot(Sx);

            const double down_denom = 1.0 - sites.k[i] * s_ep;
            if (down_denom <= kGuard) {
                ++report.skipped_site_events;
                continue;
            }
            // Cavity quantities without materializing the cavity matrix:
            // S_cav x = Sx / down_denom.
            const double s_cav = s_ep / down_denom;
            r_cav = r - sites.w[i] * x;
            const double t = Sx.dot(r_cav) / down_denom;

            const double s1p = 1.0 + s_cav;
            if (s1p <= kGuard) {
                ++report.skipped_site_events;
                continue;
            }
            const double root = std::sqrt(s1p);
            const int y = dataset.y[i];
            const double lo = thresholds.lower(y);
            const double up = thresholds.upper(y);
            const double u = std::isinf(lo) ? lo : (lo - t) / root;
            const double v = std::isinf(up) ? up : (up - t) / root;
            const ZetaValues z = zeta_values(u, v);
            const double d = 1.0 - z.variance_ratio;  // zeta1^2 + zeta2

            const double k_new = d / (1.0 + s_cav * z.variance_ratio);
            const double w_new = t * k_new - z.zeta1 * root;
            const double k_upd = delta * k_new + (1.0 - delta) * sites.k[i];
            const double w_upd = delta * w_new + (1.0 - delta) * sites.w[i];

            const double re_denom = 1.0 + k_upd * s_cav;
            if (re_denom <= kGuard) {
                ++report.skipped_site_events;
                continue;
            }

            // Both rank-one updates (downdate to the cavity, re-update with
            // the new site) act along Sx; fold them into one.
            const double coeff = sites.k[i] / down_denom -
                                 k_upd / (re_denom * down_denom * down_denom);
            S.noalias() += coeff * (Sx * Sx.transpose());
            r = r_cav + w_upd * x;

            sites.log_z[i] = 0.5 * (2.0 * w_upd * t + w_upd * w_upd * s_cav -
                                    k_upd * t * t) / re_denom -
                             0.5 * std::log(re_denom) - log_gauss_prob(u, v);
            sites.k[i] = k_upd;
            sites.w[i] = w_upd;
        }
        S = 0.5 * (S + S.transpose()).eval();

        const double lp =
            log_psi(S, r) -
            log_psi(prior.covariance.mat(), prior.covariance.llt().solve(prior.mean)) -
            sites.log_z.sum();
        report.objective_trace.push_back(lp);
        ++report.iterations;
        if (std::isfinite(previous) && std::fabs(lp - previous) < options.epsilon) {
            report.converged = true;
            break;
        }
        previous = lp;
    }
    report.final_objective = report.objective_trace.back();
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Eigen::VectorXd mean = S * r;
    return {GaussianPosterior{std::move(mean), SpdMatrix(std::move(S))}, std::move(sites),
            std::move(report)};
}

}  // namespace ordprobit
