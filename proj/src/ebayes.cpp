#include "ordprobit/ebayes.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace ordprobit {

namespace {

struct SiteRatios {
    double at_lower;  // phi(a)/Z with a = alpha_{y-1} - o
    double at_upper;  // phi(b)/Z with b = alpha_y - o
};

SiteRatios site_ratios(double offset, int y, const Thresholds& thresholds) {
    const double lo = thresholds.lower(y);
    const double up = thresholds.upper(y);
    const double a = std::isinf(lo) ? lo : lo - offset;
    const double b = std::isinf(up) ? up : up - offset;
    const ProbRatios r = gauss_prob_ratios(a, b);
    return {r.at_lower, r.at_upper};
}

}  // namespace

double alpha_objective(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y, int K,
                       const Thresholds& thresholds) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double lo = thresholds.lower(y[i]);
        const double up = thresholds.upper(y[i]);
        value += log_gauss_prob(std::isinf(lo) ? lo : lo - offsets[i],
                                std::isinf(up) ? up : up - offsets[i]);
    }
    return value;
}

Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y,
                               int K, const Thresholds& thresholds) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(K - 1);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const SiteRatios r = site_ratios(offsets[i], y[i], thresholds);
        if (y[i] <= K - 1) g[y[i] - 1] += r.at_upper;
        if (y[i] >= 2) g[y[i] - 2] -= r.at_lower;
    }
    return g;
}

Eigen::MatrixXd alpha_hessian(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y,
                              int K, const Thresholds& thresholds) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(K - 1, K - 1);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const SiteRatios r = site_ratios(offsets[i], y[i], thresholds);
        // Each observation couples at most the two cutpoints bounding its
        // interval, so the Hessian is tridiagonal.
        if (y[i] <= K - 1) {
            const double b = thresholds.upper(y[i]) - offsets[i];
            h(y[i] - 1, y[i] - 1) += -b * r.at_upper - r.at_upper * r.at_upper;
        }
        if (y[i] >= 2) {
            const double a = thresholds.lower(y[i]) - offsets[i];
            h(y[i] - 2, y[i] - 2) += a * r.at_lower - r.at_lower * r.at_lower;
        }
        if (y[i] >= 2 && y[i] <= K - 1) {
            h(y[i] - 2, y[i] - 1) += r.at_lower * r.at_upper;
            h(y[i] - 1, y[i] - 2) += r.at_lower * r.at_upper;
        }
    }
    return h;
}

Eigen::VectorXd grad_alpha(const Eigen::VectorXd& betabar, const OrdinalDataset& dataset,
                           const Thresholds& thresholds) {
    if (betabar.size() != dataset.p()) throw DimensionMismatch("grad_alpha: size mismatch");
    return alpha_gradient(dataset.X * betabar, dataset.y, dataset.K, thresholds);
}

namespace {

// Jacobian of alpha(tau): d alpha_k / d tau_1 = 1, d alpha_k / d tau_j =
// exp(tau_j) for 2 <= j <= k.
Eigen::MatrixXd tau_jacobian(const Eigen::VectorXd& tau) {
    const Eigen::Index m = tau.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        j(k, 0) = 1.0;
        for (Eigen::Index l = 1; l <= k; ++l) j(k, l) = std::exp(tau[l]);
    }
    return j;
}

double tau_objective(const Eigen::VectorXd& tau, const Eigen::VectorXd& offsets,
                     const Eigen::VectorXi& y, int K) {
    return alpha_objective(offsets, y, K, tau_to_thresholds(tau));
}

Eigen::VectorXd golden_section_pass(Eigen::VectorXd tau, const Eigen::VectorXd& offsets,
                                    const Eigen::VectorXi& y, int K) {
    constexpr double phi = 0.61803398874989485;
    for (Eigen::Index j = 0; j < tau.size(); ++j) {
        auto f = [&](double t) {
            Eigen::VectorXd tt = tau;
            tt[j] = t;
            return tau_objective(tt, offsets, y, K);
        };
        // Expand the bracket while an endpoint still dominates its center.
        double a = tau[j] - 4.0, b = tau[j] + 4.0;
        for (int grow = 0; grow < 10; ++grow) {
            const double fm = f(0.5 * (a + b));
            if (f(a) > fm) {
                a -= (b - a);
            } else if (f(b) > fm) {
                b += (b - a);
            } else {
                break;
            }
        }
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = f(c), fd = f(d);
        while (b - a > 1e-10) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        tau[j] = 0.5 * (a + b);
    }
    return tau;
}

}  // namespace

Thresholds maximize_alpha(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y, int K,
                          const Thresholds& start, bool* used_fallback) {
    Eigen::VectorXd tau = thresholds_to_tau(start);
    double value = tau_objective(tau, offsets, y, K);
    bool fallback = false;

    for (int iter = 0; iter < 200; ++iter) {
        const Thresholds current = tau_to_thresholds(tau);
        const Eigen::VectorXd g_alpha = alpha_gradient(offsets, y, K, current);
        if (g_alpha.lpNorm<Eigen::Infinity>() < 1e-9) break;

        const Eigen::MatrixXd jac = tau_jacobian(tau);
        const Eigen::VectorXd g_tau = jac.transpose() * g_alpha;
        Eigen::MatrixXd h_tau =
            jac.transpose() * alpha_hessian(offsets, y, K, current) * jac;
        // Curvature of alpha(tau) itself: d^2 alpha_k / d tau_j^2 = exp(tau_j).
        for (Eigen::Index j = 1; j < tau.size(); ++j) {
            h_tau(j, j) += std::exp(tau[j]) * g_alpha.tail(tau.size() - j).sum();
        }

        Eigen::VectorXd step = -h_tau.ldlt().solve(g_tau);
        if (!step.allFinite() || step.dot(g_tau) <= 0.0) step = g_tau;  // ascent fallback

        bool accepted = false;
        double scale = 1.0;
        for (int half = 0; half < 40; ++half, scale *= 0.5) {
            const Eigen::VectorXd trial = tau + scale * step;
            const double trial_value = tau_objective(trial, offsets, y, K);
            if (std::isfinite(trial_value) && trial_value > value) {
                tau = trial;
                value = trial_value;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (g_alpha.lpNorm<Eigen::Infinity>() < 1e-6) break;  // numerically at the top
            fallback = true;
            tau = golden_section_pass(tau, offsets, y, K);
            const double new_value = tau_objective(tau, offsets, y, K);
            if (new_value <= value + 1e-12) break;
            value = new_value;
        }
    }
    if (used_fallback != nullptr) *used_fallback = fallback;
    return tau_to_thresholds(tau);
}

namespace {

struct InnerFit {
    GaussianPosterior posterior;
    std::optional<PmfResult> pmf_fit;
    std::optional<EpSites> ep_sites;
    FitReport report;
};

InnerFit run_method(const OrdinalDataset& dataset, const GaussianPrior& prior,
                    const Thresholds& thresholds, const EbOptions& options) {
    switch (options.method) {
        case FitMethod::mfvb: {
            MfvbResult r = fit_mfvb(dataset, prior, thresholds, options.mfvb);
            return {std::move(r.posterior), std::nullopt, std::nullopt, std::move(r.report)};
        }
        case FitMethod::pmf: {
            PmfOptions opt = options.pmf;
            opt.compute_moments = true;
            PmfResult r = fit_pmf(dataset, prior, thresholds, opt);
            GaussianPosterior post = *r.moments;
            FitReport report = r.report;
            return {std::move(post), std::move(r), std::nullopt, std::move(report)};
        }
        case FitMethod::ep: {
            EpResult r = fit_ep(dataset, prior, thresholds, options.ep);
            return {std::move(r.posterior), std::nullopt, std::move(r.sites),
                    std::move(r.report)};
        }
    }
    throw DomainError("unknown fit method");
}

}  // namespace

EbResult estimate_thresholds(const OrdinalDataset& dataset, const GaussianPrior& prior,
                             const EbOptions& options) {
    if (!(options.outer_tolerance > 0.0)) throw DomainError("outer tolerance must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    const int K = dataset.K;

    std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
    for (Eigen::Index i = 0; i < dataset.y.size(); ++i) {
        if (dataset.y[i] >= 1 && dataset.y[i] <= K) ++counts[dataset.y[i] - 1];
    }
    for (int k = 0; k < K; ++k) {
        if (counts[k] == 0) {
            throw EmptyCategory("category " + std::to_string(k + 1) +
                                " has no observations; its cutpoint is unidentifiable");
        }
    }
    // A constant nonzero column is additively confounded with the cutpoints.
    for (Eigen::Index j = 0; j < dataset.p(); ++j) {
        const double first = dataset.X(0, j);
        if (first != 0.0 && (dataset.X.col(j).array() == first).all()) {
            throw IdentifiabilityError("column " + std::to_string(j) +
                                       " is constant; drop it when estimating thresholds");
        }
    }

    // Start from the covariate-free probit fit: cutpoints at the Gaussian
    // quantiles of the cumulative category frequencies.
    Eigen::VectorXd alpha0(K - 1);
    Eigen::Index cum = 0;
    for (int k = 0; k < K - 1; ++k) {
        cum += counts[k];
        alpha0[k] = norm_quantile(static_cast<double>(cum) / dataset.n());
    }
    Thresholds thresholds(alpha0);
    validate(dataset, prior, thresholds);

    FitReport outer;
    InnerFit fit = run_method(dataset, prior, thresholds, options);
    for (int iter = 0; iter < std::max(1, options.max_outer_iterations); ++iter) {
        const Eigen::VectorXd offsets = dataset.X * fit.posterior.mean;
        bool fallback = false;
        Thresholds updated = maximize_alpha(offsets, dataset.y, K, thresholds, &fallback);
        outer.used_fallback = outer.used_fallback || fallback;
        outer.objective_trace.push_back(alpha_objective(offsets, dataset.y, K, updated));
        ++outer.iterations;

        const double shift =
            (updated.cutpoints() - thresholds.cutpoints()).lpNorm<Eigen::Infinity>();
        thresholds = std::move(updated);
        fit = run_method(dataset, prior, thresholds, options);
        if (shift < options.outer_tolerance) {
            outer.converged = true;
            break;
        }
    }
    outer.final_objective = outer.objective_trace.back();
    outer.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    return {std::move(thresholds), std::move(fit.posterior), std::move(fit.pmf_fit),
            std::move(fit.ep_sites), std::move(outer), std::move(fit.report)};
}

}  // namespace ordprobit
