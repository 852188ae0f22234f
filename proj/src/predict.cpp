#include "ordprobit/predict.hpp"

#include <cmath>

namespace ordprobit {

namespace {

PredictiveDistribution from_cumulative(const Eigen::VectorXd& F) {
    const Eigen::Index K = F.size() + 1;
    PredictiveDistribution d{Eigen::VectorXd(K), F};
    double prev = 0.0;
    for (Eigen::Index k = 0; k < K - 1; ++k) {
        d.probabilities[k] = F[k] - prev;
        prev = F[k];
    }
    d.probabilities[K - 1] = 1.0 - prev;
    return d;
}

}  // namespace

std::vector<PredictiveDistribution> predict_gaussian(const GaussianPosterior& post,
                                                     const Thresholds& thresholds,
                                                     const Eigen::MatrixXd& Xnew) {
    if (Xnew.cols() != post.mean.size()) {
        throw DimensionMismatch("query columns do not match the posterior dimension");
    }
    const Eigen::VectorXd& alpha = thresholds.cutpoints();
    std::vector<PredictiveDistribution> out;
    out.reserve(Xnew.rows());
    for (Eigen::Index i = 0; i < Xnew.rows(); ++i) {
        const Eigen::VectorXd x = Xnew.row(i).transpose();
        const double center = x.dot(post.mean);
        const double denom = std::sqrt(1.0 + x.dot(post.covariance.mat() * x));
        Eigen::VectorXd F(alpha.size());
        for (Eigen::Index k = 0; k < alpha.size(); ++k) {
            F[k] = norm_cdf((alpha[k] - center) / denom);
        }
        out.push_back(from_cumulative(F));
    }
    return out;
}

std::vector<PredictiveDistribution> predict_pmf(const PmfPosterior& post,
                                                const Thresholds& thresholds,
                                                const Eigen::MatrixXd& Xnew, int draws,
                                                RngStream& rng) {
    if (Xnew.cols() != post.p()) {
        throw DimensionMismatch("query columns do not match the posterior dimension");
    }
    if (draws < 1) throw DomainError("draws must be at least 1");
    const Eigen::VectorXd& alpha = thresholds.cutpoints();
    const Eigen::Index m = Xnew.rows();
    const Eigen::Index n = post.n();
    const Eigen::VectorXd prior_shift = post.prior.covariance.llt().solve(post.prior.mean);

    Eigen::VectorXd denom(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd x = Xnew.row(i).transpose();
        denom[i] = std::sqrt(1.0 + x.dot(post.V.mat() * x));
    }

    Eigen::MatrixXd Fsum = Eigen::MatrixXd::Zero(m, alpha.size());
    Eigen::VectorXd z(n);
    for (int d = 0; d < draws; ++d) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z[i] = tn_sample(post.intervals[i], post.xi[i], post.sigma_star[i], rng);
        }
        const Eigen::VectorXd mean =
            post.V.mat() * (prior_shift + post.X.transpose() * z);
        const Eigen::VectorXd centers = Xnew * mean;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index k = 0; k < alpha.size(); ++k) {
                Fsum(i, k) += norm_cdf((alpha[k] - centers[i]) / denom[i]);
            }
        }
    }

    std::vector<PredictiveDistribution> out;
    out.reserve(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.push_back(from_cumulative(Fsum.row(i).transpose() / draws));
    }
    return out;
}

int classify(const PredictiveDistribution& dist) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < dist.probabilities.size(); ++k) {
        if (dist.probabilities[k] > dist.probabilities[best]) best = k;
    }
    return static_cast<int>(best) + 1;
}

}  // namespace ordprobit
