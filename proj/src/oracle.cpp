#include "ordprobit/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ordprobit/mfvb.hpp"

namespace ordprobit {

PosteriorSamples gibbs_fit_intervals(const Eigen::MatrixXd& X,
                                     const std::vector<Interval>& intervals,
                                     const GaussianPrior& prior, int iterations,
                                     int burn_in, RngStream& rng) {
    if (iterations < 1) throw DomainError("iterations must be at least 1");
    if (burn_in < 0) throw DomainError("burn-in must be non-negative");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (static_cast<Eigen::Index>(intervals.size()) != n) {
        throw DimensionMismatch("one interval per observation is required");
    }

    PosteriorSamples out;
    out.burn_in = burn_in;
    out.seed = rng.seed();
    out.stream = rng.stream();
    out.draws.resize(iterations, p);

    if (n == 0) {
        const Eigen::MatrixXd L = prior.covariance.llt().matrixL();
        Eigen::VectorXd eps(p);
        for (int it = 0; it < iterations; ++it) {
            for (Eigen::Index j = 0; j < p; ++j) eps[j] = rng.next_gaussian();
            out.draws.row(it) = (prior.mean + L * eps).transpose();
        }
        return out;
    }

    auto [V, prior_shift] = posterior_precision_pieces(X, prior);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(V).matrixL();

    Eigen::VectorXd beta = prior.mean;
    Eigen::VectorXd z(n), eps(p);
    for (int it = 0; it < burn_in + iterations; ++it) {
        const Eigen::VectorXd eta = X * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            z[i] = tn_sample(intervals[i], eta[i], 1.0, rng);
        }
        for (Eigen::Index j = 0; j < p; ++j) eps[j] = rng.next_gaussian();
        beta = V * (prior_shift + X.transpose() * z) + L * eps;
        if (it >= burn_in) out.draws.row(it - burn_in) = beta.transpose();
    }
    return out;
}

PosteriorSamples gibbs_fit(const OrdinalDataset& dataset, const GaussianPrior& prior,
                           const Thresholds& thresholds, int iterations, int burn_in,
                           RngStream& rng) {
    validate(dataset, prior, thresholds);
    std::vector<Interval> intervals;
    intervals.reserve(dataset.n());
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        intervals.push_back(thresholds.interval(dataset.y[i]));
    }
    return gibbs_fit_intervals(dataset.X, intervals, prior, iterations, burn_in, rng);
}

namespace {

// Gaussian-kernel KDE with Silverman's bandwidth.
struct Kde {
    Eigen::VectorXd points;
    double bandwidth;

    double operator()(double x) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < points.size(); ++i) {
            acc += norm_pdf((x - points[i]) / bandwidth);
        }
        return acc / (points.size() * bandwidth);
    }
};

Kde make_kde(const Eigen::VectorXd& samples) {
    const Eigen::Index m = samples.size();
    const double mean = samples.mean();
    const double sd = std::sqrt((samples.array() - mean).square().sum() / (m - 1));
    Eigen::VectorXd sorted = samples;
    std::sort(sorted.data(), sorted.data() + m);
    const double q25 = sorted[static_cast<Eigen::Index>(0.25 * (m - 1))];
    const double q75 = sorted[static_cast<Eigen::Index>(0.75 * (m - 1))];
    const double spread = std::min(sd, (q75 - q25) / 1.34);
    double bw = 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
    if (!(bw > 0.0)) bw = std::max(1e-12, 0.9 * sd * std::pow(m, -0.2));
    return {sorted, bw};
}

double overlap_score(const Eigen::VectorXd& samples,
                     const std::function<double(double)>& density, double support_lo,
                     double support_hi) {
    const Kde kde = make_kde(samples);
    const double lo =
        std::min(samples.minCoeff(), support_lo) - 4.0 * kde.bandwidth;
    const double hi =
        std::max(samples.maxCoeff(), support_hi) + 4.0 * kde.bandwidth;
    constexpr int kGrid = 512;
    const double h = (hi - lo) / (kGrid - 1);
    // 100 * integral of min(p_hat, q): equals 100 (1 - TV(p_hat, q)) for
    // proper densities and stays honest when the supports barely overlap.
    double acc = 0.0;
    for (int g = 0; g < kGrid; ++g) {
        const double x = lo + g * h;
        const double v = std::min(kde(x), density(x));
        acc += (g == 0 || g == kGrid - 1) ? 0.5 * v : v;
    }
    return std::clamp(100.0 * acc * h, 0.0, 100.0);
}

}  // namespace

double accuracy_score(const PosteriorSamples& samples,
                      const std::function<double(double)>& approx_density,
                      Eigen::Index coordinate) {
    if (coordinate < 0 || coordinate >= samples.draws.cols()) {
        throw DimensionMismatch("coordinate outside the sampled dimension");
    }
    if (samples.draws.rows() < 100) {
        throw InsufficientSamples("at least 100 draws are required");
    }
    const Eigen::VectorXd col = samples.draws.col(coordinate);
    return overlap_score(col, approx_density, col.minCoeff(), col.maxCoeff());
}

double accuracy_score(const PosteriorSamples& samples, double approx_mean, double approx_sd,
                      Eigen::Index coordinate) {
    if (!(approx_sd > 0.0)) throw DomainError("approximation sd must be positive");
    if (coordinate < 0 || coordinate >= samples.draws.cols()) {
        throw DimensionMismatch("coordinate outside the sampled dimension");
    }
    if (samples.draws.rows() < 100) {
        throw InsufficientSamples("at least 100 draws are required");
    }
    const Eigen::VectorXd col = samples.draws.col(coordinate);
    const auto density = [approx_mean, approx_sd](double x) {
        return norm_pdf((x - approx_mean) / approx_sd) / approx_sd;
    };
    return overlap_score(col, density, approx_mean - 6.0 * approx_sd,
                         approx_mean + 6.0 * approx_sd);
}

}  // namespace ordprobit
