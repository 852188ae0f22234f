#include <doctest.h>

#include <cmath>

#include "ordprobit/ebayes.hpp"
#include "ordprobit/predict.hpp"
#include "testutil.hpp"

using namespace ordprobit;

TEST_CASE("predict_gaussian closed form and exact telescoping") {
    Eigen::VectorXd cuts(3);
    cuts << -0.8, 0.1, 1.2;
    const Thresholds th(cuts);
    GaussianPosterior post{Eigen::VectorXd::Zero(2),
                           SpdMatrix(0.5 * Eigen::MatrixXd::Identity(2, 2))};

    // zero covariates: F_k = Phi(alpha_k / sqrt(1 + 0))
    const auto preds0 = predict_gaussian(post, th, Eigen::MatrixXd::Zero(1, 2));
    for (int k = 0; k < 3; ++k) {
        CHECK(preds0[0].cumulative[k] == doctest::Approx(norm_cdf(cuts[k])).epsilon(1e-14));
    }

    RngStream rng(61, 0);
    Eigen::MatrixXd Xnew(50, 2);
    for (int i = 0; i < 50; ++i) {
        Xnew(i, 0) = rng.next_gaussian();
        Xnew(i, 1) = rng.next_gaussian();
    }
    const auto preds = predict_gaussian(post, th, Xnew);
    for (const auto& d : preds) {
        CHECK(d.probabilities.sum() == 1.0);  // telescoping is exact
        CHECK(d.probabilities.minCoeff() >= 0.0);
        for (int k = 1; k < 3; ++k) CHECK(d.cumulative[k] >= d.cumulative[k - 1]);
        for (int k = 0; k < 3; ++k) {
            const double reconstructed =
                d.cumulative[k] - (k == 0 ? 0.0 : d.cumulative[k - 1]);
            CHECK(d.probabilities[k] == doctest::Approx(reconstructed).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(predict_gaussian(post, th, Eigen::MatrixXd::Zero(1, 3)),
                    DimensionMismatch);
}

TEST_CASE("predict_gaussian equals Monte Carlo over posterior draws") {
    Eigen::VectorXd cuts(2);
    cuts << -0.3, 0.9;
    const Thresholds th(cuts);
    Eigen::MatrixXd cov(2, 2);
    cov << 0.4, 0.1, 0.1, 0.3;
    Eigen::VectorXd mean(2);
    mean << 0.25, -0.5;
    GaussianPosterior post{mean, SpdMatrix(cov)};
    Eigen::MatrixXd x(1, 2);
    x << 0.7, -1.1;
    const auto pred = predict_gaussian(post, th, x);

    RngStream rng(62, 0);
    const Eigen::MatrixXd L = post.covariance.llt().matrixL();
    const int m = 200000;
    Eigen::VectorXd fsum = Eigen::VectorXd::Zero(2);
    for (int d = 0; d < m; ++d) {
        Eigen::VectorXd eps(2);
        eps << rng.next_gaussian(), rng.next_gaussian();
        const double center = x.row(0).dot(mean + L * eps);
        for (int k = 0; k < 2; ++k) fsum[k] += norm_cdf(cuts[k] - center);
    }
    for (int k = 0; k < 2; ++k) {
        const double mc = fsum[k] / m;
        const double se = std::sqrt(mc * (1.0 - mc) / m);
        CHECK(std::fabs(pred[0].cumulative[k] - mc) < 4.0 * se + 1e-6);
    }
}

TEST_CASE("classify argmax with smallest-index tie break") {
    PredictiveDistribution d;
    d.probabilities.resize(3);
    d.probabilities << 0.1, 0.7, 0.2;
    CHECK(classify(d) == 2);
    d.probabilities.resize(2);
    d.probabilities << 0.5, 0.5;
    CHECK(classify(d) == 1);
    d.probabilities.resize(4);
    d.probabilities.setConstant(0.25);
    CHECK(classify(d) == 1);
}

TEST_CASE("predict_pmf on an empty-data posterior matches the Gaussian form") {
    OrdinalDataset empty{Eigen::MatrixXd(0, 2), Eigen::VectorXi(0), 3};
    const GaussianPrior prior = testutil::diag_prior(2, 1.5);
    Eigen::VectorXd cuts(2);
    cuts << -0.5, 0.8;
    const Thresholds th(cuts);
    const PmfResult fit = fit_pmf(empty, prior, th);

    Eigen::MatrixXd Xnew(2, 2);
    Xnew << 0.4, -0.3, 1.0, 0.2;
    RngStream rng(63, 0);
    const auto mc = predict_pmf(fit.posterior, th, Xnew, 4000, rng);
    const auto exact = predict_gaussian(GaussianPosterior{prior.mean, prior.covariance},
                                        th, Xnew);
    for (int i = 0; i < 2; ++i) {
        CHECK(mc[i].probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 0; k < 2; ++k) {
            // With no z sites every draw gives the same exact value.
            CHECK(mc[i].cumulative[k] ==
                  doctest::Approx(exact[i].cumulative[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("predict_pmf is reproducible and cumulative-monotone") {
    RngStream rng(64, 0);
    auto problem = testutil::random_problem(rng, 60, 2, 4);
    const PmfResult fit = fit_pmf(problem.dataset, problem.prior, problem.thresholds);
    Eigen::MatrixXd Xnew(5, 2);
    for (int i = 0; i < 5; ++i) {
        Xnew(i, 0) = rng.next_gaussian();
        Xnew(i, 1) = rng.next_gaussian();
    }
    RngStream r1(77, 0), r2(77, 0);
    const auto a = predict_pmf(fit.posterior, problem.thresholds, Xnew, 500, r1);
    const auto b = predict_pmf(fit.posterior, problem.thresholds, Xnew, 500, r2);
    for (int i = 0; i < 5; ++i) {
        CHECK((a[i].probabilities - b[i].probabilities).norm() == 0.0);
        for (int k = 1; k < 3; ++k) CHECK(a[i].cumulative[k] >= a[i].cumulative[k - 1]);
        CHECK(a[i].probabilities.minCoeff() >= 0.0);
        CHECK(a[i].probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Monte Carlo error halves when draws increase tenfold") {
    RngStream rng(65, 0);
    auto problem = testutil::random_problem(rng, 50, 2, 3);
    const PmfResult fit = fit_pmf(problem.dataset, problem.prior, problem.thresholds);
    Eigen::MatrixXd Xnew(1, 2);
    Xnew << 0.5, -0.5;

    auto variance_at = [&](int draws, int reps) {
        std::vector<double> vals;
        for (int rep = 0; rep < reps; ++rep) {
            RngStream r(900 + rep, 3);
            vals.push_back(
                predict_pmf(fit.posterior, problem.thresholds, Xnew, draws, r)[0]
                    .cumulative[0]);
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= reps;
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        return var / (reps - 1);
    };
    const double v_small = variance_at(200, 40);
    const double v_large = variance_at(2000, 40);
    // ratio should be ~10; allow generous slack for the variance estimator
    CHECK(v_small / v_large > 3.0);
    CHECK(v_small / v_large < 35.0);
}

TEST_CASE("training rows of a separable problem classify close to the truth") {
    RngStream rng(66, 0);
    const int n = 300;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXi y(n);
    Eigen::VectorXd beta_true(2);
    beta_true << 2.5, -2.0;
    Eigen::VectorXd cuts(2);
    cuts << -1.2, 1.2;
    const Thresholds th_true(cuts);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.next_gaussian();
        X(i, 1) = rng.next_gaussian();
        const double z = X.row(i).dot(beta_true) + 0.3 * rng.next_gaussian();
        y[i] = z < cuts[0] ? 1 : (z < cuts[1] ? 2 : 3);
    }
    OrdinalDataset d{X, y, 3};
    EbOptions opt;
    const EbResult fit = estimate_thresholds(d, testutil::diag_prior(2), opt);
    const auto fitted = predict_gaussian(fit.posterior, fit.thresholds, X);

    // reference classifier built from the generating truth
    GaussianPosterior truth{beta_true, SpdMatrix(1e-8 * Eigen::MatrixXd::Identity(2, 2))};
    const auto oracle = predict_gaussian(truth, th_true, X);
    int fitted_hits = 0, oracle_hits = 0;
    for (int i = 0; i < n; ++i) {
        fitted_hits += classify(fitted[i]) == y[i] ? 1 : 0;
        oracle_hits += classify(oracle[i]) == y[i] ? 1 : 0;
    }
    CHECK(fitted_hits >= oracle_hits - n * 2 / 100);
}
