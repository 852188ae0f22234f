// Acceptance suite: every criterion prints one PASS/FAIL line. Run all with
// no arguments or a single one with --criterion N. Exit code 0 iff every
// requested criterion passed.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "ordprobit/ebayes.hpp"
#include "ordprobit/oracle.hpp"
#include "ordprobit/predict.hpp"
#include "ordprobit/simbench.hpp"
#include "quadrature.hpp"
#include "testutil.hpp"

namespace op = ordprobit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
};

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<testutil::RandomProblem> elbo_suite() {
    // 50 datasets, n <= 500, p <= 10, K in {2, 3, 5}
    std::vector<testutil::RandomProblem> suite;
    op::RngStream rng(1001, 0);
    const int kk[3] = {2, 3, 5};
    for (int t = 0; t < 50; ++t) {
        const int n = 60 + static_cast<int>(rng.next_double() * 440);
        const int p = 1 + static_cast<int>(rng.next_double() * 10);
        suite.push_back(testutil::random_problem(rng, n, std::min(p, 10), kk[t % 3]));
    }
    return suite;
}

// method moments at fixed thresholds
struct Moments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
};

Moments moments_of(op::FitMethod m, const op::OrdinalDataset& d,
                   const op::GaussianPrior& prior, const op::Thresholds& th) {
    switch (m) {
        case op::FitMethod::mfvb: {
            const op::MfvbResult r = op::fit_mfvb(d, prior, th);
            return {r.posterior.mean,
                    r.posterior.covariance.mat().diagonal().cwiseSqrt()};
        }
        case op::FitMethod::pmf: {
            const op::PmfResult r = op::fit_pmf(d, prior, th);
            return {r.moments->mean,
                    r.moments->covariance.mat().diagonal().cwiseSqrt()};
        }
        case op::FitMethod::ep: {
            const op::EpResult r = op::fit_ep(d, prior, th);
            return {r.posterior.mean,
                    r.posterior.covariance.mat().diagonal().cwiseSqrt()};
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    op::RngStream rng(2024, 0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // locations/scales random; every fourth case pushed 8 sigma out
        const double loc = 4.0 * rng.next_gaussian();
        const double scale = 0.2 + 2.8 * rng.next_double();
        double lo = loc + scale * (6.0 * rng.next_double() - 3.0);
        if (trial % 4 == 0) lo = loc + scale * (8.0 + 2.0 * rng.next_double());
        if (trial % 7 == 0) lo = loc - scale * (9.0 + rng.next_double());
        double hi = lo + scale * (0.05 + 3.0 * rng.next_double());
        if (trial % 5 == 0) hi = kInf;
        if (trial % 11 == 0 && std::isfinite(hi)) {
            const double w = hi - lo;
            lo = -kInf;
            hi = loc - scale * (8.0 - std::min(w, 4.0));
            if (!(hi > -kInf)) continue;
        }

        const testq::TnRef ref = testq::tn_reference(lo, hi, loc, scale);
        const op::TnMoments got = op::tn_moments({lo, hi}, loc, scale);
        if (std::fabs(got.mean - ref.mean) > 1e-9 ||
            std::fabs(got.variance - ref.variance) > 1e-9) {
            out.fail("tn_moments mismatch at [" + std::to_string(lo) + "," +
                     std::to_string(hi) + "] loc=" + std::to_string(loc));
            break;
        }

        // standardized zeta check on the same case
        const double a = (lo - loc) / scale;
        const double b = std::isfinite(hi) ? (hi - loc) / scale : kInf;
        const testq::TnRef sref = testq::tn_reference(a, b, 0.0, 1.0);
        const op::ZetaValues z = op::zeta_values(a, b);
        if (std::fabs(z.zeta1 - (-sref.mean)) > 1e-9 ||
            std::fabs((1.0 - z.zeta1 * z.zeta1 - z.zeta2) - sref.variance) > 1e-9) {
            out.fail("zeta mismatch at standardized [" + std::to_string(a) + "," +
                     std::to_string(b) + "]");
            break;
        }
        ++checked;
    }
    const double secs = elapsed_since(t0);
    if (secs >= 10.0) out.fail("runtime " + std::to_string(secs) + "s >= 10s");
    out.detail += std::to_string(checked) + " cases, " + std::to_string(secs) + "s";
    return out;
}

Outcome criterion2and3(int which) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto suite = elbo_suite();
    int nesting_ok = 0;
    for (const auto& prob : suite) {
        const op::MfvbResult mf = op::fit_mfvb(prob.dataset, prob.prior, prob.thresholds);
        const op::PmfResult pf = op::fit_pmf(prob.dataset, prob.prior, prob.thresholds);
        for (std::size_t t = 1; t < mf.report.objective_trace.size(); ++t) {
            if (mf.report.objective_trace[t] - mf.report.objective_trace[t - 1] < -1e-8) {
                out.fail("MFVB ELBO decreased");
            }
        }
        for (std::size_t t = 1; t < pf.report.objective_trace.size(); ++t) {
            if (pf.report.objective_trace[t] - pf.report.objective_trace[t - 1] < -1e-8) {
                out.fail("PMF ELBO decreased");
            }
        }
        if (pf.report.final_objective >= mf.report.final_objective - 1e-6) {
            ++nesting_ok;
        } else if (which == 3) {
            out.fail("nesting violated by " +
                     std::to_string(mf.report.final_objective -
                                    pf.report.final_objective));
        }
        if (!out.pass) break;
    }
    const double secs = elapsed_since(t0);
    if (which == 2 && secs >= 60.0) out.fail("runtime >= 60s");
    out.detail += "50 datasets, nesting held on " + std::to_string(nesting_ok) + ", " +
                  std::to_string(secs) + "s";
    return out;
}

Outcome criterion4() {
    Outcome out;
    op::RngStream rng(1004, 0);
    const double tol = 50.0 * 1e-6;  // 50 x the convergence epsilon
    for (int t = 0; t < 20; ++t) {
        auto prob = testutil::random_problem(
            rng, 40 + static_cast<int>(rng.next_double() * 160),
            1 + static_cast<int>(rng.next_double() * 6), t % 2 == 0 ? 3 : 5);
        op::EpOptions opt;
        opt.epsilon = 1e-6;
        const op::EpResult r = op::fit_ep(prob.dataset, prob.prior, prob.thresholds, opt);
        const Eigen::MatrixXd& S = r.posterior.covariance.mat();
        const Eigen::VectorXd rv = r.posterior.covariance.llt().solve(r.posterior.mean);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < prob.dataset.n(); ++i) {
            const Eigen::VectorXd x = prob.dataset.X.row(i).transpose();
            Eigen::MatrixXd Scav = S;
            op::rank_one_inverse_update_inplace(Scav, x, -r.sites.k[i]);
            const op::HybridMoments h = op::hybrid_moments(
                op::SpdMatrix(Scav), rv - r.sites.w[i] * x, x,
                prob.thresholds.interval(prob.dataset.y[i]));
            worst = std::max(worst,
                             (h.mean - r.posterior.mean).lpNorm<Eigen::Infinity>());
            worst = std::max(worst,
                             (h.covariance.mat() - S).lpNorm<Eigen::Infinity>());
            if (h.log_z > 0.0) out.fail("hybrid logZ > 0");
        }
        if (worst > tol) {
            out.fail("dataset " + std::to_string(t) + " worst gap " +
                     std::to_string(worst));
            break;
        }
    }
    out.detail += "20 datasets, tol " + std::to_string(tol);
    return out;
}

Outcome criterion5() {
    Outcome out;
    op::RngStream rng(1005, 0);
    for (int t = 0; t < 6; ++t) {
        const int n = 60 + static_cast<int>(rng.next_double() * 140);
        const int p = 2 + static_cast<int>(rng.next_double() * 18);
        auto prob = testutil::random_problem(rng, n, p, 3);
        const op::EpResult r = op::fit_ep(prob.dataset, prob.prior, prob.thresholds);
        Eigen::MatrixXd Q =
            prob.prior.covariance.llt().solve(Eigen::MatrixXd::Identity(p, p));
        for (Eigen::Index i = 0; i < prob.dataset.n(); ++i) {
            const Eigen::VectorXd x = prob.dataset.X.row(i).transpose();
            Q += r.sites.k[i] * x * x.transpose();
        }
        const Eigen::MatrixXd direct = Q.inverse();
        const double rel =
            (r.posterior.covariance.mat() - direct).norm() / direct.norm();
        if (rel > 1e-8) {
            out.fail("relative Frobenius " + std::to_string(rel) + " at n=" +
                     std::to_string(n) + " p=" + std::to_string(p));
            break;
        }
    }
    out.detail += "6 datasets to n=200, p=20";
    return out;
}

Outcome criterion6() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<op::FitMethod> methods{op::FitMethod::mfvb, op::FitMethod::pmf,
                                             op::FitMethod::ep};
    struct Case {
        int p;
        double tol;
    };
    for (const Case c : {Case{5, 3e-3}, Case{50, 3e-2}}) {
        op::SimConfig config;
        config.n = 10000;
        config.p = c.p;
        config.K = 5;
        op::RngStream rng(1006, static_cast<std::uint64_t>(c.p));
        const op::GeneratedData gen = op::gen_dataset(config, rng);
        const op::GaussianPrior prior = testutil::diag_prior(c.p);
        op::EbOptions eb;
        const op::Thresholds alpha =
            op::estimate_thresholds(gen.dataset, prior, eb).thresholds;
        op::OracleConfig oc;
        oc.seed = 1006;
        oc.stream = 77;
        const op::BenchResult bench =
            op::error_vs_oracle(gen.dataset, prior, alpha, methods, oc);
        for (const auto& e : bench.errors) {
            out.detail += std::string(op::method_name(e.method)) + "@p" +
                          std::to_string(c.p) + "=" +
                          std::to_string(e.mean_abs_error_mean) + " ";
            if (e.mean_abs_error_mean >= c.tol) {
                out.fail(std::string(op::method_name(e.method)) + " error " +
                         std::to_string(e.mean_abs_error_mean) + " >= " +
                         std::to_string(c.tol) + " at p=" + std::to_string(c.p));
            }
        }
    }
    const double secs = elapsed_since(t0);
    if (secs >= 600.0) out.fail("runtime >= 10 min");
    out.detail += std::to_string(secs) + "s";
    return out;
}

Outcome criterion7() {
    Outcome out;
    const int reps = 20;
    std::vector<int> ep_wins(reps, 0);
    std::vector<std::string> errors(reps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
            try {
                op::SimConfig config;
                config.n = 1000;
                config.p = 5;
                config.K = 5;
                op::RngStream rng(1007, static_cast<std::uint64_t>(r));
                const op::GeneratedData gen = op::gen_dataset(config, rng);
                const op::GaussianPrior prior = testutil::diag_prior(5);
                op::EbOptions eb;
                const op::Thresholds alpha =
                    op::estimate_thresholds(gen.dataset, prior, eb).thresholds;
                op::OracleConfig oc;
                oc.seed = 1007;
                oc.stream = 500 + static_cast<std::uint64_t>(r);
                const op::BenchResult bench = op::error_vs_oracle(
                    gen.dataset, prior, alpha,
                    {op::FitMethod::mfvb, op::FitMethod::ep}, oc);
                ep_wins[r] =
                    bench.errors[1].mean_abs_error_sd <= bench.errors[0].mean_abs_error_sd
                        ? 1
                        : 0;
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };
    std::thread a(worker), b(worker);
    a.join();
    b.join();
    for (const auto& e : errors) {
        if (!e.empty()) out.fail("replication failed: " + e);
    }
    int wins = 0;
    for (int w : ep_wins) wins += w;
    if (wins < 18) {
        out.fail("EP sd-error beat MFVB on only " + std::to_string(wins) + "/20");
    }
    out.detail += "EP better sd on " + std::to_string(wins) + "/20";
    return out;
}

Outcome criterion8() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    op::SimConfig config;
    config.n = 500;
    config.p = 5;
    config.K = 5;
    config.replications = 100;
    const op::CoverageTable table = op::coverage_study(
        config, {80, 95}, {op::FitMethod::mfvb, op::FitMethod::ep}, 1008, 2);
    if (table.failed_replications > 0) {
        out.fail(std::to_string(table.failed_replications) + " replications failed");
    }
    const double reference[5] = {94.0, 94.0, 92.0, 93.0, 94.0};
    double ep80 = 0.0, mf80 = 0.0;
    for (const auto& cell : table.cells) {
        if (cell.method == op::FitMethod::ep && cell.level == 95) {
            std::ostringstream ss;
            ss << cell.coverage_percent.transpose();
            out.detail += "EP@95 = [" + ss.str() + "] ";
            for (int j = 0; j < 5; ++j) {
                if (std::fabs(cell.coverage_percent[j] - reference[j]) > 4.0) {
                    out.fail("EP 95% coverage for beta_" + std::to_string(j + 1) +
                             " = " + std::to_string(cell.coverage_percent[j]) +
                             " outside +-4 of " + std::to_string(reference[j]));
                }
            }
        }
        if (cell.method == op::FitMethod::ep && cell.level == 80) {
            ep80 = cell.coverage_percent.mean();
        }
        if (cell.method == op::FitMethod::mfvb && cell.level == 80) {
            mf80 = cell.coverage_percent.mean();
        }
    }
    if (!(mf80 < ep80)) {
        out.fail("MFVB mean coverage " + std::to_string(mf80) +
                 " not below EP " + std::to_string(ep80) + " at 80%");
    }
    const double secs = elapsed_since(t0);
    if (secs >= 900.0) out.fail("runtime >= 15 min");
    out.detail += "mfvb@80=" + std::to_string(mf80) + " ep@80=" + std::to_string(ep80) +
                  ", " + std::to_string(secs) + "s";
    return out;
}

Outcome criterion9() {
    Outcome out;
    op::SimConfig config;
    config.n = 10000;
    config.p = 25;
    config.K = 5;
    config.replications = 10;
    const std::vector<op::FitMethod> methods{op::FitMethod::mfvb, op::FitMethod::pmf,
                                             op::FitMethod::ep};
    const op::TimingResult t = op::timing_study(config, methods, 1009, 1);
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    double med[3];
    for (int m = 0; m < 3; ++m) {
        med[m] = median(t.elapsed[m]);
        for (double v : t.elapsed[m]) {
            if (v >= 10.0) {
                out.fail(std::string(op::method_name(methods[m])) + " fit took " +
                         std::to_string(v) + "s >= 10s");
            }
        }
    }
    if (!(med[0] <= med[1] && med[1] <= med[2])) {
        out.fail("median ordering violated");
    }
    out.detail += "medians mfvb=" + std::to_string(med[0]) +
                  "s pmf=" + std::to_string(med[1]) + "s ep=" + std::to_string(med[2]) +
                  "s";
    return out;
}

Outcome criterion10() {
    Outcome out;
    // analytic part
    op::RngStream rng(1010, 0);
    op::PosteriorSamples exact;
    exact.draws.resize(100000, 1);
    for (int i = 0; i < 100000; ++i) exact.draws(i, 0) = rng.next_gaussian();
    const double score = op::accuracy_score(exact, 1.0, 1.0, 0);
    if (std::fabs(score - 61.7) > 1.0) {
        out.fail("analytic score " + std::to_string(score) + " outside 61.7 +- 1.0");
    }
    out.detail += "analytic=" + std::to_string(score) + " ";

    // EP vs MFVB accuracy on a simulated dataset
    op::SimConfig config;
    config.n = 500;
    config.p = 3;
    config.K = 5;
    op::RngStream drng(1010, 3);
    const op::GeneratedData gen = op::gen_dataset(config, drng);
    const op::GaussianPrior prior = testutil::diag_prior(3);
    op::EbOptions eb;
    const op::Thresholds alpha = op::estimate_thresholds(gen.dataset, prior, eb).thresholds;
    op::RngStream grng(1010, 9);
    const op::PosteriorSamples s =
        op::gibbs_fit(gen.dataset, prior, alpha, 5000, 1000, grng);
    const Moments mf = moments_of(op::FitMethod::mfvb, gen.dataset, prior, alpha);
    const Moments ep = moments_of(op::FitMethod::ep, gen.dataset, prior, alpha);
    int ep_wins = 0;
    for (int j = 0; j < 3; ++j) {
        const double a_mf = op::accuracy_score(s, mf.mean[j], mf.sd[j], j);
        const double a_ep = op::accuracy_score(s, ep.mean[j], ep.sd[j], j);
        out.detail += "coord" + std::to_string(j) + " mfvb=" + std::to_string(a_mf) +
                      " ep=" + std::to_string(a_ep) + " ";
        if (a_ep >= a_mf) ++ep_wins;
    }
    if (ep_wins < 2) {
        out.fail("EP accuracy beat MFVB on only " + std::to_string(ep_wins) +
                 "/3 coordinates");
    }
    return out;
}

Outcome criterion11() {
    Outcome out;
    op::RngStream rng(1011, 0);
    for (int t = 0; t < 20; ++t) {
        auto prob = testutil::random_problem(
            rng, 40 + static_cast<int>(rng.next_double() * 200),
            1 + static_cast<int>(rng.next_double() * 5),
            2 + static_cast<int>(rng.next_double() * 4));
        Eigen::VectorXd betabar(prob.dataset.p());
        for (Eigen::Index j = 0; j < betabar.size(); ++j) {
            betabar[j] = 0.5 * rng.next_gaussian();
        }
        const Eigen::VectorXd offsets = prob.dataset.X * betabar;
        const Eigen::VectorXd g = op::grad_alpha(betabar, prob.dataset, prob.thresholds);
        const double h = 1e-6;
        for (Eigen::Index k = 0; k < prob.thresholds.count(); ++k) {
            Eigen::VectorXd up = prob.thresholds.cutpoints();
            Eigen::VectorXd dn = up;
            up[k] += h;
            dn[k] -= h;
            // the frozen-betabar MFVB ELBO differs from alpha_objective by a
            // term constant in alpha, so the derivative is identical
            const double fd =
                (op::alpha_objective(offsets, prob.dataset.y, prob.dataset.K,
                                     op::Thresholds(up)) -
                 op::alpha_objective(offsets, prob.dataset.y, prob.dataset.K,
                                     op::Thresholds(dn))) /
                (2.0 * h);
            const double denom = std::max(std::fabs(g[k]), 1e-3);
            if (std::fabs(g[k] - fd) / denom > 1e-6) {
                out.fail("instance " + std::to_string(t) + " component " +
                         std::to_string(k) + ": grad " + std::to_string(g[k]) +
                         " vs fd " + std::to_string(fd));
            }
        }
        if (!out.pass) break;
    }
    out.detail += "20 instances";
    return out;
}

Outcome criterion12() {
    Outcome out;
    op::RngStream rng(1012, 0);
    auto prob = testutil::random_problem(rng, 60, 3, 3);
    const op::PmfResult fit = op::fit_pmf(prob.dataset, prob.prior, prob.thresholds);
    op::RngStream srng(1012, 8);
    const int m = 100000;
    const Eigen::MatrixXd draws = op::pmf_sample_beta(fit.posterior, m, srng);
    const Eigen::VectorXd mean = draws.colwise().mean();
    const Eigen::MatrixXd centered = draws.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1);

    for (int j = 0; j < 3; ++j) {
        const double se = std::sqrt(cov(j, j) / m);
        if (std::fabs(mean[j] - fit.moments->mean[j]) > 4.0 * se) {
            out.fail("mean coordinate " + std::to_string(j) + " off by " +
                     std::to_string((mean[j] - fit.moments->mean[j]) / se) + " se");
        }
    }
    for (int j = 0; j < 3; ++j) {
        for (int l = j; l < 3; ++l) {
            // empirical se of the covariance entry via its influence values
            const Eigen::ArrayXd prod =
                centered.col(j).array() * centered.col(l).array();
            const double entry_var =
                (prod - prod.mean()).square().sum() / (m - 1);
            const double se = std::sqrt(entry_var / m);
            if (std::fabs(cov(j, l) - fit.moments->covariance.mat()(j, l)) > 4.0 * se) {
                out.fail("cov(" + std::to_string(j) + "," + std::to_string(l) +
                         ") off");
            }
        }
    }
    out.detail += "100000 draws, 4 se componentwise";
    return out;
}

const char* kDescriptions[12] = {
    "special functions match adaptive quadrature to 1e-9 (1000 cases, 8-sigma tails)",
    "MFVB and PMF ELBO traces are monotone on 50 randomized datasets",
    "final PMF ELBO dominates final MFVB ELBO (family nesting)",
    "EP hybrid moments match the global approximation at convergence",
    "incremental EP covariance equals direct inversion (1e-8 Frobenius)",
    "n=10000 posterior-mean error vs Gibbs below 3e-3 (p=5) and 3e-2 (p=50)",
    "EP posterior-sd error beats MFVB on >= 18/20 replications",
    "EP 95% coverage within +-4 of the reference row; MFVB undercovers at 80%",
    "fits at n=10000, p=25 finish under 10s with median ordering mfvb<=pmf<=ep",
    "accuracy score: analytic 61.7 +- 1.0; EP beats MFVB on >= 2/3 coordinates",
    "grad_alpha matches finite differences to 1e-6 relative on 20 instances",
    "PMF sampler moments match closed form within 4 MC standard errors",
};

Outcome run(int c) {
    switch (c) {
        case 1: return criterion1();
        case 2: return criterion2and3(2);
        case 3: return criterion2and3(3);
        case 4: return criterion4();
        case 5: return criterion5();
        case 6: return criterion6();
        case 7: return criterion7();
        case 8: return criterion8();
        case 9: return criterion9();
        case 10: return criterion10();
        case 11: return criterion11();
        case 12: return criterion12();
        default: throw std::invalid_argument("criterion must be 1..12");
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc) {
            which.push_back(std::atoi(argv[++a]));
        }
    }
    if (which.empty()) {
        for (int c = 1; c <= 12; ++c) which.push_back(c);
    }

    bool all_pass = true;
    for (int c : which) {
        Outcome out;
        try {
            out = run(c);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && out.pass;
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c << ": "
                  << kDescriptions[c - 1];
        if (!out.detail.empty()) std::cout << " [" << out.detail << "]";
        std::cout << std::endl;
    }
    return all_pass ? 0 : 1;
}
