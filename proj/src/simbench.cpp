#include "ordprobit/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace ordprobit {

const char* method_name(FitMethod m) {
    switch (m) {
        case FitMethod::mfvb: return "mfvb";
        case FitMethod::pmf: return "pmf";
        case FitMethod::ep: return "ep";
    }
    return "?";
}

GeneratedData gen_dataset(const SimConfig& config, RngStream& rng) {
    if (config.n < 2 || config.p < 1 || config.K < 2) {
        throw DomainError("gen_dataset needs n >= 2, p >= 1, K >= 2");
    }
    if (std::fabs(config.prop_zero + config.prop_pos + config.prop_neg - 1.0) > 1e-9) {
        throw DomainError("beta-pattern proportions must sum to 1");
    }
    const int n = config.n;
    const int p = config.p;

    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) X(i, j) = rng.next_double();
    }
    for (int j = 0; j < p; ++j) {
        const double mean = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - mean).square().sum() / (n - 1));
        X.col(j) = (X.col(j).array() - mean) / sd * 0.5;
    }

    const int n_zero = static_cast<int>(std::llround(config.prop_zero * p));
    const int n_pos = static_cast<int>(std::llround(config.prop_pos * p));
    const int n_neg = p - n_zero - n_pos;
    if (n_neg < 0) throw DomainError("beta-pattern proportions are inconsistent with p");
    Eigen::VectorXd beta(p);
    beta.head(n_zero).setZero();
    beta.segment(n_zero, n_pos).setOnes();
    beta.tail(n_neg).setConstant(-1.0);

    Eigen::VectorXd z(n);
    const Eigen::VectorXd eta = X * beta;
    for (int i = 0; i < n; ++i) z[i] = eta[i] + rng.next_gaussian();
    const double z_lo = z.minCoeff();
    const double z_hi = z.maxCoeff();

    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::VectorXd cuts(config.K - 1);
        for (int k = 0; k < config.K - 1; ++k) {
            cuts[k] = z_lo + (z_hi - z_lo) * rng.next_double();
        }
        std::sort(cuts.data(), cuts.data() + cuts.size());
        bool distinct = true;
        for (int k = 1; k < config.K - 1; ++k) distinct = distinct && cuts[k - 1] < cuts[k];
        if (!distinct) continue;

        Eigen::VectorXi y(n);
        Eigen::VectorXi seen = Eigen::VectorXi::Zero(config.K);
        for (int i = 0; i < n; ++i) {
            int k = 1;
            while (k <= config.K - 1 && z[i] > cuts[k - 1]) ++k;
            y[i] = k;
            ++seen[k - 1];
        }
        if (seen.minCoeff() == 0) continue;

        return {OrdinalDataset{std::move(X), std::move(y), config.K}, std::move(beta),
                Thresholds(std::move(cuts))};
    }
    throw DegenerateCutoffs("no cutoff draw kept all categories occupied after 100 tries");
}

namespace {

struct FittedMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    double elapsed = 0.0;
};

FittedMoments fit_moments(FitMethod method, const OrdinalDataset& dataset,
                          const GaussianPrior& prior, const Thresholds& thresholds) {
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    switch (method) {
        case FitMethod::mfvb: {
            MfvbResult r = fit_mfvb(dataset, prior, thresholds);
            mean = std::move(r.posterior.mean);
            cov = r.posterior.covariance.mat();
            break;
        }
        case FitMethod::pmf: {
            PmfResult r = fit_pmf(dataset, prior, thresholds);
            mean = std::move(r.moments->mean);
            cov = r.moments->covariance.mat();
            break;
        }
        case FitMethod::ep: {
            EpResult r = fit_ep(dataset, prior, thresholds);
            mean = std::move(r.posterior.mean);
            cov = r.posterior.covariance.mat();
            break;
        }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(mean), cov.diagonal().cwiseSqrt(), elapsed};
}

}  // namespace

BenchResult error_vs_oracle(const OrdinalDataset& dataset, const GaussianPrior& prior,
                            const Thresholds& thresholds,
                            const std::vector<FitMethod>& methods,
                            const OracleConfig& oracle_config) {
    BenchResult result;
    if (methods.empty()) return result;

    RngStream rng(oracle_config.seed, oracle_config.stream);
    const PosteriorSamples samples = gibbs_fit(dataset, prior, thresholds,
                                               oracle_config.iterations,
                                               oracle_config.burn_in, rng);
    const Eigen::Index m = samples.draws.rows();
    const Eigen::VectorXd oracle_mean = samples.draws.colwise().mean();
    Eigen::VectorXd oracle_sd(dataset.p());
    for (Eigen::Index j = 0; j < dataset.p(); ++j) {
        oracle_sd[j] = std::sqrt(
            (samples.draws.col(j).array() - oracle_mean[j]).square().sum() / (m - 1));
    }

    for (FitMethod method : methods) {
        const FittedMoments fit = fit_moments(method, dataset, prior, thresholds);
        MethodError err;
        err.method = method;
        err.mean_abs_error_mean = (fit.mean - oracle_mean).cwiseAbs().mean();
        err.mean_abs_error_sd = (fit.sd - oracle_sd).cwiseAbs().mean();
        err.elapsed_seconds = fit.elapsed;
        result.errors.push_back(err);
    }
    return result;
}

namespace {

GaussianPrior simulation_prior(int p) {
    return {Eigen::VectorXd::Zero(p),
            SpdMatrix(2.0 * Eigen::MatrixXd::Identity(p, p))};
}

// Runs body(r) for r in [0, count) across `jobs` threads. Each replication
// owns its slot, so the schedule cannot affect results.
template <typename Body>
void parallel_replications(int count, int jobs, Body body) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int r = 0; r < count; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int r = next.fetch_add(1); r < count; r = next.fetch_add(1)) body(r);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

CoverageTable coverage_study(const SimConfig& config, const std::vector<int>& levels,
                             const std::vector<FitMethod>& methods, std::uint64_t seed,
                             int jobs) {
    const int reps = config.replications;
    if (reps < 1) throw DomainError("replications must be positive");

    struct RepOutcome {
        bool ok = false;
        // covered[m][l] is a 0/1 vector per coefficient
        std::vector<std::vector<Eigen::VectorXd>> covered;
    };
    std::vector<RepOutcome> outcomes(reps);

    parallel_replications(reps, jobs, [&](int r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        RepOutcome& out = outcomes[r];
        try {
            const GeneratedData gen = gen_dataset(config, rng);
            const GaussianPrior prior = simulation_prior(config.p);
            out.covered.resize(methods.size());
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                EbOptions opt;
                opt.method = methods[mi];
                const EbResult fit = estimate_thresholds(gen.dataset, prior, opt);
                const Eigen::VectorXd sd =
                    fit.posterior.covariance.mat().diagonal().cwiseSqrt();
                out.covered[mi].resize(levels.size());
                for (std::size_t li = 0; li < levels.size(); ++li) {
                    const double q =
                        levels[li] >= 100
                            ? std::numeric_limits<double>::infinity()
                            : norm_quantile(0.5 + 0.5 * levels[li] / 100.0);
                    Eigen::VectorXd hit(config.p);
                    for (int j = 0; j < config.p; ++j) {
                        hit[j] = std::fabs(gen.true_beta[j] - fit.posterior.mean[j]) <=
                                         q * sd[j]
                                     ? 1.0
                                     : 0.0;
                    }
                    out.covered[mi][li] = std::move(hit);
                }
            }
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;  // counted below; the replication is dropped
        }
    });

    CoverageTable table;
    int ok_count = 0;
    for (const auto& o : outcomes) ok_count += o.ok ? 1 : 0;
    table.replications = ok_count;
    table.failed_replications = reps - ok_count;
    if (ok_count == 0) throw DomainError("every coverage replication failed");

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (std::size_t li = 0; li < levels.size(); ++li) {
            CoverageCell cell;
            cell.method = methods[mi];
            cell.level = levels[li];
            cell.coverage_percent = Eigen::VectorXd::Zero(config.p);
            for (const auto& o : outcomes) {
                if (o.ok) cell.coverage_percent += o.covered[mi][li];
            }
            cell.coverage_percent *= 100.0 / ok_count;
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

TimingResult timing_study(const SimConfig& config, const std::vector<FitMethod>& methods,
                          std::uint64_t seed, int jobs) {
    const int reps = config.replications;
    if (reps < 1) throw DomainError("replications must be positive");
    TimingResult result;
    result.elapsed.assign(methods.size(), std::vector<double>(reps, 0.0));

    parallel_replications(reps, jobs, [&](int r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        const GeneratedData gen = gen_dataset(config, rng);
        const GaussianPrior prior = simulation_prior(config.p);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            EbOptions opt;
            opt.method = methods[mi];
            const auto t0 = std::chrono::steady_clock::now();
            const EbResult fit = estimate_thresholds(gen.dataset, prior, opt);
            result.elapsed[mi][r] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            (void)fit;
        }
    });
    result.methods = methods;
    return result;
}

}  // namespace ordprobit
