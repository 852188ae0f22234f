#pragma once

#include <Eigen/Dense>

#include "ordprobit/errors.hpp"
#include "ordprobit/rng.hpp"

namespace ordprobit {

// ---------------------------------------------------------------------------
// Scalar Gaussian kernels
// ---------------------------------------------------------------------------

double norm_pdf(double x);

// Standard Gaussian CDF. Total on the extended reals: -inf -> 0, +inf -> 1.
double norm_cdf(double x);

// log Phi(x), accurate far into the lower tail (x ~ -300 still finite).
double log_norm_cdf(double x);

// Inverse standard Gaussian CDF (Wichura's AS241, ~1e-15 relative).
// p must lie in (0, 1).
double norm_quantile(double p);

// Mills ratio [1 - Phi(x)] / phi(x) for x >= 0. Uses erfc below 4 and the
// Laplace continued fraction above, so it never under- or overflows.
double mills_ratio(double x);

// log[Phi(b) - Phi(a)] for a < b, stable when both endpoints sit in the same
// tail (the difference is evaluated in scaled-complementary form there).
double log_gauss_prob(double a, double b);

// phi(a)/[Phi(b)-Phi(a)] and phi(b)/[Phi(b)-Phi(a)] with the same regime
// handling as log_gauss_prob. Infinite endpoints contribute a zero ratio.
struct ProbRatios {
    double at_lower;
    double at_upper;
};
ProbRatios gauss_prob_ratios(double a, double b);

// zeta1 = [phi(b)-phi(a)]/[Phi(b)-Phi(a)],
// zeta2 = [b phi(b)-a phi(a)]/[Phi(b)-Phi(a)] (x phi(x) -> 0 at +-inf),
// variance_ratio = 1 - zeta1^2 - zeta2, clamped to (0, 1]: it is the variance
// of a unit-scale truncated normal, positive for every a < b.
struct ZetaValues {
    double zeta1;
    double zeta2;
    double variance_ratio;
};
ZetaValues zeta_values(double a, double b);

double zeta1(double a, double b);
double zeta2(double a, double b);

// ---------------------------------------------------------------------------
// Truncation intervals and truncated-normal kernels
// ---------------------------------------------------------------------------

// Extended-real interval with lower < upper strictly.
struct Interval {
    double lower;
    double upper;

    Interval(double lo, double up) : lower(lo), upper(up) {
        if (!(lo < up)) throw DomainError("Interval requires lower < upper");
    }
};

struct TnMoments {
    double mean;
    double variance;
};

// Mean and variance of a normal(location, scale^2) truncated to the interval.
TnMoments tn_moments(const Interval& interval, double location, double scale);

// Exact draw from the truncated normal. Inverse-CDF in the body and a
// tail-parameterized inverse-CDF in either tail; an exponential-proposal
// accept-reject covers intervals beyond the reach of double-precision CDFs,
// so draws stay O(1) arbitrarily far out.
double tn_sample(const Interval& interval, double location, double scale, RngStream& rng);

// ---------------------------------------------------------------------------
// SPD linear algebra
// ---------------------------------------------------------------------------

// Dense symmetric positive-definite matrix. Symmetry is checked at
// construction (1e-12 relative); positive definiteness is enforced whenever a
// factorization is requested. Immutable, freely shareable across threads.
class SpdMatrix {
  public:
    SpdMatrix() : m_(Eigen::MatrixXd::Identity(1, 1)) {}
    explicit SpdMatrix(Eigen::MatrixXd m);

    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXd& mat() const { return m_; }

    // Fresh Cholesky factorization; throws NotPositiveDefinite on failure.
    Eigen::LLT<Eigen::MatrixXd> llt() const;

    double log_det() const;

  private:
    Eigen::MatrixXd m_;
};

// A^{-1} B through the Cholesky factorization of A.
Eigen::MatrixXd spd_factor_solve(const SpdMatrix& A, const Eigen::MatrixXd& B);
Eigen::VectorXd spd_factor_solve(const SpdMatrix& A, const Eigen::VectorXd& b);

// Sherman-Morrison: given Ainv = A^{-1}, returns (A + c x x')^{-1},
// re-symmetrized. Throws SingularUpdate when |1 + c x' Ainv x| < 1e-12.
SpdMatrix rank_one_inverse_update(const SpdMatrix& Ainv, const Eigen::VectorXd& x, double c);

// Same update on a raw matrix, for hot loops that manage their own state.
void rank_one_inverse_update_inplace(Eigen::MatrixXd& Ainv, const Eigen::VectorXd& x, double c);

}  // namespace ordprobit
