#include "ordprobit/numkern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ordprobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2Pi = 2.5066282746310005024;   // sqrt(2 pi)
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Threshold between the erfc product and the Laplace continued fraction.
constexpr double kMillsCfCutoff = 4.0;

// Width below which zeta values switch to the midpoint expansion.
constexpr double kNarrowWidth = 1e-6;

double mills_cf(double x) {
    // Laplace continued fraction for the Mills ratio,
    //   R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))),
    // evaluated with the modified Lentz scheme.
    const double tiny = 1e-300;
    double f = tiny;
    double c = f;
    double d = 0.0;
    for (int j = 1; j <= 300; ++j) {
        const double aj = (j == 1) ? 1.0 : static_cast<double>(j - 1);
        d = x + aj * d;
        if (std::fabs(d) < tiny) d = tiny;
        d = 1.0 / d;
        c = x + aj / c;
        if (std::fabs(c) < tiny) c = tiny;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return f;
}

}  // namespace

double norm_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return std::exp(-0.5 * x * x) / kSqrt2Pi;
}

double norm_cdf(double x) {
    if (x == kInf) return 1.0;
    if (x == -kInf) return 0.0;
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_norm_cdf(double x) {
    if (x == kInf) return 0.0;
    if (x == -kInf) return -kInf;
    if (x > -1.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
    // Phi(x) = phi(x) * R(-x) for x < 0.
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio(-x));
}

double mills_ratio(double x) {
    if (x < kMillsCfCutoff) {
        return 0.5 * std::erfc(x * kInvSqrt2) * kSqrt2Pi * std::exp(0.5 * x * x);
    }
    return mills_cf(x);
}

double norm_quantile(double p) {
    // Wichura (1988), algorithm AS241 PPND16.
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile requires p in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e0) *
                      r +
                  3.64784832476320460504e0) *
                     r +
                 5.76949722146069140550e0) *
                    r +
                4.63033784615654529590e0) *
                   r +
               1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e0) *
                    r +
                2.05319162663775882187e0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e0) *
                    r +
                5.46378491116411436990e0) *
                   r +
               6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return q < 0.0 ? -val : val;
}

namespace {

// Phi(b) - Phi(a) for a < 0 < b (or infinite endpoints), as a sum of two
// positive erf terms: no cancellation anywhere in this regime.
double straddle_prob(double a, double b) {
    const double ea = (a == -kInf) ? 1.0 : std::erf(-a * kInvSqrt2);
    const double eb = (b == kInf) ? 1.0 : std::erf(b * kInvSqrt2);
    return 0.5 * (ea + eb);
}

}  // namespace

double log_gauss_prob(double a, double b) {
    if (!(a < b)) throw DomainError("log_gauss_prob requires a < b");
    if (a == -kInf && b == kInf) return 0.0;
    if (b <= 0.0) return log_gauss_prob(-b, -a);
    if (a < 0.0) return std::log(straddle_prob(a, b));
    // Upper tail: Phi(b)-Phi(a) = phi(a) [R(a) - R(b) e^{-(b-a)(b+a)/2}].
    const double ra = mills_ratio(a);
    double den = ra;
    if (b != kInf) den -= mills_ratio(b) * std::exp(-0.5 * (b - a) * (b + a));
    return -0.5 * a * a - kLogSqrt2Pi + std::log(den);
}

ProbRatios gauss_prob_ratios(double a, double b) {
    if (!(a < b)) throw DomainError("gauss_prob_ratios requires a < b");
    if (a == -kInf && b == kInf) return {0.0, 0.0};
    if (b <= 0.0) {
        const ProbRatios r = gauss_prob_ratios(-b, -a);
        return {r.at_upper, r.at_lower};
    }
    if (a < 0.0) {
        const double z = straddle_prob(a, b);
        return {norm_pdf(a) / z, norm_pdf(b) / z};
    }
    const double ra = mills_ratio(a);
    if (b == kInf) return {1.0 / ra, 0.0};
    const double scale = std::exp(-0.5 * (b - a) * (b + a));  // phi(b)/phi(a)
    const double den = ra - mills_ratio(b) * scale;
    return {1.0 / den, scale / den};
}

ZetaValues zeta_values(double a, double b) {
    if (!(a < b)) throw DomainError("zeta functions require a < b");
    if (a == -kInf && b == kInf) return {0.0, 0.0, 1.0};
    if (b <= 0.0) {
        ZetaValues z = zeta_values(-b, -a);
        z.zeta1 = -z.zeta1;
        return z;
    }
    const double tiny = std::numeric_limits<double>::min();
    if (std::isfinite(a) && std::isfinite(b) && b - a < kNarrowWidth) {
        // Midpoint expansion of the near-uniform truncated density.
        const double m = 0.5 * (a + b);
        const double h = b - a;
        const double h2 = h * h;
        const double z1 = -m * (1.0 - h2 / 12.0);
        const double vr = h2 / 12.0 * (1.0 + (m * m - 1.0) * h2 / 30.0 - m * m * h2 / 12.0);
        return {z1, 1.0 - z1 * z1 - vr, vr};
    }
    double z1, z2;
    if (a >= 0.0) {
        const double ca = mills_ratio(a);
        if (b == kInf) {
            z1 = -1.0 / ca;
            z2 = -a / ca;
        } else {
            const double em1 = std::expm1(-0.5 * (b - a) * (b + a));  // phi(b)/phi(a) - 1
            const double den = ca - mills_ratio(b) * (1.0 + em1);
            z1 = em1 / den;
            z2 = ((b - a) * (1.0 + em1) + a * em1) / den;  // (b R - a)/den
        }
    } else {
        const double z = straddle_prob(a, b);
        const double pa = norm_pdf(a);
        const double pb = norm_pdf(b);
        z1 = (pb - pa) / z;
        const double ta = (a == -kInf) ? 0.0 : a * pa;
        const double tb = (b == kInf) ? 0.0 : b * pb;
        z2 = (tb - ta) / z;
    }
    double vr = 1.0 - z1 * z1 - z2;
    vr = std::clamp(vr, tiny, 1.0);
    return {z1, z2, vr};
}

double zeta1(double a, double b) { return zeta_values(a, b).zeta1; }

double zeta2(double a, double b) { return zeta_values(a, b).zeta2; }

TnMoments tn_moments(const Interval& interval, double location, double scale) {
    if (!(scale > 0.0)) throw DomainError("tn_moments requires scale > 0");
    const double u =
        interval.lower == -kInf ? -kInf : (interval.lower - location) / scale;
    const double v = interval.upper == kInf ? kInf : (interval.upper - location) / scale;
    const ZetaValues z = zeta_values(u, v);
    double mean = location - scale * z.zeta1;
    // zeta1 keeps the standardized mean inside (u, v) analytically; enforce
    // against roundoff at extreme standardizations.
    if (mean <= interval.lower || mean >= interval.upper) {
        mean = std::clamp(mean, std::nextafter(interval.lower, kInf),
                          std::nextafter(interval.upper, -kInf));
    }
    return {mean, scale * scale * z.variance_ratio};
}

namespace {

// Standardized draw from TN([lo, up], 0, 1) with 0 <= lo < up and Phi_c(lo)
// representable. Inverse CDF on the complementary scale.
double tn_tail_inverse(double lo, double up, RngStream& rng) {
    const double pl = 0.5 * std::erfc(lo * kInvSqrt2);
    const double pu = up == kInf ? 0.0 : 0.5 * std::erfc(up * kInvSqrt2);
    const double v = pu + (pl - pu) * rng.next_double();
    return -norm_quantile(v);
}

// Accept-reject with shifted-exponential proposal (Robert 1995), rate = lo.
// Used once the complementary CDF is no longer resolvable in doubles
// (lo >~ 37), where the acceptance rate is essentially 1.
double tn_tail_exponential(double lo, double up, RngStream& rng) {
    const double width = up - lo;
    for (;;) {
        double t;
        if (width == kInf) {
            t = -std::log(rng.next_double()) / lo;
        } else {
            // Exponential(lo) truncated to [0, width] by inverse CDF.
            t = -std::log1p(rng.next_double() * std::expm1(-lo * width)) / lo;
        }
        if (rng.next_double() <= std::exp(-0.5 * t * t)) {
            const double x = lo + t;
            if (x < up) return x;
        }
    }
}

double tn_sample_std(double lo, double up, RngStream& rng) {
    if (lo == -kInf && up == kInf) return rng.next_gaussian();
    if (up <= 0.0) return -tn_sample_std(-up, -lo, rng);
    if (lo < 0.0) {
        // Straddling interval: plain inverse CDF, both CDF values are benign.
        const double pa = norm_cdf(lo);
        const double pb = norm_cdf(up);
        const double v = pa + (pb - pa) * rng.next_double();
        return norm_quantile(v);
    }
    if (lo < 37.0) {
        const double x = tn_tail_inverse(lo, up, rng);
        // The complementary difference can collapse for narrow far-tail
        // intervals; fall through to the exact sampler if it did.
        if (x > lo && x < up) return x;
    }
    return tn_tail_exponential(lo, up, rng);
}

}  // namespace

double tn_sample(const Interval& interval, double location, double scale, RngStream& rng) {
    if (!(scale > 0.0)) throw DomainError("tn_sample requires scale > 0");
    const double lo =
        interval.lower == -kInf ? -kInf : (interval.lower - location) / scale;
    const double up = interval.upper == kInf ? kInf : (interval.upper - location) / scale;
    double x = location + scale * tn_sample_std(lo, up, rng);
    if (x <= interval.lower) x = std::nextafter(interval.lower, kInf);
    if (x >= interval.upper) x = std::nextafter(interval.upper, -kInf);
    return x;
}

// ---------------------------------------------------------------------------
// SPD linear algebra
// ---------------------------------------------------------------------------

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw DimensionMismatch("SpdMatrix must be square and non-empty");
    }
    if (!m_.allFinite()) throw NonFiniteInput("SpdMatrix entries must be finite");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw DomainError("SpdMatrix is not symmetric within tolerance");
    }
}

Eigen::LLT<Eigen::MatrixXd> SpdMatrix::llt() const {
    Eigen::LLT<Eigen::MatrixXd> f(m_);
    if (f.info() != Eigen::Success) {
        throw NotPositiveDefinite("Cholesky factorization failed: matrix is not SPD");
    }
    return f;
}

double SpdMatrix::log_det() const {
    return 2.0 * llt().matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd spd_factor_solve(const SpdMatrix& A, const Eigen::MatrixXd& B) {
    if (A.dim() != B.rows()) throw DimensionMismatch("spd_factor_solve: size mismatch");
    return A.llt().solve(B);
}

Eigen::VectorXd spd_factor_solve(const SpdMatrix& A, const Eigen::VectorXd& b) {
    if (A.dim() != b.size()) throw DimensionMismatch("spd_factor_solve: size mismatch");
    return A.llt().solve(b);
}

void rank_one_inverse_update_inplace(Eigen::MatrixXd& Ainv, const Eigen::VectorXd& x, double c) {
    const Eigen::VectorXd v = Ainv * x;
    const double denom = 1.0 + c * x.dot(v);
    if (std::fabs(denom) < 1e-12) {
        throw SingularUpdate("rank-one update denominator vanished");
    }
    Ainv.noalias() -= (c / denom) * (v * v.transpose());
    Ainv = 0.5 * (Ainv + Ainv.transpose()).eval();
}

SpdMatrix rank_one_inverse_update(const SpdMatrix& Ainv, const Eigen::VectorXd& x, double c) {
    if (Ainv.dim() != x.size()) throw DimensionMismatch("rank_one_inverse_update: size mismatch");
    Eigen::MatrixXd m = Ainv.mat();
    rank_one_inverse_update_inplace(m, x, c);
    return SpdMatrix(std::move(m));
}

}  // namespace ordprobit
