#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hypfpp/errors.hpp"
#include "hypfpp/hashing.hpp"

namespace hypfpp {

// ---------------------------------------------------------------------------
// Normal distribution helpers.
// ---------------------------------------------------------------------------

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Rational initial guess (Acklam) polished by two Newton steps against the
// erfc-based cdf, giving close to full double precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile needs p in (0, 1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    double x;
    if (p < 0.02425) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 0.97575) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    for (int i = 0; i < 2; ++i) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x -= u / (1 + x * u / 2); // Halley step
    }
    return x;
}

// ---------------------------------------------------------------------------
// Sample summaries.
// ---------------------------------------------------------------------------

struct SummaryStats {
    size_t n = 0;
    double mean = 0;
    double variance = 0; // unbiased
    double se = 0;       // standard error of the mean
    double min = 0;
    double max = 0;
};

inline double sample_mean(const std::vector<double>& xs) {
    if (xs.empty()) throw DomainError("mean of an empty sample");
    double s = 0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw DomainError("variance needs at least two observations");
    double m = sample_mean(xs), s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / double(xs.size() - 1);
}

inline SummaryStats summarize(const std::vector<double>& xs) {
    SummaryStats s;
    s.n = xs.size();
    if (xs.empty()) throw DomainError("summary of an empty sample");
    s.mean = sample_mean(xs);
    s.variance = xs.size() >= 2 ? sample_variance(xs) : 0.0;
    s.se = xs.size() >= 2 ? std::sqrt(s.variance / double(xs.size())) : 0.0;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    return s;
}

inline double sample_skewness(const std::vector<double>& xs) {
    if (xs.size() < 3) throw DomainError("skewness needs at least three observations");
    double m = sample_mean(xs), m2 = 0, m3 = 0;
    for (double x : xs) {
        double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= double(xs.size());
    m3 /= double(xs.size());
    return m3 / std::pow(m2, 1.5);
}

inline double sample_excess_kurtosis(const std::vector<double>& xs) {
    if (xs.size() < 4) throw DomainError("kurtosis needs at least four observations");
    double m = sample_mean(xs), m2 = 0, m4 = 0;
    for (double x : xs) {
        double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(xs.size());
    m4 /= double(xs.size());
    return m4 / (m2 * m2) - 3.0;
}

inline double empirical_quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw DomainError("quantile of an empty sample");
    if (q < 0 || q > 1) throw DomainError("quantile level outside [0, 1]");
    std::sort(xs.begin(), xs.end());
    double h = (double(xs.size()) - 1) * q;
    size_t lo = size_t(std::floor(h));
    size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - double(lo)) * (xs[hi] - xs[lo]);
}

// ---------------------------------------------------------------------------
// Bootstrap confidence interval for the mean (percentile method).
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0;
    double hi = 0;
};

// Percentile bootstrap for an arbitrary statistic of the sample.
template <typename Statistic>
Interval bootstrap_ci(const std::vector<double>& xs, size_t resamples, double level, uint64_t seed,
                      Statistic&& stat) {
    if (xs.size() < 2) throw DomainError("bootstrap needs at least two observations");
    if (level <= 0 || level >= 1) throw DomainError("confidence level outside (0, 1)");
    SplitMix64 rng(seed);
    std::vector<double> values;
    values.reserve(resamples);
    std::vector<double> resample(xs.size());
    for (size_t b = 0; b < resamples; ++b) {
        for (size_t i = 0; i < xs.size(); ++i) resample[i] = xs[rng.next() % xs.size()];
        values.push_back(stat(resample));
    }
    double alpha = 1 - level;
    return {empirical_quantile(values, alpha / 2), empirical_quantile(values, 1 - alpha / 2)};
}

inline Interval bootstrap_mean_ci(const std::vector<double>& xs, size_t resamples, double level,
                                  uint64_t seed) {
    return bootstrap_ci(xs, resamples, level, seed,
                        [](const std::vector<double>& v) { return sample_mean(v); });
}

inline Interval bootstrap_variance_ci(const std::vector<double>& xs, size_t resamples, double level,
                                      uint64_t seed) {
    return bootstrap_ci(xs, resamples, level, seed,
                        [](const std::vector<double>& v) { return sample_variance(v); });
}

// ---------------------------------------------------------------------------
// Goodness-of-fit statistics.
// ---------------------------------------------------------------------------

// Two-sided Kolmogorov-Smirnov distance between a sample and a cdf.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) throw DomainError("KS distance of an empty sample");
    std::sort(xs.begin(), xs.end());
    double n = double(xs.size()), d = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, double(i + 1) / n - f);
        d = std::max(d, f - double(i) / n);
    }
    return d;
}

// Anderson-Darling statistic against the normal family with both parameters
// estimated from the sample, including the finite-sample modification.
struct AndersonDarling {
    double a2 = 0;
    double a2_modified = 0;
};

inline AndersonDarling anderson_darling_normal(std::vector<double> xs) {
    size_t n = xs.size();
    if (n < 8) throw DomainError("the normality statistic needs at least eight observations");
    double m = sample_mean(xs), sd = std::sqrt(sample_variance(xs));
    if (sd <= 0) throw DomainError("the normality statistic needs a nondegenerate sample");
    std::sort(xs.begin(), xs.end());
    double a2 = -double(n);
    for (size_t i = 0; i < n; ++i) {
        double zi = normal_cdf((xs[i] - m) / sd);
        double zj = normal_cdf((xs[n - 1 - i] - m) / sd);
        zi = std::min(std::max(zi, 1e-300), 1 - 1e-16);
        zj = std::min(std::max(zj, 1e-300), 1 - 1e-16);
        a2 -= (2.0 * double(i + 1) - 1.0) / double(n) * (std::log(zi) + std::log1p(-zj));
    }
    AndersonDarling out;
    out.a2 = a2;
    out.a2_modified = a2 * (1.0 + 0.75 / double(n) + 2.25 / double(n * n));
    return out;
}

// ---------------------------------------------------------------------------
// Least squares fits.
// ---------------------------------------------------------------------------

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DomainError("linear fit needs two equal-length samples of size >= 2");
    double mx = sample_mean(xs), my = sample_mean(ys), sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0) throw DomainError("linear fit with constant abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

inline double through_origin_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw DomainError("through-origin fit needs two equal-length nonempty samples");
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
    }
    if (sxx <= 0) throw DomainError("through-origin fit with all-zero abscissae");
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature with optional interior knots for integrands
// with kinks (piecewise-smooth densities).
// ---------------------------------------------------------------------------

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, int depth) {
    double lm = (a + m) / 2, rm = (m + b) / 2;
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0) return left + right;
    if (std::abs(left + right - whole) <= 15 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1);
}

} // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                        const std::vector<double>& knots = {}) {
    if (!(a < b)) return 0.0;
    std::vector<double> pts{a, b};
    for (double k : knots)
        if (k > a && k < b) pts.push_back(k);
    std::sort(pts.begin(), pts.end());
    double total = 0;
    double piece_tol = tol / double(pts.size() - 1);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double lo = pts[i], hi = pts[i + 1];
        if (hi - lo <= 0) continue;
        double m = (lo + hi) / 2;
        double flo = f(lo), fhi = f(hi), fm = f(m);
        double whole = detail::simpson(lo, flo, hi, fhi, fm);
        total += detail::adaptive_simpson_rec(f, lo, flo, hi, fhi, m, fm, whole, piece_tol, 40);
    }
    return total;
}

} // namespace hypfpp
