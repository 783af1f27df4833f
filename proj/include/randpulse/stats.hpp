// randpulse: shared statistics — incomplete gamma, KS, chi-square, normal.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace randpulse::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Regularized lower incomplete gamma P(a,x), series + continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series representation
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q, Lentz's method
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

/// Survival function of the chi-square distribution with k dof.
inline double chi2_sf(double x, double k) { return gamma_q(k / 2.0, x / 2.0); }

/// Kolmogorov distribution survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic;
    double p_value;
    std::size_t n;
};

/// Two-sided one-sample KS test against a model CDF. Asymptotic p-value.
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.size() < 2) throw std::invalid_argument("ks_test: too few samples");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - double(i) / n));
        d = std::max(d, std::fabs(double(i + 1) / n - f));
    }
    double sq = std::sqrt(n);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_sf(lambda), samples.size()};
}

struct Chi2Result {
    double statistic;
    double p_value;
    std::size_t dof;
};

/// Pearson chi-square of observed counts against expected counts.
inline Chi2Result chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                           std::size_t constraints = 1) {
    if (observed.size() != expected.size() || observed.size() <= constraints)
        throw std::invalid_argument("chi2_gof: bad bin counts");
    double x = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw std::invalid_argument("chi2_gof: nonpositive expectation");
        double d = observed[i] - expected[i];
        x += d * d / expected[i];
    }
    std::size_t dof = observed.size() - constraints;
    return {x, chi2_sf(x, double(dof)), dof};
}

inline double exponential_cdf(double t, double f) { return t <= 0.0 ? 0.0 : -std::expm1(-f * t); }

/// Erlang(f, n) CDF: regularized lower incomplete gamma at integer shape.
inline double erlang_cdf(double t, double f, unsigned n) {
    if (n == 0) throw std::invalid_argument("erlang_cdf: n >= 1");
    if (t <= 0.0) return 0.0;
    double x = f * t, term = 1.0, sum = 1.0;
    for (unsigned i = 1; i < n; ++i) {
        term *= x / double(i);
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

inline double variance(const std::vector<double>& v) {
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.size() > 1 ? s / double(v.size() - 1) : 0.0;
}

/// Sample autocorrelation of a ±1 / arbitrary series at the given lag.
inline double autocorrelation(const std::vector<double>& v, std::size_t lag) {
    if (v.size() <= lag + 1) throw std::invalid_argument("autocorrelation: series too short");
    double m = mean(v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - m) * (v[i] - m);
        if (i + lag < v.size()) num += (v[i] - m) * (v[i + lag] - m);
    }
    return den == 0.0 ? 0.0 : num / den;
}

/// Jarque-Bera normality statistic; p-value from chi2(2).
inline Chi2Result jarque_bera(const std::vector<double>& v) {
    if (v.size() < 8) throw std::invalid_argument("jarque_bera: too few samples");
    double m = mean(v), s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double x : v) {
        double d = x - m;
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
    }
    double n = double(v.size());
    s2 /= n; s3 /= n; s4 /= n;
    double skew = s3 / std::pow(s2, 1.5);
    double kurt = s4 / (s2 * s2) - 3.0;
    double jb = n / 6.0 * (skew * skew + kurt * kurt / 4.0);
    return {jb, chi2_sf(jb, 2.0), 2};
}

} // namespace randpulse::stats
