#pragma once

// Estimators that turn ensembles into pass/fail numbers.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace lrex {

/// Count, mean and centred second moment; merged with Chan's update.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    Moments& merge(const Moments& o) {
        if (o.count == 0) return *this;
        if (count == 0) return *this = o;
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double n = na + nb;
        const double d = o.mean - mean;
        mean += d * nb / n;
        m2 += o.m2 + d * d * na * nb / n;
        count += o.count;
        return *this;
    }

    /// Unbiased sample variance.
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double sem() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

inline Moments moments_of(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.add(x);
    return m;
}

struct ObservableSummary {
    Moments moments;
    double batch_stderr = 0.0;
    std::vector<double> autocov;
};

/// Per-observable summaries; merge is a commutative monoid with the empty
/// summary as identity (exact for counts and means).
struct EnsembleSummary {
    std::map<std::string, ObservableSummary> observables;

    void add(const std::string& name, double x) { observables[name].moments.add(x); }

    EnsembleSummary& merge(const EnsembleSummary& o) {
        for (const auto& [k, v] : o.observables) {
            auto& mine = observables[k];
            const double na = static_cast<double>(mine.moments.count), nb = static_cast<double>(v.moments.count);
            mine.moments.merge(v.moments);
            // pooled standard errors add in quadrature with weights n_i / n
            const double n = na + nb;
            if (n > 0.0)
                mine.batch_stderr = std::sqrt(std::pow(na / n * mine.batch_stderr, 2) +
                                              std::pow(nb / n * v.batch_stderr, 2));
        }
        return *this;
    }
};

inline double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

struct Interval {
    double mean = 0.0;
    double halfwidth = 0.0;
    double std_error = 0.0;
    std::size_t batches = 0;

    bool covers(double v) const { return std::abs(v - mean) <= halfwidth; }
};

inline constexpr std::size_t kDefaultBatches = 32;

/// Batch-means interval with Student-t critical value on (batches - 1) dof.
inline Interval mean_ci(const std::vector<double>& xs, double level = 0.99, std::size_t batches = kDefaultBatches) {
    if (xs.size() < 30) throw std::invalid_argument("mean_ci: need at least 30 samples, got " + std::to_string(xs.size()));
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("mean_ci: level must lie in (0, 1)");
    const std::size_t N = xs.size();
    const std::size_t B = std::clamp<std::size_t>(batches, 2, N);
    Moments batch;
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t lo = b * N / B, hi = (b + 1) * N / B;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += xs[i];
        total += s;
        batch.add(s / static_cast<double>(hi - lo));
    }
    Interval r;
    r.mean = total / static_cast<double>(N);
    r.batches = B;
    r.std_error = std::sqrt(batch.variance() / static_cast<double>(B));
    r.halfwidth = r.std_error == 0.0 ? 0.0 : student_t_quantile(0.5 + 0.5 * level, static_cast<double>(B - 1)) * r.std_error;
    return r;
}

/// Biased empirical autocovariance (divide by N) for lags 0..max_lag.
inline std::vector<double> autocov(const std::vector<double>& xs, std::size_t max_lag) {
    const std::size_t N = xs.size();
    if (N == 0) return {};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(N);
    std::vector<double> out(std::min(max_lag + 1, N), 0.0);
    for (std::size_t h = 0; h < out.size(); ++h) {
        double s = 0.0;
        for (std::size_t i = 0; i + h < N; ++i) s += (xs[i] - mean) * (xs[i + h] - mean);
        out[h] = s / static_cast<double>(N);
    }
    return out;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;  // jackknife
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {

inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("scaling_slope: scales must not all coincide");
    const double b = sxy / sxx;
    return {b, my - b * mx};
}

}  // namespace detail

/// Least-squares slope of log(value) against log(scale) with a jackknife
/// interval at the given level.
inline SlopeFit scaling_slope(const std::vector<std::pair<double, double>>& pts, double level = 0.99) {
    if (pts.size() < 3) throw std::invalid_argument("scaling_slope: need at least 3 scales");
    std::vector<double> x, y;
    for (const auto& [s, v] : pts) {
        if (!(s > 0.0) || !(v > 0.0)) throw std::invalid_argument("scaling_slope: scales and values must be positive");
        x.push_back(std::log(s));
        y.push_back(std::log(v));
    }
    SlopeFit f;
    std::tie(f.slope, f.intercept) = detail::ols(x, y);
    const std::size_t m = x.size();
    std::vector<double> loo(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> xi, yi;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) {
                xi.push_back(x[j]);
                yi.push_back(y[j]);
            }
        loo[i] = detail::ols(xi, yi).first;
        mean += loo[i];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    f.std_error = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m) * ss);
    const double q = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(m - 1));
    f.lo = f.slope - q * f.std_error;
    f.hi = f.slope + q * f.std_error;
    return f;
}

struct NormalityStats {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double skew_z = 0.0;
    double kurt_z = 0.0;
};

/// Sample skewness and excess kurtosis standardized by their large-sample
/// null standard deviations sqrt(6/N) and sqrt(24/N).
inline NormalityStats normality_check(const std::vector<double>& xs) {
    const std::size_t N = xs.size();
    if (N < 1000) throw std::invalid_argument("normality_check: need at least 1000 samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(N);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(N);
    m3 /= static_cast<double>(N);
    m4 /= static_cast<double>(N);
    NormalityStats s;
    if (m2 == 0.0) throw std::invalid_argument("normality_check: samples are constant");
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    s.skew_z = s.skewness / std::sqrt(6.0 / static_cast<double>(N));
    s.kurt_z = s.excess_kurtosis / std::sqrt(24.0 / static_cast<double>(N));
    return s;
}

}  // namespace lrex
