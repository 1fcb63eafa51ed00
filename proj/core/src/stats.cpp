#include "dehum/stats.hpp"

#include "dehum/error.hpp"
#include "dehum/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dehum {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    const int max_iterations = 300;
    const double eps = 3e-16;
    const double fpmin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log1p(-x);
    double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0) throw Error("student_t_cdf: df must be positive");
    if (t == 0.0) return 0.5;
    double x = df / (df + t * t);
    double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t > 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
    if (p <= 0.5 || p >= 1.0) throw Error("student_t_quantile: p must be in (0.5, 1)");
    double lo = 0.0;
    double hi = 2.0;
    while (student_t_cdf(hi, df) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

PairedTestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("wilcoxon: paired samples differ in length");
    if (x.size() < 5) throw Error("wilcoxon: need at least 5 pairs");

    std::vector<double> diffs;
    diffs.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const int n = static_cast<int>(diffs.size());
    if (n == 0) throw Error("wilcoxon: all differences are zero");

    // Average ranks of |d|, plus tie bookkeeping for the variance correction.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(diffs[a]) < std::fabs(diffs[b]);
    });
    std::vector<double> ranks(n, 0.0);
    double tie_sum = 0.0;
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && std::fabs(diffs[order[j]]) == std::fabs(diffs[order[i]])) ++j;
        double avg_rank = (i + 1 + j) / 2.0;
        for (int k = i; k < j; ++k) ranks[order[k]] = avg_rank;
        double t = j - i;
        tie_sum += t * t * t - t;
        i = j;
    }

    double w_plus = 0.0;
    for (int i = 0; i < n; ++i)
        if (diffs[i] > 0) w_plus += ranks[i];
    const double total = n * (n + 1) / 2.0;
    const double w_minus = total - w_plus;
    const double statistic = std::min(w_plus, w_minus);

    PairedTestResult result;
    result.statistic = statistic;
    result.n = n;

    if (n <= 25) {
        result.method = TestMethod::exact;
        // Distribution of 2*W+ over all sign assignments; doubling keeps
        // half-integer average ranks exact.
        std::vector<long long> ranks2(n);
        long long sum2 = 0;
        for (int i = 0; i < n; ++i) {
            ranks2[i] = std::llround(2.0 * ranks[i]);
            sum2 += ranks2[i];
        }
        std::vector<double> counts(static_cast<std::size_t>(sum2) + 1, 0.0);
        counts[0] = 1.0;
        long long reached = 0;
        for (int i = 0; i < n; ++i) {
            long long r = ranks2[i];
            for (long long s = reached; s >= 0; --s) {
                if (counts[s] != 0.0) counts[s + r] += counts[s];
            }
            reached += r;
        }
        long long w2 = std::llround(2.0 * statistic);
        double lo_sum = 0.0;
        for (long long s = 0; s <= w2; ++s) lo_sum += counts[s];
        double hi_sum = 0.0;
        for (long long s = sum2 - w2; s <= sum2; ++s) hi_sum += counts[s];
        double p = (lo_sum + hi_sum) / std::ldexp(1.0, n);
        result.p_value = std::min(1.0, p);
    } else {
        result.method = TestMethod::normal_approx;
        double mu = n * (n + 1) / 4.0;
        double var = n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_sum / 48.0;
        double sigma = std::sqrt(var);
        double z = (statistic - mu + 0.5) / sigma;
        double p = 2.0 * normal_cdf(z);
        result.p_value = std::clamp(p, 0.0, 1.0);
    }
    return result;
}

TrendResult linear_trend(std::span<const int> years, std::span<const double> values) {
    if (years.size() != values.size()) throw Error("linear_trend: length mismatch");
    const int n = static_cast<int>(years.size());
    if (n < 3) throw Error("linear_trend: need at least 3 points");

    double x_mean = 0.0;
    double y_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        x_mean += years[i];
        y_mean += values[i];
    }
    x_mean /= n;
    y_mean /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (int i = 0; i < n; ++i) {
        double dx = years[i] - x_mean;
        double dy = values[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw Error("linear_trend: all years identical");

    TrendResult result;
    result.n = n;
    result.slope = sxy / sxx;
    result.intercept = y_mean - result.slope * x_mean;

    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        double fitted = result.intercept + result.slope * years[i];
        double r = values[i] - fitted;
        ss_res += r * r;
    }

    if (syy == 0.0) {
        // constant series: zero slope, nothing to test
        result.slope = 0.0;
        result.intercept = y_mean;
        result.slope_se = 0.0;
        result.p_value = 1.0;
        return result;
    }
    if (ss_res <= 1e-20 * syy) {
        // numerically exact fit
        result.slope_se = 0.0;
        result.p_value = result.slope == 0.0 ? 1.0 : 0.0;
        return result;
    }

    double s2 = ss_res / (n - 2);
    result.slope_se = std::sqrt(s2 / sxx);
    double t = result.slope / result.slope_se;
    result.p_value = 2.0 * (1.0 - student_t_cdf(std::fabs(t), n - 2));
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    return result;
}

namespace {

double tricube(double u) {
    double a = 1.0 - u * u * u;
    return a * a * a;
}

// Weighted linear fit at x[i] over the window [left, right), following the
// classic formulation: normalize weights, then project.
double lowess_fit_point(std::span<const double> x, std::span<const double> y,
                        std::span<const double> robustness, int i, int left, int right) {
    double xi = x[i];
    double radius = std::max(xi - x[left], x[right - 1] - xi);

    thread_local std::vector<double> weights;
    weights.assign(right - left, 0.0);

    double total = 0.0;
    for (int j = left; j < right; ++j) {
        double dist = std::fabs(x[j] - xi);
        double w = 0.0;
        if (radius > 0.0) {
            double u = dist / radius;
            if (u < 1.0) w = tricube(u);
        } else {
            w = 1.0;
        }
        w *= robustness[j];
        weights[j - left] = w;
        total += w;
    }
    if (total <= 0.0) {
        // every neighbor discarded by robustness: fall back to the raw value
        return y[i];
    }
    for (auto& w : weights) w /= total;

    double x_bar = 0.0;
    for (int j = left; j < right; ++j) x_bar += weights[j - left] * x[j];
    double var = 0.0;
    for (int j = left; j < right; ++j) {
        double dx = x[j] - x_bar;
        var += weights[j - left] * dx * dx;
    }

    double fit = 0.0;
    for (int j = left; j < right; ++j) fit += weights[j - left] * y[j];
    if (var > 1e-12 * radius * radius) {
        double beta = 0.0;
        for (int j = left; j < right; ++j)
            beta += weights[j - left] * (x[j] - x_bar) * y[j];
        fit += (xi - x_bar) * beta / var;
    }
    return fit;
}

} // namespace

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double frac,
                           int iterations) {
    if (x.size() != y.size()) throw Error("lowess: length mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2) throw Error("lowess: need at least 2 points");
    if (frac <= 0.0 || frac > 1.0) throw Error("lowess: frac must be in (0, 1]");
    if (iterations < 0) throw Error("lowess: iterations must be >= 0");

    // Sort by (x, y) so permutations of the input cannot change the result.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }

    int k = static_cast<int>(frac * n);
    k = std::clamp(k, 2, n);

    std::vector<double> robustness(n, 1.0);
    std::vector<double> fitted(n, 0.0);

    for (int iter = 0; iter <= iterations; ++iter) {
        int left = 0;
        int right = k;
        for (int i = 0; i < n; ++i) {
            // advance the k-point window while the next point is closer
            while (right < n && xs[i] > 0.5 * (xs[left] + xs[right])) {
                ++left;
                ++right;
            }
            fitted[i] = lowess_fit_point(xs, ys, robustness, i, left, right);
        }
        if (iter == iterations) break;

        // bisquare robustness weights from the residuals
        std::vector<double> abs_resid(n);
        for (int i = 0; i < n; ++i) abs_resid[i] = std::fabs(ys[i] - fitted[i]);
        std::vector<double> sorted_resid = abs_resid;
        std::sort(sorted_resid.begin(), sorted_resid.end());
        double median;
        if (n % 2 == 1) median = sorted_resid[n / 2];
        else median = 0.5 * (sorted_resid[n / 2 - 1] + sorted_resid[n / 2]);

        double cutoff = 6.0 * median;
        if (cutoff <= 0.0) {
            // perfect fit: nothing left to robustify
            break;
        }
        for (int i = 0; i < n; ++i) {
            double u = abs_resid[i] / cutoff;
            if (u >= 1.0) {
                robustness[i] = 0.0;
            } else {
                double a = 1.0 - u * u;
                robustness[i] = a * a;
            }
        }
    }

    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[order[i]] = fitted[i];
    return out;
}

MeanCi mean_ci(std::span<const double> values, double level, CiMethod method, int resamples,
               std::uint64_t seed) {
    const int n = static_cast<int>(values.size());
    if (n == 0) throw Error("mean_ci: empty sample");
    if (level <= 0.0 || level >= 1.0) throw Error("mean_ci: level must be in (0, 1)");

    MeanCi result;
    double sum = 0.0;
    for (double v : values) sum += v;
    result.mean = sum / n;

    if (n == 1) {
        result.low = result.high = result.mean;
        return result;
    }

    if (method == CiMethod::t_interval) {
        double ss = 0.0;
        for (double v : values) {
            double d = v - result.mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / (n - 1));
        if (sd == 0.0) {
            result.low = result.high = result.mean;
            return result;
        }
        double crit = student_t_quantile(1.0 - (1.0 - level) / 2.0, n - 1);
        double half = crit * sd / std::sqrt(static_cast<double>(n));
        result.low = result.mean - half;
        result.high = result.mean + half;
        return result;
    }

    if (resamples < 2) throw Error("mean_ci: need at least 2 bootstrap resamples");
    SplitMix64 rng(seed);
    std::vector<double> means(resamples);
    for (int b = 0; b < resamples; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += values[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(n)))];
        means[b] = s / n;
    }
    std::sort(means.begin(), means.end());

    auto quantile = [&](double q) {
        double pos = q * (resamples - 1);
        auto lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= means.size()) return means.back();
        double fracpart = pos - static_cast<double>(lo);
        return means[lo] * (1.0 - fracpart) + means[lo + 1] * fracpart;
    };
    double alpha = 1.0 - level;
    result.low = quantile(alpha / 2.0);
    result.high = quantile(1.0 - alpha / 2.0);
    return result;
}

} // namespace dehum
