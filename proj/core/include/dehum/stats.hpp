#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dehum {

enum class TestMethod { exact, normal_approx };

struct PairedTestResult {
    double statistic = 0; // min(W+, W-) over nonzero differences
    double p_value = 1;   // two-sided
    int n = 0;            // pairs remaining after dropping zero differences
    TestMethod method = TestMethod::exact;
};

// Wilcoxon signed-rank test for paired samples. Ties in |difference| get
// average ranks. Exact two-sided p for n <= 25 by enumerating the 2^n sign
// assignments with a count table; normal approximation with continuity and
// tie corrections above that. Requires at least 5 pairs and at least one
// nonzero difference.
PairedTestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

struct TrendResult {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    double p_value = 1; // two-sided, t distribution with n-2 df
    int n = 0;
};

// Ordinary least squares of value on year. An exact fit with nonzero slope
// reports p = 0 (rendered as "<1e-15" downstream); constant values report
// slope 0 and p = 1. All-identical years are an error.
TrendResult linear_trend(std::span<const int> years, std::span<const double> values);

// Locally weighted scatterplot smoothing with tricube weights and bisquare
// robustness iterations, evaluated at the input points. Input must be sorted
// by x; returns fitted values in the same order. frac in (0, 1], iterations
// >= 0. Behavior matches the classic Cleveland formulation.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y,
                           double frac = 0.3, int iterations = 3);

enum class CiMethod { bootstrap_percentile, t_interval };

struct MeanCi {
    double mean = 0;
    double low = 0;
    double high = 0;
};

// Mean with a two-sided confidence interval. The default is a seeded
// percentile bootstrap of the mean (resampling with replacement); the
// t-interval variant uses Student's t with n-1 df. Constant input yields a
// zero-width interval either way.
MeanCi mean_ci(std::span<const double> values, double level = 0.95,
               CiMethod method = CiMethod::bootstrap_percentile, int resamples = 2000,
               std::uint64_t seed = 0);

double normal_cdf(double z);
// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
// Upper-tail critical value: P(T <= result) = p, for p in (0.5, 1).
double student_t_quantile(double p, double df);

} // namespace dehum
