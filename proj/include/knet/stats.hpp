#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace knet::stats {

/// Outcome of a hypothesis test. `p` is two-sided.
struct TestResult {
  double statistic = 0.0;
  double p = 1.0;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::string method;
};

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  std::size_t n = 0;
};

/// Five-number style summary used for the lead-lag violins.
struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lower_fence = 0.0;  // q1 - 1.5 IQR
  double upper_fence = 0.0;  // q3 + 1.5 IQR
  std::size_t outliers = 0;
};

double mean(std::span<const double> x);
/// Unbiased (n - 1) variance.
double variance(std::span<const double> x);
/// Population (n) standard deviation.
double population_sd(std::span<const double> x);

/// Linear-interpolation quantile of an ascending sample, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);
Summary summarize(std::span<const double> x);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Regularized upper incomplete gamma Q(a, x).
double incomplete_gamma_q(double a, double x);

/// Two-sided tail P(|T| >= |t|) of Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);
/// Survival function of the asymptotic Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);
/// Survival function of chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

/// Two-sample Kolmogorov-Smirnov. D is the sup distance between the two
/// ECDFs over the pooled support; p uses the asymptotic distribution with
/// effective size n_x n_y / (n_x + n_y). Throws on an empty sample.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; p from the t transform. Throws when n < 3 or either
/// sample is constant.
TestResult pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided one-sample t-test of mean == mu0. Throws when n < 2 or the
/// sample has zero variance.
TestResult t_test_one_sample(std::span<const double> x, double mu0 = 0.0);

/// Ordinary least squares y ~ slope x + intercept. Throws on constant x.
Regression linear_regression(std::span<const double> x, std::span<const double> y);

/// Empirical CDF of a sample.
class Ecdf {
 public:
  explicit Ecdf(std::span<const double> sample);
  /// Fraction of the sample <= v.
  double operator()(double v) const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Pooled support of two samples (sorted, unique) with ECDF(a) - ECDF(b) at
/// each point.
struct CdfDifference {
  std::vector<double> support;
  std::vector<double> difference;
};
CdfDifference cdf_difference(std::span<const double> a, std::span<const double> b);

}  // namespace knet::stats
