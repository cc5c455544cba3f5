#include "knet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "knet/error.hpp"

namespace knet::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Continued fraction of the incomplete beta, modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw Error("incomplete gamma series did not converge");
}

double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw Error("incomplete gamma continued fraction did not converge");
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double population_sd(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  s.mean = mean(x);
  s.sd = std::sqrt(variance(x));
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * iqr;
  s.upper_fence = s.q3 + 1.5 * iqr;
  s.outliers = static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(), [&](double v) {
    return v < s.lower_fence || v > s.upper_fence;
  }));
  return s;
}

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw RangeError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                        b * std::log1p(-x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_continued_fraction(a, b, x) / a;
  return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_gamma_q(double a, double x) {
  if (a <= 0.0) throw RangeError("incomplete gamma needs a > 0");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double student_t_two_sided(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  return clamp01(incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t)));
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form; converges fast for small lambda.
    const double k = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double odd = 2.0 * j - 1.0;
      const double term = std::exp(odd * odd * k);
      sum += term;
      if (term < 1e-20) break;
    }
    return clamp01(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-20) break;
  }
  return clamp01(2.0 * sum);
}

double chi_square_sf(double x, double dof) { return clamp01(incomplete_gamma_q(0.5 * dof, 0.5 * x)); }

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error("ks_two_sample: empty sample");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  TestResult r;
  r.statistic = d;
  r.p = kolmogorov_sf(std::sqrt(ne) * d);
  r.n_x = a.size();
  r.n_y = b.size();
  r.method = "ks_two_sample";
  return r;
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: samples differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error("pearson: need at least 3 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("undefined correlation: constant sample");
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  TestResult out;
  out.statistic = r;
  out.n_x = out.n_y = n;
  out.method = "pearson";
  const double dof = static_cast<double>(n - 2);
  if (std::abs(r) >= 1.0) {
    out.p = 0.0;
  } else {
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    out.p = student_t_two_sided(t, dof);
  }
  return out;
}

TestResult t_test_one_sample(std::span<const double> x, double mu0) {
  const std::size_t n = x.size();
  if (n < 2) throw Error("t_test_one_sample: need at least 2 observations");
  const double var = variance(x);
  if (var == 0.0) throw Error("t_test_one_sample: zero variance");
  const double t = (mean(x) - mu0) / std::sqrt(var / static_cast<double>(n));
  TestResult out;
  out.statistic = t;
  out.p = student_t_two_sided(t, static_cast<double>(n - 1));
  out.n_x = n;
  out.method = "t_test_one_sample";
  return out;
}

Regression linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("linear_regression: samples differ in length");
  const std::size_t n = x.size();
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (n < 2 || sxx == 0.0) throw Error("regression undefined: fewer than 2 distinct x values");
  Regression reg;
  reg.n = n;
  reg.slope = sxy / sxx;
  reg.intercept = my - reg.slope * mx;
  reg.r = syy == 0.0 ? 0.0 : std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return reg;
}

Ecdf::Ecdf(std::span<const double> sample) : sorted_(sample.begin(), sample.end()) {
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double v) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), v);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

CdfDifference cdf_difference(std::span<const double> a, std::span<const double> b) {
  const Ecdf fa(a), fb(b);
  CdfDifference out;
  out.support.assign(a.begin(), a.end());
  out.support.insert(out.support.end(), b.begin(), b.end());
  std::sort(out.support.begin(), out.support.end());
  out.support.erase(std::unique(out.support.begin(), out.support.end()), out.support.end());
  out.difference.reserve(out.support.size());
  for (double v : out.support) out.difference.push_back(fa(v) - fb(v));
  return out;
}

}  // namespace knet::stats
