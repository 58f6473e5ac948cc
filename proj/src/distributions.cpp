#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scopeprobe/errors.hpp"
#include "scopeprobe/stats.hpp"

namespace scopeprobe::stats {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision in practice
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGlPoints = 16;
constexpr double kGlNodes[kGlPoints] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGlWeights[kGlPoints] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

template <typename F>
double gl_integrate(F&& f, double lo, double hi, int panels) {
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double mid = a + 0.5 * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (int i = 0; i < kGlPoints; ++i) {
      acc += kGlWeights[i] * f(mid + half * kGlNodes[i]);
    }
    total += half * acc;
  }
  return total;
}

// P(range of k iid standard normals <= w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  if (k == 1) return 1.0;
  const auto integrand = [&](double u) {
    const double span = std_normal_cdf(u + w) - std_normal_cdf(u);
    if (span <= 0.0) return 0.0;
    return std_normal_pdf(u) * std::pow(span, k - 1);
  };
  return std::min(1.0, k * gl_integrate(integrand, -8.0, 8.0, 24));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw StatsError("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw StatsError("student_t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double x, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0) throw StatsError("f_cdf: df must be positive");
  if (x <= 0.0) return 0.0;
  return incomplete_beta(0.5 * df1, 0.5 * df2,
                         df1 * x / (df1 * x + df2));
}

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw StatsError("studentized_range_cdf: k must be >= 2");
  if (df <= 0.0) throw StatsError("studentized_range_cdf: df must be positive");
  if (q <= 0.0) return 0.0;
  // Large df: the scale S degenerates to 1.
  if (df > 1e6) return normal_range_cdf(q, k);

  // Outer integral over the scale S = sqrt(chi^2_df / df); the density
  // concentrates near 1 with spread ~ 1/sqrt(2 df).
  const double ln_norm = std::log(2.0) + 0.5 * df * std::log(0.5 * df) -
                         std::lgamma(0.5 * df);
  const auto outer = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double ln_f = ln_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(ln_f) * normal_range_cdf(q * s, k);
  };
  const double spread = 9.0 / std::sqrt(df);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + spread + 2.0 / df;
  return std::min(1.0, gl_integrate(outer, lo, hi, 24));
}

double tukey_p_value(double q, int k, double df) {
  const double p = 1.0 - studentized_range_cdf(q, k, df);
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace scopeprobe::stats
