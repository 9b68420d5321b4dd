#include "augwm/welch.hpp"

#include "augwm/errors.hpp"

#include <cmath>
#include <limits>

namespace augwm {

namespace {

// Continued fraction for I_x(a, b) evaluated with the modified Lentz method.
// Converges quickly for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
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
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> x, const char* name) {
  if (x.size() < 2) throw ValidationError(std::string("welch_ttest: sample ") + name + " needs at least two values");
  double sum = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError(std::string("welch_ttest: sample ") + name + " has a non-finite value");
    sum += v;
  }
  const double n = static_cast<double>(x.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student_t_two_sided: df must be positive");
  if (std::isnan(t)) throw ValidationError("student_t_two_sided: t is NaN");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  const Moments ma = moments(a, "a");
  const Moments mb = moments(b, "b");
  const double va = ma.var / static_cast<double>(a.size());
  const double vb = mb.var / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    if (ma.mean == mb.mean) return {0.0, static_cast<double>(a.size() + b.size() - 2), 1.0};
    throw ValidationError("welch_ttest: both samples have zero variance");
  }
  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  // Welch-Satterthwaite
  const double da = va * va / static_cast<double>(a.size() - 1);
  const double db = vb * vb / static_cast<double>(b.size() - 1);
  r.df = se2 * se2 / (da + db);
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace augwm
