#include "medml/smoothing/kernel.hpp"

#include "medml/core/errors.hpp"

#include <cmath>
#include <numbers>

namespace medml {

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  throw ConfigError("unknown kernel family '" + name + "' (expected gaussian|epanechnikov)");
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Gaussian ? "gaussian" : "epanechnikov";
}

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ArgumentError("bandwidth must be positive and finite, got " + std::to_string(h));
  }
}

double kernel_eval(KernelSpec spec, double u) {
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    case KernelFamily::Epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double smooth_weight(KernelSpec spec, Bandwidth h, double delta) {
  return kernel_eval(spec, delta / h.value()) / h.value();
}

KernelConstants kernel_constants(KernelSpec spec) {
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return {0.5 * std::numbers::inv_sqrtpi, 1.0};
    case KernelFamily::Epanechnikov:
      return {0.6, 0.2};
  }
  return {0.0, 0.0};
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  // Split once up front so a symmetric peak at the midpoint cannot fool the
  // first error estimate.
  const double mid = 0.5 * (a + b);
  auto half = [&](double lo, double hi) {
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, lo, hi, fa, fm, fb, whole, 0.5 * tol, max_depth);
  };
  return half(a, mid) + half(mid, b);
}

KernelMoments kernel_moments_by_quadrature(KernelSpec spec, double tol) {
  const double lim = spec.family == KernelFamily::Gaussian ? 12.0 : 1.0;
  auto k = [spec](double u) { return kernel_eval(spec, u); };
  return {
      adaptive_simpson(k, -lim, lim, tol),
      adaptive_simpson([&](double u) { return u * k(u); }, -lim, lim, tol),
      adaptive_simpson([&](double u) { return u * u * k(u); }, -lim, lim, tol),
      adaptive_simpson([&](double u) { return k(u) * k(u); }, -lim, lim, tol),
  };
}

Bandwidth scott_bandwidth(std::span<const double> t, double c) {
  const auto n = t.size();
  if (n < 2) throw ArgumentError("scott_bandwidth: need at least two treatment values");
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : t) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw NumericalError("scott_bandwidth: degenerate bandwidth, treatment is constant");
  return Bandwidth(c * sd * std::pow(static_cast<double>(n), -0.2));
}

}  // namespace medml
