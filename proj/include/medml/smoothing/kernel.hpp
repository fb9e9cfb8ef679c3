#pragma once

#include <functional>
#include <span>
#include <string>

namespace medml {

enum class KernelFamily { Gaussian, Epanechnikov };

// Second-order symmetric smoothing kernel. Gaussian is the default.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
};

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily family);

// Positive, finite smoothing bandwidth in treatment units.
class Bandwidth {
 public:
  explicit Bandwidth(double h);
  double value() const { return h_; }

 private:
  double h_;
};

double kernel_eval(KernelSpec spec, double u);

// K_h(delta) = k(delta / h) / h.
double smooth_weight(KernelSpec spec, Bandwidth h, double delta);

struct KernelConstants {
  double roughness;  // R_k = int k(u)^2 du
  double kappa;      // int u^2 k(u) du
};

// Closed-form constants.
KernelConstants kernel_constants(KernelSpec spec);

// Raw moments by adaptive Simpson quadrature over [-12, 12] (Gaussian) or
// the support [-1, 1] (Epanechnikov).
struct KernelMoments {
  double mass;       // int k
  double first;      // int u k
  double second;     // int u^2 k
  double roughness;  // int k^2
};
KernelMoments kernel_moments_by_quadrature(KernelSpec spec, double tol = 1e-12);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

// h = c * sd(t) * n^(-1/5) with the (n-1) sample standard deviation.
Bandwidth scott_bandwidth(std::span<const double> t, double c = 1.06);

}  // namespace medml
