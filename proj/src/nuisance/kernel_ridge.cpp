#include "medml/nuisance/kernel_ridge.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace medml {
namespace {

constexpr Eigen::Index kMedianCap = 2000;
constexpr std::uint64_t kMedianSeed = 0x5EEDF00DULL;

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

double median_heuristic(const Eigen::MatrixXd& rows) {
  Eigen::Index n = rows.rows();
  if (n < 2) throw ArgumentError("median_heuristic: need at least two rows");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (n > kMedianCap) {
    RngStream rng(kMedianSeed, 0);
    for (Eigen::Index i = 0; i < kMedianCap; ++i) {
      const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    n = kMedianCap;
  }
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      dist.push_back((rows.row(idx[static_cast<std::size_t>(a)]) - rows.row(idx[static_cast<std::size_t>(b)])).norm());
    }
  }
  const double med = median_of(dist);
  if (!(med > 0.0)) {
    if (*std::max_element(dist.begin(), dist.end()) == 0.0) {
      throw NumericalError("median_heuristic: all rows are identical");
    }
    throw NumericalError("median_heuristic: median interpoint distance is zero");
  }
  return med;
}

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double lengthscale) {
  if (a.cols() != b.cols()) throw ArgumentError("gaussian_gram: dimension mismatch");
  const double scale = -0.5 / (lengthscale * lengthscale);
  const Eigen::Index d = a.cols();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = a(i, k) - b(j, k);
        s += diff * diff;
      }
      out(i, j) = std::exp(scale * s);
    }
  }
  return out;
}

Eigen::MatrixXd product_gram(const Blocks& a, const Blocks& b, const std::vector<double>& lengthscales) {
  if (a.size() != b.size() || a.size() != lengthscales.size() || a.empty()) {
    throw ArgumentError("product_gram: block count mismatch");
  }
  Eigen::MatrixXd out = gaussian_gram(a[0], b[0], lengthscales[0]);
  for (std::size_t k = 1; k < a.size(); ++k) out.array() *= gaussian_gram(a[k], b[k], lengthscales[k]).array();
  return out;
}

namespace {

void check_ridge_inputs(const Blocks& inputs, Eigen::Index n, double lambda, const std::vector<double>& ls) {
  if (inputs.empty()) throw ArgumentError("kernel ridge: no input blocks");
  if (n < 1) throw ArgumentError("kernel ridge: empty training set");
  for (const auto& b : inputs) {
    if (b.rows() != n) throw ArgumentError("kernel ridge: input blocks disagree on the row count");
  }
  if (!(lambda > 0.0)) throw ArgumentError("kernel ridge: lambda must be positive");
  if (ls.size() != inputs.size()) throw ArgumentError("kernel ridge: one lengthscale per block required");
  for (double l : ls) {
    if (!(l > 0.0)) throw ArgumentError("kernel ridge: lengthscales must be positive");
  }
}

}  // namespace

KernelRidgeFit::KernelRidgeFit(Blocks inputs, const Eigen::VectorXd& y, double lambda,
                               std::vector<double> lengthscales)
    : inputs_(std::move(inputs)), lengthscales_(std::move(lengthscales)), lambda_(lambda) {
  check_ridge_inputs(inputs_, y.size(), lambda_, lengthscales_);
  solve(product_gram(inputs_, inputs_, lengthscales_), y);
}

KernelRidgeFit::KernelRidgeFit(Blocks inputs, const Eigen::MatrixXd& gram, const Eigen::VectorXd& y,
                               double lambda, std::vector<double> lengthscales)
    : inputs_(std::move(inputs)), lengthscales_(std::move(lengthscales)), lambda_(lambda) {
  check_ridge_inputs(inputs_, y.size(), lambda_, lengthscales_);
  solve(gram, y);
}

void KernelRidgeFit::solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += static_cast<double>(n) * lambda_;
  factor_ = SpdFactor(system);
  alpha_ = factor_.solve(y);
}

Eigen::MatrixXd KernelRidgeFit::cross_gram(const Blocks& query) const {
  return product_gram(inputs_, query, lengthscales_);
}

Eigen::VectorXd KernelRidgeFit::predict(const Blocks& query) const {
  return cross_gram(query).transpose() * alpha_;
}

double KernelRidgeFit::predict_one(const std::vector<Eigen::RowVectorXd>& query) const {
  Blocks q;
  for (const auto& r : query) q.emplace_back(r);
  return predict(q)(0);
}

KernelRidgeFit fit_kernel_ridge(Blocks inputs, const Eigen::VectorXd& y, double lambda,
                                std::vector<double> lengthscales) {
  return KernelRidgeFit(std::move(inputs), y, lambda, std::move(lengthscales));
}

MediatorEmbedding::MediatorEmbedding(Eigen::VectorXd t, Eigen::MatrixXd x, double lambda1,
                                     double lengthscale_t, double lengthscale_x)
    : MediatorEmbedding(t, x,
                        (gaussian_gram(t, t, lengthscale_t).array() *
                         gaussian_gram(x, x, lengthscale_x).array())
                            .matrix(),
                        lambda1, lengthscale_t, lengthscale_x) {}

MediatorEmbedding::MediatorEmbedding(Eigen::VectorXd t, Eigen::MatrixXd x, const Eigen::MatrixXd& gram,
                                     double lambda1, double lengthscale_t, double lengthscale_x)
    : t_(std::move(t)), x_(std::move(x)), lambda_(lambda1), lt_(lengthscale_t), lx_(lengthscale_x) {
  check_ridge_inputs({t_, x_}, t_.size(), lambda_, {lt_, lx_});
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += static_cast<double>(t_.size()) * lambda_;
  factor_ = SpdFactor(system);
}

Eigen::MatrixXd MediatorEmbedding::weights(double t_prime, const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd kt = gaussian_gram(t_, Eigen::MatrixXd::Constant(1, 1, t_prime), lt_);
  Eigen::MatrixXd rhs = gaussian_gram(x_, x, lx_);
  rhs.array().colwise() *= kt.array();
  return factor_.solve(rhs);
}

Eigen::VectorXd MediatorEmbedding::weights(double t_prime, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return weights(t_prime, Eigen::MatrixXd(x)).col(0);
}

double conditional_mean_outcome(const KernelRidgeFit& fit, double t,
                                const Eigen::Ref<const Eigen::RowVectorXd>& m,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return fit.predict_one({Eigen::RowVectorXd::Constant(1, t), m, x});
}

double cross_conditional_mean(const KernelRidgeFit& first_stage, const MediatorEmbedding& embedding,
                              double t, double t_prime, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::MatrixXd& train_m = first_stage.inputs().at(1);
  const Eigen::Index n = train_m.rows();
  if (embedding.t().size() != n) throw ArgumentError("cross_conditional_mean: stages trained on different rows");
  // Pseudo-outcomes mu(t, M_i, x) at the query covariate.
  Blocks query{Eigen::MatrixXd::Constant(n, 1, t), train_m, x.replicate(n, 1)};
  const Eigen::VectorXd pseudo = first_stage.predict(query);
  return embedding.weights(t_prime, x).dot(pseudo);
}

double cross_conditional_mean(const KernelRidgeFit& first_stage, double t, double t_prime,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x, double lambda1) {
  const auto& in = first_stage.inputs();
  const auto& ls = first_stage.lengthscales();
  MediatorEmbedding embedding(in.at(0).col(0), in.at(2), lambda1, ls.at(0), ls.at(2));
  return cross_conditional_mean(first_stage, embedding, t, t_prime, x);
}

}  // namespace medml
