#include "nashbo/kernel.hpp"

#include <cmath>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

double scaled_sqdist(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) {
  double r2 = 0.0;
  if (p.lengthscales.size() == 1) {
    r2 = (a - b).squaredNorm() / (p.lengthscales[0] * p.lengthscales[0]);
  } else {
    for (Eigen::Index d = 0; d < a.size(); ++d) {
      const double z = (a(d) - b(d)) / p.lengthscales[d];
      r2 += z * z;
    }
  }
  return r2;
}

double from_sqdist(const KernelParams& p, double r2) {
  switch (p.family) {
    case KernelFamily::SquaredExponential:
      return p.signal_variance * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
      const double r = std::sqrt(5.0 * r2);
      return p.signal_variance * (1.0 + r + r * r / 3.0) * std::exp(-r);
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::SquaredExponential ? "se" : "matern52";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "se" || name == "rbf" || name == "squared-exponential") return KernelFamily::SquaredExponential;
  if (name == "matern52" || name == "matern-5/2") return KernelFamily::Matern52;
  throw ConfigError(fmt::format("unknown kernel family '{}'", name));
}

void KernelParams::validate(std::size_t dim) const {
  if (lengthscales.empty() || (lengthscales.size() != 1 && lengthscales.size() != dim)) {
    throw ConfigError(fmt::format("expected 1 or {} lengthscales, got {}", dim, lengthscales.size()));
  }
  for (double l : lengthscales) {
    if (!(l > 0.0)) throw ConfigError("lengthscales must be positive");
  }
  if (!(signal_variance > 0.0)) throw ConfigError("signal_variance must be positive");
  if (!(noise_variance >= 0.0)) throw ConfigError("noise_variance must be non-negative");
}

double kernel(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b) {
  return from_sqdist(p, scaled_sqdist(p, a, b));
}

namespace {

Eigen::MatrixXd scaled_rows(const KernelParams& p, const Eigen::MatrixXd& A) {
  Eigen::MatrixXd S = A;
  for (Eigen::Index d = 0; d < A.cols(); ++d) {
    const double l = p.lengthscales.size() == 1 ? p.lengthscales[0] : p.lengthscales[d];
    S.col(d) /= l;
  }
  return S;
}

}  // namespace

Eigen::MatrixXd cross_kernel(const KernelParams& p, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd As = scaled_rows(p, A);
  const Eigen::MatrixXd Bs = scaled_rows(p, B);
  const Eigen::Index dims = A.cols();
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < dims; ++d) {
        const double z = As(i, d) - Bs(j, d);
        r2 += z * z;
      }
      K(i, j) = from_sqdist(p, r2);
    }
  }
  return K;
}

Eigen::MatrixXd gram(const KernelParams& p, const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd As = scaled_rows(p, A);
  const Eigen::Index t = A.rows();
  const Eigen::Index dims = A.cols();
  Eigen::MatrixXd K(t, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    K(j, j) = p.signal_variance;
    for (Eigen::Index i = j + 1; i < t; ++i) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < dims; ++d) {
        const double z = As(i, d) - As(j, d);
        r2 += z * z;
      }
      const double v = from_sqdist(p, r2);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

}  // namespace nashbo
