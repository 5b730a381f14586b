#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nashbo {

enum class KernelFamily { SquaredExponential, Matern52 };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

struct KernelParams {
  KernelFamily family = KernelFamily::SquaredExponential;
  /// One entry means isotropic; otherwise one lengthscale per input dimension.
  std::vector<double> lengthscales{0.25};
  double signal_variance = 1.0;
  /// Observation noise sigma^2 used by the posterior.
  double noise_variance = 0.01;

  void validate(std::size_t dim) const;
  bool operator==(const KernelParams&) const = default;
};

/// k(a, b) for the configured family.
double kernel(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b);

/// Gram matrix between the rows of A and the rows of B.
Eigen::MatrixXd cross_kernel(const KernelParams& p, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Symmetric Gram matrix of the rows of A; each pair is evaluated once.
Eigen::MatrixXd gram(const KernelParams& p, const Eigen::MatrixXd& A);

}  // namespace nashbo
