#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "specdist/errors.hpp"

namespace specdist {

using cplx = std::complex<double>;

/// Sample eigenvalues of C1^-1 C2 together with the sample sizes.
///
/// `lambda` keeps all p values in ascending order. Values closer than
/// 1e-12 max(lambda) are merged into one atom of `atoms`, carrying weight
/// multiplicity/p in `weights`; transforms sum over atoms.
struct SpectralModel {
  Eigen::VectorXd lambda;
  Eigen::VectorXd atoms;
  Eigen::VectorXd weights;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;

  Eigen::Index p() const { return lambda.size(); }
  double c1() const { return double(p()) / double(n1); }
  double c2() const { return double(p()) / double(n2); }
  double lambda_max() const { return lambda(lambda.size() - 1); }
  /// Smallest strictly positive eigenvalue.
  double lambda_min_positive() const;
  /// Total weight of atoms sitting at exactly zero (rank deficiency of C2 hat).
  double zero_weight() const;
};

/// Validates, sorts and merges; throws DomainError / NonFinite /
/// NonPositiveEigenvalue. Zero eigenvalues are accepted only when c2 >= 1.
SpectralModel make_model(Eigen::VectorXd lambda, std::int64_t n1,
                         std::int64_t n2);

namespace detail {
Eigen::VectorXd whitened_spectrum(const Eigen::MatrixXd &x1,
                                  const Eigen::MatrixXd &x2);
Eigen::VectorXd whitened_spectrum(const Eigen::MatrixXcd &x1,
                                  const Eigen::MatrixXcd &x2);
} // namespace detail

/// Eigenvalues of inv(X1 X1*/n1) (X2 X2*/n2) for p x n observation matrices.
///
/// Whitens by the Cholesky factor of the first sample covariance and solves
/// a self-adjoint problem, so the spectrum is real by construction.
template <typename Derived1, typename Derived2>
SpectralModel sample_eigenvalues(const Eigen::MatrixBase<Derived1> &x1,
                                 const Eigen::MatrixBase<Derived2> &x2) {
  using S1 = typename Derived1::Scalar;
  using S2 = typename Derived2::Scalar;
  constexpr bool complex_input = Eigen::NumTraits<S1>::IsComplex ||
                                 Eigen::NumTraits<S2>::IsComplex;
  if (x1.rows() != x2.rows())
    throw DimensionMismatch("x1 and x2 must have the same number of rows");
  if (x1.cols() <= x1.rows())
    throw DomainError("n1 must exceed p");
  if (x2.cols() < 1)
    throw DomainError("n2 must be positive");
  if (!x1.allFinite() || !x2.allFinite())
    throw NonFinite("observation matrix contains NaN or Inf");
  Eigen::VectorXd lam;
  if constexpr (complex_input)
    lam = detail::whitened_spectrum(
        Eigen::MatrixXcd(x1.template cast<cplx>()),
        Eigen::MatrixXcd(x2.template cast<cplx>()));
  else
    lam = detail::whitened_spectrum(Eigen::MatrixXd(x1), Eigen::MatrixXd(x2));
  return make_model(std::move(lam), x1.cols(), x2.cols());
}

/// m(z) = (1/p) sum 1/(lambda_i - z).
cplx stieltjes(const SpectralModel &model, cplx z);
/// m'(z) = (1/p) sum 1/(lambda_i - z)^2.
cplx stieltjes_prime(const SpectralModel &model, cplx z);

cplx phi(const SpectralModel &model, cplx z);
cplx psi(const SpectralModel &model, cplx z);
cplx phi_prime(const SpectralModel &model, cplx z);
cplx psi_prime(const SpectralModel &model, cplx z);

/// phi and psi with an explicit ratio; c1 = 0 gives the known-C1 phi(z) = z.
struct Transforms {
  cplx phi, psi, phi_prime, psi_prime;
};
Transforms transforms(const SpectralModel &model, double c1, cplx z);

/// Zeros of phi (eta) and psi (zeta), index-aligned with lambda.
struct SupportPoints {
  Eigen::VectorXd eta;
  Eigen::VectorXd zeta; // empty when c2 >= 1
};

/// Secular roots of M(x) = x m(x) on each interlacing interval.
/// `with_zeta` requests zeta and then requires c2 < 1.
SupportPoints support_points(const SpectralModel &model, bool with_zeta = true);

/// Roots of M(x) = -1/c1 for an arbitrary c1 in (0,1).
Eigen::VectorXd eta_points(const SpectralModel &model, double c1);

/// Same points as eigenvalues of the rank-one updated diagonal matrices
/// diag(lambda) + sqrt(lambda) sqrt(lambda)^T / (n1 - p) and
/// diag(lambda) - sqrt(lambda) sqrt(lambda)^T / n2.
SupportPoints support_points_rank_one(const SpectralModel &model);

/// Largest root of psi below the smallest positive eigenvalue (c2 > 1).
double psi_root_below(const SpectralModel &model);

} // namespace specdist
