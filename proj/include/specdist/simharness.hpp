#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "specdist/distances.hpp"

namespace specdist {

enum class Field { Real, Complex };

/// Per-trial random stream, fully determined by (seed, trial).
using RngStream = std::mt19937_64;
RngStream trial_stream(std::uint64_t seed, std::uint64_t trial);

/// Ascending eigenvalues of T_ij = a^|i-j|.
Eigen::VectorXd toeplitz_spectrum(int p, double a);
Eigen::MatrixXd toeplitz_matrix(int p, double a);

/// p x n matrix whose columns are i.i.d. zero-mean Gaussian with covariance
/// `cov`; complex entries are circular with variance 1/2 per component.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
sample_gaussian(const Eigen::MatrixXd &cov, Eigen::Index n, RngStream &rng) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index p = cov.rows();
  std::normal_distribution<double> gauss;
  Mat z(p, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) {
      if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
        const double re = gauss(rng), im = gauss(rng);
        z(i, j) = Scalar(re, im) * std::sqrt(0.5);
      } else {
        z(i, j) = gauss(rng);
      }
    }
  if (cov.isIdentity(0.0)) return z;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure("covariance is not positive definite");
  const Mat l = llt.matrixL().toDenseMatrix().template cast<Scalar>();
  return l.template triangularView<Eigen::Lower>() * z;
}

enum class EstimatorTag { PlugIn, RMT, RMTExact, Contour, PlugInKnownC1, RMTKnownC1 };

const char *estimator_name(EstimatorTag t);
EstimatorTag parse_estimator(const std::string &name);

struct ExperimentConfig {
  int p = 2;
  std::int64_t n1 = 1024;
  std::int64_t n2 = 2048;
  double toeplitz_a = 0.3;
  Field field = Field::Real;
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<EstimatorTag> estimators{EstimatorTag::PlugIn, EstimatorTag::RMT};
  DistanceKind kind{};
  KLConvention kl = KLConvention::Paper;
  int threads = 0; // 0: SPECDIST_THREADS or hardware concurrency
};

struct MethodSummary {
  EstimatorTag tag = EstimatorTag::RMT;
  double mean = 0.0;
  double std = 0.0;
  double rel_error = 0.0;          // |mean - population| / population
  double mean_abs_rel_error = 0.0; // average of |estimate - population| / population
  int succeeded = 0;
  int failed = 0;
  std::string note;
};

struct TrialSummary {
  double population = 0.0;
  int trials_run = 0;
  std::vector<MethodSummary> methods;
  /// Per-trial values, trials x methods, NaN for failed trials.
  Eigen::MatrixXd values;

  const MethodSummary &method(EstimatorTag t) const;
};

int worker_count(int requested);

/// Runs `trials` independent draws with C1 = I and C2 = Toeplitz(a).
TrialSummary run_experiment(const ExperimentConfig &config);

} // namespace specdist
