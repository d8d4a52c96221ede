#pragma once

#include <vector>

#include "specdist/estimators.hpp"

namespace specdist {

enum class DistanceType { FisherSq, Bhattacharyya, KL, Renyi };

struct DistanceKind {
  DistanceType type = DistanceType::FisherSq;
  double alpha = 0.5; // Renyi only, in (0,1)

  static DistanceKind renyi(double alpha);
};

enum class DistanceMethod { RMT, PlugIn, Contour };
enum class KLConvention { Paper, Standard };

struct DistanceOptions {
  DistanceMethod method = DistanceMethod::RMT;
  bool c1_known = false;
  bool fisher_exact = false; // ExactDilog instead of LargePApprox
  KLConvention kl = KLConvention::Paper;
  ContourConfig contour{};
};

const char *distance_name(DistanceType t);

/// Distance between C1 and C2 estimated from the sample spectrum.
EstimateReport distance(const SpectralModel &model, const DistanceKind &kind,
                        const DistanceOptions &opts = {});

/// Same combination evaluated on the exact eigenvalues of C1^-1 C2.
double population_distance(const Eigen::VectorXd &nu_eigs, const DistanceKind &kind,
                           KLConvention kl = KLConvention::Paper);

} // namespace specdist
