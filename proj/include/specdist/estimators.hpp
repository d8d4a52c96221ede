#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specdist/spectral.hpp"

namespace specdist {

enum class FunctionalKind { Identity, Log, Log1p, LogSquared, Custom };

/// Which f in (1/p) sum f(lambda_i(C1^-1 C2)) is estimated.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::Identity;
  double s = 1.0;                          // Log1p only
  std::function<cplx(cplx)> custom;        // Custom only

  static FunctionalSpec identity() { return of(FunctionalKind::Identity); }
  static FunctionalSpec log() { return of(FunctionalKind::Log); }
  static FunctionalSpec log1p(double s);
  static FunctionalSpec log_squared() { return of(FunctionalKind::LogSquared); }
  static FunctionalSpec custom_fn(std::function<cplx(cplx)> f);

private:
  static FunctionalSpec of(FunctionalKind k) {
    FunctionalSpec f;
    f.kind = k;
    return f;
  }
};

enum class Method {
  ClosedForm,
  ClosedFormKnownC1,
  ExactDilog,
  LargePApprox,
  Contour,
  PlugIn
};

const char *method_name(Method m);

struct EstimateReport {
  double value = 0.0;
  Method method = Method::ClosedForm;
  std::optional<double> kappa0;
  std::vector<std::string> warnings;
  bool validity = true;
};

/// Ellipse in z, or an ellipse in log z mapped through exp; both cross the
/// real axis at left_margin * zeta_1 and right_margin * eta_p.
enum class ContourShape { Ellipse, LogEllipse };

struct ContourConfig {
  int points = 2048;
  double left_margin = 0.5;
  double right_margin = 2.0;
  double aspect = 0.5;
  ContourShape shape = ContourShape::LogEllipse;
};

EstimateReport est_identity(const SpectralModel &model, bool c1_known = false);
EstimateReport est_log(const SpectralModel &model, bool c1_known = false);

/// Root of 1 + s phi(x)/psi(x) = 0 in (-1/(s(1-c1)), 0); c1_known uses phi(x) = x.
double find_kappa0(const SpectralModel &model, double s, bool c1_known = false);

EstimateReport est_log1p(const SpectralModel &model, double s,
                         bool c1_known = false);

/// log(1+st) estimate for c2 > 1. `equal_covariances` additionally checks
/// the closed-form admissible range of s valid when C1 = C2.
EstimateReport est_log1p_c2gt1(const SpectralModel &model, double s,
                               bool c1_known = false,
                               bool equal_covariances = false);

/// Upper end of the admissible s range for C1 = C2 and c2 > 1.
double log1p_s_bound_equal_cov(double c1, double c2);

EstimateReport est_log2_exact(const SpectralModel &model);

/// Last bracket of the large-p log^2 estimate: `Direct` keeps
/// (1-c2)/c2 [log^2(1-c2)/2 - log^2(1-c1)/2 + sum (eta-zeta) log(lambda)/lambda];
/// `Symmetric` uses log^2((1-c1)(1-c2))/2 + sum (eta-zeta) r, equal to it up
/// to the substitution sum (eta-zeta)/lambda ~ sum log(eta/zeta).
enum class Log2Form { Direct, Symmetric };

EstimateReport est_log2_approx(const SpectralModel &model, bool c1_known = false,
                               Log2Form form = Log2Form::Direct);

EstimateReport est_contour(const SpectralModel &model, const FunctionalSpec &f,
                           const ContourConfig &cfg = {}, bool c1_known = false);

EstimateReport classical_plugin(const SpectralModel &model,
                                const FunctionalSpec &f);

/// Closed-form dispatch: LogSquared selects ExactDilog or LargePApprox.
EstimateReport estimate(const SpectralModel &model, const FunctionalSpec &f,
                        bool c1_known = false, bool log2_exact = false);

} // namespace specdist
