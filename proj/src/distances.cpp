#include "specdist/distances.hpp"

#include <cmath>

namespace specdist {

namespace {

void absorb(EstimateReport &out, const EstimateReport &part) {
  out.warnings.insert(out.warnings.end(), part.warnings.begin(), part.warnings.end());
  out.validity = out.validity && part.validity;
  if (part.kappa0) out.kappa0 = part.kappa0;
}

// Evaluates the distance as a linear combination of functional estimates
// produced by `expect`.
template <typename Expect>
EstimateReport combine(const DistanceKind &kind, KLConvention kl, Expect &&expect) {
  EstimateReport out;
  auto use = [&](const FunctionalSpec &f) {
    const EstimateReport r = expect(f);
    absorb(out, r);
    out.method = r.method;
    return r.value;
  };
  switch (kind.type) {
  case DistanceType::FisherSq:
    out.value = use(FunctionalSpec::log_squared());
    break;
  case DistanceType::Bhattacharyya: {
    const double l1 = use(FunctionalSpec::log1p(1.0));
    const double l = use(FunctionalSpec::log());
    out.value = 0.5 * l1 - 0.25 * l - 0.5 * std::log(2.0);
    break;
  }
  case DistanceType::KL: {
    const double t = use(FunctionalSpec::identity());
    const double l = use(FunctionalSpec::log());
    const double sign = kl == KLConvention::Paper ? 1.0 : -1.0;
    out.value = 0.5 * t - 0.5 + sign * 0.5 * l;
    break;
  }
  case DistanceType::Renyi: {
    const double a = kind.alpha;
    if (!(a > 0.0 && a < 1.0)) throw DomainError("Renyi alpha must lie in (0,1)");
    const double l1 = use(FunctionalSpec::log1p((1.0 - a) / a));
    const double l = use(FunctionalSpec::log());
    out.value = -1.0 / (2.0 * (a - 1.0)) * (std::log(a) + l1) + 0.5 * l;
    break;
  }
  }
  return out;
}

} // namespace

DistanceKind DistanceKind::renyi(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("Renyi alpha must lie in (0,1)");
  DistanceKind k;
  k.type = DistanceType::Renyi;
  k.alpha = alpha;
  return k;
}

const char *distance_name(DistanceType t) {
  switch (t) {
  case DistanceType::FisherSq: return "fisher";
  case DistanceType::Bhattacharyya: return "bhattacharyya";
  case DistanceType::KL: return "kl";
  case DistanceType::Renyi: return "renyi";
  }
  return "?";
}

EstimateReport distance(const SpectralModel &model, const DistanceKind &kind,
                        const DistanceOptions &opts) {
  return combine(kind, opts.kl, [&](const FunctionalSpec &f) {
    switch (opts.method) {
    case DistanceMethod::PlugIn:
      return classical_plugin(model, f);
    case DistanceMethod::Contour:
      return est_contour(model, f, opts.contour, opts.c1_known);
    case DistanceMethod::RMT:
      break;
    }
    return estimate(model, f, opts.c1_known, opts.fisher_exact);
  });
}

double population_distance(const Eigen::VectorXd &nu_eigs, const DistanceKind &kind,
                           KLConvention kl) {
  if (nu_eigs.size() < 1) throw DomainError("empty spectrum");
  if (!(nu_eigs.minCoeff() > 0.0))
    throw NonPositiveEigenvalue("population eigenvalues must be positive");
  const Eigen::ArrayXd t = nu_eigs.array();
  return combine(kind, kl, [&](const FunctionalSpec &f) {
           EstimateReport r;
           r.method = Method::PlugIn;
           switch (f.kind) {
           case FunctionalKind::Identity: r.value = t.mean(); break;
           case FunctionalKind::Log: r.value = t.log().mean(); break;
           case FunctionalKind::LogSquared: r.value = t.log().square().mean(); break;
           case FunctionalKind::Log1p: r.value = (f.s * t).log1p().mean(); break;
           case FunctionalKind::Custom: break;
           }
           return r;
         })
      .value;
}

} // namespace specdist
