#include "specdist/estimators.hpp"

#include <cmath>
#include <numbers>
#include <span>

#include "specdist/dilog.hpp"

namespace specdist {

namespace {

constexpr double kPi = std::numbers::pi;

template <typename T> T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 8) {
    T s{};
    for (const auto &x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

void require_c2_below_one(const SpectralModel &model, const char *what) {
  if (!(model.c2() < 1.0))
    throw DomainError(std::string(what) + " requires c2 < 1");
}

void require_positive(const SpectralModel &model) {
  if (!(model.lambda(0) > 0.0))
    throw NonPositiveEigenvalue("logarithmic functional of a zero eigenvalue");
}

double mean_of(const Eigen::VectorXd &v) {
  return pairwise_sum(std::span<const double>(v.data(), std::size_t(v.size()))) /
         double(v.size());
}

// Helper series near lambda_i = lambda_j, u = lambda_i/lambda_j - 1.
constexpr double kSeriesCut = 1e-3;

double m_entry(double li, double lj) {
  const double u = li / lj - 1.0;
  if (std::abs(u) < kSeriesCut)
    return (0.5 - u / 3.0 + u * u / 4.0 - u * u * u / 5.0) / (lj * lj);
  const double d = li - lj;
  return (u - std::log1p(u)) / (d * d);
}

double n_entry(double li, double lj) {
  const double u = li / lj - 1.0;
  if (std::abs(u) < kSeriesCut)
    return (1.0 - u / 2.0 + u * u / 3.0 - u * u * u / 4.0) / lj;
  return std::log1p(u) / (li - lj);
}

double q_entry(double li, double lj) {
  const double u = li / lj - 1.0;
  if (std::abs(u) < kSeriesCut)
    return (0.5 - u / 6.0 + u * u / 12.0 - u * u * u / 20.0) / lj;
  return ((1.0 + u) * std::log1p(u) - u) / (lj * u * u);
}

double sq(double x) { return x * x; }

// sign-change bisection of g on [lo, hi]
template <typename G> double bisect(G &&g, double lo, double hi, double glo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace

FunctionalSpec FunctionalSpec::log1p(double s) {
  if (!(s > 0.0)) throw DomainError("log1p functional requires s > 0");
  FunctionalSpec f = of(FunctionalKind::Log1p);
  f.s = s;
  return f;
}

FunctionalSpec FunctionalSpec::custom_fn(std::function<cplx(cplx)> fn) {
  FunctionalSpec f = of(FunctionalKind::Custom);
  f.custom = std::move(fn);
  return f;
}

const char *method_name(Method m) {
  switch (m) {
  case Method::ClosedForm: return "ClosedForm";
  case Method::ClosedFormKnownC1: return "ClosedFormKnownC1";
  case Method::ExactDilog: return "ExactDilog";
  case Method::LargePApprox: return "LargePApprox";
  case Method::Contour: return "Contour";
  case Method::PlugIn: return "PlugIn";
  }
  return "?";
}

EstimateReport est_identity(const SpectralModel &model, bool c1_known) {
  EstimateReport r;
  const double mu = mean_of(model.lambda);
  r.value = c1_known ? mu : (1.0 - model.c1()) * mu;
  r.method = c1_known ? Method::ClosedFormKnownC1 : Method::ClosedForm;
  return r;
}

EstimateReport est_log(const SpectralModel &model, bool c1_known) {
  require_c2_below_one(model, "log estimator");
  require_positive(model);
  const double c1 = model.c1(), c2 = model.c2();
  const double ml = mean_of(model.lambda.array().log().matrix());
  const double tail = (1.0 - c2) / c2 * std::log1p(-c2);
  EstimateReport r;
  if (c1_known) {
    r.value = ml + tail + 1.0;
    r.method = Method::ClosedFormKnownC1;
  } else {
    r.value = ml - (1.0 - c1) / c1 * std::log1p(-c1) + tail;
    r.method = Method::ClosedForm;
  }
  return r;
}

double find_kappa0(const SpectralModel &model, double s, bool c1_known) {
  require_c2_below_one(model, "kappa0 search");
  if (!(s > 0.0)) throw DomainError("s must be positive");
  const double c1 = c1_known ? 0.0 : model.c1();
  auto h = [&](double x) {
    const Transforms t = transforms(model, c1, cplx(x, 0.0));
    return (t.psi + s * t.phi).real();
  };
  double lo = -1.0 / (s * (1.0 - c1));
  double hi = 0.0;
  double hlo = h(lo);
  if (!(hlo < 0.0) || !(1.0 - model.c2() > 0.0))
    throw BracketFailure("kappa0 is not sign-bracketed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::abs(lo)) break;
  }
  return 0.5 * (lo + hi);
}

EstimateReport est_log1p(const SpectralModel &model, double s, bool c1_known) {
  require_c2_below_one(model, "log1p estimator");
  const double k0 = find_kappa0(model, s, c1_known);
  const double c1 = model.c1(), c2 = model.c2();
  const double tail =
      mean_of((-model.lambda.array() / k0).log1p().matrix());
  EstimateReport r;
  r.kappa0 = k0;
  if (c1_known) {
    r.value = (1.0 + s * k0 + std::log(-s * k0)) / c2 + tail;
    r.method = Method::ClosedFormKnownC1;
  } else {
    const double a = c1 + c2 - c1 * c2;
    r.value = a / (c1 * c2) * std::log(a / ((1.0 - c1) * (c2 - s * c1 * k0))) +
              std::log(-s * k0 * (1.0 - c1)) / c2 + tail;
    r.method = Method::ClosedForm;
  }
  return r;
}

double log1p_s_bound_equal_cov(double c1, double c2) {
  return (1.0 - c1) / (std::sqrt(c1 + c2 - c1 * c2) - 1.0);
}

EstimateReport est_log1p_c2gt1(const SpectralModel &model, double s,
                               bool c1_known, bool equal_covariances) {
  const double c1 = c1_known ? 0.0 : model.c1();
  const double c2 = model.c2();
  if (!(c2 > 1.0)) throw DomainError("c2 > 1 estimator requires c2 > 1");
  if (!(s > 0.0)) throw DomainError("s must be positive");

  const double top = model.lambda_min_positive();
  const double zt = psi_root_below(model);
  auto ratio = [&](double x) {
    const Transforms t = transforms(model, c1, cplx(x, 0.0));
    return (t.phi / t.psi).real();
  };
  auto h = [&](double x) {
    const Transforms t = transforms(model, c1, cplx(x, 0.0));
    return (t.psi + s * t.phi).real();
  };
  auto g = [&](double x) { return 1.0 + s * ratio(x); };

  // Smallest root of 1 + s phi/psi: h < 0 left of -1/(s(1-c1)); scan rightwards.
  const double lo = -1.0 / (s * (1.0 - c1));
  const double hi = top * (1.0 - 1e-9);
  const double excl = 1e-9 * model.lambda_max();
  const int n = 4000;
  double k0 = 0.0;
  bool found = false;
  double xp = lo, gp = g(lo);
  if (!(gp < 0.0)) throw BracketFailure("c2 > 1 kappa0 scan has no left bracket");
  for (int i = 1; i <= n && !found; ++i) {
    double x = lo + (hi - lo) * double(i) / double(n);
    if (std::abs(x - zt) < excl) continue;
    const double gx = g(x);
    if ((gx < 0.0) != (gp < 0.0)) {
      const double r = bisect(g, xp, x, gp);
      const double scale = std::abs(s * ratio(r)) + 1.0;
      if (std::abs(h(r)) <= 1e-6 * scale * (std::abs(transforms(model, c1, cplx(r, 0)).psi) + 1.0)) {
        k0 = r;
        found = true;
      }
    }
    xp = x;
    gp = gx;
  }
  if (!found) throw BracketFailure("no real root of 1 + s phi/psi below the spectrum");

  EstimateReport r;
  r.kappa0 = k0;
  const double tail =
      mean_of((1.0 - model.lambda.array() / k0).abs().log().matrix());
  if (c1_known) {
    r.value = (1.0 + s * k0 + std::log(std::abs(s * k0))) / c2 + tail;
    r.method = Method::ClosedFormKnownC1;
  } else {
    const double a = c1 + c2 - c1 * c2;
    r.value = a / (c1 * c2) *
                  std::log(a / ((1.0 - c1) * std::abs(c2 - s * c1 * k0))) +
              std::log(std::abs(s * k0 * (1.0 - c1))) / c2 + tail;
    r.method = Method::ClosedForm;
  }

  const double xe = zt + 0.99 * (top - zt);
  const double x_minus = ratio(xe);
  r.warnings.push_back("x- approximated by phi/psi at x = " + std::to_string(xe) +
                       ": " + std::to_string(x_minus));
  if (!(1.0 + s * x_minus > 0.0)) {
    r.validity = false;
    r.warnings.push_back("1 + s x- <= 0: estimate outside its validity range");
  }
  if (equal_covariances) {
    const double bound = log1p_s_bound_equal_cov(c1, c2);
    if (!(s < bound)) {
      r.validity = false;
      r.warnings.push_back("s exceeds the equal-covariance bound " +
                           std::to_string(bound));
    }
  }
  return r;
}

EstimateReport est_log2_exact(const SpectralModel &model) {
  require_c2_below_one(model, "log^2 estimator");
  require_positive(model);
  const SupportPoints sp = support_points(model);
  const auto &lam = model.lambda;
  const auto &eta = sp.eta;
  const auto &zeta = sp.zeta;
  const Eigen::Index p = model.p();
  const double c1 = model.c1(), c2 = model.c2();
  const double a = (c1 + c2 - c1 * c2) / (c1 * c2);

  std::vector<double> four(std::size_t(p * p)), two(std::size_t(p * p));
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      const double zl = li2(1.0 - zeta(i) / lam(j));
      const double el = li2(1.0 - eta(i) / lam(j));
      const double ee = li2(1.0 - eta(i) / eta(j));
      const double ze = li2(1.0 - zeta(i) / eta(j));
      four[std::size_t(i * p + j)] = zl - el + ee - ze;
      two[std::size_t(i * p + j)] = zl - el;
    }
  const double s4 = pairwise_sum(std::span<const double>(four));
  const double s2 = pairwise_sum(std::span<const double>(two));

  double t_eta = 0.0, t_lam = 0.0, t_ez = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    t_eta += sq(std::log((1.0 - c1) * eta(i)));
    t_lam += sq(std::log((1.0 - c1) * lam(i)));
    t_ez += sq(std::log(eta(i))) - sq(std::log(zeta(i)));
  }

  EstimateReport r;
  r.method = Method::ExactDilog;
  r.value = a * (t_eta - t_lam + 2.0 * s4) -
            (1.0 - c2) / c2 *
                (sq(std::log1p(-c2)) - sq(std::log1p(-c1)) + t_ez) -
            (2.0 * s2 - t_lam) / double(p);
  return r;
}

EstimateReport est_log2_approx(const SpectralModel &model, bool c1_known,
                               Log2Form form) {
  require_c2_below_one(model, "log^2 estimator");
  require_positive(model);
  const auto &lam = model.lambda;
  const Eigen::Index p = model.p();
  const double c1 = model.c1(), c2 = model.c2();
  const double pd = double(p);
  EstimateReport r;

  if (c1_known) {
    const SupportPoints sp = support_points(model);
    const Eigen::VectorXd dzl = lam - sp.zeta;
    const Eigen::ArrayXd ll = lam.array().log();
    const Eigen::VectorXd q = (ll / lam.array()).matrix();
    double qsum = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) row += q_entry(lam(i), lam(j));
      qsum += dzl(i) * row;
    }
    r.value = ll.square().mean() + 2.0 * ll.mean() - 2.0 / pd * qsum -
              2.0 * (1.0 - c2) / c2 * (0.5 * sq(std::log1p(-c2)) + dzl.dot(q));
    r.method = Method::ClosedFormKnownC1;
    return r;
  }

  const SupportPoints sp = support_points(model);
  const Eigen::VectorXd dze = sp.eta - sp.zeta;
  const Eigen::VectorXd dle = sp.eta - lam;
  const Eigen::ArrayXd lc = ((1.0 - c1) * lam.array()).log();
  const Eigen::VectorXd rv = (lc / lam.array()).matrix();
  double quad = 0.0, nsum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    double mrow = 0.0, nrow = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      mrow += m_entry(lam(i), lam(j)) * dle(j);
      nrow += n_entry(lam(i), lam(j));
    }
    quad += dze(i) * mrow;
    nsum += dze(i) * nrow;
  }
  const double a = (c1 + c2 - c1 * c2) / (c1 * c2);
  double last;
  if (form == Log2Form::Symmetric) {
    last = 0.5 * sq(std::log((1.0 - c1) * (1.0 - c2))) + dze.dot(rv);
  } else {
    const Eigen::VectorXd lr = (lam.array().log() / lam.array()).matrix();
    last = 0.5 * sq(std::log1p(-c2)) - 0.5 * sq(std::log1p(-c1)) + dze.dot(lr);
  }
  r.value = lc.square().mean() + 2.0 * a * (quad + dle.dot(rv)) -
            2.0 / pd * nsum - 2.0 * (1.0 - c2) / c2 * last;
  r.method = Method::LargePApprox;
  return r;
}

EstimateReport est_contour(const SpectralModel &model, const FunctionalSpec &f,
                           const ContourConfig &cfg, bool c1_known) {
  if (cfg.points < 64 || cfg.points % 2 != 0)
    throw DomainError("contour needs an even number of points >= 64");
  if (!(cfg.left_margin > 0.0 && cfg.left_margin < 1.0 && cfg.right_margin > 1.0 &&
        cfg.aspect > 0.0))
    throw DomainError("contour margins must place the crossings outside the support");
  const bool log_kind =
      f.kind == FunctionalKind::Log || f.kind == FunctionalKind::LogSquared;
  if (log_kind) require_c2_below_one(model, "contour log estimator");
  if (f.kind == FunctionalKind::Custom && !f.custom)
    throw DomainError("custom functional without callback");

  const double c1 = c1_known ? 0.0 : model.c1();
  const double c2 = model.c2();
  double left;
  if (c2 < 1.0) {
    left = cfg.left_margin * support_points(model).zeta(0);
  } else {
    if (model.zero_weight() > 0.0)
      throw DomainError("contour cannot enclose zero eigenvalues");
    left = cfg.left_margin * model.lambda(0);
  }
  const double right_edge =
      c1_known ? model.lambda_max() : eta_points(model, c1)(model.p() - 1);
  const double right = cfg.right_margin * right_edge;

  const int n = cfg.points;
  std::vector<cplx> terms(static_cast<std::size_t>(n));
  double phase = 0.0;
  cplx prev_arg = 0.0;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * double(k) / double(n);
    cplx z, dz;
    if (cfg.shape == ContourShape::Ellipse) {
      const double c = 0.5 * (left + right), ax = 0.5 * (right - left);
      const double bx = cfg.aspect * ax;
      z = cplx(c + ax * std::cos(th), bx * std::sin(th));
      dz = cplx(-ax * std::sin(th), bx * std::cos(th));
    } else {
      const double ll = std::log(left), lr = std::log(right);
      const double c = 0.5 * (ll + lr), ax = 0.5 * (lr - ll);
      const double bx = std::min(cfg.aspect * ax, 0.4 * kPi);
      const cplx w(c + ax * std::cos(th), bx * std::sin(th));
      z = std::exp(w);
      dz = z * cplx(-ax * std::sin(th), bx * std::cos(th));
    }
    if (k == 0) z = cplx(z.real(), 0.0);

    Transforms t;
    try {
      t = transforms(model, c1, z);
    } catch (const PoleHit &) {
      throw ContourThroughPole("quadrature node within pole guard");
    }
    const cplx ratio = t.phi / t.psi;
    const cplx kernel = (t.phi_prime * t.psi / t.phi - t.psi_prime) / c2;

    cplx fv;
    switch (f.kind) {
    case FunctionalKind::Identity:
      fv = ratio;
      break;
    case FunctionalKind::Custom:
      fv = f.custom(ratio);
      break;
    case FunctionalKind::Log:
    case FunctionalKind::LogSquared:
    case FunctionalKind::Log1p: {
      const cplx arg = f.kind == FunctionalKind::Log1p ? 1.0 + f.s * ratio : ratio;
      phase = k == 0 ? std::arg(arg) : phase + std::arg(arg / prev_arg);
      prev_arg = arg;
      const cplx lg(std::log(std::abs(arg)), phase);
      fv = f.kind == FunctionalKind::LogSquared ? lg * lg : lg;
      break;
    }
    }
    terms[std::size_t(k)] = fv * kernel * dz;
  }
  const cplx total = pairwise_sum(std::span<const cplx>(terms)) /
                     (cplx(0.0, 1.0) * double(n));

  EstimateReport r;
  r.value = total.real();
  r.method = Method::Contour;
  if (std::abs(total.imag()) > 1e-8)
    r.warnings.push_back("imaginary residual " + std::to_string(total.imag()));
  if (f.kind == FunctionalKind::Log1p) {
    if (c2 < 1.0) r.kappa0 = find_kappa0(model, f.s, c1_known);
  }
  return r;
}

EstimateReport classical_plugin(const SpectralModel &model,
                                const FunctionalSpec &f) {
  const Eigen::ArrayXd lam = model.lambda.array();
  if (f.kind == FunctionalKind::Log || f.kind == FunctionalKind::LogSquared)
    require_positive(model);
  Eigen::VectorXd v(lam.size());
  switch (f.kind) {
  case FunctionalKind::Identity: v = lam.matrix(); break;
  case FunctionalKind::Log: v = lam.log().matrix(); break;
  case FunctionalKind::LogSquared: v = lam.log().square().matrix(); break;
  case FunctionalKind::Log1p: v = (f.s * lam).log1p().matrix(); break;
  case FunctionalKind::Custom:
    if (!f.custom) throw DomainError("custom functional without callback");
    for (Eigen::Index i = 0; i < lam.size(); ++i) v(i) = f.custom(cplx(lam(i), 0)).real();
    break;
  }
  EstimateReport r;
  r.value = mean_of(v);
  r.method = Method::PlugIn;
  return r;
}

EstimateReport estimate(const SpectralModel &model, const FunctionalSpec &f,
                        bool c1_known, bool log2_exact) {
  switch (f.kind) {
  case FunctionalKind::Identity: return est_identity(model, c1_known);
  case FunctionalKind::Log: return est_log(model, c1_known);
  case FunctionalKind::Log1p:
    return model.c2() < 1.0 ? est_log1p(model, f.s, c1_known)
                            : est_log1p_c2gt1(model, f.s, c1_known);
  case FunctionalKind::LogSquared:
    if (log2_exact && !c1_known) return est_log2_exact(model);
    return est_log2_approx(model, c1_known);
  case FunctionalKind::Custom: return est_contour(model, f, {}, c1_known);
  }
  throw DomainError("unknown functional");
}

} // namespace specdist
