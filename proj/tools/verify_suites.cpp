#include "verify_suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "specdist/dilog.hpp"
#include "specdist/estimators.hpp"

namespace specdist::verify {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Tracks the worst error of one named check.
class Tracker {
public:
  Tracker(std::string suite, std::string name, double tol)
      : r_{std::move(suite), std::move(name), true, 0.0, tol, 0, {}} {}

  void add(double err, const std::string &where = {}) {
    ++r_.cases;
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    r_.worst = std::max(r_.worst, err);
    if (!(err <= r_.tolerance)) fail(where);
  }

  void flag(bool ok, const std::string &where = {}) {
    ++r_.cases;
    if (!ok) {
      r_.worst += 1.0;
      fail(where);
    }
  }

  CheckResult result() const { return r_; }

private:
  void fail(const std::string &where) {
    if (r_.passed) r_.detail = where;
    r_.passed = false;
  }
  CheckResult r_;
};

std::string describe(const SpectralModel &m) {
  std::ostringstream os;
  os.precision(6);
  os << "p=" << m.p() << " n1=" << m.n1 << " n2=" << m.n2;
  return os.str();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

cplx random_point(Rng &rng, double scale) {
  const double im = uniform(rng, 0.1, scale) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1 : 1);
  return {uniform(rng, -scale, 2.0 * scale), im};
}

struct SpectralChecks {
  Tracker interlacing{"spectral", "interlacing", 0.0};
  Tracker prod_eta{"spectral", "product eta/lambda", 1e-10};
  Tracker prod_zeta{"spectral", "product zeta/lambda", 1e-10};
  Tracker trace{"spectral", "trace of zeta", 1e-10};
  Tracker expansion{"spectral", "rational expansion", 1e-9};
  Tracker prod_forms{"spectral", "phi/psi product forms", 1e-8};
  Tracker monotone{"spectral", "phi/psi monotonicity", 0.0};
  Tracker fd{"spectral", "stieltjes finite differences", 1e-5};
  Tracker rank_one{"spectral", "rank-one eigenvalues", 1e-9};
  Tracker duplicates{"spectral", "duplicate eigenvalue fixtures", 0.0};

  std::vector<CheckResult> results() const {
    return {interlacing.result(), prod_eta.result(),  prod_zeta.result(),
            trace.result(),       expansion.result(), prod_forms.result(),
            monotone.result(),    fd.result(),        rank_one.result(),
            duplicates.result()};
  }
};

// Identity checks shared by random and degenerate models; returns false on failure.
bool check_model(SpectralChecks &c, const SpectralModel &m, Rng &rng, bool strict) {
  const std::string tag = describe(m);
  const Eigen::Index p = m.p();
  const double c1 = m.c1(), c2 = m.c2();
  const SupportPoints sp = support_points(m);
  const auto &lam = m.lambda;
  const auto &eta = sp.eta;
  const auto &zeta = sp.zeta;
  bool ok = true;

  bool order = zeta(0) > 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (strict) {
      order = order && zeta(i) < lam(i) && lam(i) < eta(i);
      if (i + 1 < p) order = order && eta(i) < zeta(i + 1);
    } else {
      order = order && zeta(i) <= lam(i) && lam(i) <= eta(i);
      if (i + 1 < p) order = order && eta(i) <= zeta(i + 1);
    }
  }
  c.interlacing.flag(order, tag);
  ok = ok && order;

  const double log_eta = (eta.array().log() - lam.array().log()).sum();
  const double log_zeta = (zeta.array().log() - lam.array().log()).sum();
  const double e1 = std::abs(std::expm1(log_eta + std::log1p(-c1)));
  const double e2 = std::abs(std::expm1(log_zeta - std::log1p(-c2)));
  const double e3 = std::abs(zeta.sum() / ((1.0 - c2 / double(p)) * lam.sum()) - 1.0);
  c.prod_eta.add(e1, tag);
  c.prod_zeta.add(e2, tag);
  c.trace.add(e3, tag);
  ok = ok && e1 <= 1e-10 && e2 <= 1e-10 && e3 <= 1e-10;

  const double scale = m.lambda_max();
  const double a_coef = (c1 + c2 - c1 * c2) / (c1 * c2);
  for (int k = 0; k < 50; ++k) {
    const cplx z = random_point(rng, scale);
    const Transforms t = transforms(m, c1, z);
    const cplx lhs = (t.phi_prime / t.phi - t.psi_prime / t.psi) * t.psi / c2;
    cplx sl = 0.0, se = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      sl += 1.0 / (z - lam(j));
      se += 1.0 / (z - eta(j));
    }
    const cplx rhs =
        (1.0 / double(p) - a_coef) * sl + (1.0 - c2) / c2 / z + a_coef * se;
    const double e = rel(lhs, rhs);
    c.expansion.add(e, tag);
    ok = ok && e <= 1e-9;
  }

  for (int k = 0; k < 20; ++k) {
    const cplx z = random_point(rng, scale);
    cplx le = 0.0, lz = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const cplx dl = std::log(z - lam(j));
      le += std::log(z - eta(j)) - dl;
      lz += std::log(z - zeta(j)) - dl;
    }
    const double e = std::max(rel(phi(m, z), (1.0 - c1) * z * std::exp(le)),
                              rel(psi(m, z), std::exp(lz)));
    c.prod_forms.add(e, tag);
    ok = ok && e <= 1e-8;
  }

  auto ratio = [&](double x) {
    const Transforms t = transforms(m, c1, x);
    return (t.phi / t.psi).real();
  };
  bool inc = true;
  constexpr int kGrid = 64;
  double prev = ratio(zeta(0) / (kGrid + 1));
  for (int k = 2; k <= kGrid; ++k) {
    const double v = ratio(zeta(0) * k / (kGrid + 1));
    inc = inc && v > prev;
    prev = v;
  }
  prev = ratio(eta(p - 1) * (1.0 + 1e-3));
  for (int k = 1; k <= kGrid; ++k) {
    const double v = ratio(eta(p - 1) * (1.0 + 1e-3 * std::pow(1e6, double(k) / kGrid)));
    inc = inc && v > prev;
    prev = v;
  }
  c.monotone.flag(inc, tag);
  ok = ok && inc;

  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const cplx z = random_point(rng, std::max(scale, 0.2));
    const cplx fd_m = (stieltjes(m, z + h) - stieltjes(m, z - h)) / (2.0 * h);
    const cplx fd_phi = (phi(m, z + h) - phi(m, z - h)) / (2.0 * h);
    const cplx fd_psi = (psi(m, z + h) - psi(m, z - h)) / (2.0 * h);
    const double e = std::max({rel(fd_m, stieltjes_prime(m, z)),
                               rel(fd_phi, phi_prime(m, z)),
                               rel(fd_psi, psi_prime(m, z))});
    c.fd.add(e, tag);
    ok = ok && e <= 1e-5;
  }

  const SupportPoints ro = support_points_rank_one(m);
  const double e = std::max((ro.eta - eta).cwiseAbs().maxCoeff(),
                            (ro.zeta - zeta).cwiseAbs().maxCoeff()) /
                   lam(p - 1);
  c.rank_one.add(e, tag);
  ok = ok && e <= 1e-9;
  return ok;
}

template <typename F> double quad(F f, double lo, double hi) {
  static boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, lo, hi, 1e-14);
}

} // namespace

SpectralModel random_model(Rng &rng, int p_max, double c_lo, double c_hi) {
  const int p = std::uniform_int_distribution<int>(1, p_max)(rng);
  const double c1 = uniform(rng, c_lo, c_hi);
  const double c2 = uniform(rng, c_lo, c_hi);
  Eigen::VectorXd lam(p);
  for (int i = 0; i < p; ++i) lam(i) = std::pow(10.0, uniform(rng, -1.0, 1.0));
  auto n_of = [p](double c) {
    return std::max<std::int64_t>(p + 1, std::llround(double(p) / c));
  };
  return make_model(lam, n_of(c1), n_of(c2));
}

std::vector<SpectralModel> duplicate_fixtures() {
  std::vector<SpectralModel> out;
  Eigen::VectorXd a(7);
  a << 0.5, 1.0, 1.0, 1.0, 2.0, 2.0 + 1e-14, 3.0;
  out.push_back(make_model(a, 10, 14));
  Eigen::VectorXd b(4);
  b << 2.0, 2.0, 2.0, 2.0;
  out.push_back(make_model(b, 8, 5));
  Eigen::VectorXd c(5);
  c << 0.1, 0.1, 4.0, 9.0, 9.0;
  out.push_back(make_model(c, 50, 6));
  return out;
}

std::vector<CheckResult> spectral_suite(const SuiteOptions &opt) {
  const int models = opt.models > 0 ? opt.models : 1000;
  Rng rng(opt.seed);
  SpectralChecks c;
  for (int k = 0; k < models; ++k) {
    const SpectralModel m = random_model(rng, 32);
    check_model(c, m, rng, true);
  }
  for (const SpectralModel &m : duplicate_fixtures()) {
    const bool merged = m.atoms.size() < m.p();
    const bool ok = check_model(c, m, rng, false);
    c.duplicates.flag(merged && ok, describe(m));
  }
  return c.results();
}

std::vector<CheckResult> dilog_suite(const SuiteOptions &opt) {
  const int points = opt.models > 0 ? opt.models : 100;
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  Rng rng(opt.seed);
  Tracker inv("dilog", "inversion identity", 1e-12);
  Tracker refl("dilog", "reflection identity", 1e-12);
  Tracker land("dilog", "Landen identity", 1e-12);
  Tracker expn("dilog", "second-order expansion", 1.0);
  Tracker fint("dilog", "F(X,Y;a) vs quadrature", 1e-9);

  // errors are scaled by the largest term when it exceeds one
  auto scaled = [](double resid, std::initializer_list<double> terms) {
    double big = 1.0;
    for (double t : terms) big = std::max(big, std::abs(t));
    return std::abs(resid) / big;
  };
  for (int k = 0; k < points; ++k) {
    const double x = -std::pow(10.0, uniform(rng, -6.0, 6.0));
    const double a = li2(1.0 / x), b = li2(x), l = 0.5 * std::pow(std::log(-x), 2);
    inv.add(scaled(a + b + l + pi2_6, {a, b, l}), std::to_string(x));
  }
  for (int k = 0; k < points; ++k) {
    const double x = uniform(rng, 1e-6, 1.0 - 1e-6);
    const double a = li2(1.0 - x), b = li2(x), l = std::log(x) * std::log1p(-x);
    refl.add(scaled(a + b + l - pi2_6, {a, b, l}), std::to_string(x));
  }
  for (int k = 0; k < points; ++k) {
    const double x = uniform(rng, 1e-6, 1.0 - 1e-6);
    const double a = li2(1.0 - x), b = li2(1.0 - 1.0 / x), l = 0.5 * std::pow(std::log(x), 2);
    land.add(scaled(a + b + l, {a, b, l}), std::to_string(x));
  }
  // residual / eps^3 minus the exact third-order coefficient, bounded by one
  const double eps = 1e-4;
  for (int k = 0; k < points; ++k) {
    double x = uniform(rng, -5.0, 0.9);
    if (std::abs(x) < 0.05) x += 0.1;
    const double l1 = std::log1p(-x);
    const double second = ((1.0 - x) * l1 + x) / (2.0 * (1.0 - x) * x * x);
    const double resid = li2(x + eps) - (li2(x) - eps * l1 / x + eps * eps * second);
    const double third = (-(1.0 - 2.0 * x) / (x * x * (1.0 - x) * (1.0 - x)) -
                          1.0 / (x * x * (1.0 - x)) - 2.0 * l1 / (x * x * x)) / 6.0;
    expn.add(std::abs(resid) / (eps * eps * eps) - std::abs(third), std::to_string(x));
  }

  const int triples = opt.models > 0 ? 2 * opt.models : 200;
  for (int k = 0; k < triples; ++k) {
    double X = 0, Y = 0, a = 0;
    switch (k % 4) {
    case 0: // X, Y >= a > 0
      a = std::pow(10.0, uniform(rng, -2.0, 2.0));
      X = a * (1.0 + std::pow(10.0, uniform(rng, -3.0, 1.0)));
      Y = (k % 8 == 0) ? a : a * (1.0 + std::pow(10.0, uniform(rng, -3.0, 1.0)));
      break;
    case 1: // X, Y > 0 > a
      a = -std::pow(10.0, uniform(rng, -2.0, 2.0));
      X = std::pow(10.0, uniform(rng, -2.0, 2.0));
      Y = std::pow(10.0, uniform(rng, -2.0, 2.0));
      break;
    case 2: // a < X, Y < 0
      a = -std::pow(10.0, uniform(rng, -2.0, 2.0));
      X = a * uniform(rng, 0.01, 0.99);
      Y = a * uniform(rng, 0.01, 0.99);
      break;
    default: // a = 0
      X = std::pow(10.0, uniform(rng, -2.0, 2.0));
      Y = std::pow(10.0, uniform(rng, -2.0, 2.0));
    }
    if (std::abs(X - Y) < 1e-3 * std::abs(X)) X *= 1.5;
    const double lo = std::min(X, Y), hi = std::max(X, Y);
    const double sign = X >= Y ? 1.0 : -1.0;
    // xc is the signed distance to the nearest endpoint; keeps log(x - a) exact near x = a
    const double q = sign * quad(
                                [a, lo](double x, double xc) {
                                  const double d = (xc < 0.0 && lo == a) ? -xc : x - a;
                                  return std::log(d) / x;
                                },
                                lo, hi);
    std::ostringstream os;
    os.precision(17);
    os << "X=" << X << " Y=" << Y << " a=" << a;
    fint.add(std::abs(f_integral(X, Y, a) - q) / std::abs(q), os.str());
  }
  return {inv.result(), refl.result(), land.result(), expn.result(), fint.result()};
}

std::vector<CheckResult> oracle_suite(const SuiteOptions &opt) {
  const int models = opt.models > 0 ? opt.models : 200;
  Rng rng(opt.seed);
  Tracker ident("oracle", "contour vs identity", 1e-7);
  Tracker logt("oracle", "contour vs log", 1e-7);
  Tracker l1p("oracle", "contour vs log1p s=0.1,1,10", 1e-7);
  Tracker log2("oracle", "contour vs log^2 exact", 1e-7);
  Tracker known("oracle", "known-C1 contour vs closed forms", 1e-7);
  Tracker stable("oracle", "contour placement invariance", 1e-9);
  for (int k = 0; k < models; ++k) {
    const SpectralModel m = random_model(rng, 16);
    const std::string tag = describe(m);
    auto diff = [&](const FunctionalSpec &f, const EstimateReport &closed,
                    bool c1_known = false) {
      return std::abs(est_contour(m, f, {}, c1_known).value - closed.value);
    };
    ident.add(diff(FunctionalSpec::identity(), est_identity(m)), tag);
    logt.add(diff(FunctionalSpec::log(), est_log(m)), tag);
    for (double s : {0.1, 1.0, 10.0})
      l1p.add(diff(FunctionalSpec::log1p(s), est_log1p(m, s)), tag);
    log2.add(diff(FunctionalSpec::log_squared(), est_log2_exact(m)), tag);
    known.add(std::max({diff(FunctionalSpec::identity(), est_identity(m, true), true),
                        diff(FunctionalSpec::log(), est_log(m, true), true),
                        diff(FunctionalSpec::log1p(1.0), est_log1p(m, 1.0, true), true)}),
              tag);
    if (k < 20) {
      const auto f = FunctionalSpec::log_squared();
      const double base = est_contour(m, f).value;
      ContourConfig wide, narrow, dense;
      wide.left_margin = 0.4;
      wide.right_margin = 2.4;
      narrow.left_margin = 0.6;
      narrow.right_margin = 1.6;
      dense.points = 4096;
      stable.add(std::max({std::abs(est_contour(m, f, wide).value - base),
                           std::abs(est_contour(m, f, narrow).value - base),
                           std::abs(est_contour(m, f, dense).value - base)}),
                 tag);
    }
  }
  return {ident.result(), logt.result(), l1p.result(),
          log2.result(),  known.result(), stable.result()};
}

std::vector<CheckResult> limits_suite(const SuiteOptions &opt) {
  const int models = opt.models > 0 ? opt.models : 50;
  Rng rng(opt.seed);
  Tracker big("limits", "log1p(s) - log s -> log as s -> inf", 1e-3);
  Tracker small("limits", "log1p(s)/s -> identity as s -> 0", 1e-3);
  Tracker mono("limits", "limit gaps decrease monotonically", 0.0);
  Tracker bracket("limits", "kappa0 inside (-1/(s(1-c1)), 0)", 0.0);
  Tracker cont("limits", "known-C1 equals c1 = 1e-8", 1e-5);
  for (int k = 0; k < models; ++k) {
    const SpectralModel m = random_model(rng, 32);
    const std::string tag = describe(m);
    const double lg = est_log(m).value, id = est_identity(m).value;
    auto gap_big = [&](double s) {
      return std::abs(est_log1p(m, s).value - std::log(s) - lg);
    };
    auto gap_small = [&](double s) {
      return std::abs(est_log1p(m, s).value / s - id) / std::abs(id);
    };
    const double b2 = gap_big(1e2), b4 = gap_big(1e4), b6 = gap_big(1e6);
    const double s2 = gap_small(1e-2), s4 = gap_small(1e-4), s6 = gap_small(1e-6);
    big.add(b6, tag);
    small.add(s6, tag);
    mono.flag(b2 > b4 && b4 > b6 && s2 > s4 && s4 > s6, tag);
    for (double s : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) {
      const double k0 = find_kappa0(m, s);
      bracket.flag(k0 > -1.0 / (s * (1.0 - m.c1())) && k0 < 0.0, tag);
    }
    const SpectralModel tiny = make_model(m.lambda, std::int64_t(m.p()) * 100000000LL, m.n2);
    cont.add(std::max({std::abs(est_identity(m, true).value - est_identity(tiny).value),
                       std::abs(est_log(m, true).value - est_log(tiny).value),
                       std::abs(est_log1p(m, 1.0, true).value - est_log1p(tiny, 1.0).value),
                       std::abs(est_log2_approx(m, true).value -
                                est_log2_approx(tiny).value)}),
             tag);
  }
  return {big.result(), small.result(), mono.result(), bracket.result(), cont.result()};
}

std::vector<CheckResult> run_suite(const std::string &suite, const SuiteOptions &opt) {
  std::vector<CheckResult> out;
  auto append = [&out](std::vector<CheckResult> v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  const bool all = suite == "all";
  if (all || suite == "spectral") append(spectral_suite(opt));
  if (all || suite == "dilog") append(dilog_suite(opt));
  if (all || suite == "oracle") append(oracle_suite(opt));
  if (all || suite == "limits") append(limits_suite(opt));
  if (!all && suite != "spectral" && suite != "dilog" && suite != "oracle" &&
      suite != "limits")
    throw std::invalid_argument("unknown suite: " + suite);
  return out;
}

bool all_passed(const std::vector<CheckResult> &checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult &c) { return c.passed; });
}

} // namespace specdist::verify
