#include "specdist/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace specdist {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kPoleGuard = 1e-13;
constexpr int kMaxBisect = 200;

template <typename Matrix>
Eigen::VectorXd whiten_impl(const Matrix &x1, const Matrix &x2) {
  const Eigen::Index p = x1.rows();
  Matrix c1 = Matrix::Zero(p, p);
  c1.template selfadjointView<Eigen::Lower>().rankUpdate(x1,
                                                         1.0 / double(x1.cols()));
  Eigen::LLT<Matrix> llt(c1);
  if (llt.info() != Eigen::Success)
    throw SingularC1("Cholesky factorization of the first sample covariance failed");
  const auto diag = llt.matrixLLT().diagonal().real();
  if (!(diag.minCoeff() > 1e-14 * diag.maxCoeff()))
    throw SingularC1("first sample covariance is numerically singular");

  Matrix y = llt.matrixL().solve(x2);
  Matrix w = Matrix::Zero(p, p);
  w.template selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / double(x2.cols()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw FactorizationFailure("self-adjoint eigensolver did not converge");

  Eigen::VectorXd lam = es.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 0.0);
  for (auto &v : lam)
    if (v < kMergeTol * top) v = 0.0;
  return lam;
}

void check_pole(const SpectralModel &model, double a, cplx z) {
  if (std::abs(z - a) < kPoleGuard * model.lambda_max())
    throw PoleHit("evaluation point within pole guard of a sample eigenvalue");
}

// h(x) = sum_j w_j a_j / (a_j - x) evaluated at anchor + t, using
// precomputed offsets d_j = a_j - anchor so that t near 0 keeps full precision.
double secular_h(const Eigen::VectorXd &atoms, const Eigen::VectorXd &w,
                 const Eigen::VectorXd &d, double t) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < atoms.size(); ++j)
    if (atoms(j) > 0.0) s += w(j) * atoms(j) / (d(j) - t);
  return s;
}

// Root of h(x) = target on (left, right) where h - target is increasing,
// negative at left and positive at right. Endpoints flagged as poles are
// never evaluated.
double secular_root(const SpectralModel &model, double left, double right,
                    bool left_pole, bool right_pole, double target) {
  const auto &a = model.atoms;
  const auto &w = model.weights;
  auto h_abs = [&](double x) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a(j) > 0.0) s += w(j) * a(j) / (a(j) - x);
    return s;
  };

  double anchor = left;
  if (left_pole && right_pole) {
    const double mid = 0.5 * (left + right);
    anchor = (h_abs(mid) - target < 0.0) ? right : left;
  } else if (right_pole) {
    anchor = right;
  }

  const Eigen::VectorXd d = a.array() - anchor;
  double lo = left - anchor, hi = right - anchor;
  if (!right_pole && secular_h(a, w, d, hi) - target < 0.0)
    throw BracketFailure("secular root not bracketed on the right");
  if (!left_pole && secular_h(a, w, d, lo) - target > 0.0)
    throw BracketFailure("secular root not bracketed on the left");

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisect; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (secular_h(a, w, d, mid) - target < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::abs(lo), std::abs(hi)))
      break;
  }
  return anchor + 0.5 * (lo + hi);
}

std::vector<Eigen::Index> positive_atoms(const SpectralModel &model) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < model.atoms.size(); ++k)
    if (model.atoms(k) > 0.0) idx.push_back(k);
  return idx;
}

} // namespace

double SpectralModel::lambda_min_positive() const {
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) > 0.0) return lambda(i);
  throw NonPositiveEigenvalue("no positive eigenvalue");
}

double SpectralModel::zero_weight() const {
  double z = 0.0;
  for (Eigen::Index k = 0; k < atoms.size(); ++k)
    if (atoms(k) == 0.0) z += weights(k);
  return z;
}

SpectralModel make_model(Eigen::VectorXd lambda, std::int64_t n1,
                         std::int64_t n2) {
  const Eigen::Index p = lambda.size();
  if (p < 1) throw DomainError("p must be positive");
  if (n1 <= p) throw DomainError("n1 must exceed p");
  if (n2 < 1) throw DomainError("n2 must be positive");
  if (!lambda.allFinite()) throw NonFinite("eigenvalues contain NaN or Inf");
  std::sort(lambda.begin(), lambda.end());
  if (lambda(0) < 0.0)
    throw NonPositiveEigenvalue("negative eigenvalue");
  if (lambda(p - 1) <= 0.0)
    throw NonPositiveEigenvalue("all eigenvalues are zero");
  if (lambda(0) == 0.0 && p < n2)
    throw NonPositiveEigenvalue("zero eigenvalue with c2 < 1");

  SpectralModel m;
  m.n1 = n1;
  m.n2 = n2;
  const double tol = kMergeTol * lambda(p - 1);
  std::vector<double> atoms, weights;
  std::vector<Eigen::Index> starts;
  for (Eigen::Index i = 0; i < p;) {
    Eigen::Index j = i + 1;
    while (j < p && lambda(j) - lambda(j - 1) < tol) ++j;
    const double v =
        lambda(i) == 0.0 ? 0.0 : lambda.segment(i, j - i).mean();
    lambda.segment(i, j - i).setConstant(v);
    atoms.push_back(v);
    weights.push_back(double(j - i) / double(p));
    i = j;
  }
  m.lambda = std::move(lambda);
  m.atoms = Eigen::Map<Eigen::VectorXd>(atoms.data(), Eigen::Index(atoms.size()));
  m.weights =
      Eigen::Map<Eigen::VectorXd>(weights.data(), Eigen::Index(weights.size()));
  return m;
}

namespace detail {
Eigen::VectorXd whitened_spectrum(const Eigen::MatrixXd &x1,
                                  const Eigen::MatrixXd &x2) {
  return whiten_impl(x1, x2);
}
Eigen::VectorXd whitened_spectrum(const Eigen::MatrixXcd &x1,
                                  const Eigen::MatrixXcd &x2) {
  return whiten_impl(x1, x2);
}
} // namespace detail

cplx stieltjes(const SpectralModel &model, cplx z) {
  cplx s = 0.0;
  for (Eigen::Index k = 0; k < model.atoms.size(); ++k) {
    check_pole(model, model.atoms(k), z);
    s += model.weights(k) / (model.atoms(k) - z);
  }
  return s;
}

cplx stieltjes_prime(const SpectralModel &model, cplx z) {
  cplx s = 0.0;
  for (Eigen::Index k = 0; k < model.atoms.size(); ++k) {
    check_pole(model, model.atoms(k), z);
    const cplx d = model.atoms(k) - z;
    s += model.weights(k) / (d * d);
  }
  return s;
}

Transforms transforms(const SpectralModel &model, double c1, cplx z) {
  const double c2 = model.c2();
  // M = z m(z), K = z^2 m'(z), P = sum w a/(a-z)^2; zero atoms contribute
  // the constants -w, w and 0 exactly.
  cplx M = 0.0, K = 0.0, P = 0.0;
  for (Eigen::Index k = 0; k < model.atoms.size(); ++k) {
    const double a = model.atoms(k), w = model.weights(k);
    if (a == 0.0) {
      M -= w;
      K += w;
      continue;
    }
    check_pole(model, a, z);
    const cplx r = 1.0 / (a - z);
    const cplx zr = z * r;
    M += w * zr;
    K += w * zr * zr;
    P += w * a * r * r;
  }
  Transforms t;
  t.phi = z * (1.0 + c1 * M);
  t.psi = 1.0 - c2 - c2 * M;
  t.phi_prime = 1.0 + 2.0 * c1 * M + c1 * K;
  t.psi_prime = -c2 * P;
  return t;
}

cplx phi(const SpectralModel &model, cplx z) {
  return transforms(model, model.c1(), z).phi;
}
cplx psi(const SpectralModel &model, cplx z) {
  return transforms(model, model.c1(), z).psi;
}
cplx phi_prime(const SpectralModel &model, cplx z) {
  return transforms(model, model.c1(), z).phi_prime;
}
cplx psi_prime(const SpectralModel &model, cplx z) {
  return transforms(model, model.c1(), z).psi_prime;
}

Eigen::VectorXd eta_points(const SpectralModel &model, double c1) {
  if (!(c1 > 0.0 && c1 < 1.0)) throw DomainError("c1 must lie in (0,1)");
  const auto &a = model.atoms;
  const auto pos = positive_atoms(model);
  const double target = 1.0 - 1.0 / c1;
  Eigen::VectorXd eta(model.p());
  Eigen::Index out = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const auto mult = Eigen::Index(std::lround(model.weights(k) * double(model.p())));
    if (a(k) == 0.0) {
      eta.segment(out, mult).setZero();
      out += mult;
    }
  }
  for (std::size_t q = 0; q < pos.size(); ++q) {
    const Eigen::Index k = pos[q];
    const auto mult = Eigen::Index(std::lround(model.weights(k) * double(model.p())));
    eta.segment(out, mult - 1).setConstant(a(k));
    out += mult - 1;
    double root;
    if (q + 1 < pos.size())
      root = secular_root(model, a(k), a(pos[q + 1]), true, true, target);
    else
      root = secular_root(model, a(k), a(k) / (1.0 - c1) * (1.0 + 1e-10), true,
                          false, target);
    eta(out++) = root;
  }
  return eta;
}

SupportPoints support_points(const SpectralModel &model, bool with_zeta) {
  SupportPoints sp;
  sp.eta = eta_points(model, model.c1());
  const double c2 = model.c2();
  if (c2 >= 1.0) {
    if (with_zeta) throw DomainError("zeta points require c2 < 1");
    return sp;
  }
  const auto &a = model.atoms;
  const double target = 1.0 / c2;
  sp.zeta.resize(model.p());
  Eigen::Index out = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const auto mult = Eigen::Index(std::lround(model.weights(k) * double(model.p())));
    if (k == 0)
      sp.zeta(out++) = secular_root(model, 0.0, a(0), false, true, target);
    else
      sp.zeta(out++) = secular_root(model, a(k - 1), a(k), true, true, target);
    sp.zeta.segment(out, mult - 1).setConstant(a(k));
    out += mult - 1;
  }

#ifndef NDEBUG
  const SupportPoints ref = support_points_rank_one(model);
  const double tol = 1e-8 * model.lambda_max();
  if ((ref.eta - sp.eta).cwiseAbs().maxCoeff() > tol ||
      (ref.zeta - sp.zeta).cwiseAbs().maxCoeff() > tol)
    throw BracketFailure("secular roots disagree with rank-one eigenvalues");
#endif
  return sp;
}

SupportPoints support_points_rank_one(const SpectralModel &model) {
  const Eigen::VectorXd &lam = model.lambda;
  const Eigen::VectorXd s = lam.cwiseSqrt();
  const Eigen::MatrixXd base = lam.asDiagonal();
  SupportPoints sp;
  Eigen::MatrixXd up = base + s * s.transpose() / double(model.n1 - model.p());
  sp.eta = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(up, Eigen::EigenvaluesOnly)
               .eigenvalues();
  if (model.c2() < 1.0) {
    Eigen::MatrixXd down = base - s * s.transpose() / double(model.n2);
    sp.zeta =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(down, Eigen::EigenvaluesOnly)
            .eigenvalues();
  }
  return sp;
}

double psi_root_below(const SpectralModel &model) {
  const double target = 1.0 / model.c2();
  const double top = model.lambda_min_positive();
  const auto &a = model.atoms;
  const auto &w = model.weights;
  auto h = [&](double x) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a(j) > 0.0) s += w(j) * a(j) / (a(j) - x);
    return s;
  };
  double left = -top;
  for (int it = 0; h(left) >= target; ++it) {
    if (it > 200) throw BracketFailure("no root of psi below the spectrum");
    left *= 2.0;
  }
  return secular_root(model, left, top, false, true, target);
}

} // namespace specdist
