#include <doctest.h>

#include <algorithm>
#include <random>

#include "specdist/spectral.hpp"
#include "verify_suites.hpp"

using namespace specdist;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::MatrixXd gaussian(Eigen::Index p, Eigen::Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(p, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) m(i, j) = g(rng);
  return m;
}

} // namespace

TEST_SUITE("spectral") {

TEST_CASE("identical samples give a unit spectrum") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = gaussian(5, 12, rng);
  const SpectralModel m = sample_eigenvalues(x, x);
  for (Eigen::Index i = 0; i < m.p(); ++i) CHECK(m.lambda(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diagonal covariances") {
  Eigen::MatrixXd x1(2, 4), x2(2, 4);
  const double r = std::sqrt(2.0), b = std::sqrt(6.0);
  x1 << r, -r, 0, 0, 0, 0, r, -r;
  x2 << 2, -2, 0, 0, 0, 0, b, -b;
  const SpectralModel m = sample_eigenvalues(x1, x2);
  CHECK(m.lambda(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.lambda(1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(m.c1() == 0.5);
}

TEST_CASE("whitened spectrum matches a general eigen-solver") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd x1 = gaussian(4, 8, rng), x2 = gaussian(4, 8, rng);
  const Eigen::MatrixXd c1 = x1 * x1.transpose() / 8.0, c2 = x2 * x2.transpose() / 8.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(c1.inverse() * c2);
  std::vector<double> ref;
  for (Eigen::Index i = 0; i < 4; ++i) ref.push_back(es.eigenvalues()(i).real());
  std::sort(ref.begin(), ref.end());
  const SpectralModel m = sample_eigenvalues(x1, x2);
  for (Eigen::Index i = 0; i < 4; ++i)
    CHECK(std::abs(m.lambda(i) / ref[std::size_t(i)] - 1.0) < 1e-10);
}

TEST_CASE("complex samples match a general eigen-solver") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd x1 =
      gaussian(3, 9, rng).cast<cplx>() + cplx(0, 1) * gaussian(3, 9, rng).cast<cplx>();
  const Eigen::MatrixXcd x2 =
      gaussian(3, 7, rng).cast<cplx>() + cplx(0, 1) * gaussian(3, 7, rng).cast<cplx>();
  const Eigen::MatrixXcd c1 = x1 * x1.adjoint() / 9.0, c2 = x2 * x2.adjoint() / 7.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c1.inverse() * c2);
  std::vector<double> ref;
  for (Eigen::Index i = 0; i < 3; ++i) ref.push_back(es.eigenvalues()(i).real());
  std::sort(ref.begin(), ref.end());
  const SpectralModel m = sample_eigenvalues(x1, x2);
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK(std::abs(m.lambda(i) / ref[std::size_t(i)] - 1.0) < 1e-10);
}

TEST_CASE("input validation") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = gaussian(3, 6, rng), b = gaussian(4, 6, rng);
  CHECK_THROWS_AS(sample_eigenvalues(a, b), DimensionMismatch);
  CHECK_THROWS_AS(sample_eigenvalues(gaussian(3, 3, rng), a), DomainError);
  Eigen::MatrixXd bad = a;
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(sample_eigenvalues(bad, a), NonFinite);
  Eigen::MatrixXd singular = a;
  singular.row(2).setZero();
  CHECK_THROWS_AS(sample_eigenvalues(singular, a), SingularC1);
  CHECK_THROWS_AS(make_model(vec({0.0, 1.0}), 10, 10), NonPositiveEigenvalue);
  CHECK_NOTHROW(make_model(vec({0.0, 1.0}), 10, 2));
}

TEST_CASE("near-equal eigenvalues are merged") {
  const SpectralModel m = make_model(vec({3.0, 1.0, 1.0 + 1e-15, 2.0}), 10, 10);
  CHECK(m.p() == 4);
  CHECK(m.atoms.size() == 3);
  CHECK(m.weights(0) == doctest::Approx(0.5));
  CHECK(m.lambda(3) == 3.0);
}

TEST_CASE("stieltjes against extended-precision summation") {
  const SpectralModel m = make_model(vec({1.0, 2.0, 4.0}), 10, 10);
  const std::complex<long double> z(-1.0L, 1.0L);
  std::complex<long double> ref = 0;
  for (long double l : {1.0L, 2.0L, 4.0L}) ref += 1.0L / (l - z);
  ref /= 3.0L;
  const cplx v = stieltjes(m, {-1.0, 1.0});
  CHECK(std::abs(v.real() - double(ref.real())) < 1e-15);
  CHECK(std::abs(v.imag() - double(ref.imag())) < 1e-15);
}

TEST_CASE("derivatives against central differences") {
  const SpectralModel m = make_model(vec({0.7, 1.3, 2.5}), 9, 12);
  const cplx z(0.5, 0.5);
  const double h = 1e-6;
  auto fd = [&](cplx (*f)(const SpectralModel &, cplx)) {
    return (f(m, z + h) - f(m, z - h)) / (2.0 * h);
  };
  CHECK(std::abs(fd(phi) / phi_prime(m, z) - 1.0) < 1e-6);
  CHECK(std::abs(fd(psi) / psi_prime(m, z) - 1.0) < 1e-6);
  CHECK(std::abs(fd(stieltjes) / stieltjes_prime(m, z) - 1.0) < 1e-6);
}

TEST_CASE("evaluation at an eigenvalue throws") {
  const SpectralModel m = make_model(vec({1.0, 2.0}), 9, 12);
  CHECK_THROWS_AS(stieltjes(m, 2.0), PoleHit);
}

TEST_CASE("support points for p = 1") {
  // phi = 0 and psi = 0 solved by hand: eta = lambda/(1-c1), zeta = (1-c2) lambda
  const SpectralModel m = make_model(vec({1.0}), 2, 2);
  const SupportPoints sp = support_points(m);
  CHECK(sp.eta(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sp.zeta(0) == doctest::Approx(0.5).epsilon(1e-14));
  const SupportPoints ro = support_points_rank_one(m);
  CHECK(ro.eta(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ro.zeta(0) == doctest::Approx(0.5).epsilon(1e-14));
  const SpectralModel m2 = make_model(vec({3.0}), 4, 5);
  CHECK(support_points(m2).eta(0) == doctest::Approx(3.0 / 0.75).epsilon(1e-14));
  CHECK(support_points(m2).zeta(0) == doctest::Approx(3.0 * 0.8).epsilon(1e-14));
}

TEST_CASE("zeta requires c2 < 1") {
  const SpectralModel m = make_model(vec({1.0, 2.0}), 10, 2);
  CHECK_THROWS_AS(support_points(m), DomainError);
  CHECK(support_points(m, false).eta.size() == 2);
}

TEST_CASE("identity suite on random and degenerate models") {
  verify::SuiteOptions opt;
  opt.models = 200;
  opt.seed = 42;
  for (const auto &c : verify::spectral_suite(opt)) {
    INFO(c.name, " worst=", c.worst, " ", c.detail);
    CHECK(c.passed);
  }
}

}
