#include <doctest.h>

#include <cmath>
#include <random>

#include "specdist/distances.hpp"
#include "specdist/simharness.hpp"
#include "verify_suites.hpp"

using namespace specdist;

namespace {

const DistanceKind kAll[] = {
    {DistanceType::FisherSq, 0.5},
    {DistanceType::Bhattacharyya, 0.5},
    {DistanceType::KL, 0.5},
    {DistanceType::Renyi, 0.3},
};

} // namespace

TEST_SUITE("distances") {

TEST_CASE("equal covariances have zero distance") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(6);
  for (const auto &k : kAll) {
    CHECK(population_distance(ones, k) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(population_distance(ones, k, KLConvention::Standard) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("population Fisher distance of the Toeplitz model") {
  const DistanceKind f{DistanceType::FisherSq, 0.5};
  const double p2 = (std::pow(std::log(0.7), 2) + std::pow(std::log(1.3), 2)) / 2.0;
  CHECK(population_distance(toeplitz_spectrum(2, 0.3), f) == doctest::Approx(p2).epsilon(1e-14));
  CHECK(std::abs(population_distance(toeplitz_spectrum(2, 0.3), f) - 0.0980) < 1e-3);
  CHECK(std::abs(population_distance(toeplitz_spectrum(512, 0.3), f) - 0.1927) < 1e-3);
}

TEST_CASE("Renyi tends to KL as alpha -> 1") {
  const Eigen::VectorXd nu = toeplitz_spectrum(16, 0.5);
  const double kl = population_distance(nu, {DistanceType::KL, 0.5});
  CHECK(std::abs(population_distance(nu, DistanceKind::renyi(0.999)) - kl) < 1e-2);
  CHECK_THROWS_AS(DistanceKind::renyi(1.0), DomainError);
  CHECK_THROWS_AS(DistanceKind::renyi(0.0), DomainError);
}

TEST_CASE("KL conventions differ by the log term") {
  const Eigen::VectorXd nu = toeplitz_spectrum(8, 0.4);
  const double elog = nu.array().log().mean();
  const DistanceKind kl{DistanceType::KL, 0.5};
  CHECK(population_distance(nu, kl) - population_distance(nu, kl, KLConvention::Standard) ==
        doctest::Approx(elog).epsilon(1e-13));
}

TEST_CASE("plug-in on the population spectrum reproduces the population value") {
  const Eigen::VectorXd nu = toeplitz_spectrum(10, 0.3);
  const SpectralModel m = make_model(nu, 100, 100);
  DistanceOptions opts;
  opts.method = DistanceMethod::PlugIn;
  for (const auto &k : kAll)
    CHECK(distance(m, k, opts).value == doctest::Approx(population_distance(nu, k)).epsilon(1e-14));
}

TEST_CASE("RMT and plug-in agree for vanishing ratios") {
  // the gap is a first-order correction, linear in c = p/n
  const Eigen::VectorXd nu = toeplitz_spectrum(4, 0.3);
  const SpectralModel m = make_model(nu, 4000000, 4000000);
  const SpectralModel m10 = make_model(nu, 400000, 400000);
  DistanceOptions rmt, plug;
  plug.method = DistanceMethod::PlugIn;
  for (const auto &k : kAll) {
    const double gap = distance(m, k, rmt).value - distance(m, k, plug).value;
    const double gap10 = distance(m10, k, rmt).value - distance(m10, k, plug).value;
    CHECK(gap10 / gap == doctest::Approx(10.0).epsilon(1e-2));
    if (k.type != DistanceType::FisherSq) CHECK(std::abs(gap) < 1e-6);
    else CHECK(std::abs(gap) < 3e-6);
  }
}

TEST_CASE("distances compose the contour oracles") {
  std::mt19937_64 rng(31);
  DistanceOptions rmt, contour, exact;
  contour.method = DistanceMethod::Contour;
  exact.fisher_exact = true;
  for (int i = 0; i < 20; ++i) {
    const SpectralModel m = verify::random_model(rng, 12);
    for (const auto &k : kAll) {
      const DistanceOptions &ref = k.type == DistanceType::FisherSq ? exact : rmt;
      CHECK(std::abs(distance(m, k, ref).value - distance(m, k, contour).value) < 1e-7);
    }
  }
}

TEST_CASE("log-type distances need c2 < 1") {
  const SpectralModel m = make_model(Eigen::VectorXd::LinSpaced(4, 1.0, 2.0), 10, 3);
  CHECK_THROWS_AS(distance(m, {DistanceType::FisherSq, 0.5}), DomainError);
}

}
