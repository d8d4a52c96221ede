#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "specdist/dilog.hpp"
#include "specdist/errors.hpp"
#include "verify_suites.hpp"

using namespace specdist;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// sum_{k<=n} x^k/k^2 in long double, averaged with the previous partial sum
// (alternating tails then cancel to second order)
long double series(long double x, long n) {
  long double s = 0, prev = 0, term = 1;
  for (long k = 1; k <= n; ++k) {
    term *= x;
    prev = s;
    s += term / ((long double)k * k);
  }
  return x < 0 ? 0.5L * (s + prev) : s;
}

double quad(double (*f)(double, double, double), double X, double Y, double a) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double lo = std::min(X, Y), hi = std::max(X, Y);
  const double v = ts.integrate([&](double x) { return f(x, a, 0); }, lo, hi, 1e-15);
  return X >= Y ? v : -v;
}

double log_shift(double x, double a, double) { return std::log(x - a) / x; }

} // namespace

TEST_SUITE("dilog") {

TEST_CASE("special values") {
  CHECK(li2(0.0) == 0.0);
  CHECK(li2(1.0) == doctest::Approx(kPi2 / 6.0).epsilon(1e-15));
  CHECK(std::abs(li2(-1.0) - double(series(-1.0L, 1000000))) < 1e-13);
  CHECK(std::abs(li2(-1.0) + kPi2 / 12.0) < 1e-13);
}

TEST_CASE("matches the defining series") {
  for (double x : {-0.99, -0.75, -0.5, -0.3, 0.1, 0.45, 0.5, 0.6, 0.8, 0.95})
    CHECK(std::abs(li2(x) - double(series(x, 1000000))) < 1e-13);
}

TEST_CASE("matches the defining integral for large negative arguments") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double x : {-1.5, -2.0, -3.7, -10.0, -250.0}) {
    const double ref = -ts.integrate([](double u) { return std::log1p(-u) / u; }, x, 0.0, 1e-15);
    CHECK(std::abs(li2(x) + ref) < 1e-13 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("domain") {
  CHECK_THROWS_AS(li2(1.5), DomainError);
}

TEST_CASE("F(X,Y;a) cases") {
  CHECK(f_integral(3.0, 2.0, 0.0) ==
        doctest::Approx(0.5 * (std::pow(std::log(3.0), 2) - std::pow(std::log(2.0), 2))));
  CHECK(std::abs(f_integral(3.0, 2.0, 1.0) - quad(log_shift, 3.0, 2.0, 1.0)) < 1e-10);
  CHECK(std::abs(f_integral(0.5, 4.0, -2.0) - quad(log_shift, 0.5, 4.0, -2.0)) < 1e-10);
  CHECK(std::abs(f_integral(-0.5, -1.5, -3.0) - quad(log_shift, -0.5, -1.5, -3.0)) < 1e-10);
  CHECK_THROWS_AS(f_integral(1.0, 3.0, 2.0), CaseError);
  CHECK_THROWS_AS(f_integral(-1.0, 2.0, 0.5), CaseError);
}

TEST_CASE("identity suite") {
  for (const auto &c : verify::dilog_suite({})) {
    INFO(c.name, " worst=", c.worst, " ", c.detail);
    CHECK(c.passed);
  }
}

}
