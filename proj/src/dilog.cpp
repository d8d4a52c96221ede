#include "specdist/dilog.hpp"

#include <cmath>
#include <numbers>

#include "specdist/errors.hpp"

namespace specdist {

namespace {

constexpr double kPi2_6 = std::numbers::pi * std::numbers::pi / 6.0;

// sum x^k / k^2 for |x| <= 1/2
double li2_series(double x) {
  double term = x, sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double add = term / (double(k) * double(k));
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= x;
  }
  return sum;
}

} // namespace

double li2(double x) {
  if (std::isnan(x)) return x;
  if (x > 1.0) throw DomainError("li2 argument must be <= 1");
  if (x == 1.0) return kPi2_6;
  if (std::abs(x) <= 0.5) return li2_series(x);
  if (x > 0.5) // reflection
    return kPi2_6 - std::log(x) * std::log1p(-x) - li2_series(1.0 - x);
  if (x < -2.0) { // inversion, 1/x in (-1/2, 0)
    const double l = std::log(-x);
    return -li2_series(1.0 / x) - 0.5 * l * l - kPi2_6;
  }
  // x in [-2, -1/2): Landen, x/(x-1) in [1/3, 2/3]
  const double l = std::log1p(-x);
  return -li2(x / (x - 1.0)) - 0.5 * l * l;
}

double f_integral(double X, double Y, double a) {
  if (a == 0.0 && X > 0.0 && Y > 0.0) {
    const double lx = std::log(X), ly = std::log(Y);
    return 0.5 * (lx * lx - ly * ly);
  }
  if (a > 0.0 && X >= a && Y >= a) {
    const double lx = std::log(X), ly = std::log(Y);
    return li2(a / X) - li2(a / Y) + 0.5 * (lx * lx - ly * ly);
  }
  if (a < 0.0 && X * Y > 0.0 && a < X && a < Y)
    return -li2(X / a) + li2(Y / a) + std::log(X / Y) * std::log(-a);
  throw CaseError("F(X,Y;a) arguments match no supported configuration");
}

} // namespace specdist
