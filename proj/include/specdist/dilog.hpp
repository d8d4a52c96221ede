#pragma once

namespace specdist {

/// Real dilogarithm Li2(x) = -int_0^x log(1-u)/u du, for x <= 1.
double li2(double x);

/// F(X,Y;a) = int_Y^X log(x-a)/x dx on the configurations
///   X,Y >= a > 0;  X,Y > 0 > a;  XY > 0 with a < min(X,Y) < 0;  a = 0 < X,Y.
/// Throws CaseError otherwise.
double f_integral(double X, double Y, double a);

} // namespace specdist
