#pragma once

// Integer-order Bessel and Hankel functions of real argument.

#include <vector>

#include "wifield/types.hpp"

namespace wifield::specfun {

enum class BesselKind { J, Y };

/// J_order(x) or Y_order(x) for order 0 or 1. Absolute error below 1e-10 on (0, 50].
/// Throws std::domain_error for Y at x <= 0, negative x for J, NaN input or other orders.
double bessel(BesselKind kind, int order, double x);

/// Hankel function of the second kind, J_order(x) - j Y_order(x), order 0 or 1, x > 0.
cplx hankel2(int order, double x);

/// J_0(x) .. J_max_order(x) by normalized backward recurrence. x >= 0.
std::vector<double> bessel_j_sequence(int max_order, double x);

/// Y_0(x) .. Y_max_order(x) by forward recurrence (stable for Y). x > 0.
/// Entries overflow to -inf once the order is far beyond x.
std::vector<double> bessel_y_sequence(int max_order, double x);

/// Argument above which the large-argument expansion is used.
inline constexpr double kAsymptoticSwitch = 25.0;

}  // namespace wifield::specfun
