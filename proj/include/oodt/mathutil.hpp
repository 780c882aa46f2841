#pragma once

#include <vector>

namespace oodt {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile (Acklam's rational approximation, relative error
/// below 1.2e-9 after one Halley refinement step).
double norm_quantile(double p);

/// Empirical quantile with linear interpolation between order statistics
/// (type 7). q in [0, 1]; input is copied and sorted internally.
double empirical_quantile(std::vector<double> values, double q);

}  // namespace oodt
