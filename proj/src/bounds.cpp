#include "oodt/bounds.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "oodt/io.hpp"

namespace oodt {

double gamma_p(double order) {
  if (!(order >= 1.0 && order <= 2.0)) {
    throw std::invalid_argument("gamma_p: order must lie in [1, 2]");
  }
  if (order == 2.0) return 3.0 - 2.0 * std::sqrt(2.0);
  return 1.0;
}

BoundParams BoundParams::make(double order, double phi_prime, double delta_m,
                              double lambda, double delta_limit) {
  if (!(phi_prime > 0.0)) {
    throw std::invalid_argument("BoundParams: phi_prime must be positive");
  }
  if (delta_m < 0.0 || lambda < 0.0 || delta_limit < 0.0) {
    throw std::invalid_argument("BoundParams: scaled distances must be >= 0");
  }
  BoundParams params;
  params.order = order;
  params.gamma = oodt::gamma_p(order);
  params.phi_prime = phi_prime;
  params.delta_m = delta_m;
  params.lambda = lambda;
  params.delta_limit = delta_limit;
  return params;
}

double bolley_tail(double epsilon, int n_points, const BoundParams& params) {
  if (epsilon < 0.0) {
    throw std::invalid_argument("bolley_tail: epsilon must be >= 0");
  }
  if (n_points < 1) {
    throw std::invalid_argument("bolley_tail: N must be positive");
  }
  const double exponent = -params.gamma * 0.5 * params.phi_prime *
                          static_cast<double>(n_points) * epsilon * epsilon;
  const double value = std::exp(exponent);
  return std::min(std::max(value, 0.0), 1.0);
}

double power_lower_bound(const BoundParams& params) {
  if (params.delta_m < params.lambda) {
    throw std::invalid_argument(
        "power_lower_bound: requires delta_m >= lambda");
  }
  const double gap = params.delta_m - params.lambda;
  const double value =
      1.0 - std::exp(-params.gamma * 0.5 * params.phi_prime * gap * gap);
  return std::min(std::max(value, 0.0), 1.0);
}

double power_upper_bound_intermediate(const BoundParams& params) {
  if (!(params.delta_limit < params.lambda)) {
    throw std::invalid_argument(
        "power_upper_bound_intermediate: requires delta < lambda");
  }
  const double gap = params.lambda - params.delta_limit;
  const double value =
      std::exp(-params.gamma * 0.5 * params.phi_prime * gap * gap);
  return std::min(std::max(value, 0.0), 1.0);
}

double worst_case_power(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("worst_case_power: alpha must lie in [0, 1]");
  }
  return alpha;
}

std::string bound_report_csv(const std::vector<BoundReportRow>& rows) {
  std::ostringstream out;
  out << "regime,p,gamma_p,phi_prime,delta_m,lambda,delta_limit,bound,"
         "empirical_power,se\n";
  for (const BoundReportRow& row : rows) {
    out << row.regime << ',' << format_double(row.order) << ','
        << format_double(row.gamma) << ',' << format_double(row.phi_prime)
        << ',' << format_double(row.delta_m) << ','
        << format_double(row.lambda) << ',';
    if (row.delta_limit) out << format_double(*row.delta_limit);
    out << ',' << format_double(row.bound) << ','
        << format_double(row.empirical_power) << ',' << format_double(row.se)
        << '\n';
  }
  return out.str();
}

}  // namespace oodt
