#pragma once

#include <optional>
#include <string>
#include <vector>

namespace oodt {

/// Piecewise concentration constant: 1 for order in [1,2), 3 - 2*sqrt(2) at
/// order 2.
double gamma_p(double order);

/// Every constant appearing in the tail and power bounds. phi_prime is a
/// free constant of the underlying transport inequality (default 1, the
/// standard-Gaussian T2 convention); assume_t2 records that the T2 premise
/// W_p <= sqrt((2/phi) H(P|Q)) is assumed, not checked.
struct BoundParams {
  double order = 2.0;
  double gamma = 0.0;        // gamma_p(order), recomputable
  double phi_prime = 1.0;
  double delta_m = 0.0;      // scaled separation sqrt(m) W_p
  double lambda = 0.0;       // calibrated critical value
  double delta_limit = 0.0;  // limit of sqrt(m) W_p in the intermediate regime
  bool assume_t2 = true;

  static BoundParams make(double order, double phi_prime, double delta_m,
                          double lambda, double delta_limit = 0.0);
};

/// Tail bound p(W_p(P, P_hat_N) > eps) <= exp(-gamma_p (phi'/2) N eps^2),
/// clamped into [0, 1].
double bolley_tail(double epsilon, int n_points, const BoundParams& params);

/// Lower power bound 1 - exp(-gamma_p (phi'/2) (delta_m - lambda)^2);
/// requires delta_m >= lambda.
double power_lower_bound(const BoundParams& params);

/// Intermediate-regime upper bound exp(-gamma_p (phi'/2) (lambda - delta)^2);
/// requires delta_limit < lambda.
double power_upper_bound_intermediate(const BoundParams& params);

/// Asymptotic power ceiling for vanishing alternatives: alpha itself.
double worst_case_power(double alpha);

/// One row of a bound-vs-Monte-Carlo comparison, in the CSV schema
/// regime,p,gamma_p,phi_prime,delta_m,lambda,delta_limit,bound,empirical_power,se.
struct BoundReportRow {
  std::string regime;  // "lower" or "intermediate"
  double order = 2.0;
  double gamma = 0.0;
  double phi_prime = 1.0;
  double delta_m = 0.0;
  double lambda = 0.0;
  std::optional<double> delta_limit;
  double bound = 0.0;
  double empirical_power = 0.0;
  double se = 0.0;
  bool assume_t2 = true;
};

std::string bound_report_csv(const std::vector<BoundReportRow>& rows);

}  // namespace oodt
