#pragma once

#include <cstddef>
#include <vector>

namespace oclopt::stats {

double mean(const std::vector<double>& x);
/// Sample standard deviation (n − 1 denominator); 0 for n < 2.
double stddev(const std::vector<double>& x);
double standard_error(const std::vector<double>& x);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sided paired t-test of H1: mean(a − b) > 0.
TestResult paired_t_greater(const std::vector<double>& a, const std::vector<double>& b);

/// One-sided sign test of H1: P(a > b) > ½. Ties are dropped.
TestResult sign_test_greater(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson goodness-of-fit of `observed` counts against `expected` counts.
TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected);

/// Upper-tail probability of a chi-square variable with `dof` degrees.
double chi_square_sf(double x, double dof);

}  // namespace oclopt::stats
