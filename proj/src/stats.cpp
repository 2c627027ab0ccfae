#include "oclopt/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace oclopt::stats {

double mean(const std::vector<double>& x) {
  if (x.empty()) return std::nan("");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double standard_error(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  return stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

TestResult paired_t_greater(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired test needs >= 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double se = standard_error(d);
  const double m = mean(d);
  TestResult r;
  if (se == 0.0) {
    r.statistic = m > 0 ? INFINITY : (m < 0 ? -INFINITY : 0.0);
    r.p_value = m > 0 ? 0.0 : 1.0;
    return r;
  }
  r.statistic = m / se;
  boost::math::students_t dist(static_cast<double>(d.size() - 1));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

TestResult sign_test_greater(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sign test needs equal lengths");
  int wins = 0, n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++n;
    if (a[i] > b[i]) ++wins;
  }
  TestResult r;
  r.statistic = wins;
  if (n == 0) return r;
  // P(X >= wins) under Binomial(n, ½).
  boost::math::binomial dist(n, 0.5);
  r.p_value = wins == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, wins - 1));
  return r;
}

double chi_square_sf(double x, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, x)));
}

TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw std::invalid_argument("chi-square needs >= 2 matching cells");
  TestResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.p_value = chi_square_sf(r.statistic, static_cast<double>(observed.size() - 1));
  return r;
}

}  // namespace oclopt::stats
