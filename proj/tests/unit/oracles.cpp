#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

long double poisson_pmf(std::int64_t k, long double mean) {
  if (mean == 0.0L) return k == 0 ? 1.0L : 0.0L;
  const long double kk = static_cast<long double>(k);
  return std::exp(kk * std::log(mean) - mean - std::lgamma(kk + 1.0L));
}

long double poisson_cdf(std::int64_t k, long double mean) {
  long double s = 0.0L;
  for (std::int64_t i = 0; i <= k; ++i) s += poisson_pmf(i, mean);
  return std::min(s, 1.0L);
}

long double poisson_sf(std::int64_t k, long double mean) {
  long double s = 0.0L;
  for (std::int64_t i = k + 1;; ++i) {
    const long double term = poisson_pmf(i, mean);
    s += term;
    if (static_cast<long double>(i) > mean && term < 1e-15L * s) break;
    if (s == 0.0L && static_cast<long double>(i) > mean + 50.0L) break;
  }
  return s;
}

long double pe(double ls, double lb, int nt) {
  return 0.5L * poisson_cdf(nt, static_cast<long double>(ls) + lb) + 0.5L * poisson_sf(nt, lb);
}

long double best_pe(double ls, double lb, int n_max) {
  long double best = 1.0L;
  for (int nt = 0; nt <= n_max; ++nt) best = std::min(best, pe(ls, lb, nt));
  return best;
}

double grid_required_lambda_s(double lb, double target, double step) {
  for (int i = 0;; ++i) {
    const double ls = i * step;
    if (best_pe(ls, lb) <= target) return ls;
  }
}

std::vector<double> direct_synthesis(const std::vector<double>& events, double amplitude,
                                     double tau_rise, double tau_fall, double sample_rate,
                                     std::size_t n_samples) {
  const double tp = tau_rise * tau_fall / (tau_fall - tau_rise) * std::log(tau_fall / tau_rise);
  const double raw_peak = std::exp(-tp / tau_fall) - std::exp(-tp / tau_rise);
  std::vector<double> out(n_samples, 0.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    for (double e : events) {
      const double age = t - e;
      if (age < 0.0) continue;
      out[i] += amplitude * (std::exp(-age / tau_fall) - std::exp(-age / tau_rise)) / raw_peak;
    }
  }
  return out;
}

std::vector<std::uint32_t> naive_binning(const std::vector<double>& rises, double bit_time,
                                         std::size_t n_bits) {
  std::vector<std::uint32_t> counts(n_bits, 0);
  for (double t : rises) {
    // The later bit wins when t sits exactly on a boundary.
    auto k = static_cast<std::size_t>(std::floor(t / bit_time));
    while (k + 1 < n_bits && static_cast<double>(k + 1) * bit_time <= t) ++k;
    while (k > 0 && static_cast<double>(k) * bit_time > t) --k;
    ++counts[k];
  }
  return counts;
}

}  // namespace oracle
