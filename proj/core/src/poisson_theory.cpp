#include "sipmlink/poisson_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sipmlink {
namespace {

constexpr double kNormalApproxMean = 5000.0;

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_poisson_pmf(std::int64_t k, double mean) {
  return -mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0);
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void PdeModel::validate() const {
  require(is_fraction(quantum_efficiency) && is_fraction(avalanche_init_prob) &&
              is_fraction(fill_factor),
          "PdeModel: every factor must lie in [0, 1]");
}

void PhotonBudget::validate() const {
  require(std::isfinite(lambda_s) && std::isfinite(lambda_b) && lambda_s >= 0.0 &&
              lambda_b >= 0.0,
          "PhotonBudget: lambda_s and lambda_b must be finite and non-negative");
}

void LinkParams::validate() const {
  require(std::isfinite(wavelength) && wavelength > 0.0, "LinkParams: wavelength must be > 0");
  require(is_fraction(pde), "LinkParams: pde must lie in [0, 1]");
  require(std::isfinite(data_rate) && data_rate > 0.0, "LinkParams: data_rate must be > 0");
  require(std::isfinite(dark_count_rate) && dark_count_rate >= 0.0,
          "LinkParams: dark_count_rate must be >= 0");
  require(std::isfinite(avg_optical_power) && avg_optical_power >= 0.0,
          "LinkParams: avg_optical_power must be >= 0");
  require(ook_duty > 0.0 && ook_duty <= 1.0, "LinkParams: ook_duty must lie in (0, 1]");
}

double photon_energy(double wavelength) {
  require(std::isfinite(wavelength) && wavelength > 0.0,
          "photon_energy: wavelength must be positive and finite");
  return constants::kPlanck * constants::kSpeedOfLight / wavelength;
}

double effective_pde(const PdeModel& model) {
  model.validate();
  return model.quantum_efficiency * model.avalanche_init_prob * model.fill_factor;
}

double lambda_s(double peak_power, double bit_time, double wavelength, double pde) {
  require(std::isfinite(peak_power) && std::isfinite(bit_time) && std::isfinite(pde) &&
              peak_power >= 0.0 && bit_time >= 0.0 && pde >= 0.0,
          "lambda_s: power, bit time and pde must be finite and non-negative");
  const double e_photon = photon_energy(wavelength);
  return peak_power * bit_time / e_photon * pde;
}

double power_for_lambda_s(double lambda, double bit_time, double wavelength, double pde) {
  require(std::isfinite(lambda) && lambda >= 0.0, "power_for_lambda_s: lambda must be >= 0");
  require(bit_time > 0.0 && pde > 0.0, "power_for_lambda_s: bit time and pde must be > 0");
  return lambda * photon_energy(wavelength) / (pde * bit_time);
}

double detected_rate(double optical_power, double wavelength, double pde) {
  return lambda_s(optical_power, 1.0, wavelength, pde);
}

PhotonBudget budget_for(const LinkParams& link) {
  link.validate();
  return PhotonBudget{lambda_s(link.peak_power(), link.bit_time(), link.wavelength, link.pde),
                      link.dark_count_rate * link.bit_time()};
}

double poisson_cdf(std::int64_t k, double mean) {
  require(std::isfinite(mean) && mean >= 0.0, "poisson_cdf: mean must be finite and >= 0");
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  if (mean > kNormalApproxMean) {
    return normal_cdf((static_cast<double>(k) + 0.5 - mean) / std::sqrt(mean));
  }
  // Terms rise to the mode then fall; scale by the largest before summing.
  const double log_mean = std::log(mean);
  double log_term = -mean;
  double log_max = log_term;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(k) + 1);
  logs.push_back(log_term);
  for (std::int64_t i = 1; i <= k; ++i) {
    log_term += log_mean - std::log(static_cast<double>(i));
    logs.push_back(log_term);
    log_max = std::max(log_max, log_term);
  }
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - log_max);
  return std::min(1.0, std::exp(log_max + std::log(sum)));
}

double poisson_sf(std::int64_t k, double mean) {
  require(std::isfinite(mean) && mean >= 0.0, "poisson_sf: mean must be finite and >= 0");
  if (k < 0) return 1.0;
  if (mean == 0.0) return 0.0;
  if (mean > kNormalApproxMean) {
    return 0.5 * std::erfc((static_cast<double>(k) + 0.5 - mean) / std::sqrt(2.0 * mean));
  }
  if (static_cast<double>(k) + 1.0 < mean) return std::max(0.0, 1.0 - poisson_cdf(k, mean));
  // Upper tail: terms decrease monotonically from k+1.
  const double log_first = log_poisson_pmf(k + 1, mean);
  double rel = 1.0;
  double sum = 0.0;
  for (std::int64_t i = k + 2; rel > 1e-18 * sum || sum == 0.0; ++i) {
    sum += rel;
    rel *= mean / static_cast<double>(i);
    if (rel == 0.0) break;
  }
  return std::exp(log_first) * sum;
}

double pe(const PhotonBudget& budget, int n_t) {
  budget.validate();
  require(n_t >= 0, "pe: threshold must be non-negative");
  const double miss = poisson_cdf(n_t, budget.lambda_s + budget.lambda_b);
  const double false_alarm = poisson_sf(n_t, budget.lambda_b);
  return 0.5 * miss + 0.5 * false_alarm;
}

ThresholdDecision optimal_threshold(const PhotonBudget& budget, int n_max) {
  require(n_max >= 0, "optimal_threshold: n_max must be non-negative");
  ThresholdDecision best{0, pe(budget, 0)};
  for (int n = 1; n <= n_max; ++n) {
    const double p = pe(budget, n);
    // Relative margin so rounding noise cannot move a tie to a larger threshold.
    if (p < best.pe * (1.0 - 1e-12)) best = {n, p};
  }
  return best;
}

namespace {

int threshold_search_bound(double lambda_s, double lambda_b) {
  const double total = lambda_s + lambda_b;
  return std::max(100, static_cast<int>(std::ceil(total + 10.0 * std::sqrt(total) + 10.0)));
}

double optimal_pe(double lambda_s, double lambda_b) {
  const PhotonBudget b{lambda_s, lambda_b};
  return optimal_threshold(b, threshold_search_bound(lambda_s, lambda_b)).pe;
}

}  // namespace

double required_lambda_s(double lambda_b, double target_pe, double tolerance) {
  require(std::isfinite(lambda_b) && lambda_b >= 0.0, "required_lambda_s: lambda_b must be >= 0");
  require(target_pe > 0.0 && target_pe < 0.5, "required_lambda_s: target_pe must be in (0, 0.5)");
  require(tolerance > 0.0, "required_lambda_s: tolerance must be > 0");

  constexpr double kMaxLambda = 1e5;
  constexpr int kMaxIterations = 200;

  double lo = 0.0;
  double hi = 1.0;
  while (optimal_pe(hi, lambda_b) > target_pe) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxLambda) {
      throw ConvergenceError("required_lambda_s: target pe " + std::to_string(target_pe) +
                             " unreachable below lambda_s = 1e5");
    }
  }
  int iterations = 0;
  while (hi - lo > tolerance) {
    if (++iterations > kMaxIterations) {
      throw ConvergenceError("required_lambda_s: bisection did not converge");
    }
    const double mid = 0.5 * (lo + hi);
    if (optimal_pe(mid, lambda_b) <= target_pe) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double required_avg_power(double dark_rate, double data_rate, double target_pe, double pde,
                          double wavelength) {
  require(dark_rate >= 0.0 && data_rate > 0.0 && pde > 0.0,
          "required_avg_power: rates and pde must be positive");
  const double bit_time = 1.0 / data_rate;
  const double lambda = required_lambda_s(dark_rate * bit_time, target_pe);
  return power_for_lambda_s(lambda, bit_time, wavelength, pde) * constants::kOokDuty;
}

std::vector<PowerPenaltyRow> power_penalty_curve(std::span<const double> lambda_b_grid,
                                                 double target_pe) {
  require(std::is_sorted(lambda_b_grid.begin(), lambda_b_grid.end()),
          "power_penalty_curve: grid must be sorted");
  std::vector<PowerPenaltyRow> rows;
  rows.reserve(lambda_b_grid.size());
  for (double lb : lambda_b_grid) {
    require(lb >= 0.0, "power_penalty_curve: grid values must be >= 0");
    const double ls = required_lambda_s(lb, target_pe);
    const auto decision = optimal_threshold({ls, lb}, threshold_search_bound(ls, lb));
    rows.push_back({lb, ls, decision.n_t});
  }
  return rows;
}

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

}  // namespace sipmlink
