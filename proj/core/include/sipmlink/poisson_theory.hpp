#pragma once

// Closed-form photon-counting statistics for an OOK link: detection
// efficiency, detected photons per bit, probability of error under an
// integer count threshold, and the optical power needed to reach a target
// error probability.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sipmlink {

/// Thrown when an iterative solve cannot reach its target.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kDefaultWavelength = 620e-9;     // m
inline constexpr double kOokDuty = 0.5;
}  // namespace constants

/// Photon detection efficiency factors. Each lies in [0, 1].
struct PdeModel {
  double quantum_efficiency = 1.0;
  double avalanche_init_prob = 1.0;
  double fill_factor = 1.0;

  void validate() const;
};

/// Expected detected signal and background photons per bit.
struct PhotonBudget {
  double lambda_s = 0.0;
  double lambda_b = 0.0;

  void validate() const;
};

/// Optical link parameters. Powers are time averages over equiprobable OOK,
/// so the power during a 1-bit is avg_optical_power / ook_duty.
struct LinkParams {
  double wavelength = constants::kDefaultWavelength;
  double pde = 0.036;
  double data_rate = 1e6;
  double dark_count_rate = 30e3;
  double avg_optical_power = 0.0;
  double ook_duty = constants::kOokDuty;

  double bit_time() const { return 1.0 / data_rate; }
  double peak_power() const { return avg_optical_power / ook_duty; }
  void validate() const;
};

struct ThresholdDecision {
  int n_t = 0;
  double pe = 0.5;
};

/// Planck photon energy h*c/wavelength in joules.
double photon_energy(double wavelength);

/// eta * epsilon * F.
double effective_pde(const PdeModel& model);

/// Detected photons in one bit for a given optical power during that bit.
double lambda_s(double peak_power, double bit_time, double wavelength, double pde);

/// Inverse of lambda_s: optical power that yields `lambda` detected photons per bit.
double power_for_lambda_s(double lambda, double bit_time, double wavelength, double pde);

/// Detected photon rate (counts/s) under constant illumination.
double detected_rate(double optical_power, double wavelength, double pde);

/// The budget implied by a link: lambda_s from the 1-bit power, lambda_b
/// from the dark-count rate.
PhotonBudget budget_for(const LinkParams& link);

/// P[Poisson(mean) <= k]. Log-domain upward recursion; normal approximation
/// with continuity correction above mean 5000.
double poisson_cdf(std::int64_t k, double mean);

/// P[Poisson(mean) > k], evaluated without cancellation when it is small.
double poisson_sf(std::int64_t k, double mean);

/// Probability of error for equiprobable OOK when a bit is decided as 1 iff
/// its count strictly exceeds n_t.
double pe(const PhotonBudget& budget, int n_t);

/// Threshold in [0, n_max] minimising pe; ties go to the smaller threshold.
ThresholdDecision optimal_threshold(const PhotonBudget& budget, int n_max = 100);

/// Smallest lambda_s for which the optimally-thresholded pe <= target_pe.
/// Bisection on lambda_s to within `tolerance`; the threshold is re-optimised
/// at every trial point.
double required_lambda_s(double lambda_b, double target_pe, double tolerance = 1e-4);

/// Average optical power needed for target_pe at the given dark and data rates.
double required_avg_power(double dark_rate, double data_rate, double target_pe, double pde,
                          double wavelength = constants::kDefaultWavelength);

struct PowerPenaltyRow {
  double lambda_b = 0.0;
  double lambda_s = 0.0;
  int n_t = 0;
};

std::vector<PowerPenaltyRow> power_penalty_curve(std::span<const double> lambda_b_grid,
                                                 double target_pe);

double watts_to_dbm(double watts);
double dbm_to_watts(double dbm);

}  // namespace sipmlink
