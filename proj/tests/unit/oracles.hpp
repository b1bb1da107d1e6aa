#pragma once

// Reference implementations used only by the tests. They are written for
// clarity rather than speed and share no code with the library.

#include <cstdint>
#include <vector>

namespace oracle {

/// P[Poisson(mean) = k] in long double via lgamma.
long double poisson_pmf(std::int64_t k, long double mean);
/// Direct sum of the pmf from 0 to k.
long double poisson_cdf(std::int64_t k, long double mean);
/// Direct upper-tail sum from k+1 until terms fall below 1e-15 of the running total.
long double poisson_sf(std::int64_t k, long double mean);

/// 0.5 * P[N(ls+lb) <= nt] + 0.5 * P[N(lb) > nt] from the direct sums.
long double pe(double ls, double lb, int nt);
/// Smallest pe over n_t in [0, n_max].
long double best_pe(double ls, double lb, int n_max = 60);
/// Smallest lambda_s on a grid of spacing `step` reaching target.
double grid_required_lambda_s(double lb, double target, double step = 0.01);

/// Brute-force convolution of event times with the pulse shape at each sample.
std::vector<double> direct_synthesis(const std::vector<double>& events, double amplitude,
                                     double tau_rise, double tau_fall, double sample_rate,
                                     std::size_t n_samples);

/// Counts per bit by direct binning of each rise into floor(t / bit_time).
std::vector<std::uint32_t> naive_binning(const std::vector<double>& rises, double bit_time,
                                         std::size_t n_bits);

}  // namespace oracle
