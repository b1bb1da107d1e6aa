#include "sipmlink/random.hpp"

#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace sipmlink {
namespace {

boost::random::mt19937_64 make_engine(RngSeed seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.value & 0xffffffffu),
                    static_cast<std::uint32_t>(seed.value >> 32), stream};
  return boost::random::mt19937_64(seq);
}

}  // namespace

Rng::Rng(RngSeed seed, std::uint32_t stream) : engine_(make_engine(seed, stream)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  boost::random::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

double Rng::exponential(double rate) {
  boost::random::exponential_distribution<double> dist(rate);
  return dist(engine_);
}

double Rng::normal() {
  boost::random::normal_distribution<double> dist;
  return dist(engine_);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::uint64_t, double> dist(mean);
  return dist(engine_);
}

void Rng::add_normal(std::span<double> out, double sigma) {
  boost::random::normal_distribution<double> dist(0.0, sigma);
  for (double& v : out) v += dist(engine_);
}

}  // namespace sipmlink
