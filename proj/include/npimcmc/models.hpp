#pragma once

#include <cstdint>
#include <vector>

#include "npimcmc/model.hpp"

namespace npimcmc {

// Coin-driven geometric program: flip a coin, and while it shows T draw a
// normal and flip again. Returns the number of T flips, whose pmf is
// (1/2)^(k+1). Traces look like [T, r1, T, r2, F].
ModelPtr geometric();

// Same distribution with every coin replaced by the sign of a normal draw
// (negative means continue), so all trace entries are real.
ModelPtr geometric_real();

// K = floor(|t1|) components with standard-normal means and unit variance,
// equal weights. K = 0 is outside the support. Returns K.
ModelPtr igmm(std::vector<double> data);

// Steps ~ N(0,1) from the origin until |position| >= bound; the distance
// travelled (sum of |step|) is observed with N(observed_distance, obs_std).
// Returns the distance.
ModelPtr random_walk(double observed_distance, double obs_std = 0.1, double bound = 10.0);

// x ~ N(0,1), observe obs ~ N(x, 1). Posterior N(obs/2, 1/2). Returns x.
ModelPtr conjugate_normal(double obs);

// Terminates on traces of length 1 and of length 2, which breaks the prefix
// property. Test fixture only.
ModelPtr broken_prefix_fixture();

struct GroundTruthMixture {
  std::vector<double> means;
  std::vector<double> data;
};

// Equal-weight, unit-variance mixture data drawn with a seeded stream.
GroundTruthMixture make_mixture_data(const std::vector<double>& means, std::size_t n,
                                     std::uint64_t seed);

// Data set used when igmm is requested without explicit data.
const GroundTruthMixture& default_igmm_data();

}  // namespace npimcmc
