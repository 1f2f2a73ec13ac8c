#pragma once

#include <optional>

#include "npimcmc/model.hpp"

namespace npimcmc {

struct PotentialValue {
  double U = 0.0;
  std::size_t k = 0;  // dimension of the supported instance
};

// U(q) = -log w(t) - log phi_k(t) where t = q[0..k) is the supported instance
// of q. Coordinates past k do not enter U. Empty when q has no supported
// instance.
std::optional<PotentialValue> potential(const Model& m, const RealVector& q);

// dU/dq by forward-mode passes, one per instance coordinate. Entries past the
// instance dimension are exactly zero.
RealVector grad_U(const Model& m, const RealVector& q);

// Central differences (U(q + h e_i) - U(q - h e_i)) / 2h.
RealVector grad_U_fd(const Model& m, const RealVector& q, double h = 1e-5);

}  // namespace npimcmc
