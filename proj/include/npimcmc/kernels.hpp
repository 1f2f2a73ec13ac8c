#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "npimcmc/space.hpp"

namespace npimcmc {

// A family of auxiliary kernels K(n), one per dimension, given by sampling
// and a log density with respect to Lebesgue measure (times counting measure
// on coins in the hybrid space).
template <class T>
class AuxKernel {
 public:
  virtual ~AuxKernel() = default;
  virtual std::vector<T> sample(Stream& s, const std::vector<T>& x) const = 0;
  virtual double log_pdf(const std::vector<T>& x, const std::vector<T>& v) const = 0;
};

using RealKernel = AuxKernel<double>;
using EntropyKernel = AuxKernel<EntropyPair>;
template <class T>
using KernelPtr = std::shared_ptr<const AuxKernel<T>>;

// N(0, I), independent of x.
KernelPtr<double> gaussian_iid_kernel();
// N(x, scale^2 I).
KernelPtr<double> gaussian_rw_kernel(double scale = 1.0);

// Ordering statistic used to split the auxiliary space.
struct Eta {
  std::function<double(const RealVector&)> fn;
  // Marks fn as the coordinate sum, which has a closed-form normalizer.
  bool is_sum = false;

  static Eta sum();
  double operator()(const RealVector& x) const { return fn(x); }
};

struct PartitionedKernels {
  KernelPtr<double> plus;   // supported on eta(v) >= eta(x)
  KernelPtr<double> minus;  // supported on eta(v) < eta(x)
};

struct PartitionOptions {
  double scale = 1.0;
  std::size_t rejection_budget = 100000;
  std::size_t mc_draws = 10000;  // normalizer estimate for non-linear eta
};

// N(x, scale^2 I) restricted to either side of eta(v) = eta(x), sampled by
// rejection.
PartitionedKernels partitioned_persistent_kernels(Eta eta, PartitionOptions opts = {});

// Lifts a real kernel to entropy vectors: reals follow `inner`, coins are
// fair and independent.
KernelPtr<EntropyPair> entropy_lift(KernelPtr<double> inner);

// log of the extended kernel: K(k) on the first k coordinates and the stock
// density on the rest.
template <class T>
double extended_kernel_log_pdf(const AuxKernel<T>& kernel, const std::vector<T>& x,
                               const std::vector<T>& v, std::size_t k) {
  if (k > x.size() || x.size() != v.size())
    throw PreconditionViolation("extended_kernel_log_pdf: bad split point");
  std::vector<T> xh(x.begin(), x.begin() + k), vh(v.begin(), v.begin() + k);
  std::vector<T> vt(v.begin() + k, v.end());
  return kernel.log_pdf(xh, vh) + Coord<T>::stock_log_density(vt);
}

}  // namespace npimcmc
