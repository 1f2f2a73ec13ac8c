#include "npimcmc/kernels.hpp"

#include <cmath>
#include <cstring>

#include <spdlog/spdlog.h>

namespace npimcmc {

namespace {

class GaussianIid final : public RealKernel {
 public:
  RealVector sample(Stream& s, const RealVector& x) const override {
    RealVector v(x.size());
    for (auto& r : v) r = s.normal();
    return v;
  }
  double log_pdf(const RealVector&, const RealVector& v) const override {
    return gaussian_log_density(v);
  }
};

double rw_log_pdf(const RealVector& x, const RealVector& v, double scale) {
  double s = 0.0;
  double log_scale = std::log(scale);
  for (std::size_t i = 0; i < x.size(); ++i)
    s += log_std_normal((v[i] - x[i]) / scale) - log_scale;
  return s;
}

class GaussianRw final : public RealKernel {
 public:
  explicit GaussianRw(double scale) : scale_(scale) {}
  RealVector sample(Stream& s, const RealVector& x) const override {
    RealVector v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] + scale_ * s.normal();
    return v;
  }
  double log_pdf(const RealVector& x, const RealVector& v) const override {
    return rw_log_pdf(x, v, scale_);
  }

 private:
  double scale_;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::uint64_t hash_vector(const RealVector& x) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (double r : x) {
    std::uint64_t bits;
    std::memcpy(&bits, &r, sizeof bits);
    h = mix64(h ^ bits);
  }
  return h;
}

class HalfSpaceKernel final : public RealKernel {
 public:
  HalfSpaceKernel(Eta eta, bool plus, PartitionOptions opts)
      : eta_(std::move(eta)), plus_(plus), opts_(opts) {}

  RealVector sample(Stream& s, const RealVector& x) const override {
    double threshold = eta_(x);
    RealVector v(x.size());
    for (std::size_t attempt = 0; attempt < opts_.rejection_budget; ++attempt) {
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] + opts_.scale * s.normal();
      if (inside(eta_(v), threshold)) return v;
    }
    throw RejectionBudgetExceeded("partitioned kernel: rejection budget exhausted");
  }

  double log_pdf(const RealVector& x, const RealVector& v) const override {
    double threshold = eta_(x);
    if (!inside(eta_(v), threshold)) return -INFINITY;
    return rw_log_pdf(x, v, opts_.scale) - std::log(side_mass(x, threshold));
  }

 private:
  bool inside(double e, double threshold) const {
    return plus_ ? e >= threshold : e < threshold;
  }

  double side_mass(const RealVector& x, double threshold) const {
    if (x.empty()) return plus_ ? 1.0 : 0.0;
    if (eta_.is_sum) {
      // sum(v) ~ N(sum(x), n scale^2); the boundary sits at its mean.
      double mean = 0.0;
      for (double r : x) mean += r;
      double z = (threshold - mean) / (opts_.scale * std::sqrt(double(x.size())));
      return plus_ ? 1.0 - normal_cdf(z) : normal_cdf(z);
    }
    CounterStream s(hash_vector(x));
    std::size_t hits = 0;
    RealVector v(x.size());
    for (std::size_t d = 0; d < opts_.mc_draws; ++d) {
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] + opts_.scale * s.normal();
      if (inside(eta_(v), threshold)) ++hits;
    }
    double p = double(hits) / double(opts_.mc_draws);
    double se = std::sqrt(p * (1.0 - p) / double(opts_.mc_draws));
    spdlog::debug("half-space normalizer estimate {} (se {})", p, se);
    return p;
  }

  Eta eta_;
  bool plus_;
  PartitionOptions opts_;
};

class EntropyLift final : public EntropyKernel {
 public:
  explicit EntropyLift(KernelPtr<double> inner) : inner_(std::move(inner)) {}

  EntropyVector sample(Stream& s, const EntropyVector& x) const override {
    RealVector r = inner_->sample(s, reals_of(x));
    EntropyVector v;
    v.reserve(r.size());
    for (double ri : r) v.emplace_back(ri, s.coin());
    return v;
  }

  double log_pdf(const EntropyVector& x, const EntropyVector& v) const override {
    return inner_->log_pdf(reals_of(x), reals_of(v)) -
           double(v.size()) * std::numbers::ln2;
  }

 private:
  KernelPtr<double> inner_;
};

}  // namespace

KernelPtr<double> gaussian_iid_kernel() { return std::make_shared<GaussianIid>(); }

KernelPtr<double> gaussian_rw_kernel(double scale) {
  if (!(scale > 0.0)) throw PreconditionViolation("gaussian_rw_kernel: scale must be positive");
  return std::make_shared<GaussianRw>(scale);
}

Eta Eta::sum() {
  Eta e;
  e.fn = [](const RealVector& x) {
    double s = 0.0;
    for (double r : x) s += r;
    return s;
  };
  e.is_sum = true;
  return e;
}

PartitionedKernels partitioned_persistent_kernels(Eta eta, PartitionOptions opts) {
  if (!(opts.scale > 0.0)) throw PreconditionViolation("partitioned kernels: scale must be positive");
  if (!eta.fn) throw PreconditionViolation("partitioned kernels: eta is empty");
  return {std::make_shared<HalfSpaceKernel>(eta, true, opts),
          std::make_shared<HalfSpaceKernel>(eta, false, opts)};
}

KernelPtr<EntropyPair> entropy_lift(KernelPtr<double> inner) {
  return std::make_shared<EntropyLift>(std::move(inner));
}

}  // namespace npimcmc
