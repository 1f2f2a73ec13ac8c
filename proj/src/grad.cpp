#include "npimcmc/grad.hpp"

#include "npimcmc/errors.hpp"

namespace npimcmc {

std::optional<PotentialValue> potential(const Model& m, const RealVector& q) {
  InstanceSearch s = search_instance(m, q);
  if (s.status != SearchStatus::found) return std::nullopt;
  double U = -s.instance.log_weight;
  for (std::size_t i = 0; i < s.instance.k; ++i) U -= log_std_normal(q[i]);
  return PotentialValue{U, s.instance.k};
}

RealVector grad_U(const Model& m, const RealVector& q) {
  if (!m.supports_gradient())
    throw GradientUnsupported("model '" + m.name() + "' is not smooth");
  InstanceSearch s = search_instance(m, q);
  if (s.status == SearchStatus::needs_more)
    throw NeedsMoreValues("grad_U: no supported instance yet");
  if (s.status != SearchStatus::found)
    throw NoSupportedInstance("grad_U: no supported instance");
  RealVector g(q.size(), 0.0);
  for (std::size_t i = 0; i < s.instance.k; ++i) {
    auto lw = m.run_dual(q, i);
    if (!lw) throw NoSupportedInstance("grad_U: dual pass left the support");
    g[i] = -tangent(*lw) + q[i];
  }
  return g;
}

RealVector grad_U_fd(const Model& m, const RealVector& q, double h) {
  if (!(h > 0.0)) throw PreconditionViolation("grad_U_fd: h must be positive");
  if (!m.supports_gradient())
    throw GradientUnsupported("model '" + m.name() + "' is not smooth");
  auto base = potential(m, q);
  if (!base) throw NoSupportedInstance("grad_U_fd: no supported instance");
  RealVector g(q.size(), 0.0);
  RealVector p = q;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = q[i] + h;
    auto up = potential(m, p);
    p[i] = q[i] - h;
    auto down = potential(m, p);
    p[i] = q[i];
    if (!up || !down || up->k != base->k || down->k != base->k)
      throw StepCrossesSupportBoundary("grad_U_fd: perturbation changes the instance");
    g[i] = (up->U - down->U) / (2.0 * h);
  }
  return g;
}

}  // namespace npimcmc
