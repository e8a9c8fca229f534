#pragma once

// Effective Kerr model vs the full optomechanical model (CW, CCW, mechanics).
//
// The full master equation has photonic dissipators only, so the mechanical
// coherences never decay and ||drho/dt|| does not go to zero. Its steady
// observables are taken from the state averaged over whole mechanical
// periods after the photonic transient has died out.

#include <cmath>
#include <optional>
#include <string>

#include "nhblockade/error.hpp"
#include "nhblockade/hilbert.hpp"
#include "nhblockade/liouville.hpp"
#include "nhblockade/model.hpp"
#include "nhblockade/observables.hpp"

namespace nhblockade {

struct FullModelConfig {
  std::size_t mech_dim = 8;
  double dt = 0.01;             // requested step, 1/gamma; capped by RK4 stability
  double t_settle = 30.0;       // 1/gamma
  std::size_t average_periods = 20;
  bool check_truncation = true;
  double truncation_tol = 0.01;  // relative change of g2 when mech_dim doubles
  double kerr_rel_tol = 1e-3;    // |U - g^2/omega_m| / (g^2/omega_m)
};

struct AveragedState {
  DensityMatrix rho;
  double dt = 0.0;  // 1/gamma
  std::size_t steps = 0;
};

/// Evolve from the vacuum for `t_settle`, then return the trapezoid average of
/// rho over `window`. Times in units of 1/gamma.
inline AveragedState time_averaged_state(const LindbladGenerator& gen, double gamma, double dt_req,
                                         double t_settle, double window) {
  if (!(dt_req > 0.0) || !(t_settle >= 0.0) || !(window > 0.0)) throw ConfigError("time_averaged_state: bad times");
  const double cap = detail::rk4_step_limit(gen) * gamma;
  const double dt_max = std::min(dt_req, cap);
  const auto n_window = static_cast<std::size_t>(std::ceil(window / dt_max));
  const double dt = window / static_cast<double>(n_window);
  const auto n_settle = static_cast<std::size_t>(std::ceil(t_settle / dt));
  const double h = dt / gamma;

  Matrix rho = DensityMatrix::vacuum(gen.layout()).entries;
  Rk4Stepper stepper(gen);
  for (std::size_t k = 0; k < n_settle; ++k) stepper.step(rho, h);
  Matrix acc = 0.5 * rho;
  for (std::size_t k = 0; k < n_window; ++k) {
    stepper.step(rho, h);
    acc += (k + 1 == n_window ? 0.5 : 1.0) * rho;
  }
  detail::hermitize_normalize(acc);
  return {DensityMatrix(gen.layout(), std::move(acc)), dt, n_settle + n_window};
}

/// Period-averaged steady state of the full model on photonic_layout x [mech_dim].
inline AveragedState full_model_state(const ModelParams& p, const FockLayout& photonic_layout, std::size_t mech_dim,
                                      const FullModelConfig& fc, const SolverConfig& sc) {
  if (!p.has_mechanics()) throw ConfigError("full model needs omega_m and g");
  if (photonic_layout.modes() != 2) throw LayoutError("photonic layout must have 2 modes");
  const FockLayout layout{photonic_layout.dim(kCw), photonic_layout.dim(kCcw), mech_dim};
  const auto rates = photonic_decay_rates(p, sc);
  const LindbladGenerator gen(total_hamiltonian(p, layout), rates);
  const double period = 2.0 * kPi / *p.omega_m;
  return time_averaged_state(gen, p.gamma, fc.dt, fc.t_settle, period * static_cast<double>(fc.average_periods));
}

struct FullValidationRecord {
  double mu = 0.0;
  double delta = 0.0;
  double kerr = 0.0;           // g^2/omega_m used by the effective model
  TaggedValue g2_effective;
  TaggedValue g2_full;
  double relative_deviation = 0.0;  // |full - eff| / eff
  std::optional<TaggedValue> g2_full_doubled;
  std::optional<double> truncation_change;
  double full_dt = 0.0;
};

inline double relative_change(const TaggedValue& ref, const TaggedValue& other) {
  if (!ref.is_finite() || !other.is_finite() || ref.value == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(other.value - ref.value) / std::abs(ref.value);
}

/// Throws ConfigError if U disagrees with g^2/omega_m, and ConvergenceError if
/// doubling the mechanical truncation moves g2 by more than truncation_tol.
inline FullValidationRecord validate_full_vs_effective(const ModelParams& params, const FockLayout& photonic_layout,
                                                       const FullModelConfig& fc = {},
                                                       const SolverConfig& sc = {},
                                                       SteadyMethod method = SteadyMethod::liouvillian_eigen) {
  params.validate();
  if (!params.has_mechanics()) throw ConfigError("validate_full_vs_effective needs omega_m and g");
  const double kerr = *params.induced_kerr();
  if (std::abs(params.U - kerr) > fc.kerr_rel_tol * std::max(kerr, 1e-300) && !(kerr == 0.0 && params.U == 0.0)) {
    throw ConfigError("U = " + std::to_string(params.U) + " is inconsistent with g^2/omega_m = " +
                      std::to_string(kerr));
  }

  FullValidationRecord rec;
  rec.mu = params.mu;
  rec.delta = params.delta;
  rec.kerr = kerr;

  ModelParams eff = params;
  eff.U = kerr;
  eff.omega_m.reset();
  eff.g.reset();
  const auto steady = solve_steady(eff, photonic_layout, sc, method);
  rec.g2_effective = g2_zero(steady.rho, kCw);

  const auto full = full_model_state(params, photonic_layout, fc.mech_dim, fc, sc);
  rec.g2_full = g2_zero(full.rho, kCw);
  rec.full_dt = full.dt;
  rec.relative_deviation = relative_change(rec.g2_effective, rec.g2_full);

  if (fc.check_truncation) {
    const auto doubled = full_model_state(params, photonic_layout, 2 * fc.mech_dim, fc, sc);
    rec.g2_full_doubled = g2_zero(doubled.rho, kCw);
    rec.truncation_change = relative_change(rec.g2_full, *rec.g2_full_doubled);
    if (!(*rec.truncation_change <= fc.truncation_tol)) {
      throw ConvergenceError("mechanical truncation not converged: g2 changes by " +
                                 std::to_string(*rec.truncation_change) + " when mech_dim doubles to " +
                                 std::to_string(2 * fc.mech_dim),
                             *rec.truncation_change);
    }
  }
  return rec;
}

}  // namespace nhblockade
