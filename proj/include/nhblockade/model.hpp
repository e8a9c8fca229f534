#pragma once

// Physical parameters and Hamiltonians of the two-mode resonator with
// scatterer-induced nonreciprocal coupling, optionally coupled to a
// mechanical mode. Everything lives in the frame rotating at the laser
// frequency: the detuning `delta` is the only frequency input.

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nhblockade/error.hpp"
#include "nhblockade/hilbert.hpp"

namespace nhblockade {

inline constexpr double kPi = 3.14159265358979323846;

/// All rates and frequencies are in units of `gamma`; angles in radians.
struct ModelParams {
  Complex lambda1{0.0, 0.0};
  Complex lambda2{0.0, 0.0};
  int m = 1;
  double mu = 0.0;
  double delta = 0.0;
  double U = 0.0;
  double gamma = 1.0;
  double F = 0.0;
  std::optional<double> omega_m;
  std::optional<double> g;

  void validate() const {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (m < 1) throw ConfigError("azimuthal mode number m must be >= 1");
    if (!(F >= 0.0)) throw ConfigError("drive amplitude F must be >= 0");
    if (!(U >= 0.0)) throw ConfigError("Kerr strength U must be >= 0");
    if (omega_m.has_value() != g.has_value()) {
      throw ConfigError("omega_m and g must be given together");
    }
    if (omega_m) {
      if (!(*omega_m > 0.0)) throw ConfigError("omega_m must be > 0");
      if (!(std::abs(*g) / *omega_m < 1.0)) {
        throw ConfigError("g/omega_m must be < 1 (weak optomechanical coupling)");
      }
    }
  }

  /// Non-fatal diagnostics.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (omega_m && g && std::abs(*g) / *omega_m > 0.5) {
      w.push_back("g/omega_m = " + std::to_string(std::abs(*g) / *omega_m) +
                  " > 0.5: effective Kerr model is a poor approximation");
    }
    return w;
  }

  bool has_mechanics() const noexcept { return omega_m.has_value() && g.has_value(); }

  /// Kerr strength implied by the optomechanical coupling, g^2/omega_m.
  std::optional<double> induced_kerr() const {
    if (!has_mechanics()) return std::nullopt;
    return (*g) * (*g) / *omega_m;
  }
};

/// e1 scatters CCW -> CW, e2 scatters CW -> CCW (units of gamma).
struct ScatteringRates {
  Complex e1;
  Complex e2;
  Complex product() const { return e1 * e2; }
};

inline ScatteringRates scattering_rates(const ModelParams& p) {
  const double phase = 2.0 * p.m * p.mu;
  const Complex up = std::polar(1.0, phase);
  return {p.lambda1 + p.lambda2 * up, p.lambda1 + p.lambda2 * std::conj(up)};
}

struct HamiltonianPair {
  Operator h_plus;   // Hermitian part
  Operator h_minus;  // anti-Hermitian part
};

inline HamiltonianPair hermitian_split(const Operator& h) {
  const Matrix hd = h.entries.adjoint();
  return {Operator(h.layout, 0.5 * (h.entries + hd)), Operator(h.layout, 0.5 * (h.entries - hd))};
}

namespace detail {

// Photonic part shared by the effective and total Hamiltonians, without Kerr.
inline Operator photonic_part(const ModelParams& p, const FockLayout& layout) {
  const auto rates = scattering_rates(p);
  const double s = p.gamma;
  const auto a1 = destroy(layout, kCw);
  const auto a2 = destroy(layout, kCcw);
  const auto a1d = adjoint(a1);
  const auto a2d = adjoint(a2);
  const auto n_tot = number(layout, kCw) + number(layout, kCcw);
  Matrix h = (p.delta * s) * n_tot.entries;
  h += (rates.e1 * s) * (a1d.entries * a2.entries);
  h += (rates.e2 * s) * (a2d.entries * a1.entries);
  h += (p.F * s) * (a1d.entries + a1.entries);
  return {layout, std::move(h)};
}

}  // namespace detail

/// Delta(n1+n2) + E1 a1^dag a2 + E2 a2^dag a1 - U(n1+n2)^2 + F(a1^dag + a1).
inline Operator effective_hamiltonian(const ModelParams& p, const FockLayout& layout) {
  if (layout.modes() != 2) throw LayoutError("effective_hamiltonian needs a 2-mode layout");
  p.validate();
  auto h = detail::photonic_part(p, layout);
  const auto n_tot = number(layout, kCw) + number(layout, kCcw);
  h.entries -= (p.U * p.gamma) * (n_tot.entries * n_tot.entries);
  return h;
}

/// Optomechanical Hamiltonian on (CW, CCW, mechanical):
/// Delta(n1+n2) + omega_m b^dag b + E1 a1^dag a2 + E2 a2^dag a1 - g(b^dag+b)(n1+n2) + F(a1^dag+a1).
inline Operator total_hamiltonian(const ModelParams& p, const FockLayout& layout) {
  if (layout.modes() != 3) throw LayoutError("total_hamiltonian needs a 3-mode layout (CW, CCW, mechanical)");
  if (!p.has_mechanics()) throw ConfigError("total_hamiltonian needs omega_m and g");
  p.validate();
  auto h = detail::photonic_part(p, layout);
  const auto b = destroy(layout, kMechanical);
  const auto n_tot = number(layout, kCw) + number(layout, kCcw);
  const double s = p.gamma;
  h.entries += (*p.omega_m * s) * number(layout, kMechanical).entries;
  h.entries -= (*p.g * s) * ((b.entries + b.entries.adjoint()) * n_tot.entries);
  return h;
}

/// Polaron-frame form of total_hamiltonian: mechanics decoupled, Kerr term
/// -(g^2/omega_m)(n1+n2)^2, and the drive dressed by exp(+-(g/omega_m)(b - b^dag)).
inline Operator polaron_hamiltonian(const ModelParams& p, const FockLayout& layout) {
  if (layout.modes() != 3) throw LayoutError("polaron_hamiltonian needs a 3-mode layout");
  if (!p.has_mechanics()) throw ConfigError("polaron_hamiltonian needs omega_m and g");
  p.validate();
  const double s = p.gamma;
  const double beta = *p.g / *p.omega_m;
  const auto rates = scattering_rates(p);
  const auto a1 = destroy(layout, kCw);
  const auto a2 = destroy(layout, kCcw);
  const auto n_tot = number(layout, kCw) + number(layout, kCcw);

  const Matrix bm = detail::single_mode_destroy(layout.dim(kMechanical));
  const Matrix gen = beta * (bm - bm.adjoint());
  const Matrix disp_plus = gen.exp();
  const Matrix disp_minus = (-gen).exp();
  const Matrix dp = embed(layout, kMechanical, disp_plus).entries;
  const Matrix dm = embed(layout, kMechanical, disp_minus).entries;

  Matrix h = (p.delta * s) * n_tot.entries;
  h += (*p.omega_m * s) * number(layout, kMechanical).entries;
  h += (rates.e1 * s) * (a1.entries.adjoint() * a2.entries);
  h += (rates.e2 * s) * (a2.entries.adjoint() * a1.entries);
  h -= ((*p.g) * (*p.g) / *p.omega_m * s) * (n_tot.entries * n_tot.entries);
  h += (p.F * s) * (dp * a1.entries.adjoint() + dm * a1.entries);
  return {layout, std::move(h)};
}

}  // namespace nhblockade
