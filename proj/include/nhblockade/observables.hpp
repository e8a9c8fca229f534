#pragma once

// Quantities extracted from steady states and drive-free Hamiltonians:
// g2(0), photon-number distributions, few-excitation spectra and EP
// diagnostics (splitting, eigenvector overlap).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nhblockade/error.hpp"
#include "nhblockade/hilbert.hpp"
#include "nhblockade/liouville.hpp"
#include "nhblockade/model.hpp"

namespace nhblockade {

enum class Regularity { finite, divergent, undefined };

inline std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::finite: return "finite";
    case Regularity::divergent: return "divergent";
    default: return "undefined";
  }
}

/// A real result that may legitimately be infinite or undefined. `value` is
/// +inf / NaN in those cases so it never masquerades as a large finite number.
struct TaggedValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  Regularity status = Regularity::undefined;

  static TaggedValue finite(double v) { return {v, Regularity::finite}; }
  static TaggedValue divergent() { return {std::numeric_limits<double>::infinity(), Regularity::divergent}; }
  static TaggedValue undefined() { return {std::numeric_limits<double>::quiet_NaN(), Regularity::undefined}; }

  bool is_finite() const noexcept { return status == Regularity::finite; }
  double operator*() const {
    if (status != Regularity::finite) throw SingularityError("value is " + to_string(status));
    return value;
  }
};

/// <a^dag a> for `mode`. Works on unnormalised matrices (divides by the trace).
inline double mean_occupation(const Matrix& rho, const FockLayout& layout, std::size_t mode) {
  const Matrix n = number(layout, mode).entries;
  return ((rho * n).trace() / rho.trace()).real();
}

inline double mean_occupation(const DensityMatrix& rho, std::size_t mode) {
  return mean_occupation(rho.entries, rho.layout, mode);
}

/// Tr(rho a^dag a^dag a a) / Tr(rho a^dag a)^2, normalising rho internally.
inline TaggedValue g2_zero(const Matrix& rho, const FockLayout& layout, std::size_t mode) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  if (rho.rows() != n || rho.cols() != n) throw LayoutError("g2_zero: state has wrong size");
  const Matrix a = destroy(layout, mode).entries;
  const Matrix ad = a.adjoint();
  const Complex tr = rho.trace();
  const Complex n1 = (rho * ad * a).trace() / tr;
  const Complex n2 = (rho * ad * ad * a * a).trace() / tr;
  if (!(std::abs(n1) > 0.0)) return TaggedValue::undefined();
  return TaggedValue::finite(n2.real() / (n1.real() * n1.real()));
}

inline TaggedValue g2_zero(const DensityMatrix& rho, std::size_t mode = kCw) {
  return g2_zero(rho.entries, rho.layout, mode);
}

/// Reduced single-mode density matrix (partial trace over all other modes).
inline Matrix reduced_state(const DensityMatrix& rho, std::size_t mode) {
  const auto& layout = rho.layout;
  layout.check_mode(mode);
  const auto d = static_cast<Eigen::Index>(layout.dim(mode));
  Matrix out = Matrix::Zero(d, d);
  const std::size_t total = layout.total_dim();
  for (std::size_t r = 0; r < total; ++r) {
    auto occ_r = layout.occupation(r);
    for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k) {
      auto occ_c = occ_r;
      occ_c[mode] = k;
      const auto c = layout.index(occ_c);
      out(static_cast<Eigen::Index>(occ_r[mode]), static_cast<Eigen::Index>(k)) +=
          rho.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

struct PhotonDistribution {
  std::vector<double> probabilities;             // P(n), n = 0..dim-1
  double mean = 0.0;
  std::vector<double> poisson_reference;         // Poisson with the same mean
  std::vector<std::optional<double>> relative;   // (P - Pois)/Pois, absent where Pois underflows
};

inline PhotonDistribution photon_distribution(const DensityMatrix& rho, std::size_t mode = kCw) {
  rho.layout.check_mode(mode);
  const std::size_t d = rho.layout.dim(mode);
  PhotonDistribution out;
  out.probabilities.assign(d, 0.0);
  for (std::size_t i = 0; i < rho.layout.total_dim(); ++i) {
    const auto occ = rho.layout.occupation(i);
    const auto ii = static_cast<Eigen::Index>(i);
    out.probabilities[occ[mode]] += rho.entries(ii, ii).real();
  }
  for (std::size_t n = 0; n < d; ++n) out.mean += static_cast<double>(n) * out.probabilities[n];
  out.poisson_reference.resize(d);
  out.relative.resize(d);
  for (std::size_t n = 0; n < d; ++n) {
    double pois = 0.0;
    if (out.mean > 0.0) {
      const double nn = static_cast<double>(n);
      pois = std::exp(-out.mean + nn * std::log(out.mean) - std::lgamma(nn + 1.0));
    } else {
      pois = n == 0 ? 1.0 : 0.0;
    }
    out.poisson_reference[n] = pois;
    if (pois >= std::numeric_limits<double>::min()) out.relative[n] = (out.probabilities[n] - pois) / pois;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Few-excitation spectra

enum class Subspace { single_excitation, two_excitation };

inline std::string to_string(Subspace s) {
  return s == Subspace::single_excitation ? "single-excitation" : "two-excitation";
}

struct SpectralReport {
  Subspace subspace = Subspace::single_excitation;
  std::vector<Complex> eigenvalues;     // closed form, ordered (+, -) or (+, 0, -)
  std::vector<Vector> eigenvectors;     // unit-normalised right eigenvectors, same order
  Complex splitting;                    // E+ - E- (single) or E+ - E0 (two)
  double overlap = 0.0;                 // |<psi+|psi->| or |<psi+|psi0>|
  std::vector<Complex> numeric_eigenvalues;  // projected drive-free Hamiltonian
  double closed_form_error = 0.0;       // max |closed - numeric| after matching
};

/// Basis states of a subspace, in the order used by SpectralReport vectors:
/// single (|1,0>, |0,1>), two (|2,0>, |1,1>, |0,2>).
inline std::vector<std::size_t> subspace_basis(const FockLayout& layout, Subspace s) {
  if (s == Subspace::single_excitation) return {layout.index({1, 0}), layout.index({0, 1})};
  return {layout.index({2, 0}), layout.index({1, 1}), layout.index({0, 2})};
}

/// Drive-free effective Hamiltonian projected onto a subspace.
inline Matrix projected_hamiltonian(const ModelParams& params, Subspace s) {
  ModelParams p = params;
  p.F = 0.0;
  const FockLayout layout{3, 3};
  const Matrix h = effective_hamiltonian(p, layout).entries;
  const auto basis = subspace_basis(layout, s);
  const auto k = static_cast<Eigen::Index>(basis.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out(i, j) = h(static_cast<Eigen::Index>(basis[i]), static_cast<Eigen::Index>(basis[j]));
    }
  }
  return out;
}

namespace detail {

inline double unit_overlap(const Vector& a, const Vector& b) {
  return std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm()));
}

// Greedy nearest matching; returns the largest matched distance.
inline double match_error(std::vector<Complex> closed, std::vector<Complex> numeric) {
  double worst = 0.0;
  for (const auto& c : closed) {
    auto it = std::min_element(numeric.begin(), numeric.end(),
                               [&](Complex x, Complex y) { return std::abs(x - c) < std::abs(y - c); });
    worst = std::max(worst, std::abs(*it - c));
    numeric.erase(it);
  }
  return worst;
}

}  // namespace detail

/// Closed-form drive-free spectrum of the single- or two-excitation subspace,
/// in units of gamma, cross-checked by diagonalising the projected Hamiltonian.
/// At an exceptional point the eigenvectors coalesce and overlap is 1.
inline SpectralReport subspace_spectrum(const ModelParams& params, Subspace s) {
  params.validate();
  const auto r = scattering_rates(params);
  const Complex e1 = r.e1 * params.gamma;
  const Complex e2 = r.e2 * params.gamma;
  const Complex c = std::sqrt(e1 * e2);
  const double tiny = 1e-300;

  SpectralReport rep;
  rep.subspace = s;
  if (s == Subspace::single_excitation) {
    const Complex base = (params.delta - params.U) * params.gamma;
    rep.eigenvalues = {base + c, base - c};
    Vector plus(2), minus(2);
    if (std::abs(e1) < tiny && std::abs(e2) < tiny) {
      plus << 1.0, 0.0;
      minus << 0.0, 1.0;
    } else if (std::abs(e1) >= std::abs(e2)) {
      plus << e1, c;
      minus << e1, -c;
    } else {
      plus << c, e2;
      minus << -c, e2;
    }
    rep.eigenvectors = {plus.normalized(), minus.normalized()};
    rep.splitting = 2.0 * c;
    rep.overlap = detail::unit_overlap(plus, minus);
  } else {
    const Complex base = (2.0 * params.delta - 4.0 * params.U) * params.gamma;
    rep.eigenvalues = {base + 2.0 * c, base, base - 2.0 * c};
    const double r2 = std::sqrt(2.0);
    Vector plus(3), zero(3), minus(3);
    if (std::abs(e1) < tiny && std::abs(e2) < tiny) {
      plus << 1.0, 0.0, 0.0;
      zero << 0.0, 1.0, 0.0;
      minus << 0.0, 0.0, 1.0;
    } else {
      plus << r2 * e1, 2.0 * c, r2 * e2;
      zero << -e1, 0.0, e2;
      minus << r2 * e1, -2.0 * c, r2 * e2;
    }
    rep.eigenvectors = {plus.normalized(), zero.normalized(), minus.normalized()};
    rep.splitting = 2.0 * c;
    rep.overlap = detail::unit_overlap(plus, zero);
  }

  Eigen::ComplexEigenSolver<Matrix> es(projected_hamiltonian(params, s), false);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) rep.numeric_eigenvalues.push_back(es.eigenvalues()(k));
  rep.closed_form_error = detail::match_error(rep.eigenvalues, rep.numeric_eigenvalues);
  return rep;
}

struct SplittingRow {
  double mu = 0.0;
  double splitting_re = 0.0;
  double splitting_im = 0.0;
  double overlap = 0.0;
};

inline std::vector<SplittingRow> splitting_scan(const ModelParams& params, const std::vector<double>& mu_grid,
                                                Subspace s) {
  if (mu_grid.empty()) throw ConfigError("splitting_scan: empty mu grid");
  std::vector<SplittingRow> rows;
  rows.reserve(mu_grid.size());
  ModelParams p = params;
  for (double mu : mu_grid) {
    p.mu = mu;
    const auto rep = subspace_spectrum(p, s);
    rows.push_back({mu, rep.splitting.real(), rep.splitting.imag(), rep.overlap});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Few-photon populations along a detuning scan

struct ProbabilityRow {
  double delta = 0.0;
  double p10 = 0.0, p01 = 0.0, p20 = 0.0, p11 = 0.0, p02 = 0.0;  // <n1,n2|rho|n1,n2>
  TaggedValue g2;
  bool converged = false;
  std::string error;
};

inline ProbabilityRow probability_row(const ModelParams& params, const FockLayout& layout, const SolverConfig& cfg,
                                      SteadyMethod method) {
  ProbabilityRow row;
  row.delta = params.delta;
  try {
    const auto rep = solve_steady(params, layout, cfg, method);
    auto pop = [&](std::size_t n1, std::size_t n2) {
      const auto i = static_cast<Eigen::Index>(layout.index({n1, n2}));
      return rep.rho.entries(i, i).real();
    };
    row.p10 = pop(1, 0);
    row.p01 = pop(0, 1);
    row.p20 = pop(2, 0);
    row.p11 = pop(1, 1);
    row.p02 = pop(0, 2);
    row.g2 = g2_zero(rep.rho, kCw);
    row.converged = true;
  } catch (const std::runtime_error& e) {
    row.error = e.what();
  }
  return row;
}

inline std::vector<ProbabilityRow> probability_trace(const ModelParams& params, const std::vector<double>& delta_grid,
                                                     const FockLayout& layout = FockLayout{4, 4},
                                                     const SolverConfig& cfg = {},
                                                     SteadyMethod method = SteadyMethod::liouvillian_eigen) {
  if (layout.modes() != 2 || layout.dim(kCw) < 3 || layout.dim(kCcw) < 3) {
    throw LayoutError("probability_trace needs a 2-mode layout with dims >= 3");
  }
  std::vector<ProbabilityRow> rows;
  rows.reserve(delta_grid.size());
  ModelParams p = params;
  for (double d : delta_grid) {
    p.delta = d;
    rows.push_back(probability_row(p, layout, cfg, method));
  }
  return rows;
}

}  // namespace nhblockade
