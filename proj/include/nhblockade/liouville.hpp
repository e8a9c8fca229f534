#pragma once

// Trace-preserving non-Hermitian master equation
//
//   drho/dt = -i[H+, rho] - i{H-, rho} + sum_j k_j D(rho, a_j) + 2i Tr(rho H-) rho,
//   D(rho, o) = 2 o rho o^dag - o^dag o rho - rho o^dag o,
//
// and two independent ways to reach its steady state: fixed-step RK4 from
// the vacuum, and the rightmost eigenmatrix of the linear generator obtained
// by dropping the 2i Tr(rho H-) rho term (the nonlinear flow is the
// trace-normalised flow of that linear one).

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhblockade/error.hpp"
#include "nhblockade/hilbert.hpp"
#include "nhblockade/model.hpp"

namespace nhblockade {

/// Hermitian, unit-trace, positive semidefinite state.
struct DensityMatrix {
  FockLayout layout;
  Matrix entries;

  DensityMatrix() = default;
  DensityMatrix(FockLayout l, Matrix m) : layout(std::move(l)), entries(std::move(m)) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    if (entries.rows() != n || entries.cols() != n) throw LayoutError("density matrix has wrong size");
  }

  static DensityMatrix projector(const FockLayout& layout, std::size_t index) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    Matrix m = Matrix::Zero(n, n);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return {layout, std::move(m)};
  }
  static DensityMatrix vacuum(const FockLayout& layout) { return projector(layout, 0); }
  static DensityMatrix maximally_mixed(const FockLayout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    return {layout, Matrix::Identity(n, n) / static_cast<double>(n)};
  }
  static DensityMatrix pure(const FockLayout& layout, const Vector& psi) {
    const Vector v = psi / psi.norm();
    return {layout, v * v.adjoint()};
  }

  Complex trace() const { return entries.trace(); }
  double hermiticity_error() const { return max_abs_diff(entries, entries.adjoint()); }
  double min_eigenvalue() const {
    const Matrix h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Throws unless the state is Hermitian, unit-trace and PSD within tolerance.
  void check(double herm_tol = 1e-10, double trace_tol = 1e-10, double psd_tol = 1e-8) const {
    if (hermiticity_error() > herm_tol) throw PositivityError("density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > trace_tol) throw PositivityError("density matrix trace differs from 1");
    const double lo = min_eigenvalue();
    if (lo < -psd_tol) throw PositivityError("density matrix has eigenvalue " + std::to_string(lo));
  }
};

/// Numerical controls shared by both steady-state methods.
struct SolverConfig {
  double dt = 0.01;        // units 1/gamma
  double t_max = 200.0;    // units 1/gamma
  double tol = 1e-8;       // residual ||drho/dt||_F, units gamma
  double decay_scale = 1.0;  // dissipator coefficient per photonic mode, units gamma
  double positivity_tol = 1e-8;
  double degeneracy_tol = 1e-9;
  std::size_t max_eigen_dim = 64;
};

/// Dissipator coefficients for the photonic modes (CW, CCW); the mechanical
/// mode, if present, is undamped.
inline std::vector<double> photonic_decay_rates(const ModelParams& p, const SolverConfig& cfg) {
  return {cfg.decay_scale * p.gamma, cfg.decay_scale * p.gamma};
}

/// Reference dense evaluation of the master equation right-hand side.
/// decay_rates[j] multiplies D(rho, a_j); modes beyond decay_rates.size() are undamped.
inline Matrix master_rhs(const DensityMatrix& rho, const HamiltonianPair& pair,
                         std::span<const double> decay_rates) {
  if (!(rho.layout == pair.h_plus.layout) || !(rho.layout == pair.h_minus.layout)) {
    throw LayoutError("master_rhs: layout mismatch");
  }
  if (decay_rates.size() > rho.layout.modes()) throw LayoutError("master_rhs: too many decay rates");
  const Complex i(0.0, 1.0);
  const Matrix& r = rho.entries;
  const Matrix& hp = pair.h_plus.entries;
  const Matrix& hm = pair.h_minus.entries;
  Matrix out = -i * (hp * r - r * hp) - i * (hm * r + r * hm);
  for (std::size_t j = 0; j < decay_rates.size(); ++j) {
    const Matrix a = destroy(rho.layout, j).entries;
    const Matrix ad = a.adjoint();
    const Matrix n = ad * a;
    out += decay_rates[j] * (2.0 * a * r * ad - n * r - r * n);
  }
  out += 2.0 * i * (r * hm).trace() * r;
  return out;
}

/// Sparse, prepared form of the master equation used by the integrators.
class LindbladGenerator {
 public:
  using Sparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

  LindbladGenerator(const Operator& h, std::span<const double> decay_rates)
      : layout_(h.layout), rates_(decay_rates.begin(), decay_rates.end()) {
    if (rates_.size() > layout_.modes()) throw LayoutError("LindbladGenerator: too many decay rates");
    const Complex i(0.0, 1.0);
    Matrix h_nh = h.entries;
    for (std::size_t j = 0; j < rates_.size(); ++j) {
      const Matrix a = destroy(layout_, j).entries;
      h_nh -= i * rates_[j] * (a.adjoint() * a);
      jumps_.push_back(a.sparseView());
    }
    for (const auto& a : jumps_) jumps_adj_.push_back(Eigen::SparseMatrix<Complex, Eigen::ColMajor>(a.adjoint()));
    h_nh_ = h_nh.sparseView();
    h_nh_dense_ = std::move(h_nh);
    h_minus_ = (0.5 * (h.entries - h.entries.adjoint())).sparseView();
    hamiltonian_ = h.entries;
  }

  const FockLayout& layout() const noexcept { return layout_; }
  std::span<const double> decay_rates() const noexcept { return rates_; }
  const Matrix& hamiltonian() const noexcept { return hamiltonian_; }
  /// H - i sum_j k_j a_j^dag a_j.
  const Matrix& effective_nonhermitian() const noexcept { return h_nh_dense_; }

  /// Tr(H- rho).
  Complex trace_h_minus(const Matrix& rho) const {
    Complex acc = 0.0;
    for (Eigen::Index r = 0; r < h_minus_.outerSize(); ++r) {
      for (Sparse::InnerIterator it(h_minus_, r); it; ++it) acc += it.value() * rho(it.col(), it.row());
    }
    return acc;
  }

  /// Linear part only (no 2i Tr(rho H-) rho term).
  Matrix apply_linear(const Matrix& rho) const {
    const Complex i(0.0, 1.0);
    const Matrix hr = h_nh_ * rho;
    const Matrix hr_dag = h_nh_ * rho.adjoint();
    Matrix out = -i * hr + i * hr_dag.adjoint();
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      const Matrix ar = jumps_[j] * rho;
      const Matrix aar = jumps_[j] * ar.adjoint();
      out += (2.0 * rates_[j]) * aar.adjoint();
    }
    return out;
  }

  Matrix apply(const Matrix& rho) const {
    const Complex i(0.0, 1.0);
    Matrix out = apply_linear(rho);
    out += (2.0 * i * trace_h_minus(rho)) * rho;
    return out;
  }

  /// apply() for Hermitian rho, writing into preallocated `out` with scratch
  /// t1, t2 (all d x d). For rho = rho^dag the right-hand side is A + A^dag with
  /// A = -i H_nh rho + sum_j k_j a_j rho a_j^dag + i Tr(H- rho) rho.
  void apply_hermitian(const Matrix& rho, Matrix& out, Matrix& t1, Matrix& t2) const {
    const Complex i(0.0, 1.0);
    t2.noalias() = h_nh_ * rho;
    t2 *= -i;
    t2 += (i * trace_h_minus(rho)) * rho;
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      t1.noalias() = jumps_[j] * rho;
      t2.noalias() += rates_[j] * (t1 * jumps_adj_[j]);
    }
    out = t2 + t2.adjoint();
  }

  /// Column-major vectorised linear superoperator, vec(A X B) = (B^T kron A) vec(X).
  Matrix superoperator() const {
    const auto n = static_cast<Eigen::Index>(layout_.total_dim());
    const Complex i(0.0, 1.0);
    const Matrix id = Matrix::Identity(n, n);
    Matrix l = -i * detail::kron(id, h_nh_dense_) + i * detail::kron(h_nh_dense_.conjugate(), id);
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      const Matrix a = Matrix(jumps_[j]);
      l += (2.0 * rates_[j]) * detail::kron(a.conjugate(), a);
    }
    return l;
  }

  /// Largest |z| among generator eigenvalues. The jump terms strictly lower
  /// the photon number, so the spectrum is {-i(l_i - conj(l_j))} over the
  /// eigenvalues l of H - i sum k n.
  double spectral_radius() const {
    Eigen::ComplexEigenSolver<Matrix> es(h_nh_dense_, false);
    const auto& ev = es.eigenvalues();
    double best = 0.0;
    for (Eigen::Index a = 0; a < ev.size(); ++a) {
      for (Eigen::Index b = 0; b < ev.size(); ++b) best = std::max(best, std::abs(ev(a) - std::conj(ev(b))));
    }
    return best;
  }

 private:
  FockLayout layout_;
  std::vector<double> rates_;
  std::vector<Sparse> jumps_;
  std::vector<Eigen::SparseMatrix<Complex, Eigen::ColMajor>> jumps_adj_;
  Sparse h_nh_;
  Sparse h_minus_;
  Matrix h_nh_dense_;
  Matrix hamiltonian_;
};

enum class SteadyMethod { time_evolution, liouvillian_eigen };

inline std::string to_string(SteadyMethod m) {
  return m == SteadyMethod::time_evolution ? "time-evolution" : "liouvillian-eigen";
}

struct SteadyStateReport {
  DensityMatrix rho;
  SteadyMethod method = SteadyMethod::time_evolution;
  double residual = 0.0;  // ||drho/dt||_F at the returned state, units gamma
  std::size_t steps = 0;
  double dt = 0.0;        // step actually used (time evolution)
  std::optional<Complex> rightmost_eigenvalue;
};

namespace detail {

inline void hermitize_normalize(Matrix& rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();
}

inline double rk4_step_limit(const LindbladGenerator& gen) {
  const double radius = gen.spectral_radius();
  return radius > 0.0 ? 2.5 / radius : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Classical RK4 on Hermitian states with all buffers allocated once.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const LindbladGenerator& gen) : gen_(gen) {
    const auto n = static_cast<Eigen::Index>(gen.layout().total_dim());
    for (Matrix* m : {&k1_, &k2_, &k3_, &k4_, &stage_, &t1_, &t2_}) m->resize(n, n);
  }

  /// ||drho/dt||_F at rho (also caches it as k1 for the next step).
  double residual(const Matrix& rho) {
    gen_.apply_hermitian(rho, k1_, t1_, t2_);
    return k1_.norm();
  }

  /// Advance rho by dt, reusing k1 from the last residual() call on this rho.
  void step_from_k1(Matrix& rho, double dt) {
    stage_ = rho + (0.5 * dt) * k1_;
    gen_.apply_hermitian(stage_, k2_, t1_, t2_);
    stage_ = rho + (0.5 * dt) * k2_;
    gen_.apply_hermitian(stage_, k3_, t1_, t2_);
    stage_ = rho + dt * k3_;
    gen_.apply_hermitian(stage_, k4_, t1_, t2_);
    rho += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    stage_ = rho.adjoint();
    rho = 0.5 * (rho + stage_);
    rho /= rho.trace();
  }

  void step(Matrix& rho, double dt) {
    residual(rho);
    step_from_k1(rho, dt);
  }

 private:
  const LindbladGenerator& gen_;
  Matrix k1_, k2_, k3_, k4_, stage_, t1_, t2_;
};


/// Fixed-step RK4 on the nonlinear equation until ||drho/dt||_F < tol.
/// The step is capped by the RK4 stability limit of the generator.
inline SteadyStateReport evolve_to_steady(const LindbladGenerator& gen, const SolverConfig& cfg,
                                          std::optional<DensityMatrix> initial = std::nullopt,
                                          double time_unit = 1.0) {
  if (!(cfg.tol > 0.0)) throw ConfigError("residual tolerance must be > 0");
  if (!(cfg.dt > 0.0) || !(cfg.t_max > 0.0)) throw ConfigError("dt and t_max must be > 0");
  const double dt = std::min(cfg.dt / time_unit, detail::rk4_step_limit(gen));
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.t_max / time_unit / dt));
  const double tol = cfg.tol * time_unit;

  Matrix rho = initial ? initial->entries : DensityMatrix::vacuum(gen.layout()).entries;
  if (initial && !(initial->layout == gen.layout())) throw LayoutError("initial state layout mismatch");
  detail::hermitize_normalize(rho);

  Rk4Stepper stepper(gen);
  for (std::size_t step = 0;; ++step) {
    const double residual = stepper.residual(rho);
    if (residual < tol) {
      SteadyStateReport rep{DensityMatrix(gen.layout(), rho), SteadyMethod::time_evolution, residual / time_unit,
                            step, dt * time_unit, std::nullopt};
      const double lo = rep.rho.min_eigenvalue();
      if (lo < -cfg.positivity_tol) {
        throw PositivityError("steady state has eigenvalue " + std::to_string(lo));
      }
      return rep;
    }
    if (step >= max_steps) {
      throw ConvergenceError("time evolution did not converge by t_max: residual " + std::to_string(residual / time_unit),
                             residual / time_unit);
    }
    stepper.step_from_k1(rho, dt);
  }
}

/// Rightmost eigenmatrix of the linear superoperator, Hermitised and trace-normalised.
inline SteadyStateReport steady_by_eigen(const LindbladGenerator& gen, const SolverConfig& cfg,
                                         double time_unit = 1.0) {
  const auto n = static_cast<Eigen::Index>(gen.layout().total_dim());
  if (gen.layout().total_dim() > cfg.max_eigen_dim) {
    throw ConfigError("steady_by_eigen: total_dim " + std::to_string(n) + " exceeds " +
                      std::to_string(cfg.max_eigen_dim));
  }
  Eigen::ComplexEigenSolver<Matrix> es(gen.superoperator(), true);
  if (es.info() != Eigen::Success) throw ConvergenceError("superoperator eigendecomposition failed", 0.0);
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < ev.size(); ++k) {
    if (ev(k).real() > ev(best).real()) best = k;
  }
  std::size_t multiplicity = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k).real() - ev(best).real()) < cfg.degeneracy_tol * time_unit) ++multiplicity;
  }
  if (multiplicity > 1) {
    throw DegeneracyError("rightmost Liouvillian eigenvalue has multiplicity " + std::to_string(multiplicity),
                          multiplicity);
  }
  Matrix rho = Eigen::Map<const Matrix>(es.eigenvectors().col(best).data(), n, n);
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw ConvergenceError("rightmost eigenmatrix is traceless", 0.0);
  detail::hermitize_normalize(rho);

  SteadyStateReport rep{DensityMatrix(gen.layout(), rho), SteadyMethod::liouvillian_eigen,
                        gen.apply(rho).norm() / time_unit, 0, 0.0, ev(best) / time_unit};
  const double lo = rep.rho.min_eigenvalue();
  if (lo < -cfg.positivity_tol) throw PositivityError("steady state has eigenvalue " + std::to_string(lo));
  return rep;
}

/// Generator of the effective two-mode Kerr model.
inline LindbladGenerator effective_generator(const ModelParams& p, const FockLayout& layout,
                                             const SolverConfig& cfg) {
  const auto rates = photonic_decay_rates(p, cfg);
  return LindbladGenerator(effective_hamiltonian(p, layout), rates);
}

inline SteadyStateReport evolve_to_steady(const ModelParams& p, const FockLayout& layout,
                                          const SolverConfig& cfg,
                                          std::optional<DensityMatrix> initial = std::nullopt) {
  return evolve_to_steady(effective_generator(p, layout, cfg), cfg, std::move(initial), 1.0 / p.gamma);
}

inline SteadyStateReport steady_by_eigen(const ModelParams& p, const FockLayout& layout, const SolverConfig& cfg) {
  return steady_by_eigen(effective_generator(p, layout, cfg), cfg, 1.0 / p.gamma);
}

inline SteadyStateReport solve_steady(const ModelParams& p, const FockLayout& layout, const SolverConfig& cfg,
                                      SteadyMethod method) {
  return method == SteadyMethod::time_evolution ? evolve_to_steady(p, layout, cfg)
                                                : steady_by_eigen(p, layout, cfg);
}

}  // namespace nhblockade
