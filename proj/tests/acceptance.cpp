// Acceptance checks. Prints one PASS/FAIL line per criterion with the
// measured numbers, and exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nhblockade/analytics.hpp"
#include "nhblockade/liouville.hpp"
#include "nhblockade/observables.hpp"
#include "nhblockade/validation.hpp"

using namespace nhblockade;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ModelParams ep_params(double mu_over_pi, double delta, double U) {
  ModelParams p;
  p.lambda1 = {1.5, -0.355};
  p.lambda2 = {1.4, -0.645};
  p.m = 4;
  p.mu = mu_over_pi * kPi;
  p.delta = delta;
  p.U = U;
  p.F = 0.1;
  return p;
}

ModelParams non_ep_params(double delta, double U) {
  ModelParams p = ep_params(0.125, delta, U);
  p.lambda1 = {1.5, -0.5};
  p.lambda2 = {1.4, -0.5};
  return p;
}

ModelParams upb_params(Complex lambda1, double mu_over_pi, double delta, double U) {
  ModelParams p = ep_params(mu_over_pi, delta, U);
  p.lambda1 = lambda1;
  p.lambda2 = {1.4, -1.0};
  return p;
}

const FockLayout kLayout{4, 4};

double g2_numeric(const ModelParams& p, const FockLayout& l = kLayout) {
  return g2_zero(steady_by_eigen(p, l, SolverConfig{}).rho).value;
}

// --------------------------------------------------------------------------

Outcome c1_ep_locus() {
  const auto sol = find_eps({1.5, -0.355}, {1.4, -0.645}, 4, 1, 5);
  const std::vector<double> ref{0.1171, 0.1329, 0.3671, 0.3829, 0.6171, 0.6329};
  double worst = sol.mu_values.size() == ref.size() ? 0.0 : 1.0;
  for (std::size_t k = 0; k < std::min(ref.size(), sol.mu_values.size()); ++k) {
    worst = std::max(worst, std::abs(sol.mu_values[k] / kPi - ref[k]));
  }
  const auto m2 = find_eps({1.5, -0.355}, {1.4, -0.645}, 2);
  double worst2 = 0.0;
  for (double r : {0.2343, 0.2657}) {
    double best = 1.0;
    for (double mu : m2.mu_values) best = std::min(best, std::abs(mu / kPi - r));
    worst2 = std::max(worst2, best);
  }
  return {worst < 5e-4 && worst2 < 5e-4,
          "m=4: " + std::to_string(sol.mu_values.size()) + " angles, max |dmu| = " + fmt("%.2e", worst) +
              " pi; m=2: max |dmu| = " + fmt("%.2e", worst2) + " pi"};
}

Outcome c2_cpb_at_ep() {
  std::string d;
  bool ok = true;
  for (double U : {2.0, 3.0}) {
    for (double mu : {0.1171, 0.1329}) {
      const double g = g2_numeric(ep_params(mu, U, U));
      ok = ok && g < 0.01;
      d += "U=" + fmt("%g", U) + " mu=" + fmt("%g", mu) + "pi g2=" + fmt("%.4g", g) + "; ";
    }
  }
  return {ok, d + "threshold 0.01"};
}

Outcome c3_bunching() {
  const double g4 = g2_numeric(ep_params(0.0, 2.0, 2.0));
  const double g5 = g2_numeric(ep_params(0.0, 2.0, 2.0), FockLayout{5, 5});
  return {g4 > 1e4, "g2 = " + fmt("%.4g", g4) + " (dims [4,4]), " + fmt("%.4g", g5) + " (dims [5,5]); threshold 1e4"};
}

Outcome c4_analytic_vs_numeric() {
  int bad = 0, total = 0;
  double worst = 0.0, worst_mu = 0.0;
  for (int k = 0; k <= 140; ++k) {
    const double mu = 0.7 * k / 140.0;
    const auto p = ep_params(mu, 2.0, 2.0);
    const double gn = g2_numeric(p);
    const auto ga = g2_analytic(p);
    ++total;
    double err;
    bool ok;
    if (!ga.is_finite()) {
      ok = false;
      err = std::numeric_limits<double>::infinity();
    } else if (gn > 1e-4) {
      err = std::abs(ga.value - gn) / gn;
      ok = err <= 0.15;
    } else {
      err = std::abs(ga.value - gn);
      ok = err <= 1e-4;
    }
    if (!ok) ++bad;
    if (err > worst) {
      worst = err;
      worst_mu = mu;
    }
  }
  return {bad == 0, std::to_string(bad) + "/" + std::to_string(total) + " grid points outside tolerance; worst error " +
                        fmt("%.3g", worst) + " at mu = " + fmt("%.4f", worst_mu) + "pi"};
}

// Local minima of g2(Delta) on a fine grid.
std::vector<std::pair<double, double>> local_minima(const ModelParams& base, double lo, double hi, double step) {
  std::vector<double> ds, gs;
  for (double d = lo; d <= hi + 1e-12; d += step) {
    ModelParams p = base;
    p.delta = d;
    ds.push_back(d);
    gs.push_back(g2_numeric(p));
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 1; k + 1 < gs.size(); ++k) {
    if (gs[k] < gs[k - 1] && gs[k] < gs[k + 1]) out.push_back({ds[k], gs[k]});
  }
  return out;
}

Outcome c5_non_ep() {
  bool ok = true;
  std::string d;
  for (auto [U, lo_ref, hi_ref] : {std::tuple{2.0, 1.9, 2.1}, std::tuple{3.0, 2.9, 3.1}}) {
    const auto sol = cpb_non_ep(non_ep_params(U, U));
    std::vector<double> deltas;
    for (std::size_t k = 0; k < sol.mu_values.size(); ++k) {
      if (std::abs(sol.mu_values[k] / kPi - 0.125) < 1e-3) deltas.push_back(sol.delta_values[k]);
    }
    std::sort(deltas.begin(), deltas.end());
    const bool cond_ok = deltas.size() == 2 && std::abs(deltas[0] - lo_ref) < 1e-3 && std::abs(deltas[1] - hi_ref) < 1e-3;
    ok = ok && cond_ok;
    d += "U=" + fmt("%g", U) + ": condition " + (cond_ok ? "ok" : "MISMATCH");
    const auto minima = local_minima(non_ep_params(U, U), U - 0.5, U + 0.5, 0.005);
    for (double target : {lo_ref, hi_ref}) {
      bool hit = false;
      double nearest_g = std::numeric_limits<double>::quiet_NaN();
      for (auto [dm, gm] : minima) {
        if (std::abs(dm - target) <= 0.05) {
          nearest_g = gm;
          if (gm < 1.0) hit = true;
        }
      }
      ok = ok && hit;
      d += ", min near " + fmt("%g", target) + ": " + (std::isnan(nearest_g) ? std::string("none") : fmt("%.4g", nearest_g));
    }
    d += "; ";
  }
  return {ok, d};
}

struct UpbRef {
  Complex lambda1;
  double U, mu, delta;
};
const std::vector<UpbRef> kUpbRefs{{{1.5, -0.5}, 2.0, 0.1165, 1.9598},
                                   {{1.5, -0.5}, 3.0, 0.1165, 2.9726},
                                   {{1.6, -0.5}, 2.0, 0.1132, 1.9855},
                                   {{1.6, -0.5}, 3.0, 0.1132, 2.9903}};

Outcome c6_upb() {
  bool ok = true;
  std::string d;
  for (const auto& ref : kUpbRefs) {
    const auto sol = upb_conditions(upb_params(ref.lambda1, 0.0, 0.0, ref.U));
    std::size_t best = sol.mu_values.size();
    double best_err = 1e300;
    for (std::size_t k = 0; k < sol.mu_values.size(); ++k) {
      const double err = std::max(std::abs(sol.mu_values[k] / kPi - ref.mu), std::abs(sol.delta_values[k] - ref.delta));
      if (err < best_err) {
        best_err = err;
        best = k;
      }
    }
    if (best == sol.mu_values.size()) {
      ok = false;
      d += "no UPB point; ";
      continue;
    }
    const auto p = upb_params(ref.lambda1, sol.mu_values[best] / kPi, sol.delta_values[best], ref.U);
    const auto w = weak_drive_amplitudes(p);
    const double g = g2_numeric(p);
    const bool here = best_err < 1e-3 && std::abs(w.c20) < 1e-9 * p.F * p.F && g < 1.0;
    ok = ok && here;
    d += "(" + fmt("%.4f", sol.mu_values[best] / kPi) + "pi, " + fmt("%.4f", sol.delta_values[best]) +
         ") err " + fmt("%.1e", best_err) + " |C20|/F^2 " + fmt("%.1e", std::abs(w.c20) / (p.F * p.F)) + " g2 " +
         fmt("%.3g", g) + "; ";
  }
  return {ok, d};
}

Outcome c7_upb_impossible_at_ep() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(-kPi, kPi), mag(0.3, 2.0), det(-4.0, 4.0), kerr(0.5, 4.0);
  int draws = 0, failures = 0;
  double worst_amp = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double r = mag(rng);
    ModelParams p;
    p.lambda1 = std::polar(r, ang(rng));
    p.lambda2 = std::polar(r, ang(rng));
    p.m = 1 + k % 5;
    p.U = kerr(rng);
    p.F = 0.1;
    p.delta = det(rng);
    const auto eps = find_eps(p.lambda1, p.lambda2, p.m);
    for (std::size_t j = 0; j < eps.mu_values.size(); ++j) {
      if (eps.labels[j] != "E2=0") continue;
      p.mu = eps.mu_values[j];
      const auto rates = scattering_rates(p);
      ++draws;
      bool ok = true;
      try {
        // Structural zeros with E2 = 0 imposed exactly.
        const auto exact = weak_drive_amplitudes({rates.e1, 0.0}, p.delta, p.U, p.F);
        ok = ok && exact.c01 == Complex(0.0) && exact.c11 == Complex(0.0) && exact.c02 == Complex(0.0);
        // Same amplitudes with E2 as computed from the angle (round-off size).
        const auto w = weak_drive_amplitudes(rates, p.delta, p.U, p.F);
        const double amp = std::max({std::abs(w.c01), std::abs(w.c11), std::abs(w.c02)}) /
                           std::max({std::abs(w.c10), std::abs(w.c20), 1e-300});
        worst_amp = std::max(worst_amp, amp);
        ok = ok && amp < 1e-12;
      } catch (const SingularityError&) {
      }
      // C20 = 0 reduces to 2 delta1 delta2^2 = 0, so the only admissible root is Delta = U.
      for (const auto& z : analytics_detail::upb_cubic_roots(p.U, rates.product().real())) {
        const bool at_u = std::abs(z - p.U) < 1e-6 * p.U;
        const bool at_2u = std::abs(z - 2.0 * p.U) < 1e-4 * p.U;
        ok = ok && (at_u || at_2u);
      }
      const auto upb = upb_conditions(p);
      for (std::size_t i = 0; i < upb.delta_values.size(); ++i) ok = ok && std::abs(upb.delta_values[i] - p.U) < 1e-9;
      ok = ok && pathway_report(p, 1e-9).paths_to_20 == 1;
      if (!ok) ++failures;
    }
  }
  return {failures == 0 && draws > 100, std::to_string(draws) + " EP draws, " + std::to_string(failures) +
                                            " failures; worst CCW amplitude ratio " + fmt("%.1e", worst_amp)};
}

Outcome c8_full_model() {
  FullModelConfig fc;
  fc.mech_dim = 8;
  fc.check_truncation = false;
  const SolverConfig sc;
  double worst_dev = 0.0, worst_trunc = 0.0;
  std::string d;
  for (double mu : {0.05, 0.1171, 0.1329, 0.2, 0.3}) {
    ModelParams p = ep_params(mu, 2.0, 2.0);
    p.omega_m = 30.0;
    p.g = 7.746;
    p.U = *p.induced_kerr();
    const auto rec = validate_full_vs_effective(p, kLayout, fc, sc);
    worst_dev = std::max(worst_dev, rec.relative_deviation);
    d += fmt("%g", mu) + "pi: eff " + fmt("%.4g", rec.g2_effective.value) + " full " + fmt("%.4g", rec.g2_full.value);
    if (mu == 0.1171 || mu == 0.2) {
      const auto doubled = full_model_state(p, kLayout, 2 * fc.mech_dim, fc, sc);
      const double change = relative_change(rec.g2_full, g2_zero(doubled.rho));
      worst_trunc = std::max(worst_trunc, change);
      d += " doubled " + fmt("%.3e", change);
    }
    d += "; ";
  }
  return {worst_dev < 0.10 && worst_trunc < 0.01,
          d + "max deviation " + fmt("%.3g", worst_dev) + ", max truncation change " + fmt("%.2e", worst_trunc)};
}

Outcome c9_distribution() {
  const FockLayout l{5, 5};
  const auto at_ep = photon_distribution(steady_by_eigen(ep_params(0.1171, 2.0, 2.0), l, SolverConfig{}).rho);
  const auto off_ep = photon_distribution(steady_by_eigen(ep_params(0.125, 2.0, 2.0), l, SolverConfig{}).rho);
  const double r1 = at_ep.relative[1].value_or(std::nan(""));
  const double r2 = at_ep.relative[2].value_or(std::nan(""));
  const double r2off = off_ep.relative[2].value_or(std::nan(""));
  return {r1 > 0.0 && r2 < 0.0 && r2off > 0.0, "mu=0.1171pi: R(1) = " + fmt("%.4g", r1) + ", R(2) = " + fmt("%.4g", r2) +
                                                   "; mu=0.125pi: R(2) = " + fmt("%.4g", r2off)};
}

Outcome c10_cross_validation() {
  std::vector<ModelParams> points;
  for (double U : {2.0, 3.0})
    for (double mu : {0.1171, 0.1329}) points.push_back(ep_params(mu, U, U));
  points.push_back(ep_params(0.0, 2.0, 2.0));
  for (auto [U, d] : {std::pair{2.0, 1.9}, std::pair{2.0, 2.1}, std::pair{3.0, 2.9}, std::pair{3.0, 3.1}})
    points.push_back(non_ep_params(d, U));
  for (const auto& ref : kUpbRefs) points.push_back(upb_params(ref.lambda1, ref.mu, ref.delta, ref.U));

  // The mu = 0 point has a Liouvillian gap of ~1e-3 gamma, so the residual
  // tolerance is tightened until the state error (residual / gap) is below 1e-6.
  SolverConfig sc;
  sc.tol = 1e-10;
  sc.t_max = 5e4;
  double worst = 0.0, worst_state = 0.0;
  int failures = 0;
  std::string d;
  for (const auto& p : points) {
    try {
      const auto te = evolve_to_steady(p, kLayout, sc);
      const auto ei = steady_by_eigen(p, kLayout, sc);
      const double diff = max_abs_diff(te.rho.entries, ei.rho.entries);
      worst = std::max(worst, diff);
      for (const auto* r : {&te.rho, &ei.rho}) {
        worst_state = std::max({worst_state, r->hermiticity_error(), std::abs(r->trace() - 1.0), -r->min_eigenvalue()});
      }
      if (diff >= 1e-6) ++failures;
    } catch (const std::exception& e) {
      ++failures;
      d += std::string("solver error: ") + e.what() + "; ";
    }
  }
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_trace = 0.0;
  const std::vector<double> rates{1.0, 1.0};
  for (int k = 0; k < 100; ++k) {
    Matrix g(16, 16), h(16, 16);
    for (Eigen::Index i = 0; i < 16; ++i)
      for (Eigen::Index j = 0; j < 16; ++j) {
        g(i, j) = {n(rng), n(rng)};
        h(i, j) = {n(rng), n(rng)};
      }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    const auto out = master_rhs(DensityMatrix(kLayout, rho), hermitian_split(Operator(kLayout, h)), rates);
    worst_trace = std::max(worst_trace, std::abs(out.trace()));
  }
  const bool ok = failures == 0 && worst_trace < 1e-12 && worst_state < 1e-8;
  return {ok, d + std::to_string(points.size()) + " points, max |rho_evolve - rho_eigen| = " + fmt("%.2e", worst) +
                  ", max invariant violation " + fmt("%.1e", worst_state) + ", max |Tr rhs| = " +
                  fmt("%.1e", worst_trace)};
}

Outcome c11_spectral() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    ModelParams p;
    p.lambda1 = {u(rng), u(rng)};
    p.lambda2 = {u(rng), u(rng)};
    p.m = 1 + k % 6;
    p.mu = u(rng);
    p.delta = u(rng);
    p.U = std::abs(u(rng));
    for (auto s : {Subspace::single_excitation, Subspace::two_excitation})
      worst = std::max(worst, subspace_spectrum(p, s).closed_form_error);
  }
  const auto eps = find_eps({1.5, -0.355}, {1.4, -0.645}, 4);
  double worst_split = 0.0;
  for (double mu : eps.mu_values) {
    auto p = ep_params(mu / kPi, 2.0, 2.0);
    for (auto s : {Subspace::single_excitation, Subspace::two_excitation})
      worst_split = std::max(worst_split, std::abs(subspace_spectrum(p, s).splitting));
  }
  return {worst < 1e-10 && worst_split < 1e-6,
          "max closed-form error " + fmt("%.1e", worst) + ", max splitting at EP angles " + fmt("%.1e", worst_split)};
}

Outcome c12_mu0_feature() {
  std::vector<double> grid;
  for (int k = 0; k <= 300; ++k) grid.push_back(6.0 * k / 300.0);
  const auto rows = probability_trace(ep_params(0.0, 0.0, 2.0), grid);
  std::vector<double> g, p20;
  for (const auto& r : rows) {
    g.push_back(r.converged ? r.g2.value : std::nan(""));
    p20.push_back(r.p20);
  }
  double best_delta = std::nan(""), best_g = std::nan("");
  for (std::size_t k = 1; k + 1 < g.size(); ++k) {
    if (grid[k] < 3.5 || grid[k] > 4.5) continue;
    if (g[k] < g[k - 1] && g[k] < g[k + 1] && (std::isnan(best_g) || g[k] < best_g)) {
      best_g = g[k];
      best_delta = grid[k];
    }
  }
  // Local feature of P(2,0): a local extremum or a sign change of its discrete curvature.
  bool feature = false;
  double feature_at = std::nan("");
  if (!std::isnan(best_delta)) {
    for (std::size_t k = 2; k + 2 < p20.size(); ++k) {
      if (std::abs(grid[k] - best_delta) > 0.2) continue;
      const bool extremum = (p20[k] - p20[k - 1]) * (p20[k + 1] - p20[k]) < 0.0;
      const double c0 = p20[k + 1] - 2.0 * p20[k] + p20[k - 1];
      const double c1 = p20[k + 2] - 2.0 * p20[k + 1] + p20[k];
      if (extremum || c0 * c1 < 0.0) {
        feature = true;
        feature_at = grid[k];
        break;
      }
    }
  }
  const bool ok = !std::isnan(best_g) && best_g > 1.0 && feature;
  return {ok, std::isnan(best_g) ? std::string("no local minimum of g2 in [3.5, 4.5]")
                                 : "g2 local minimum " + fmt("%.4g", best_g) + " at Delta = " + fmt("%.2f", best_delta) +
                                       "; P(2,0) feature " +
                                       (feature ? "at Delta = " + fmt("%.2f", feature_at) : std::string("absent"))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"EP locus", c1_ep_locus},
      {"CPB at EP", c2_cpb_at_ep},
      {"bunching off EP", c3_bunching},
      {"analytic vs numeric g2", c4_analytic_vs_numeric},
      {"non-EP CPB", c5_non_ep},
      {"UPB points", c6_upb},
      {"UPB impossible at EPs", c7_upb_impossible_at_ep},
      {"effective vs full model", c8_full_model},
      {"photon distribution", c9_distribution},
      {"solver cross-validation", c10_cross_validation},
      {"spectral oracle", c11_spectral},
      {"mu = 0 feature near Delta = 2U", c12_mu0_feature},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
