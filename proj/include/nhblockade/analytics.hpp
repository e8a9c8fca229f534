#pragma once

// Weak-drive closed forms and optimal-condition solvers.
//
// Amplitudes C_{n1 n2} of the pure-state ansatz truncated at two excitations
// obey, at steady state, with C00 = 1 and the feedback terms sqrt(2) F C20
// and F C11 from the two-photon manifold dropped:
//
//   0 = d1 C10 + E1 C01 + F
//   0 = E2 C10 + d1 C01
//   0 = 2 d2 C20 + sqrt2 E1 C11 + sqrt2 F C10
//   0 = sqrt2 E2 C20 + 2 d2 C11 + sqrt2 E1 C02 + F C01
//   0 = sqrt2 E2 C11 + 2 d2 C02
//
// with d1 = Delta - U, d2 = Delta - 2U. All quantities here are in units of gamma.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nhblockade/error.hpp"
#include "nhblockade/hilbert.hpp"
#include "nhblockade/model.hpp"
#include "nhblockade/observables.hpp"

namespace nhblockade {

struct WeakDriveAmplitudes {
  Complex c10, c01, c20, c11, c02;
  double delta1 = 0.0;
  double delta2 = 0.0;
  Complex eta1;  // E1 E2 - d1^2
  Complex eta2;  // E1 E2 - d2^2
  Complex c20_closed;  // F^2 (2 d1 d2^2 + P d2 - P d1) / (2 sqrt2 d2 eta1 eta2)
  double residual = 0.0;  // max |row| of the linear system

  /// Weak-drive g2(0) = 2|C20|^2 / |C10|^4.
  double g2() const { return 2.0 * std::norm(c20) / std::pow(std::norm(c10), 2); }
};

namespace analytics_detail {

inline constexpr double kSingular = 1e-12;

inline Complex det3(const std::array<std::array<Complex, 3>, 3>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

}  // namespace analytics_detail

/// Solve the weak-drive system for given scattering rates. Cramer's rule
/// keeps structural zeros exact (E2 = 0 gives C01 = C11 = C02 = 0 bit-for-bit).
inline WeakDriveAmplitudes weak_drive_amplitudes(const ScatteringRates& r, double delta, double U, double F) {
  using analytics_detail::kSingular;
  WeakDriveAmplitudes w;
  const Complex e1 = r.e1, e2 = r.e2, P = r.e1 * r.e2;
  const double d1 = delta - U, d2 = delta - 2.0 * U;
  const double s2 = std::sqrt(2.0);
  w.delta1 = d1;
  w.delta2 = d2;
  w.eta1 = P - d1 * d1;
  w.eta2 = P - d2 * d2;
  if (std::abs(w.eta1) < kSingular) {
    throw SingularityError("weak-drive system singular: eta1 = E1E2 - delta1^2 vanishes (single-photon resonance)");
  }
  if (std::abs(d2) < kSingular || std::abs(w.eta2) < kSingular) {
    throw SingularityError("weak-drive system singular: two-photon resonance (delta2 = 0 or eta2 = 0)");
  }

  // single-excitation block, determinant d1^2 - P = -eta1
  const Complex det1 = d1 * d1 - P;
  w.c10 = (-F * d1) / det1;
  w.c01 = (e2 * F) / det1;

  // two-excitation block
  using M3 = std::array<std::array<Complex, 3>, 3>;
  const M3 a{{{2.0 * d2, s2 * e1, 0.0}, {s2 * e2, 2.0 * d2, s2 * e1}, {0.0, s2 * e2, 2.0 * d2}}};
  const std::array<Complex, 3> rhs{-s2 * F * w.c10, -F * w.c01, 0.0};
  const Complex det = analytics_detail::det3(a);
  std::array<Complex, 3> x{};
  for (int c = 0; c < 3; ++c) {
    M3 b = a;
    for (int row = 0; row < 3; ++row) b[row][c] = rhs[row];
    x[c] = analytics_detail::det3(b) / det;
  }
  w.c20 = x[0];
  w.c11 = x[1];
  w.c02 = x[2];

  w.c20_closed = F * F * (2.0 * d1 * d2 * d2 + P * d2 - P * d1) / (2.0 * s2 * d2 * w.eta1 * w.eta2);

  const std::array<Complex, 5> rows{
      d1 * w.c10 + e1 * w.c01 + F,
      e2 * w.c10 + d1 * w.c01,
      2.0 * d2 * w.c20 + s2 * e1 * w.c11 + s2 * F * w.c10,
      s2 * e2 * w.c20 + 2.0 * d2 * w.c11 + s2 * e1 * w.c02 + F * w.c01,
      s2 * e2 * w.c11 + 2.0 * d2 * w.c02,
  };
  for (const auto& v : rows) w.residual = std::max(w.residual, std::abs(v));
  return w;
}

inline WeakDriveAmplitudes weak_drive_amplitudes(const ModelParams& p) {
  p.validate();
  if (!(p.F > 0.0)) throw ConfigError("weak_drive_amplitudes needs F > 0");
  return weak_drive_amplitudes(scattering_rates(p), p.delta, p.U, p.F);
}

/// Lossless weak-drive g2(0):
/// |eta1 (2 d1 d2^2 + P d2 - P d1)|^2 / (4 |d1^2 d2 eta2|^2), P = E1 E2.
/// Divergent at a single-photon resonance (d1 = 0 with P != 0) or a
/// two-photon resonance; reduces to d1^2 / d2^2 when P = 0.
inline TaggedValue g2_analytic(const ScatteringRates& r, double delta, double U) {
  using analytics_detail::kSingular;
  const Complex P = r.product();
  const double d1 = delta - U, d2 = delta - 2.0 * U;
  if (std::abs(P) < kSingular) {
    if (std::abs(d2) < kSingular) return std::abs(d1) < kSingular ? TaggedValue::undefined() : TaggedValue::divergent();
    return TaggedValue::finite(d1 * d1 / (d2 * d2));
  }
  const Complex eta1 = P - d1 * d1, eta2 = P - d2 * d2;
  const double num = std::norm(eta1 * (2.0 * d1 * d2 * d2 + P * d2 - P * d1));
  if (std::abs(d1) < kSingular || std::abs(d2) < kSingular || std::abs(eta2) < kSingular) {
    return num < kSingular * kSingular ? TaggedValue::undefined() : TaggedValue::divergent();
  }
  const double den = 4.0 * std::norm(d1 * d1 * d2 * eta2);
  return TaggedValue::finite(num / den);
}

inline TaggedValue g2_analytic(const ModelParams& p) {
  p.validate();
  return g2_analytic(scattering_rates(p), p.delta, p.U);
}

// ---------------------------------------------------------------------------
// Optimal conditions

enum class ConditionKind { ep_locus, cpb_at_ep, cpb_non_ep, upb };

inline std::string to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::ep_locus: return "ep-locus";
    case ConditionKind::cpb_at_ep: return "cpb-at-ep";
    case ConditionKind::cpb_non_ep: return "cpb-non-ep";
    default: return "upb";
  }
}

/// Parallel lists: entry k is the point (mu_values[k], delta_values[k]).
/// delta_values is empty for the EP locus.
struct ConditionSolution {
  ConditionKind kind = ConditionKind::ep_locus;
  std::vector<double> mu_values;      // radians
  std::vector<double> delta_values;   // units gamma
  std::vector<std::string> labels;    // per point
  std::vector<double> residuals;      // per point, defining-equation residual
  std::vector<std::string> diagnostics;
  bool degenerate = false;

  bool found() const noexcept { return !mu_values.empty(); }
};

/// EP angles mu = [n pi +- arg(lambda1/lambda2)] / (2m) for odd n in
/// [n_min, n_max]; '+' gives E1 = 0, '-' gives E2 = 0. Requires |lambda1| = |lambda2|.
inline ConditionSolution find_eps(Complex lambda1, Complex lambda2, int m, int n_min, int n_max,
                                  double magnitude_tol = 1e-9) {
  if (m < 1) throw ConfigError("m must be >= 1");
  if (n_min > n_max) throw ConfigError("find_eps: empty n range");
  ConditionSolution sol;
  sol.kind = ConditionKind::ep_locus;
  const double mismatch = std::abs(std::abs(lambda1) - std::abs(lambda2));
  if (!(mismatch < magnitude_tol)) {
    // min |E1| over mu is ||l1| - |l2||; min |E1 E2| found by scanning cos(2 m mu)
    double best = std::numeric_limits<double>::infinity();
    double best_phi = 0.0;
    const int samples = 20000;
    for (int k = 0; k <= samples; ++k) {
      const double phi = kPi * k / samples;
      const double v = std::abs(lambda1 * lambda1 + lambda2 * lambda2 + 2.0 * lambda1 * lambda2 * std::cos(phi));
      if (v < best) {
        best = v;
        best_phi = phi;
      }
    }
    sol.diagnostics.push_back("| |lambda1| - |lambda2| | = " + std::to_string(mismatch) +
                              " exceeds tolerance: no exceptional point");
    sol.diagnostics.push_back("near-EP: min |E1 E2| = " + std::to_string(best) + " at mu = " +
                              std::to_string(best_phi / (2.0 * m) / kPi) + " pi");
    return sol;
  }
  const double arg = std::arg(lambda1 / lambda2);
  struct Pt {
    double mu;
    std::string label;
    double res;
  };
  std::vector<Pt> pts;
  for (int n = n_min; n <= n_max; ++n) {
    if (n % 2 == 0) continue;
    for (int sign : {+1, -1}) {
      const double mu = (n * kPi + sign * arg) / (2.0 * m);
      ModelParams p;
      p.lambda1 = lambda1;
      p.lambda2 = lambda2;
      p.m = m;
      p.mu = mu;
      const auto r = scattering_rates(p);
      pts.push_back({mu, sign > 0 ? "E1=0" : "E2=0", sign > 0 ? std::abs(r.e1) : std::abs(r.e2)});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.mu < b.mu; });
  for (const auto& pt : pts) {
    sol.mu_values.push_back(pt.mu);
    sol.labels.push_back(pt.label);
    sol.residuals.push_back(pt.res);
  }
  if (!sol.found()) sol.diagnostics.push_back("no odd n in the requested range");
  return sol;
}

/// Default n range: odd n covering mu in [0, pi).
inline ConditionSolution find_eps(Complex lambda1, Complex lambda2, int m) {
  return find_eps(lambda1, lambda2, m, 1, 2 * m - 1);
}

/// CPB at EPs: each EP angle paired with Delta = U.
inline ConditionSolution cpb_at_ep(const ModelParams& p, int n_min, int n_max, double magnitude_tol = 1e-9) {
  p.validate();
  auto sol = find_eps(p.lambda1, p.lambda2, p.m, n_min, n_max, magnitude_tol);
  sol.kind = ConditionKind::cpb_at_ep;
  sol.delta_values.assign(sol.mu_values.size(), p.U);
  if (p.U == 0.0) {
    sol.degenerate = true;
    sol.diagnostics.push_back("U = 0: no Kerr anharmonicity, the condition Delta = U = 0 is degenerate and no blockade is expected");
  }
  return sol;
}

inline ConditionSolution cpb_at_ep(const ModelParams& p) { return cpb_at_ep(p, 1, 2 * p.m - 1); }

namespace analytics_detail {

/// Angles in [0, pi/m) where Im(E1 E2) = 0, from
/// cos(2 m mu) = -(|l1|^2 sin 2t1 + |l2|^2 sin 2t2) / (2 |l1||l2| sin(t1 + t2)).
/// The printed form carries |l2| instead of |l2|^2 in the second numerator term.
inline std::vector<double> real_product_angles(const ModelParams& p, std::vector<std::string>& diag) {
  const double a1 = std::abs(p.lambda1), a2 = std::abs(p.lambda2);
  const double t1 = std::arg(p.lambda1), t2 = std::arg(p.lambda2);
  const double num = a1 * a1 * std::sin(2.0 * t1) + a2 * a2 * std::sin(2.0 * t2);
  const double den = 2.0 * a1 * a2 * std::sin(t1 + t2);
  if (std::abs(den) < 1e-14) {
    if (std::abs(num) < 1e-14) {
      diag.push_back("Im(E1 E2) vanishes for every mu (real-splitting condition is identically satisfied)");
    } else {
      diag.push_back("sin(theta1 + theta2) = 0 with nonzero numerator: Im(E1 E2) never vanishes");
    }
    return {};
  }
  double x = -num / den;
  if (std::abs(x) > 1.0 + 1e-12) {
    diag.push_back("|cos(2 m mu)| = " + std::to_string(std::abs(x)) + " > 1: no angle with real E1 E2");
    return {};
  }
  x = std::clamp(x, -1.0, 1.0);
  const double phi = std::acos(x);
  std::vector<double> mus{phi / (2.0 * p.m)};
  const double other = (2.0 * kPi - phi) / (2.0 * p.m);
  if (std::abs(other - mus.front()) > 1e-12) mus.push_back(other);
  return mus;
}

}  // namespace analytics_detail

/// CPB at non-EPs: Im(E1 E2) = 0 with Re(E1 E2) > 0, then Delta = U -+ Re sqrt(E1 E2).
inline ConditionSolution cpb_non_ep(const ModelParams& params) {
  params.validate();
  ConditionSolution sol;
  sol.kind = ConditionKind::cpb_non_ep;
  for (double mu : analytics_detail::real_product_angles(params, sol.diagnostics)) {
    ModelParams p = params;
    p.mu = mu;
    const Complex P = scattering_rates(p).product();
    if (!(P.real() > 0.0)) {
      sol.diagnostics.push_back("Re(E1 E2) = " + std::to_string(P.real()) + " <= 0 at mu = " +
                                std::to_string(mu / kPi) + " pi: splitting is not real");
      continue;
    }
    const Complex c = std::sqrt(P);
    for (int sign : {-1, +1}) {
      const double delta = params.U + sign * c.real();
      sol.mu_values.push_back(mu);
      sol.delta_values.push_back(delta);
      sol.labels.push_back(sign < 0 ? "Delta=U-Re sqrt(E1E2)" : "Delta=U+Re sqrt(E1E2)");
      sol.residuals.push_back(std::max(std::abs(c.imag()), std::abs(delta - params.U - sign * c.real())));
    }
  }
  return sol;
}

namespace analytics_detail {

/// Roots of 2(D - U)(D - 2U)^2 - U s = 0, i.e. 2D^3 - 10U D^2 + 16U^2 D - 8U^3 - U s.
inline std::vector<Complex> upb_cubic_roots(double U, double s) {
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  const double c2 = -5.0 * U, c1 = 8.0 * U * U, c0 = -4.0 * U * U * U - 0.5 * U * s;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -c0;
  companion(1, 2) = -c1;
  companion(2, 2) = -c2;
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  std::vector<Complex> roots;
  for (int k = 0; k < 3; ++k) {
    Complex z = es.eigenvalues()(k);
    for (int it = 0; it < 8; ++it) {  // Newton polish
      const Complex f = ((z + c2) * z + c1) * z + c0;
      const Complex df = (3.0 * z + 2.0 * c2) * z + c1;
      if (std::abs(df) < 1e-300) break;
      z -= f / df;
    }
    roots.push_back(z);
  }
  return roots;
}

/// Closed form Delta = ((-2)^{4/3} U^2 + (-2)^{2/3} M^2 + 10 U M) / (6M),
/// M^3 = 3(sqrt(1344 U^6 + 660 U^3 q + 81 q^2) - 9q) - 110 U^3, with
/// q = -4U^3 - U s/2. The printed q = -4U^3 - U s solves the cubic without its
/// leading factor 2. Returns every real branch value.
inline std::vector<double> upb_closed_form(double U, double s) {
  const double q = -4.0 * U * U * U - 0.5 * U * s;
  const Complex m3 = 3.0 * (std::sqrt(Complex(1344.0 * std::pow(U, 6) + 660.0 * U * U * U * q + 81.0 * q * q)) - 9.0 * q) -
                     110.0 * U * U * U;
  std::vector<double> out;
  if (std::abs(m3) < 1e-300) return out;
  for (int k = 0; k < 3; ++k) {
    const Complex M = std::polar(std::cbrt(std::abs(m3)), (std::arg(m3) + 2.0 * kPi * k) / 3.0);
    for (int j = 0; j < 3; ++j) {
      const Complex r = std::polar(std::cbrt(2.0), kPi * (1.0 + 2.0 * j) / 3.0);  // a cube root of -2
      const Complex d = (std::pow(r, 4) * U * U + r * r * M * M + 10.0 * U * M) / (6.0 * M);
      if (std::abs(d.imag()) < 1e-8 * std::max(1.0, std::abs(d))) out.push_back(d.real());
    }
  }
  return out;
}

}  // namespace analytics_detail

/// UPB optimum: Im(E1 E2) = 0 fixes mu, then Delta solves 2 d1 d2^2 = U Re(E1 E2)
/// (the zero of C20). Real roots with d1 != 0 and d2 != 0 inside [0, 3U] are
/// returned; all roots are listed in diagnostics when none qualifies.
inline ConditionSolution upb_conditions(const ModelParams& params) {
  params.validate();
  ConditionSolution sol;
  sol.kind = ConditionKind::upb;
  const double U = params.U;
  for (double mu : analytics_detail::real_product_angles(params, sol.diagnostics)) {
    ModelParams p = params;
    p.mu = mu;
    const double s = scattering_rates(p).product().real();
    if (std::abs(s) < analytics_detail::kSingular) {
      sol.degenerate = true;
      sol.diagnostics.push_back("Re(E1 E2) = 0 at mu = " + std::to_string(mu / kPi) +
                                " pi: the UPB condition collapses to the CPB condition Delta = U");
      sol.mu_values.push_back(mu);
      sol.delta_values.push_back(U);
      sol.labels.push_back("collapsed-to-CPB");
      sol.residuals.push_back(0.0);
      continue;
    }
    const auto roots = analytics_detail::upb_cubic_roots(U, s);
    const auto closed = analytics_detail::upb_closed_form(U, s);
    std::string listing;
    bool any = false;
    for (const auto& z : roots) {
      listing += " (" + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i)";
      if (std::abs(z.imag()) > 1e-9 * std::max(1.0, std::abs(z))) continue;
      const double d = z.real();
      if (d < -1e-12 || d > 3.0 * U + 1e-12) continue;
      if (std::abs(d - U) < analytics_detail::kSingular || std::abs(d - 2.0 * U) < analytics_detail::kSingular) continue;
      any = true;
      sol.mu_values.push_back(mu);
      sol.delta_values.push_back(d);
      sol.labels.push_back("C20=0");
      sol.residuals.push_back(std::abs(2.0 * (d - U) * (d - 2.0 * U) * (d - 2.0 * U) - U * s));
      double gap = std::numeric_limits<double>::infinity();
      for (double c : closed) gap = std::min(gap, std::abs(c - d));
      sol.diagnostics.push_back("closed-form cross-check at mu = " + std::to_string(mu / kPi) +
                                " pi: |Delta_cubic - Delta_closed| = " + std::to_string(gap));
    }
    if (!any) sol.diagnostics.push_back("no admissible real cubic root in [0, 3U]; roots:" + listing);
  }
  return sol;
}

/// Difference between the cubic root and the nearest real branch of the closed
/// form, or NaN when the closed form has no real branch.
inline double upb_closed_form_gap(double U, double re_product, double delta) {
  double gap = std::numeric_limits<double>::quiet_NaN();
  for (double c : analytics_detail::upb_closed_form(U, re_product)) {
    if (std::isnan(gap) || std::abs(c - delta) < gap) gap = std::abs(c - delta);
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Excitation pathways into |2,0>

struct Transition {
  std::string from;
  std::string to;
  std::string via;  // "F", "E1", "E2"
  bool open = true;
};

struct PathwayReport {
  bool e1_vanishes = false;
  bool e2_vanishes = false;
  std::vector<Transition> transitions;
  int paths_to_20 = 0;             // distinct excitation routes from |0,0> to |2,0>
  bool interference_possible = false;
  std::string summary;
};

inline PathwayReport pathway_report(const ModelParams& p, double tol = 1e-9) {
  p.validate();
  const auto r = scattering_rates(p);
  PathwayReport rep;
  rep.e1_vanishes = std::abs(r.e1) < tol;
  rep.e2_vanishes = std::abs(r.e2) < tol;
  const bool e1 = !rep.e1_vanishes, e2 = !rep.e2_vanishes;
  rep.transitions = {
      {"|0,0>", "|1,0>", "F", true},  {"|1,0>", "|0,1>", "E2", e2}, {"|0,1>", "|1,0>", "E1", e1},
      {"|1,0>", "|2,0>", "F", true},  {"|0,1>", "|1,1>", "F", true}, {"|1,1>", "|2,0>", "E1", e1},
      {"|2,0>", "|1,1>", "E2", e2},   {"|1,1>", "|0,2>", "E2", e2},  {"|0,2>", "|1,1>", "E1", e1},
  };
  // direct: |0,0> -> |1,0> -> |2,0>; indirect: |0,0> -> |1,0> -> |0,1> -> |1,1> -> |2,0>
  rep.paths_to_20 = 1 + ((e1 && e2) ? 1 : 0);
  rep.interference_possible = rep.paths_to_20 > 1;
  if (rep.interference_possible) {
    rep.summary = "E1 E2 != 0: direct and indirect paths to |2,0> interfere, UPB possible";
  } else if (rep.e2_vanishes) {
    rep.summary = "E2 = 0: C01 = C11 = C02 = 0, only the direct path |1,0> -> |2,0>; UPB impossible";
  } else {
    rep.summary = "E1 = 0: indirect paths via |1,1> into |2,0> blocked, only the direct path; UPB impossible";
  }
  return rep;
}

}  // namespace nhblockade
