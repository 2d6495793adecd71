#pragma once

// Property battery for the interface algebra of one flux family. Each check
// reports its worst defect against the pinned tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "garz/interface.hpp"

namespace garz {

struct PropertyResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // largest defect seen (0 when none)
  double tol = 0.0;
  long samples = 0;
};

struct BatteryOptions {
  long random_samples = 10000;
  int consistency_grid = 101;
  int germ_pairs = 30;         // per interface in the dissipativity check
  int domination_pairs = 12;   // per interface in the domination check
  std::uint64_t seed = 0;
};

struct BatteryResult {
  std::vector<PropertyResult> properties;
  double mu = 0.0;
  bool all_pass() const {
    return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.pass; });
  }
};

namespace detail {

/// Extremum of f on [a, b] by a uniform scan refined with golden sections.
template <class Fn>
double brute_extremum(const Fn& f, double a, double b, bool maximise, int scan = 64) {
  if (b < a) std::swap(a, b);
  const double sign = maximise ? 1.0 : -1.0;
  auto g = [&](double x) { return sign * f(x); };
  if (b - a == 0.0) return f(a);
  const double h = (b - a) / scan;
  int best = 0;
  double best_v = g(a);
  for (int i = 1; i <= scan; ++i) {
    const double v = g(i == scan ? b : a + i * h);
    if (v > best_v) best_v = v, best = i;
  }
  double lo = std::max(a, a + (best - 1) * h), hi = std::min(b, a + (best + 1) * h);
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (g1 < g2) {
      lo = x1, x1 = x2, g1 = g2;
      x2 = lo + r * (hi - lo), g2 = g(x2);
    } else {
      hi = x2, x2 = x1, g2 = g1;
      x1 = hi - r * (hi - lo), g1 = g(x1);
    }
  }
  best_v = std::max({best_v, g1, g2, g(lo), g(hi)});
  return sign * best_v;
}

inline void record(PropertyResult& p, double defect) {
  ++p.samples;
  p.worst = std::max(p.worst, defect);
  if (!(defect <= p.tol)) p.pass = false;
}

}  // namespace detail

inline BatteryResult run_property_battery(const FluxFamily& F, const BatteryOptions& opt = {}) {
  BatteryResult out;
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eps = F.epsilon();

  PropertyResult godunov{"godunov_oracle_equivalence", true, 0.0, 1e-10};
  PropertyResult godunov_form{"interface_godunov_form_agreement", true, 0.0, 1e-14};
  for (long s = 0; s < opt.random_samples; ++s) {
    const FluxSlice f(F, unit(gen));
    const double a = unit(gen), b = unit(gen);
    const double brute = detail::brute_extremum(f, a, b, a > b);
    detail::record(godunov, std::abs(godunov_flux(f, a, b) - brute));

    const auto p = make_interface(F, unit(gen), unit(gen));
    if (eps <= p.left.critical_point())
      detail::record(godunov_form, std::abs(interface_flux(p, a, b) -
                                            interface_flux_godunov_form(p, a, b, eps)));
  }

  PropertyResult monotone{"interface_flux_monotonicity", true, 0.0, 1e-14};
  for (int s = 0; s < 64; ++s) {
    const auto p = make_interface(F, unit(gen), unit(gen));
    constexpr int m = 41;
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; j + 1 < m; ++j) {
        const double a = detail::grid_point(i, m), b = detail::grid_point(j, m);
        const double a2 = detail::grid_point(i + 1, m), b2 = detail::grid_point(j + 1, m);
        const double base = interface_flux(p, a, b);
        detail::record(monotone, std::max(0.0, base - interface_flux(p, a2, b)));
        detail::record(monotone, std::max(0.0, interface_flux(p, a, b2) - base));
      }
  }

  PropertyResult rh{"germ_rankine_hugoniot", true, 0.0, kGermTol};
  PropertyResult member{"germ_membership", true, 0.0, kGermTol};
  PropertyResult dissipative{"germ_dissipativity", true, 0.0, kGermTol};
  const long n_interfaces =
      std::max<long>(1, opt.random_samples / (static_cast<long>(opt.germ_pairs) * opt.germ_pairs));
  for (long s = 0; s < n_interfaces + 1; ++s) {
    const auto p = make_interface(F, unit(gen), unit(gen));
    const auto germ = germ_sample(p, static_cast<std::size_t>(opt.germ_pairs));
    for (const auto& g : germ) {
      detail::record(rh, std::abs(p.left(g.k_left) - p.right(g.k_right)));
      detail::record(member, remainder(p, g.k_left, g.k_right));
    }
    for (const auto& u : germ)
      for (const auto& k : germ)
        detail::record(dissipative, std::max(0.0, kruzhkov(p.right, u.k_right, k.k_right) -
                                                      kruzhkov(p.left, u.k_left, k.k_left)));
  }

  PropertyResult domination{"remainder_domination", true, 0.0, kGermTol};
  for (long s = 0; s < opt.random_samples; ++s) {
    const auto p = make_interface(F, unit(gen), unit(gen));
    const double ul = unit(gen), ur = unit(gen);
    const double R = remainder(p, ul, ur);
    for (const auto& k : germ_sample(p, static_cast<std::size_t>(opt.domination_pairs)))
      detail::record(domination, std::max(0.0, kruzhkov(p.right, ur, k.k_right) -
                                                   kruzhkov(p.left, ul, k.k_left) - R));
  }

  // Pairs with f_l(u_l) = f_r(u_r) outside the germ must fail dissipativity
  // against some germ pair. Defect 1 marks a pair that did not.
  PropertyResult maximal{"germ_maximality", true, 0.0, 0.0};
  for (int s = 0; s < 200; ++s) {
    double wl = unit(gen), wr = unit(gen);
    if (std::abs(wl - wr) < 1e-3) continue;
    if (wl < wr) std::swap(wl, wr);  // f_l >= f_r
    const auto p = make_interface(F, wl, wr);
    const double kr = p.right.critical_point() * unit(gen);
    const double ul = branch_inverse(p.left, p.right(kr), Branch::plus);
    if (germ_contains(p, ul, kr)) continue;
    const auto germ = germ_sample(p, 60);
    bool violated = false;
    for (const auto& k : germ)
      if (kruzhkov(p.left, ul, k.k_left) - kruzhkov(p.right, kr, k.k_right) < -kGermTol) violated = true;
    detail::record(maximal, violated ? 0.0 : 1.0);
  }

  out.mu = consistency_constant(F);
  PropertyResult consistency{"consistency_constant_bound", true, 0.0, kGermTol};
  {
    const int m = opt.consistency_grid;
    std::vector<FluxSlice> slices;
    slices.reserve(m);
    for (int i = 0; i < m; ++i) slices.emplace_back(F, detail::grid_point(i, m));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const InterfacePair p{slices[a], slices[b]};
        const double dw = std::abs(slices[b].w() - slices[a].w());
        for (int i = 0; i < m; ++i) {
          const double k = detail::grid_point(i, m);
          detail::record(consistency,
                         std::max(0.0, std::abs(interface_flux(p, k, k) - p.left(k)) - out.mu * dw));
        }
      }
  }

  out.properties = {godunov, godunov_form, monotone, rh, member, dissipative, domination, maximal,
                    consistency};
  return out;
}

}  // namespace garz
