#pragma once

// Bracketed scalar root finding: sign-change scan, bisection, then a
// safeguarded secant (Illinois) polish that never leaves the bracket.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ringeq/core.hpp"

namespace ringeq {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

/// Interior grid of (0, 1): `uniform` equal cells plus geometric points
/// 10^-s and 1 - 10^-s clustering at both ends, `per_decade` per decade
/// down to 10^-decades.
inline std::vector<double> unit_interval_grid(int uniform = 2000, int decades = 13,
                                              int per_decade = 8) {
  std::vector<double> g;
  g.reserve(uniform + 2 * decades * per_decade);
  for (int i = 1; i < uniform; ++i) g.push_back(static_cast<double>(i) / uniform);
  const double s0 = std::log10(static_cast<double>(uniform));
  for (int i = 0; i <= (decades - s0) * per_decade; ++i) {
    const double e = std::pow(10.0, -(s0 + static_cast<double>(i) / per_decade));
    if (e <= 0 || e >= 1.0 / uniform) continue;
    g.push_back(e);
    if (1.0 - e < 1.0) g.push_back(1.0 - e);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// Adjacent grid cells where f changes sign (NaN samples break a cell).
template <class F>
std::vector<Bracket> scan_sign_changes(F&& f, const std::vector<double>& grid) {
  std::vector<Bracket> out;
  if (grid.size() < 2) return out;
  double x0 = grid[0];
  double f0 = f(x0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x1 = grid[i];
    const double f1 = f(x1);
    if (f0 == 0.0) {
      out.push_back({x0, x0, f0, f0});
    } else if (!std::isnan(f0) && !std::isnan(f1) && f1 != 0.0 &&
               std::signbit(f0) != std::signbit(f1)) {
      out.push_back({x0, x1, f0, f1});
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0) out.push_back({x0, x0, f0, f0});
  return out;
}

/// Shrink a sign-change bracket by halving until hi - lo <= tol.
template <class F>
Bracket bisect(F&& f, Bracket b, double tol) {
  if (b.lo == b.hi) return b;
  if (std::signbit(b.f_lo) == std::signbit(b.f_hi))
    throw NoRootError("bisect: endpoints do not bracket a sign change");
  for (int it = 0; it < 200 && b.hi - b.lo > tol; ++it) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return {mid, mid, 0.0, 0.0};
    if (std::isnan(fm)) throw NoRootError("bisect: function returned NaN");
    if (std::signbit(fm) == std::signbit(b.f_lo)) {
      b.lo = mid;
      b.f_lo = fm;
    } else {
      b.hi = mid;
      b.f_hi = fm;
    }
  }
  return b;
}

/// Illinois regula falsi inside a bracket down to a few ulps.
template <class F>
double secant_polish(F&& f, Bracket b, double xtol = 0.0) {
  if (b.lo == b.hi) return b.lo;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double width = b.hi - b.lo;
    const double floor_tol =
        std::max(xtol, 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(b.lo), std::abs(b.hi)));
    if (width <= floor_tol) break;
    double x = b.hi - b.f_hi * (b.hi - b.lo) / (b.f_hi - b.f_lo);
    if (!(x > b.lo && x < b.hi)) x = 0.5 * (b.lo + b.hi);
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::isnan(fx)) break;
    if (std::signbit(fx) == std::signbit(b.f_lo)) {
      b.lo = x;
      b.f_lo = fx;
      if (side == -1) b.f_hi *= 0.5;
      side = -1;
    } else {
      b.hi = x;
      b.f_hi = fx;
      if (side == 1) b.f_lo *= 0.5;
      side = 1;
    }
  }
  return std::abs(b.f_lo) < std::abs(b.f_hi) ? b.lo : b.hi;
}

/// Bisection to 1e-6, then secant polish.
template <class F>
double solve_bracket(F&& f, Bracket b, double xtol = 0.0) {
  b = bisect(f, b, 1e-6);
  return secant_polish(f, b, xtol);
}

/// All roots of f seen as sign changes on the grid.
template <class F>
std::vector<double> find_roots(F&& f, const std::vector<double>& grid, double xtol = 0.0) {
  std::vector<double> roots;
  for (const Bracket& b : scan_sign_changes(f, grid)) roots.push_back(solve_bracket(f, b, xtol));
  return roots;
}

}  // namespace ringeq
