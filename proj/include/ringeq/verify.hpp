#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "ringeq/linsys.hpp"
#include "ringeq/oracle.hpp"

namespace ringeq {

inline constexpr double kResidualTol = 1e-9;

/// Two admissible mass systems for one configuration, both checked by the
/// brute-force oracle.
struct Certificate {
  double residual_a = 0.0;
  double residual_b = 0.0;
  double M = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  Masses masses_a;
  Masses masses_b;
  double com_norm = 0.0;
  double mass_mismatch = 0.0;
  bool distinct = false;

  double residual() const { return std::max(residual_a, residual_b); }

  bool valid() const {
    return residual_a <= kResidualTol && residual_b <= kResidualTol && distinct &&
           mass_mismatch <= 1e-12 * M && com_norm <= 1e-12 * M;
  }
};

/// Parameters for the two witnesses: 10% in from each end of a bounded
/// interval, or steps of the particular-solution scale from a finite end.
inline std::pair<double, double> witness_parameters(const MassLine& line) {
  const Interval& r = line.t_range;
  if (r.bounded()) return {r.lo + 0.1 * (r.hi - r.lo), r.hi - 0.1 * (r.hi - r.lo)};
  double scale = 0.0;
  for (double v : line.particular) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  if (std::isfinite(r.lo)) return {r.lo + 0.1 * scale, r.lo + 0.2 * scale};
  if (std::isfinite(r.hi)) return {r.hi - 0.2 * scale, r.hi - 0.1 * scale};
  return {-0.1 * scale, 0.1 * scale};
}

inline Certificate certify_mass_line(const RingSystem& sys, const MassLine& line) {
  if (!line.perverse()) throw NotPerverseError("perverse_certificate: system is not singular");
  if (!line.has_positive())
    throw NoPositiveMassError("perverse_certificate: positivity interval is empty");
  Certificate c;
  c.M = line.M;
  std::tie(c.t_a, c.t_b) = witness_parameters(line);
  c.masses_a = line.masses(c.t_a);
  c.masses_b = line.masses(c.t_b);
  const BodyList a = realize(sys, c.masses_a);
  const BodyList b = realize(sys, c.masses_b);
  c.residual_a = residual(a);
  c.residual_b = residual(b);
  c.com_norm = std::max(std::abs(a.moment()), std::abs(b.moment()));
  c.mass_mismatch = std::max(std::abs(a.total_mass() - line.M), std::abs(b.total_mass() - line.M));
  c.distinct = false;
  for (std::size_t j = 0; j < c.masses_a.m.size(); ++j)
    if (c.masses_a.m[j] != c.masses_b.m[j]) c.distinct = true;
  return c;
}

inline Certificate perverse_certificate(const RingSystem& sys, const RingKernel& kern, double M) {
  return certify_mass_line(sys, solve_mass_line(sys, kern, M));
}

inline Certificate perverse_certificate(const RingSystem& sys, double M) {
  return perverse_certificate(sys, RingKernel(sys.n(), sys.beta()), M);
}

}  // namespace ringeq
