#pragma once

// Brute-force N-body checks. Positions and pairwise power-law forces only;
// nothing here may depend on the ring kernel or the mass system.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ringeq/core.hpp"
#include "ringeq/parallel.hpp"
#include "ringeq/ring_system.hpp"

namespace ringeq {

using Point = std::complex<double>;

struct BodyList {
  std::vector<Point> positions;
  std::vector<double> masses;
  Exponent beta;
  double omega = 1.0;

  std::size_t size() const noexcept { return positions.size(); }

  double total_mass() const {
    CompensatedSum s;
    for (double m : masses) s += m;
    return s.value();
  }

  /// Mass-weighted position sum (not divided by the total mass).
  Point moment() const {
    CompensatedComplexSum s;
    for (std::size_t i = 0; i < size(); ++i) s.add(masses[i] * positions[i]);
    return s.value();
  }

  double max_radius() const {
    double r = 0.0;
    for (const Point& p : positions) r = std::max(r, std::abs(p));
    return r;
  }
};

/// One ring placed in the plane: n vertices at radius, phase and per-vertex mass.
struct PlacedRing {
  double radius = 1.0;
  Phase phase = Phase::Aligned;
  double mass = 0.0;
};

/// Vertex l of a ring: radius * exp(i pi (2 l + s) / n), s = 1 when shifted.
inline Point ring_vertex(int n, double radius, Phase phase, int l) {
  const long long num = 2LL * l + (phase == Phase::Shifted ? 1 : 0);
  return {radius * cos_pi_ratio(num, n), radius * sin_pi_ratio(num, n)};
}

/// Central body (only when m0 > 0) followed by the rings in order.
inline BodyList realize(int n, double m0, const std::vector<PlacedRing>& rings,
                        Exponent beta = {}) {
  if (n < 2) throw DomainError("realize: n must be >= 2");
  if (!(m0 >= 0)) throw DomainError("realize: negative central mass");
  BodyList b;
  b.beta = beta;
  if (m0 > 0) {
    b.positions.emplace_back(0.0, 0.0);
    b.masses.push_back(m0);
  }
  for (const PlacedRing& r : rings) {
    if (!(r.mass >= 0)) throw DomainError("realize: negative ring mass");
    if (!(r.radius > 0)) throw DomainError("realize: ring radius must be > 0");
    for (int l = 0; l < n; ++l) {
      b.positions.push_back(ring_vertex(n, r.radius, r.phase, l));
      b.masses.push_back(r.mass);
    }
  }
  return b;
}

inline BodyList realize(const RingSystem& sys, const Masses& masses) {
  if (static_cast<int>(masses.m.size()) != sys.k())
    throw DomainError("realize: mass vector length does not match the ring count");
  std::vector<PlacedRing> rings;
  for (int j = 0; j < sys.k(); ++j)
    rings.push_back({sys.ring(j).radius, sys.ring(j).phase, masses.m[j]});
  return realize(sys.n(), masses.m0, rings, sys.beta());
}

namespace detail {

inline Point pair_acceleration(const BodyList& b, std::size_t i) {
  const Point xi = b.positions[i];
  const bool newton = b.beta.is_newtonian();
  const double p = b.beta.force_power();
  CompensatedComplexSum acc;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (j == i || b.masses[j] == 0.0) continue;
    const Point d = b.positions[j] - xi;
    const double r2 = std::norm(d);
    if (r2 == 0.0)
      throw SingularityError("residual: bodies " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide");
    const double inv = newton ? 1.0 / (r2 * std::sqrt(r2)) : std::pow(r2, -0.5 * p);
    acc.add(b.masses[j] * inv * d);
  }
  return acc.value();
}

}  // namespace detail

/// Relative force-balance defect per body, |a_i + omega^2 x_i| / (omega^2 |x_i|);
/// a body at the origin is normalised by the largest radius instead.
inline std::vector<double> residuals(const BodyList& b, unsigned threads = default_threads()) {
  if (b.positions.size() != b.masses.size())
    throw DomainError("residual: positions and masses differ in length");
  const double w2 = b.omega * b.omega;
  const double rmax = b.max_radius();
  std::vector<double> out(b.size(), 0.0);
  parallel_for(
      b.size(),
      [&](std::size_t i) {
        const Point a = detail::pair_acceleration(b, i);
        const double r = std::abs(b.positions[i]);
        out[i] = std::abs(a + w2 * b.positions[i]) / (w2 * (r > 0 ? r : rmax));
      },
      threads);
  return out;
}

inline double residual(const BodyList& b, unsigned threads = default_threads()) {
  const std::vector<double> r = residuals(b, threads);
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

/// The 2n vertices of rings (x, shifted) and (1, aligned) in angular order
/// form a convex polygon (consecutive edge cross products share one sign).
inline bool convex_union(int n, double x) {
  if (n < 2) throw DomainError("convex_union: n must be >= 2");
  if (!(x > 0 && x <= 1)) throw DomainError("convex_union: x must lie in (0, 1]");
  std::vector<Point> v;
  v.reserve(2 * n);
  for (int j = 0; j < 2 * n; ++j)
    v.emplace_back((j % 2 ? x : 1.0) * cos_pi_ratio(j, n), (j % 2 ? x : 1.0) * sin_pi_ratio(j, n));
  bool neg = false, pos = false;
  const int m = 2 * n;
  for (int j = 0; j < m; ++j) {
    const Point e1 = v[j] - v[(j + m - 1) % m];
    const Point e2 = v[(j + 1) % m] - v[j];
    const double c = e1.real() * e2.imag() - e1.imag() * e2.real();
    if (c > 0) pos = true;
    if (c < 0) neg = true;
  }
  return !(pos && neg);
}

struct IntegrateOptions {
  double threshold = 1e-6;  // deviation level whose first crossing is recorded
  double stop_deviation = std::numeric_limits<double>::infinity();
  double min_separation = 1e-6;
};

struct IntegrationReport {
  double max_deviation = 0.0;
  double error_estimate = 0.0;  // accumulated Richardson estimate
  std::optional<double> first_exceedance;
  double t_reached = 0.0;
  int steps_taken = 0;
  bool completed = false;
};

namespace detail {

struct State {
  std::vector<Point> z;
  std::vector<Point> v;
};

inline void accelerations(const BodyList& b, const std::vector<Point>& z, std::vector<Point>& a,
                          double min_sep, double t) {
  const std::size_t N = z.size();
  std::fill(a.begin(), a.end(), Point{});
  const bool newton = b.beta.is_newtonian();
  const double p = b.beta.force_power();
  const double min2 = min_sep * min_sep;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const Point d = z[j] - z[i];
      const double r2 = std::norm(d);
      if (r2 < min2)
        throw CloseEncounterError("integrate_check: bodies " + std::to_string(i) + " and " +
                                  std::to_string(j) + " closer than " +
                                  std::to_string(min_sep) + " at t=" + std::to_string(t));
      const double inv = newton ? 1.0 / (r2 * std::sqrt(r2)) : std::pow(r2, -0.5 * p);
      const Point f = inv * d;
      a[i] += b.masses[j] * f;
      a[j] -= b.masses[i] * f;
    }
  }
}

inline State rk4_step(const BodyList& b, const State& s, double t, double h, double min_sep) {
  const std::size_t N = s.z.size();
  std::vector<Point> a1(N), a2(N), a3(N), a4(N), z(N);
  accelerations(b, s.z, a1, min_sep, t);
  for (std::size_t i = 0; i < N; ++i) z[i] = s.z[i] + 0.5 * h * s.v[i];
  accelerations(b, z, a2, min_sep, t + 0.5 * h);
  for (std::size_t i = 0; i < N; ++i) z[i] = s.z[i] + 0.5 * h * (s.v[i] + 0.5 * h * a1[i]);
  accelerations(b, z, a3, min_sep, t + 0.5 * h);
  for (std::size_t i = 0; i < N; ++i) z[i] = s.z[i] + h * (s.v[i] + 0.5 * h * a2[i]);
  accelerations(b, z, a4, min_sep, t + h);
  // RK4 for the second-order system z'' = a(z), written in Nystrom form.
  State out{std::vector<Point>(N), std::vector<Point>(N)};
  for (std::size_t i = 0; i < N; ++i) {
    const Point k1v = a1[i], k2v = a2[i], k3v = a3[i], k4v = a4[i];
    const Point k1z = s.v[i];
    const Point k2z = s.v[i] + 0.5 * h * k1v;
    const Point k3z = s.v[i] + 0.5 * h * k2v;
    const Point k4z = s.v[i] + h * k3v;
    out.z[i] = s.z[i] + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    out.v[i] = s.v[i] + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return out;
}

}  // namespace detail

/// Integrates the N-body equations from the rigidly rotating initial state
/// with fixed-step RK4 plus half-step Richardson extrapolation and returns
/// the largest distance of any body from its rotated initial position.
inline IntegrationReport integrate_check(const BodyList& b, double T, int steps,
                                         const IntegrateOptions& opt = {}) {
  if (!(T > 0 && T <= 2 * kPi)) throw DomainError("integrate_check: T must lie in (0, 2 pi]");
  if (steps < 1) throw DomainError("integrate_check: steps must be >= 1");
  const std::size_t N = b.size();
  const Point iw{0.0, b.omega};
  detail::State s{b.positions, std::vector<Point>(N)};
  for (std::size_t i = 0; i < N; ++i) s.v[i] = iw * b.positions[i];
  IntegrationReport rep;
  const double h = T / steps;
  for (int step = 1; step <= steps; ++step) {
    const double t0 = (step - 1) * h;
    const detail::State full = detail::rk4_step(b, s, t0, h, opt.min_separation);
    const detail::State half = detail::rk4_step(b, s, t0, 0.5 * h, opt.min_separation);
    const detail::State two = detail::rk4_step(b, half, t0 + 0.5 * h, 0.5 * h, opt.min_separation);
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const Point dz = (two.z[i] - full.z[i]) / 15.0;
      const Point dv = (two.v[i] - full.v[i]) / 15.0;
      err = std::max(err, std::abs(dz));
      s.z[i] = two.z[i] + dz;
      s.v[i] = two.v[i] + dv;
    }
    rep.error_estimate += err;
    const double t = step * h;
    const Point rot = std::polar(1.0, b.omega * t);
    double dev = 0.0;
    for (std::size_t i = 0; i < N; ++i) dev = std::max(dev, std::abs(s.z[i] - rot * b.positions[i]));
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.t_reached = t;
    rep.steps_taken = step;
    if (!rep.first_exceedance && dev > opt.threshold) rep.first_exceedance = t;
    if (dev > opt.stop_deviation) return rep;
  }
  rep.completed = true;
  return rep;
}

}  // namespace ringeq
