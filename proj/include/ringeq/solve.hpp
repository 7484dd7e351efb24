#pragma once

// Case solvers: shifted pair, n-gon plus 2n-gon, three aligned rings
// (diagonal roots and zero-curve tracing), seeds and refinement for k > 3,
// and the exponent roots beta(n).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "ringeq/kernel.hpp"
#include "ringeq/linsys.hpp"
#include "ringeq/oracle.hpp"
#include "ringeq/roots.hpp"
#include "ringeq/verify.hpp"

namespace ringeq {

/// Normal "nothing found" outcome with what the scan saw.
struct NoSolution {
  int n = 0;
  std::string reason;
  std::vector<std::pair<std::string, double>> evidence;
};

template <class T>
using Outcome = std::variant<T, NoSolution>;

template <class T>
bool solved(const Outcome<T>& o) {
  return std::holds_alternative<T>(o);
}

// ---------------------------------------------------------------- shifted pair

struct ShiftedPairSolution {
  int n = 0;
  double x = 0.0;
  double f_at_root = 0.0;
  int root_count = 0;
  double M = 0.0;
  MassLine masses;
  bool convex = false;
  Certificate certificate;
  std::optional<double> m0_zero_t;
  double m0_zero_residual = std::numeric_limits<double>::quiet_NaN();

  RingSystem system() const {
    return RingSystem(n, {{x, Phase::Shifted}, {1.0, Phase::Aligned}});
  }
};

/// f(x) = delta_n^2 - k_n(x, pi/n) k_n(1/x, pi/n).
inline double shifted_pair_function(const RingKernel& kern, double x) {
  const double d = kern.delta();
  return d * d - kern.k(x, Phase::Shifted) * kern.k_inv(x, Phase::Shifted);
}

inline Outcome<ShiftedPairSolution> shifted_pair(int n) {
  if (n < 2) throw DomainError("shifted_pair: n must be >= 2");
  const RingKernel kern(n);
  auto f = [&](double x) { return shifted_pair_function(kern, x); };
  const std::vector<double> grid = unit_interval_grid();
  const std::vector<Bracket> brackets = scan_sign_changes(f, grid);
  if (brackets.empty()) {
    const double s1 = kern.k(1.0, Phase::Shifted);
    return NoSolution{n,
                      "no sign change of the shifted-pair determinant on (0, 1)",
                      {{"f(0)", kern.delta() * kern.delta()},
                       {"f(1)", kern.delta() * kern.delta() - s1 * s1},
                       {"f_grid_first", f(grid.front())},
                       {"f_grid_last", f(grid.back())}}};
  }
  ShiftedPairSolution s;
  s.n = n;
  s.root_count = static_cast<int>(brackets.size());
  s.x = solve_bracket(f, brackets.back());
  s.f_at_root = f(s.x);
  const RingSystem sys = s.system();
  try {
    s.M = total_mass_for_compatibility(sys, kern);
    s.masses = solve_mass_line(sys, kern, s.M);
    s.certificate = certify_mass_line(sys, s.masses);
  } catch (const IncompatibleError& e) {
    return NoSolution{n, e.what(), {{"x", s.x}, {"f(x)", s.f_at_root}}};
  } catch (const NoPositiveMassError& e) {
    return NoSolution{n, e.what(), {{"x", s.x}, {"f(x)", s.f_at_root}}};
  }
  s.convex = convex_union(n, s.x);
  s.m0_zero_t = s.masses.m0_zero_t();
  if (s.m0_zero_t) {
    Masses w = s.masses.masses(*s.m0_zero_t);
    w.m0 = 0.0;
    s.m0_zero_residual = residual(realize(sys, w));
  }
  return s;
}

/// Predicted 1 - x = c sqrt(log n - log 237) / n^2 with c = 3.905.
inline double shifted_pair_asymptote(int n) {
  if (n <= 237) throw DomainError("shifted_pair_asymptote: n must be > 237");
  const double nn = n;
  return 3.905 * std::sqrt(std::log(nn) - std::log(237.0)) / (nn * nn);
}

// ----------------------------------------------------------- n-gon / 2n-gon

/// Which sub-polygon of the 2n-gon the n-gon is homothetic to.
enum class Homothety { HeavierSubgon, LighterSubgon };

inline const char* to_string(Homothety h) noexcept {
  return h == Homothety::HeavierSubgon ? "heavier" : "lighter";
}

/// n-gon of mass m1 at radius ratio rho (n-gon / 2n-gon) and a 2n-gon with
/// alternating masses m2 >= m3. Masses are scaled for omega = 1 with the
/// outermost ring at radius 1.
struct Ngon2nSolution {
  int n = 0;
  double rho = 0.0;
  Homothety mode = Homothety::HeavierSubgon;
  double M = 0.0;
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  double alpha = 0.0;
  double f_at_root = 0.0;
  int root_count = 0;
  double system_residual = 0.0;
  double oracle_residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<MassLine> line;
  std::optional<Certificate> certificate;

  /// Normalised layout. Heavier: (rho, A) m1, (1, S) m3, (1, A) m2.
  /// Lighter (rho > 1): (1/rho, A) m3, (1/rho, S) m2, (1, A) m1.
  RingSystem system() const {
    if (mode == Homothety::HeavierSubgon)
      return RingSystem(n, {{rho, Phase::Aligned}, {1.0, Phase::Shifted}, {1.0, Phase::Aligned}});
    return RingSystem(n, {{1.0 / rho, Phase::Aligned}, {1.0 / rho, Phase::Shifted},
                          {1.0, Phase::Aligned}});
  }
  Masses masses() const {
    if (mode == Homothety::HeavierSubgon) return {m0, {m1, m3, m2}};
    return {m0, {m3, m2, m1}};
  }
};

namespace detail {

inline double power_of(const RingKernel& kern, double r) {
  return kern.beta().is_newtonian() ? r * r * r : std::pow(r, kern.beta().force_power());
}

// Unscaled pieces of the forward equation at ratio r (m1 ring over 2n-gon):
// f = M (1 - r^p) - r^p R_same + R_m1, split as rest + |alpha| dm * slope.
struct ForwardParts {
  double rest = 0.0;
  double slope = 0.0;
  double alpha = 0.0;
};

inline ForwardParts forward_parts(const RingKernel& kern, double r, double m0, double same,
                                  double other) {
  const int n = kern.n();
  const double d = kern.delta();
  const double k1 = kern.k(1.0, Phase::Shifted);
  const double rp = power_of(kern, r);
  const double h_in = kern.eval(r, Phase::Aligned).h;
  const double a_out = kern.k_inv(r, Phase::Aligned);
  const double s_out = kern.k_inv(r, Phase::Shifted);
  ForwardParts p;
  p.alpha = std::abs(alpha_ratio(kern, r));
  p.rest = (m0 + n * (same + other)) * (1.0 - rp) - rp * n * (k1 * other + d * same) +
           n * (s_out * other + a_out * same);
  p.slope = n * (1.0 + d - rp * h_in);
  return p;
}

inline double forward_function(const RingKernel& kern, double r, double m0, double same,
                               double other, double dm) {
  const ForwardParts p = forward_parts(kern, r, m0, same, other);
  if (dm == 0.0) return p.rest;  // alpha may overflow where the root is
  if (std::isinf(p.alpha)) return dm * p.slope;
  return p.rest / (1.0 + p.alpha) + dm * p.slope * (p.alpha / (1.0 + p.alpha));
}

inline double system_residual(const RingSystem& sys, const RingKernel& kern, const Masses& m) {
  const InteractionMatrix a = assemble(sys, kern);
  const std::vector<double> powers = radius_powers(sys);
  const double M = m.total(sys.n());
  Eigen::VectorXd y(sys.k()), b(sys.k());
  for (int j = 0; j < sys.k(); ++j) {
    y(j) = sys.n() * m.m[j];
    b(j) = powers[j] - M;
  }
  return consistency_residual(a.a, y, b);
}

}  // namespace detail

/// Forward problem: given m0 and the 2n-gon masses m2 >= m3 > 0 (up to a
/// common scale), find the n-gon radius ratio and mass.
inline Outcome<Ngon2nSolution> ngon2n_equilibrium(int n, double m0, double m2, double m3,
                                                  Homothety mode = Homothety::HeavierSubgon) {
  if (n < 2) throw DomainError("ngon2n_equilibrium: n must be >= 2");
  if (!(m0 >= 0)) throw DomainError("ngon2n_equilibrium: m0 must be >= 0");
  if (!(m3 > 0)) throw DomainError("ngon2n_equilibrium: m3 must be > 0");
  if (!(m2 >= m3)) throw DomainError("ngon2n_equilibrium: need m2 >= m3");
  const RingKernel kern(n);
  const bool heavier = mode == Homothety::HeavierSubgon;
  const double same = heavier ? m2 : m3;
  const double other = heavier ? m3 : m2;
  const double dm = m2 - m3;
  // u in (0, 1) is rho itself (heavier) or 1 / rho (lighter).
  auto ratio = [&](double u) { return heavier ? u : 1.0 / u; };
  auto f = [&](double u) { return detail::forward_function(kern, ratio(u), m0, same, other, dm); };
  const std::vector<Bracket> brackets = scan_sign_changes(f, unit_interval_grid());
  Ngon2nSolution best;
  bool found = false;
  int admissible = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  for (const Bracket& b : brackets) {
    const double u = solve_bracket(f, b);
    const double r = ratio(u);
    const detail::ForwardParts p = detail::forward_parts(kern, r, m0, same, other);
    const double m1 = dm == 0.0 ? 0.0 : p.alpha * dm;
    if (!std::isfinite(m1)) continue;
    const double k1 = kern.k(1.0, Phase::Shifted);
    const double M = m0 + n * (m1 + m2 + m3);
    const double r_same = n * (kern.k(r, Phase::Aligned) * m1 + k1 * other + kern.delta() * same);
    const double inv_scale = r_same + M;
    if (!(inv_scale > 0)) continue;
    const double lambda = 1.0 / inv_scale;
    Ngon2nSolution s;
    s.n = n;
    s.mode = mode;
    s.rho = r;
    s.alpha = heavier ? p.alpha : -p.alpha;
    s.f_at_root = f(u);
    double scale = lambda;
    if (!heavier) scale /= detail::power_of(kern, r);
    s.m0 = m0 * scale;
    s.m1 = m1 * scale;
    s.m2 = m2 * scale;
    s.m3 = m3 * scale;
    const Masses ms = s.masses();
    s.M = ms.total(n);
    const RingSystem sys = s.system();
    s.system_residual = detail::system_residual(sys, kern, ms);
    s.oracle_residual = residual(realize(sys, ms));
    ++admissible;
    best_residual = std::min(best_residual, s.oracle_residual);
    if (!found && s.oracle_residual <= kResidualTol) {
      best = s;
      found = true;
    }
  }
  if (!found)
    return NoSolution{n, "no root of the forward equation passes the force oracle",
                      {{"brackets", double(brackets.size())},
                       {"admissible", double(admissible)},
                       {"best_residual", best_residual}}};
  best.root_count = admissible;
  return best;
}

/// Determinant of the n-gon / 2n-gon layout divided by -(k_n(1, pi/n) - delta_n)
/// alpha_n(rho); finite where alpha_n overflows.
inline double ngon2n_perverse_function(const RingKernel& kern, double rho) {
  const double d = kern.delta();
  const double k1 = kern.k(1.0, Phase::Shifted);
  const double ia = std::max(kern.phase_gap(rho), 0.0) / (k1 - d);
  const double s_inv = kern.k_inv(rho, Phase::Aligned) + kern.k_inv(rho, Phase::Shifted);
  return s_inv * (k1 * ia - kern.k(rho, Phase::Aligned)) -
         (kern.k_inv(rho, Phase::Shifted) * ia - d) * (d + k1);
}

inline Outcome<Ngon2nSolution> ngon2n_perverse(int n) {
  if (n < 2) throw DomainError("ngon2n_perverse: n must be >= 2");
  const RingKernel kern(n);
  auto g = [&](double r) { return ngon2n_perverse_function(kern, r); };
  const std::vector<double> grid = unit_interval_grid();
  const std::vector<Bracket> brackets = scan_sign_changes(g, grid);
  if (brackets.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    for (double r : grid) lo = std::min(lo, g(r));
    return NoSolution{n,
                      "determinant keeps one sign on (0, 1)",
                      {{"delta+k(1,pi/n)", kern.delta() + kern.k(1.0, Phase::Shifted)},
                       {"min_g", lo}}};
  }
  Ngon2nSolution s;
  s.n = n;
  s.root_count = static_cast<int>(brackets.size());
  s.rho = solve_bracket(g, brackets.front());
  s.f_at_root = g(s.rho);
  s.alpha = alpha_ratio(kern, s.rho);
  const RingSystem sys = s.system();
  try {
    s.M = total_mass_for_compatibility(sys, kern);
    s.line = solve_mass_line(sys, kern, s.M);
    s.certificate = certify_mass_line(sys, *s.line);
  } catch (const IncompatibleError& e) {
    return NoSolution{n, e.what(), {{"rho", s.rho}, {"g(rho)", s.f_at_root}}};
  } catch (const NoPositiveMassError& e) {
    return NoSolution{n, e.what(), {{"rho", s.rho}, {"g(rho)", s.f_at_root}}};
  }
  const Masses& w = s.certificate->masses_a;
  s.m0 = w.m0;
  s.m1 = w.m[0];
  s.m3 = w.m[1];
  s.m2 = w.m[2];
  s.system_residual = detail::system_residual(sys, kern, w);
  s.oracle_residual = s.certificate->residual();
  return s;
}

// ------------------------------------------------------------- three rings

/// det A_{n;3}(x1, x2) with rows divided by their absolute sums.
inline double three_ring_scaled_det(const RingKernel& kern, double x1, double x2) {
  return scaled_determinant(assemble(RingSystem::aligned(kern.n(), {x1, x2, 1.0}), kern));
}

namespace detail {

// Sign changes seen only where the sign is above rounding noise, each
// polished on the plain scaled determinant.
template <class Scan, class Polish>
std::vector<double> reliable_roots(Scan&& scan, Polish&& polish, const std::vector<double>& grid) {
  std::vector<double> roots;
  for (Bracket b : scan_sign_changes(scan, grid)) {
    b.f_lo = polish(b.lo);
    b.f_hi = polish(b.hi);
    if (std::signbit(b.f_lo) == std::signbit(b.f_hi)) continue;
    roots.push_back(solve_bracket(polish, b));
  }
  return roots;
}

}  // namespace detail

/// Roots of det A_{n;3}(x, sqrt x) on (0, 1).
inline std::vector<double> three_rings_diagonal_roots(const RingKernel& kern) {
  auto sys = [&](double x) { return RingSystem::aligned(kern.n(), {x, std::sqrt(x), 1.0}); };
  auto scan = [&](double x) {
    const RingSystem s = sys(x);
    return reliable_scaled_determinant(assemble(s, kern), s);
  };
  auto polish = [&](double x) { return scaled_determinant(assemble(sys(x), kern)); };
  return detail::reliable_roots(scan, polish, unit_interval_grid());
}

inline std::vector<double> three_rings_diagonal_roots(int n) {
  return three_rings_diagonal_roots(RingKernel(n));
}

struct CurvePoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct ZeroCurve {
  int n = 0;
  CurvePoint seed;
  std::vector<CurvePoint> points;
  bool closed = false;
  std::vector<bool> positive;
  std::vector<std::pair<int, int>> positive_arcs;  // inclusive index ranges
  double length = 0.0;                             // in log coordinates
  double max_scaled_det = 0.0;
  bool all_singular = true;  // every point passes is_singular()
  double sagitta = 0.0;
  double symmetry_error = 0.0;
  double symmetry_tolerance = 0.0;
  double min_step = 0.0;
  double scale = 1.0;  // stretch of the off-diagonal direction; distances below use it

  bool symmetric() const { return symmetry_error <= symmetry_tolerance; }
  bool fully_positive() const {
    return !positive.empty() && std::all_of(positive.begin(), positive.end(), [](bool b) { return b; });
  }
};

class TraceFailure : public TraceError {
 public:
  TraceFailure(const std::string& what, ZeroCurve partial)
      : TraceError(what), partial_(std::move(partial)) {}
  const ZeroCurve& partial() const noexcept { return partial_; }

 private:
  ZeroCurve partial_;
};

namespace detail {

using Vec2 = Eigen::Vector2d;

// Scaled determinant in tracing coordinates v = (u1, s (u2 - u1 / 2)),
// u = (log x1, log x2). The reflection x2 -> x1 / x2 is v2 -> -v2.
struct LogDet {
  const RingKernel& kern;
  double s = 1.0;

  Vec2 to_log(const Vec2& v) const { return {v(0), v(1) / s + 0.5 * v(0)}; }
  Vec2 from_log(const Vec2& u) const { return {u(0), s * (u(1) - 0.5 * u(0))}; }
  bool inside(const Vec2& v) const {
    const Vec2 u = to_log(v);
    return u(0) < u(1) && u(1) < 0.0;
  }
  double operator()(const Vec2& v) const {
    if (!inside(v)) return std::numeric_limits<double>::quiet_NaN();
    const Vec2 u = to_log(v);
    return three_ring_scaled_det(kern, std::exp(u(0)), std::exp(u(1)));
  }
  Vec2 grad(const Vec2& v) const {
    const double h = 1e-6;
    const Vec2 e0(h, 0.0), e1(0.0, h);
    return {((*this)(v + e0) - (*this)(v - e0)) / (2 * h),
            ((*this)(v + e1) - (*this)(v - e1)) / (2 * h)};
  }
  Vec2 tangent(const Vec2& v) const {
    const Vec2 g = grad(v);
    return Vec2(-g(1), g(0)).normalized();
  }
  // Radius of curvature of the level set through v.
  double curvature_radius(const Vec2& v) const {
    const double h = 1e-5;
    const Vec2 t = tangent(v);
    const double d2 = ((*this)(v + h * t) - 2 * (*this)(v) + (*this)(v - h * t)) / (h * h);
    return grad(v).norm() / std::abs(d2);
  }
  // Newton projection along the gradient; false if it does not settle.
  bool correct(Vec2& q, double target) const {
    for (int it = 0; it < 12; ++it) {
      const double f = (*this)(q);
      if (std::abs(f) <= target) return true;
      const Vec2 g = grad(q);
      const double g2 = g.squaredNorm();
      if (!(g2 > 0)) return false;
      q -= f * g / g2;
      if (!std::isfinite(q(0)) || !std::isfinite(q(1))) return false;
    }
    return std::abs((*this)(q)) <= target;
  }
};

inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  double t = l2 > 0 ? (p - a).dot(ab) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace detail

struct TraceOptions {
  double min_step = 1e-5;
  double max_step = 1e-2;
  double initial_step = 1e-3;
  double target = 1e-10;      // corrector residual on the scaled determinant
  double seed_tolerance = 1e-3;
  int max_points = 200000;
  double radius = 1e-3;  // seed curvature radius below which the trace is stretched
  double max_scale = 1e3;
};

/// Positivity flags and arcs from the mass line at each stored point.
inline void classify_positivity(const RingKernel& kern, ZeroCurve& c) {
  c.positive.assign(c.points.size(), false);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const RingSystem sys = RingSystem::aligned(kern.n(), {c.points[i].x1, c.points[i].x2, 1.0});
    try {
      const double M = total_mass_for_compatibility(sys, kern);
      if (!(M > 0)) continue;
      const MassLine line = solve_mass_line(sys, kern, M);
      c.positive[i] = line.perverse() && line.has_positive();
    } catch (const IncompatibleError&) {
    }
  }
  c.positive_arcs.clear();
  const int P = static_cast<int>(c.points.size());
  for (int i = 0; i < P;) {
    if (!c.positive[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < P && c.positive[j + 1]) ++j;
    c.positive_arcs.emplace_back(i, j);
    i = j + 1;
  }
}

/// Pseudo-arclength trace of {det A_{n;3} = 0} in (log x1, log x2) from a
/// seed near the zero set. Stops on closure or when the curve leaves
/// 0 < x1 < x2 < 1.
inline ZeroCurve trace_zero_curve(const RingKernel& kern, CurvePoint seed,
                                  const TraceOptions& opt = {}) {
  using detail::Vec2;
  if (!(seed.x1 > 0 && seed.x1 < seed.x2 && seed.x2 < 1))
    throw DomainError("trace_zero_curve: seed outside 0 < x1 < x2 < 1");
  detail::LogDet F{kern};
  ZeroCurve c;
  c.n = kern.n();
  c.seed = seed;
  Vec2 u = F.from_log({std::log(seed.x1), std::log(seed.x2)});
  if (std::abs(F(u)) > opt.seed_tolerance || !F.correct(u, opt.target) || !F.inside(u))
    throw TraceError("trace_zero_curve: seed is not near the zero set");
  // Thin curves turn faster than the minimum step allows; stretch the
  // off-diagonal direction until the seed curvature radius is ~opt.radius.
  const double radius = F.curvature_radius(u);
  const Vec2 log_seed = F.to_log(u);
  if (std::isfinite(radius) && radius < opt.radius)
    F.s = std::min(std::sqrt(opt.radius / radius), opt.max_scale);
  c.scale = F.s;
  u = F.from_log(log_seed);
  if (!F.correct(u, opt.target))
    throw TraceError("trace_zero_curve: seed is not near the zero set");
  const Vec2 start = u;
  std::vector<Vec2> pts{u};
  Vec2 t = F.tangent(u);
  double h = opt.initial_step;
  c.min_step = h;
  auto to_curve = [&](const std::vector<Vec2>& vs) {
    ZeroCurve out = c;
    out.points.clear();
    for (const Vec2& v : vs) {
      const Vec2 w = F.to_log(v);
      out.points.push_back({std::exp(w(0)), std::exp(w(1))});
    }
    return out;
  };
  bool left = false;
  double travelled = 0.0;
  while (static_cast<int>(pts.size()) < opt.max_points) {
    Vec2 q;
    bool ok = false;
    while (!ok) {
      const Vec2 p = u + h * t;
      q = p;
      ok = F.correct(q, opt.target) && (q - p).norm() < 0.3 * h;
      if (ok && !F.inside(q)) {
        left = true;
        break;
      }
      if (!ok) {
        h *= 0.5;
        if (h < opt.min_step)
          throw TraceFailure("trace_zero_curve: step collapsed below the minimum", to_curve(pts));
      }
    }
    if (left) break;
    Vec2 tn = F.tangent(q);
    if (tn.dot(t) < 0) tn = -tn;
    travelled += (q - u).norm();
    c.length += (F.to_log(q) - F.to_log(u)).norm();
    u = q;
    t = tn;
    pts.push_back(u);
    c.min_step = std::min(c.min_step, h);
    if (travelled > 5 * h && (u - start).norm() < 1.5 * h) {
      c.closed = true;
      pts.push_back(start);
      break;
    }
    h = std::min(1.5 * h, opt.max_step);
  }
  ZeroCurve out = to_curve(pts);
  out.closed = c.closed;
  out.length = c.length;
  out.min_step = c.min_step;

  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.max_scaled_det = std::max(out.max_scaled_det, std::abs(F(pts[i])));
    const InteractionMatrix a =
        assemble(RingSystem::aligned(kern.n(), {out.points[i].x1, out.points[i].x2, 1.0}), kern);
    if (!is_singular(a)) out.all_singular = false;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 mid = 0.5 * (pts[i] + pts[i + 1]);
    const Vec2 gm = F.grad(mid);
    if (gm.norm() > 0) out.sagitta = std::max(out.sagitta, std::abs(F(mid)) / gm.norm());
  }
  // x2 = x1^a maps to x1^(1-a), i.e. v2 -> -v2.
  for (const Vec2& p : pts) {
    const Vec2 r(p(0), -p(1));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      best = std::min(best, detail::segment_distance(r, pts[i], pts[i + 1]));
    out.symmetry_error = std::max(out.symmetry_error, best);
  }
  out.symmetry_tolerance = 10.0 * out.sagitta + 1e-9;
  classify_positivity(kern, out);
  return out;
}

inline ZeroCurve trace_zero_curve(int n, CurvePoint seed, const TraceOptions& opt = {}) {
  return trace_zero_curve(RingKernel(n), seed, opt);
}

/// Secant iteration in x2 at fixed x1 onto det A_{n;3} = 0; returns the
/// iterate with the smallest scaled determinant.
inline CurvePoint polish_curve_point(const RingKernel& kern, CurvePoint p) {
  auto f = [&](double x2) { return three_ring_scaled_det(kern, p.x1, x2); };
  double a = p.x2, b = p.x2 * (1 + 1e-8);
  if (!(b < 1)) b = p.x2 * (1 - 1e-8);
  double fa = f(a), fb = f(b);
  CurvePoint best = p;
  double fbest = std::abs(fa);
  for (int it = 0; it < 40 && fb != fa; ++it) {
    const double c = b - fb * (b - a) / (fb - fa);
    if (!(c > p.x1 && c < 1)) break;
    a = b;
    fa = fb;
    b = c;
    fb = f(b);
    if (std::abs(fb) < fbest) {
      fbest = std::abs(fb);
      best.x2 = b;
    }
    if (fb == 0.0 || std::abs(b - a) <= 1e-16 * b) break;
  }
  return best;
}

/// One certificate per positive arc, taken at the arc midpoint after
/// polishing it onto the zero set.
inline std::vector<std::pair<int, Certificate>> certify_curve(const RingKernel& kern,
                                                              const ZeroCurve& c) {
  std::vector<std::pair<int, Certificate>> out;
  for (const auto& [a, b] : c.positive_arcs) {
    const int i = (a + b) / 2;
    const CurvePoint q = polish_curve_point(kern, c.points[i]);
    const RingSystem sys = RingSystem::aligned(kern.n(), {q.x1, q.x2, 1.0});
    const double M = total_mass_for_compatibility(sys, kern);
    out.emplace_back(i, perverse_certificate(sys, kern, M));
  }
  return out;
}

// ------------------------------------------------------------------- k > 3

enum class NestingPattern { Prepend, Scale, TwoSolutions, Geometric };

inline const char* to_string(NestingPattern p) noexcept {
  switch (p) {
    case NestingPattern::Prepend: return "prepend";
    case NestingPattern::Scale: return "scale";
    case NestingPattern::TwoSolutions: return "two-solutions";
    case NestingPattern::Geometric: return "geometric";
  }
  return "?";
}

inline NestingPattern parse_pattern(const std::string& s) {
  if (s == "prepend") return NestingPattern::Prepend;
  if (s == "scale") return NestingPattern::Scale;
  if (s == "two-solutions") return NestingPattern::TwoSolutions;
  if (s == "geometric") return NestingPattern::Geometric;
  throw DomainError("unknown nesting pattern '" + s + "'");
}

/// Radii for k rings built from a k = 3 solution (r1, r2, 1).
///   prepend:       eps^(k-3), ..., eps, r1, r2, 1
///   scale:         eps^(k-3) (r1, r2, 1), eps^(k-4), ..., eps, 1
///   two-solutions: eps (s1, s2, 1), r1, r2, 1 (k = 6; s defaults to r)
///   geometric:     eps^(k-1), ..., eps, 1
inline RingSystem higher_k_seed(int k, int n, const std::vector<double>& base, double eps,
                                NestingPattern pattern,
                                const std::vector<double>& second = {}) {
  if (k < 4) throw DomainError("higher_k_seed: k must be >= 4");
  if (!(eps > 0 && eps < 1)) throw DomainError("higher_k_seed: eps must lie in (0, 1)");
  if (pattern != NestingPattern::Geometric && base.size() != 3)
    throw DomainError("higher_k_seed: base must hold three radii");
  std::vector<double> r;
  switch (pattern) {
    case NestingPattern::Prepend:
      for (int j = k - 3; j >= 1; --j) r.push_back(std::pow(eps, j));
      r.insert(r.end(), base.begin(), base.end());
      break;
    case NestingPattern::Scale: {
      const double s = std::pow(eps, k - 3);
      for (double b : base) r.push_back(s * b);
      for (int j = k - 4; j >= 1; --j) r.push_back(std::pow(eps, j));
      r.push_back(1.0);
      break;
    }
    case NestingPattern::TwoSolutions: {
      if (k != 6) throw PatternError("higher_k_seed: two-solutions needs k = 6");
      const std::vector<double>& inner = second.empty() ? base : second;
      if (inner.size() != 3) throw DomainError("higher_k_seed: second base must hold three radii");
      for (double b : inner) r.push_back(eps * b);
      r.insert(r.end(), base.begin(), base.end());
      break;
    }
    case NestingPattern::Geometric:
      for (int j = k - 1; j >= 0; --j) r.push_back(std::pow(eps, j));
      break;
  }
  if (static_cast<int>(r.size()) != k) throw PatternError("higher_k_seed: wrong number of radii");
  for (std::size_t j = 1; j < r.size(); ++j)
    if (!(r[j] > r[j - 1])) throw PatternError("higher_k_seed: radii are not strictly increasing");
  if (r.back() != 1.0) throw PatternError("higher_k_seed: outermost radius must be 1");
  return RingSystem::aligned(n, r);
}

struct RefineReport {
  int iterations = 0;
  double det = 0.0;
  double scale = 0.0;  // ||A||_inf^k
};

/// Damped Newton on log rho_free so that det A = 0, the other radii held.
inline RingSystem newton_refine(const RingSystem& seed, int free, const RingKernel& kern,
                                RefineReport* report = nullptr) {
  const int k = seed.k();
  if (free < 0 || free >= k - 1) throw DomainError("newton_refine: free index out of range");
  for (const Ring& r : seed.rings())
    if (r.phase != Phase::Aligned) throw DomainError("newton_refine: aligned rings only");
  std::vector<double> radii = seed.radii();
  const double lo = free > 0 ? std::log(radii[free - 1]) : -std::numeric_limits<double>::infinity();
  const double hi = std::log(radii[free + 1]);
  auto system_at = [&](double z) {
    std::vector<double> r = radii;
    r[free] = std::exp(z);
    return RingSystem::aligned(seed.n(), r, seed.beta());
  };
  auto F = [&](double z) { return scaled_determinant(assemble(system_at(z), kern)); };
  const InteractionMatrix a0 = assemble(seed, kern);
  if (std::abs(determinant(a0)) > 1e-3 * std::pow(a0.norm_inf(), k))
    throw RefineError("newton_refine: seed is not near a singular configuration");
  double z = std::log(radii[free]);
  double f = F(z);
  int it = 0;
  for (; it < 50; ++it) {
    const double h = 1e-7 * std::max(1.0, std::abs(z));
    const double d = (F(z + h) - F(z - h)) / (2 * h);
    if (!(d != 0.0) || !std::isfinite(d)) throw RefineError("newton_refine: flat determinant");
    double step = -f / d;
    bool moved = false;
    for (int damp = 0; damp < 40; ++damp) {
      const double zn = z + step;
      if (zn > lo && zn < hi) {
        const double fn = F(zn);
        if (std::abs(fn) < std::abs(f) || std::abs(fn) == 0.0) {
          moved = std::abs(zn - z) > 0;
          z = zn;
          f = fn;
          break;
        }
      }
      step *= 0.5;
    }
    const InteractionMatrix a = assemble(system_at(z), kern);
    const double scale = std::pow(a.norm_inf(), k);
    if (std::abs(determinant(a)) <= 1e-10 * scale && (!moved || std::abs(step) < 1e-14)) {
      if (report) *report = {it + 1, determinant(a), scale};
      return system_at(z);
    }
    if (!moved) break;
  }
  const InteractionMatrix a = assemble(system_at(z), kern);
  const double scale = std::pow(a.norm_inf(), k);
  if (std::abs(determinant(a)) <= 1e-10 * scale) {
    if (report) *report = {it, determinant(a), scale};
    return system_at(z);
  }
  throw RefineError("newton_refine: no convergence within 50 iterations");
}

inline RingSystem newton_refine(const RingSystem& seed, int free) {
  return newton_refine(seed, free, RingKernel(seed.n(), seed.beta()));
}

struct HigherKSolution {
  int n = 0;
  int k = 0;
  NestingPattern pattern = NestingPattern::Prepend;
  double eps = 0.0;
  int free = 0;
  std::vector<double> radii;
  double det = 0.0;
  double det_scale = 0.0;
  bool continued = false;  // reached through eps continuation
  double detune = 0.0;     // relative offset of the first outer radius (two-solutions)
  double M = 0.0;
  MassLine masses;
  std::optional<Certificate> certificate;
};

namespace detail {

inline void finish_higher_k(HigherKSolution& s, const RingSystem& sys, const RingKernel& kern,
                            const RefineReport& rep) {
  s.radii = sys.radii();
  s.det = rep.det;
  s.det_scale = rep.scale;
  s.M = total_mass_for_compatibility(sys, kern);
  s.masses = solve_mass_line(sys, kern, s.M);
  if (s.masses.perverse() && s.masses.has_positive())
    s.certificate = certify_mass_line(sys, s.masses);
}

// Both triples sit on their own zero curves, so det A is a product of two
// vanishing factors plus coupling and one radius alone cannot zero it. The
// first outer radius is moved off its curve by each offset in turn and the
// free radius is refined; the first certified result wins.
inline HigherKSolution solve_two_solutions(HigherKSolution s, const std::vector<double>& base,
                                           const std::vector<double>& second,
                                           const RingKernel& kern) {
  static constexpr double kDetune[] = {1e-2, -1e-2, 3e-2, -3e-2, 1e-3, -1e-3};
  const std::vector<double> r0 =
      higher_k_seed(6, s.n, base, s.eps, NestingPattern::TwoSolutions, second).radii();
  std::optional<HigherKSolution> fallback;
  std::string last_error = "no detuned seed refined";
  for (double d : kDetune) {
    std::vector<double> r = r0;
    r[3] *= 1 + d;
    if (!(r[3] > r[2] && r[3] < r[4])) continue;
    try {
      RefineReport rep;
      const RingSystem sys = newton_refine(RingSystem::aligned(s.n, r), s.free, kern, &rep);
      HigherKSolution t = s;
      t.detune = d;
      finish_higher_k(t, sys, kern, rep);
      if (t.certificate && t.certificate->valid()) return t;
      if (!fallback) fallback = t;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (fallback) return *fallback;
  throw RefineError("two-solutions: " + last_error);
}

}  // namespace detail

/// Seed from a k = 3 solution, refine the free radius, then solve the mass
/// line and certify. Direct Newton first; on failure continue in eps from
/// eps / 64 up to the target, doubling. `second` is the inner triple of the
/// two-solutions pattern (defaults to `base`).
inline HigherKSolution solve_higher_k(int n, int k, const std::vector<double>& base, double eps,
                                      NestingPattern pattern, int free,
                                      const std::vector<double>& second = {}) {
  const RingKernel kern(n);
  HigherKSolution s;
  s.n = n;
  s.k = k;
  s.pattern = pattern;
  s.eps = eps;
  s.free = free;
  if (pattern == NestingPattern::TwoSolutions) {
    if (k != 6) throw PatternError("solve_higher_k: two-solutions needs k = 6");
    return detail::solve_two_solutions(std::move(s), base, second, kern);
  }
  std::optional<RingSystem> sys;
  RefineReport rep;
  try {
    sys = newton_refine(higher_k_seed(k, n, base, eps, pattern), free, kern, &rep);
  } catch (const RefineError&) {
    double e = eps / 64;
    std::vector<double> radii = higher_k_seed(k, n, base, e, pattern).radii();
    while (true) {
      std::vector<double> seed = higher_k_seed(k, n, base, e, pattern).radii();
      seed[free] = radii[free];
      sys = newton_refine(RingSystem::aligned(n, seed), free, kern, &rep);
      radii = sys->radii();
      if (e >= eps) break;
      e = std::min(2 * e, eps);
    }
    s.continued = true;
  }
  detail::finish_higher_k(s, *sys, kern, rep);
  return s;
}

/// Singular members of the family rho_j = eps^(k-j) and the centre of the
/// singular eps-range (stationary point of the scaled determinant between
/// the first two roots).
struct EpsilonFamily {
  int n = 0;
  int k = 0;
  std::vector<double> roots;
  std::optional<double> center;
  double center_value = 0.0;
};

inline RingSystem geometric_system(int n, int k, double eps) {
  std::vector<double> r;
  for (int j = k - 1; j >= 0; --j) r.push_back(std::pow(eps, j));
  return RingSystem::aligned(n, r);
}

inline InteractionMatrix geometric_matrix(const RingKernel& kern, int k, double eps) {
  return assemble(geometric_system(kern.n(), k, eps), kern);
}

inline double geometric_scaled_det(const RingKernel& kern, int k, double eps) {
  return scaled_determinant(geometric_matrix(kern, k, eps));
}

inline EpsilonFamily epsilon_family(int n, int k) {
  if (k < 2) throw DomainError("epsilon_family: k must be >= 2");
  const RingKernel kern(n);
  EpsilonFamily fam;
  fam.n = n;
  fam.k = k;
  auto f = [&](double e) { return geometric_scaled_det(kern, k, e); };
  // the eps^(k-1) radius must stay representable and distinct
  std::vector<double> grid;
  for (double e : unit_interval_grid())
    if (std::pow(e, k - 1) > 1e-200) grid.push_back(e);
  auto scan = [&](double e) {
    const RingSystem s = geometric_system(n, k, e);
    return reliable_scaled_determinant(assemble(s, kern), s);
  };
  fam.roots = detail::reliable_roots(scan, f, grid);
  if (fam.roots.size() >= 2) {
    const double a = fam.roots[0], b = fam.roots[1];
    const double sign = f(0.5 * (a + b)) < 0 ? -1.0 : 1.0;
    auto neg = [&](double e) { return -sign * f(e); };
    const auto [e, v] = boost::math::tools::brent_find_minima(neg, a, b, 40);
    fam.center = e;
    fam.center_value = -sign * v;
  }
  return fam;
}

// ---------------------------------------------------------------- exponents

struct BetaRoot {
  int n = 0;
  double beta = 0.0;
  double delta_at_root = 0.0;
};

/// beta with delta_n(beta) = 0, bracketed in (0.3, 10).
inline BetaRoot beta_root(int n) {
  if (n < 7) throw DomainError("beta_root: n must be >= 7");
  auto f = [&](double b) { return delta_exact(n, Exponent(b)); };
  Bracket br{0.3, 10.0, f(0.3), f(10.0)};
  if (std::signbit(br.f_lo) == std::signbit(br.f_hi))
    throw NoRootError("beta_root: no sign change of delta_n(beta) on (0.3, 10)");
  br = bisect(f, br, 1e-12);
  BetaRoot r{n, 0.5 * (br.lo + br.hi), 0.0};
  r.delta_at_root = f(r.beta);
  return r;
}

struct BetaCritical {
  double value = 0.0;
  std::vector<BetaRoot> ladder;  // beta(n) for n = 10, 100, ..., n_max

  bool ladder_decreasing() const {
    for (std::size_t i = 1; i < ladder.size(); ++i)
      if (!(ladder[i].beta < ladder[i - 1].beta)) return false;
    return true;
  }
};

/// Limit of delta_n(beta) as n -> infinity, extrapolated from n / 4, n / 2
/// and n with the correction exponents n^(2 beta - 1), n^(2 beta - 3).
inline double delta_limit(int n, double beta) {
  const int ns[3] = {n / 4, n / 2, n};
  double d[3];
  for (int i = 0; i < 3; ++i) d[i] = delta_exact(ns[i], Exponent(beta));
  double q = std::pow(2.0, 1.0 - 2 * beta);
  const double r0 = (q * d[1] - d[0]) / (q - 1);
  const double r1 = (q * d[2] - d[1]) / (q - 1);
  q = std::pow(2.0, 3.0 - 2 * beta);
  return (q * r1 - r0) / (q - 1);
}

/// beta_c: the exponent where the extrapolated limit of delta_n vanishes,
/// with beta(n) on a decade ladder up to n_max.
inline BetaCritical beta_critical(int n_max) {
  if (n_max < 1000) throw DomainError("beta_critical: n_max must be >= 1000");
  BetaCritical out;
  auto f = [&](double b) { return delta_limit(n_max, b); };
  Bracket br{0.3, 0.49, f(0.3), f(0.49)};
  if (std::signbit(br.f_lo) == std::signbit(br.f_hi))
    throw NoRootError("beta_critical: extrapolated limit has no sign change on (0.3, 0.49)");
  out.value = solve_bracket(f, br);
  std::vector<int> ns;
  for (long long m = 10; m < n_max; m *= 10) ns.push_back(static_cast<int>(m));
  ns.push_back(n_max);
  out.ladder.resize(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) { out.ladder[i] = beta_root(ns[i]); });
  return out;
}

}  // namespace ringeq
