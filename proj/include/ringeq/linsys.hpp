#pragma once

// Reduced mass system A (n m) = (rho_j^(2 beta + 2) - M)_j: assembly,
// determinants, singularity tests, compatibility of the total mass and the
// affine family of admissible masses.

#ifdef RINGEQ_ORACLE_ONLY
#error "linsys.hpp must not be reachable from the force oracle"
#endif

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ringeq/core.hpp"
#include "ringeq/kernel.hpp"
#include "ringeq/ring_system.hpp"

namespace ringeq {

struct InteractionMatrix {
  int n = 0;
  Exponent beta;
  double delta = 0.0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd h;  // h_n = k_n + 1 from the kernel directly; keeps precision when k ~ -1

  int k() const noexcept { return static_cast<int>(a.rows()); }
  double norm_inf() const { return a.cwiseAbs().rowwise().sum().maxCoeff(); }
  double operator()(int j, int s) const { return a(j, s); }
};

/// A[j][s] = k_n(rho_s / rho_j, theta_s - theta_j), diagonal delta_n.
inline InteractionMatrix assemble(const RingSystem& sys, const RingKernel& kern) {
  if (kern.n() != sys.n() || !(kern.beta() == sys.beta()))
    throw DomainError("assemble: kernel does not match the ring system");
  const int k = sys.k();
  InteractionMatrix m{sys.n(), sys.beta(), kern.delta(), Eigen::MatrixXd(k, k),
                      Eigen::MatrixXd(k, k)};
  const double self = kern.eval(1.0, Phase::Aligned).h;
  for (int j = 0; j < k; ++j) {
    for (int s = 0; s < k; ++s) {
      if (j == s) {
        m.a(j, s) = kern.delta();
        m.h(j, s) = self;
        continue;
      }
      const Ring& rj = sys.ring(j);
      const Ring& rs = sys.ring(s);
      const KernelValue v =
          kern.eval(rs.radius / rj.radius, phase_difference(rs.phase, rj.phase));
      m.a(j, s) = v.k;
      m.h(j, s) = v.h;
    }
  }
  return m;
}

inline InteractionMatrix assemble(const RingSystem& sys) {
  return assemble(sys, RingKernel(sys.n(), sys.beta()));
}

/// LU with partial pivoting.
inline double determinant(const InteractionMatrix& m) {
  if (m.k() == 1) return m.a(0, 0);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m.a).determinant();
}

/// Determinant after dividing each row by its absolute row sum. Same zero
/// set and sign as determinant(), bounded by 1 in magnitude.
inline double scaled_determinant(const InteractionMatrix& m) {
  Eigen::MatrixXd s = m.a;
  for (int j = 0; j < s.rows(); ++j) {
    const double r = s.row(j).cwiseAbs().sum();
    if (r > 0) s.row(j) /= r;
  }
  if (s.rows() == 1) return s(0, 0);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(s).determinant();
}

/// |det A| <= tol * ||A||_inf^k.
inline bool is_singular(const InteractionMatrix& m, double tol = singular_tolerance()) {
  return std::abs(determinant(m)) <= tol * std::pow(m.norm_inf(), m.k());
}

/// Sum of |terms| of the Leibniz expansion (the permanent of |A|, Ryser's
/// formula), the scale of rounding noise in det A. NaN for k > 20.
inline double leibniz_magnitude(const InteractionMatrix& m) {
  const int k = m.k();
  if (k > 20) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd b = m.a.cwiseAbs();
  if (k == 1) return b(0, 0);
  double total = 0.0;
  const unsigned long long subsets = 1ULL << k;
  for (unsigned long long mask = 1; mask < subsets; ++mask) {
    double prod = 1.0;
    for (int i = 0; i < k; ++i) {
      double row = 0.0;
      for (int j = 0; j < k; ++j)
        if (mask & (1ULL << j)) row += b(i, j);
      prod *= row;
    }
    const int bits = std::popcount(mask);
    total += ((k - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
  }
  return std::abs(total);
}

/// Scaled determinant, or NaN when |det| is inside the rounding noise
/// (below rel * leibniz_magnitude). For sign scans.
inline double reliable_scaled_determinant(const InteractionMatrix& m, double rel = 1e-11) {
  const double d = determinant(m);
  const double mag = leibniz_magnitude(m);
  if (std::isfinite(mag) && std::abs(d) <= rel * mag) return std::numeric_limits<double>::quiet_NaN();
  return scaled_determinant(m);
}

/// As above with the rounding of the radius ratios included: an ulp in
/// rho_s / rho_j moves k_n by up to 1 / |1 - rho_s / rho_j| relative.
inline double reliable_scaled_determinant(const InteractionMatrix& m, const RingSystem& sys) {
  double kappa = 1.0;
  for (int j = 0; j < sys.k(); ++j)
    for (int s = 0; s < sys.k(); ++s) {
      const double r = sys.ring(s).radius / sys.ring(j).radius;
      if (r != 1.0) kappa = std::max(kappa, 1.0 / std::abs(1.0 - r));
    }
  const double rel = 64.0 * std::numeric_limits<double>::epsilon() * m.k() * kappa;
  return reliable_scaled_determinant(m, std::max(rel, 1e-11));
}

/// Singular values below this fraction of the largest count as null.
inline constexpr double kRankThreshold = 1e-7;

inline int rank_defect(const InteractionMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.a);
  const auto& sv = svd.singularValues();
  int d = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= kRankThreshold * sv(0)) ++d;
  return d;
}

struct PQDecomposition {
  double p = 0.0;
  double q = 0.0;
  double delta = 0.0;
  double magnitude = 0.0;  // sum of |terms| of the expansion; rounding scale of det

  double determinant() const { return delta * delta * delta + p * delta + q; }
};

/// det A_{n;3}(x1, x2) = delta^3 + p delta + q for the all-aligned rings
/// (x1, x2, 1), expanded by hand from kernel values.
inline PQDecomposition pq_decompose(const RingKernel& kern, double x1, double x2) {
  if (!(x1 > 0 && x1 < x2 && x2 < 1))
    throw DomainError("pq_decompose: need 0 < x1 < x2 < 1");
  const double a12 = kern.k(x2 / x1);
  const double a13 = kern.k(1.0 / x1);
  const double a21 = kern.k(x1 / x2);
  const double a23 = kern.k(1.0 / x2);
  const double a31 = kern.k(x1);
  const double a32 = kern.k(x2);
  const double p = -(a12 * a21 + a13 * a31 + a23 * a32);
  const double q = a12 * a23 * a31 + a13 * a21 * a32;
  const double d = std::abs(kern.delta());
  const double mag = d * d * d +
                     d * (std::abs(a12 * a21) + std::abs(a13 * a31) + std::abs(a23 * a32)) +
                     std::abs(a12 * a23 * a31) + std::abs(a13 * a21 * a32);
  return {p, q, kern.delta(), mag};
}

inline PQDecomposition pq_decompose(int n, double x1, double x2) {
  return pq_decompose(RingKernel(n), x1, x2);
}

/// alpha_n(rho) = (k_n(1, pi/n) - delta_n) / (k_n(rho, 0) - k_n(rho, pi/n)),
/// 0 at rho = 1. An underflowing denominator gives +inf below 1 and -inf above.
inline double alpha_ratio(const RingKernel& kern, double rho) {
  if (!(rho > 0)) throw DomainError("alpha_ratio: rho must be > 0");
  if (rho == 1.0) return 0.0;
  const double num = kern.k(1.0, Phase::Shifted) - kern.delta();
  const double den = kern.phase_gap(rho);
  if (den == 0.0)
    return rho < 1 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  return num / den;
}

/// log |alpha_n(rho)|, finite where alpha itself overflows.
inline double log_abs_alpha_ratio(const RingKernel& kern, double rho) {
  if (!(rho > 0) || rho == 1.0) throw DomainError("log_abs_alpha_ratio: rho must be > 0 and != 1");
  return std::log(kern.k(1.0, Phase::Shifted) - kern.delta()) - kern.log_abs_phase_gap(rho);
}

inline double alpha_ratio(int n, double rho) { return alpha_ratio(RingKernel(n), rho); }

/// rho_j^(2 beta + 2).
inline std::vector<double> radius_powers(const RingSystem& sys) {
  std::vector<double> p;
  const double e = sys.beta().force_power();
  for (const Ring& r : sys.rings())
    p.push_back(sys.beta().is_newtonian() ? r.radius * r.radius * r.radius
                                          : std::pow(r.radius, e));
  return p;
}

namespace detail {

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Unknowns z = (n m_1, ..., n m_k, m0). Rows j < k: sum_s h_js n m_s + m0 =
// rho_j^p; last row: m0 + n sum m_s = M. Subtracting the last row from the
// others gives A (n m) = rho^p - M, so B is singular exactly when A is, but
// its entries keep full relative precision on small inner rings.
inline Eigen::MatrixXd augmented(const InteractionMatrix& m) {
  const int k = m.k();
  Eigen::MatrixXd b(k + 1, k + 1);
  b.topLeftCorner(k, k) = m.h;
  b.col(k).setOnes();
  b.row(k).setOnes();
  return b;
}

inline Eigen::VectorXd augmented_rhs(const std::vector<double>& powers, double M) {
  Eigen::VectorXd c(powers.size() + 1);
  c.head(powers.size()) = to_vector(powers);
  c(powers.size()) = M;
  return c;
}

struct Factored {
  Eigen::MatrixXd a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd;
  int rank = 0;

  explicit Factored(const Eigen::MatrixXd& m, int forced_rank = -1)
      : a(m), svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV) {
    const auto& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > kRankThreshold * sv(0)) ++rank;
    if (forced_rank >= 0) rank = forced_rank;
  }
  int defect() const { return static_cast<int>(svd.singularValues().size()) - rank; }

  // Minimum-norm solution restricted to the numerical range.
  Eigen::VectorXd pinv(const Eigen::VectorXd& b) const {
    const auto& u = svd.matrixU();
    const auto& v = svd.matrixV();
    const auto& sv = svd.singularValues();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(v.rows());
    for (int i = 0; i < rank; ++i) y += v.col(i) * (u.col(i).dot(b) / sv(i));
    return y;
  }

  // pinv plus iterative refinement: residuals are formed from the exact
  // entries, so small components converge to full relative accuracy.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd y = pinv(b);
    for (int it = 0; it < 3; ++it) y += pinv(b - a * y);
    return y;
  }
};

inline double consistency_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& b) {
  return (a * y - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

inline constexpr double kConsistencyTol = 1e-9;

}  // namespace detail

/// M chosen so that (rho^p, M) has no component along the left null space
/// of the augmented system; verified against the least-squares residual.
inline double compatibility_mass_least_squares(const InteractionMatrix& m,
                                               const std::vector<double>& powers) {
  const int k = m.k();
  detail::Factored f(detail::augmented(m));
  if (f.defect() == 0) throw NotSingularError("compatibility: matrix is not singular");
  const Eigen::MatrixXd w = f.svd.matrixU().rightCols(f.defect());
  const Eigen::VectorXd wp = w.topRows(k).transpose() * detail::to_vector(powers);
  const Eigen::VectorXd wl = w.row(k).transpose();
  const double denom = wl.squaredNorm();
  if (!(denom > 1e-24))
    throw IncompatibleError("compatibility: total mass does not enter the left null space");
  const double M = -wp.dot(wl) / denom;
  const Eigen::VectorXd c = detail::augmented_rhs(powers, M);
  if (detail::consistency_residual(f.a, f.solve(c), c) > detail::kConsistencyTol)
    throw IncompatibleError("compatibility: no total mass makes the system consistent");
  return M;
}

/// Closed form for rings (x, shifted), (1, aligned):
/// M = (x^(2 beta + 2) k - delta) / (k - delta), k = k_n(x, pi/n).
inline double shifted_pair_total_mass(const RingKernel& kern, double x) {
  const double k = kern.k(x, Phase::Shifted);
  const double d = kern.delta();
  const double xp = kern.beta().is_newtonian() ? x * x * x
                                               : std::pow(x, kern.beta().force_power());
  return (xp * k - d) / (k - d);
}

/// Closed form for rings (rho, aligned), (1, shifted), (1, aligned):
/// M = (rho^3 (delta + k1) - S) / (delta + k1 - S), k1 = k_n(1, pi/n),
/// S = k_n(1/rho, 0) + k_n(1/rho, pi/n).
inline double ngon2n_total_mass(const RingKernel& kern, double rho) {
  const double k1 = kern.k(1.0, Phase::Shifted);
  const double d = kern.delta();
  const double s = kern.k_inv(rho, Phase::Aligned) + kern.k_inv(rho, Phase::Shifted);
  const double rp = kern.beta().is_newtonian() ? rho * rho * rho
                                               : std::pow(rho, kern.beta().force_power());
  return (rp * (d + k1) - s) / (d + k1 - s);
}

namespace detail {

inline bool is_shifted_pair_layout(const RingSystem& sys) {
  return sys.k() == 2 && sys.ring(0).phase == Phase::Shifted && sys.ring(0).radius < 1.0;
}

inline bool is_ngon2n_layout(const RingSystem& sys) {
  return sys.k() == 3 && sys.ring(0).phase == Phase::Aligned && sys.ring(0).radius < 1.0 &&
         sys.ring(1).radius == 1.0 && sys.ring(1).phase == Phase::Shifted;
}

}  // namespace detail

/// Unique total mass putting the right-hand side into the column space of a
/// singular system. Closed forms for the shifted pair and the n-gon/2n-gon
/// layouts, least squares otherwise.
inline double total_mass_for_compatibility(const RingSystem& sys, const RingKernel& kern) {
  const InteractionMatrix m = assemble(sys, kern);
  detail::Factored f(detail::augmented(m));
  if (f.defect() == 0 && !is_singular(m))
    throw NotSingularError("total_mass_for_compatibility: matrix is not singular");
  const std::vector<double> powers = radius_powers(sys);
  double M;
  if (detail::is_shifted_pair_layout(sys))
    M = shifted_pair_total_mass(kern, sys.ring(0).radius);
  else if (detail::is_ngon2n_layout(sys))
    M = ngon2n_total_mass(kern, sys.ring(0).radius);
  else
    return compatibility_mass_least_squares(m, powers);
  const Eigen::VectorXd c = detail::augmented_rhs(powers, M);
  if (detail::consistency_residual(f.a, f.solve(c), c) > detail::kConsistencyTol)
    throw IncompatibleError("total_mass_for_compatibility: closed form is inconsistent");
  return M;
}

inline double total_mass_for_compatibility(const RingSystem& sys) {
  return total_mass_for_compatibility(sys, RingKernel(sys.n(), sys.beta()));
}

/// Parameter set {t : a_j + c_j t > 0 for ring masses, m0(t) >= 0}.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  bool empty() const {
    if (lo < hi) return false;
    return !(lo == hi && lo_closed && hi_closed);
  }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return empty() ? 0.0 : hi - lo; }
  bool contains(double t) const {
    const bool above = lo_closed ? t >= lo : t > lo;
    const bool below = hi_closed ? t <= hi : t < hi;
    return above && below;
  }

  // Intersect with {t : a + c t > 0} (strict) or >= 0.
  void require(double a, double c, bool strict) {
    if (c == 0.0) {
      if (strict ? !(a > 0) : !(a >= 0)) {
        lo = 1.0;
        hi = 0.0;
      }
      return;
    }
    const double t = -a / c;
    if (c > 0) {
      if (t > lo || (t == lo && strict)) {
        lo = t;
        lo_closed = !strict;
      }
    } else {
      if (t < hi || (t == hi && strict)) {
        hi = t;
        hi_closed = !strict;
      }
    }
  }
};

/// Affine family m(t) = particular + t direction of per-vertex ring masses
/// at fixed total mass M, with m0(t) carried alongside so that a small
/// central mass is not recovered by cancellation from M.
struct MassLine {
  int n = 0;
  double M = 0.0;
  std::vector<double> particular;
  std::vector<double> direction;
  double m0_particular = 0.0;
  double m0_direction = 0.0;
  Interval t_range;
  int rank_defect = 0;
  double consistency = 0.0;

  std::vector<double> m(double t) const {
    std::vector<double> out(particular.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = particular[j] + t * direction[j];
    return out;
  }
  double m0(double t) const { return m0_particular + t * m0_direction; }
  Masses masses(double t) const { return {m0(t), m(t)}; }

  bool perverse() const { return rank_defect >= 1; }
  bool has_positive() const { return !t_range.empty(); }

  /// Parameter where the central mass vanishes, when it is admissible.
  std::optional<double> m0_zero_t() const {
    if (!perverse() || t_range.empty() || m0_direction == 0.0) return std::nullopt;
    const double t = -m0_particular / m0_direction;
    for (std::size_t j = 0; j < particular.size(); ++j)
      if (!(particular[j] + t * direction[j] > 0)) return std::nullopt;
    return t;
  }
};

/// Solve A (n m) = rho^p - M through the augmented system. Rank defect 0
/// gives a unique point (zero direction); otherwise the first null
/// direction spans the line.
inline MassLine solve_mass_line(const InteractionMatrix& m, const std::vector<double>& powers,
                                double M) {
  if (!(M > 0)) throw DomainError("solve_mass_line: M must be > 0");
  const int k = m.k();
  const Eigen::MatrixXd b = detail::augmented(m);
  const detail::Factored f(b);
  // Row j scaled by rho_j^-p, column s by rho_s^p: inner masses are of
  // order rho^p, and the scaled unknowns are all of order one. The null
  // direction comes from the unscaled factorization, where its inner
  // components are not shrunk.
  Eigen::VectorXd rs = Eigen::VectorXd::Ones(k + 1), cs = Eigen::VectorXd::Ones(k + 1);
  for (int j = 0; j < k; ++j) {
    rs(j) = 1.0 / powers[j];
    cs(j) = powers[j];
  }
  cs(k) = *std::min_element(powers.begin(), powers.end());
  const detail::Factored g(rs.asDiagonal() * b * cs.asDiagonal(), f.rank);
  const Eigen::VectorXd c = detail::augmented_rhs(powers, M);
  MassLine line;
  line.n = m.n;
  line.M = M;
  line.rank_defect = f.defect();
  Eigen::VectorXd z = cs.cwiseProduct(g.solve(rs.cwiseProduct(c)));
  line.consistency = detail::consistency_residual(b, z, c);
  if (line.consistency > detail::kConsistencyTol)
    throw IncompatibleError("solve_mass_line: M is not compatible with the singular system");
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(k + 1);
  if (line.rank_defect >= 1) {
    dir = f.svd.matrixV().col(f.rank);
    const double norm = dir.head(k).norm();
    if (norm > 0) dir *= m.n / norm;
    for (int j = 0; j < k; ++j) {
      if (dir(j) != 0.0) {
        if (dir(j) < 0) dir = -dir;
        break;
      }
    }
  }
  // Make the last row of B hold exactly, so the total is M on the whole
  // line. The defect goes to the outermost ring; an absolute error in an
  // inner mass is amplified by rho^-3 in the forces.
  const int outer = static_cast<int>(std::max_element(powers.begin(), powers.end()) - powers.begin());
  CompensatedSum total, moving;
  for (int j = 0; j <= k; ++j) total += z(j);
  for (int j = 0; j < k; ++j) moving += dir(j);
  z(outer) += M - total.value();
  line.particular.resize(k);
  line.direction.resize(k);
  for (int j = 0; j < k; ++j) {
    line.particular[j] = z(j) / m.n;
    line.direction[j] = dir(j) / m.n;
  }
  line.m0_particular = z(k);
  line.m0_direction = line.rank_defect >= 1 ? -moving.value() : 0.0;
  if (line.rank_defect == 0) line.t_range = {0.0, 0.0, true, true};
  for (int j = 0; j < k; ++j) line.t_range.require(line.particular[j], line.direction[j], true);
  line.t_range.require(line.m0_particular, line.m0_direction, false);
  return line;
}

inline MassLine solve_mass_line(const RingSystem& sys, const RingKernel& kern, double M) {
  return solve_mass_line(assemble(sys, kern), radius_powers(sys), M);
}

inline MassLine solve_mass_line(const RingSystem& sys, double M) {
  return solve_mass_line(sys, RingKernel(sys.n(), sys.beta()), M);
}

/// max_j |A (n m(t)) - rhs|_j / (1 + ||rhs||_inf).
inline double mass_line_residual(const InteractionMatrix& m, const std::vector<double>& powers,
                                 const MassLine& line, double t) {
  const Eigen::VectorXd b =
      detail::to_vector(powers) - line.M * Eigen::VectorXd::Ones(m.k());
  Eigen::VectorXd y = detail::to_vector(line.m(t)) * static_cast<double>(m.n);
  return detail::consistency_residual(m.a, y, b);
}

}  // namespace ringeq
