#pragma once

// Ring-interaction special functions: the self-interaction delta_n, the
// normalized radial force kernel h_n / k_n, and the averaged potential V_n.

#ifdef RINGEQ_ORACLE_ONLY
#error "kernel.hpp must not be reachable from the force oracle"
#endif

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ringeq/core.hpp"

namespace ringeq {

struct KernelValue {
  double h = 1.0;
  double k = 0.0;
};

namespace detail {

inline double pow_neg(double base, Exponent beta, double extra) {
  // base^-(beta + extra); the Newtonian exponent 3/2 avoids pow().
  const double e = beta.value() + extra;
  if (e == 1.5) return 1.0 / (base * std::sqrt(base));
  if (e == 0.5) return 1.0 / std::sqrt(base);
  if (e == 1.0) return 1.0 / base;
  return std::pow(base, -e);
}

}  // namespace detail

/// delta_n(beta) = (1 / (2^(2 beta + 1) n)) sum_{l=1}^{n-1} sin(pi l / n)^(-2 beta) - 1.
inline double delta_exact(int n, Exponent beta = {}) {
  if (n < 2) throw DomainError("delta_exact: n must be >= 2");
  CompensatedSum s;
  const double p = 2.0 * beta.value();
  for (int l = 1; l < n; ++l) {
    const double sn = sin_pi_ratio(l, n);
    s += beta.is_newtonian() ? 1.0 / sn : std::pow(sn, -p);
  }
  return s.value() / (std::pow(2.0, p + 1.0) * n) - 1.0;
}

/// Coefficient of n^(-2j) in the large-n expansion of delta_n (Newtonian),
/// from (-1)^j (2^(2j-1) - 1) B_{2j}^2 pi^(2j-1) / ((2j) (2j)!).
inline double delta_series_coefficient(int j) {
  static constexpr std::array<double, 5> bernoulli = {1.0 / 6, -1.0 / 30, 1.0 / 42,
                                                      -1.0 / 30, 5.0 / 66};
  if (j < 1 || j > static_cast<int>(bernoulli.size()))
    throw DomainError("delta_series_coefficient: j out of range");
  const double b = bernoulli[j - 1];
  double fact = 1.0;
  for (int i = 2; i <= 2 * j; ++i) fact *= i;
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  return sign * (std::pow(2.0, 2 * j - 1) - 1.0) * b * b * std::pow(kPi, 2 * j - 1) /
         (2.0 * j * fact);
}

/// Four-correction asymptotic form of delta_n; defined for real n > 0.
inline double delta_asymptotic(double n) {
  if (!(n > 0)) throw DomainError("delta_asymptotic: n must be > 0");
  const double pi = kPi;
  const double n2 = n * n;
  const double n4 = n2 * n2;
  const double n6 = n4 * n2;
  const double n8 = n4 * n4;
  return (kEulerGamma + std::log(2.0 * n / pi)) / (2.0 * pi) - pi / (144.0 * n2) +
         7.0 * std::pow(pi, 3) / (86400.0 * n4) - 31.0 * std::pow(pi, 5) / (7620480.0 * n6) +
         127.0 * std::pow(pi, 7) / (290304000.0 * n8) - 1.0;
}

/// Real n where the asymptotic delta_n changes sign (~472.271).
inline double delta_zero_crossing() {
  double lo = 400.0, hi = 500.0;
  double flo = delta_asymptotic(lo);
  if (!(flo < 0 && delta_asymptotic(hi) > 0))
    throw Error("delta_zero_crossing: bracket [400, 500] lost its sign change");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = delta_asymptotic(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Evaluator of h_n(x, theta) for a fixed n and exponent. Holds the
/// sin^2 tables; immutable after construction.
class RingKernel {
 public:
  explicit RingKernel(int n, Exponent beta = {}) : n_(n), beta_(beta) {
    if (n < 2) throw DomainError("RingKernel: n must be >= 2");
    aligned_.resize(n);
    shifted_.resize(n);
    for (int l = 1; l <= n; ++l) {
      const double sa = sin_pi_ratio(l, n);
      const double ss = sin_pi_ratio(2LL * l + 1, 2LL * n);
      aligned_[l - 1] = sa * sa;
      shifted_[l - 1] = ss * ss;
    }
    aligned_[n - 1] = 0.0;
    delta_ = eval(1.0, Phase::Aligned).k;
  }

  int n() const noexcept { return n_; }
  Exponent beta() const noexcept { return beta_; }
  double delta() const noexcept { return delta_; }

  /// H_n(x, theta) / n with the self term excluded at x = 1, Aligned.
  KernelValue eval(double x, Phase phase) const {
    if (!(x >= 0)) throw DomainError("ring_kernel: x must be >= 0");
    if (std::isinf(x)) return {0.0, -1.0};
    const std::vector<double>& s2 = phase == Phase::Aligned ? aligned_ : shifted_;
    const double u = 1.0 - x;
    const bool self = (x == 1.0 && phase == Phase::Aligned);
    const int count = self ? n_ - 1 : n_;
    CompensatedSum sum;
    for (int l = 0; l < count; ++l) {
      const double s = s2[l];
      const double num = u + 2.0 * x * s;
      const double den = u * u + 4.0 * x * s;
      sum += num * detail::pow_neg(den, beta_, 1.0);
    }
    const double h = sum.value() / n_;
    return {h, h - 1.0};
  }

  double k(double x, Phase phase = Phase::Aligned) const { return eval(x, phase).k; }

  /// k_n evaluated at the reciprocal ratio 1/x; x = 0 maps to the limit -1.
  double k_inv(double x, Phase phase = Phase::Aligned) const {
    if (x == 0.0) return -1.0;
    return k(1.0 / x, phase);
  }

  /// k_n(x, 0) - k_n(x, pi/n). The direct difference cancels to noise once
  /// x^n (or x^-n) is small; there the Newtonian case uses the harmonic
  /// series of the averaged potential instead.
  double phase_gap(double x) const {
    if (!(x >= 0)) throw DomainError("phase_gap: x must be >= 0");
    if (x == 0.0 || std::isinf(x)) return 0.0;
    if (x == 1.0) return k(1.0, Phase::Aligned) - k(1.0, Phase::Shifted);
    if (beta_.is_newtonian() && far_from_ring(x)) {
      const double lg = log_gap_series(x);
      return x < 1 ? std::exp(lg) : -std::exp(lg);
    }
    return k(x, Phase::Aligned) - k(x, Phase::Shifted);
  }

  /// log |phase_gap(x)|, finite where the gap itself underflows.
  double log_abs_phase_gap(double x) const {
    if (!(x > 0) || x == 1.0 || std::isinf(x))
      throw DomainError("log_abs_phase_gap: x must be > 0, finite and != 1");
    if (beta_.is_newtonian() && far_from_ring(x)) return log_gap_series(x);
    return std::log(std::abs(k(x, Phase::Aligned) - k(x, Phase::Shifted)));
  }

 private:
  bool far_from_ring(double x) const {
    return n_ * std::abs(std::log(x)) > 6.9;  // x^n or x^-n below 1e-3
  }

  // With c_j = binom(2j, j) / 4^j, V(x, 0) - V(x, pi/n) =
  // 4 sum_{m odd} sum_l c_{l+mn} c_l x^{mn+2l}. Then h = d/dx (x V) for
  // x < 1, and h(x) = -y^2 V'(y) with y = 1/x above the ring.
  double log_gap_series(double x) const {
    const bool inside = x < 1;
    const double y = inside ? x : 1.0 / x;
    const double ly = std::log(y);
    const double y2 = y * y;
    double total = 0.0;
    for (int m = 1;; m += 2) {
      const double mn = static_cast<double>(m) * n_;
      const double shift = (m - 1) * n_ * ly;  // y^{(m-1) n}
      if (m > 1 && shift < -60.0) break;
      double c_hi = std::exp(std::lgamma(mn + 0.5) - std::lgamma(mn + 1.0) - 0.5 * std::log(kPi));
      double c_lo = 1.0;
      double pw = std::exp(shift);
      double part = 0.0;
      for (int l = 0; l < 1000000; ++l) {
        const double weight = inside ? mn + 2.0 * l + 1.0 : mn + 2.0 * l;
        const double term = c_hi * c_lo * weight * pw;
        part += term;
        if (l > 8 && term < 1e-18 * part) break;
        c_hi *= (mn + l + 0.5) / (mn + l + 1.0);
        c_lo *= (l + 0.5) / (l + 1.0);
        pw *= y2;
        if (pw == 0.0) break;
      }
      total += part;
    }
    return std::log(4.0 * total) + n_ * ly + (inside ? 0.0 : ly);
  }

  int n_;
  Exponent beta_;
  std::vector<double> aligned_;
  std::vector<double> shifted_;
  double delta_ = 0.0;
};

inline KernelValue ring_kernel(int n, double x, Phase phase, Exponent beta = {}) {
  return RingKernel(n, beta).eval(x, phase);
}

/// Averaged potential (1/n) sum_j |1 - x e^{i(2 pi j / n + theta)}|^-1.
inline double vn_direct(int n, double x, double theta) {
  if (n < 2) throw DomainError("vn_direct: n must be >= 2");
  if (!(x >= 0)) throw DomainError("vn_direct: x must be >= 0");
  const double u = 1.0 - x;
  CompensatedSum sum;
  for (int j = 1; j <= n; ++j) {
    const double a = std::remainder(2.0 * kPi * j / n + theta, 2.0 * kPi);
    const double s = std::sin(0.5 * a);
    const double den = u * u + 4.0 * x * s * s;
    if (den <= 0.0) throw SingularityError("vn_direct: point coincides with a vertex");
    sum += 1.0 / std::sqrt(den);
  }
  return sum.value() / n;
}

namespace detail {

// Integral representation of V_n, analytic in x for |x| < 1. After
// tau = sin^2(u) both endpoint singularities disappear.
inline double vn_integral_unchecked(int n, double x, double theta) {
  const double cn = std::cos(n * theta);
  auto integrand = [&](double u) {
    const double s = std::sin(u);
    const double tau = s * s;
    const double y = x * tau;
    const double yn = std::pow(y, n);
    const double y2n = yn * yn;
    const double r = (1.0 - y2n) / (1.0 + y2n - 2.0 * yn * cn);
    return r / std::sqrt(1.0 - x * x * tau);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, 0.5 * kPi, 20, 1e-14, &err);
  return 2.0 / kPi * value;
}

}  // namespace detail

inline double vn_integral(int n, double x, double theta) {
  if (n < 2) throw DomainError("vn_integral: n must be >= 2");
  if (!(x >= 0 && x < 1)) throw DomainError("vn_integral: x must lie in [0, 1)");
  return detail::vn_integral_unchecked(n, x, theta);
}

/// h_n = d/dx (x V_n) by a five-point central difference of the integral
/// representation. Independent cross-check of RingKernel; Newtonian only.
inline double h_from_potential(int n, double x, double theta) {
  if (n < 2) throw DomainError("h_from_potential: n must be >= 2");
  if (!(x >= 0 && x < 1)) throw DomainError("h_from_potential: x must lie in [0, 1)");
  const double step = std::min(1e-3, (1.0 - x) / 8.0);
  if (step < 1e-6) throw DomainError("h_from_potential: x too close to 1");
  auto g = [&](double t) { return t * detail::vn_integral_unchecked(n, t, theta); };
  return (-g(x + 2 * step) + 8 * g(x + step) - 8 * g(x - step) + g(x - 2 * step)) /
         (12.0 * step);
}

}  // namespace ringeq
