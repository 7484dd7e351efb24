#pragma once

// Shared vocabulary: error types, phase classes, potential exponent and
// compensated summation.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ringeq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point coincides with a body (zero distance).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A bracketing search found no sign change.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// Right-hand side cannot be brought into the column space.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

/// Compatibility was requested for a matrix that is not singular.
class NotSingularError : public IncompatibleError {
 public:
  using IncompatibleError::IncompatibleError;
};

class NotPerverseError : public Error {
 public:
  using Error::Error;
};

class NoPositiveMassError : public Error {
 public:
  using Error::Error;
};

class PatternError : public Error {
 public:
  using Error::Error;
};

class RefineError : public Error {
 public:
  using Error::Error;
};

class CloseEncounterError : public Error {
 public:
  using Error::Error;
};

/// Curve tracing could not start (seed off the zero set) or its step collapsed.
class TraceError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kEulerGamma = 0.577215664901532860606512090082;
inline constexpr double kPi = std::numbers::pi;

/// Relative angular placement of a ring: theta = 0 or pi/n (mod 2 pi/n).
enum class Phase { Aligned, Shifted };

/// Phase class of theta_s - theta_j. Shifted-minus-Shifted is Aligned and
/// -pi/n is congruent to pi/n.
constexpr Phase phase_difference(Phase s, Phase j) noexcept {
  return (s == j) ? Phase::Aligned : Phase::Shifted;
}

/// sin(pi * num / den) with the argument folded into [0, pi/2] first.
inline double sin_pi_ratio(long long num, long long den) {
  num %= 2 * den;
  if (num < 0) num += 2 * den;
  const double sign = num > den ? -1.0 : 1.0;
  if (num > den) num -= den;
  if (2 * num > den) num = den - num;
  return sign * std::sin(kPi * static_cast<double>(num) / static_cast<double>(den));
}

inline double cos_pi_ratio(long long num, long long den) {
  return sin_pi_ratio(2 * num + den, 2 * den);
}

inline double phase_angle(int n, Phase p) noexcept {
  return p == Phase::Shifted ? kPi / n : 0.0;
}

/// Reduce theta mod 2 pi/n; must land on 0 or pi/n within 1e-12.
inline Phase classify_angle(int n, double theta) {
  if (n < 2) throw DomainError("classify_angle: n must be >= 2");
  const double period = 2.0 * kPi / n;
  double r = std::fmod(theta, period);
  if (r < 0) r += period;
  if (r < 1e-12 || period - r < 1e-12) return Phase::Aligned;
  if (std::abs(r - 0.5 * period) < 1e-12) return Phase::Shifted;
  throw DomainError("angle " + std::to_string(theta) +
                    " is neither aligned nor shifted for n=" +
                    std::to_string(n));
}

inline const char* to_string(Phase p) noexcept {
  return p == Phase::Aligned ? "aligned" : "shifted";
}

inline Phase parse_phase(const std::string& s) {
  if (s == "aligned") return Phase::Aligned;
  if (s == "shifted") return Phase::Shifted;
  throw DomainError("unknown phase '" + s + "' (expected aligned|shifted)");
}

/// Exponent of the pair potential r^(-2 beta). Newtonian gravity is 1/2.
class Exponent {
 public:
  constexpr Exponent() = default;
  explicit Exponent(double beta) : beta_(beta) {
    if (!std::isfinite(beta) || beta <= 0)
      throw DomainError("exponent beta must be finite and > 0");
  }
  static constexpr Exponent newtonian() { return Exponent(); }

  constexpr double value() const noexcept { return beta_; }
  constexpr bool is_newtonian() const noexcept { return beta_ == 0.5; }
  /// Power of the distance in the force denominator: |d|^(2 beta + 2).
  constexpr double force_power() const noexcept { return 2.0 * beta_ + 2.0; }

  friend constexpr bool operator==(Exponent, Exponent) = default;

 private:
  double beta_ = 0.5;
};

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(std::complex<double> v) noexcept {
    re_.add(v.real());
    im_.add(v.imag());
  }
  std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_, im_;
};

/// Singularity tolerance for |det A| <= tol * ||A||_inf^k; RING_EQ_TOL
/// overrides the default.
inline double singular_tolerance() {
  if (const char* env = std::getenv("RING_EQ_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && std::isfinite(v) && v > 0) return v;
  }
  return 1e-10;
}

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ringeq
