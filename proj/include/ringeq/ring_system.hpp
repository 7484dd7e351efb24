#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ringeq/core.hpp"

namespace ringeq {

struct Ring {
  double radius = 1.0;
  Phase phase = Phase::Aligned;
};

/// k concentric regular n-gons, radii non-decreasing, outermost normalised
/// to radius 1 and phase Aligned.
class RingSystem {
 public:
  RingSystem(int n, std::vector<Ring> rings, Exponent beta = {})
      : n_(n), beta_(beta), rings_(std::move(rings)) {
    if (n_ < 2) throw DomainError("RingSystem: n must be >= 2");
    if (rings_.empty()) throw DomainError("RingSystem: at least one ring required");
    for (std::size_t j = 0; j < rings_.size(); ++j) {
      const Ring& r = rings_[j];
      if (!(std::isfinite(r.radius) && r.radius > 0))
        throw DomainError("RingSystem: radius must be finite and > 0");
      if (j > 0) {
        const Ring& p = rings_[j - 1];
        if (r.radius < p.radius)
          throw DomainError("RingSystem: radii must be non-decreasing");
        if (r.radius == p.radius && r.phase == p.phase)
          throw DomainError("RingSystem: two rings share radius and phase");
      }
    }
    for (std::size_t j = 0; j + 2 < rings_.size(); ++j)
      if (rings_[j].radius == rings_[j + 2].radius)
        throw DomainError("RingSystem: more than two rings share a radius");
    if (rings_.back().radius != 1.0 || rings_.back().phase != Phase::Aligned)
      throw DomainError("RingSystem: outermost ring must have radius 1 and phase aligned");
  }

  /// All-Aligned system from a list of radii.
  static RingSystem aligned(int n, const std::vector<double>& radii, Exponent beta = {}) {
    std::vector<Ring> r;
    r.reserve(radii.size());
    for (double x : radii) r.push_back({x, Phase::Aligned});
    return RingSystem(n, std::move(r), beta);
  }

  int n() const noexcept { return n_; }
  int k() const noexcept { return static_cast<int>(rings_.size()); }
  Exponent beta() const noexcept { return beta_; }
  const std::vector<Ring>& rings() const noexcept { return rings_; }
  const Ring& ring(int j) const { return rings_.at(j); }

  std::vector<double> radii() const {
    std::vector<double> r;
    r.reserve(rings_.size());
    for (const Ring& ring : rings_) r.push_back(ring.radius);
    return r;
  }

  /// Body count with or without the central mass.
  int bodies(bool with_center) const { return k() * n_ + (with_center ? 1 : 0); }

 private:
  int n_;
  Exponent beta_;
  std::vector<Ring> rings_;
};

/// Per-vertex ring masses plus the central mass.
struct Masses {
  double m0 = 0.0;
  std::vector<double> m;

  double total(int n) const {
    CompensatedSum s;
    s += m0;
    for (double v : m) s += n * v;
    return s.value();
  }
};

}  // namespace ringeq
