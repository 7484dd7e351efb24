// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance [--criterion N]      run one criterion (default: all)
//   acceptance --emit-bodies FILE   write certified and perturbed body lists
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ringeq/cli/payload.hpp"
#include "ringeq/ringeq.hpp"

using namespace ringeq;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

template <class T>
const T* solution(const Outcome<T>& o) {
  return std::get_if<T>(&o);
}

// ------------------------------------------------------------------ criteria

void c1(Verdict& v) {
  const double d472 = delta_exact(472), d473 = delta_exact(473);
  const double z = delta_zero_crossing();
  v.detail << "delta(472)=" << num(d472) << " delta(473)=" << num(d473) << " zero=" << num(z, 12);
  v.check(d472 < 0 && 0 < d473, "sign change between 472 and 473");
  v.check(std::abs(z - 472.270995) <= 1e-4, "zero crossing 472.270995 +- 1e-4");
}

void c2(Verdict& v) {
  double far = 0.0, near = 0.0;
  for (int n = 9; n <= 2000; ++n) far = std::max(far, std::abs(delta_asymptotic(n) - delta_exact(n)));
  for (int n = 2; n <= 8; ++n) near = std::max(near, std::abs(delta_asymptotic(n) - delta_exact(n)));
  v.detail << "max err n>=9 " << num(far, 3) << ", n<=8 " << num(near, 3);
  v.check(far < 1e-12, "n in [9,2000] below 1e-12");
  v.check(near < 1.5e-6, "n in [2,8] below 1.5e-6");
}

void c3(Verdict& v) {
  int k_flip = -1, kd_flip = -1;
  bool k_ok = true, kd_ok = true;
  for (int n = 2; n <= 600; ++n) {
    const RingKernel kern(n);
    const double ks = kern.k(1.0, Phase::Shifted);
    k_ok = k_ok && ((ks < 0) == (n <= 118));
    kd_ok = kd_ok && ((ks + kern.delta() < 0) == (n <= 236));
    if (ks >= 0 && k_flip < 0) k_flip = n;
    if (ks + kern.delta() >= 0 && kd_flip < 0) kd_flip = n;
  }
  double i1 = 0.0;
  for (int n = 2; n <= 64; ++n) {
    const RingKernel a(n), b(2 * n);
    for (int i = 0; i <= 50; ++i) {
      const double x = 2.0 * i / 50;
      if (x == 1.0) continue;
      const double lhs = a.k(x, Phase::Aligned) + a.k(x, Phase::Shifted);
      const double rhs = 2.0 * b.k(x, Phase::Aligned);
      i1 = std::max(i1, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  double i2 = 0.0;
  for (int n = 2; n <= 512; ++n) {
    const double ks = RingKernel(n).k(1.0, Phase::Shifted);
    const double d = delta_exact(n), d2 = delta_exact(2 * n);
    i2 = std::max({i2, std::abs(ks + d - 2 * d2), std::abs(ks - d - 2 * (d2 - d))});
  }
  v.detail << "k>=0 from n=" << k_flip << ", k+delta>=0 from n=" << kd_flip << ", I1 " << num(i1, 3)
           << ", I2 " << num(i2, 3);
  v.check(k_ok, "k_n(1,pi/n) < 0 exactly for n <= 118");
  v.check(kd_ok, "k_n(1,pi/n) + delta_n < 0 exactly for n <= 236");
  v.check(i1 <= 1e-11, "I1 within 1e-11");
  v.check(i2 <= 1e-11, "I2 within 1e-11");
}

void c4(Verdict& v) {
  int first = -1, solved = 0, certified = 0, witnesses = 0;
  bool exact = true;
  double worst = 0.0, worst_m0 = 0.0;
  std::size_t bodies_237 = 0;
  for (int n = 230; n <= 480; ++n) {
    const auto o = shifted_pair(n);
    const auto* s = solution(o);
    exact = exact && ((s != nullptr) == (n >= 237));
    if (!s) continue;
    if (first < 0) first = n;
    ++solved;
    const Certificate& c = s->certificate;
    worst = std::max(worst, c.residual());
    if (c.valid() && c.distinct && c.masses_a.total(n) > 0) ++certified;
    if (n <= 472) {
      if (s->m0_zero_t && s->m0_zero_residual < kResidualTol) ++witnesses;
      worst_m0 = std::max(worst_m0, s->m0_zero_residual);
    }
    if (n == 237 && s->m0_zero_t) {
      Masses w = s->masses.masses(*s->m0_zero_t);
      w.m0 = 0.0;
      bodies_237 = realize(s->system(), w).size();
    }
  }
  v.detail << "solutions from n=" << first << " (" << solved << "), certified " << certified
           << ", worst residual " << num(worst, 3) << ", m0=0 witnesses " << witnesses
           << " (worst " << num(worst_m0, 3) << "), N at 237 = " << bodies_237;
  v.check(exact, "solutions exactly for n >= 237");
  v.check(certified == solved, "every solution certified");
  v.check(witnesses == 472 - 237 + 1, "m0=0 witness for 237..472");
  v.check(bodies_237 == 474, "474-body example at n=237");
}

void c5(Verdict& v) {
  double worst = 0.0;
  for (int n : {1100, 1500, 2000, 5000}) {
    const auto o = shifted_pair(n);
    const auto* s = solution(o);
    if (!s) {
      v.check(false, "solution at n=" + std::to_string(n));
      continue;
    }
    const double gap = 1.0 - s->x;
    const double rel = std::abs(gap - shifted_pair_asymptote(n)) / gap;
    worst = std::max(worst, rel);
    v.detail << " n=" << n << ":" << num(rel, 4);
  }
  v.detail << " worst " << num(worst, 4);
  v.check(worst < 1e-3, "relative asymptote error below 1e-3");
}

void c6(Verdict& v) {
  const auto a = shifted_pair(1164), b = shifted_pair(1165);
  const auto *sa = solution(a), *sb = solution(b);
  v.check(sa && sb, "solutions at 1164 and 1165");
  if (!sa || !sb) return;
  const bool ca = convex_union(1164, sa->x), cb = convex_union(1165, sb->x);
  v.detail << "convex(1164)=" << ca << " convex(1165)=" << cb;
  v.check(ca && !cb, "convex at 1164, not at 1165");
}

void c7(Verdict& v) {
  double rho472 = NAN, rho473 = NAN;
  for (int n : {237, 300, 400, 472, 473, 600, 1000}) {
    const auto o = ngon2n_perverse(n);
    const auto* s = solution(o);
    const bool ok = s && s->certificate && s->certificate->valid();
    v.check(ok, "certified solution at n=" + std::to_string(n));
    if (s && n == 472) rho472 = s->rho;
    if (s && n == 473) rho473 = s->rho;
    if (s && s->certificate) v.detail << " " << n << ":" << num(s->certificate->residual(), 2);
  }
  for (int n : {100, 200, 236}) {
    const bool none = std::holds_alternative<NoSolution>(ngon2n_perverse(n));
    v.check(none, "no solution at n=" + std::to_string(n));
  }
  v.detail << " rho(472)=" << num(rho472) << " rho(473)=" << num(rho473);
  v.check(rho472 < 0.5 && 0.5 < rho473, "rho jumps across 0.5 between 472 and 473");
}

void c8(Verdict& v) {
  int lo = -1, hi = -1;
  bool exact = true;
  for (int n = 440; n <= 880; ++n) {
    const bool has = !three_rings_diagonal_roots(n).empty();
    exact = exact && (has == (n >= 456 && n <= 874));
    if (has && lo < 0) lo = n;
    if (has) hi = n;
  }
  v.detail << "roots for " << lo << ".." << hi;
  v.check(exact, "diagonal roots exactly for 456..874");

  bool signs = true;
  for (int n = 456; n <= 874; ++n) {
    const RingKernel kern(n);
    const double x = n <= 472 ? 0.098 : 0.97;
    const double d = three_ring_scaled_det(kern, x, std::sqrt(x));
    signs = signs && (n <= 472 ? d > 0 : d < 0);
  }
  v.check(signs, "determinant sign spot-checks");

  for (int n : {456, 500, 700, 874}) {
    const RingKernel kern(n);
    const std::vector<double> roots = three_rings_diagonal_roots(kern);
    if (roots.empty()) {
      v.check(false, "seed at n=" + std::to_string(n));
      continue;
    }
    const ZeroCurve c = trace_zero_curve(kern, {roots.front(), std::sqrt(roots.front())});
    const auto certs = certify_curve(kern, c);
    int valid = 0;
    for (const auto& [i, cert] : certs) valid += cert.valid() ? 1 : 0;
    const bool per_arc = n >= 473 && n <= 609;
    const bool certified =
        per_arc ? !certs.empty() && valid == static_cast<int>(certs.size())
                : c.fully_positive() && valid >= 1;
    v.detail << " n=" << n << ":" << (c.closed ? "closed" : "open") << ","
             << (c.symmetric() ? "sym" : "asym") << "," << valid << "/" << certs.size();
    const std::string tag = " at n=" + std::to_string(n);
    v.check(c.closed, "closed curve" + tag);
    v.check(c.symmetric(), "reflection symmetry" + tag);
    v.check(certified, "certified positive point" + tag);
  }
}

void c9(Verdict& v) {
  const std::vector<double> roots = three_rings_diagonal_roots(500);
  if (roots.empty()) {
    v.check(false, "k=3 seed at n=500");
    return;
  }
  const std::vector<double> base = {roots.front(), std::sqrt(roots.front()), 1.0};
  const HigherKSolution s = solve_higher_k(500, 4, base, 0.002, NestingPattern::Prepend, 1);
  const bool k4 = s.certificate && s.certificate->valid();
  v.detail << "k=4 residual " << (s.certificate ? num(s.certificate->residual(), 3) : "none");
  v.check(k4, "k=4 refinement certifies");
  const EpsilonFamily a = epsilon_family(451, 5), b = epsilon_family(1265, 5);
  v.detail << ", eps(451)=" << (a.center ? num(*a.center) : "none")
           << ", eps(1265)=" << (b.center ? num(*b.center) : "none");
  v.check(a.center && std::abs(*a.center - 0.314) <= 1e-2, "eps ~ 0.314 at n=451");
  v.check(b.center && std::abs(*b.center - 0.9873) <= 1e-2, "eps ~ 0.9873 at n=1265");
}

void c10(Verdict& v) {
  const BetaRoot r = beta_root(7);
  const BetaCritical c = beta_critical(100000);
  v.detail << "beta(7)=" << num(r.beta, 8) << " beta_crit=" << num(c.value, 8) << " ladder";
  for (const BetaRoot& b : c.ladder) v.detail << " " << num(b.beta, 5);
  v.check(std::abs(r.beta - 6.85879) <= 1e-3, "beta_root(7)");
  v.check(std::abs(c.value - 0.395) <= 0.005, "beta_critical");
  v.check(c.ladder_decreasing(), "ladder strictly decreasing");
}

// ---------------------------------------------------------------- oracle suite

struct Certified {
  std::string name;
  RingSystem sys;
  Certificate cert;
};

std::vector<Certified> certified_solutions() {
  std::vector<Certified> out;
  for (int n : {237, 472}) {
    const auto o = shifted_pair(n);
    if (const auto* s = solution(o); s && s->certificate.valid())
      out.push_back({"shifted-pair " + std::to_string(n), s->system(), s->certificate});
  }
  for (int n : {300, 473}) {
    const auto o = ngon2n_perverse(n);
    if (const auto* s = solution(o); s && s->certificate && s->certificate->valid())
      out.push_back({"ngon-2ngon " + std::to_string(n), s->system(), *s->certificate});
  }
  {
    const RingKernel kern(500);
    const auto roots = three_rings_diagonal_roots(kern);
    const ZeroCurve c = trace_zero_curve(kern, {roots.front(), std::sqrt(roots.front())});
    for (const auto& [i, cert] : certify_curve(kern, c)) {
      if (!cert.valid()) continue;
      const CurvePoint q = polish_curve_point(kern, c.points[i]);
      out.push_back({"three-rings 500", RingSystem::aligned(500, {q.x1, q.x2, 1.0}), cert});
      break;
    }
    const std::vector<double> base = {roots.front(), std::sqrt(roots.front()), 1.0};
    const HigherKSolution s = solve_higher_k(500, 4, base, 0.002, NestingPattern::Prepend, 1);
    if (s.certificate && s.certificate->valid())
      out.push_back({"multi-rings k=4 500", RingSystem::aligned(500, s.radii), *s.certificate});
  }
  {
    const auto roots = three_rings_diagonal_roots(600);
    const std::vector<double> base = {roots.front(), std::sqrt(roots.front()), 1.0};
    const HigherKSolution s =
        solve_higher_k(600, 6, base, 0.002, NestingPattern::TwoSolutions, 0);
    if (s.certificate && s.certificate->valid())
      out.push_back({"two-solutions k=6 600", RingSystem::aligned(600, s.radii), *s.certificate});
  }
  {
    const EpsilonFamily f = epsilon_family(451, 5);
    if (!f.roots.empty()) {
      const RingSystem sys = geometric_system(451, 5, f.roots.front());
      const Certificate c = perverse_certificate(sys, total_mass_for_compatibility(sys));
      if (c.valid()) out.push_back({"geometric k=5 451", sys, c});
    }
  }
  return out;
}

/// Outermost ring masses scaled by 1.01.
Masses perturbed(const Masses& m) {
  Masses p = m;
  p.m.back() *= 1.01;
  return p;
}

constexpr double kQuarterTurn = kPi / 4;
constexpr int kSteps = 4096;

IntegrationReport integrate_until(const BodyList& b, double stop) {
  IntegrateOptions opt;
  opt.stop_deviation = stop;
  return integrate_check(b, kQuarterTurn, kSteps, opt);
}

void c11(Verdict& v) {
  const std::vector<Certified> sols = certified_solutions();
  v.check(sols.size() == 8, "all eight reference solutions certified");
  double worst = 0.0, weakest_perturbed = INFINITY;
  for (const Certified& s : sols) {
    for (const Masses* m : {&s.cert.masses_a, &s.cert.masses_b}) {
      const double r = residual(realize(s.sys, *m));
      worst = std::max(worst, r);
      v.check(r < kResidualTol, "oracle residual of " + s.name);
      const double p = residual(realize(s.sys, perturbed(*m)));
      weakest_perturbed = std::min(weakest_perturbed, p);
      v.check(p > kResidualTol, "perturbed residual of " + s.name);
    }
  }
  v.detail << sols.size() << " solutions, worst residual " << num(worst, 3)
           << ", smallest perturbed residual " << num(weakest_perturbed, 3);

  // Runs stop shortly after the bound is crossed.
  int stable = 0;
  for (const Certified& s : sols) {
    v.detail << "; " << s.name;
    bool ok = false;
    try {
      const IntegrationReport r = integrate_until(realize(s.sys, s.cert.masses_a), 1e-5);
      ok = r.completed && r.max_deviation < 1e-6;
      v.detail << " dev " << num(r.max_deviation, 3);
      if (r.first_exceedance) v.detail << " from t=" << num(*r.first_exceedance, 3);
    } catch (const CloseEncounterError&) {
      v.detail << " close encounter";
    }
    stable += ok ? 1 : 0;
    v.check(ok, "integration of " + s.name + " within 1e-6 over pi/4");
  }
  const Certified& sp = sols.front();
  const IntegrationReport bad = integrate_until(realize(sp.sys, perturbed(sp.cert.masses_a)), 1e-5);
  v.detail << "; stable " << stable << "/" << sols.size() << ", perturbed " << sp.name << " dev "
           << num(bad.max_deviation, 3);
  v.check(bad.max_deviation > 1e-6, "perturbed integration deviates");
}

// ------------------------------------------------------------------- driver

struct Criterion {
  const char* name;
  double budget_s;
  std::function<void(Verdict&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"delta thresholds", 1, c1},
      {"asymptotic delta", 5, c2},
      {"kernel sign table and identities", 10, c3},
      {"shifted pair sweep", 120, c4},
      {"shifted pair asymptote", 60, c5},
      {"convexity threshold", 30, c6},
      {"n-gon/2n-gon", 60, c7},
      {"three rings", 600, c8},
      {"higher k", 600, c9},
      {"generalized potentials", 120, c10},
      {"oracle suite", INFINITY, c11},
  };
  return list;
}

bool run_criterion(int id) {
  const Criterion& c = criteria().at(id - 1);
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (std::isfinite(c.budget_s)) v.check(t <= c.budget_s, "runtime budget " + num(c.budget_s) + " s");
  std::printf("criterion %2d %s  %s: %s (%.2f s)\n", id, v.pass ? "PASS" : "FAIL", c.name,
              v.detail.str().c_str(), t);
  std::fflush(stdout);
  return v.pass;
}

int emit_bodies(const std::string& path) {
  cli::Json cases = cli::Json::array();
  for (const Certified& s : certified_solutions()) {
    cases.push_back({{"name", s.name},
                     {"certified", cli::body_list_json(realize(s.sys, s.cert.masses_a))},
                     {"perturbed", cli::body_list_json(realize(s.sys, perturbed(s.cert.masses_a)))}});
  }
  std::ofstream f(path);
  if (!f) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    return 1;
  }
  cli::write_json(f, {{"schema", cli::kSchema}, {"kind", "oracle-cases"}, {"cases", cases}});
  f << '\n';
  std::printf("wrote %zu cases to %s\n", cases.size(), path.c_str());
  return cases.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) {
      ids.push_back(std::atoi(argv[++i]));
    } else if (!std::strcmp(argv[i], "--emit-bodies") && i + 1 < argc) {
      return emit_bodies(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--emit-bodies FILE]\n", argv[0]);
      return 2;
    }
  }
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) ids.push_back(i);
  bool ok = true;
  for (int id : ids) {
    if (id < 1 || id > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 2;
    }
    ok = run_criterion(id) && ok;
  }
  return ok ? 0 : 1;
}
