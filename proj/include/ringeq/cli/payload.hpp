#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ringeq/cli/output.hpp"
#include "ringeq/solve.hpp"

namespace ringeq::cli {

inline Json rings_json(const RingSystem& s) {
  Json a = Json::array();
  for (const Ring& r : s.rings()) a.push_back({{"radius", r.radius}, {"phase", to_string(r.phase)}});
  return a;
}

inline Json masses_json(const Masses& m) { return {{"m0", m.m0}, {"m", m.m}}; }

inline Json interval_json(const Interval& r) {
  return {{"lo", number_or_null(r.lo)},
          {"hi", number_or_null(r.hi)},
          {"lo_closed", r.lo_closed},
          {"hi_closed", r.hi_closed},
          {"empty", r.empty()}};
}

inline Json mass_line_json(const MassLine& l) {
  return {{"M", l.M},
          {"rank_defect", l.rank_defect},
          {"particular", l.particular},
          {"direction", l.direction},
          {"m0_particular", l.m0_particular},
          {"m0_direction", l.m0_direction},
          {"t_range", interval_json(l.t_range)},
          {"consistency", l.consistency}};
}

inline Json certificate_json(const Certificate& c) {
  return {{"valid", c.valid()},
          {"residual", c.residual()},
          {"residual_a", c.residual_a},
          {"residual_b", c.residual_b},
          {"M", c.M},
          {"t_a", c.t_a},
          {"t_b", c.t_b},
          {"masses_a", masses_json(c.masses_a)},
          {"masses_b", masses_json(c.masses_b)},
          {"com_norm", c.com_norm},
          {"mass_mismatch", c.mass_mismatch},
          {"distinct", c.distinct}};
}

inline Json evidence_json(const NoSolution& s) {
  Json e = Json::object();
  for (const auto& [k, v] : s.evidence) e[k] = number_or_null(v);
  return e;
}

inline Json body_list_json(const BodyList& b) {
  Json bodies = Json::array();
  for (std::size_t i = 0; i < b.size(); ++i)
    bodies.push_back({{"x", b.positions[i].real()}, {"y", b.positions[i].imag()}, {"m", b.masses[i]}});
  return {{"schema", kSchema},
          {"kind", "bodies"},
          {"beta", b.beta.value()},
          {"omega", b.omega},
          {"bodies", std::move(bodies)}};
}

/// solved when the oracle check passes, suspect otherwise.
inline const char* oracle_status(bool ok, double residual) {
  return ok && residual <= kResidualTol ? "solved" : "suspect";
}

// ------------------------------------------------------------- single queries

inline Json shifted_pair_json(const ShiftedPairSolution& s) {
  Json r;
  r["n"] = s.n;
  r["x"] = s.x;
  r["one_minus_x"] = 1.0 - s.x;
  r["asymptote"] = s.n > 237 ? Json(shifted_pair_asymptote(s.n)) : Json(nullptr);
  r["f_at_root"] = s.f_at_root;
  r["root_count"] = s.root_count;
  r["M"] = s.M;
  r["convex"] = s.convex;
  r["bodies"] = s.system().bodies(false);
  r["rings"] = rings_json(s.system());
  r["mass_line"] = mass_line_json(s.masses);
  r["certificate"] = certificate_json(s.certificate);
  if (s.m0_zero_t) {
    r["m0_zero"] = {{"t", *s.m0_zero_t},
                    {"masses", masses_json(s.masses.masses(*s.m0_zero_t))},
                    {"residual", s.m0_zero_residual}};
  } else {
    r["m0_zero"] = nullptr;
  }
  return r;
}

inline Json ngon2n_json(const Ngon2nSolution& s) {
  Json r;
  r["n"] = s.n;
  r["mode"] = to_string(s.mode);
  r["rho"] = s.rho;
  r["alpha"] = number_or_null(s.alpha);
  r["f_at_root"] = s.f_at_root;
  r["root_count"] = s.root_count;
  r["M"] = s.M;
  r["m0"] = s.m0;
  r["m1"] = s.m1;
  r["m2"] = s.m2;
  r["m3"] = s.m3;
  r["system_residual"] = s.system_residual;
  r["oracle_residual"] = number_or_null(s.oracle_residual);
  r["rings"] = rings_json(s.system());
  r["masses"] = masses_json(s.masses());
  r["mass_line"] = s.line ? mass_line_json(*s.line) : Json(nullptr);
  r["certificate"] = s.certificate ? certificate_json(*s.certificate) : Json(nullptr);
  return r;
}

inline Json curve_json(const ZeroCurve& c, const std::vector<std::pair<int, Certificate>>& certs) {
  Json r;
  r["seed"] = {c.seed.x1, c.seed.x2};
  r["closed"] = c.closed;
  r["symmetric"] = c.symmetric();
  r["symmetry_error"] = c.symmetry_error;
  r["symmetry_tolerance"] = c.symmetry_tolerance;
  r["length"] = c.length;
  r["scale"] = c.scale;
  r["max_scaled_det"] = c.max_scaled_det;
  r["all_singular"] = c.all_singular;
  r["fully_positive"] = c.fully_positive();
  Json arcs = Json::array();
  for (const auto& [a, b] : c.positive_arcs) arcs.push_back({a, b});
  r["positive_arcs"] = std::move(arcs);
  double x1lo = INFINITY, x1hi = -INFINITY, x2lo = INFINITY, x2hi = -INFINITY;
  Json pts = Json::array();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const CurvePoint& p = c.points[i];
    x1lo = std::min(x1lo, p.x1);
    x1hi = std::max(x1hi, p.x1);
    x2lo = std::min(x2lo, p.x2);
    x2hi = std::max(x2hi, p.x2);
    pts.push_back({p.x1, p.x2, i < c.positive.size() && c.positive[i]});
  }
  r["bbox"] = {{"x1_min", x1lo}, {"x1_max", x1hi}, {"x2_min", x2lo}, {"x2_max", x2hi}};
  r["point_count"] = c.points.size();
  r["points"] = std::move(pts);
  Json cj = Json::array();
  for (const auto& [i, cert] : certs) {
    Json e = certificate_json(cert);
    e["index"] = i;
    e["x1"] = c.points[i].x1;
    e["x2"] = c.points[i].x2;
    cj.push_back(std::move(e));
  }
  r["certificates"] = std::move(cj);
  return r;
}

inline bool curve_ok(const ZeroCurve& c, const std::vector<std::pair<int, Certificate>>& certs,
                     double* worst = nullptr) {
  bool ok = c.closed && c.symmetric() && !certs.empty();
  double w = 0.0;
  for (const auto& [i, cert] : certs) {
    ok = ok && cert.valid();
    w = std::max(w, cert.residual());
  }
  if (worst) *worst = w;
  return ok;
}

/// Mass line and certificate at each diagonal root (x, sqrt x).
struct DiagonalCheck {
  double x = 0.0;
  bool positive = false;
  std::optional<Certificate> certificate;
};

inline std::vector<DiagonalCheck> check_diagonal_roots(const RingKernel& kern,
                                                       const std::vector<double>& roots) {
  std::vector<DiagonalCheck> out;
  for (double x : roots) {
    DiagonalCheck d;
    d.x = x;
    const RingSystem sys = RingSystem::aligned(kern.n(), {x, std::sqrt(x), 1.0});
    const MassLine line = solve_mass_line(sys, kern, total_mass_for_compatibility(sys, kern));
    d.positive = line.perverse() && line.has_positive();
    if (d.positive) d.certificate = certify_mass_line(sys, line);
    out.push_back(std::move(d));
  }
  return out;
}

/// Best certified residual over the checks; infinity when none certifies.
inline double best_diagonal_residual(const std::vector<DiagonalCheck>& checks, bool* certified,
                                     bool* positive) {
  double best = INFINITY, any = INFINITY;
  *positive = false;
  for (const DiagonalCheck& d : checks) {
    *positive = *positive || d.positive;
    if (!d.certificate) continue;
    any = std::min(any, d.certificate->residual());
    if (d.certificate->valid()) best = std::min(best, d.certificate->residual());
  }
  *certified = std::isfinite(best);
  return *certified ? best : any;
}

inline Json diagonal_json(const std::vector<DiagonalCheck>& checks) {
  Json a = Json::array();
  for (const DiagonalCheck& d : checks)
    a.push_back({{"x1", d.x},
                 {"x2", std::sqrt(d.x)},
                 {"positive", d.positive},
                 {"certificate", d.certificate ? certificate_json(*d.certificate) : Json(nullptr)}});
  return a;
}

inline Json higher_k_json(const HigherKSolution& s) {
  Json r;
  r["n"] = s.n;
  r["k"] = s.k;
  r["pattern"] = to_string(s.pattern);
  r["eps"] = s.eps;
  r["free"] = s.free;
  r["radii"] = s.radii;
  r["det"] = s.det;
  r["det_scale"] = s.det_scale;
  r["continued"] = s.continued;
  r["detune"] = s.detune;
  r["M"] = s.M;
  r["mass_line"] = mass_line_json(s.masses);
  r["certificate"] = s.certificate ? certificate_json(*s.certificate) : Json(nullptr);
  return r;
}

inline Json epsilon_family_json(const EpsilonFamily& f) {
  Json r;
  r["n"] = f.n;
  r["k"] = f.k;
  r["roots"] = f.roots;
  r["center"] = f.center ? Json(*f.center) : Json(nullptr);
  r["center_value"] = f.center ? Json(f.center_value) : Json(nullptr);
  return r;
}

// ------------------------------------------------------------------ sweep rows

enum class Case { Delta, ShiftedPair, Ngon2n, ThreeRings, MultiRings, Beta };

inline Case parse_case(const std::string& s) {
  static const std::map<std::string, Case> m = {
      {"delta", Case::Delta},           {"shifted-pair", Case::ShiftedPair},
      {"ngon-2ngon", Case::Ngon2n},     {"three-rings", Case::ThreeRings},
      {"multi-rings", Case::MultiRings}, {"beta", Case::Beta}};
  const auto it = m.find(s);
  if (it == m.end()) throw DomainError("unknown sweep case '" + s + "'");
  return it->second;
}

inline const char* to_string(Case c) {
  switch (c) {
    case Case::Delta: return "delta";
    case Case::ShiftedPair: return "shifted-pair";
    case Case::Ngon2n: return "ngon-2ngon";
    case Case::ThreeRings: return "three-rings";
    case Case::MultiRings: return "multi-rings";
    case Case::Beta: return "beta";
  }
  return "?";
}

struct SweepOptions {
  Case kind = Case::Delta;
  Exponent beta;
  int k = 5;
  bool trace = false;
};

inline std::vector<std::string> csv_columns(const SweepOptions& o) {
  switch (o.kind) {
    case Case::Delta: return {"n", "status", "beta", "exact", "asymptotic", "difference", "reason"};
    case Case::ShiftedPair:
      return {"n", "status", "x", "one_minus_x", "asymptote", "asymptote_rel_error", "M",
              "convex", "t_lo", "t_hi", "t_width", "m0_zero", "m0_zero_residual", "residual",
              "reason"};
    case Case::Ngon2n:
      return {"n", "status", "rho", "alpha", "M", "m0", "m1", "m2", "m3", "residual", "reason"};
    case Case::ThreeRings:
      if (o.trace)
        return {"n", "status", "root_count", "x_lo", "x_hi", "closed", "symmetric",
                "point_count", "fully_positive", "arcs", "certified", "x1_min", "x1_max",
                "x2_min", "x2_max", "residual", "reason"};
      return {"n", "status", "root_count", "x_lo", "x_hi", "positive", "residual", "reason"};
    case Case::MultiRings:
      return {"n", "status", "k", "root_count", "eps_lo", "eps_hi", "center", "reason"};
    case Case::Beta: return {"n", "status", "beta", "delta_at_root", "reason"};
  }
  return {};
}

namespace detail {

inline Json no_solution_row(int n, const NoSolution& s) {
  return {{"n", n}, {"status", "no-solution"}, {"reason", s.reason}};
}

inline Json delta_row(int n, Exponent beta) {
  const double exact = delta_exact(n, beta);
  Json r = {{"n", n}, {"status", "solved"}, {"beta", beta.value()}, {"exact", exact}};
  if (beta.is_newtonian()) {
    const double a = delta_asymptotic(n);
    r["asymptotic"] = a;
    r["difference"] = a - exact;
  }
  return r;
}

inline Json shifted_pair_row(int n) {
  const auto o = shifted_pair(n);
  if (const auto* ns = std::get_if<NoSolution>(&o)) return no_solution_row(n, *ns);
  const auto& s = std::get<ShiftedPairSolution>(o);
  const Certificate& c = s.certificate;
  Json r = {{"n", n}, {"status", oracle_status(c.valid(), c.residual())}};
  r["x"] = s.x;
  r["one_minus_x"] = 1.0 - s.x;
  if (n > 237) {
    const double a = shifted_pair_asymptote(n);
    r["asymptote"] = a;
    r["asymptote_rel_error"] = std::abs((1.0 - s.x) - a) / (1.0 - s.x);
  }
  r["M"] = s.M;
  r["convex"] = s.convex;
  r["t_lo"] = number_or_null(s.masses.t_range.lo);
  r["t_hi"] = number_or_null(s.masses.t_range.hi);
  r["t_width"] = number_or_null(s.masses.t_range.width());
  r["m0_zero"] = s.m0_zero_t.has_value();
  r["m0_zero_residual"] = number_or_null(s.m0_zero_residual);
  r["residual"] = c.residual();
  return r;
}

inline Json ngon2n_row(int n) {
  const auto o = ngon2n_perverse(n);
  if (const auto* ns = std::get_if<NoSolution>(&o)) return no_solution_row(n, *ns);
  const auto& s = std::get<Ngon2nSolution>(o);
  const bool ok = s.certificate && s.certificate->valid();
  Json r = {{"n", n}, {"status", oracle_status(ok, s.oracle_residual)}};
  r["rho"] = s.rho;
  r["alpha"] = number_or_null(s.alpha);
  r["M"] = s.M;
  r["m0"] = s.m0;
  r["m1"] = s.m1;
  r["m2"] = s.m2;
  r["m3"] = s.m3;
  r["residual"] = number_or_null(s.oracle_residual);
  return r;
}

inline Json three_rings_row(int n, bool trace) {
  const RingKernel kern(n);
  const std::vector<double> roots = three_rings_diagonal_roots(kern);
  if (roots.empty())
    return {{"n", n}, {"status", "no-solution"}, {"root_count", 0},
            {"reason", "no sign change of the diagonal determinant"}};
  Json r = {{"n", n}, {"status", "solved"}, {"root_count", roots.size()},
            {"x_lo", roots.front()}, {"x_hi", roots.back()}};
  if (!trace) {
    bool certified = false, positive = false;
    const double res = best_diagonal_residual(check_diagonal_roots(kern, roots), &certified, &positive);
    r["positive"] = positive;
    r["residual"] = number_or_null(res);
    if (!positive) {
      r["status"] = "no-solution";
      r["reason"] = "no diagonal root has positive masses";
    } else {
      r["status"] = oracle_status(certified, res);
    }
    return r;
  }
  const ZeroCurve c = trace_zero_curve(kern, {roots.front(), std::sqrt(roots.front())});
  const auto certs = certify_curve(kern, c);
  double worst = 0.0;
  const bool ok = curve_ok(c, certs, &worst);
  int certified = 0;
  for (const auto& [i, cert] : certs) certified += cert.valid() ? 1 : 0;
  r["status"] = oracle_status(ok, worst);
  r["closed"] = c.closed;
  r["symmetric"] = c.symmetric();
  r["point_count"] = c.points.size();
  r["fully_positive"] = c.fully_positive();
  r["arcs"] = c.positive_arcs.size();
  r["certified"] = certified;
  double x1lo = INFINITY, x1hi = -INFINITY, x2lo = INFINITY, x2hi = -INFINITY;
  for (const CurvePoint& p : c.points) {
    x1lo = std::min(x1lo, p.x1);
    x1hi = std::max(x1hi, p.x1);
    x2lo = std::min(x2lo, p.x2);
    x2hi = std::max(x2hi, p.x2);
  }
  r["x1_min"] = x1lo;
  r["x1_max"] = x1hi;
  r["x2_min"] = x2lo;
  r["x2_max"] = x2hi;
  r["residual"] = worst;
  return r;
}

inline Json multi_rings_row(int n, int k) {
  const EpsilonFamily f = epsilon_family(n, k);
  if (f.roots.empty())
    return {{"n", n}, {"status", "no-solution"}, {"k", k}, {"root_count", 0},
            {"reason", "no singular member of the geometric family"}};
  Json r = {{"n", n}, {"status", "solved"}, {"k", k}, {"root_count", f.roots.size()},
            {"eps_lo", f.roots.front()}, {"eps_hi", f.roots.back()}};
  r["center"] = f.center ? Json(*f.center) : Json(nullptr);
  return r;
}

inline Json beta_row(int n) {
  try {
    const BetaRoot b = beta_root(n);
    return {{"n", n}, {"status", "solved"}, {"beta", b.beta}, {"delta_at_root", b.delta_at_root}};
  } catch (const NoRootError& e) {
    return {{"n", n}, {"status", "no-solution"}, {"reason", e.what()}};
  }
}

}  // namespace detail

/// One sweep row; failures are recorded in the row, never thrown.
inline Json sweep_row(int n, const SweepOptions& o) {
  try {
    switch (o.kind) {
      case Case::Delta: return detail::delta_row(n, o.beta);
      case Case::ShiftedPair: return detail::shifted_pair_row(n);
      case Case::Ngon2n: return detail::ngon2n_row(n);
      case Case::ThreeRings: return detail::three_rings_row(n, o.trace);
      case Case::MultiRings: return detail::multi_rings_row(n, o.k);
      case Case::Beta: return detail::beta_row(n);
    }
  } catch (const std::exception& e) {
    return {{"n", n}, {"status", "error"}, {"reason", e.what()}};
  }
  return {{"n", n}, {"status", "error"}, {"reason", "unknown case"}};
}

}  // namespace ringeq::cli
