#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ringeq/cli/output.hpp"
#include "ringeq/cli/payload.hpp"
#include "ringeq/parallel.hpp"

namespace ringeq::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDomain = 2, kNoSolution = 3, kInternal = 4 };

/// Usage problems found after parsing (e.g. a missing --allow-long).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Reply {
  int code = kOk;
  Json doc;
};

namespace detail {

inline Json envelope(const std::string& command, const std::vector<std::string>& argv) {
  return {{"schema", kSchema}, {"version", kVersion}, {"command", command}, {"argv", argv}};
}

inline Reply no_solution(Json doc, const NoSolution& s) {
  doc["status"] = "no-solution";
  doc["reason"] = s.reason;
  doc["evidence"] = evidence_json(s);
  return {kNoSolution, std::move(doc)};
}

inline Reply no_solution(Json doc, const std::string& reason) {
  doc["status"] = "no-solution";
  doc["reason"] = reason;
  return {kNoSolution, std::move(doc)};
}

inline Reply solved(Json doc, const char* status, Json result) {
  doc["status"] = status;
  doc["result"] = std::move(result);
  return {kOk, std::move(doc)};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot read '" + path + "'");
  return Json::parse(f);
}

inline RingSystem read_config(const std::string& path) {
  const Json j = read_json_file(path);
  const int n = j.at("n").get<int>();
  const Exponent beta(j.value("beta", 0.5));
  std::vector<Ring> rings;
  for (const Json& r : j.at("rings"))
    rings.push_back({r.at("radius").get<double>(), parse_phase(r.value("phase", "aligned"))});
  return RingSystem(n, std::move(rings), beta);
}

struct MassFile {
  Masses masses;
  std::optional<double> M;
};

inline MassFile read_masses(const std::string& path) {
  const Json j = read_json_file(path);
  MassFile out;
  out.masses.m0 = j.value("m0", 0.0);
  out.masses.m = j.at("m").get<std::vector<double>>();
  if (j.contains("M")) out.M = j.at("M").get<double>();
  return out;
}

}  // namespace detail

// ------------------------------------------------------------------ commands

struct DeltaArgs {
  int n = 0;
  double beta = 0.5;
  std::string method = "both";
};

inline Reply cmd_delta(const DeltaArgs& a, Json doc) {
  const Exponent beta(a.beta);
  Json r = {{"n", a.n}, {"beta", a.beta}};
  const bool exact = a.method != "asymptotic";
  const bool asym = a.method != "exact";
  if (asym && !beta.is_newtonian())
    throw DomainError("delta: the asymptotic form is Newtonian only (beta = 0.5)");
  double e = 0.0, s = 0.0;
  if (exact) r["exact"] = e = delta_exact(a.n, beta);
  if (asym) r["asymptotic"] = s = delta_asymptotic(a.n);
  if (exact && asym) r["difference"] = s - e;
  const double v = exact ? e : s;
  r["sign"] = v > 0 ? "positive" : (v < 0 ? "negative" : "zero");
  return detail::solved(std::move(doc), "solved", std::move(r));
}

struct KernelArgs {
  int n = 0;
  double x = 0.0;
  std::string phase;
  double beta = 0.5;
};

inline Reply cmd_kernel(const KernelArgs& a, Json doc) {
  const RingKernel kern(a.n, Exponent(a.beta));
  const Phase p = parse_phase(a.phase);
  const KernelValue v = kern.eval(a.x, p);
  Json r = {{"n", a.n}, {"x", a.x}, {"phase", to_string(p)}, {"beta", a.beta},
            {"h", v.h}, {"k", v.k}, {"delta", kern.delta()}};
  return detail::solved(std::move(doc), "solved", std::move(r));
}

struct ShiftedPairArgs {
  int n = 0;
  std::string json_out;
  std::string csv_out;
};

inline Reply cmd_shifted_pair(const ShiftedPairArgs& a, Json doc) {
  const auto o = shifted_pair(a.n);
  if (!a.csv_out.empty()) {
    std::ofstream f = open_output(a.csv_out);
    SweepOptions so;
    so.kind = Case::ShiftedPair;
    write_csv(f, csv_columns(so), {sweep_row(a.n, so)});
  }
  Reply rep;
  if (const auto* ns = std::get_if<NoSolution>(&o)) {
    rep = detail::no_solution(std::move(doc), *ns);
  } else {
    const auto& s = std::get<ShiftedPairSolution>(o);
    rep = detail::solved(std::move(doc),
                         oracle_status(s.certificate.valid(), s.certificate.residual()),
                         shifted_pair_json(s));
  }
  if (!a.json_out.empty()) {
    std::ofstream f = open_output(a.json_out);
    write_json(f, rep.doc);
    f << '\n';
  }
  return rep;
}

struct NgonArgs {
  int n = 0;
  std::optional<double> m0, m2, m3;
  bool perverse = false;
  std::string mode = "heavier";
};

inline Reply cmd_ngon(const NgonArgs& a, Json doc) {
  const bool forward = a.m2.has_value() || a.m3.has_value() || a.m0.has_value();
  if (forward && a.perverse) throw UsageError("ngon-2ngon: --perverse excludes --m0/--m2/--m3");
  if (forward && !(a.m2 && a.m3)) throw UsageError("ngon-2ngon: --m2 and --m3 are both required");
  Outcome<Ngon2nSolution> o;
  if (forward) {
    Homothety h;
    if (a.mode == "heavier")
      h = Homothety::HeavierSubgon;
    else if (a.mode == "lighter")
      h = Homothety::LighterSubgon;
    else
      throw DomainError("ngon-2ngon: --mode must be heavier or lighter");
    o = ngon2n_equilibrium(a.n, a.m0.value_or(0.0), *a.m2, *a.m3, h);
  } else {
    o = ngon2n_perverse(a.n);
  }
  if (const auto* ns = std::get_if<NoSolution>(&o)) return detail::no_solution(std::move(doc), *ns);
  const auto& s = std::get<Ngon2nSolution>(o);
  const bool ok = forward || (s.certificate && s.certificate->valid());
  Json r = ngon2n_json(s);
  r["problem"] = forward ? "forward" : "perverse";
  return detail::solved(std::move(doc), oracle_status(ok, s.oracle_residual), std::move(r));
}

struct ThreeRingsArgs {
  int n = 0;
  bool trace = false;
  std::vector<double> seed;
};

inline Reply cmd_three_rings(const ThreeRingsArgs& a, Json doc) {
  const RingKernel kern(a.n);
  const std::vector<double> roots = three_rings_diagonal_roots(kern);
  Json r = {{"n", a.n}, {"roots", roots}};
  if (!a.trace) {
    if (roots.empty())
      return detail::no_solution(std::move(doc), "no sign change of the diagonal determinant");
    const auto checks = check_diagonal_roots(kern, roots);
    bool certified = false, positive = false;
    const double res = best_diagonal_residual(checks, &certified, &positive);
    r["diagonal"] = diagonal_json(checks);
    r["residual"] = number_or_null(res);
    if (!positive) {
      doc["result"] = std::move(r);
      return detail::no_solution(std::move(doc), "no diagonal root has positive masses");
    }
    return detail::solved(std::move(doc), oracle_status(certified, res), std::move(r));
  }
  CurvePoint seed;
  if (!a.seed.empty()) {
    seed = {a.seed[0], a.seed[1]};
  } else if (!roots.empty()) {
    seed = {roots.front(), std::sqrt(roots.front())};
  } else {
    return detail::no_solution(std::move(doc), "no diagonal root to seed the trace; pass --seed");
  }
  const ZeroCurve c = trace_zero_curve(kern, seed);
  const auto certs = certify_curve(kern, c);
  double worst = 0.0;
  const bool ok = curve_ok(c, certs, &worst);
  r["curve"] = curve_json(c, certs);
  r["residual"] = worst;
  return detail::solved(std::move(doc), oracle_status(ok, worst), std::move(r));
}

struct MultiRingsArgs {
  int k = 0;
  int n = 0;
  std::string pattern;
  std::optional<double> eps;
  std::optional<int> free;
  std::vector<double> base;
  std::vector<double> second;
  bool allow_long = false;
};

inline constexpr int kLongK = 10;

inline int default_free(NestingPattern p, int k) {
  switch (p) {
    case NestingPattern::Prepend: return k - 3;
    case NestingPattern::Scale: return 1;
    case NestingPattern::TwoSolutions: return 0;
    case NestingPattern::Geometric: return 0;
  }
  return 0;
}

inline Reply cmd_multi_rings(const MultiRingsArgs& a, Json doc) {
  if (a.k > kLongK && !a.allow_long)
    throw UsageError("multi-rings: k > " + std::to_string(kLongK) +
                     " is long-running; pass --allow-long");
  const NestingPattern pattern = parse_pattern(a.pattern);
  if (pattern == NestingPattern::Geometric) {
    const EpsilonFamily f = epsilon_family(a.n, a.k);
    if (f.roots.empty())
      return detail::no_solution(std::move(doc), "no singular member of the geometric family");
    Json r = epsilon_family_json(f);
    Json members = Json::array();
    bool any = false;
    double worst = 0.0;
    const RingKernel kern(a.n);
    for (double e : f.roots) {
      Json m = {{"eps", e}};
      try {
        const RingSystem sys = geometric_system(a.n, a.k, e);
        const double M = total_mass_for_compatibility(sys, kern);
        const MassLine line = solve_mass_line(sys, kern, M);
        m["M"] = M;
        m["positive"] = line.has_positive();
        if (line.perverse() && line.has_positive()) {
          const Certificate c = certify_mass_line(sys, line);
          m["certificate"] = certificate_json(c);
          if (c.valid()) {
            any = true;
            worst = std::max(worst, c.residual());
          }
        }
      } catch (const Error& ex) {
        m["error"] = ex.what();
      }
      members.push_back(std::move(m));
    }
    r["members"] = std::move(members);
    return detail::solved(std::move(doc), "solved", std::move(r));
  }
  std::vector<double> base;
  if (!a.base.empty()) {
    base = {a.base[0], a.base[1], 1.0};
  } else {
    const std::vector<double> roots = three_rings_diagonal_roots(a.n);
    if (roots.empty())
      return detail::no_solution(std::move(doc), "no three-ring solution to build on; pass --base");
    base = {roots.front(), std::sqrt(roots.front()), 1.0};
  }
  const double eps = a.eps.value_or(0.002);
  const int free = a.free.value_or(default_free(pattern, a.k));
  std::vector<double> second;
  if (!a.second.empty()) second = {a.second[0], a.second[1], 1.0};
  const HigherKSolution s = solve_higher_k(a.n, a.k, base, eps, pattern, free, second);
  Json r = higher_k_json(s);
  r["base"] = base;
  if (pattern == NestingPattern::TwoSolutions) r["second"] = second.empty() ? base : second;
  if (!s.masses.has_positive()) {
    doc["result"] = std::move(r);
    return detail::no_solution(std::move(doc), "positivity interval is empty");
  }
  const bool ok = s.certificate && s.certificate->valid();
  const double res = s.certificate ? s.certificate->residual() : INFINITY;
  return detail::solved(std::move(doc), oracle_status(ok, res), std::move(r));
}

struct VerifyArgs {
  std::string config;
  std::string masses;
  std::optional<double> T;
  int steps = 4096;
  std::string bodies_out;
};

inline constexpr double kDeviationTol = 1e-6;

inline Reply cmd_verify(const VerifyArgs& a, Json doc) {
  const RingSystem sys = detail::read_config(a.config);
  const RingKernel kern(sys.n(), sys.beta());
  Json r = {{"n", sys.n()}, {"beta", sys.beta().value()}, {"rings", rings_json(sys)}};
  const InteractionMatrix m = assemble(sys, kern);
  r["scaled_det"] = scaled_determinant(m);
  r["singular"] = is_singular(m);
  r["tolerance"] = singular_tolerance();
  Masses used;
  bool passed = true;
  if (!a.masses.empty()) {
    const detail::MassFile mf = detail::read_masses(a.masses);
    used = mf.masses;
    const BodyList b = realize(sys, used);
    const double res = residual(b);
    r["masses"] = masses_json(used);
    r["residual"] = res;
    r["total_mass"] = b.total_mass();
    if (mf.M) {
      r["mass_mismatch"] = std::abs(b.total_mass() - *mf.M);
      passed = std::abs(b.total_mass() - *mf.M) <= 1e-12 * *mf.M;
    }
    passed = passed && res <= kResidualTol;
  } else {
    if (!is_singular(m)) {
      doc["result"] = std::move(r);
      return detail::no_solution(std::move(doc), "configuration is not singular");
    }
    const double M = total_mass_for_compatibility(sys, kern);
    const MassLine line = solve_mass_line(sys, kern, M);
    r["mass_line"] = mass_line_json(line);
    if (!line.has_positive()) {
      doc["result"] = std::move(r);
      return detail::no_solution(std::move(doc), "positivity interval is empty");
    }
    const Certificate c = certify_mass_line(sys, line);
    r["certificate"] = certificate_json(c);
    r["residual"] = c.residual();
    used = c.masses_a;
    passed = c.valid();
  }
  const BodyList b = realize(sys, used);
  if (a.T) {
    Json ij = {{"T", *a.T}, {"steps", a.steps}};
    try {
      const IntegrationReport rep = integrate_check(b, *a.T, a.steps);
      ij["max_deviation"] = rep.max_deviation;
      ij["error_estimate"] = rep.error_estimate;
      ij["first_exceedance"] = rep.first_exceedance ? Json(*rep.first_exceedance) : Json(nullptr);
      ij["completed"] = rep.completed;
      passed = passed && rep.completed && rep.max_deviation < kDeviationTol;
    } catch (const CloseEncounterError& e) {
      ij["aborted"] = e.what();
      passed = false;
    }
    r["integration"] = std::move(ij);
  }
  if (!a.bodies_out.empty()) {
    std::ofstream f = open_output(a.bodies_out);
    write_json(f, body_list_json(b));
    f << '\n';
  }
  r["passed"] = passed;
  return detail::solved(std::move(doc), passed ? "solved" : "suspect", std::move(r));
}

struct BetaRootArgs {
  int n = 0;
};

inline Reply cmd_beta_root(const BetaRootArgs& a, Json doc) {
  const BetaRoot b = beta_root(a.n);
  return detail::solved(std::move(doc), "solved",
                        {{"n", b.n}, {"beta", b.beta}, {"delta_at_root", b.delta_at_root}});
}

struct BetaCriticalArgs {
  int n_max = 0;
};

inline Reply cmd_beta_critical(const BetaCriticalArgs& a, Json doc) {
  const BetaCritical c = beta_critical(a.n_max);
  Json ladder = Json::array();
  for (const BetaRoot& b : c.ladder) ladder.push_back({{"n", b.n}, {"beta", b.beta}});
  return detail::solved(std::move(doc), "solved",
                        {{"n_max", a.n_max},
                         {"beta_critical", c.value},
                         {"ladder", std::move(ladder)},
                         {"ladder_decreasing", c.ladder_decreasing()}});
}

struct SweepArgs {
  std::string kind;
  std::optional<int> n_min, n_max;
  std::vector<int> n_list;
  double beta = 0.5;
  int k = 5;
  bool trace = false;
  std::string out;
  std::string format = "csv";
  unsigned jobs = default_threads();
};

inline std::vector<int> sweep_values(const SweepArgs& a) {
  std::vector<int> ns = a.n_list;
  if (ns.empty()) {
    if (!a.n_min || !a.n_max) throw UsageError("sweep: give --n-min and --n-max, or --n-list");
    if (*a.n_min > *a.n_max) throw DomainError("sweep: --n-min must be <= --n-max");
    for (int n = *a.n_min; n <= *a.n_max; ++n) ns.push_back(n);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  return ns;
}

/// NDJSON on `out`: a header record, one row per n in ascending order,
/// then a summary with status counts.
inline int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& argv, bool timing,
                     std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  SweepOptions o;
  o.kind = parse_case(a.kind);
  o.beta = Exponent(a.beta);
  o.k = a.k;
  o.trace = a.trace;
  if (o.kind != Case::Delta && !o.beta.is_newtonian())
    throw DomainError("sweep: --beta applies to the delta case only");
  if (a.format != "csv" && a.format != "json") throw DomainError("sweep: --format must be csv or json");
  if (o.kind == Case::MultiRings && o.k > kLongK)
    throw UsageError("sweep: k > " + std::to_string(kLongK) + " is long-running");
  const std::vector<int> ns = sweep_values(a);
  std::vector<Json> rows(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) { rows[i] = sweep_row(ns[i], o); },
               std::max(1u, a.jobs));

  Json header = detail::envelope("sweep", argv);
  header["kind"] = "header";
  header["case"] = to_string(o.kind);
  header["count"] = ns.size();
  write_json(out, header);
  out << '\n';
  std::map<std::string, int> counts = {{"solved", 0}, {"suspect", 0}, {"no-solution", 0}, {"error", 0}};
  for (const Json& r : rows) {
    Json line = {{"schema", kSchema}, {"kind", "row"}, {"case", to_string(o.kind)}};
    for (auto it = r.begin(); it != r.end(); ++it) line[it.key()] = it.value();
    write_json(out, line);
    out << '\n';
    ++counts[r.at("status").get<std::string>()];
  }
  Json summary = {{"schema", kSchema}, {"kind", "summary"}, {"case", to_string(o.kind)}};
  summary["counts"] = counts;
  if (timing)
    summary["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out, summary);
  out << '\n';

  if (!a.out.empty()) {
    std::ofstream f = open_output(a.out);
    if (a.format == "csv") {
      write_csv(f, csv_columns(o), rows);
    } else {
      Json d = {{"schema", kSchema}, {"version", kVersion}, {"case", to_string(o.kind)}};
      d["rows"] = rows;
      write_json(f, d);
      f << '\n';
    }
  }
  return kOk;
}

// ----------------------------------------------------------------------- run

inline int code_for_current_exception(std::string& message) {
  try {
    throw;
  } catch (const UsageError& e) {
    message = e.what();
    return kUsage;
  } catch (const DomainError& e) {
    message = e.what();
    return kDomain;
  } catch (const PatternError& e) {
    message = e.what();
    return kDomain;
  } catch (const NotSingularError& e) {
    message = e.what();
    return kNoSolution;
  } catch (const NoRootError& e) {
    message = e.what();
    return kNoSolution;
  } catch (const NotPerverseError& e) {
    message = e.what();
    return kNoSolution;
  } catch (const NoPositiveMassError& e) {
    message = e.what();
    return kNoSolution;
  } catch (const Json::exception& e) {
    message = e.what();
    return kDomain;
  } catch (const std::exception& e) {
    message = e.what();
    return kInternal;
  } catch (...) {
    message = "unknown failure";
    return kInternal;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ring relative equilibria of the planar N-body problem", "ringeq"};
  app.require_subcommand(1);
  app.fallthrough();
  bool timing = false;
  app.add_flag("--timing", timing, "Add wall time to the output");
  app.set_version_flag("--version", kVersion);

  DeltaArgs delta;
  auto* s_delta = app.add_subcommand("delta", "delta_n exact and asymptotic");
  s_delta->add_option("--n", delta.n, "Polygon order")->required();
  s_delta->add_option("--beta", delta.beta, "Potential exponent");
  s_delta->add_option("--method", delta.method, "exact|asymptotic|both")
      ->check(CLI::IsMember({"exact", "asymptotic", "both"}));

  KernelArgs kernel;
  auto* s_kernel = app.add_subcommand("kernel", "h_n and k_n at one ratio and phase");
  s_kernel->add_option("--n", kernel.n)->required();
  s_kernel->add_option("--x", kernel.x, "Radius ratio")->required();
  s_kernel->add_option("--phase", kernel.phase, "aligned|shifted")->required();
  s_kernel->add_option("--beta", kernel.beta);

  ShiftedPairArgs sp;
  auto* s_sp = app.add_subcommand("shifted-pair", "Two shifted n-gons");
  s_sp->add_option("--n", sp.n)->required();
  s_sp->add_option("--json", sp.json_out, "Also write the document to FILE");
  s_sp->add_option("--csv", sp.csv_out, "Also write a CSV row to FILE");

  NgonArgs ng;
  auto* s_ng = app.add_subcommand("ngon-2ngon", "n-gon inside a 2n-gon");
  s_ng->add_option("--n", ng.n)->required();
  s_ng->add_option("--m0", ng.m0, "Central mass");
  s_ng->add_option("--m2", ng.m2, "Mass of one n-gon of the 2n-gon");
  s_ng->add_option("--m3", ng.m3, "Mass of the other n-gon of the 2n-gon");
  s_ng->add_flag("--perverse", ng.perverse, "Singular configuration with its mass line");
  s_ng->add_option("--mode", ng.mode, "heavier|lighter")
      ->check(CLI::IsMember({"heavier", "lighter"}));

  ThreeRingsArgs tr;
  auto* s_tr = app.add_subcommand("three-rings", "Three aligned n-gons");
  s_tr->add_option("--n", tr.n)->required();
  s_tr->add_flag("--trace", tr.trace, "Trace the closed zero curve");
  s_tr->add_option("--seed", tr.seed, "X1,X2")->delimiter(',')->expected(2);

  MultiRingsArgs mr;
  auto* s_mr = app.add_subcommand("multi-rings", "k > 3 nested n-gons");
  s_mr->add_option("--k", mr.k)->required();
  s_mr->add_option("--n", mr.n)->required();
  s_mr->add_option("--pattern", mr.pattern, "prepend|scale|two-solutions|geometric")
      ->required()
      ->check(CLI::IsMember({"prepend", "scale", "two-solutions", "geometric"}));
  s_mr->add_option("--eps", mr.eps, "Nesting ratio (default 0.002)");
  s_mr->add_option("--free", mr.free, "Index of the refined radius");
  s_mr->add_option("--base", mr.base, "X1,X2 of the three-ring solution")
      ->delimiter(',')
      ->expected(2);
  s_mr->add_option("--second", mr.second, "X1,X2 of the inner triple for two-solutions")
      ->delimiter(',')
      ->expected(2);
  s_mr->add_flag("--allow-long", mr.allow_long, "Permit k > 10");

  VerifyArgs vf;
  auto* s_vf = app.add_subcommand("verify", "Check a configuration with the force oracle");
  s_vf->add_option("--config", vf.config, "Ring configuration JSON")->required();
  s_vf->add_option("--masses", vf.masses, "Mass JSON");
  auto* o_T = s_vf->add_option("--integrate", vf.T, "Integrate to time T (<= 2 pi)");
  s_vf->add_option("--steps", vf.steps, "Fixed steps for --integrate")->needs(o_T);
  s_vf->add_option("--bodies-out", vf.bodies_out, "Write the body list to FILE");

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Run one case over a range of n");
  s_sw->add_option("--case", sw.kind, "delta|shifted-pair|ngon-2ngon|three-rings|multi-rings|beta")
      ->required()
      ->check(CLI::IsMember({"delta", "shifted-pair", "ngon-2ngon", "three-rings", "multi-rings",
                             "beta"}));
  s_sw->add_option("--n-min", sw.n_min);
  s_sw->add_option("--n-max", sw.n_max);
  s_sw->add_option("--n-list", sw.n_list, "Comma-separated n values")->delimiter(',');
  s_sw->add_option("--beta", sw.beta);
  s_sw->add_option("--k", sw.k, "Ring count for multi-rings (default 5)");
  s_sw->add_flag("--trace", sw.trace, "Trace curves for three-rings");
  s_sw->add_option("--out", sw.out, "Table file");
  s_sw->add_option("--format", sw.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  s_sw->add_option("--jobs", sw.jobs, "Worker threads");

  BetaRootArgs br;
  auto* s_br = app.add_subcommand("beta-root", "Exponent where delta_n vanishes");
  s_br->add_option("--n", br.n)->required();

  BetaCriticalArgs bc;
  auto* s_bc = app.add_subcommand("beta-critical", "Limit exponent as n grows");
  s_bc->add_option("--n-max", bc.n_max)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kUsage;
  }

  std::vector<std::string> echo;
  for (int i = 1; i < argc; ++i) echo.emplace_back(argv[i]);
  const auto start = std::chrono::steady_clock::now();
  std::string command = app.get_subcommands().front()->get_name();
  Json doc = detail::envelope(command, echo);
  Reply rep;
  try {
    if (s_sw->parsed()) return cmd_sweep(sw, echo, timing, out);
    if (s_delta->parsed()) rep = cmd_delta(delta, doc);
    else if (s_kernel->parsed()) rep = cmd_kernel(kernel, doc);
    else if (s_sp->parsed()) rep = cmd_shifted_pair(sp, doc);
    else if (s_ng->parsed()) rep = cmd_ngon(ng, doc);
    else if (s_tr->parsed()) rep = cmd_three_rings(tr, doc);
    else if (s_mr->parsed()) rep = cmd_multi_rings(mr, doc);
    else if (s_vf->parsed()) rep = cmd_verify(vf, doc);
    else if (s_br->parsed()) rep = cmd_beta_root(br, doc);
    else if (s_bc->parsed()) rep = cmd_beta_critical(bc, doc);
  } catch (...) {
    std::string message;
    rep.code = code_for_current_exception(message);
    err << "ringeq " << command << ": " << message << '\n';
    if (rep.code == kUsage) {
      err << app.get_subcommands().front()->help();
      return kUsage;
    }
    rep.doc = doc;
    rep.doc["status"] = rep.code == kNoSolution ? "no-solution" : "error";
    rep.doc["error"] = message;
  }
  if (timing)
    rep.doc["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out, rep.doc);
  out << '\n';
  return rep.code;
}

}  // namespace ringeq::cli
