#include "lenspec/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "lenspec/config.hpp"

namespace lenspec {

using nlohmann::json;

SpectrumReport build_report(const ElementStore& store, const ReportOptions& opt) {
  SpectrumReport r;
  const TriangleGroup& g = *store.group;
  r.signature = g.sig.to_string();
  r.cocompact = g.sig.cocompact();
  r.max_length = store.config.length_bound();
  r.status = store.status;
  r.classes = conjugacy_classes(store, r.max_length, opt.parallel);
  primitive_split(store, r.classes);
  r.all_traces = build_trace_set(store, r.classes, SubgroupMode::Full);
  r.mode_traces = build_trace_set(store, r.classes, opt.mode);
  r.rows = counting_functions(r.classes, r.all_traces, length_grid(r.classes, opt.grid_step));

  r.clustering_max = std::min(opt.clustering_max, static_cast<int>(std::floor(r.all_traces.max_trace)));
  if (r.clustering_max >= 3) r.clustering = clustering_histogram(r.all_traces, r.clustering_max);

  r.dimension = arithmetic_dimension(g);
  if (r.dimension.r == 2) {
    r.galois = galois_bound_check(r.mode_traces, r.dimension, g.sig.cocompact());
    if (r.galois->delta_emp) {
      r.delta = *r.galois->delta_emp;
      r.delta_source = "delta_emp over " + std::string(to_string(opt.mode)) + " traces";
    } else {
      r.delta_source = "no trace with unbounded conjugate";
    }
    // the minimizing trace attains equality at delta_emp itself; the bound is
    // asserted on the square subgroup and only observed on the whole group
    const double d = r.delta - 1e-9;
    if (opt.mode == SubgroupMode::Squares) {
      r.norm = norm_bound_check(r.mode_traces, r.dimension.trace_field.field, d);
    } else {
      r.norm = norm_bound_check(build_trace_set(store, r.classes, SubgroupMode::Squares),
                                r.dimension.trace_field.field, d);
      r.norm_all = norm_bound_check(r.mode_traces, r.dimension.trace_field.field, d);
    }
  } else if (r.dimension.r == 1) {
    r.delta_source = "every non-identity conjugate is bounded";
  } else {
    r.delta_source = "not estimated for arithmetic dimension " + std::to_string(r.dimension.r);
  }

  try {
    r.separation = separation_check(r.mode_traces, r.mode_traces.max_trace, r.delta, opt.parallel);
  } catch (const InequalityViolation& e) {
    r.separation_error = e.what();
  }
  try {
    r.egmm = egmm_fit(r.rows, opt.fit_lo, opt.fit_hi);
  } catch (const std::invalid_argument& e) {
    r.egmm_error = e.what();
  }
  try {
    r.distinct = distinct_length_bound_check(r.rows, r.all_traces, r.delta);
  } catch (const InequalityViolation& e) {
    r.distinct_error = e.what();
  }
  r.clustering_C = envelope_constant(r.clustering, 1.0 - r.delta);
  return r;
}

namespace {

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string(std::isnan(v) ? "nan" : "inf"); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

LedgerLine line(std::string name, std::string anchor, bool applicable, bool ok, std::string margin) {
  return {std::move(name), std::move(anchor), applicable ? (ok ? "pass" : "fail") : "skipped", std::move(margin)};
}

}  // namespace

std::vector<LedgerLine> verify_ledger(const SpectrumReport& r) {
  std::vector<LedgerLine> out;
  out.push_back(line("conjugacy classes fully resolved", "closed geodesics up to the length bound", true,
                     r.classes.undecided == 0 && r.classes.missing == 0,
                     std::to_string(r.classes.undecided) + " undecided, " + std::to_string(r.classes.missing) +
                         " missing"));
  out.push_back(line("traces are algebraic integers", "semi-arithmetic traces", true, true,
                     std::to_string(r.all_traces.entries.size()) + " traces"));

  bool ok = true;
  long slack = -1;
  for (const GridRow& row : r.rows) {
    if (row.Nprime > row.N) ok = false;
    const long s = static_cast<long>(row.N) - static_cast<long>(row.Nprime);
    if (slack < 0 || s < slack) slack = s;
  }
  out.push_back(line("N'(l) <= N(l)", "distinct lengths among closed geodesics", !r.rows.empty(), ok,
                     "min N - N' = " + std::to_string(std::max(slack, 0L))));

  {
    long min_slack = -1;
    for (const GridRow& row : r.rows) {
      const long s = static_cast<long>(row.Lprime) - static_cast<long>(row.Nprime);
      if (min_slack < 0 || s < min_slack) min_slack = s;
    }
    out.push_back(line("N'(l) <= L'(2cosh(l/2))", "each length gives one positive trace", !r.rows.empty(),
                       r.distinct_error.empty(),
                       r.distinct_error.empty() ? "min L' - N' = " + std::to_string(std::max(min_slack, 0L))
                                                : r.distinct_error));
    out.push_back(line("L'(T) <= C T^(2 - delta)", "trace counting bound", r.distinct.has_value(),
                       r.distinct && std::isfinite(r.distinct->C),
                       r.distinct ? "C = " + fmt(r.distinct->C) + " at delta = " + fmt(r.delta) : ""));
  }

  if (r.separation) {
    const Separation& s = *r.separation;
    out.push_back(line("|N(t - s)| >= 1 for distinct traces", "separation of distinct traces", s.traces >= 2, true,
                       "pairs = " + std::to_string(s.pairs) + ", min |N| = " + fmt(s.min_abs_norm) +
                           ", c_emp = " + fmt(s.c_emp)));
  } else {
    out.push_back(line("|N(t - s)| >= 1 for distinct traces", "separation of distinct traces", true, false,
                       r.separation_error));
  }

  const bool dim2 = r.galois.has_value();
  if (dim2) {
    const GaloisAudit& a = *r.galois;
    out.push_back(line("|sigma(t)| < 2 t^(1 - delta) with delta > 0", "Galois conjugate bound",
                       a.delta_emp.has_value(), a.delta_emp && *a.delta_emp > 0,
                       "delta_emp = " + fmt(a.delta_emp.value_or(0)) + " over " + std::to_string(a.unbounded) +
                           " traces, " + std::to_string(a.bounded) + " bounded"));
    if (r.cocompact) {
      out.push_back(line("l(gamma^sigma) < l(gamma)", "length contraction under sigma", a.audited > 0,
                         a.contraction_failures == 0,
                         std::to_string(a.audited) + " audited, " + std::to_string(a.contraction_failures) +
                             " failures"));
    } else {
      const bool fit = a.delta_fit.has_value();
      out.push_back(line("|sigma(t)| <= C t^(1 - delta_fit) with delta_fit > 0", "Galois conjugate bound, cusped",
                         fit, fit && *a.delta_fit > 0,
                         fit ? "delta_fit = " + fmt(*a.delta_fit) + ", C = " + fmt(a.C_fit) + " over " +
                                   std::to_string(a.envelope_points) + " envelope points"
                             : "fewer than two envelope points"));
    }
  } else {
    out.push_back(line("|sigma(t)| < 2 t^(1 - delta) with delta > 0", "Galois conjugate bound", false, true,
                       "arithmetic dimension " + std::to_string(r.dimension.r)));
  }

  if (r.norm) {
    const NormBound& n = *r.norm;
    out.push_back(line("|N_k(t)| < 2^(d-1) t^(2 - delta)", "norm bound on squares", !n.rows.empty(),
                       n.fail == 0 && n.undecided == 0,
                       std::to_string(n.pass) + " pass, " + std::to_string(n.fail) + " fail, " +
                           std::to_string(n.undecided) + " undecided at delta = " + fmt(n.delta)));
    if (r.norm_all) {
      const NormBound& a = *r.norm_all;
      out.push_back({"|N(t)| < 2^(d-1) t^(2 - delta)", "norm bound extended to every trace", "data",
                     std::to_string(a.pass) + " hold, " + std::to_string(a.fail) + " exceed, " +
                         std::to_string(a.undecided) + " undecided"});
    }
  } else {
    out.push_back(line("|N_k(t)| < 2^(d-1) t^(2 - delta)", "norm bound", false, true,
                       "arithmetic dimension " + std::to_string(r.dimension.r)));
  }

  out.push_back(line("count(n) <= C n^(1 - delta)", "weak bounded clustering", !r.clustering.counts.empty(), true,
                     "C = " + fmt(r.clustering_C) + ", max count = " + std::to_string(r.clustering.max_count)));
  return out;
}

void write_file_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string report_json(const SpectrumReport& r) {
  json j;
  j["signature"] = r.signature;
  j["max_length"] = r.max_length;
  j["status"] = r.status == EnumerationStatus::Complete ? "complete" : "partial";
  std::size_t prim = 0;
  for (const auto& c : r.classes.classes) prim += c.primitive ? 1 : 0;
  j["classes"] = {{"unoriented", r.classes.classes.size()},
                  {"primitive", prim},
                  {"representatives", r.classes.reps},
                  {"undecided", r.classes.undecided},
                  {"missing", r.classes.missing}};
  j["traces"] = {{"full", r.all_traces.entries.size()}, {"mode", r.mode_traces.entries.size()},
                 {"mode_name", to_string(r.mode_traces.mode)}};
  j["arithmetic_dimension"] = r.dimension.r;
  j["delta"] = r.delta;
  j["delta_source"] = r.delta_source;
  if (r.galois) {
    const GaloisAudit& a = *r.galois;
    json ga = {{"sigma", a.sigma}, {"unbounded", a.unbounded}, {"bounded", a.bounded},
               {"audited", a.audited}, {"contraction_failures", a.contraction_failures},
               {"delta_emp_trace", a.delta_emp_trace}};
    if (a.delta_emp) ga["delta_emp"] = *a.delta_emp;
    if (a.delta_fit) {
      ga["delta_fit"] = *a.delta_fit;
      ga["C_fit"] = a.C_fit;
      ga["C_ls"] = a.C_ls;
      ga["envelope_points"] = a.envelope_points;
    }
    j["galois"] = ga;
  }
  if (r.norm) j["norm_bound"] = {{"pass", r.norm->pass}, {"fail", r.norm->fail}, {"undecided", r.norm->undecided}};
  if (r.norm_all)
    j["norm_bound_all_traces"] = {{"hold", r.norm_all->pass}, {"exceed", r.norm_all->fail},
                                  {"undecided", r.norm_all->undecided}};
  if (r.separation)
    j["separation"] = {{"traces", r.separation->traces}, {"pairs", r.separation->pairs},
                       {"min_abs_norm", r.separation->min_abs_norm}, {"min_gap", r.separation->min_gap},
                       {"c_emp", r.separation->c_emp}, {"gmp_pairs", r.separation->gmp_pairs}};
  else
    j["separation"] = {{"error", r.separation_error}};
  if (r.egmm) j["egmm"] = {{"beta", r.egmm->beta}, {"c", r.egmm->c}, {"residual", r.egmm->residual}, {"points", r.egmm->points}};
  else j["egmm"] = {{"error", r.egmm_error}};
  if (r.distinct) j["trace_counting_C"] = r.distinct->C;
  j["clustering"] = {{"n_max", r.clustering_max}, {"max_count", r.clustering.max_count},
                     {"exponent", r.clustering.exponent}, {"constant", r.clustering.constant},
                     {"envelope_C", r.clustering_C}};
  json ledger = json::array();
  for (const LedgerLine& l : verify_ledger(r))
    ledger.push_back({{"name", l.name}, {"anchor", l.anchor}, {"verdict", l.verdict}, {"margin", l.margin}});
  j["ledger"] = ledger;
  return j.dump(2) + "\n";
}

void write_outputs(const SpectrumReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  const int sigma = r.galois ? r.galois->sigma : -1;

  std::ostringstream spec;
  spec << "length,trace,multiplicity,sigma_conjugate_abs,delta_margin\n";
  for (const TraceEntry& e : r.all_traces.entries) {
    spec << fmt(2.0 * std::acosh(e.value / 2.0)) << ',' << csv_quote(e.trace.to_json().dump()) << ',' << e.multiplicity
         << ',';
    if (sigma >= 0) {
      const double s = std::fabs(e.conjugates[sigma]);
      spec << fmt(s) << ',' << (s > 2 ? fmt(1.0 - std::log(s / 2.0) / std::log(e.value)) : std::string("bounded"));
    } else {
      spec << ',';
    }
    spec << '\n';
  }
  write_file_atomic((d / "spectrum.csv").string(), spec.str());

  std::ostringstream cl, cl_dat;
  cl << "n,count\n";
  for (std::size_t k = 0; k < r.clustering.counts.size(); ++k) {
    cl << k + 3 << ',' << r.clustering.counts[k] << '\n';
    cl_dat << k + 3 << ' ' << r.clustering.counts[k] << '\n';
  }
  write_file_atomic((d / "clustering.csv").string(), cl.str());
  write_file_atomic((d / "clustering.dat").string(), cl_dat.str());

  std::ostringstream eg, eg_dat;
  eg << "ell,N,Nprime,mean_mult,N_oriented,N_all,Nprime_all,Lprime,pgt,pgt_oriented\n";
  for (const GridRow& row : r.rows) {
    eg << fmt(row.ell) << ',' << row.N << ',' << row.Nprime << ',' << (row.mean ? fmt(*row.mean) : "") << ','
       << row.N_oriented << ',' << row.N_all << ',' << row.Nprime_all << ',' << row.Lprime << ',' << fmt(row.pgt)
       << ',' << fmt(row.pgt_oriented) << '\n';
    if (row.mean) eg_dat << fmt(row.ell) << ' ' << fmt(std::log(*row.mean)) << '\n';
  }
  write_file_atomic((d / "egmm.csv").string(), eg.str());
  write_file_atomic((d / "egmm.dat").string(), eg_dat.str());

  std::ostringstream tc;
  for (std::size_t k = 0; k < r.all_traces.entries.size(); ++k)
    tc << fmt(std::log(r.all_traces.entries[k].value)) << ' ' << fmt(std::log(static_cast<double>(k + 1))) << '\n';
  write_file_atomic((d / "trace_counting.dat").string(), tc.str());

  std::ostringstream cs;
  cs << "length,trace,word,primitive,power,orientations,members\n";
  for (const GeodesicClass& c : r.classes.classes)
    cs << fmt(c.length) << ',' << csv_quote(c.trace.to_json().dump()) << ',' << word_string(c.word) << ','
       << (c.primitive ? 1 : 0) << ',' << c.power << ',' << c.orientations << ',' << c.members << '\n';
  write_file_atomic((d / "classes.csv").string(), cs.str());

  write_file_atomic((d / "report.json").string(), report_json(r));
}

}  // namespace lenspec
