#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lenspec/cache.hpp"
#include "lenspec/config.hpp"
#include "lenspec/report.hpp"

namespace lenspec::cli {

namespace {

struct RunFlags {
  std::string config_file;
  std::string sig, mode, max_length, max_trace, bits, word_cap, cache_dir, out_dir, grid_step, fit_window;
  bool build = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool outputs) {
  cmd->add_option("--config", f.config_file, "key=value config file; flags override it");
  cmd->add_option("--sig", f.sig, "signature, e.g. 2,6,10 or 2,5,inf");
  cmd->add_option("--mode", f.mode, "full or squares");
  cmd->add_option("--max-length", f.max_length, "length bound L");
  cmd->add_option("--max-trace", f.max_trace, "trace bound T");
  cmd->add_option("--bits", f.bits, "starting precision in bits");
  cmd->add_option("--word-cap", f.word_cap, "maximal word length");
  cmd->add_option("--cache-dir", f.cache_dir, "cache directory");
  if (outputs) {
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--grid-step", f.grid_step, "length grid step");
    cmd->add_option("--fit-window", f.fit_window, "EGMM fit window lo:hi");
    cmd->add_flag("--build", f.build, "enumerate when no cache exists");
  }
}

RunConfig make_config(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw std::invalid_argument("cannot read config file " + f.config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = RunConfig::parse(ss.str());
  }
  const std::pair<const char*, const std::string*> flags[] = {
      {"signature", &f.sig},     {"mode", &f.mode},          {"max_length", &f.max_length},
      {"max_trace", &f.max_trace}, {"bits", &f.bits},        {"word_cap", &f.word_cap},
      {"cache_dir", &f.cache_dir}, {"out_dir", &f.out_dir},  {"grid_step", &f.grid_step},
      {"fit_window", &f.fit_window}};
  for (const auto& [key, value] : flags)
    if (!value->empty()) cfg.set(key, *value);
  if (!f.max_length.empty() && !f.max_trace.empty())
    throw std::invalid_argument("give either --max-length or --max-trace, not both");
  cfg.validate();
  return cfg;
}

ElementStore enumerate_and_save(const RunConfig& cfg, std::ostream& out) {
  ElementStore store = enumerate_ball(TriangleGroup::build(cfg.sig, cfg.bits), cfg.enumeration());
  const std::string path = cache_path(cfg);
  save_store(store, cfg, path);
  out << "cache " << path << "\n";
  return store;
}

ElementStore obtain_store(const RunConfig& cfg, bool build, std::ostream& out) {
  const std::string path = cache_path(cfg);
  if (!std::filesystem::exists(path)) {
    if (!build) throw CacheError("no cache at " + path + " (run enumerate first or pass --build)");
    return enumerate_and_save(cfg, out);
  }
  return load_store(path);
}

ReportOptions report_options(const RunConfig& cfg) {
  ReportOptions o;
  o.mode = cfg.mode;
  o.grid_step = cfg.grid_step;
  o.fit_lo = cfg.fit_lo;
  o.fit_hi = cfg.fit_hi;
  return o;
}

int status_code(const ElementStore& store, std::ostream& err) {
  if (store.status == EnumerationStatus::Complete) return kOk;
  err << "incomplete enumeration: word cap " << store.config.word_cap
      << " reached with a nonempty frontier; raise --word-cap\n";
  return kIncomplete;
}

// ---------------------------------------------------------------- commands

int cmd_field(int N, std::ostream& out) {
  if (N < 1) throw std::invalid_argument("field index must be >= 1");
  Field f = make_field(N);
  out << "field Q(2cos(pi/" << N << "))\n";
  out << "degree " << f->degree << "\n";
  out << "minimal polynomial " << f->minpoly_string() << "\n";
  for (int i = 0; i < f->degree; ++i)
    out << "embedding " << i << ": lambda -> 2cos(" << f->keys[i] << "pi/" << N << ") = " << std::setprecision(15)
        << f->root_values[i] << (i == 0 ? " (identity)" : "") << "\n";
  return kOk;
}

std::string matrix_text(const Mat2I& m) {
  auto v = [](const RealInterval& x) { return std::abs(x.mid()) < 1e-30 ? 0.0 : x.mid(); };
  std::ostringstream os;
  os << std::setprecision(12) << "[[" << v(m.a) << ", " << v(m.b) << "], [" << v(m.c) << ", " << v(m.d) << "]]";
  return os.str();
}

int cmd_group(const std::string& sig_text, std::ostream& out) {
  const Signature sig = Signature::parse(sig_text);
  const Group g = TriangleGroup::build(sig);
  out << "signature " << sig.to_string() << (sig.cocompact() ? " (cocompact)" : " (cusped)") << "\n";
  out << "ambient field Q(2cos(pi/" << g->ambient_N << ")), degree " << g->field->degree << "\n";
  out << "A = " << matrix_text(g->gens[kLetterA]) << "\n";
  out << "B = " << matrix_text(g->gens[kLetterB]) << "\n";
  out << "tr A = " << g->x.to_string() << ", tr B = " << g->y.to_string() << ", tr AB = " << g->z.to_string() << "\n";
  const ArithmeticDimension dim = arithmetic_dimension(*g);
  out << "invariant trace field " << dim.trace_field.field.describe() << ", degree " << dim.trace_field.field.degree
      << (dim.trace_field.stabilized ? ", stabilized" : ", NOT stabilized") << " at word cap " << dim.trace_field.word_cap
      << "\n";
  for (const EmbeddingVerdict& v : dim.verdicts) {
    out << "  embedding " << v.ambient_index << ": " << (v.unbounded ? "unbounded" : "bounded at cap");
    if (v.unbounded) out << " (witness " << v.witness << ", |sigma tr| = " << std::setprecision(10) << v.witness_abs << ")";
    out << ", discriminant sign " << v.discriminant_sign << "\n";
  }
  const ArithmeticityVerdict a = takeuchi_is_arithmetic(dim, true);
  out << "arithmetic dimension r = " << dim.r << "\n";
  out << "semi-arithmetic: yes (traces lie in the ring of integers of the ambient field)\n";
  out << "arithmetic: " << (a.arithmetic ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_enumerate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ElementStore store = enumerate_and_save(cfg, out);
  out << "signature " << cfg.sig.to_string() << ", length bound " << format_double(cfg.length_bound()) << "\n";
  out << "pruning radius " << format_double(store.r_cut) << ", domain radius " << format_double(store.geometry.rho)
      << "\n";
  out << "elements " << store.size() << ", depth " << store.stats.max_word_length << ", pruned " << store.stats.pruned
      << ", dedup hits " << store.stats.dedup_hits << ", high-precision decisions " << store.stats.ambiguous << "\n";
  out << "status " << (store.status == EnumerationStatus::Complete ? "complete" : "partial") << "\n";
  return status_code(store, err);
}

void print_summary(const SpectrumReport& r, std::ostream& out) {
  std::size_t prim = 0;
  for (const auto& c : r.classes.classes) prim += c.primitive ? 1 : 0;
  out << "signature " << r.signature << ", length bound " << format_double(r.max_length) << "\n";
  out << "classes " << r.classes.classes.size() << " (primitive " << prim << "), distinct traces "
      << r.all_traces.entries.size() << "\n";
  out << "arithmetic dimension " << r.dimension.r << ", delta " << format_double(r.delta) << " (" << r.delta_source
      << ")\n";
  if (!r.rows.empty()) {
    const GridRow& last = r.rows.back();
    out << "at l = " << format_double(last.ell) << ": N = " << last.N << ", N' = " << last.Nprime;
    if (last.mean) out << ", <g> = " << format_double(*last.mean);
    out << ", N l / e^l = " << format_double(last.pgt) << " (oriented " << format_double(last.pgt_oriented) << ")\n";
  }
  if (r.egmm) out << "EGMM fit: beta = " << format_double(r.egmm->beta) << ", c = " << format_double(r.egmm->c) << "\n";
}

int cmd_spectrum(const RunConfig& cfg, bool build, std::ostream& out, std::ostream& err) {
  ElementStore store = obtain_store(cfg, build, out);
  const SpectrumReport r = build_report(store, report_options(cfg));
  write_outputs(r, cfg.out_dir);
  print_summary(r, out);
  out << "outputs in " << cfg.out_dir << "\n";
  return status_code(store, err);
}

int cmd_verify(const RunConfig& cfg, bool build, std::ostream& out, std::ostream& err) {
  ElementStore store = obtain_store(cfg, build, out);
  const SpectrumReport r = build_report(store, report_options(cfg));
  if (r.classes.classes.empty()) err << "warning: no hyperbolic classes up to the bound; every check is vacuous\n";
  bool failed = false;
  for (const LedgerLine& l : verify_ledger(r)) {
    std::string v = l.verdict;
    std::transform(v.begin(), v.end(), v.begin(), ::toupper);
    out << std::left << std::setw(8) << v << l.name << " | " << l.anchor << " | " << l.margin << "\n";
    failed = failed || l.verdict == "fail";
  }
  if (failed) return kViolation;
  return status_code(store, err);
}

struct Range {
  int lo, hi;
};

Range parse_range(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) {
    const int v = std::stoi(s);
    return {v, v};
  }
  return {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
}

int cmd_scan(const std::string& ra, const std::string& rb, const std::string& rc, bool with_inf, std::ostream& out) {
  const Range a = parse_range(ra), b = parse_range(rb), c = parse_range(rc);
  std::vector<Signature> sigs;
  for (int x = std::max(2, a.lo); x <= a.hi; ++x)
    for (int y = std::max(x, b.lo); y <= b.hi; ++y) {
      for (int z = std::max(y, c.lo); z <= c.hi; ++z) {
        Signature s{x, y, z};
        if (s.margin() > 0) sigs.push_back(s);
      }
      if (with_inf) sigs.push_back(Signature{x, y, Signature::kInf});
    }
  out << std::left << std::setw(12) << "signature" << std::setw(4) << "r" << std::setw(12) << "arithmetic"
      << std::setw(28) << "invariant trace field" << "note\n";
  for (const Signature& s : sigs) {
    const Group g = TriangleGroup::build(s);
    const ArithmeticDimension dim = arithmetic_dimension(*g);
    const ArithmeticityVerdict v = takeuchi_is_arithmetic(dim, true);
    std::string note;
    if (s == Signature{2, 6, 10}) note = "named example, dimension 2 cocompact";
    if (s == Signature{2, 5, Signature::kInf}) note = "named example, non-arithmetic Hecke group";
    if (!dim.trace_field.stabilized) note += note.empty() ? "field not stabilized" : "; field not stabilized";
    out << std::left << std::setw(12) << s.to_string() << std::setw(4) << dim.r << std::setw(12)
        << (v.arithmetic ? "yes" : "no") << std::setw(28) << dim.trace_field.field.describe() << note << "\n";
  }
  return kOk;
}

int cmd_export(const RunConfig& cfg, bool build, std::ostream& out, std::ostream& err) {
  ElementStore store = obtain_store(cfg, build, out);
  const double L = cfg.length_bound();
  ClassReport cr = conjugacy_classes(store, L);
  primitive_split(store, cr);
  nlohmann::json j;
  j["signature"] = cfg.sig.to_string();
  j["config"] = cfg.to_text();
  j["max_length"] = L;
  nlohmann::json cls = nlohmann::json::array();
  for (const GeodesicClass& c : cr.classes) {
    nlohmann::json e = {{"word", word_string(c.word)},
                        {"trace", c.trace.to_json()},
                        {"length", c.length},
                        {"length_interval", {c.length_lo, c.length_hi}},
                        {"primitive", c.primitive},
                        {"power", c.power},
                        {"orientations", c.orientations},
                        {"members", c.members},
                        {"in_squares", c.in_squares}};
    if (c.root >= 0) e["root"] = c.root;
    cls.push_back(std::move(e));
  }
  j["classes"] = std::move(cls);
  const std::string path = (std::filesystem::path(cfg.out_dir) / "classes.json").string();
  write_file_atomic(path, j.dump(1) + "\n");
  write_file_atomic((std::filesystem::path(cfg.out_dir) / "run.cfg").string(), cfg.to_text());
  out << "exported " << cr.classes.size() << " classes to " << path << "\n";
  return status_code(store, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Length spectra of Fuchsian triangle groups"};
  app.require_subcommand(1);

  int field_n = 0;
  auto* field = app.add_subcommand("field", "print the field Q(2cos(pi/N))");
  field->add_option("N", field_n, "field index")->required();

  std::string group_sig;
  auto* group = app.add_subcommand("group", "generators, trace field, arithmetic dimension");
  group->add_option("--sig", group_sig, "signature")->required();

  RunFlags ef, sf, vf, xf;
  auto* enumerate = app.add_subcommand("enumerate", "enumerate the ball and write the cache");
  add_run_flags(enumerate, ef, false);
  auto* spectrum = app.add_subcommand("spectrum", "counting functions and CSV outputs from the cache");
  add_run_flags(spectrum, sf, true);
  auto* verify = app.add_subcommand("verify", "check every inequality and print a ledger");
  add_run_flags(verify, vf, true);
  auto* exportc = app.add_subcommand("export", "write the class list as JSON");
  add_run_flags(exportc, xf, true);

  std::string ra = "2:3", rb = "3:8", rc = "7:12";
  bool with_inf = false;
  auto* scan = app.add_subcommand("scan", "arithmetic dimension over a signature range");
  scan->add_option("--a", ra, "range lo:hi for a");
  scan->add_option("--b", rb, "range lo:hi for b");
  scan->add_option("--c", rc, "range lo:hi for finite c");
  scan->add_flag("--inf", with_inf, "include c = inf");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*field) return cmd_field(field_n, out);
    if (*group) return cmd_group(group_sig, out);
    if (*enumerate) return cmd_enumerate(make_config(ef), out, err);
    if (*spectrum) return cmd_spectrum(make_config(sf), sf.build, out, err);
    if (*verify) return cmd_verify(make_config(vf), vf.build, out, err);
    if (*exportc) return cmd_export(make_config(xf), xf.build, out, err);
    if (*scan) return cmd_scan(ra, rb, rc, with_inf, out);
  } catch (const IncompleteEnumeration& e) {
    err << "incomplete: " << e.what() << "\n";
    return kIncomplete;
  } catch (const InequalityViolation& e) {
    err << "violation: " << e.what() << "\n";
    return kViolation;
  } catch (const PrecisionCapExceeded& e) {
    err << "precision cap: " << e.what() << "\n";
    return kPrecision;
  } catch (const CacheError& e) {
    err << "cache: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace lenspec::cli
