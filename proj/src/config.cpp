#include "lenspec/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lenspec {

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& s) {
  long v = 0;
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "signature") {
    sig = Signature::parse(value);
  } else if (key == "mode") {
    mode = parse_mode(value);
  } else if (key == "max_length") {
    max_length = parse_double(value);
    max_trace.reset();
  } else if (key == "max_trace") {
    max_trace = parse_double(value);
    max_length.reset();
  } else if (key == "bits") {
    bits = parse_long(value);
  } else if (key == "word_cap") {
    word_cap = static_cast<int>(parse_long(value));
  } else if (key == "cache_dir") {
    cache_dir = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "grid_step") {
    grid_step = parse_double(value);
  } else if (key == "fit_window") {
    const auto c = value.find(':');
    if (c == std::string::npos) throw std::invalid_argument("fit_window expects lo:hi, got '" + value + "'");
    fit_lo = parse_double(value.substr(0, c));
    fit_hi = parse_double(value.substr(c + 1));
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  cfg.max_length.reset();
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(n) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (!cfg.max_length && !cfg.max_trace) cfg.max_length = 6;
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_text() const {
  std::map<std::string, std::string> kv;
  kv["signature"] = sig.to_string();
  kv["mode"] = to_string(mode);
  if (max_length) kv["max_length"] = format_double(*max_length);
  if (max_trace) kv["max_trace"] = format_double(*max_trace);
  kv["bits"] = std::to_string(bits);
  kv["word_cap"] = std::to_string(word_cap);
  kv["cache_dir"] = cache_dir;
  kv["out_dir"] = out_dir;
  kv["grid_step"] = format_double(grid_step);
  kv["fit_window"] = format_double(fit_lo) + ":" + format_double(fit_hi);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void RunConfig::validate() const {
  sig.validate();
  enumeration().validate();
  if (!(grid_step > 0)) throw std::invalid_argument("grid_step must be positive");
  if (!(fit_lo < fit_hi)) throw std::invalid_argument("fit_window needs lo < hi");
  if (cache_dir.empty() || out_dir.empty()) throw std::invalid_argument("directories must be nonempty");
}

double RunConfig::length_bound() const { return enumeration().length_bound(); }

EnumerationConfig RunConfig::enumeration() const {
  EnumerationConfig e;
  e.max_length = max_length;
  e.max_trace = max_trace;
  e.word_cap = word_cap;
  e.mode = mode;
  e.bits = bits;
  return e;
}

}  // namespace lenspec
