#pragma once

#include <optional>
#include <string>

#include "lenspec/enumerate.hpp"

namespace lenspec {

/// Everything a run needs, stored as flat key=value text.
///
/// Keys (defaults in brackets): signature [2,3,7], mode [full], max_length or
/// max_trace [max_length=6], bits [128], word_cap [2000], cache_dir
/// [.lenspec-cache], out_dir [out], grid_step [0.25], fit_window [5:9].
struct RunConfig {
  Signature sig;
  SubgroupMode mode = SubgroupMode::Full;
  std::optional<double> max_length = 6.0;
  std::optional<double> max_trace;
  long bits = kDefaultBits;
  int word_cap = 2000;
  std::string cache_dir = ".lenspec-cache";
  std::string out_dir = "out";
  double grid_step = 0.25;
  double fit_lo = 5, fit_hi = 9;

  /// Canonical text: one key=value per line, keys sorted, shortest round-trip numbers.
  std::string to_text() const;
  /// Parses key=value lines; '#' starts a comment. Unknown keys are errors.
  static RunConfig parse(const std::string& text);
  /// Applies one key=value assignment.
  void set(const std::string& key, const std::string& value);

  void validate() const;
  double length_bound() const;
  EnumerationConfig enumeration() const;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace lenspec
