#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lenspec/spectrum.hpp"

namespace lenspec {

struct ReportOptions {
  SubgroupMode mode = SubgroupMode::Full;  // trace set for the Galois, norm and separation checks
  double grid_step = 0.25;
  double fit_lo = 5, fit_hi = 9;
  int clustering_max = 30;  // capped by the enumerated trace bound
  bool parallel = true;
};

/// Everything computed from one store.
struct SpectrumReport {
  std::string signature;
  bool cocompact = true;
  double max_length = 0;
  EnumerationStatus status = EnumerationStatus::Complete;
  ClassReport classes;
  TraceSet all_traces;   // full group, drives the counting functions
  TraceSet mode_traces;  // selected by ReportOptions::mode
  std::vector<GridRow> rows;
  Clustering clustering;
  int clustering_max = 0;
  ArithmeticDimension dimension;
  std::optional<GaloisAudit> galois;   // arithmetic dimension 2 only
  double delta = 1;                    // delta_emp, or 1 when every other conjugate is bounded
  std::string delta_source;
  std::optional<NormBound> norm;           // traces of the square subgroup, asserted
  std::optional<NormBound> norm_all;       // every trace, recorded as data (full mode only)
  std::optional<Separation> separation;
  std::string separation_error;
  std::optional<EgmmFit> egmm;
  std::string egmm_error;
  std::optional<DistinctLengthBound> distinct;
  std::string distinct_error;
  double clustering_C = 0;  // envelope constant for count(n) <= C n^(1 - delta)
};

SpectrumReport build_report(const ElementStore& store, const ReportOptions& opt);

/// One inequality verdict.
struct LedgerLine {
  std::string name;
  std::string anchor;
  std::string verdict;  // pass, fail, skipped, or data for unasserted observations
  std::string margin;
};

std::vector<LedgerLine> verify_ledger(const SpectrumReport& r);

/// spectrum.csv, clustering.csv, egmm.csv, classes.csv, report.json and the
/// two-column plot files, written atomically into dir.
void write_outputs(const SpectrumReport& r, const std::string& dir);
std::string report_json(const SpectrumReport& r);

/// Writes text to path through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace lenspec
