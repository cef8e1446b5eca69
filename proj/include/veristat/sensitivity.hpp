#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "veristat/engine.hpp"
#include "veristat/spec.hpp"
#include "veristat/table.hpp"

namespace veristat {

enum class PerturbationKind { inject_absent, inject_sentinel, inject_point_outlier, shift, skew_right };

const char* to_string(PerturbationKind kind);
std::optional<PerturbationKind> parse_perturbation_kind(const std::string& name);

/// One seeded alteration of a dataset column. Magnitudes are in hinge-spread units of the
/// unperturbed column so a plan means the same thing at any data scale.
struct Perturbation {
  std::string id;
  PerturbationKind kind = PerturbationKind::shift;
  ColumnBinding target;
  std::size_t count = 1;          // cells touched by inject_* kinds
  std::optional<double> fraction;  // overrides count; skew_right defaults to 0.1
  double magnitude = 10;          // inject_point_outlier: median + magnitude * spread
  double delta = 0;               // shift
  double rate = 1;                // skew_right: exponential rate
  std::optional<double> value;    // inject_sentinel: defaults to the dataset's first sentinel
  std::uint64_t seed = 0;

  /// Throws SpecError on out-of-range parameters.
  void validate() const;
};

/// Deterministic given the seed; the input table is left untouched.
/// Throws SpecError for a missing or non-numeric target column.
Table perturb_table(const Table& table, const Perturbation& perturbation);

/// Parses `perturb <id> { kind = ...; target = <dataset>.col[n]; ... }` blocks. Blocks
/// without a `seed` take `default_seed`.
std::vector<Perturbation> parse_plan(const std::string& text, std::uint64_t default_seed = 0);
std::vector<Perturbation> parse_plan_file(const std::filesystem::path& path, std::uint64_t default_seed = 0);

struct StatementStatus {
  std::string id;
  EstablishmentStatus status;
  std::string message;
};

struct PerturbationResult {
  Perturbation perturbation;
  std::vector<StatementStatus> statuses;  // post-order, each statement once
  bool caught = false;
  std::vector<std::string> caught_by;     // statements whose own check refuted
  EvidenceReport report;
};

struct SensitivityReport {
  EvidenceReport baseline;
  std::vector<PerturbationResult> results;  // plan order
  std::vector<std::string> uncaught;        // perturbation ids the spec let through
};

/// Re-establishes the spec once per perturbation. Prompting is replaced by assume_yes so
/// runs stay unattended; other policies are kept. Throws SpecError on an empty plan or a
/// target that is not a declared dataset.
SensitivityReport run_sensitivity(const AnalysisSpec& spec, const DataContext& data,
                                  const std::vector<Perturbation>& plan, InteractionPolicy policy,
                                  const EngineOptions& options = {});
SensitivityReport run_sensitivity(const AnalysisSpec& spec, const std::filesystem::path& data_root,
                                  const std::vector<Perturbation>& plan, InteractionPolicy policy,
                                  const EngineOptions& options = {});

std::vector<StatementStatus> flatten_statuses(const EvidenceReport& report);

nlohmann::ordered_json to_json(const SensitivityReport& report, bool include_durations = true);
std::string render_summary(const SensitivityReport& report);

}  // namespace veristat
