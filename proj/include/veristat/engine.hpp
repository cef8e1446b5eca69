#pragma once

#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "veristat/checks.hpp"
#include "veristat/interaction.hpp"
#include "veristat/regress.hpp"
#include "veristat/spec.hpp"
#include "veristat/table.hpp"

namespace veristat {

/// Report-level problem that kept part of a spec from being evaluated.
struct ReportIssue {
  enum class Category { data, spec, interaction };

  Category category;
  std::string subject;
  std::string message;
};

/// Tables, derived tables and fits for one spec, built once from a data root.
///
/// Failures are captured per object rather than thrown: asking for a table or fit that
/// could not be built rethrows the original error, and `issues()` lists them all.
class DataContext {
 public:
  /// Reads every dataset below `data_root`, then applies derivations and fits in order.
  static DataContext load(const AnalysisSpec& spec, const std::filesystem::path& data_root);
  /// Builds a context from tables already in memory, keyed by dataset id.
  static DataContext from_tables(const AnalysisSpec& spec, std::map<std::string, Table> tables);

  /// Copy with one dataset replaced; derivations and fits are rebuilt.
  DataContext with_dataset(const std::string& dataset_id, Table table) const;

  const Table& table(const std::string& id) const;
  const LinearFit& fit(const std::string& id) const;
  const Column& column(const ColumnBinding& binding) const;

  /// Content hash per dataset id.
  const std::map<std::string, std::string>& hashes() const noexcept { return hashes_; }
  const std::vector<ReportIssue>& issues() const noexcept { return issues_; }

 private:
  struct Slot {
    std::shared_ptr<const Table> table;
    std::exception_ptr error;
  };
  struct FitSlot {
    std::shared_ptr<const LinearFit> fit;
    std::exception_ptr error;
  };

  void build_derived();

  AnalysisSpec spec_;
  std::map<std::string, Slot> tables_;
  std::map<std::string, FitSlot> fits_;
  std::map<std::string, std::string> hashes_;
  std::vector<ReportIssue> issues_;
};

enum class EstablishmentStatus { established, refuted, blocked, skipped };

const char* to_string(EstablishmentStatus status);

/// Outcome of one statement together with the outcomes of its premises.
struct Establishment {
  std::string statement_id;
  std::string kind;
  EstablishmentStatus status = EstablishmentStatus::skipped;
  std::string message;
  std::vector<Establishment> premise_results;
  std::chrono::nanoseconds check_duration{0};

  bool established() const noexcept { return status == EstablishmentStatus::established; }
};

struct EvidenceReport {
  std::string spec_hash;
  std::map<std::string, std::string> data_hashes;
  std::vector<Establishment> roots;
  bool established = true;
  std::vector<TranscriptEntry> transcript;

  /// Statement ids whose own check ran, in execution order. Not serialized.
  std::vector<std::string> execution_log;
  /// Problems that stopped parts of the evaluation. Not serialized.
  std::vector<ReportIssue> issues;
};

struct EngineOptions {
  std::filesystem::path out_dir = "evidence";
};

/// Runs one statement's own validator against the data, ignoring its premises.
/// Data errors propagate as exceptions; refutations come back as values.
CheckOutcome execute_check(const AnalysisSpec& spec, const StatementSpec& statement,
                           const DataContext& data, Interaction& interaction,
                           const EngineOptions& options);

/// Establishes every root bottom-up. Each statement's check runs at most once; a statement
/// whose premises are not all established is blocked and its check never runs. Throws
/// SpecError if the spec has lint errors.
EvidenceReport establish(const AnalysisSpec& spec, const DataContext& data, Interaction& interaction,
                         const EngineOptions& options = {});
EvidenceReport establish(const AnalysisSpec& spec, const std::filesystem::path& data_root,
                         const InteractionPolicy& policy, const EngineOptions& options = {});

/// Hash of the canonical spec text, so layout and comments do not change it.
std::string spec_fingerprint(const AnalysisSpec& spec);

inline constexpr const char* kReportSchemaVersion = "1";

nlohmann::ordered_json to_json(const Establishment& node, bool include_durations = true);
nlohmann::ordered_json to_json(const EvidenceReport& report, bool include_durations = true);

/// Indented status listing for terminals.
std::string render_summary(const EvidenceReport& report);

}  // namespace veristat
