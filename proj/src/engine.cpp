#include "veristat/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "veristat/error.hpp"
#include "veristat/hash.hpp"
#include "veristat/join.hpp"

namespace veristat {

// ---------------------------------------------------------------------------
// DataContext

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string error_text(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  }
}

ReportIssue::Category category_of(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const SpecError&) {
    return ReportIssue::Category::spec;
  } catch (const InteractionError&) {
    return ReportIssue::Category::interaction;
  } catch (...) {
    return ReportIssue::Category::data;
  }
}

}  // namespace

DataContext DataContext::load(const AnalysisSpec& spec, const std::filesystem::path& data_root) {
  DataContext ctx;
  ctx.spec_ = spec;
  for (const auto& ds : spec.datasets) {
    Slot slot;
    try {
      const auto path = data_root / ds.source;
      const std::string bytes = read_bytes(path);
      ctx.hashes_[ds.id] = sha256_hex(bytes);
      std::istringstream in(bytes);
      slot.table = std::make_shared<const Table>(load_table(in, ds.conventions, ds.types, path.string()));
    } catch (const Error&) {
      slot.error = std::current_exception();
      ctx.issues_.push_back({category_of(slot.error), ds.id, error_text(slot.error)});
    }
    ctx.tables_[ds.id] = std::move(slot);
  }
  ctx.build_derived();
  return ctx;
}

DataContext DataContext::from_tables(const AnalysisSpec& spec, std::map<std::string, Table> tables) {
  DataContext ctx;
  ctx.spec_ = spec;
  for (const auto& ds : spec.datasets) {
    Slot slot;
    auto it = tables.find(ds.id);
    if (it == tables.end()) {
      slot.error = std::make_exception_ptr(LoadError("no table supplied for dataset '" + ds.id + "'"));
      ctx.issues_.push_back({ReportIssue::Category::data, ds.id, error_text(slot.error)});
    } else {
      ctx.hashes_[ds.id] = sha256_hex(write_csv(it->second, 17));
      slot.table = std::make_shared<const Table>(std::move(it->second));
    }
    ctx.tables_[ds.id] = std::move(slot);
  }
  ctx.build_derived();
  return ctx;
}

DataContext DataContext::with_dataset(const std::string& dataset_id, Table table) const {
  if (!spec_.find_dataset(dataset_id)) throw SpecError("'" + dataset_id + "' is not a dataset");
  DataContext ctx;
  ctx.spec_ = spec_;
  ctx.hashes_ = hashes_;
  for (const auto& ds : spec_.datasets) {
    ctx.tables_[ds.id] = tables_.at(ds.id);
    if (ds.id != dataset_id && tables_.at(ds.id).error) {
      ctx.issues_.push_back({category_of(tables_.at(ds.id).error), ds.id,
                             error_text(tables_.at(ds.id).error)});
    }
  }
  ctx.hashes_[dataset_id] = sha256_hex(write_csv(table, 17));
  ctx.tables_[dataset_id] = Slot{std::make_shared<const Table>(std::move(table)), nullptr};
  ctx.build_derived();
  return ctx;
}

void DataContext::build_derived() {
  for (const auto& dv : spec_.derivations) {
    Slot slot;
    try {
      slot.table = std::make_shared<const Table>(
          join_tables(table(dv.left), table(dv.right), dv.keys, dv.join));
    } catch (const Error&) {
      slot.error = std::current_exception();
      issues_.push_back({category_of(slot.error), dv.id, error_text(slot.error)});
    }
    tables_[dv.id] = std::move(slot);
  }
  for (const auto& f : spec_.fits) {
    FitSlot slot;
    try {
      const Table& t = table(f.data);
      slot.fit = std::make_shared<const LinearFit>(
          fit_least_squares(t.column(f.x), t.column(f.y), f.degree));
    } catch (const Error&) {
      // Fit failures surface when a statement asks for the fit; they are data outcomes
      // (degenerate or singular data), not report-level issues.
      slot.error = std::current_exception();
      if (category_of(slot.error) == ReportIssue::Category::spec) {
        issues_.push_back({ReportIssue::Category::spec, f.id, error_text(slot.error)});
      }
    }
    fits_[f.id] = std::move(slot);
  }
}

const Table& DataContext::table(const std::string& id) const {
  auto it = tables_.find(id);
  if (it == tables_.end()) throw SpecError("unknown table '" + id + "'");
  if (it->second.error) std::rethrow_exception(it->second.error);
  return *it->second.table;
}

const LinearFit& DataContext::fit(const std::string& id) const {
  auto it = fits_.find(id);
  if (it == fits_.end()) throw SpecError("unknown fit '" + id + "'");
  if (it->second.error) std::rethrow_exception(it->second.error);
  return *it->second.fit;
}

const Column& DataContext::column(const ColumnBinding& binding) const {
  try {
    return table(binding.table).column(binding.selector);
  } catch (const SelectorError& e) {
    throw SpecError(binding.table + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Checks

const char* to_string(EstablishmentStatus status) {
  switch (status) {
    case EstablishmentStatus::established: return "established";
    case EstablishmentStatus::refuted: return "refuted";
    case EstablishmentStatus::blocked: return "blocked";
    case EstablishmentStatus::skipped: return "skipped";
  }
  return "?";
}

namespace {

Thresholds thresholds_for(const StatementSpec& st) {
  Thresholds t;
  if (auto v = st.optional_number("window")) t.median_window = *v;
  if (auto v = st.optional_number("iqr_multiplier")) t.iqr_multiplier = *v;
  if (auto v = st.optional_number("rel_tol")) t.near_equal_rel_tol = *v;
  if (auto v = st.optional_number("round_digits"); v && st.kind == StatementKind::mean_equals) {
    t.round_digits = static_cast<int>(*v);
  }
  t.validate();
  return t;
}

RegressionThresholds regression_thresholds_for(const StatementSpec& st) {
  RegressionThresholds t;
  if (auto v = st.optional_number("llr_bound")) t.llr_bound = *v;
  if (auto v = st.optional_number("resid_bound")) t.resid_bound = *v;
  if (auto v = st.optional_number("leverage_factor")) t.leverage_factor = *v;
  if (auto v = st.optional_number("round_digits"); v && st.kind == StatementKind::slope_claim) {
    t.slope_round_digits = static_cast<int>(*v);
  }
  t.validate();
  return t;
}

}  // namespace

CheckOutcome execute_check(const AnalysisSpec& spec, const StatementSpec& st, const DataContext& data,
                           Interaction& interaction, const EngineOptions& options) {
  const std::string subject = describe(st.binding);
  const auto column = [&]() -> const Column& { return data.column(std::get<ColumnBinding>(st.binding)); };
  const auto fit = [&]() -> const LinearFit& { return data.fit(std::get<FitBinding>(st.binding).fit); };

  switch (st.kind) {
    case StatementKind::no_missing: {
      MissingConventions conventions =
          spec.origin_dataset(std::get<ColumnBinding>(st.binding).table).conventions;
      if (auto sentinels = st.numbers("sentinels")) conventions.numeric_sentinels = *sentinels;
      return check_no_missing(column(), conventions, subject);
    }
    case StatementKind::no_infinite:
      return check_no_infinite(column(), subject);
    case StatementKind::mean_equals:
      return check_mean_equals(column(), st.number("target"), thresholds_for(st),
                               column_phrase(std::get<ColumnBinding>(st.binding).selector), subject);
    case StatementKind::median_close_to:
      return check_median_close(column(), st.number("target"), thresholds_for(st), subject);
    case StatementKind::fivenum_no_outliers:
      return check_fivenum_no_outliers(column(), thresholds_for(st), subject);
    case StatementKind::table_shape: {
      ShapeExpectation expect;
      if (auto v = st.optional_number("n_rows")) expect.n_rows = static_cast<std::size_t>(*v);
      if (auto v = st.optional_number("n_cols")) expect.n_cols = static_cast<std::size_t>(*v);
      expect.column_names = st.strings("column_names");
      if (auto v = st.strings("no_missing_in")) expect.no_missing_in = *v;
      return check_table_shape(data.table(std::get<TableBinding>(st.binding).table), expect, subject);
    }
    case StatementKind::slope_claim:
      return check_slope_claim(fit(), st.number("claim"), regression_thresholds_for(st), subject);
    case StatementKind::no_nonlinearity:
      return check_no_nonlinearity(fit(), regression_thresholds_for(st), subject);
    case StatementKind::no_resid_outliers:
      return check_no_resid_outliers(fit(), regression_thresholds_for(st), subject);
    case StatementKind::no_high_leverage:
      return check_no_high_leverage(fit(), regression_thresholds_for(st), subject);
    case StatementKind::plot_confirm: {
      const auto kind = parse_plot_kind(st.word("plot"));
      if (!kind) throw SpecError("unknown plot kind '" + st.word("plot") + "'");
      return confirm_plot(fit(), *kind, interaction, options.out_dir, st.id, subject);
    }
    case StatementKind::all_of:
      return CheckOutcome::pass("all_of", subject);
  }
  throw SpecError("unhandled statement kind");
}

// ---------------------------------------------------------------------------
// Establishment

namespace {

class Evaluator {
 public:
  Evaluator(const AnalysisSpec& spec, const DataContext& data, Interaction& interaction,
            const EngineOptions& options, EvidenceReport& report)
      : spec_(spec), data_(data), interaction_(interaction), options_(options), report_(report) {}

  Establishment evaluate(const std::string& id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    const StatementSpec& st = spec_.statement(id);

    Establishment node;
    node.statement_id = st.id;
    node.kind = to_string(st.kind);
    for (const auto& premise : st.premises) node.premise_results.push_back(evaluate(premise));

    const auto failing = std::find_if(node.premise_results.begin(), node.premise_results.end(),
                                      [](const Establishment& e) { return !e.established(); });
    if (failing != node.premise_results.end()) {
      node.status = EstablishmentStatus::blocked;
      node.message = "blocked by premise '" + failing->statement_id + "'";
    } else if (st.kind == StatementKind::all_of) {
      node.status = EstablishmentStatus::established;
    } else {
      run_own_check(st, node);
    }
    memo_.emplace(id, node);
    return node;
  }

 private:
  void run_own_check(const StatementSpec& st, Establishment& node) {
    report_.execution_log.push_back(st.id);
    const auto start = std::chrono::steady_clock::now();
    try {
      const CheckOutcome outcome = execute_check(spec_, st, data_, interaction_, options_);
      node.status = outcome.passed() ? EstablishmentStatus::established : EstablishmentStatus::refuted;
      node.message = outcome.message;
    } catch (const DomainError& e) {
      node.status = EstablishmentStatus::refuted;
      node.message = e.what();
    } catch (const DegenerateFitError& e) {
      node.status = EstablishmentStatus::refuted;
      node.message = e.what();
    } catch (const SingularityError& e) {
      node.status = EstablishmentStatus::refuted;
      node.message = e.what();
    } catch (const LeverageError& e) {
      node.status = EstablishmentStatus::refuted;
      node.message = e.what();
    } catch (const Error& e) {
      node.status = EstablishmentStatus::skipped;
      node.message = e.what();
      report_.issues.push_back({category_of(std::current_exception()), st.id, e.what()});
    }
    node.check_duration = std::chrono::steady_clock::now() - start;
  }

  const AnalysisSpec& spec_;
  const DataContext& data_;
  Interaction& interaction_;
  const EngineOptions& options_;
  EvidenceReport& report_;
  std::map<std::string, Establishment> memo_;
};

}  // namespace

std::string spec_fingerprint(const AnalysisSpec& spec) {
  return sha256_hex(to_text(spec));
}

EvidenceReport establish(const AnalysisSpec& spec, const DataContext& data, Interaction& interaction,
                         const EngineOptions& options) {
  const auto findings = lint_spec(spec);
  if (has_errors(findings)) {
    std::string text = "spec has errors:";
    for (const auto& f : findings) {
      if (f.severity == Severity::error) text += "\n  " + to_string(f);
    }
    throw SpecError(text);
  }

  EvidenceReport report;
  report.spec_hash = spec_fingerprint(spec);
  report.data_hashes = data.hashes();
  report.issues = data.issues();
  const std::size_t transcript_start = interaction.transcript().size();

  Evaluator evaluator(spec, data, interaction, options, report);
  for (const auto& root : spec.roots) {
    report.roots.push_back(evaluator.evaluate(root));
    report.established = report.established && report.roots.back().established();
  }
  const auto transcript = interaction.transcript();
  report.transcript.assign(transcript.begin() + static_cast<std::ptrdiff_t>(transcript_start),
                           transcript.end());
  return report;
}

EvidenceReport establish(const AnalysisSpec& spec, const std::filesystem::path& data_root,
                         const InteractionPolicy& policy, const EngineOptions& options) {
  Interaction interaction(policy);
  const DataContext data = DataContext::load(spec, data_root);
  EvidenceReport report = establish(spec, data, interaction, options);
  interaction.flush_transcript();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json to_json(const Establishment& node, bool include_durations) {
  nlohmann::ordered_json j;
  j["id"] = node.statement_id;
  j["kind"] = node.kind;
  j["status"] = to_string(node.status);
  j["message"] = node.message;
  if (include_durations) {
    j["check_duration_ms"] = std::chrono::duration<double, std::milli>(node.check_duration).count();
  }
  j["premises"] = nlohmann::ordered_json::array();
  for (const auto& child : node.premise_results) j["premises"].push_back(to_json(child, include_durations));
  return j;
}

nlohmann::ordered_json to_json(const EvidenceReport& report, bool include_durations) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["spec_hash"] = report.spec_hash;
  j["data_hashes"] = nlohmann::ordered_json::object();
  for (const auto& [id, hash] : report.data_hashes) j["data_hashes"][id] = hash;
  j["roots"] = nlohmann::ordered_json::array();
  for (const auto& root : report.roots) j["roots"].push_back(to_json(root, include_durations));
  j["overall"] = report.established ? "established" : "not_established";
  j["transcript"] = nlohmann::ordered_json::array();
  for (const auto& t : report.transcript) {
    j["transcript"].push_back({{"statement", t.statement_id},
                               {"plot", t.plot_kind},
                               {"question", t.question},
                               {"answer", t.answer},
                               {"plot_file", t.plot_file}});
  }
  return j;
}

namespace {

void summarize(const Establishment& node, int depth, std::ostringstream& os) {
  os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "[" << to_string(node.status) << "] "
     << node.statement_id << " (" << node.kind << ")";
  if (!node.message.empty()) os << ": " << node.message;
  os << "\n";
  for (const auto& child : node.premise_results) summarize(child, depth + 1, os);
}

}  // namespace

std::string render_summary(const EvidenceReport& report) {
  std::ostringstream os;
  for (const auto& root : report.roots) summarize(root, 0, os);
  os << "overall: " << (report.established ? "established" : "not established") << "\n";
  return os.str();
}

}  // namespace veristat
