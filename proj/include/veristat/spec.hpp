#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "veristat/join.hpp"
#include "veristat/table.hpp"

namespace veristat {

/// Position in spec text (1-based). Locations never take part in equality: two specs that
/// differ only in layout compare equal.
struct SourceLocation {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceLocation&, const SourceLocation&) { return true; }
};

/// A right-hand side in a spec block: number, quoted string, reference or list.
/// References are bare identifiers optionally followed by `.name` or `.col[n]`.
struct Value {
  enum class Kind { number, string, reference, list };

  Kind kind = Kind::number;
  double number = 0;
  std::string text;                      // string contents, or the reference root
  std::optional<ColumnSelector> column;  // reference member, if any
  std::vector<Value> items;
  SourceLocation location;

  static Value of_number(double v);
  static Value of_string(std::string s);
  static Value of_reference(std::string root, std::optional<ColumnSelector> column = {});
  static Value of_list(std::vector<Value> items);

  /// Canonical spec-syntax rendering.
  std::string to_text() const;

  friend bool operator==(const Value&, const Value&) = default;
};

struct Directive {
  std::string key;
  Value value;
  SourceLocation location;

  friend bool operator==(const Directive&, const Directive&) = default;
};

/// `<keyword> <id> { key = value ... }`
struct Block {
  std::string keyword;
  std::string id;
  std::vector<Directive> directives;
  SourceLocation location;

  const Directive* find(const std::string& key) const;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Untyped parse of a spec or plan file. Top-level `key = value` lines land in `assignments`.
struct Document {
  std::vector<Block> blocks;
  std::vector<Directive> assignments;
};

/// Throws ParseError with line/column on malformed text.
Document parse_document(const std::string& text);

enum class StatementKind {
  no_missing,
  no_infinite,
  mean_equals,
  median_close_to,
  fivenum_no_outliers,
  table_shape,
  slope_claim,
  no_nonlinearity,
  no_resid_outliers,
  no_high_leverage,
  plot_confirm,
  all_of,
};

const char* to_string(StatementKind kind);
std::optional<StatementKind> parse_statement_kind(const std::string& name);
const std::vector<StatementKind>& all_statement_kinds();

enum class BindingType { none, column, table, fit };
enum class ParamType { number, integer, word, string_list, number_list };

struct ParamInfo {
  std::string name;
  ParamType type;
  bool required;
  std::optional<Value> default_value;  // effective default when omitted
  std::string meaning;
};

/// Static description of a statement kind: what it binds to, which parameters it takes,
/// the refutation conditions it encodes.
struct KindInfo {
  StatementKind kind;
  BindingType binding;
  std::vector<ParamInfo> params;
  bool needs_complete_column;  // raises a domain error on absent cells
  std::vector<std::string> refutations;  // templated condition -> message lines
  std::string summary;
};

const KindInfo& kind_info(StatementKind kind);

struct ColumnBinding {
  std::string table;
  ColumnSelector selector;
  friend bool operator==(const ColumnBinding&, const ColumnBinding&) = default;
};
struct TableBinding {
  std::string table;
  friend bool operator==(const TableBinding&, const TableBinding&) = default;
};
struct FitBinding {
  std::string fit;
  friend bool operator==(const FitBinding&, const FitBinding&) = default;
};
using Binding = std::variant<std::monostate, ColumnBinding, TableBinding, FitBinding>;

std::string describe(const Binding& binding);

struct DatasetSpec {
  std::string id;
  std::string source;
  MissingConventions conventions;
  DeclaredTypes types;
  SourceLocation location;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct DeriveSpec {
  std::string id;
  JoinKind join = JoinKind::inner;
  std::string left;
  std::string right;
  std::vector<std::string> keys;
  SourceLocation location;

  friend bool operator==(const DeriveSpec&, const DeriveSpec&) = default;
};

struct FitSpec {
  std::string id;
  std::string data;
  ColumnSelector x;
  ColumnSelector y;
  int degree = 1;
  SourceLocation location;

  friend bool operator==(const FitSpec&, const FitSpec&) = default;
};

struct StatementSpec {
  std::string id;
  StatementKind kind = StatementKind::all_of;
  std::map<std::string, Value> params;
  Binding binding;
  std::vector<std::string> premises;
  SourceLocation location;

  /// Explicit value or the kind's default; throws SpecError if neither exists.
  double number(const std::string& name) const;
  std::optional<double> optional_number(const std::string& name) const;
  std::string word(const std::string& name) const;
  std::optional<std::vector<std::string>> strings(const std::string& name) const;
  std::optional<std::vector<double>> numbers(const std::string& name) const;

  friend bool operator==(const StatementSpec&, const StatementSpec&) = default;
};

struct AnalysisSpec {
  std::vector<DatasetSpec> datasets;
  std::vector<DeriveSpec> derivations;
  std::vector<FitSpec> fits;
  std::vector<StatementSpec> statements;
  std::vector<std::string> roots;
  bool explicit_roots = false;

  const StatementSpec* find_statement(const std::string& id) const;
  const StatementSpec& statement(const std::string& id) const;  // throws SpecError
  const DatasetSpec* find_dataset(const std::string& id) const;
  const DeriveSpec* find_derivation(const std::string& id) const;
  const FitSpec* find_fit(const std::string& id) const;
  bool is_table(const std::string& id) const;

  /// The loaded dataset a table id ultimately draws its conventions from (left side of joins).
  const DatasetSpec& origin_dataset(const std::string& table_id) const;

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

/// Structurally valid spec or ParseError (syntax, unknown kind, duplicate id, unresolved
/// reference, incomplete parameters), each carrying a location. Cycles are left to lint.
AnalysisSpec parse_spec(const std::string& text);
AnalysisSpec parse_spec_file(const std::filesystem::path& path);

/// Canonical text; parse_spec(to_text(s)) == s.
std::string to_text(const AnalysisSpec& spec);

enum class Severity { error, warning };

struct Finding {
  Severity severity;
  std::string statement_id;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Premise cycles (error), statements unreachable from every root (warning), and
/// complete-data checks with no no_missing statement on the same column in their own
/// premise subtree or in an earlier sibling's subtree (warning).
std::vector<Finding> lint_spec(const AnalysisSpec& spec);

bool has_errors(const std::vector<Finding>& findings);
std::string to_string(const Finding& finding);

}  // namespace veristat
