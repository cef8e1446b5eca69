#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veristat/spec.hpp"

namespace veristat {

// Everything here works from the spec alone; no dataset is ever opened.

/// Premise closure of a statement laid out as a tree. A premise shared by several parents
/// appears once under each of them.
struct PremiseTree {
  std::string id;
  StatementKind kind = StatementKind::all_of;
  std::vector<PremiseTree> children;

  std::size_t node_count() const;
  std::size_t depth() const;  // a lone node has depth 1
};

/// Throws SpecError for an unknown root or a premise cycle.
PremiseTree premise_tree(const AnalysisSpec& spec, const std::string& root);

/// A `Root` header line, then one line per node using `|--` and `\--` branch glyphs.
std::string render_text_tree(const PremiseTree& tree);

/// Graphviz digraph with one node per tree node and parent -> premise edges.
std::string render_dot(const PremiseTree& tree);

/// Human-readable definition of a statement: kind, binding, parameters with effective
/// defaults, and the refutation conditions with their messages filled in.
std::string describe_check(const AnalysisSpec& spec, const std::string& id);

enum class PropertyKind { not_missing_result, finite_result, row_count_known };

const char* to_string(PropertyKind kind);

struct DerivedProperty {
  std::string statement_id;  // the statement whose result the property is about
  std::string subject;       // its binding
  PropertyKind property;
  std::optional<std::size_t> value;  // row count for row_count_known
  /// One premise path per premise the rule needed, each starting at `statement_id`.
  std::vector<std::vector<std::string>> justification;
};

/// Inference rule as data: when a statement of one of `applies_to` has, somewhere below it,
/// premises of every kind in `requires` about the same subject, its result has `property`.
struct InferenceRule {
  enum class Match { same_column, same_table };

  std::string name;
  std::vector<StatementKind> requires_kinds;
  std::vector<StatementKind> applies_to;
  Match match;
  PropertyKind property;
};

inline constexpr int kInferenceRulesVersion = 1;
const std::vector<InferenceRule>& inference_rules();

/// Applies the rule table over the premise closure of `root`.
std::vector<DerivedProperty> infer_properties(const AnalysisSpec& spec, const std::string& root);

std::string to_string(const DerivedProperty& property);

}  // namespace veristat
