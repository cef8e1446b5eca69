#include "veristat/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "veristat/checks.hpp"
#include "veristat/error.hpp"
#include "veristat/regress.hpp"

namespace veristat {

std::size_t PremiseTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::size_t PremiseTree::depth() const {
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

namespace {

PremiseTree build_tree(const AnalysisSpec& spec, const std::string& id, std::vector<std::string>& path) {
  if (std::find(path.begin(), path.end(), id) != path.end()) {
    throw SpecError("premise cycle through '" + id + "'");
  }
  const StatementSpec& st = spec.statement(id);
  path.push_back(id);
  PremiseTree tree{st.id, st.kind, {}};
  for (const auto& p : st.premises) tree.children.push_back(build_tree(spec, p, path));
  path.pop_back();
  return tree;
}

std::string label(const PremiseTree& node) {
  return node.id + " [" + to_string(node.kind) + "]";
}

void text_lines(const PremiseTree& node, const std::string& prefix, bool last, std::string& out) {
  out += prefix + (last ? "\\--" : "|--") + label(node) + "\n";
  const std::string child_prefix = prefix + (last ? "    " : "|   ");
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    text_lines(node.children[i], child_prefix, i + 1 == node.children.size(), out);
  }
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

void dot_nodes(const PremiseTree& node, std::size_t& next_id, std::ostringstream& nodes,
               std::ostringstream& edges, std::optional<std::size_t> parent) {
  const std::size_t id = next_id++;
  nodes << "  n" << id << " [label=\"" << dot_escape(node.id) << "\", tooltip=\""
        << to_string(node.kind) << "\"];\n";
  if (parent) edges << "  n" << *parent << " -> n" << id << ";\n";
  for (const auto& child : node.children) dot_nodes(child, next_id, nodes, edges, id);
}

}  // namespace

PremiseTree premise_tree(const AnalysisSpec& spec, const std::string& root) {
  if (!spec.find_statement(root)) throw SpecError("unknown statement '" + root + "'");
  std::vector<std::string> path;
  return build_tree(spec, root, path);
}

std::string render_text_tree(const PremiseTree& tree) {
  std::string out = "Root\n";
  text_lines(tree, "  ", true, out);
  return out;
}

std::string render_dot(const PremiseTree& tree) {
  std::ostringstream nodes;
  std::ostringstream edges;
  std::size_t next_id = 0;
  dot_nodes(tree, next_id, nodes, edges, std::nullopt);
  std::ostringstream os;
  os << "digraph premises {\n"
     << "  // premises sharing a parent are combined by logical AND\n"
     << "  graph [rankdir=TB, labelloc=b, label=\"sibling premises combine by logical AND\"];\n"
     << "  node [shape=box];\n"
     << nodes.str() << edges.str() << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// describe_check

namespace {

std::string list_text(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + items[i] + "\"";
  }
  return out + "]";
}

std::string list_text(const std::vector<double>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += format_number(items[i]);
  }
  return out + "]";
}

std::string q(const std::string& s) { return "\"" + s + "\""; }

std::vector<std::string> refutations(const AnalysisSpec& spec, const StatementSpec& st) {
  std::vector<std::string> lines;
  switch (st.kind) {
    case StatementKind::no_missing: {
      const auto& binding = std::get<ColumnBinding>(st.binding);
      MissingConventions conv = spec.origin_dataset(binding.table).conventions;
      if (auto s = st.numbers("sentinels")) conv.numeric_sentinels = *s;
      lines.push_back("missing tokens " + list_text(conv.missing_tokens) + " are read as absent cells");
      lines.push_back("any absent cell -> " + q(messages::kNaPresent));
      for (double s : conv.numeric_sentinels) {
        lines.push_back("any cell equal to " + format_number(s) + " -> " + q(messages::sentinel_present(s)));
      }
      lines.push_back("sentinels " + list_text(conv.numeric_sentinels));
      break;
    }
    case StatementKind::no_infinite:
      lines.push_back("any +/-infinite cell -> " + q(messages::kInfPresent));
      break;
    case StatementKind::mean_equals: {
      const double target = st.number("target");
      const auto phrase = column_phrase(std::get<ColumnBinding>(st.binding).selector);
      const std::string how =
          st.params.count("round_digits")
              ? "round_half_even(mean, " + format_number(st.number("round_digits")) + ") != " + format_number(target)
              : "|mean - " + format_number(target) + "| / " + format_number(std::fabs(target)) + " > " +
                    format_number(st.number("rel_tol"));
      lines.push_back("mean absent or " + how + " -> " + q(messages::mean_not_equal(phrase, target)));
      break;
    }
    case StatementKind::median_close_to: {
      const double target = st.number("target");
      lines.push_back("|median - " + format_number(target) + "| > " + format_number(st.number("window")) +
                      " -> " + q(messages::median_not_close(target)));
      break;
    }
    case StatementKind::fivenum_no_outliers: {
      const std::string k = format_number(st.number("iqr_multiplier"));
      lines.push_back("max > median + " + k + " * (upper hinge - lower hinge) -> " + q(messages::kOutliersRight));
      lines.push_back("min < median - " + k + " * (upper hinge - lower hinge) -> " + q(messages::kOutliersLeft));
      break;
    }
    case StatementKind::table_shape: {
      if (auto n = st.optional_number("n_rows")) {
        lines.push_back("row count != " + format_number(*n) + " -> " + q(messages::kWrongRows));
      }
      if (auto n = st.optional_number("n_cols")) {
        lines.push_back("column count != " + format_number(*n) + " -> " + q(messages::kWrongCols));
      }
      if (auto names = st.strings("column_names")) {
        lines.push_back("column names differ from " + list_text(*names) + " -> " + q(messages::kWrongNames));
      }
      if (auto cols = st.strings("no_missing_in")) {
        lines.push_back("absent cell in " + list_text(*cols) + " -> " + q(messages::na_in_columns(*cols)));
      }
      break;
    }
    case StatementKind::slope_claim:
      lines.push_back("round_half_even(slope, " + format_number(st.number("round_digits")) +
                      ") != " + format_number(st.number("claim")) + " -> " + q(messages::kSlopeMismatch));
      break;
    case StatementKind::no_nonlinearity:
      lines.push_back("logLik(quadratic) - logLik(linear) >= " + format_number(st.number("llr_bound")) +
                      " -> " + q(messages::kNonlinear));
      break;
    case StatementKind::no_resid_outliers: {
      const double bound = st.number("resid_bound");
      lines.push_back("any |standardized residual| > " + format_number(bound) + " -> " +
                      q(messages::resid_outliers(bound)));
      break;
    }
    case StatementKind::no_high_leverage:
      lines.push_back("any hat value > " + format_number(st.number("leverage_factor")) +
                      " * mean(hat values) -> " + q(messages::kHighLeverage));
      break;
    case StatementKind::plot_confirm:
      if (st.word("plot") == "residual_histogram") {
        lines.push_back("answer to \"Does the histogram look okay? [y/n]\" is not y -> " +
                        q(messages::kBadHistogram));
      } else {
        lines.push_back("answer to \"Does this residual plot look okay? [y/n]\" is not y -> " +
                        q(messages::kBadResidualPlot));
      }
      break;
    case StatementKind::all_of:
      break;
  }
  return lines;
}

}  // namespace

std::string describe_check(const AnalysisSpec& spec, const std::string& id) {
  const StatementSpec& st = spec.statement(id);
  const KindInfo& info = kind_info(st.kind);
  std::ostringstream os;
  os << "statement " << st.id << "\n";
  os << "  kind: " << to_string(st.kind) << "\n";
  if (st.kind == StatementKind::all_of) {
    os << "  group; holds when all premises hold\n";
  } else {
    os << "  holds when: " << info.summary << "\n";
    os << "  on: " << describe(st.binding) << "\n";
  }
  os << "  premises: ";
  if (st.premises.empty()) {
    os << "(none)\n";
  } else {
    for (std::size_t i = 0; i < st.premises.size(); ++i) os << (i ? ", " : "") << st.premises[i];
    os << " (all must hold)\n";
  }
  if (!info.params.empty()) {
    os << "  parameters:\n";
    for (const auto& p : info.params) {
      auto it = st.params.find(p.name);
      os << "    " << p.name << " = ";
      if (it != st.params.end()) {
        os << it->second.to_text();
      } else if (p.default_value) {
        os << p.default_value->to_text() << " (default)";
      } else {
        os << "(unset)";
      }
      os << "  # " << p.meaning << "\n";
    }
  }
  const auto lines = refutations(spec, st);
  if (!lines.empty()) {
    os << "  refutes when:\n";
    for (const auto& line : lines) os << "    " << line << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Property inference

const char* to_string(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::not_missing_result: return "not_missing_result";
    case PropertyKind::finite_result: return "finite_result";
    case PropertyKind::row_count_known: return "row_count_known";
  }
  return "?";
}

const std::vector<InferenceRule>& inference_rules() {
  using K = StatementKind;
  using M = InferenceRule::Match;
  static const std::vector<InferenceRule> rules{
      {"no absent cells rule out an absent summary",
       {K::no_missing},
       {K::mean_equals, K::median_close_to, K::fivenum_no_outliers},
       M::same_column,
       PropertyKind::not_missing_result},
      {"no absent and no infinite cells give a finite mean",
       {K::no_missing, K::no_infinite},
       {K::mean_equals},
       M::same_column,
       PropertyKind::finite_result},
      {"a row-count expectation fixes the rows every column check sees",
       {K::table_shape},
       {K::no_missing, K::no_infinite, K::mean_equals, K::median_close_to, K::fivenum_no_outliers},
       M::same_table,
       PropertyKind::row_count_known},
  };
  return rules;
}

namespace {

std::optional<std::string> table_of(const Binding& b) {
  if (const auto* c = std::get_if<ColumnBinding>(&b)) return c->table;
  if (const auto* t = std::get_if<TableBinding>(&b)) return t->table;
  return std::nullopt;
}

bool matches(const StatementSpec& consumer, const StatementSpec& premise, const InferenceRule& rule) {
  if (rule.match == InferenceRule::Match::same_column) {
    const auto* a = std::get_if<ColumnBinding>(&consumer.binding);
    const auto* b = std::get_if<ColumnBinding>(&premise.binding);
    return a && b && *a == *b;
  }
  if (premise.kind == StatementKind::table_shape && !premise.params.count("n_rows")) return false;
  const auto a = table_of(consumer.binding);
  const auto b = table_of(premise.binding);
  return a && b && *a == *b;
}

// Shortest premise path from `from` to a statement satisfying `accept`, excluding `from`.
std::optional<std::vector<std::string>> find_path(
    const AnalysisSpec& spec, const std::string& from,
    const std::function<bool(const StatementSpec&)>& accept) {
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{from};
  std::set<std::string> seen{from};
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    for (const auto& p : spec.statement(id).premises) {
      if (!seen.insert(p).second) continue;
      parent[p] = id;
      if (accept(spec.statement(p))) {
        std::vector<std::string> path{p};
        for (std::string at = p; at != from;) {
          at = parent[at];
          path.push_back(at);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(p);
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<DerivedProperty> infer_properties(const AnalysisSpec& spec, const std::string& root) {
  const PremiseTree tree = premise_tree(spec, root);
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::function<void(const PremiseTree&)> walk = [&](const PremiseTree& t) {
    if (seen.insert(t.id).second) order.push_back(t.id);
    for (const auto& c : t.children) walk(c);
  };
  walk(tree);

  std::vector<DerivedProperty> out;
  for (const auto& id : order) {
    const StatementSpec& consumer = spec.statement(id);
    for (const auto& rule : inference_rules()) {
      if (std::find(rule.applies_to.begin(), rule.applies_to.end(), consumer.kind) == rule.applies_to.end()) {
        continue;
      }
      DerivedProperty prop{consumer.id, describe(consumer.binding), rule.property, std::nullopt, {}};
      bool complete = true;
      for (StatementKind needed : rule.requires_kinds) {
        auto path = find_path(spec, consumer.id, [&](const StatementSpec& p) {
          return p.kind == needed && matches(consumer, p, rule);
        });
        if (!path) {
          complete = false;
          break;
        }
        if (rule.property == PropertyKind::row_count_known) {
          prop.value = static_cast<std::size_t>(spec.statement(path->back()).number("n_rows"));
        }
        prop.justification.push_back(std::move(*path));
      }
      if (complete) out.push_back(std::move(prop));
    }
  }
  return out;
}

std::string to_string(const DerivedProperty& property) {
  std::string out = property.statement_id + " (" + property.subject + "): " + to_string(property.property);
  if (property.value) out += "(" + std::to_string(*property.value) + ")";
  out += " via ";
  for (std::size_t i = 0; i < property.justification.size(); ++i) {
    if (i) out += " and ";
    for (std::size_t k = 0; k < property.justification[i].size(); ++k) {
      if (k) out += " -> ";
      out += property.justification[i][k];
    }
  }
  return out;
}

}  // namespace veristat
