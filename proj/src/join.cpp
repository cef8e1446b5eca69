#include "veristat/join.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "veristat/error.hpp"

namespace veristat {

namespace {

using KeyCell = std::variant<double, std::string>;
using KeyTuple = std::vector<KeyCell>;

std::optional<KeyTuple> key_at(const std::vector<const Column*>& key_columns, std::size_t row) {
  KeyTuple key;
  key.reserve(key_columns.size());
  for (const Column* col : key_columns) {
    if (col->is_absent(row)) return std::nullopt;
    if (col->is_numeric()) {
      const double v = *col->numbers()[row];
      if (std::isnan(v)) return std::nullopt;
      key.emplace_back(v);
    } else {
      key.emplace_back(*col->texts()[row]);
    }
  }
  return key;
}

// Gathers rows of `source` by index; std::nullopt produces an absent cell.
Column gather(const Column& source, const std::vector<std::optional<std::size_t>>& rows) {
  if (source.is_numeric()) {
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r ? source.numbers()[*r] : std::nullopt);
    return Column(source.name(), std::move(out));
  }
  std::vector<std::optional<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r ? source.texts()[*r] : std::nullopt);
  return Column(source.name(), std::move(out));
}

// Key column taken from the left row when there is one, otherwise from the right row.
Column coalesce(const Column& left, const Column& right,
                const std::vector<std::optional<std::size_t>>& left_rows,
                const std::vector<std::optional<std::size_t>>& right_rows) {
  if (left.is_numeric()) {
    std::vector<std::optional<double>> out;
    for (std::size_t i = 0; i < left_rows.size(); ++i) {
      out.push_back(left_rows[i] ? left.numbers()[*left_rows[i]] : right.numbers()[*right_rows[i]]);
    }
    return Column(left.name(), std::move(out));
  }
  std::vector<std::optional<std::string>> out;
  for (std::size_t i = 0; i < left_rows.size(); ++i) {
    out.push_back(left_rows[i] ? left.texts()[*left_rows[i]] : right.texts()[*right_rows[i]]);
  }
  return Column(left.name(), std::move(out));
}

}  // namespace

const char* to_string(JoinKind kind) {
  switch (kind) {
    case JoinKind::inner: return "inner";
    case JoinKind::left: return "left";
    case JoinKind::right: return "right";
    case JoinKind::full: return "full";
  }
  return "?";
}

std::optional<JoinKind> parse_join_kind(const std::string& name) {
  for (JoinKind k : {JoinKind::inner, JoinKind::left, JoinKind::right, JoinKind::full}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

Table join_tables(const Table& left, const Table& right, const std::vector<std::string>& keys,
                  JoinKind kind) {
  if (keys.empty()) throw SpecError("join needs at least one key column");
  std::vector<const Column*> left_keys;
  std::vector<const Column*> right_keys;
  for (const auto& key : keys) {
    if (!left.has_column(key)) throw SpecError("join key '" + key + "' missing from left table");
    if (!right.has_column(key)) throw SpecError("join key '" + key + "' missing from right table");
    const Column& l = left.column(key);
    const Column& r = right.column(key);
    if (l.type() != r.type()) {
      throw SpecError("join key '" + key + "' is " + to_string(l.type()) + " on the left but " +
                      to_string(r.type()) + " on the right");
    }
    left_keys.push_back(&l);
    right_keys.push_back(&r);
  }
  auto is_key = [&](const std::string& name) {
    return std::find(keys.begin(), keys.end(), name) != keys.end();
  };
  for (const auto& col : left.columns()) {
    if (!is_key(col.name()) && right.has_column(col.name())) {
      throw DisambiguationError("column '" + col.name() +
                                "' appears on both sides of the join; rename one before joining");
    }
  }

  std::multimap<KeyTuple, std::size_t> right_index;
  for (std::size_t r = 0; r < right.n_rows(); ++r) {
    if (auto key = key_at(right_keys, r)) right_index.emplace(std::move(*key), r);
  }

  std::vector<std::optional<std::size_t>> left_rows;
  std::vector<std::optional<std::size_t>> right_rows;
  std::vector<bool> right_matched(right.n_rows(), false);
  const bool keep_left = kind == JoinKind::left || kind == JoinKind::full;
  const bool keep_right = kind == JoinKind::right || kind == JoinKind::full;

  for (std::size_t l = 0; l < left.n_rows(); ++l) {
    bool matched = false;
    if (auto key = key_at(left_keys, l)) {
      auto [first, last] = right_index.equal_range(*key);
      for (auto it = first; it != last; ++it) {
        left_rows.emplace_back(l);
        right_rows.emplace_back(it->second);
        right_matched[it->second] = true;
        matched = true;
      }
    }
    if (!matched && keep_left) {
      left_rows.emplace_back(l);
      right_rows.emplace_back(std::nullopt);
    }
  }
  if (keep_right) {
    for (std::size_t r = 0; r < right.n_rows(); ++r) {
      if (!right_matched[r]) {
        left_rows.emplace_back(std::nullopt);
        right_rows.emplace_back(r);
      }
    }
  }

  std::vector<Column> columns;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    columns.push_back(coalesce(*left_keys[k], *right_keys[k], left_rows, right_rows));
  }
  for (const auto& col : left.columns()) {
    if (!is_key(col.name())) columns.push_back(gather(col, left_rows));
  }
  for (const auto& col : right.columns()) {
    if (!is_key(col.name())) columns.push_back(gather(col, right_rows));
  }
  return Table(std::move(columns), std::string(to_string(kind)) + "_join(" + left.source() + ", " +
                                       right.source() + ")");
}

}  // namespace veristat
