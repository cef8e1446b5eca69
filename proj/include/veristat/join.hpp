#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veristat/table.hpp"

namespace veristat {

enum class JoinKind { inner, left, right, full };

const char* to_string(JoinKind kind);
/// std::nullopt for an unknown name.
std::optional<JoinKind> parse_join_kind(const std::string& name);

/// Equi-join on `keys`. Output columns are the keys, then the left non-key columns, then the
/// right non-key columns. Rows follow left-table order, then unmatched right rows in
/// right-table order; duplicate keys yield every matching pair. Key values compare exactly
/// and absent keys never match. Mismatched key values are not an error.
///
/// Throws SpecError for a key missing from either side or with differing column types, and
/// DisambiguationError when a non-key column name appears on both sides.
Table join_tables(const Table& left, const Table& right, const std::vector<std::string>& keys,
                  JoinKind kind);

}  // namespace veristat
