#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace veristat {

/// How absent values are spelled in a source. Tokens are mapped to absent cells on
/// ingest; sentinels stay ordinary numbers and are only interpreted by checks.
struct MissingConventions {
  std::vector<std::string> missing_tokens{"NA"};
  std::vector<double> numeric_sentinels{-99.0};

  bool is_missing_token(const std::string& cell) const;
  bool is_sentinel(double value) const;

  /// Throws SpecError if a sentinel is not finite.
  void validate() const;

  friend bool operator==(const MissingConventions&, const MissingConventions&) = default;
};

enum class ColumnType { numeric, text };

const char* to_string(ColumnType type);

/// One named column. Numeric columns hold optional doubles, text columns optional strings;
/// std::nullopt marks an absent cell in either case.
class Column {
 public:
  Column(std::string name, std::vector<std::optional<double>> values);
  Column(std::string name, std::vector<std::optional<std::string>> values);

  const std::string& name() const noexcept { return name_; }
  ColumnType type() const noexcept { return type_; }
  bool is_numeric() const noexcept { return type_ == ColumnType::numeric; }
  std::size_t size() const noexcept;

  bool is_absent(std::size_t row) const;
  std::size_t absent_count() const;

  /// Numeric cells. Throws DomainError on a text column.
  const std::vector<std::optional<double>>& numbers() const;
  /// Text cells. Throws DomainError on a numeric column.
  const std::vector<std::optional<std::string>>& texts() const;

  /// Present numeric values in row order. Throws DomainError on absent cells or text columns.
  std::vector<double> complete_numbers() const;

  /// Cell rendered for CSV output; absent cells render as `absent_token`.
  std::string cell_text(std::size_t row, const std::string& absent_token = "NA") const;

  Column renamed(std::string name) const;

  friend bool operator==(const Column&, const Column&) = default;

 private:
  std::string name_;
  ColumnType type_;
  std::vector<std::optional<double>> numbers_;
  std::vector<std::optional<std::string>> texts_;
};

/// 1-based column index or a column name.
using ColumnSelector = std::variant<std::size_t, std::string>;

std::string describe(const ColumnSelector& selector);

/// Immutable rectangular dataset.
class Table {
 public:
  Table() = default;
  /// Throws LoadError when column lengths differ or names repeat.
  Table(std::vector<Column> columns, std::string source = "inline");

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  const std::string& source() const noexcept { return source_; }

  std::vector<std::string> column_names() const;
  bool has_column(const std::string& name) const;

  /// Column by 1-based index or by name; throws SelectorError.
  const Column& column(const ColumnSelector& selector) const;
  std::size_t index_of(const ColumnSelector& selector) const;

  /// Copy with one column replaced (same name and position).
  Table with_column(std::size_t zero_based_index, Column column) const;

  friend bool operator==(const Table& a, const Table& b) { return a.columns_ == b.columns_; }

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::string source_ = "inline";
};

/// Optional per-column declared types keyed by column name.
using DeclaredTypes = std::map<std::string, ColumnType>;

/// Parses comma-separated text with a header row. Quoted fields may contain commas,
/// doubled quotes and newlines; CRLF and LF line ends are both accepted. Columns without
/// a declared type are numeric when every non-missing cell parses as a number.
Table load_table(std::istream& input, const MissingConventions& conventions,
                 const DeclaredTypes& declared_types = {}, std::string source = "inline");
Table load_table(const std::filesystem::path& path, const MissingConventions& conventions,
                 const DeclaredTypes& declared_types = {});
Table load_table_text(const std::string& text, const MissingConventions& conventions,
                      const DeclaredTypes& declared_types = {});

const Column& get_column(const Table& table, const ColumnSelector& selector);

/// Writes the table as CSV. Numbers use 15 significant digits unless `precision` says otherwise.
std::string write_csv(const Table& table, int precision = 15, const std::string& absent_token = "NA");

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace veristat
