#include "veristat/table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "veristat/error.hpp"

namespace veristat {

namespace {

struct RawRow {
  std::vector<std::string> fields;
  int line = 0;
};

// RFC-4180 subset: comma separator, double-quote quoting, LF or CRLF records.
std::vector<RawRow> split_records(std::istream& input) {
  std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
  std::vector<RawRow> rows;
  RawRow row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;
  row.line = line;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare empty line is not a record.
    if (!(row.fields.size() == 1 && row.fields.front().empty())) rows.push_back(std::move(row));
    row = RawRow{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw LoadError("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_record();
        ++line;
        row.line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw LoadError("line " + std::to_string(line) + ": unterminated quoted field");
  if (!field.empty() || !row.fields.empty()) end_record();
  return rows;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

}  // namespace

bool MissingConventions::is_missing_token(const std::string& cell) const {
  return std::find(missing_tokens.begin(), missing_tokens.end(), cell) != missing_tokens.end();
}

bool MissingConventions::is_sentinel(double value) const {
  return std::find(numeric_sentinels.begin(), numeric_sentinels.end(), value) !=
         numeric_sentinels.end();
}

void MissingConventions::validate() const {
  for (double s : numeric_sentinels) {
    if (!std::isfinite(s)) throw SpecError("missing-value sentinels must be finite numbers");
  }
}

const char* to_string(ColumnType type) {
  return type == ColumnType::numeric ? "numeric" : "text";
}

Column::Column(std::string name, std::vector<std::optional<double>> values)
    : name_(std::move(name)), type_(ColumnType::numeric), numbers_(std::move(values)) {}

Column::Column(std::string name, std::vector<std::optional<std::string>> values)
    : name_(std::move(name)), type_(ColumnType::text), texts_(std::move(values)) {}

std::size_t Column::size() const noexcept {
  return is_numeric() ? numbers_.size() : texts_.size();
}

bool Column::is_absent(std::size_t row) const {
  return is_numeric() ? !numbers_.at(row).has_value() : !texts_.at(row).has_value();
}

std::size_t Column::absent_count() const {
  if (is_numeric()) {
    return static_cast<std::size_t>(std::count(numbers_.begin(), numbers_.end(), std::nullopt));
  }
  return static_cast<std::size_t>(std::count(texts_.begin(), texts_.end(), std::nullopt));
}

const std::vector<std::optional<double>>& Column::numbers() const {
  if (!is_numeric()) throw DomainError("column '" + name_ + "' is text, not numeric");
  return numbers_;
}

const std::vector<std::optional<std::string>>& Column::texts() const {
  if (is_numeric()) throw DomainError("column '" + name_ + "' is numeric, not text");
  return texts_;
}

std::vector<double> Column::complete_numbers() const {
  const auto& cells = numbers();
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& cell : cells) {
    if (!cell) throw DomainError("column '" + name_ + "' has absent cells");
    out.push_back(*cell);
  }
  return out;
}

std::string Column::cell_text(std::size_t row, const std::string& absent_token) const {
  if (is_absent(row)) return absent_token;
  if (is_numeric()) return format_number(*numbers_[row]);
  return *texts_[row];
}

Column Column::renamed(std::string name) const {
  Column copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

std::string describe(const ColumnSelector& selector) {
  if (const auto* index = std::get_if<std::size_t>(&selector)) {
    return "col[" + std::to_string(*index) + "]";
  }
  return std::get<std::string>(selector);
}

Table::Table(std::vector<Column> columns, std::string source)
    : columns_(std::move(columns)), source_(std::move(source)) {
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name()).second) throw LoadError("duplicate column name '" + c.name() + "'");
  }
  if (!columns_.empty()) {
    n_rows_ = columns_.front().size();
    for (const auto& c : columns_) {
      if (c.size() != n_rows_) {
        throw LoadError("column '" + c.name() + "' has " + std::to_string(c.size()) +
                        " cells, expected " + std::to_string(n_rows_));
      }
    }
  }
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name());
  return names;
}

bool Table::has_column(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name() == name; });
}

std::size_t Table::index_of(const ColumnSelector& selector) const {
  if (const auto* index = std::get_if<std::size_t>(&selector)) {
    if (*index < 1 || *index > columns_.size()) {
      throw SelectorError("column index " + std::to_string(*index) + " out of range 1.." +
                          std::to_string(columns_.size()));
    }
    return *index - 1;
  }
  const auto& name = std::get<std::string>(selector);
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  throw SelectorError("no column named '" + name + "'");
}

const Column& Table::column(const ColumnSelector& selector) const {
  return columns_[index_of(selector)];
}

Table Table::with_column(std::size_t zero_based_index, Column column) const {
  std::vector<Column> columns = columns_;
  column = column.renamed(columns.at(zero_based_index).name());
  columns[zero_based_index] = std::move(column);
  return Table(std::move(columns), source_);
}

Table load_table(std::istream& input, const MissingConventions& conventions,
                 const DeclaredTypes& declared_types, std::string source) {
  conventions.validate();
  auto records = split_records(input);
  if (records.empty()) throw LoadError(source + ": missing header row");

  const auto& header = records.front().fields;
  const std::size_t width = header.size();
  for (const auto& [name, type] : declared_types) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw LoadError(source + ": declared type for unknown column '" + name + "'");
    }
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != width) {
      throw LoadError(source + ": row " + std::to_string(r) + " (line " +
                      std::to_string(records[r].line) + ") has " +
                      std::to_string(records[r].fields.size()) + " fields, expected " +
                      std::to_string(width));
    }
  }

  std::vector<Column> columns;
  columns.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    const std::string& name = header[c];
    std::optional<ColumnType> type;
    if (auto it = declared_types.find(name); it != declared_types.end()) type = it->second;

    std::vector<std::optional<double>> numbers;
    bool numeric_ok = true;
    for (std::size_t r = 1; r < records.size() && numeric_ok; ++r) {
      const std::string& cell = records[r].fields[c];
      if (conventions.is_missing_token(cell)) {
        numbers.emplace_back(std::nullopt);
        continue;
      }
      auto value = parse_number(cell);
      if (!value) {
        if (type == ColumnType::numeric) {
          throw LoadError(source + ": row " + std::to_string(r) + ", column '" + name +
                          "': cannot parse '" + cell + "' as a number");
        }
        numeric_ok = false;
        break;
      }
      numbers.emplace_back(*value);
    }

    if (type != ColumnType::text && numeric_ok) {
      columns.emplace_back(name, std::move(numbers));
      continue;
    }
    std::vector<std::optional<std::string>> texts;
    texts.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
      const std::string& cell = records[r].fields[c];
      if (conventions.is_missing_token(cell)) {
        texts.emplace_back(std::nullopt);
      } else {
        texts.emplace_back(cell);
      }
    }
    columns.emplace_back(name, std::move(texts));
  }
  return Table(std::move(columns), std::move(source));
}

Table load_table(const std::filesystem::path& path, const MissingConventions& conventions,
                 const DeclaredTypes& declared_types) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  return load_table(in, conventions, declared_types, path.string());
}

Table load_table_text(const std::string& text, const MissingConventions& conventions,
                      const DeclaredTypes& declared_types) {
  std::istringstream in(text);
  return load_table(in, conventions, declared_types, "inline");
}

const Column& get_column(const Table& table, const ColumnSelector& selector) {
  return table.column(selector);
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string write_csv(const Table& table, int precision, const std::string& absent_token) {
  std::string out;
  const auto& columns = table.columns();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out.push_back(',');
    out += quote_if_needed(columns[c].name());
  }
  out.push_back('\n');
  std::array<char, 64> buf{};
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out.push_back(',');
      const Column& col = columns[c];
      if (col.is_absent(r)) {
        out += absent_token;
      } else if (col.is_numeric()) {
        std::snprintf(buf.data(), buf.size(), "%.*g", precision, *col.numbers()[r]);
        out += buf.data();
      } else {
        out += quote_if_needed(*col.texts()[r]);
      }
    }
    out.push_back('\n');
  }
  return out;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace veristat
