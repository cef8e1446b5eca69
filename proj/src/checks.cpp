#include "veristat/checks.hpp"

#include <algorithm>
#include <array>
#include <cfenv>
#include <cmath>

#include "veristat/error.hpp"

namespace veristat {

CheckOutcome CheckOutcome::pass(std::string kind, std::string subject) {
  return CheckOutcome{CheckStatus::pass, {}, std::move(kind), std::move(subject)};
}

CheckOutcome CheckOutcome::refute(std::string kind, std::string subject, std::string message) {
  return CheckOutcome{CheckStatus::refute, std::move(message), std::move(kind), std::move(subject)};
}

void Thresholds::validate() const {
  if (!(median_window > 0)) throw SpecError("median window must be positive");
  if (!(iqr_multiplier > 0)) throw SpecError("IQR multiplier must be positive");
  if (!(near_equal_rel_tol > 0)) throw SpecError("relative tolerance must be positive");
  if (round_digits && *round_digits < 0) throw SpecError("round digits must be non-negative");
}

std::optional<double> mean(const Column& column) {
  const auto& cells = column.numbers();
  if (cells.empty()) throw DomainError("mean of empty column '" + column.name() + "'");
  long double sum = 0;
  for (const auto& cell : cells) {
    if (!cell) return std::nullopt;
    sum += *cell;
  }
  const auto n = static_cast<long double>(cells.size());
  long double m = sum / n;
  if (std::isfinite(static_cast<double>(m))) {
    // Second pass refines the estimate the same way the reference implementation does.
    long double correction = 0;
    for (const auto& cell : cells) correction += *cell - m;
    m += correction / n;
  }
  return static_cast<double>(m);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of empty column");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double median(const Column& column) {
  return median(column.complete_numbers());
}

FiveNum five_number(std::vector<double> values) {
  if (values.empty()) throw DomainError("five-number summary of empty column");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double n4 = std::floor((n + 3.0) / 2.0) / 2.0;
  const std::array<double, 5> positions{1.0, n4, (n + 1.0) / 2.0, n + 1.0 - n4, n};
  std::array<double, 5> summary{};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto lo = static_cast<std::size_t>(std::floor(positions[i])) - 1;
    const auto hi = static_cast<std::size_t>(std::ceil(positions[i])) - 1;
    summary[i] = 0.5 * (values[lo] + values[hi]);
  }
  return FiveNum{summary[0], summary[1], summary[2], summary[3], summary[4]};
}

FiveNum five_number(const Column& column) {
  return five_number(column.complete_numbers());
}

double round_half_even(double value, int digits) {
  if (!std::isfinite(value)) return value;
  const long double scale = std::pow(10.0L, digits);
  const long double scaled = static_cast<long double>(value) * scale;
  const int previous = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const long double rounded = std::nearbyintl(scaled);
  std::fesetround(previous);
  return static_cast<double>(rounded / scale);
}

bool near_equal(double a, double b, const Thresholds& tol) {
  if (tol.round_digits) return round_half_even(a, *tol.round_digits) == b;
  const double diff = std::fabs(a - b);
  const double scale = std::fabs(b);
  const double relative = scale < tol.near_equal_rel_tol ? diff : diff / scale;
  return relative <= tol.near_equal_rel_tol;
}

std::string column_phrase(const ColumnSelector& selector) {
  static constexpr std::array<const char*, 10> kOrdinals{
      "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"};
  if (const auto* index = std::get_if<std::size_t>(&selector)) {
    if (*index >= 1 && *index <= kOrdinals.size()) {
      return std::string(kOrdinals[*index - 1]) + " column";
    }
    return "column " + std::to_string(*index);
  }
  return "column '" + std::get<std::string>(selector) + "'";
}

namespace messages {

std::string sentinel_present(double sentinel) {
  return format_number(sentinel) + " missing values present";
}

std::string mean_not_equal(const std::string& phrase, double target) {
  return "mean of " + phrase + " is not equal to " + format_number(target);
}

std::string median_not_close(double target) {
  return "median not close to " + format_number(target);
}

std::string na_in_columns(const std::vector<std::string>& columns) {
  std::string out = "NA values in ";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += " or ";
    out += "'" + columns[i] + "'";
  }
  return out;
}

}  // namespace messages

CheckOutcome check_no_missing(const Column& column, const MissingConventions& conventions,
                              const std::string& subject) {
  const std::string kind = "no_missing";
  if (column.absent_count() > 0) return CheckOutcome::refute(kind, subject, messages::kNaPresent);
  if (column.is_numeric()) {
    for (double sentinel : conventions.numeric_sentinels) {
      for (const auto& cell : column.numbers()) {
        if (*cell == sentinel) {
          return CheckOutcome::refute(kind, subject, messages::sentinel_present(sentinel));
        }
      }
    }
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_no_infinite(const Column& column, const std::string& subject) {
  const std::string kind = "no_infinite";
  for (const auto& cell : column.numbers()) {
    if (cell && std::isinf(*cell)) return CheckOutcome::refute(kind, subject, messages::kInfPresent);
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_mean_equals(const Column& column, double target, const Thresholds& tol,
                               const std::string& phrase, const std::string& subject) {
  const std::string kind = "mean_equals";
  const auto m = mean(column);
  if (m && std::isfinite(*m) && near_equal(*m, target, tol)) return CheckOutcome::pass(kind, subject);
  return CheckOutcome::refute(kind, subject, messages::mean_not_equal(phrase, target));
}

CheckOutcome check_median_close(const Column& column, double target, const Thresholds& tol,
                                const std::string& subject) {
  const std::string kind = "median_close_to";
  const double m = median(column);
  if (std::fabs(m - target) > tol.median_window) {
    return CheckOutcome::refute(kind, subject, messages::median_not_close(target));
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_fivenum_no_outliers(const Column& column, const Thresholds& tol,
                                       const std::string& subject) {
  const std::string kind = "fivenum_no_outliers";
  const FiveNum fn = five_number(column);
  const double reach = tol.iqr_multiplier * fn.hinge_spread();
  if (fn.max > fn.median + reach) return CheckOutcome::refute(kind, subject, messages::kOutliersRight);
  if (fn.min < fn.median - reach) return CheckOutcome::refute(kind, subject, messages::kOutliersLeft);
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_table_shape(const Table& table, const ShapeExpectation& expectation,
                               const std::string& subject) {
  const std::string kind = "table_shape";
  if (expectation.n_rows && table.n_rows() != *expectation.n_rows) {
    return CheckOutcome::refute(kind, subject, messages::kWrongRows);
  }
  if (expectation.n_cols && table.n_cols() != *expectation.n_cols) {
    return CheckOutcome::refute(kind, subject, messages::kWrongCols);
  }
  if (expectation.column_names) {
    const auto& expected = *expectation.column_names;
    const auto actual = table.column_names();
    auto contains = [](const std::vector<std::string>& names, const std::string& name) {
      return std::find(names.begin(), names.end(), name) != names.end();
    };
    // Same set of names; order is not part of the expectation.
    bool same = true;
    for (const auto& name : actual) same = same && contains(expected, name);
    for (const auto& name : expected) same = same && contains(actual, name);
    if (!same) return CheckOutcome::refute(kind, subject, messages::kWrongNames);
  }
  bool any_absent = false;
  for (const auto& name : expectation.no_missing_in) {
    if (!table.has_column(name)) {
      throw SpecError("shape expectation names unknown column '" + name + "'");
    }
    if (table.column(name).absent_count() > 0) any_absent = true;
  }
  if (any_absent) {
    return CheckOutcome::refute(kind, subject, messages::na_in_columns(expectation.no_missing_in));
  }
  return CheckOutcome::pass(kind, subject);
}

}  // namespace veristat
