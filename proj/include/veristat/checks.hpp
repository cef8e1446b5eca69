#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veristat/table.hpp"

namespace veristat {

enum class CheckStatus { pass, refute };

/// Result of running one validator. A refutation is a value, not an error.
struct CheckOutcome {
  CheckStatus status = CheckStatus::pass;
  std::string message;     // empty on pass
  std::string check_kind;  // e.g. "no_missing"
  std::string subject;     // what the check looked at

  bool passed() const noexcept { return status == CheckStatus::pass; }

  static CheckOutcome pass(std::string kind, std::string subject);
  static CheckOutcome refute(std::string kind, std::string subject, std::string message);

  friend bool operator==(const CheckOutcome&, const CheckOutcome&) = default;
};

/// Tukey five-number summary.
struct FiveNum {
  double min = 0;
  double lower_hinge = 0;
  double median = 0;
  double upper_hinge = 0;
  double max = 0;

  double hinge_spread() const noexcept { return upper_hinge - lower_hinge; }
};

struct Thresholds {
  double median_window = 0.5;
  double iqr_multiplier = 3.0;
  double near_equal_rel_tol = 1.5e-8;
  std::optional<int> round_digits;

  /// Throws SpecError when a threshold is not strictly positive.
  void validate() const;
};

/// Arithmetic mean; std::nullopt if any cell is absent. Throws DomainError on an empty
/// or text column.
std::optional<double> mean(const Column& column);
/// Middle order statistic (average of the two middle values for even n).
double median(const Column& column);
double median(std::vector<double> values);
FiveNum five_number(const Column& column);
FiveNum five_number(std::vector<double> values);

/// Rounds to `digits` decimal places, ties to even.
double round_half_even(double value, int digits);

/// `all.equal`-style comparison: relative difference against `b` (absolute when |b| is
/// below the tolerance), or rounded equality when `tol.round_digits` is set.
bool near_equal(double a, double b, const Thresholds& tol);

/// "first column", "second column", ... for index bindings; "column 'x'" for names.
std::string column_phrase(const ColumnSelector& selector);

// Refutation messages. Instantiated at the defaults they reproduce the reference strings.
namespace messages {
inline constexpr const char* kNaPresent = "NA values present";
inline constexpr const char* kInfPresent = "Inf/-Inf values present";
std::string sentinel_present(double sentinel);
std::string mean_not_equal(const std::string& column_phrase, double target);
std::string median_not_close(double target);
inline constexpr const char* kOutliersRight = "there are outliers to the right";
inline constexpr const char* kOutliersLeft = "there are outliers to the left";
inline constexpr const char* kWrongRows = "incorrect number of rows";
inline constexpr const char* kWrongCols = "incorrect number of columns";
inline constexpr const char* kWrongNames = "wrong column names";
std::string na_in_columns(const std::vector<std::string>& columns);
}  // namespace messages

/// Absent cells first, then sentinel values. Works on text columns (absent cells only).
CheckOutcome check_no_missing(const Column& column, const MissingConventions& conventions,
                              const std::string& subject = {});
/// Extension kind: refutes when a numeric column holds +/-infinity.
CheckOutcome check_no_infinite(const Column& column, const std::string& subject = {});
CheckOutcome check_mean_equals(const Column& column, double target, const Thresholds& tol,
                               const std::string& column_phrase = "first column",
                               const std::string& subject = {});
CheckOutcome check_median_close(const Column& column, double target, const Thresholds& tol,
                                const std::string& subject = {});
CheckOutcome check_fivenum_no_outliers(const Column& column, const Thresholds& tol,
                                       const std::string& subject = {});

struct ShapeExpectation {
  std::optional<std::size_t> n_rows;
  std::optional<std::size_t> n_cols;
  std::optional<std::vector<std::string>> column_names;
  std::vector<std::string> no_missing_in;
};

/// Rows, then columns, then names, then missingness; the first failure wins.
/// Throws SpecError when `no_missing_in` names a column the table lacks.
CheckOutcome check_table_shape(const Table& table, const ShapeExpectation& expectation,
                               const std::string& subject = {});

}  // namespace veristat
