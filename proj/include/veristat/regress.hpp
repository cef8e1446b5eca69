#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "veristat/checks.hpp"
#include "veristat/interaction.hpp"
#include "veristat/table.hpp"

namespace veristat {

/// Ordinary least-squares polynomial fit (degree 1 or 2, intercept always present)
/// together with the quantities the regression diagnostics need.
struct LinearFit {
  int degree = 1;
  std::vector<double> coefficients;  // intercept first
  std::vector<double> fitted;
  std::vector<double> residuals;
  std::vector<double> hat_values;
  double rss = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  double log_lik = 0;
  std::string x_name = "x";
  std::string y_name = "y";
  std::vector<double> x;
  std::vector<double> y;

  double intercept() const { return coefficients.at(0); }
  double slope() const { return coefficients.at(1); }
};

struct RegressionThresholds {
  double llr_bound = 7.0;
  double resid_bound = 4.0;
  double leverage_factor = 5.0;
  int slope_round_digits = 2;

  void validate() const;
};

/// Throws DomainError (absent cells, too few points, length mismatch), SingularityError
/// (rank-deficient design) or DegenerateFitError (zero residual sum of squares).
LinearFit fit_least_squares(const std::vector<double>& x, const std::vector<double>& y, int degree,
                            std::string x_name = "x", std::string y_name = "y");
LinearFit fit_least_squares(const Column& x, const Column& y, int degree);

/// Gaussian profile log-likelihood -n/2 (log 2pi + log(rss/n) + 1).
double gaussian_log_likelihood(double rss, std::size_t n);

/// e_i / (s sqrt(1 - h_ii)) with s^2 = rss / (n - p). Throws LeverageError when some h_ii = 1.
std::vector<double> standardized_residuals(const LinearFit& fit);

/// log-likelihood of the quadratic fit minus that of the linear fit on the same data.
/// Throws SpecError when the fits do not share data or are not degrees 1 and 2.
double llr_nonlinearity(const LinearFit& linear, const LinearFit& quadratic);

namespace messages {
inline constexpr const char* kSlopeMismatch = "slope coefficient does not match claim";
inline constexpr const char* kNonlinear = "strong evidence of nonlinearity in the data";
inline constexpr const char* kHighLeverage = "some points have very high leverage";
inline constexpr const char* kBadHistogram = "problem with histogram of standardized residuals";
inline constexpr const char* kBadResidualPlot = "problem with residuals vs. fitted plot";
/// "some standardized residuals are greater than +/-<bound>"
std::string resid_outliers(double bound);
}  // namespace messages

CheckOutcome check_slope_claim(const LinearFit& fit, double claim, const RegressionThresholds& tol,
                               const std::string& subject = {});
/// Refits with a quadratic term on the fit's own data; refutes when llr >= llr_bound.
CheckOutcome check_no_nonlinearity(const LinearFit& fit, const RegressionThresholds& tol,
                                   const std::string& subject = {});
CheckOutcome check_no_resid_outliers(const LinearFit& fit, const RegressionThresholds& tol,
                                     const std::string& subject = {});
CheckOutcome check_no_high_leverage(const LinearFit& fit, const RegressionThresholds& tol,
                                    const std::string& subject = {});

enum class PlotKind { residual_histogram, fitted_vs_residual };

const char* to_string(PlotKind kind);
std::optional<PlotKind> parse_plot_kind(const std::string& name);

/// Renders the diagnostic plot as `<out_dir>/<statement_id>.<plot_kind>.svg`, then asks the
/// interaction for a y/n verdict. "y" in any case passes.
CheckOutcome confirm_plot(const LinearFit& fit, PlotKind kind, Interaction& interaction,
                          const std::filesystem::path& out_dir, const std::string& statement_id,
                          const std::string& subject = {});

}  // namespace veristat
