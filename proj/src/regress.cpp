#include "veristat/regress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "veristat/error.hpp"
#include "veristat/plot.hpp"

namespace veristat {

void RegressionThresholds::validate() const {
  if (!(llr_bound > 0) || !(resid_bound > 0) || !(leverage_factor > 0)) {
    throw SpecError("regression thresholds must be positive");
  }
  if (slope_round_digits < 0) throw SpecError("slope round digits must be non-negative");
}

double gaussian_log_likelihood(double rss, std::size_t n) {
  const double nn = static_cast<double>(n);
  return -0.5 * nn * (std::log(2.0 * std::numbers::pi) + std::log(rss / nn) + 1.0);
}

LinearFit fit_least_squares(const std::vector<double>& x, const std::vector<double>& y, int degree,
                            std::string x_name, std::string y_name) {
  if (degree != 1 && degree != 2) throw SpecError("fit degree must be 1 or 2");
  if (x.size() != y.size()) throw DomainError("x and y differ in length");
  const std::size_t n = x.size();
  const std::size_t p = static_cast<std::size_t>(degree) + 1;
  if (n < p + 1) {
    throw DomainError("degree-" + std::to_string(degree) + " fit needs at least " +
                      std::to_string(p + 1) + " points, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("fit data must be finite");
  }

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd design(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = xi;
    if (degree == 2) design(i, 2) = xi * xi;
  }
  const Eigen::Map<const Eigen::VectorXd> response(y.data(), rows);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw SingularityError(degree == 1 ? "x is constant; slope is not identifiable"
                                       : "x and x^2 are collinear with the intercept");
  }
  const Eigen::VectorXd beta = qr.solve(response);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);

  LinearFit fit;
  fit.degree = degree;
  fit.n = n;
  fit.p = p;
  fit.x = x;
  fit.y = y;
  fit.x_name = std::move(x_name);
  fit.y_name = std::move(y_name);
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  const Eigen::VectorXd fitted = design * beta;
  fit.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  fit.residuals.resize(n);
  fit.hat_values.resize(n);
  double rss = 0;
  double scale = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fit.fitted[i];
    rss += fit.residuals[i] * fit.residuals[i];
    scale += y[i] * y[i];
    fit.hat_values[i] = q.row(static_cast<Eigen::Index>(i)).squaredNorm();
  }
  fit.rss = rss;
  // Residuals at rounding level count as an exact fit.
  const double floor = 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (rss <= floor * floor * scale) {
    throw DegenerateFitError("residual sum of squares is zero; log-likelihood undefined");
  }
  fit.log_lik = gaussian_log_likelihood(rss, n);
  return fit;
}

LinearFit fit_least_squares(const Column& x, const Column& y, int degree) {
  return fit_least_squares(x.complete_numbers(), y.complete_numbers(), degree, x.name(), y.name());
}

std::vector<double> standardized_residuals(const LinearFit& fit) {
  if (!(fit.rss > 0)) throw DegenerateFitError("residual sum of squares is zero");
  const double s = std::sqrt(fit.rss / static_cast<double>(fit.n - fit.p));
  std::vector<double> r(fit.n);
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double room = 1.0 - fit.hat_values[i];
    if (room <= 1e-12) {
      throw LeverageError("point " + std::to_string(i + 1) +
                          " has leverage 1; standardized residual undefined");
    }
    r[i] = fit.residuals[i] / (s * std::sqrt(room));
  }
  return r;
}

double llr_nonlinearity(const LinearFit& linear, const LinearFit& quadratic) {
  if (linear.degree != 1 || quadratic.degree != 2) {
    throw SpecError("nonlinearity comparison needs a degree-1 and a degree-2 fit");
  }
  if (linear.x != quadratic.x || linear.y != quadratic.y) {
    throw SpecError("nonlinearity comparison needs both fits on the same data");
  }
  return quadratic.log_lik - linear.log_lik;
}

namespace messages {
std::string resid_outliers(double bound) {
  return "some standardized residuals are greater than +/-" + format_number(bound);
}
}  // namespace messages

CheckOutcome check_slope_claim(const LinearFit& fit, double claim, const RegressionThresholds& tol,
                               const std::string& subject) {
  const std::string kind = "slope_claim";
  if (fit.degree != 1) throw SpecError("slope claim needs a degree-1 fit");
  if (round_half_even(fit.slope(), tol.slope_round_digits) != claim) {
    return CheckOutcome::refute(kind, subject, messages::kSlopeMismatch);
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_no_nonlinearity(const LinearFit& fit, const RegressionThresholds& tol,
                                   const std::string& subject) {
  const std::string kind = "no_nonlinearity";
  if (fit.degree != 1) throw SpecError("nonlinearity screen needs a degree-1 fit");
  const LinearFit quadratic = fit_least_squares(fit.x, fit.y, 2, fit.x_name, fit.y_name);
  if (llr_nonlinearity(fit, quadratic) >= tol.llr_bound) {
    return CheckOutcome::refute(kind, subject, messages::kNonlinear);
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_no_resid_outliers(const LinearFit& fit, const RegressionThresholds& tol,
                                     const std::string& subject) {
  const std::string kind = "no_resid_outliers";
  for (double r : standardized_residuals(fit)) {
    if (std::fabs(r) > tol.resid_bound) {
      return CheckOutcome::refute(kind, subject, messages::resid_outliers(tol.resid_bound));
    }
  }
  return CheckOutcome::pass(kind, subject);
}

CheckOutcome check_no_high_leverage(const LinearFit& fit, const RegressionThresholds& tol,
                                    const std::string& subject) {
  const std::string kind = "no_high_leverage";
  double total = 0;
  for (double h : fit.hat_values) total += h;
  const double mean_h = total / static_cast<double>(fit.hat_values.size());
  for (double h : fit.hat_values) {
    if (h > tol.leverage_factor * mean_h) {
      return CheckOutcome::refute(kind, subject, messages::kHighLeverage);
    }
  }
  return CheckOutcome::pass(kind, subject);
}

const char* to_string(PlotKind kind) {
  return kind == PlotKind::residual_histogram ? "residual_histogram" : "fitted_vs_residual";
}

std::optional<PlotKind> parse_plot_kind(const std::string& name) {
  if (name == "residual_histogram") return PlotKind::residual_histogram;
  if (name == "fitted_vs_residual") return PlotKind::fitted_vs_residual;
  return std::nullopt;
}

CheckOutcome confirm_plot(const LinearFit& fit, PlotKind kind, Interaction& interaction,
                          const std::filesystem::path& out_dir, const std::string& statement_id,
                          const std::string& subject) {
  const std::string check_kind = "plot_confirm";
  if (fit.residuals.empty()) throw DomainError("plot confirmation needs at least one residual");

  std::string svg;
  std::string question;
  const char* failure = nullptr;
  if (kind == PlotKind::residual_histogram) {
    svg = render_histogram_svg(standardized_residuals(fit), "Standardized Residuals",
                               "Standardized residuals");
    question = "Does the histogram look okay? [y/n] ";
    failure = messages::kBadHistogram;
  } else {
    svg = render_scatter_svg(fit.fitted, fit.residuals, "Fitted values", "Residuals");
    question = "Does this residual plot look okay? [y/n] ";
    failure = messages::kBadResidualPlot;
  }

  std::filesystem::create_directories(out_dir);
  const auto file = out_dir / (statement_id + "." + to_string(kind) + ".svg");
  {
    std::ofstream out(file);
    if (!out) throw InteractionError("cannot write plot '" + file.string() + "'");
    out << svg;
  }

  std::string answer = interaction.ask(statement_id, question, to_string(kind), file);
  std::transform(answer.begin(), answer.end(), answer.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (answer != "y") return CheckOutcome::refute(check_kind, subject, failure);
  return CheckOutcome::pass(check_kind, subject);
}

}  // namespace veristat
