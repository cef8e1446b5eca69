#pragma once

// Data and specs shared by several suites: the mean-of-4.6 analysis, the two-country join
// tables, and the simulated regression.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace fixtures {

inline const char* kMeanSpec = R"(dataset mean_data {
  source = "mean46.csv"
  missing = ["NA"]
  sentinels = [-99]
}

statement no_missing {
  kind = no_missing
  on = mean_data.col[1]
}

statement median_close_to {
  kind = median_close_to
  on = mean_data.col[1]
  target = 4.6
}

statement fivenum_no_outliers {
  kind = fivenum_no_outliers
  on = mean_data.col[1]
}

statement mean_is {
  kind = mean_equals
  on = mean_data.col[1]
  target = 4.6
  premises = [no_missing, median_close_to, fivenum_no_outliers]
}
)";

/// Normal draws recentred so the high-precision sample mean is 4.6; the last value absorbs
/// the remainder of the exact sum.
inline std::vector<double> mean46_values(std::uint64_t seed, std::size_t n = 200) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(4.6, 0.8);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  const double shift = 4.6 - oracle::mean(v);
  for (auto& x : v) x += shift;
  oracle::Big rest = oracle::Big(4.6) * oracle::Big(n);
  for (std::size_t i = 0; i + 1 < n; ++i) rest -= oracle::Big(v[i]);
  v.back() = static_cast<double>(rest);
  return v;
}

inline std::string one_column_csv(const std::string& name, const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << name << "\n";
  for (double x : v) os << x << "\n";
  return os.str();
}

inline const char* kData1 = "country,value1,year\nUS,92,2000\nUS,117,2001\nUS,93,2002\n";
inline const char* kData2 = "country,value2,year\nUSA,48.74391,2000\nUSA,49.44440,2001\nUSA,50.21478,2002\n";

inline std::string join_spec(const std::string& how) {
  return "dataset data1 { source = \"data1.csv\"; text = [\"country\"] }\n"
         "dataset data2 { source = \"data2.csv\"; text = [\"country\"] }\n"
         "derive merged { join = " + how + "; left = data1; right = data2; keys = [\"country\", \"year\"] }\n"
         "statement merged_dataset {\n"
         "  kind = table_shape\n  on = merged\n  n_rows = 3\n  n_cols = 4\n"
         "  column_names = [\"country\", \"value1\", \"year\", \"value2\"]\n"
         "  no_missing_in = [\"value1\", \"value2\"]\n}\n";
}

inline const char* kSlrSpec = R"(dataset sim { source = "slr.csv" }
fit line { data = sim; x = "x"; y = "y"; degree = 1 }
statement no_nonlinearity { kind = no_nonlinearity; on = line }
statement no_resid_outliers { kind = no_resid_outliers; on = line }
statement no_high_leverage { kind = no_high_leverage; on = line }
statement no_outliers { kind = all_of; premises = [no_resid_outliers, no_high_leverage] }
statement histogram_ok { kind = plot_confirm; on = line; plot = residual_histogram }
statement fitted_vs_residual_ok { kind = plot_confirm; on = line; plot = fitted_vs_residual }
statement plots_look_okay { kind = all_of; premises = [histogram_ok, fitted_vs_residual_ok] }
statement slope_is {
  kind = slope_claim
  on = line
  claim = 1.79
  premises = [no_nonlinearity, no_outliers, plots_look_okay]
}
)";

struct XY {
  std::vector<double> x, y;
};

/// y = 0.5 + 1.79 x + noise on x in [0, 10]; the noise scale keeps the slope estimate
/// within a few thousandths of 1.79.
inline XY slr_data(std::uint64_t seed, std::size_t n = 100, double noise_sd = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 10);
  std::normal_distribution<double> noise(0, noise_sd);
  XY d;
  for (std::size_t i = 0; i < n; ++i) {
    d.x.push_back(u(rng));
    d.y.push_back(0.5 + 1.79 * d.x.back() + noise(rng));
  }
  return d;
}

inline std::string xy_csv(const XY& d) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y\n";
  for (std::size_t i = 0; i < d.x.size(); ++i) os << d.x[i] << "," << d.y[i] << "\n";
  return os.str();
}

}  // namespace fixtures
