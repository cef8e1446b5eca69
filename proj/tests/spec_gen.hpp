#pragma once

// Seeded generator of small analysis specs over synthetic data. Every statement kind can
// appear; premises only point at earlier statements, so the result is acyclic.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support {

struct GeneratedCase {
  std::string spec_text;
  std::string csv;  // dataset `d`, source "d.csv"
  std::vector<std::string> statement_ids;
};

inline GeneratedCase generate_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::normal_distribution<double> noise(0, 1);
  auto chance = [&](double p) { return unit(rng) < p; };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  const int n = 8 + pick(25);
  std::ostringstream csv;
  csv.precision(17);
  csv << "a,b,c,x,y\n";
  for (int i = 0; i < n; ++i) {
    const double a = 4.6 + noise(rng) * 0.3;
    const double b = chance(0.08) ? -99 : 10 + noise(rng);
    const double c = chance(0.06) ? 400 : noise(rng);
    const double x = i + unit(rng);
    const double y = 0.5 + 1.79 * x + (chance(0.2) ? 0.05 * x * x : 0) + noise(rng) * 0.3;
    csv << a << "," << b << ",";
    if (chance(0.05)) {
      csv << "NA";
    } else {
      csv << c;
    }
    csv << "," << x << "," << y << "\n";
  }

  std::ostringstream spec;
  spec << "dataset d {\n  source = \"d.csv\"\n}\n\n";
  spec << "fit f { data = d; x = \"x\"; y = \"y\" }\n\n";

  GeneratedCase out;
  const char* columns[] = {"d.col[1]", "d.b", "d.col[3]", "d.x"};
  const int count = 3 + pick(8);
  for (int s = 0; s < count; ++s) {
    const std::string id = "s" + std::to_string(s);
    spec << "statement " << id << " {\n";
    const int kind = pick(12);
    const std::string column = columns[pick(4)];
    switch (kind) {
      case 0: spec << "  kind = no_missing\n  on = " << column << "\n"; break;
      case 1: spec << "  kind = no_infinite\n  on = " << column << "\n"; break;
      case 2:
        spec << "  kind = mean_equals\n  on = " << column << "\n  target = " << (chance(0.5) ? 4.6 : 10.0)
             << "\n  round_digits = 1\n";
        break;
      case 3:
        spec << "  kind = median_close_to\n  on = " << column << "\n  target = " << (chance(0.5) ? 4.6 : 10.0)
             << "\n  window = " << (chance(0.5) ? 0.5 : 2.0) << "\n";
        break;
      case 4: spec << "  kind = fivenum_no_outliers\n  on = " << column << "\n"; break;
      case 5:
        spec << "  kind = table_shape\n  on = d\n  n_rows = " << (chance(0.7) ? n : n + 1)
             << "\n  no_missing_in = [\"a\", \"c\"]\n";
        break;
      case 6: spec << "  kind = slope_claim\n  on = f\n  claim = 1.8\n  round_digits = 1\n"; break;
      case 7: spec << "  kind = no_nonlinearity\n  on = f\n"; break;
      case 8: spec << "  kind = no_resid_outliers\n  on = f\n  resid_bound = " << (chance(0.5) ? 4 : 1.5) << "\n"; break;
      case 9: spec << "  kind = no_high_leverage\n  on = f\n"; break;
      case 10:
        spec << "  kind = plot_confirm\n  on = f\n  plot = " << (chance(0.5) ? "residual_histogram" : "fitted_vs_residual")
             << "\n";
        break;
      default: spec << "  kind = all_of\n"; break;
    }
    std::vector<std::string> premises;
    for (int p = 0; p < s; ++p) {
      if (chance(0.35)) premises.push_back("s" + std::to_string(p));
    }
    if (!premises.empty()) {
      spec << "  premises = [";
      for (std::size_t i = 0; i < premises.size(); ++i) spec << (i ? ", " : "") << premises[i];
      spec << "]\n";
    }
    spec << "}\n\n";
    out.statement_ids.push_back(id);
  }
  out.spec_text = spec.str();
  out.csv = csv.str();
  return out;
}

}  // namespace testing_support
