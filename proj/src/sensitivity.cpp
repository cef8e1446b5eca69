#include "veristat/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "veristat/checks.hpp"
#include "veristat/error.hpp"

namespace veristat {

const char* to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::inject_absent: return "inject_absent";
    case PerturbationKind::inject_sentinel: return "inject_sentinel";
    case PerturbationKind::inject_point_outlier: return "inject_point_outlier";
    case PerturbationKind::shift: return "shift";
    case PerturbationKind::skew_right: return "skew_right";
  }
  return "?";
}

std::optional<PerturbationKind> parse_perturbation_kind(const std::string& name) {
  for (auto k : {PerturbationKind::inject_absent, PerturbationKind::inject_sentinel,
                 PerturbationKind::inject_point_outlier, PerturbationKind::shift,
                 PerturbationKind::skew_right}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void Perturbation::validate() const {
  if (fraction && !(*fraction >= 0 && *fraction <= 1)) {
    throw SpecError("perturbation '" + id + "': fraction must lie in [0, 1]");
  }
  if (!std::isfinite(magnitude) || !std::isfinite(delta)) {
    throw SpecError("perturbation '" + id + "': magnitude and delta must be finite");
  }
  if (!(rate > 0) || !std::isfinite(rate)) throw SpecError("perturbation '" + id + "': rate must be positive");
  if (value && !std::isfinite(*value)) throw SpecError("perturbation '" + id + "': value must be finite");
}

namespace {

// `k` distinct rows drawn without replacement, in draw order.
std::vector<std::size_t> pick_rows(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(k);
  return rows;
}

std::size_t cells_to_touch(const Perturbation& p, std::size_t n) {
  if (p.fraction) return static_cast<std::size_t>(std::ceil(*p.fraction * static_cast<double>(n)));
  return p.count;
}

}  // namespace

Table perturb_table(const Table& table, const Perturbation& p) {
  p.validate();
  std::size_t index = 0;
  try {
    index = table.index_of(p.target.selector);
  } catch (const SelectorError& e) {
    throw SpecError("perturbation '" + p.id + "': " + e.what());
  }
  const Column& original = table.columns()[index];
  if (!original.is_numeric()) {
    throw SpecError("perturbation '" + p.id + "': target column '" + original.name() + "' is not numeric");
  }
  std::vector<std::optional<double>> cells = original.numbers();
  const std::size_t n = cells.size();
  std::mt19937_64 rng(p.seed);

  switch (p.kind) {
    case PerturbationKind::inject_absent:
      for (std::size_t r : pick_rows(n, cells_to_touch(p, n), rng)) cells[r] = std::nullopt;
      break;
    case PerturbationKind::inject_sentinel: {
      const double sentinel = p.value.value_or(-99.0);
      for (std::size_t r : pick_rows(n, cells_to_touch(p, n), rng)) cells[r] = sentinel;
      break;
    }
    case PerturbationKind::inject_point_outlier: {
      const FiveNum fn = five_number(original);
      const double outlier = fn.median + p.magnitude * fn.hinge_spread();
      for (std::size_t r : pick_rows(n, cells_to_touch(p, n), rng)) cells[r] = outlier;
      break;
    }
    case PerturbationKind::shift:
      if (p.delta != 0) {
        for (auto& c : cells) {
          if (c) *c += p.delta;
        }
      }
      break;
    case PerturbationKind::skew_right: {
      const FiveNum fn = five_number(original);
      const double q = p.fraction.value_or(0.1);
      const auto k = std::min(n, static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return *cells[a] > *cells[b]; });
      std::exponential_distribution<double> tail(p.rate);
      for (std::size_t i = 0; i < k; ++i) cells[order[i]] = fn.median + tail(rng) * fn.hinge_spread();
      break;
    }
  }
  return table.with_column(index, Column(original.name(), std::move(cells)));
}

std::vector<Perturbation> parse_plan(const std::string& text, std::uint64_t default_seed) {
  const Document doc = parse_document(text);
  if (!doc.assignments.empty()) {
    const auto& a = doc.assignments.front();
    throw ParseError("unexpected top-level setting '" + a.key + "' in plan", a.location.line, a.location.column);
  }
  std::vector<Perturbation> plan;
  std::set<std::string> ids;
  for (const auto& block : doc.blocks) {
    auto fail = [&](const SourceLocation& loc, const std::string& msg) -> void {
      throw ParseError(msg, loc.line, loc.column);
    };
    if (block.keyword != "perturb") fail(block.location, "expected 'perturb' block, found '" + block.keyword + "'");
    if (!ids.insert(block.id).second) fail(block.location, "duplicate perturbation id '" + block.id + "'");
    Perturbation p;
    p.id = block.id;
    p.seed = default_seed;
    bool has_kind = false;
    bool has_target = false;
    std::set<std::string> seen;
    for (const auto& d : block.directives) {
      if (!seen.insert(d.key).second) fail(d.location, "duplicate key '" + d.key + "'");
      const Value& v = d.value;
      auto number = [&]() {
        if (v.kind != Value::Kind::number) fail(v.location, "'" + d.key + "' expects a number");
        return v.number;
      };
      auto whole = [&]() {
        const double x = number();
        if (x < 0 || x != std::floor(x)) fail(v.location, "'" + d.key + "' expects a non-negative integer");
        return x;
      };
      if (d.key == "kind") {
        const auto kind = v.kind == Value::Kind::reference && !v.column ? parse_perturbation_kind(v.text) : std::nullopt;
        if (!kind) fail(v.location, "unknown perturbation kind '" + v.to_text() + "'");
        p.kind = *kind;
        has_kind = true;
      } else if (d.key == "target") {
        if (v.kind != Value::Kind::reference || !v.column) fail(v.location, "'target' expects <dataset>.col[n] or <dataset>.<name>");
        p.target = ColumnBinding{v.text, *v.column};
        has_target = true;
      } else if (d.key == "count") {
        p.count = static_cast<std::size_t>(whole());
      } else if (d.key == "fraction") {
        p.fraction = number();
      } else if (d.key == "magnitude") {
        p.magnitude = number();
      } else if (d.key == "delta") {
        p.delta = number();
      } else if (d.key == "rate") {
        p.rate = number();
      } else if (d.key == "value") {
        p.value = number();
      } else if (d.key == "seed") {
        p.seed = static_cast<std::uint64_t>(whole());
      } else {
        fail(d.location, "unknown key '" + d.key + "' in perturbation '" + block.id + "'");
      }
    }
    if (!has_kind) fail(block.location, "perturbation '" + block.id + "' is missing 'kind'");
    if (!has_target) fail(block.location, "perturbation '" + block.id + "' is missing 'target'");
    try {
      p.validate();
    } catch (const SpecError& e) {
      fail(block.location, e.what());
    }
    plan.push_back(std::move(p));
  }
  return plan;
}

std::vector<Perturbation> parse_plan_file(const std::filesystem::path& path, std::uint64_t default_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot read plan '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str(), default_seed);
}

namespace {

void flatten(const Establishment& node, std::set<std::string>& seen, std::vector<StatementStatus>& out) {
  for (const auto& child : node.premise_results) flatten(child, seen, out);
  if (seen.insert(node.statement_id).second) out.push_back({node.statement_id, node.status, node.message});
}

bool caught_in(const Establishment& node, bool is_root) {
  if (is_root && node.status == EstablishmentStatus::refuted) return true;
  if (!is_root && !node.established()) return true;
  return std::any_of(node.premise_results.begin(), node.premise_results.end(),
                     [](const Establishment& c) { return caught_in(c, false); });
}

}  // namespace

std::vector<StatementStatus> flatten_statuses(const EvidenceReport& report) {
  std::set<std::string> seen;
  std::vector<StatementStatus> out;
  for (const auto& root : report.roots) flatten(root, seen, out);
  return out;
}

SensitivityReport run_sensitivity(const AnalysisSpec& spec, const DataContext& data,
                                  const std::vector<Perturbation>& plan, InteractionPolicy policy,
                                  const EngineOptions& options) {
  if (plan.empty()) throw SpecError("sensitivity plan is empty");
  if (policy.mode == InteractionMode::prompt) policy.mode = InteractionMode::assume_yes;
  policy.transcript_sink.reset();

  SensitivityReport out;
  {
    Interaction interaction(policy);
    out.baseline = establish(spec, data, interaction, options);
  }

  for (const auto& original : plan) {
    Perturbation p = original;
    const DatasetSpec* ds = spec.find_dataset(p.target.table);
    if (!ds) throw SpecError("perturbation '" + p.id + "' targets '" + p.target.table + "', which is not a dataset");
    if (p.kind == PerturbationKind::inject_sentinel && !p.value && !ds->conventions.numeric_sentinels.empty()) {
      p.value = ds->conventions.numeric_sentinels.front();
    }
    const Table perturbed = perturb_table(data.table(ds->id), p);
    const DataContext variant = data.with_dataset(ds->id, perturbed);

    EngineOptions run_options = options;
    run_options.out_dir = options.out_dir / "sensitivity" / p.id;
    Interaction interaction(policy);

    PerturbationResult result;
    result.perturbation = p;
    result.report = establish(spec, variant, interaction, run_options);
    result.statuses = flatten_statuses(result.report);
    result.caught = std::any_of(result.report.roots.begin(), result.report.roots.end(),
                                [](const Establishment& r) { return caught_in(r, true); });
    for (const auto& s : result.statuses) {
      if (s.status == EstablishmentStatus::refuted) result.caught_by.push_back(s.id);
    }
    if (!result.caught) out.uncaught.push_back(p.id);
    out.results.push_back(std::move(result));
  }
  return out;
}

SensitivityReport run_sensitivity(const AnalysisSpec& spec, const std::filesystem::path& data_root,
                                  const std::vector<Perturbation>& plan, InteractionPolicy policy,
                                  const EngineOptions& options) {
  return run_sensitivity(spec, DataContext::load(spec, data_root), plan, std::move(policy), options);
}

nlohmann::ordered_json to_json(const SensitivityReport& report, bool include_durations) {
  nlohmann::ordered_json j = to_json(report.baseline, include_durations);
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    nlohmann::ordered_json run;
    run["id"] = r.perturbation.id;
    run["kind"] = to_string(r.perturbation.kind);
    run["target"] = describe(Binding{r.perturbation.target});
    run["seed"] = r.perturbation.seed;
    run["data_hashes"] = r.report.data_hashes;
    run["caught"] = r.caught;
    run["caught_by"] = r.caught_by;
    run["statuses"] = nlohmann::ordered_json::array();
    for (const auto& s : r.statuses) {
      run["statuses"].push_back({{"id", s.id}, {"status", to_string(s.status)}, {"message", s.message}});
    }
    runs.push_back(std::move(run));
  }
  j["sensitivity"] = {{"perturbations", std::move(runs)}, {"uncaught", report.uncaught}};
  return j;
}

std::string render_summary(const SensitivityReport& report) {
  std::ostringstream os;
  os << "baseline: " << (report.baseline.established ? "established" : "not established") << "\n";
  for (const auto& r : report.results) {
    os << "[" << (r.caught ? "caught" : "UNCAUGHT") << "] " << r.perturbation.id << " ("
       << to_string(r.perturbation.kind) << " on " << describe(Binding{r.perturbation.target}) << ")";
    if (!r.caught_by.empty()) {
      os << " by ";
      for (std::size_t i = 0; i < r.caught_by.size(); ++i) {
        const auto& id = r.caught_by[i];
        auto it = std::find_if(r.statuses.begin(), r.statuses.end(),
                               [&](const StatementStatus& s) { return s.id == id; });
        os << (i ? ", " : "") << id << " \"" << it->message << "\"";
      }
    }
    os << "\n";
  }
  if (!report.uncaught.empty()) {
    os << "UNCAUGHT perturbations (root still established):";
    for (const auto& id : report.uncaught) os << " " << id;
    os << "\n";
  }
  return os.str();
}

}  // namespace veristat
