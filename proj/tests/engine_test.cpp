#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spec_gen.hpp"
#include "veristat/engine.hpp"
#include "veristat/error.hpp"
#include "veristat/hash.hpp"
#include "veristat/inspect.hpp"

using namespace veristat;
using testing_support::TempDir;
using ::testing::HasSubstr;

namespace {

InteractionPolicy policy(InteractionMode mode = InteractionMode::assume_yes) {
  InteractionPolicy p;
  p.mode = mode;
  return p;
}

Table mean_table(std::vector<double> v) {
  return load_table_text(fixtures::one_column_csv("value", v), MissingConventions{});
}

EvidenceReport run(const AnalysisSpec& spec, const DataContext& data, const std::filesystem::path& out,
                   InteractionMode mode = InteractionMode::assume_yes) {
  Interaction interaction(policy(mode));
  EngineOptions options;
  options.out_dir = out;
  return establish(spec, data, interaction, options);
}

const Establishment* find(const Establishment& node, const std::string& id) {
  if (node.statement_id == id) return &node;
  for (const auto& c : node.premise_results) {
    if (auto* hit = find(c, id)) return hit;
  }
  return nullptr;
}

void visit(const Establishment& node, const std::function<void(const Establishment&)>& fn) {
  fn(node);
  for (const auto& c : node.premise_results) visit(c, fn);
}

// Status and message tree with ids removed.
std::string shape_of(const Establishment& node) {
  const std::string message = node.status == EstablishmentStatus::blocked ? "" : node.message;
  std::string s = std::string(to_string(node.status)) + "(" + message;
  for (const auto& c : node.premise_results) s += "," + shape_of(c);
  return s + ")";
}

}  // namespace

TEST(Establish, MeanAnalysisEstablishesOnConformingData) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec(fixtures::kMeanSpec);
  const auto data = DataContext::from_tables(spec, {{"mean_data", mean_table(fixtures::mean46_values(1))}});
  const EvidenceReport report = run(spec, data, dir.path());
  ASSERT_EQ(report.roots.size(), 1u);
  EXPECT_TRUE(report.established);
  int count = 0;
  visit(report.roots[0], [&](const Establishment& e) {
    EXPECT_TRUE(e.established()) << e.statement_id << ": " << e.message;
    ++count;
  });
  EXPECT_EQ(count, 4);
  EXPECT_EQ(report.execution_log,
            (std::vector<std::string>{"no_missing", "median_close_to", "fivenum_no_outliers", "mean_is"}));
}

TEST(Establish, SentinelBlocksTheMean) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec(fixtures::kMeanSpec);
  auto values = fixtures::mean46_values(1);
  values[17] = -99;
  const auto data = DataContext::from_tables(spec, {{"mean_data", mean_table(values)}});
  const EvidenceReport report = run(spec, data, dir.path());
  EXPECT_FALSE(report.established);
  const auto& root = report.roots[0];
  EXPECT_EQ(root.status, EstablishmentStatus::blocked);
  EXPECT_EQ(root.message, "blocked by premise 'no_missing'");
  EXPECT_EQ(find(root, "no_missing")->status, EstablishmentStatus::refuted);
  EXPECT_EQ(find(root, "no_missing")->message, "-99 missing values present");
  const auto& log = report.execution_log;
  EXPECT_EQ(std::count(log.begin(), log.end(), "mean_is"), 0);
}

TEST(Establish, AbsentCellRefutesCompleteDataChecks) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec(fixtures::kMeanSpec);
  const Table t = load_table_text("value\n4.6\nNA\n4.6\n", MissingConventions{});
  const EvidenceReport report = run(spec, DataContext::from_tables(spec, {{"mean_data", t}}), dir.path());
  EXPECT_EQ(find(report.roots[0], "no_missing")->message, "NA values present");
  EXPECT_EQ(find(report.roots[0], "median_close_to")->status, EstablishmentStatus::refuted);
  EXPECT_EQ(report.roots[0].status, EstablishmentStatus::blocked);
}

TEST(Establish, ZeroRootsIsVacuouslyEstablished) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec("");
  const EvidenceReport report = run(spec, DataContext::from_tables(spec, {}), dir.path());
  EXPECT_TRUE(report.established);
  EXPECT_TRUE(report.roots.empty());
  EXPECT_EQ(to_json(report)["overall"], "established");
}

TEST(Establish, LintErrorsAreRejected) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec("statement a { kind = all_of; premises = [b] }\n"
                                       "statement b { kind = all_of; premises = [a] }\nroots = [a]\n");
  EXPECT_THROW(run(spec, DataContext::from_tables(spec, {}), dir.path()), SpecError);
}

TEST(Establish, MissingDataFileSkipsAndReportsIssue) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec(fixtures::kMeanSpec);
  const EvidenceReport report = establish(spec, dir.path(), policy());
  EXPECT_FALSE(report.established);
  EXPECT_EQ(find(report.roots[0], "no_missing")->status, EstablishmentStatus::skipped);
  ASSERT_FALSE(report.issues.empty());
  EXPECT_EQ(report.issues[0].category, ReportIssue::Category::data);
  // The leaf checks were attempted; the root never was.
  EXPECT_EQ(report.execution_log,
            (std::vector<std::string>{"no_missing", "median_close_to", "fivenum_no_outliers"}));
}

TEST(Establish, JoinScenarioFromFiles) {
  TempDir dir;
  dir.write("data1.csv", fixtures::kData1);
  dir.write("data2.csv", fixtures::kData2);
  const EvidenceReport left = establish(parse_spec(fixtures::join_spec("left")), dir.path(), policy());
  EXPECT_EQ(left.roots[0].message, "NA values in 'value1' or 'value2'");
  const EvidenceReport full = establish(parse_spec(fixtures::join_spec("full")), dir.path(), policy());
  EXPECT_EQ(full.roots[0].message, "incorrect number of rows");
  EXPECT_EQ(left.data_hashes.at("data1"), sha256_hex(fixtures::kData1));
}

TEST(Establish, DegenerateFitRefutesBoundStatements) {
  TempDir dir;
  dir.write("slr.csv", "x,y\n0,1\n1,3\n2,5\n3,7\n");
  const EvidenceReport report = establish(parse_spec(fixtures::kSlrSpec), dir.path(), policy());
  const auto* node = find(report.roots[0], "no_nonlinearity");
  ASSERT_NE(node, nullptr);
  EXPECT_EQ(node->status, EstablishmentStatus::refuted);
  EXPECT_THAT(node->message, HasSubstr("residual sum of squares is zero"));
}

TEST(Establish, ReplayAnswersDrivePlotStatements) {
  TempDir dir;
  dir.write("slr.csv", fixtures::xy_csv(fixtures::slr_data(3)));
  dir.write("answers.txt", "histogram_ok y\nfitted_vs_residual_ok n\n");
  InteractionPolicy p = policy(InteractionMode::replay);
  p.replay_source = dir.path() / "answers.txt";
  EngineOptions options;
  options.out_dir = dir.path() / "out";
  const EvidenceReport report = establish(parse_spec(fixtures::kSlrSpec), dir.path(), p, options);
  EXPECT_EQ(find(report.roots[0], "fitted_vs_residual_ok")->message, "problem with residuals vs. fitted plot");
  EXPECT_EQ(find(report.roots[0], "plots_look_okay")->status, EstablishmentStatus::blocked);
  ASSERT_EQ(report.transcript.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "histogram_ok.residual_histogram.svg"));
}

TEST(Establish, MissingReplayAnswerSkipsWithInteractionIssue) {
  TempDir dir;
  dir.write("slr.csv", fixtures::xy_csv(fixtures::slr_data(3)));
  dir.write("answers.txt", "histogram_ok y\n");
  InteractionPolicy p = policy(InteractionMode::replay);
  p.replay_source = dir.path() / "answers.txt";
  EngineOptions options;
  options.out_dir = dir.path() / "out";
  const EvidenceReport report = establish(parse_spec(fixtures::kSlrSpec), dir.path(), p, options);
  EXPECT_EQ(find(report.roots[0], "fitted_vs_residual_ok")->status, EstablishmentStatus::skipped);
  ASSERT_FALSE(report.issues.empty());
  EXPECT_EQ(report.issues.back().category, ReportIssue::Category::interaction);
}

TEST(Report, JsonLayoutAndFingerprints) {
  TempDir dir;
  const AnalysisSpec spec = parse_spec(fixtures::kMeanSpec);
  const auto data = DataContext::from_tables(spec, {{"mean_data", mean_table(fixtures::mean46_values(1))}});
  const auto j = to_json(run(spec, data, dir.path()));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "spec_hash", "data_hashes", "roots", "overall",
                                            "transcript"}));
  EXPECT_EQ(j["roots"][0]["id"], "mean_is");
  EXPECT_EQ(j["roots"][0]["premises"].size(), 3u);
  EXPECT_EQ(j["spec_hash"], spec_fingerprint(parse_spec(std::string("# a comment\n") + fixtures::kMeanSpec)));
  EXPECT_NE(j["spec_hash"], spec_fingerprint(parse_spec(fixtures::join_spec("left"))));
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(sha256_file("/nonexistent/x"), LoadError);
}

// Two runs over the same inputs give byte-identical reports once durations are dropped.
TEST(EngineProperty, Deterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TempDir dir;
    const auto generated = testing_support::generate_case(seed);
    dir.write("d.csv", generated.csv);
    const AnalysisSpec spec = parse_spec(generated.spec_text);
    const auto data = DataContext::load(spec, dir.path());
    const auto a = to_json(run(spec, data, dir.path() / "a"), false).dump();
    const auto b = to_json(run(spec, data, dir.path() / "a"), false).dump();
    ASSERT_EQ(a, b);
  }
}

// Sharing one premise between two parents reads the same as two identical copies.
TEST(EngineProperty, MemoizationIsTransparent) {
  TempDir dir;
  const std::string head = "dataset mean_data { source = \"m.csv\" }\n";
  const AnalysisSpec shared = parse_spec(head +
                                         "statement p { kind = no_missing; on = mean_data.col[1] }\n"
                                         "statement a { kind = all_of; premises = [p] }\n"
                                         "statement b { kind = all_of; premises = [p] }\n"
                                         "statement top { kind = all_of; premises = [a, b] }\n");
  const AnalysisSpec copied = parse_spec(head +
                                         "statement p1 { kind = no_missing; on = mean_data.col[1] }\n"
                                         "statement p2 { kind = no_missing; on = mean_data.col[1] }\n"
                                         "statement a { kind = all_of; premises = [p1] }\n"
                                         "statement b { kind = all_of; premises = [p2] }\n"
                                         "statement top { kind = all_of; premises = [a, b] }\n");
  for (const char* csv : {"v\n1\n2\n", "v\n1\n-99\n", "v\nNA\n2\n"}) {
    const Table t = load_table_text(csv, MissingConventions{});
    const auto r1 = run(shared, DataContext::from_tables(shared, {{"mean_data", t}}), dir.path());
    const auto r2 = run(copied, DataContext::from_tables(copied, {{"mean_data", t}}), dir.path());
    EXPECT_EQ(shape_of(r1.roots[0]), shape_of(r2.roots[0]));
    EXPECT_EQ(std::count(r1.execution_log.begin(), r1.execution_log.end(), "p"), 1);
  }
}

// Soundness: established nodes re-check in isolation and have established children;
// blocked nodes never ran their own check; the static tree matches the evaluated one.
TEST(EngineProperty, SoundnessOverGeneratedSpecs) {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    TempDir dir;
    const auto generated = testing_support::generate_case(seed);
    dir.write("d.csv", generated.csv);
    const AnalysisSpec spec = parse_spec(generated.spec_text);
    const auto data = DataContext::load(spec, dir.path());
    const auto mode = seed % 2 ? InteractionMode::assume_yes : InteractionMode::assume_no;
    const EvidenceReport report = run(spec, data, dir.path() / "out", mode);
    std::set<std::string> executed(report.execution_log.begin(), report.execution_log.end());
    ASSERT_EQ(executed.size(), report.execution_log.size()) << "a check ran twice";
    for (std::size_t i = 0; i < report.roots.size(); ++i) {
      visit(report.roots[i], [&](const Establishment& e) {
        const auto& st = spec.statement(e.statement_id);
        if (e.established()) {
          for (const auto& c : e.premise_results) ASSERT_TRUE(c.established());
          if (st.kind != StatementKind::all_of) {
            Interaction fresh(policy(mode));
            EngineOptions options;
            options.out_dir = dir.path() / "recheck";
            ASSERT_TRUE(execute_check(spec, st, data, fresh, options).passed()) << e.statement_id;
          }
        }
        if (e.status == EstablishmentStatus::blocked) ASSERT_FALSE(executed.count(e.statement_id));
      });
      std::vector<std::string> dynamic_ids, static_ids;
      visit(report.roots[i], [&](const Establishment& e) { dynamic_ids.push_back(e.statement_id); });
      std::function<void(const PremiseTree&)> walk = [&](const PremiseTree& t) {
        static_ids.push_back(t.id);
        for (const auto& c : t.children) walk(c);
      };
      walk(premise_tree(spec, report.roots[i].statement_id));
      ASSERT_EQ(dynamic_ids, static_ids);
    }
  }
}
