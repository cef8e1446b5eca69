#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spec_gen.hpp"
#include "veristat/error.hpp"
#include "veristat/spec.hpp"

using namespace veristat;
using ::testing::HasSubstr;

namespace {

const char* kMeanSpec = R"(
# mean of the first column, with three premises
dataset mean_data {
  source = "mean46.csv"
  missing = ["NA"]
  sentinels = [-99]
}
statement no_missing { kind = no_missing; on = mean_data.col[1] }
statement median_close_to {
  kind = median_close_to
  on = mean_data.col[1]
  target = 4.6
}
statement fivenum_no_outliers { kind = fivenum_no_outliers; on = mean_data.col[1] }
statement mean_is {
  kind = mean_equals
  on = mean_data.col[1]
  target = 4.6
  premises = [
    no_missing,
    median_close_to,
    fivenum_no_outliers,
  ]
}
)";

ParseError parse_error_of(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ParseError for:\n" << text;
  return ParseError("none", 0, 0);
}

}  // namespace

TEST(ParseSpec, MeanAnalysis) {
  const AnalysisSpec spec = parse_spec(kMeanSpec);
  ASSERT_EQ(spec.datasets.size(), 1u);
  EXPECT_EQ(spec.datasets[0].conventions.numeric_sentinels, std::vector<double>{-99});
  ASSERT_EQ(spec.statements.size(), 4u);
  EXPECT_EQ(spec.roots, std::vector<std::string>{"mean_is"});
  EXPECT_FALSE(spec.explicit_roots);
  const auto& mean_is = spec.statement("mean_is");
  EXPECT_EQ(mean_is.kind, StatementKind::mean_equals);
  EXPECT_EQ(mean_is.premises, (std::vector<std::string>{"no_missing", "median_close_to", "fivenum_no_outliers"}));
  EXPECT_EQ(std::get<ColumnBinding>(mean_is.binding), (ColumnBinding{"mean_data", std::size_t{1}}));
  EXPECT_EQ(mean_is.number("target"), 4.6);
  EXPECT_EQ(mean_is.number("rel_tol"), 1.5e-8);  // kind default
  EXPECT_EQ(mean_is.optional_number("round_digits"), std::nullopt);
  EXPECT_TRUE(lint_spec(spec).empty());
}

TEST(ParseSpec, EmptySpecHasNoRoots) {
  const AnalysisSpec spec = parse_spec("# nothing here\n");
  EXPECT_TRUE(spec.statements.empty());
  EXPECT_TRUE(spec.roots.empty());
  EXPECT_TRUE(lint_spec(spec).empty());
}

TEST(ParseSpec, ExplicitRoots) {
  const AnalysisSpec spec = parse_spec(std::string(kMeanSpec) + "roots = [no_missing, mean_is]\n");
  EXPECT_TRUE(spec.explicit_roots);
  EXPECT_EQ(spec.roots, (std::vector<std::string>{"no_missing", "mean_is"}));
}

TEST(ParseSpec, UndeclaredPremiseNamesTheId) {
  const auto e = parse_error_of("dataset d { source = \"d.csv\" }\nstatement a {\n  kind = all_of\n  premises = [ghost]\n}\n");
  EXPECT_THAT(e.what(), HasSubstr("'ghost'"));
  EXPECT_EQ(e.line(), 4);
}

TEST(ParseSpec, LocatedErrors) {
  EXPECT_EQ(parse_error_of("statement a { kind = teleport }").line(), 1);
  EXPECT_THAT(parse_error_of("statement a { kind = teleport }").what(), HasSubstr("teleport"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\ndataset d { source = \"y\" }").what(), HasSubstr("duplicate id"));
  EXPECT_THAT(parse_error_of("dataset d {\n  source = \"x\"\n  colour = 3\n}").what(), HasSubstr("unknown key 'colour'"));
  EXPECT_EQ(parse_error_of("dataset d {\n  source = \"x\"\n  colour = 3\n}").line(), 3);
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement m { kind = mean_equals; on = d.col[1] }").what(),
              HasSubstr("missing parameter 'target'"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement m { kind = mean_equals; on = e.col[1]; target = 1 }").what(),
              HasSubstr("unknown dataset 'e'"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement t { kind = table_shape; on = d }").what(),
              HasSubstr("no expectation"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement m { kind = median_close_to; on = d.col[0]; target = 1 }").what(),
              HasSubstr("positive integer"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement m { kind = median_close_to; on = d.a; target = 1; window = -1 }").what(),
              HasSubstr("must be positive"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"x\" }\nstatement m { kind = no_missing; on = d.a; target = 1 }").what(),
              HasSubstr("unknown parameter 'target'"));
  EXPECT_THAT(parse_error_of("dataset d { source = \"unterminated }").what(), HasSubstr("string"));
  EXPECT_THROW(parse_spec("statement a { kind = all_of }\nroots = [b]"), ParseError);
  EXPECT_THROW(parse_spec("flavour = 3"), ParseError);
}

TEST(ParseSpec, DerivationsMustReferenceEarlierTables) {
  EXPECT_THROW(parse_spec("derive j { join = left; left = a; right = b; keys = [\"k\"] }\n"
                          "dataset a { source = \"a.csv\" }\ndataset b { source = \"b.csv\" }"),
               ParseError);
  const AnalysisSpec ok = parse_spec("dataset a { source = \"a.csv\" }\ndataset b { source = \"b.csv\" }\n"
                                     "derive j { join = full; left = a; right = b; keys = [\"k\"] }\n"
                                     "statement s { kind = table_shape; on = j; n_rows = 3 }");
  EXPECT_EQ(ok.derivations.at(0).join, JoinKind::full);
  EXPECT_EQ(&ok.origin_dataset("j"), &ok.datasets[0]);
}

TEST(Lint, CycleIsAnError) {
  const AnalysisSpec spec = parse_spec("statement a { kind = all_of; premises = [b] }\n"
                                       "statement b { kind = all_of; premises = [a] }\n");
  const auto findings = lint_spec(spec);
  ASSERT_TRUE(has_errors(findings));
  EXPECT_THAT(to_string(findings[0]), HasSubstr("premise cycle"));
}

TEST(Lint, MedianWithoutNoMissingWarns) {
  const AnalysisSpec spec = parse_spec("dataset d { source = \"d.csv\" }\n"
                                       "statement m { kind = median_close_to; on = d.col[1]; target = 4.6 }\n");
  const auto findings = lint_spec(spec);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].severity, Severity::warning);
  EXPECT_EQ(findings[0].statement_id, "m");
  EXPECT_FALSE(has_errors(findings));
}

TEST(Lint, NoMissingOnAnotherColumnDoesNotCover) {
  const AnalysisSpec spec = parse_spec("dataset d { source = \"d.csv\" }\n"
                                       "statement nm { kind = no_missing; on = d.col[2] }\n"
                                       "statement m { kind = median_close_to; on = d.col[1]; target = 4.6; premises = [nm] }\n");
  EXPECT_EQ(lint_spec(spec).size(), 1u);
}

TEST(Lint, LaterSiblingDoesNotCover) {
  const AnalysisSpec spec = parse_spec("dataset d { source = \"d.csv\" }\n"
                                       "statement nm { kind = no_missing; on = d.col[1] }\n"
                                       "statement m { kind = median_close_to; on = d.col[1]; target = 4.6 }\n"
                                       "statement top { kind = all_of; premises = [m, nm] }\n");
  EXPECT_EQ(lint_spec(spec).size(), 1u);
}

TEST(Lint, UnreachableStatementWarns) {
  const AnalysisSpec spec = parse_spec("statement a { kind = all_of }\nstatement b { kind = all_of }\nroots = [a]\n");
  const auto findings = lint_spec(spec);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].statement_id, "b");
}

TEST(Kinds, CatalogIsConsistent) {
  for (auto k : all_statement_kinds()) {
    EXPECT_EQ(parse_statement_kind(to_string(k)), k);
    EXPECT_EQ(kind_info(k).kind, k);
    EXPECT_FALSE(kind_info(k).summary.empty());
  }
  EXPECT_TRUE(kind_info(StatementKind::median_close_to).needs_complete_column);
  EXPECT_TRUE(kind_info(StatementKind::fivenum_no_outliers).needs_complete_column);
  EXPECT_FALSE(kind_info(StatementKind::mean_equals).needs_complete_column);
}

TEST(SpecText, CanonicalFormIgnoresLayout) {
  const AnalysisSpec a = parse_spec(kMeanSpec);
  const AnalysisSpec b = parse_spec(to_text(a));
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_text(a), to_text(b));
}

// parse(to_text(parse(s))) == parse(s) over generated specs covering every kind.
TEST(SpecProperty, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto generated = testing_support::generate_case(seed);
    const AnalysisSpec spec = parse_spec(generated.spec_text);
    const AnalysisSpec again = parse_spec(to_text(spec));
    ASSERT_EQ(spec, again) << to_text(spec);
    ASSERT_EQ(lint_spec(spec), lint_spec(again));
    ASSERT_EQ(lint_spec(spec), lint_spec(spec));  // deterministic
  }
}

// Lint reports a cycle exactly when the transitive closure has a self-loop.
TEST(SpecProperty, CycleDetectionMatchesTransitiveClosure) {
  std::mt19937 rng(77);
  int cyclic = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
      text += "statement s" + std::to_string(i) + " { kind = all_of; premises = [";
      bool first = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (rng() % 5 == 0) {
          adj[i][j] = true;
          text += (first ? "" : ", ") + std::string("s") + std::to_string(j);
          first = false;
        }
      }
      text += "] }\n";
    }
    const bool expect = oracle::has_cycle(adj);
    cyclic += expect;
    ASSERT_EQ(has_errors(lint_spec(parse_spec(text))), expect) << text;
  }
  EXPECT_GT(cyclic, 20);
}

TEST(Document, PlanBlocksParseWithTheSameGrammar) {
  const Document doc = parse_document("perturb p1 { kind = shift; target = d.col[1]; delta = 0.1 }\n");
  ASSERT_EQ(doc.blocks.size(), 1u);
  EXPECT_EQ(doc.blocks[0].keyword, "perturb");
  ASSERT_NE(doc.blocks[0].find("delta"), nullptr);
  EXPECT_EQ(doc.blocks[0].find("delta")->value.number, 0.1);
  EXPECT_EQ(doc.blocks[0].find("target")->value.column, ColumnSelector{std::size_t{1}});
}
