#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "veristat/checks.hpp"
#include "veristat/error.hpp"
#include "veristat/join.hpp"

using namespace veristat;

namespace {

const MissingConventions kConv{};

Table data1() {
  return load_table_text("country,value1,year\nUS,92,2000\nUS,117,2001\nUS,93,2002\n", kConv);
}
Table data2() {
  return load_table_text("country,value2,year\nUSA,48.74391,2000\nUSA,49.44440,2001\nUSA,50.21478,2002\n", kConv);
}
const std::vector<std::string> kKeys{"country", "year"};

bool all_absent(const Column& c) { return c.absent_count() == c.size(); }

using KeyTuple = std::pair<std::optional<double>, std::optional<double>>;

std::multiset<KeyTuple> key_multiset(const Table& t) {
  std::multiset<KeyTuple> out;
  for (std::size_t r = 0; r < t.n_rows(); ++r) out.insert({t.column("k1").numbers()[r], t.column("k2").numbers()[r]});
  return out;
}

bool contains(const std::multiset<KeyTuple>& big, const std::multiset<KeyTuple>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

TEST(Join, PaperScenarioCounts) {
  const Table full = join_tables(data1(), data2(), kKeys, JoinKind::full);
  EXPECT_EQ(full.n_rows(), 6u);
  const Table inner = join_tables(data1(), data2(), kKeys, JoinKind::inner);
  EXPECT_EQ(inner.n_rows(), 0u);
  const Table left = join_tables(data1(), data2(), kKeys, JoinKind::left);
  EXPECT_EQ(left.n_rows(), 3u);
  EXPECT_TRUE(all_absent(left.column("value2")));
  EXPECT_EQ(left.column("value1").absent_count(), 0u);
  const Table right = join_tables(data1(), data2(), kKeys, JoinKind::right);
  EXPECT_EQ(right.n_rows(), 3u);
  EXPECT_TRUE(all_absent(right.column("value1")));
  EXPECT_EQ(right.column("country").texts()[0], "USA");
}

TEST(Join, ColumnOrderIsKeysThenLeftThenRight) {
  const Table left = join_tables(data1(), data2(), kKeys, JoinKind::left);
  EXPECT_EQ(left.column_names(), (std::vector<std::string>{"country", "year", "value1", "value2"}));
}

TEST(Join, ShapeCheckCatchesSilentJoinFailure) {
  ShapeExpectation e;
  e.n_rows = 3;
  e.n_cols = 4;
  e.column_names = std::vector<std::string>{"country", "value1", "year", "value2"};
  e.no_missing_in = {"value1", "value2"};
  EXPECT_EQ(check_table_shape(join_tables(data1(), data2(), kKeys, JoinKind::left), e).message,
            "NA values in 'value1' or 'value2'");
  EXPECT_EQ(check_table_shape(join_tables(data1(), data2(), kKeys, JoinKind::full), e).message,
            "incorrect number of rows");
  const Table fixed = load_table_text("country,value2,year\nUS,48.74391,2000\nUS,49.44440,2001\nUS,50.21478,2002\n", kConv);
  EXPECT_TRUE(check_table_shape(join_tables(data1(), fixed, kKeys, JoinKind::left), e).passed());
}

TEST(Join, IdenticalSingleRowTablesSelfMatch) {
  const Table a = load_table_text("k,v\n1,2\n", kConv);
  const Table b = load_table_text("k,w\n1,3\n", kConv);
  const Table j = join_tables(a, b, {"k"}, JoinKind::inner);
  ASSERT_EQ(j.n_rows(), 1u);
  EXPECT_EQ(j.column("w").numbers()[0], 3.0);
}

TEST(Join, DuplicateKeysGiveCartesianProduct) {
  const Table a = load_table_text("k,v\n1,10\n1,11\n2,12\n", kConv);
  const Table b = load_table_text("k,w\n1,20\n1,21\n1,22\n", kConv);
  EXPECT_EQ(join_tables(a, b, {"k"}, JoinKind::inner).n_rows(), 6u);
  EXPECT_EQ(join_tables(a, b, {"k"}, JoinKind::left).n_rows(), 7u);
}

TEST(Join, AbsentKeysNeverMatch) {
  const Table a = load_table_text("k,v\nNA,1\n", kConv);
  const Table b = load_table_text("k,w\nNA,2\n", kConv);
  EXPECT_EQ(join_tables(a, b, {"k"}, JoinKind::inner).n_rows(), 0u);
  EXPECT_EQ(join_tables(a, b, {"k"}, JoinKind::full).n_rows(), 2u);
}

TEST(Join, Errors) {
  const Table a = load_table_text("k,v\n1,2\n", kConv);
  EXPECT_THROW(join_tables(a, load_table_text("j,w\n1,2\n", kConv), {"k"}, JoinKind::inner), SpecError);
  EXPECT_THROW(join_tables(a, load_table_text("k,v\n1,2\n", kConv), {"k"}, JoinKind::inner), DisambiguationError);
  EXPECT_THROW(join_tables(a, load_table_text("k,w\nx,2\n", kConv), {"k"}, JoinKind::inner), SpecError);
  EXPECT_THROW(join_tables(a, a, {}, JoinKind::inner), SpecError);
}

TEST(Join, KindNames) {
  for (auto k : {JoinKind::inner, JoinKind::left, JoinKind::right, JoinKind::full}) {
    EXPECT_EQ(parse_join_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_join_kind("outer"), std::nullopt);
}

// Multiset containment of key tuples, row-count identities, and the left-count rule.
TEST(JoinProperty, ContainmentAndCounts) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const bool unique = trial % 2 == 0;
    auto make = [&](const char* value_name, int rows) {
      std::vector<std::optional<double>> k1, k2, v;
      std::set<std::pair<int, int>> used;
      for (int r = 0; r < rows; ++r) {
        int a = static_cast<int>(rng() % 4), b = static_cast<int>(rng() % 3);
        if (unique && !used.insert({a, b}).second) continue;
        k1.emplace_back(a);
        k2.emplace_back(b);
        v.emplace_back(r);
      }
      return Table({Column("k1", k1), Column("k2", k2), Column(value_name, v)});
    };
    const Table l = make("v", static_cast<int>(rng() % 8));
    const Table r = make("w", static_cast<int>(rng() % 8));
    const std::vector<std::string> keys{"k1", "k2"};
    const Table in = join_tables(l, r, keys, JoinKind::inner);
    const Table le = join_tables(l, r, keys, JoinKind::left);
    const Table ri = join_tables(l, r, keys, JoinKind::right);
    const Table fu = join_tables(l, r, keys, JoinKind::full);
    ASSERT_TRUE(contains(key_multiset(le), key_multiset(in)));
    ASSERT_TRUE(contains(key_multiset(fu), key_multiset(le)));
    ASSERT_TRUE(contains(key_multiset(ri), key_multiset(in)));
    ASSERT_TRUE(contains(key_multiset(fu), key_multiset(ri)));
    if (unique) {
      const auto lk = key_multiset(l), rk = key_multiset(r);
      std::size_t left_only = 0, right_only = 0;
      for (const auto& k : lk) left_only += rk.count(k) == 0;
      for (const auto& k : rk) right_only += lk.count(k) == 0;
      ASSERT_EQ(fu.n_rows(), left_only + right_only + in.n_rows());
      ASSERT_EQ(le.n_rows(), l.n_rows());
    }
  }
}
