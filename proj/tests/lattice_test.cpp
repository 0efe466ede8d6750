#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include "fixtures.hpp"

using namespace simpson;

TEST_CASE("substitute matches the worked examples") {
  BaseTable t = fixtures::table1();
  Population a1 = parse_population(t, "(a1,*,*)");
  CHECK(substitute(t, a1, 1, 0) == parse_population(t, "(a1,b1,*)"));
  // substituting a slot with its current value is the identity
  Population s = parse_population(t, "(a1,b1,*)");
  CHECK(substitute(t, s, 0, s[0]) == s);
  CHECK(substitute(t, root_population(t), 0, 1) == parse_population(t, "(a2,*,*)"));
  CHECK_THROWS_AS(substitute(t, s, 7, 0), error);
  CHECK_THROWS_AS(substitute(t, s, 0, 99), error);
}

TEST_CASE("relation classifies parent, sibling, ancestor, other") {
  BaseTable t = fixtures::table1();
  auto P = [&](const char* s) { return parse_population(t, s); };
  CHECK(relation(P("(a1,*,*)"), P("(a1,b1,*)")) == Relation::Parent);
  CHECK(relation(P("(a1,b1,*)"), P("(a1,*,*)")) == Relation::Child);
  CHECK(relation(P("(a1,b1,*)"), P("(a1,b1,*)")) == Relation::Equal);
  CHECK(relation(P("(a1,b1,*)"), P("(a2,b2,*)")) == Relation::Other);
  CHECK(relation(P("(a1,b1,*)"), P("(a1,b2,*)")) == Relation::Sibling);
  CHECK(relation(P("(a1,*,*)"), P("(a1,b1,c1)")) == Relation::Ancestor);
  CHECK(relation(P("(a1,b1,c1)"), P("(a1,*,*)")) == Relation::Descendant);
  CHECK_THROWS_AS(relation(P("(a1,*,*)"), Population{0, 0, 0, 0}), error);
}

TEST_CASE("coverage matches the paper examples") {
  BaseTable t1 = fixtures::table1();
  auto c = coverage(t1, parse_population(t1, "(a1,b1,*)"));
  CHECK(c.record_ids == std::vector<std::uint32_t>{0, 1});
  CHECK(coverage(t1, root_population(t1)).size() == 7);

  BaseTable t2 = fixtures::table2();
  auto c2 = coverage(t2, parse_population(t2, "(a1,*,*,*)"));
  CHECK(c2.record_ids == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("freq_stat matches the paper examples") {
  BaseTable t1 = fixtures::table1();
  auto f = freq_stat(t1, coverage(t1, parse_population(t1, "(*,b1,*)")), 0);
  CHECK(f.positives == 2);
  CHECK(f.total == 4);

  BaseTable t3 = fixtures::table3();
  auto f3 = freq_stat(t3, coverage(t3, parse_population(t3, "(*,b1,*,*)")), 0);
  CHECK(f3.positives == 2);
  CHECK(f3.total == 6);

  // all-zero-label coverage
  auto z = freq_stat(t1, coverage(t1, parse_population(t1, "(a1,*,*)")), 0);
  CHECK(z.positives == 0);

  Coverage empty;
  CHECK_THROWS_AS(freq_stat(t1, empty, 0), error);
}

TEST_CASE("compare_stats uses exact cross-multiplication") {
  CHECK(compare_stats({2, 4}, {2, 3}) == -1);
  CHECK(compare_stats({3, 7}, {3, 7}) == 0);
  CHECK(compare_stats({1, 2}, {0, 5}) == 1);
}

TEST_CASE("compare_stats agrees with arbitrary-precision arithmetic") {
  using big = boost::multiprecision::cpp_int;
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    FreqStat a{static_cast<std::int64_t>(rng.bounded(1u << 30)),
               1 + static_cast<std::int64_t>(rng.bounded(1u << 30))};
    FreqStat b{static_cast<std::int64_t>(rng.bounded(1u << 30)),
               1 + static_cast<std::int64_t>(rng.bounded(1u << 30))};
    a.positives = std::min(a.positives, a.total);
    b.positives = std::min(b.positives, b.total);
    big lhs = big(a.positives) * b.total;
    big rhs = big(b.positives) * a.total;
    int expect = lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    CHECK(compare_stats(a, b) == expect);
  }
}

TEST_CASE("enumerate_between lists the 2^k members") {
  BaseTable t = fixtures::table2();
  auto low = parse_population(t, "(*,b1,*,*)");
  auto up = parse_population(t, "(*,b1,*,d1)");
  auto members = enumerate_between(low, up);
  REQUIRE(members.size() == 2);
  CHECK(members[0] == low);
  CHECK(members[1] == up);

  CHECK(enumerate_between(up, up) == std::vector<Population>{up});

  auto four = enumerate_between(root_population(t), parse_population(t, "(a1,*,c1,*)"));
  CHECK(four.size() == 4);

  CHECK_THROWS_AS(enumerate_between(parse_population(t, "(a2,*,*,*)"), up), error);
}

TEST_CASE("coverage is monotone along ancestor chains and disjoint across siblings") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    BaseTable t = fixtures::random_table(seed);
    Rng rng(seed, 1);
    for (int trial = 0; trial < 20; ++trial) {
      Population s(static_cast<std::size_t>(t.n_attrs));
      for (int i = 0; i < t.n_attrs; ++i) {
        auto card = static_cast<std::uint64_t>(t.dicts[i].cardinality());
        auto pick = rng.bounded(card + 1);
        s[i] = pick == card ? kWildcard : static_cast<std::int32_t>(pick);
      }
      auto cov = coverage(t, s);
      // parent coverage is a superset
      for (int i = 0; i < t.n_attrs; ++i) {
        if (s[i] == kWildcard) continue;
        auto parent_cov = coverage(t, s.with_slot(i, kWildcard));
        CHECK(std::includes(parent_cov.record_ids.begin(), parent_cov.record_ids.end(),
                            cov.record_ids.begin(), cov.record_ids.end()));
        // sibling coverage is disjoint
        for (std::int32_t v = 0; v < t.dicts[i].cardinality(); ++v) {
          if (v == s[i]) continue;
          auto sib_cov = coverage(t, s.with_slot(i, v));
          std::vector<std::uint32_t> inter;
          std::set_intersection(cov.record_ids.begin(), cov.record_ids.end(),
                                sib_cov.record_ids.begin(), sib_cov.record_ids.end(),
                                std::back_inserter(inter));
          CHECK(inter.empty());
        }
      }
    }
  }
}

TEST_CASE("coverage hash is an order-independent pure function of the ids") {
  std::vector<std::uint32_t> ids = {5, 1, 9, 3};
  std::vector<std::uint32_t> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  CHECK(coverage_hash_of(ids) == coverage_hash_of(sorted));
  CHECK(coverage_hash_of(sorted) != coverage_hash_of(std::vector<std::uint32_t>{5, 1, 9}));
}

TEST_CASE("population rendering and parsing round-trip") {
  BaseTable t = fixtures::table2();
  for (const char* text : {"(a1,*,c1,*)", "(*,*,*,*)", "(a2,b2,c2,d2)"}) {
    CHECK(render(t, parse_population(t, text)) == text);
  }
}

TEST_CASE("population ordering puts wildcard before any value") {
  Population wild{kWildcard, 0};
  Population val{0, 0};
  CHECK(wild < val);
}
