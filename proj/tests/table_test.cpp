#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace simpson;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("table 1 loads with three attributes and one label") {
  BaseTable t = fixtures::table1();
  CHECK(t.n_attrs == 3);
  CHECK(t.m_labels == 1);
  CHECK(t.n_records == 7);
  CHECK(t.dicts[0].name == "A");
  CHECK(t.dicts[1].cardinality() == 2);
  CHECK(t.label_names[0] == "Y1");
}

TEST_CASE("single-row csv gives cardinality-one dictionaries") {
  BaseTable t = load_csv_text("A,B,Y\nfoo,bar,1\n", {"Y"});
  CHECK(t.n_records == 1);
  CHECK(t.n_attrs == 2);
  for (const auto& d : t.dicts) CHECK(d.cardinality() == 1);
  CHECK(t.label(0, 0) == 1);
}

TEST_CASE("label column with three values is rejected") {
  try {
    load_csv_text("A,Y\nx,A\ny,B\nz,C\n", {"Y"});
    FAIL("expected NonBinaryLabel");
  } catch (const error& e) {
    CHECK(e.code() == errc::non_binary_label);
  }
}

TEST_CASE("two-valued label outside the builtin vocabulary needs an override") {
  std::string csv = "A,Y\nx,pos\ny,neg\n";
  CHECK_THROWS_AS(load_csv_text(csv, {"Y"}), error);
  BaseTable t = load_csv_text(csv, {"Y"}, {{"Y", "pos"}});
  CHECK(t.label(0, 0) == 1);
  CHECK(t.label(1, 0) == 0);
}

TEST_CASE("missing label column and ragged rows error") {
  try {
    load_csv_text("A,B\nx,y\n", {"Z"});
    FAIL("expected MissingColumn");
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_column);
  }
  try {
    load_csv_text("A,B,Y\nx,y\n", {"Y"});
    FAIL("expected RaggedRow");
  } catch (const error& e) {
    CHECK(e.code() == errc::ragged_row);
  }
  try {
    load_csv_text("A,Y\n", {"Y"});
    FAIL("expected EmptyTable");
  } catch (const error& e) {
    CHECK(e.code() == errc::empty_table);
  }
}

TEST_CASE("rfc4180 quoting round-trips") {
  std::string csv = "A,Y\n\"a,1\",1\n\"say \"\"hi\"\"\",0\n";
  BaseTable t = load_csv_text(csv, {"Y"});
  CHECK(t.dicts[0].values[0] == "a,1");
  CHECK(t.dicts[0].values[1] == "say \"hi\"");
}

TEST_CASE("value ids follow first appearance and loads are deterministic") {
  BaseTable a = fixtures::table2();
  BaseTable b = fixtures::table2();
  for (int i = 0; i < a.n_attrs; ++i) {
    CHECK(a.dicts[i].values == b.dicts[i].values);
  }
  CHECK(a.cat_rows == b.cat_rows);
  CHECK(a.dicts[0].values == std::vector<std::string>{"a1", "a2"});
}

TEST_CASE("encode then decode reproduces raw strings") {
  BaseTable t = fixtures::table3();
  std::istringstream in(fixtures::table3_csv());
  std::vector<std::string> header;
  detail::read_csv_row(in, header);
  std::vector<std::string> row;
  std::int64_t r = 0;
  while (detail::read_csv_row(in, row)) {
    auto decoded = t.decode_record(r);
    for (int i = 0; i < t.n_attrs; ++i) CHECK(decoded[i] == row[i]);
    for (int j = 0; j < t.m_labels; ++j) CHECK(t.decode_label(r, j) == row[t.n_attrs + j]);
    ++r;
  }
  CHECK(r == t.n_records);
}

TEST_CASE("record_matches agrees with the paper examples") {
  BaseTable t = fixtures::table1();
  Population s = parse_population(t, "(a1,b1,*)");
  CHECK(record_matches(t, 0, s));
  CHECK(record_matches(t, 1, s));
  CHECK_FALSE(record_matches(t, 2, s));

  Population a1 = parse_population(t, "(a1,*,*)");
  CHECK_FALSE(record_matches(t, 3, a1));  // t4 has A=a2

  Population root = root_population(t);
  for (std::int64_t r = 0; r < t.n_records; ++r) CHECK(record_matches(t, r, root));
}

TEST_CASE("row-major and column-major views agree") {
  BaseTable t = fixtures::random_table(17);
  for (std::int64_t r = 0; r < t.n_records; ++r)
    for (int i = 0; i < t.n_attrs; ++i) CHECK(t.cat(r, i) == t.cat_cols[i][r]);
}
