#pragma once

#include <string>
#include <vector>

#include "simpson/simpson.hpp"

namespace fixtures {

using namespace simpson;

inline std::string table1_csv() {
  return "A,B,C,Y1\n"
         "a1,b1,c1,0\n"
         "a1,b1,c1,0\n"
         "a1,b2,c1,0\n"
         "a2,b1,c2,1\n"
         "a2,b1,c2,1\n"
         "a2,b2,c2,1\n"
         "a2,b2,c2,1\n";
}

inline std::string table2_csv() {
  return "A,B,C,D,Y1,Y2\n"
         "a1,b1,c1,d1,0,0\n"
         "a1,b1,c1,d1,0,0\n"
         "a1,b2,c1,d2,0,0\n"
         "a2,b1,c2,d1,1,1\n"
         "a2,b1,c2,d1,1,1\n"
         "a2,b2,c2,d2,1,1\n"
         "a2,b2,c2,d2,1,1\n";
}

inline std::string table3_csv() {
  return "A,B,C,D,Y1,Y2,Y3,Y4\n"
         "a1,b1,c1,d1,0,0,0,0\n"
         "a1,b1,c1,d1,0,0,0,0\n"
         "a1,b1,c1,d2,0,0,0,0\n"
         "a1,b2,c1,d1,0,0,0,0\n"
         "a1,b2,c1,d2,0,0,0,0\n"
         "a2,b1,c2,d1,0,0,1,1\n"
         "a2,b1,c2,d1,1,1,0,1\n"
         "a2,b1,c2,d2,1,1,1,1\n"
         "a2,b2,c2,d1,0,0,1,1\n"
         "a2,b2,c2,d2,1,1,0,1\n"
         "a2,b2,c2,d2,1,1,1,1\n";
}

inline BaseTable table1() { return load_csv_text(table1_csv(), {"Y1"}); }
inline BaseTable table2() { return load_csv_text(table2_csv(), {"Y1", "Y2"}); }
inline BaseTable table3() { return load_csv_text(table3_csv(), {"Y1", "Y2", "Y3", "Y4"}); }

/// Random categorical table for the oracle suites: n in [2,4] attributes
/// with per-attribute domains up to 3, up to 40 records, 1..2 labels.
inline BaseTable random_table(std::uint64_t seed, int max_attrs = 4, int max_dom = 3,
                              int max_rows = 40, int max_labels = 2) {
  Rng rng(seed, 0xf1e2d3c4);
  int n = 2 + static_cast<int>(rng.bounded(std::max(1, max_attrs - 1)));
  int m = 1 + static_cast<int>(rng.bounded(max_labels));
  std::int64_t rows = 1 + static_cast<std::int64_t>(rng.bounded(max_rows));
  std::vector<int> dom(n);
  for (int i = 0; i < n; ++i) dom[i] = 1 + static_cast<int>(rng.bounded(max_dom));

  BaseTable t;
  t.n_attrs = n;
  t.m_labels = m;
  for (int i = 0; i < n; ++i) {
    AttributeDict d;
    d.attr_index = i;
    d.name = "X" + std::to_string(i + 1);
    for (int v = 0; v < dom[i]; ++v) d.add("x" + std::to_string(i + 1) + "_" + std::to_string(v));
    t.dicts.push_back(std::move(d));
  }
  for (int j = 0; j < m; ++j) {
    t.label_names.push_back("Y" + std::to_string(j + 1));
    t.label_raw.push_back({"0", "1"});
  }
  t.n_records = rows;
  for (std::int64_t r = 0; r < rows; ++r) {
    for (int i = 0; i < n; ++i)
      t.cat_rows.push_back(static_cast<std::int32_t>(rng.bounded(dom[i])));
    for (int j = 0; j < m; ++j)
      t.label_rows.push_back(static_cast<std::uint8_t>(rng.bounded(2)));
  }
  t.finalize_columns();
  return t;
}

/// Every population over the table's domains (wildcard included per slot).
/// Only usable for tiny tables; the exhaustive membership oracle.
inline std::vector<Population> all_populations(const BaseTable& t) {
  std::vector<Population> out;
  Population s(static_cast<std::size_t>(t.n_attrs));
  std::vector<std::int32_t> idx(t.n_attrs, -1);
  for (;;) {
    for (int i = 0; i < t.n_attrs; ++i) s[i] = idx[i];
    out.push_back(s);
    int i = t.n_attrs - 1;
    while (i >= 0) {
      if (idx[i] + 1 < t.dicts[i].cardinality()) {
        ++idx[i];
        break;
      }
      idx[i] = -1;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistic-equivalence sufficient conditions as test predicates. These are
// spelled out over raw table access so they stay independent of the
// signature machinery they end up validating.

inline bool stat_equiv_case1(const BaseTable& t, const AssocConfig& ac, int other_label) {
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  for (auto r : c1.record_ids)
    if (t.label(r, ac.label) != t.label(r, other_label)) return false;
  for (auto r : c2.record_ids)
    if (t.label(r, ac.label) != t.label(r, other_label)) return false;
  return true;
}

inline bool stat_equiv_case2(const BaseTable& t, const AssocConfig& ac, int other_label) {
  auto equal_fraction = [&](const Coverage& cov) {
    if (cov.empty()) return true;
    FreqStat a = freq_stat(t, cov, ac.label);
    FreqStat b = freq_stat(t, cov, other_label);
    return compare_stats(a, b) == 0;
  };
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  if (!equal_fraction(c1) || !equal_fraction(c2)) return false;
  for (std::int32_t v = 0; v < t.dicts[ac.sep].cardinality(); ++v) {
    if (!equal_fraction(coverage(t, ac.s1.with_slot(ac.sep, v)))) return false;
    if (!equal_fraction(coverage(t, ac.s2.with_slot(ac.sep, v)))) return false;
  }
  return true;
}

inline bool stat_equiv_case3(const BaseTable& t, const AssocConfig& ac, int other_label) {
  auto sign_for = [&](const Coverage& a, const Coverage& b, int label) {
    return compare_stats(freq_stat(t, a, label), freq_stat(t, b, label));
  };
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  if (c1.empty() || c2.empty()) return false;
  if (sign_for(c1, c2, ac.label) != sign_for(c1, c2, other_label)) return false;
  for (std::int32_t v = 0; v < t.dicts[ac.sep].cardinality(); ++v) {
    Coverage sub1 = coverage(t, ac.s1.with_slot(ac.sep, v));
    Coverage sub2 = coverage(t, ac.s2.with_slot(ac.sep, v));
    if (sub1.empty() || sub2.empty()) continue;
    if (sign_for(sub1, sub2, ac.label) != sign_for(sub1, sub2, other_label)) return false;
  }
  return true;
}

/// Group-set equality used by the oracle comparisons: uppers, refined
/// lowers, exact coverage, and statistics must all match.
inline bool same_groups(const MaterializationResult& a, const MaterializationResult& b,
                        std::string* why = nullptr) {
  if (a.groups.size() != b.groups.size()) {
    if (why) *why = "group counts differ";
    return false;
  }
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    const auto& ga = a.groups[i];
    const auto& gb = b.groups[i];
    if (ga.upper != gb.upper) {
      if (why) *why = "upper bounds differ at index " + std::to_string(i);
      return false;
    }
    if (ga.lowers != gb.lowers) {
      if (why) *why = "lower bounds differ for upper " + render(*a.table, ga.upper);
      return false;
    }
    if (ga.cov.record_ids != gb.cov.record_ids) {
      if (why) *why = "coverage differs for upper " + render(*a.table, ga.upper);
      return false;
    }
    if (ga.stats != gb.stats) {
      if (why) *why = "stats differ for upper " + render(*a.table, ga.upper);
      return false;
    }
  }
  return true;
}

inline std::vector<AssocConfig> flatten(const std::vector<DiscoveredParadox>& ds) {
  std::vector<AssocConfig> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(d.ac);
  return out;
}

inline std::vector<AssocConfig> reconstruct_all(const std::vector<ParadoxGroup>& groups) {
  std::vector<AssocConfig> out;
  for (const auto& g : groups) {
    auto ms = reconstruct_members(g);
    out.insert(out.end(), ms.begin(), ms.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace fixtures
