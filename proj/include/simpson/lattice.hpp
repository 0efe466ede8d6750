#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simpson/error.hpp"
#include "simpson/rng.hpp"
#include "simpson/table.hpp"

namespace simpson {

constexpr std::int32_t kWildcard = -1;

/// Selector over the categorical attributes: one value id or wildcard per
/// slot. Canonical ordering is lexicographic by slot with wildcard sorting
/// before every value id (wildcard == -1 makes plain comparison do this).
struct Population {
  std::vector<std::int32_t> slots;

  Population() = default;
  explicit Population(std::size_t n) : slots(n, kWildcard) {}
  Population(std::initializer_list<std::int32_t> v) : slots(v) {}

  std::size_t size() const { return slots.size(); }
  std::int32_t operator[](std::size_t i) const { return slots[i]; }
  std::int32_t& operator[](std::size_t i) { return slots[i]; }

  bool is_root() const {
    return std::all_of(slots.begin(), slots.end(), [](std::int32_t v) { return v == kWildcard; });
  }

  int concrete_count() const {
    int c = 0;
    for (auto v : slots) c += (v != kWildcard);
    return c;
  }

  Population with_slot(int attr, std::int32_t v) const {
    Population out = *this;
    out.slots[attr] = v;
    return out;
  }

  friend bool operator==(const Population& a, const Population& b) { return a.slots == b.slots; }
  friend bool operator!=(const Population& a, const Population& b) { return !(a == b); }
  friend bool operator<(const Population& a, const Population& b) { return a.slots < b.slots; }

  std::uint64_t key() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < slots.size(); ++i)
      h = splitmix64(h ^ (static_cast<std::uint64_t>(slots[i] + 2) * 0x100000001b3ULL + i));
    return h;
  }
};

struct PopulationHash {
  std::size_t operator()(const Population& p) const { return static_cast<std::size_t>(p.key()); }
};

inline Population root_population(const BaseTable& t) {
  return Population(static_cast<std::size_t>(t.n_attrs));
}

enum class Relation { Equal, Parent, Child, Ancestor, Descendant, Sibling, Other };

/// Exact record set of a population plus an order-independent 64-bit
/// fingerprint. The fingerprint is a commutative mix so it can be
/// accumulated in any order and compared across computation paths.
struct Coverage {
  std::vector<std::uint32_t> record_ids;  // strictly increasing
  std::uint64_t hash = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(record_ids.size()); }
  bool empty() const { return record_ids.empty(); }
};

inline std::uint64_t record_phi(std::uint32_t id) {
  return splitmix64(static_cast<std::uint64_t>(id) + 0x0123456789abcdefULL);
}

inline std::uint64_t finish_coverage_hash(std::uint64_t phi_sum, std::int64_t count) {
  return splitmix64(phi_sum ^ splitmix64(static_cast<std::uint64_t>(count)));
}

inline std::uint64_t coverage_hash_of(std::span<const std::uint32_t> ids) {
  std::uint64_t sum = 0;
  for (auto id : ids) sum += record_phi(id);
  return finish_coverage_hash(sum, static_cast<std::int64_t>(ids.size()));
}

/// Exact frequency statistic positives/total of a non-empty population.
struct FreqStat {
  std::int64_t positives = 0;
  std::int64_t total = 0;

  friend bool operator==(const FreqStat& a, const FreqStat& b) {
    return a.positives == b.positives && a.total == b.total;
  }
  friend bool operator!=(const FreqStat& a, const FreqStat& b) { return !(a == b); }

  std::string str() const { return std::to_string(positives) + "/" + std::to_string(total); }
};

/// sign(a - b) by integer cross-multiplication; no floating point.
inline int compare_stats(const FreqStat& a, const FreqStat& b) {
  if (a.total <= 0 || b.total <= 0) fail(errc::empty_population, "compare_stats on empty total");
  __int128 lhs = static_cast<__int128>(a.positives) * b.total;
  __int128 rhs = static_cast<__int128>(b.positives) * a.total;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

inline bool record_matches(const BaseTable& t, std::int64_t record, const Population& s) {
  if (record < 0 || record >= t.n_records) fail(errc::index_out_of_range, "record out of range");
  if (s.size() != static_cast<std::size_t>(t.n_attrs))
    fail(errc::length_mismatch, "population length != n_attrs");
  for (int i = 0; i < t.n_attrs; ++i) {
    auto v = s[i];
    if (v != kWildcard && t.cat(record, i) != v) return false;
  }
  return true;
}

inline Population substitute(const BaseTable& t, const Population& s, int attr, std::int32_t v) {
  if (attr < 0 || attr >= t.n_attrs) fail(errc::index_out_of_range, "attribute out of range");
  if (s.size() != static_cast<std::size_t>(t.n_attrs))
    fail(errc::length_mismatch, "population length != n_attrs");
  if (v != kWildcard && (v < 0 || v >= t.dicts[attr].cardinality()))
    fail(errc::invalid_value, "value id out of domain for attribute " + t.dicts[attr].name);
  return s.with_slot(attr, v);
}

inline Relation relation(const Population& a, const Population& b) {
  if (a.size() != b.size()) fail(errc::length_mismatch, "populations of different length");
  std::size_t n = a.size();
  std::size_t diff = 0;
  bool a_wild_b_conc = false, b_wild_a_conc = false, conc_conc = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == b[i]) continue;
    ++diff;
    if (a[i] == kWildcard)
      a_wild_b_conc = true;
    else if (b[i] == kWildcard)
      b_wild_a_conc = true;
    else
      conc_conc = true;
  }
  if (diff == 0) return Relation::Equal;
  if (diff == 1) {
    if (a_wild_b_conc) return Relation::Parent;
    if (b_wild_a_conc) return Relation::Child;
    return Relation::Sibling;
  }
  if (!conc_conc) {
    if (a_wild_b_conc && !b_wild_a_conc) return Relation::Ancestor;
    if (b_wild_a_conc && !a_wild_b_conc) return Relation::Descendant;
  }
  return Relation::Other;
}

/// True iff a == b or a is an ancestor of b (every concrete slot agrees).
inline bool ancestor_or_equal(const Population& a, const Population& b) {
  if (a.size() != b.size()) fail(errc::length_mismatch, "populations of different length");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != kWildcard && a[i] != b[i]) return false;
  return true;
}

inline Coverage coverage(const BaseTable& t, const Population& s) {
  if (s.size() != static_cast<std::size_t>(t.n_attrs))
    fail(errc::length_mismatch, "population length != n_attrs");
  Coverage cov;
  std::uint64_t phi = 0;
  for (std::int64_t r = 0; r < t.n_records; ++r) {
    bool ok = true;
    for (int i = 0; i < t.n_attrs; ++i) {
      auto v = s[i];
      if (v != kWildcard && t.cat(r, i) != v) {
        ok = false;
        break;
      }
    }
    if (ok) {
      cov.record_ids.push_back(static_cast<std::uint32_t>(r));
      phi += record_phi(static_cast<std::uint32_t>(r));
    }
  }
  cov.hash = finish_coverage_hash(phi, cov.size());
  return cov;
}

inline FreqStat freq_stat(const BaseTable& t, const Coverage& cov, int label) {
  if (label < 0 || label >= t.m_labels) fail(errc::label_index_invalid, "label out of range");
  if (cov.empty()) fail(errc::empty_population, "frequency statistic of empty coverage");
  FreqStat f;
  f.total = cov.size();
  for (auto r : cov.record_ids) f.positives += t.label(r, label);
  return f;
}

/// All populations s with low <= s <= up in the ancestor order; they differ
/// from low only by concretizing, to the up value, slots where low is
/// wildcard and up is concrete. 2^k results for k such slots.
inline std::vector<Population> enumerate_between(const Population& low, const Population& up) {
  if (low.size() != up.size()) fail(errc::length_mismatch, "bound lengths differ");
  if (!ancestor_or_equal(low, up))
    fail(errc::not_comparable, "lower bound is not an ancestor of upper bound");
  std::vector<int> free_slots;
  for (std::size_t i = 0; i < low.size(); ++i)
    if (low[i] == kWildcard && up[i] != kWildcard) free_slots.push_back(static_cast<int>(i));
  if (free_slots.size() > 30) fail(errc::too_many_attributes, "enumeration of 2^k members too large");
  std::vector<Population> out;
  out.reserve(1u << free_slots.size());
  for (std::uint32_t mask = 0; mask < (1u << free_slots.size()); ++mask) {
    Population s = low;
    for (std::size_t b = 0; b < free_slots.size(); ++b)
      if (mask & (1u << b)) s[free_slots[b]] = up[free_slots[b]];
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Textual rendering "(a1,*,c1,*)" with raw dictionary strings.
inline std::string render(const BaseTable& t, const Population& s) {
  std::string out = "(";
  for (int i = 0; i < t.n_attrs; ++i) {
    if (i) out += ",";
    out += s[i] == kWildcard ? "*" : t.dicts[i].values[s[i]];
  }
  out += ")";
  return out;
}

/// Inverse of render: parses "(a1,*,c1,*)" against the table dictionaries.
inline Population parse_population(const BaseTable& t, const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '(') body = body.substr(1);
  if (!body.empty() && body.back() == ')') body.pop_back();
  Population s(static_cast<std::size_t>(t.n_attrs));
  std::size_t start = 0;
  int slot = 0;
  while (slot < t.n_attrs) {
    auto comma = body.find(',', start);
    std::string field =
        comma == std::string::npos ? body.substr(start) : body.substr(start, comma - start);
    if (field != "*") {
      auto id = t.dicts[slot].id_of(field);
      if (id < 0)
        fail(errc::invalid_value, "unknown value '" + field + "' for " + t.dicts[slot].name);
      s[slot] = id;
    }
    ++slot;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (slot != t.n_attrs) fail(errc::length_mismatch, "population text has too few slots");
  return s;
}

} // namespace simpson
