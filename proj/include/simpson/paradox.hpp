#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "simpson/materialize.hpp"

namespace simpson {

/// Association configuration: two sibling populations, a separator
/// attribute (wildcard in both siblings, distinct from their differential
/// attribute) and a label attribute.
struct AssocConfig {
  Population s1, s2;
  int sep = -1;
  int label = 0;

  friend bool operator==(const AssocConfig& a, const AssocConfig& b) {
    return a.sep == b.sep && a.label == b.label && a.s1 == b.s1 && a.s2 == b.s2;
  }
  friend bool operator<(const AssocConfig& a, const AssocConfig& b) {
    if (a.s1 != b.s1) return a.s1 < b.s1;
    if (a.s2 != b.s2) return a.s2 < b.s2;
    if (a.sep != b.sep) return a.sep < b.sep;
    return a.label < b.label;
  }
};

/// Outcome of evaluating one configuration. `direction` is +1 when the
/// aggregate inequality favors s1 (P(Y|s1) >= P(Y|s2) with sub-populations
/// reversed), -1 for the mirrored orientation, 0 when not a paradox.
struct Verdict {
  bool is_paradox = false;
  int direction = 0;
  int aggregate_sign = 0;
  std::vector<std::pair<std::int32_t, int>> sub_signs;  // active separator values
  std::vector<std::int32_t> skipped_values;             // either side empty
};

struct JointSig {
  std::uint64_t h1 = 0, h2 = 0;
  int sign = 0;

  friend bool operator==(const JointSig& a, const JointSig& b) {
    return a.h1 == b.h1 && a.h2 == b.h2 && a.sign == b.sign;
  }
  friend bool operator<(const JointSig& a, const JointSig& b) {
    if (a.h1 != b.h1) return a.h1 < b.h1;
    if (a.h2 != b.h2) return a.h2 < b.h2;
    return a.sign < b.sign;
  }
};

/// Order-independent fingerprint of a configuration: coverage hashes and
/// comparison signs of the sibling pair plus the multiset of the same
/// triple over active separator values. Equal signatures identify members
/// of one redundancy group.
struct Signature {
  JointSig top;
  std::vector<JointSig> subs;  // sorted canonical encoding

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.top == b.top && a.subs == b.subs;
  }
  friend bool operator<(const Signature& a, const Signature& b) {
    if (!(a.top == b.top)) return a.top < b.top;
    return a.subs < b.subs;
  }

  std::uint64_t key() const {
    std::uint64_t h = splitmix64(top.h1 ^ splitmix64(top.h2) ^ static_cast<std::uint64_t>(top.sign + 2));
    for (const auto& js : subs)
      h = splitmix64(h ^ js.h1) ^ splitmix64(js.h2 + static_cast<std::uint64_t>(js.sign + 2));
    return h;
  }
};

struct SignatureHash {
  std::size_t operator()(const Signature& s) const { return static_cast<std::size_t>(s.key()); }
};

/// Concise representation of one redundancy equivalence class:
/// bounds of the two coverage groups, the separator and label sets, and
/// the shared signature. E1 is the side with the lexicographically smaller
/// upper bound.
struct ParadoxGroup {
  Population up_e1;
  std::vector<Population> low_e1;
  Population up_e2;
  std::vector<Population> low_e2;
  std::vector<int> seps;    // sorted attribute indices
  std::vector<int> labels;  // sorted label indices
  Signature signature;
  int direction = 1;
  std::uint64_t cov_hash1 = 0, cov_hash2 = 0;
  std::int64_t cov_size1 = 0, cov_size2 = 0;
  std::vector<FreqStat> agg1, agg2;  // per label, at the coverage groups
};

struct DiscoveredParadox {
  AssocConfig ac;
  Verdict verdict;
};

namespace detail {

/// One (sibling pair, separator attribute) combination reduced to counts:
/// per separator value the record and positive counts of both sides plus
/// sub-coverage fingerprints. Everything about verdicts and signatures is
/// derived from this.
struct SepSplit {
  std::int32_t domain = 0;
  struct Cell {
    std::int32_t value = 0;
    std::int64_t n1 = 0, n2 = 0;
    std::uint64_t h1 = 0, h2 = 0;
    std::vector<std::int64_t> pos1, pos2;  // per label
  };
  std::vector<Cell> cells;  // values present on at least one side, ascending
};

inline int sign_of(std::int64_t p1, std::int64_t n1, std::int64_t p2, std::int64_t n2) {
  __int128 lhs = static_cast<__int128>(p1) * n2;
  __int128 rhs = static_cast<__int128>(p2) * n1;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline Verdict verdict_for_label(const SepSplit& sp, const FreqStat& a1, const FreqStat& a2,
                                 int label, bool strict_empty) {
  Verdict v;
  v.aggregate_sign = sign_of(a1.positives, a1.total, a2.positives, a2.total);

  bool any_active = false;
  bool half_empty = false;
  bool all_nonpos = true, all_neg = true;  // active sub signs
  bool all_nonneg = true, all_pos = true;
  std::vector<bool> active_value(sp.domain, false);
  for (const auto& c : sp.cells) {
    if (c.n1 > 0 && c.n2 > 0) {
      any_active = true;
      active_value[c.value] = true;
      int s = sign_of(c.pos1[label], c.n1, c.pos2[label], c.n2);
      v.sub_signs.emplace_back(c.value, s);
      if (s > 0) all_nonpos = false;
      if (s >= 0) all_neg = false;
      if (s < 0) all_nonneg = false;
      if (s <= 0) all_pos = false;
    } else {
      half_empty = true;
    }
  }
  for (std::int32_t val = 0; val < sp.domain; ++val)
    if (!active_value[val]) v.skipped_values.push_back(val);

  if (!any_active || (strict_empty && half_empty)) return v;
  if (v.aggregate_sign >= 0 && all_nonpos && (v.aggregate_sign > 0 || all_neg)) {
    v.is_paradox = true;
    v.direction = 1;
  } else if (v.aggregate_sign <= 0 && all_nonneg && (v.aggregate_sign < 0 || all_pos)) {
    v.is_paradox = true;
    v.direction = -1;
  }
  return v;
}

inline Signature signature_for_label(const SepSplit& sp, std::uint64_t top_h1, std::uint64_t top_h2,
                                     const FreqStat& a1, const FreqStat& a2, int label) {
  Signature sig;
  bool swap = top_h1 > top_h2;
  sig.top.h1 = swap ? top_h2 : top_h1;
  sig.top.h2 = swap ? top_h1 : top_h2;
  int top_sign = sign_of(a1.positives, a1.total, a2.positives, a2.total);
  sig.top.sign = swap ? -top_sign : top_sign;
  for (const auto& c : sp.cells) {
    if (c.n1 == 0 || c.n2 == 0) continue;
    int s = sign_of(c.pos1[label], c.n1, c.pos2[label], c.n2);
    JointSig js;
    js.h1 = swap ? c.h2 : c.h1;
    js.h2 = swap ? c.h1 : c.h2;
    js.sign = swap ? -s : s;
    sig.subs.push_back(js);
  }
  std::sort(sig.subs.begin(), sig.subs.end());
  return sig;
}

/// Builds the count split for two full-table record id lists.
inline SepSplit split_by_separator(const BaseTable& t, const std::vector<std::uint32_t>& ids1,
                                   const std::vector<std::uint32_t>& ids2, int sep) {
  SepSplit sp;
  sp.domain = t.dicts[sep].cardinality();
  struct Acc {
    std::int64_t n1 = 0, n2 = 0;
    std::uint64_t phi1 = 0, phi2 = 0;
    std::vector<std::int64_t> pos1, pos2;
  };
  std::map<std::int32_t, Acc> acc;
  for (auto r : ids1) {
    auto& a = acc[t.cat(r, sep)];
    if (a.pos1.empty()) a.pos1.assign(t.m_labels, 0), a.pos2.assign(t.m_labels, 0);
    a.n1 += 1;
    a.phi1 += record_phi(r);
    for (int j = 0; j < t.m_labels; ++j) a.pos1[j] += t.label(r, j);
  }
  for (auto r : ids2) {
    auto& a = acc[t.cat(r, sep)];
    if (a.pos1.empty()) a.pos1.assign(t.m_labels, 0), a.pos2.assign(t.m_labels, 0);
    a.n2 += 1;
    a.phi2 += record_phi(r);
    for (int j = 0; j < t.m_labels; ++j) a.pos2[j] += t.label(r, j);
  }
  for (auto& [val, a] : acc) {
    SepSplit::Cell c;
    c.value = val;
    c.n1 = a.n1;
    c.n2 = a.n2;
    c.h1 = finish_coverage_hash(a.phi1, a.n1);
    c.h2 = finish_coverage_hash(a.phi2, a.n2);
    c.pos1 = std::move(a.pos1);
    c.pos2 = std::move(a.pos2);
    sp.cells.push_back(std::move(c));
  }
  return sp;
}

/// Same split computed on the deduplicated universe.
inline SepSplit split_by_separator(const Profile& p, const std::vector<std::uint32_t>& u1,
                                   const std::vector<std::uint32_t>& u2, int sep) {
  const BaseTable& t = *p.table;
  SepSplit sp;
  sp.domain = t.dicts[sep].cardinality();
  struct Acc {
    std::int64_t n1 = 0, n2 = 0;
    std::uint64_t phi1 = 0, phi2 = 0;
    std::vector<std::int64_t> pos1, pos2;
  };
  std::map<std::int32_t, Acc> acc;
  for (auto u : u1) {
    auto& a = acc[p.cat(u, sep)];
    if (a.pos1.empty()) a.pos1.assign(t.m_labels, 0), a.pos2.assign(t.m_labels, 0);
    a.n1 += p.mult[u];
    a.phi1 += p.phi[u];
    for (int j = 0; j < t.m_labels; ++j) a.pos1[j] += p.positives(u, j);
  }
  for (auto u : u2) {
    auto& a = acc[p.cat(u, sep)];
    if (a.pos1.empty()) a.pos1.assign(t.m_labels, 0), a.pos2.assign(t.m_labels, 0);
    a.n2 += p.mult[u];
    a.phi2 += p.phi[u];
    for (int j = 0; j < t.m_labels; ++j) a.pos2[j] += p.positives(u, j);
  }
  for (auto& [val, a] : acc) {
    SepSplit::Cell c;
    c.value = val;
    c.n1 = a.n1;
    c.n2 = a.n2;
    c.h1 = finish_coverage_hash(a.phi1, a.n1);
    c.h2 = finish_coverage_hash(a.phi2, a.n2);
    c.pos1 = std::move(a.pos1);
    c.pos2 = std::move(a.pos2);
    sp.cells.push_back(std::move(c));
  }
  return sp;
}

inline int validate_ac(const BaseTable& t, const AssocConfig& ac) {
  if (ac.label < 0 || ac.label >= t.m_labels)
    fail(errc::label_index_invalid, "label index out of range");
  if (ac.sep < 0 || ac.sep >= t.n_attrs) fail(errc::index_out_of_range, "separator out of range");
  if (relation(ac.s1, ac.s2) != Relation::Sibling)
    fail(errc::invalid_value, "populations are not siblings");
  int diff = -1;
  for (std::size_t i = 0; i < ac.s1.size(); ++i)
    if (ac.s1[i] != ac.s2[i]) diff = static_cast<int>(i);
  if (diff == ac.sep)
    fail(errc::separator_equals_differential, "separator equals the differential attribute");
  if (ac.s1[ac.sep] != kWildcard || ac.s2[ac.sep] != kWildcard)
    fail(errc::invalid_value, "separator attribute must be wildcard in both siblings");
  return diff;
}

} // namespace detail

/// Evaluates an association configuration directly against the table.
inline Verdict evaluate_ac(const BaseTable& t, const AssocConfig& ac, bool strict_empty = false) {
  detail::validate_ac(t, ac);
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  if (c1.empty() || c2.empty()) fail(errc::empty_population, "sibling with empty coverage");
  FreqStat a1 = freq_stat(t, c1, ac.label);
  FreqStat a2 = freq_stat(t, c2, ac.label);
  auto split = detail::split_by_separator(t, c1.record_ids, c2.record_ids, ac.sep);
  return detail::verdict_for_label(split, a1, a2, ac.label, strict_empty);
}

inline Signature compute_signature(const BaseTable& t, const AssocConfig& ac) {
  detail::validate_ac(t, ac);
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  if (c1.empty() || c2.empty()) fail(errc::empty_population, "sibling with empty coverage");
  FreqStat a1 = freq_stat(t, c1, ac.label);
  FreqStat a2 = freq_stat(t, c2, ac.label);
  auto split = detail::split_by_separator(t, c1.record_ids, c2.record_ids, ac.sep);
  return detail::signature_for_label(split, c1.hash, c2.hash, a1, a2, ac.label);
}

/// All paradoxes reconstructed from a concise group: sibling pairs across
/// the two member sets crossed with the separator and label sets.
inline std::vector<AssocConfig> reconstruct_members(const ParadoxGroup& g) {
  auto members_of = [](const Population& up, const std::vector<Population>& lows) {
    std::set<Population> out;
    for (const auto& l : lows) {
      auto chunk = enumerate_between(l, up);
      out.insert(chunk.begin(), chunk.end());
    }
    return out;
  };
  auto e1 = members_of(g.up_e1, g.low_e1);
  auto e2 = members_of(g.up_e2, g.low_e2);

  std::vector<AssocConfig> out;
  for (const auto& m1 : e1) {
    for (const auto& m2 : e2) {
      if (relation(m1, m2) != Relation::Sibling) continue;
      int diff = -1;
      for (std::size_t i = 0; i < m1.size(); ++i)
        if (m1[i] != m2[i]) diff = static_cast<int>(i);
      bool first_lower = m1[diff] < m2[diff];
      for (int sep : g.seps) {
        if (sep == diff) continue;
        if (m1[sep] != kWildcard || m2[sep] != kWildcard) continue;
        for (int label : g.labels) {
          AssocConfig ac;
          ac.s1 = first_lower ? m1 : m2;
          ac.s2 = first_lower ? m2 : m1;
          ac.sep = sep;
          ac.label = label;
          out.push_back(std::move(ac));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

struct ValueSlice {
  std::int32_t value = 0;
  std::vector<std::uint32_t> uniq;
  std::int64_t count = 0;
  std::uint64_t hash = 0;
  std::vector<FreqStat> stats;
};

inline std::vector<ValueSlice> slice_by_attr(const Profile& p,
                                             const std::vector<std::uint32_t>& list, int attr) {
  std::map<std::int32_t, ValueSlice> acc;
  const int m = p.table->m_labels;
  for (auto u : list) {
    auto& s = acc[p.cat(u, attr)];
    s.uniq.push_back(u);
    s.count += p.mult[u];
  }
  std::vector<ValueSlice> out;
  out.reserve(acc.size());
  for (auto& [val, s] : acc) {
    s.value = val;
    std::uint64_t phi = 0;
    s.stats.assign(m, FreqStat{});
    for (auto u : s.uniq) {
      phi += p.phi[u];
      for (int j = 0; j < m; ++j) {
        s.stats[j].positives += p.positives(u, j);
        s.stats[j].total += p.mult[u];
      }
    }
    s.hash = finish_coverage_hash(phi, s.count);
    out.push_back(std::move(s));
  }
  return out;
}

struct PrecheckKey {
  std::uint64_t lo = 0, hi = 0;
  int sep = 0, label = 0;

  friend bool operator==(const PrecheckKey& a, const PrecheckKey& b) {
    return a.lo == b.lo && a.hi == b.hi && a.sep == b.sep && a.label == b.label;
  }
};

struct PrecheckHash {
  std::size_t operator()(const PrecheckKey& k) const {
    return static_cast<std::size_t>(splitmix64(
        k.lo ^ splitmix64(k.hi + static_cast<std::uint64_t>(k.sep * 1315423911 + k.label))));
  }
};

struct GroupBuild {
  std::size_t e1 = 0, e2 = 0;  // indices into MaterializationResult::groups
  std::set<int> seps, labels;
  int direction = 1;
};

struct DiscoverState {
  std::unordered_map<Signature, GroupBuild, SignatureHash> by_sig;
  std::unordered_set<PrecheckKey, PrecheckHash> emitted;

  void register_keys(std::uint64_t h1, std::uint64_t h2, const GroupBuild& gb) {
    PrecheckKey k;
    k.lo = std::min(h1, h2);
    k.hi = std::max(h1, h2);
    for (int s : gb.seps)
      for (int y : gb.labels) {
        k.sep = s;
        k.label = y;
        emitted.insert(k);
      }
  }

  bool already_emitted(std::uint64_t h1, std::uint64_t h2, int sep, int label) const {
    PrecheckKey k;
    k.lo = std::min(h1, h2);
    k.hi = std::max(h1, h2);
    k.sep = sep;
    k.label = label;
    return emitted.count(k) > 0;
  }
};

/// Runs redundancy-aware discovery over a range of coverage groups,
/// accumulating into `state`.
inline void discover_range(const MaterializationResult& mat, std::size_t begin, std::size_t end,
                           bool strict_empty, DiscoverState& state) {
  const Profile& p = *mat.profile;
  const BaseTable& t = *mat.table;
  for (std::size_t gi = begin; gi < end; ++gi) {
    const CoverageGroup& g = mat.groups[gi];
    const Population& u = g.upper;
    std::vector<int> wild;
    for (int i = 0; i < t.n_attrs; ++i)
      if (u[i] == kWildcard) wild.push_back(i);
    for (int diff : wild) {
      auto slices = slice_by_attr(p, g.uniq_ids, diff);
      std::vector<std::size_t> eligible;
      for (std::size_t k = 0; k < slices.size(); ++k)
        if (meets_threshold(slices[k].count, mat.theta, t.n_records)) eligible.push_back(k);
      if (eligible.size() < 2) continue;
      // sub-splits per (diff value, separator) are shared by all pairs
      std::map<std::pair<std::size_t, int>, std::vector<ValueSlice>> sub;
      auto sub_slices = [&](std::size_t k, int sep) -> const std::vector<ValueSlice>& {
        auto key = std::make_pair(k, sep);
        auto it = sub.find(key);
        if (it == sub.end()) it = sub.emplace(key, slice_by_attr(p, slices[k].uniq, sep)).first;
        return it->second;
      };
      for (std::size_t a = 0; a < eligible.size(); ++a) {
        for (std::size_t b = a + 1; b < eligible.size(); ++b) {
          const auto& s1 = slices[eligible[a]];
          const auto& s2 = slices[eligible[b]];
          for (int sep : wild) {
            if (sep == diff) continue;
            SepSplit split;
            split.domain = t.dicts[sep].cardinality();
            {
              const auto& left = sub_slices(eligible[a], sep);
              const auto& right = sub_slices(eligible[b], sep);
              std::size_t i = 0, j = 0;
              while (i < left.size() || j < right.size()) {
                SepSplit::Cell c;
                c.pos1.assign(t.m_labels, 0);
                c.pos2.assign(t.m_labels, 0);
                bool take_left = j >= right.size() ||
                                 (i < left.size() && left[i].value <= right[j].value);
                bool take_right = i >= left.size() ||
                                  (j < right.size() && right[j].value <= left[i].value);
                if (take_left) {
                  c.value = left[i].value;
                  c.n1 = left[i].count;
                  c.h1 = left[i].hash;
                  for (int y = 0; y < t.m_labels; ++y) c.pos1[y] = left[i].stats[y].positives;
                }
                if (take_right) {
                  c.value = right[j].value;
                  c.n2 = right[j].count;
                  c.h2 = right[j].hash;
                  for (int y = 0; y < t.m_labels; ++y) c.pos2[y] = right[j].stats[y].positives;
                }
                if (take_left) ++i;
                if (take_right) ++j;
                split.cells.push_back(std::move(c));
              }
            }
            for (int y = 0; y < t.m_labels; ++y) {
              if (state.already_emitted(s1.hash, s2.hash, sep, y)) continue;
              Verdict v = verdict_for_label(split, s1.stats[y], s2.stats[y], y, strict_empty);
              if (!v.is_paradox) continue;
              Signature sig =
                  signature_for_label(split, s1.hash, s2.hash, s1.stats[y], s2.stats[y], y);
              auto it = state.by_sig.find(sig);
              if (it == state.by_sig.end()) {
                auto g1 = mat.by_hash.find(s1.hash);
                auto g2 = mat.by_hash.find(s2.hash);
                if (g1 == mat.by_hash.end() || g2 == mat.by_hash.end())
                  fail(errc::group_not_found, "sibling population not materialized");
                GroupBuild gb;
                bool keep = mat.groups[g1->second].upper < mat.groups[g2->second].upper;
                gb.e1 = keep ? g1->second : g2->second;
                gb.e2 = keep ? g2->second : g1->second;
                gb.direction = keep ? v.direction : -v.direction;
                gb.seps.insert(sep);
                gb.labels.insert(y);
                state.register_keys(s1.hash, s2.hash, gb);
                state.by_sig.emplace(std::move(sig), std::move(gb));
              } else {
                it->second.seps.insert(sep);
                it->second.labels.insert(y);
                state.register_keys(s1.hash, s2.hash, it->second);
              }
            }
          }
        }
      }
    }
  }
}

inline ParadoxGroup build_group(const MaterializationResult& mat, const Signature& sig,
                                const GroupBuild& gb) {
  ParadoxGroup out;
  const CoverageGroup& e1 = mat.groups[gb.e1];
  const CoverageGroup& e2 = mat.groups[gb.e2];
  out.up_e1 = e1.upper;
  out.low_e1 = e1.lowers;
  out.up_e2 = e2.upper;
  out.low_e2 = e2.lowers;
  out.seps.assign(gb.seps.begin(), gb.seps.end());
  out.labels.assign(gb.labels.begin(), gb.labels.end());
  out.signature = sig;
  out.direction = gb.direction;
  out.cov_hash1 = e1.cov.hash;
  out.cov_hash2 = e2.cov.hash;
  out.cov_size1 = e1.cov.size();
  out.cov_size2 = e2.cov.size();
  out.agg1 = e1.stats;
  out.agg2 = e2.stats;
  return out;
}

} // namespace detail

/// Builds the concise group seeded by one verified paradox: bounds come
/// from the coverage groups of its sibling populations.
inline ParadoxGroup construct_by_sibling(const MaterializationResult& mat, const AssocConfig& ac) {
  const BaseTable& t = *mat.table;
  detail::validate_ac(t, ac);
  Coverage c1 = coverage(t, ac.s1);
  Coverage c2 = coverage(t, ac.s2);
  if (c1.empty() || c2.empty()) fail(errc::empty_population, "sibling with empty coverage");
  auto g1 = mat.by_hash.find(c1.hash);
  auto g2 = mat.by_hash.find(c2.hash);
  if (g1 == mat.by_hash.end() || g2 == mat.by_hash.end())
    fail(errc::group_not_found, "sibling population outside the materialization");
  Verdict v = evaluate_ac(t, ac);
  detail::GroupBuild gb;
  bool keep = mat.groups[g1->second].upper < mat.groups[g2->second].upper;
  gb.e1 = keep ? g1->second : g2->second;
  gb.e2 = keep ? g2->second : g1->second;
  gb.direction = keep ? v.direction : -v.direction;
  if (gb.direction == 0) gb.direction = 1;
  gb.seps.insert(ac.sep);
  gb.labels.insert(ac.label);
  return detail::build_group(mat, compute_signature(t, ac), gb);
}

/// Extends a group with the separator and label of a signature-equal
/// paradox. Union semantics; idempotent for already-present attributes.
inline ParadoxGroup extend_by_sep_stat(const MaterializationResult& mat, const ParadoxGroup& g,
                                       const AssocConfig& ac) {
  Signature sig = compute_signature(*mat.table, ac);
  if (!(sig == g.signature))
    fail(errc::signature_mismatch, "paradox signature differs from the group signature");
  ParadoxGroup out = g;
  if (std::find(out.seps.begin(), out.seps.end(), ac.sep) == out.seps.end())
    out.seps.push_back(ac.sep);
  if (std::find(out.labels.begin(), out.labels.end(), ac.label) == out.labels.end())
    out.labels.push_back(ac.label);
  std::sort(out.seps.begin(), out.seps.end());
  std::sort(out.labels.begin(), out.labels.end());
  return out;
}

/// Redundancy-aware discovery: iterates coverage groups by upper bound,
/// skips configurations already implied by an emitted group, and keys
/// groups by signature (construct on first hit, extend thereafter).
inline std::vector<ParadoxGroup> discover(const MaterializationResult& mat, int threads = 1,
                                          bool strict_empty = false) {
  detail::DiscoverState state;
  if (threads <= 1 || mat.groups.size() < 2) {
    detail::discover_range(mat, 0, mat.groups.size(), strict_empty, state);
  } else {
    std::vector<detail::DiscoverState> states(threads);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = 16;
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        for (;;) {
          std::size_t b = next.fetch_add(chunk);
          if (b >= mat.groups.size()) break;
          std::size_t e = std::min(mat.groups.size(), b + chunk);
          detail::discover_range(mat, b, e, strict_empty, states[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& st : states) {
      for (auto& [sig, gb] : st.by_sig) {
        auto it = state.by_sig.find(sig);
        if (it == state.by_sig.end()) {
          state.by_sig.emplace(sig, gb);
        } else {
          it->second.seps.insert(gb.seps.begin(), gb.seps.end());
          it->second.labels.insert(gb.labels.begin(), gb.labels.end());
        }
      }
    }
  }
  std::vector<ParadoxGroup> out;
  out.reserve(state.by_sig.size());
  for (const auto& [sig, gb] : state.by_sig) out.push_back(detail::build_group(mat, sig, gb));
  std::sort(out.begin(), out.end(), [](const ParadoxGroup& a, const ParadoxGroup& b) {
    if (a.up_e1 != b.up_e1) return a.up_e1 < b.up_e1;
    if (a.up_e2 != b.up_e2) return a.up_e2 < b.up_e2;
    return a.signature < b.signature;
  });
  return out;
}

/// Brute-force discovery: every member population of every coverage group,
/// every wildcard differential attribute, every present sibling value pair,
/// every other wildcard attribute as separator, every label.
inline std::vector<DiscoveredParadox> discover_bruteforce(const MaterializationResult& mat,
                                                          bool strict_empty = false) {
  const detail::Profile& p = *mat.profile;
  const BaseTable& t = *mat.table;
  std::vector<DiscoveredParadox> out;
  for (const CoverageGroup& g : mat.groups) {
    std::set<Population> members;
    for (const auto& l : g.lowers) {
      auto chunk = enumerate_between(l, g.upper);
      members.insert(chunk.begin(), chunk.end());
    }
    // Counts depend only on the shared coverage, so splits are computed
    // once per differential attribute and reused for every member.
    std::vector<int> attrs(t.n_attrs);
    for (int i = 0; i < t.n_attrs; ++i) attrs[i] = i;
    std::map<int, std::vector<detail::ValueSlice>> slices_by_attr;
    auto slices_of = [&](int attr) -> const std::vector<detail::ValueSlice>& {
      auto it = slices_by_attr.find(attr);
      if (it == slices_by_attr.end())
        it = slices_by_attr.emplace(attr, detail::slice_by_attr(p, g.uniq_ids, attr)).first;
      return it->second;
    };
    for (const Population& m : members) {
      for (int diff = 0; diff < t.n_attrs; ++diff) {
        if (m[diff] != kWildcard) continue;
        const auto& slices = slices_of(diff);
        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k < slices.size(); ++k)
          if (detail::meets_threshold(slices[k].count, mat.theta, t.n_records))
            eligible.push_back(k);
        for (std::size_t a = 0; a < eligible.size(); ++a) {
          for (std::size_t b = a + 1; b < eligible.size(); ++b) {
            const auto& s1 = slices[eligible[a]];
            const auto& s2 = slices[eligible[b]];
            for (int sep = 0; sep < t.n_attrs; ++sep) {
              if (sep == diff || m[sep] != kWildcard) continue;
              auto split = detail::split_by_separator(p, s1.uniq, s2.uniq, sep);
              for (int y = 0; y < t.m_labels; ++y) {
                Verdict v =
                    detail::verdict_for_label(split, s1.stats[y], s2.stats[y], y, strict_empty);
                if (!v.is_paradox) continue;
                DiscoveredParadox d;
                d.ac.s1 = m.with_slot(diff, s1.value);
                d.ac.s2 = m.with_slot(diff, s2.value);
                d.ac.sep = sep;
                d.ac.label = y;
                d.verdict = std::move(v);
                out.push_back(std::move(d));
              }
            }
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DiscoveredParadox& a, const DiscoveredParadox& b) { return a.ac < b.ac; });
  return out;
}

} // namespace simpson
