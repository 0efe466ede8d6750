#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "simpson/lattice.hpp"
#include "simpson/rational.hpp"

namespace simpson {

namespace detail {

/// Fixed-size bitset over the deduplicated record universe.
struct Bitset {
  std::vector<std::uint64_t> words;

  void init(std::size_t nbits) { words.assign((nbits + 63) / 64, 0); }
  void set(std::size_t i) { words[i >> 6] |= 1ULL << (i & 63); }
  bool test(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1; }

  std::int64_t popcount() const {
    std::int64_t c = 0;
    for (auto w : words) c += __builtin_popcountll(w);
    return c;
  }
};

/// Deduplicated view of a table: one row per distinct categorical
/// combination, with multiplicity and per-label positive counts. Coverage
/// is a pure function of the categorical part, so every set computation in
/// materialization and discovery can run on this much smaller universe.
struct Profile {
  const BaseTable* table = nullptr;
  std::uint32_t n_unique = 0;
  std::vector<std::uint32_t> uniq_of_record;
  std::vector<std::vector<std::uint32_t>> records_of;
  std::vector<std::int32_t> ucat;     // row-major n_attrs per unique row
  std::vector<std::int64_t> mult;     // records per unique row
  std::vector<std::int64_t> pos;      // row-major m_labels per unique row
  std::vector<std::uint64_t> phi;     // per-unique sum of record fingerprints
  std::vector<std::vector<Bitset>> postings;  // [attr][value] over uniques

  std::int32_t cat(std::uint32_t u, int attr) const { return ucat[u * table->n_attrs + attr]; }
  std::int64_t positives(std::uint32_t u, int lab) const { return pos[u * table->m_labels + lab]; }

  static Profile build(const BaseTable& t) {
    Profile p;
    p.table = &t;
    std::unordered_map<Population, std::uint32_t, PopulationHash> index;
    index.reserve(static_cast<std::size_t>(t.n_records));
    p.uniq_of_record.resize(t.n_records);
    Population key(static_cast<std::size_t>(t.n_attrs));
    for (std::int64_t r = 0; r < t.n_records; ++r) {
      for (int i = 0; i < t.n_attrs; ++i) key[i] = t.cat(r, i);
      auto [it, fresh] = index.emplace(key, p.n_unique);
      if (fresh) {
        ++p.n_unique;
        p.records_of.emplace_back();
        for (int i = 0; i < t.n_attrs; ++i) p.ucat.push_back(key[i]);
        p.mult.push_back(0);
        for (int j = 0; j < t.m_labels; ++j) p.pos.push_back(0);
        p.phi.push_back(0);
      }
      std::uint32_t u = it->second;
      p.uniq_of_record[r] = u;
      p.records_of[u].push_back(static_cast<std::uint32_t>(r));
      p.mult[u] += 1;
      for (int j = 0; j < t.m_labels; ++j) p.pos[u * t.m_labels + j] += t.label(r, j);
      p.phi[u] += record_phi(static_cast<std::uint32_t>(r));
    }
    p.postings.resize(t.n_attrs);
    for (int i = 0; i < t.n_attrs; ++i) {
      p.postings[i].resize(t.dicts[i].cardinality());
      for (auto& b : p.postings[i]) b.init(p.n_unique);
      for (std::uint32_t u = 0; u < p.n_unique; ++u) p.postings[i][p.cat(u, i)].set(u);
    }
    return p;
  }

  std::int64_t count_of(const std::vector<std::uint32_t>& uniq_ids) const {
    std::int64_t c = 0;
    for (auto u : uniq_ids) c += mult[u];
    return c;
  }

  std::uint64_t hash_of(const std::vector<std::uint32_t>& uniq_ids) const {
    std::uint64_t sum = 0;
    std::int64_t count = 0;
    for (auto u : uniq_ids) {
      sum += phi[u];
      count += mult[u];
    }
    return finish_coverage_hash(sum, count);
  }

  std::vector<FreqStat> stats_of(const std::vector<std::uint32_t>& uniq_ids) const {
    std::vector<FreqStat> out(table->m_labels);
    for (auto u : uniq_ids) {
      for (int j = 0; j < table->m_labels; ++j) out[j].positives += positives(u, j);
      std::int64_t m = mult[u];
      for (auto& f : out) f.total += m;
    }
    return out;
  }

  Coverage expand(const std::vector<std::uint32_t>& uniq_ids) const {
    Coverage cov;
    std::uint64_t sum = 0;
    for (auto u : uniq_ids) {
      cov.record_ids.insert(cov.record_ids.end(), records_of[u].begin(), records_of[u].end());
      sum += phi[u];
    }
    std::sort(cov.record_ids.begin(), cov.record_ids.end());
    cov.hash = finish_coverage_hash(sum, cov.size());
    return cov;
  }
};

inline bool meets_threshold(std::int64_t count, const Rat& theta, std::int64_t n_records) {
  return cmp_count_vs_fraction(count, n_records, theta) >= 0;
}

inline void validate_theta(const Rat& theta) {
  if (theta < Rat(0) || theta > Rat(1)) fail(errc::theta_out_of_range, "theta must be in [0,1]");
}

} // namespace detail

/// Maximal convex set of coverage-identical populations: one upper bound
/// (the least descendant), the greatest-ancestor lower bounds, the shared
/// coverage and per-label statistics computed once at the upper bound.
struct CoverageGroup {
  Population upper;
  std::vector<Population> lowers;
  Coverage cov;
  std::vector<FreqStat> stats;
  std::vector<std::uint32_t> uniq_ids;  // coverage over the deduplicated universe
};

/// One DFS discovery of a candidate group: the jumped upper bound, the
/// entry population that reached it, and statistics of the shared coverage.
struct GroupCandidate {
  Population upper;
  Population lower;
  std::vector<FreqStat> stats;
  std::vector<std::uint32_t> uniq_ids;
};

struct MaterializationResult {
  const BaseTable* table = nullptr;
  Rat theta;
  std::vector<CoverageGroup> groups;  // canonical order: upper bound ascending
  std::unordered_map<std::uint64_t, std::size_t> by_hash;
  std::shared_ptr<detail::Profile> profile;

  const CoverageGroup* find_by_hash(std::uint64_t h) const {
    auto it = by_hash.find(h);
    return it == by_hash.end() ? nullptr : &groups[it->second];
  }
};

/// Merges candidates sharing an upper bound and keeps only lower bounds
/// that are greatest ancestors among the candidates. Pure filtering; the
/// exact lower-bound completion happens against the table afterwards.
inline std::vector<CoverageGroup> merge_and_refine(std::vector<GroupCandidate> candidates) {
  std::unordered_map<Population, std::size_t, PopulationHash> index;
  std::vector<CoverageGroup> groups;
  for (auto& c : candidates) {
    auto [it, fresh] = index.emplace(c.upper, groups.size());
    if (fresh) {
      CoverageGroup g;
      g.upper = c.upper;
      g.stats = c.stats;
      g.uniq_ids = std::move(c.uniq_ids);
      groups.push_back(std::move(g));
    }
    auto& lowers = groups[it->second].lowers;
    if (std::find(lowers.begin(), lowers.end(), c.lower) == lowers.end())
      lowers.push_back(c.lower);
  }
  for (auto& g : groups) {
    std::vector<Population> kept;
    for (const auto& l : g.lowers) {
      bool dominated = false;
      for (const auto& other : g.lowers) {
        if (other == l) continue;
        if (ancestor_or_equal(other, l)) {  // a strict ancestor supersedes l
          dominated = true;
          break;
        }
      }
      if (!dominated) kept.push_back(l);
    }
    std::sort(kept.begin(), kept.end());
    g.lowers = std::move(kept);
  }
  std::sort(groups.begin(), groups.end(),
            [](const CoverageGroup& a, const CoverageGroup& b) { return a.upper < b.upper; });
  return groups;
}

namespace detail {

/// Replaces a group's lower bounds with the true greatest ancestors of its
/// coverage class. A member of the class is the upper bound restricted to a
/// slot subset S whose postings intersection equals the class coverage;
/// lower bounds are the minimal such S. DFS entry points alone do not
/// enumerate these, so this pass recovers them from posting bitsets.
inline void complete_lowers(const Profile& p, CoverageGroup& g) {
  const BaseTable& t = *p.table;
  std::vector<int> slots;
  for (int i = 0; i < t.n_attrs; ++i)
    if (g.upper[i] != kWildcard) slots.push_back(i);
  const int c = static_cast<int>(slots.size());

  Bitset in_class;
  in_class.init(p.n_unique);
  for (auto u : g.uniq_ids) in_class.set(u);

  // One scan builds the blocker masks: for every unique row outside the
  // class, the set of kept slots that would exclude it. Every kept-slot
  // subset S is a valid generator iff it hits all blockers.
  std::unordered_set<std::uint32_t> masks;
  bool overflow = c > 31;
  if (overflow) fail(errc::too_many_attributes, "lower-bound completion beyond 31 concrete slots");
  for (std::uint32_t u = 0; u < p.n_unique; ++u) {
    if (in_class.test(u)) continue;
    std::uint32_t mask = 0;
    for (int b = 0; b < c; ++b)
      if (p.cat(u, slots[b]) != g.upper[slots[b]]) mask |= 1u << b;
    masks.insert(mask);  // never 0: a full match would be in the class
  }

  // Keep only minimal blockers; supersets are implied.
  std::vector<std::uint32_t> blockers(masks.begin(), masks.end());
  std::sort(blockers.begin(), blockers.end(), [](std::uint32_t a, std::uint32_t b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  std::vector<std::uint32_t> minimal;
  for (auto m : blockers) {
    bool redundant = false;
    for (auto kept : minimal)
      if ((kept & m) == kept) {
        redundant = true;
        break;
      }
    if (!redundant) minimal.push_back(m);
  }

  // Enumerate minimal hitting sets of the blockers by branching on the
  // first unhit blocker; a post-filter drops non-minimal finds.
  std::vector<std::uint32_t> found;
  std::vector<std::uint32_t> stack;
  stack.push_back(0);
  std::unordered_set<std::uint32_t> seen;
  while (!stack.empty()) {
    std::uint32_t chosen = stack.back();
    stack.pop_back();
    if (!seen.insert(chosen).second) continue;
    std::uint32_t unhit = 0;
    bool complete = true;
    for (auto m : minimal)
      if ((m & chosen) == 0) {
        unhit = m;
        complete = false;
        break;
      }
    if (complete) {
      found.push_back(chosen);
      continue;
    }
    for (int b = 0; b < c; ++b)
      if (unhit & (1u << b)) stack.push_back(chosen | (1u << b));
  }
  std::sort(found.begin(), found.end(), [](std::uint32_t a, std::uint32_t b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  std::vector<std::uint32_t> lowers_masks;
  for (auto m : found) {
    bool superset = false;
    for (auto kept : lowers_masks)
      if ((kept & m) == kept) {
        superset = true;
        break;
      }
    if (!superset) lowers_masks.push_back(m);
  }

  g.lowers.clear();
  for (auto m : lowers_masks) {
    Population l(static_cast<std::size_t>(t.n_attrs));
    for (int b = 0; b < c; ++b)
      if (m & (1u << b)) l[slots[b]] = g.upper[slots[b]];
    g.lowers.push_back(std::move(l));
  }
  std::sort(g.lowers.begin(), g.lowers.end());
}

/// Shared DFS state per worker; the scratch partition buffers avoid
/// reallocating per node.
struct DfsWorker {
  const Profile* p;
  const BaseTable* t;
  Rat theta;
  std::vector<GroupCandidate> out;
  std::unordered_set<std::uint64_t> memo;  // (population key, entry attr)

  void run(const Population& entry, std::vector<std::uint32_t> list, int k) {
    std::uint64_t memo_key = splitmix64(entry.key() ^ splitmix64(static_cast<std::uint64_t>(k + 1)));
    if (!memo.insert(memo_key).second) return;

    // Upper-bound jump: every wildcard slot on which all covered rows agree
    // gets that value; the result has the same coverage as the entry.
    Population upper = entry;
    for (int i = 0; i < t->n_attrs; ++i) {
      if (upper[i] != kWildcard) continue;
      std::int32_t v = p->cat(list[0], i);
      bool same = true;
      for (std::size_t x = 1; x < list.size(); ++x)
        if (p->cat(list[x], i) != v) {
          same = false;
          break;
        }
      if (same) upper[i] = v;
    }

    GroupCandidate cand;
    cand.upper = upper;
    cand.lower = entry;
    cand.stats = p->stats_of(list);

    for (int h = k + 1; h < t->n_attrs; ++h) {
      if (upper[h] != kWildcard) continue;
      // Partition the sub-table by attribute h with a single counting scan.
      std::unordered_map<std::int32_t, std::vector<std::uint32_t>> parts;
      for (auto u : list) parts[p->cat(u, h)].push_back(u);
      std::vector<std::int32_t> values;
      values.reserve(parts.size());
      for (auto& kv : parts) values.push_back(kv.first);
      std::sort(values.begin(), values.end());
      for (auto v : values) {
        auto& sub = parts[v];
        if (!meets_threshold(p->count_of(sub), theta, t->n_records)) continue;
        run(upper.with_slot(h, v), std::move(sub), h);
      }
    }

    cand.uniq_ids = std::move(list);
    out.push_back(std::move(cand));
  }
};

inline MaterializationResult finalize_groups(const BaseTable& t, const Rat& theta,
                                             std::shared_ptr<Profile> profile,
                                             std::vector<CoverageGroup> groups,
                                             bool complete_bounds, bool verify_hashes) {
  MaterializationResult res;
  res.table = &t;
  res.theta = theta;
  res.profile = std::move(profile);
  res.groups = std::move(groups);
  for (auto& g : res.groups) {
    std::sort(g.uniq_ids.begin(), g.uniq_ids.end());
    if (complete_bounds) complete_lowers(*res.profile, g);
    g.cov = res.profile->expand(g.uniq_ids);
    if (g.stats.empty()) g.stats = res.profile->stats_of(g.uniq_ids);
  }
  std::sort(res.groups.begin(), res.groups.end(),
            [](const CoverageGroup& a, const CoverageGroup& b) { return a.upper < b.upper; });
  res.by_hash.reserve(res.groups.size());
  for (std::size_t i = 0; i < res.groups.size(); ++i) {
    auto [it, fresh] = res.by_hash.emplace(res.groups[i].cov.hash, i);
    if (!fresh) {
      if (res.groups[it->second].uniq_ids == res.groups[i].uniq_ids)
        fail(errc::hash_collision, "two groups with identical coverage survived merging");
      fail(errc::hash_collision, "coverage hash collision between distinct record sets");
    }
    if (verify_hashes) {
      auto direct = coverage(t, res.groups[i].upper);
      if (direct.record_ids != res.groups[i].cov.record_ids)
        fail(errc::hash_collision, "coverage verification failed for a group upper bound");
    }
  }
  return res;
}

} // namespace detail

/// DFS materialization: walks the population lattice bottom-up, jumping
/// each entry to its coverage-preserving upper bound, pruning sub-tables
/// below theta, then merging candidates per upper bound and completing the
/// lower bounds to the true greatest ancestors.
inline MaterializationResult materialize_dfs(const BaseTable& t, const Rat& theta, int threads = 1,
                                             bool verify_hashes = false) {
  detail::validate_theta(theta);
  if (t.n_records < 1) fail(errc::empty_table, "materialization needs at least one record");
  auto profile = std::make_shared<detail::Profile>(detail::Profile::build(t));

  std::vector<std::uint32_t> all(profile->n_unique);
  for (std::uint32_t u = 0; u < profile->n_unique; ++u) all[u] = u;

  std::vector<GroupCandidate> candidates;
  if (threads <= 1) {
    detail::DfsWorker w{profile.get(), &t, theta, {}, {}};
    w.run(root_population(t), std::move(all), -1);
    candidates = std::move(w.out);
  } else {
    // Root node handled inline; its child sub-trees fan out over workers.
    // Output is canonically sorted later, so scheduling cannot leak in.
    detail::DfsWorker rootw{profile.get(), &t, theta, {}, {}};
    Population root = root_population(t);
    Population upper = root;
    for (int i = 0; i < t.n_attrs; ++i) {
      std::int32_t v = profile->cat(all[0], i);
      bool same = true;
      for (std::size_t x = 1; x < all.size(); ++x)
        if (profile->cat(all[x], i) != v) {
          same = false;
          break;
        }
      if (same) upper[i] = v;
    }
    GroupCandidate cand;
    cand.upper = upper;
    cand.lower = root;
    cand.stats = profile->stats_of(all);
    cand.uniq_ids = all;
    candidates.push_back(std::move(cand));

    struct Task {
      Population entry;
      std::vector<std::uint32_t> list;
      int k;
    };
    std::vector<Task> tasks;
    for (int h = 0; h < t.n_attrs; ++h) {
      if (upper[h] != kWildcard) continue;
      std::unordered_map<std::int32_t, std::vector<std::uint32_t>> parts;
      for (auto u : all) parts[profile->cat(u, h)].push_back(u);
      std::vector<std::int32_t> values;
      for (auto& kv : parts) values.push_back(kv.first);
      std::sort(values.begin(), values.end());
      for (auto v : values) {
        auto& sub = parts[v];
        if (!detail::meets_threshold(profile->count_of(sub), theta, t.n_records)) continue;
        tasks.push_back({upper.with_slot(h, v), std::move(sub), h});
      }
    }
    std::vector<detail::DfsWorker> workers(threads);
    for (auto& w : workers) {
      w.p = profile.get();
      w.t = &t;
      w.theta = theta;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        for (;;) {
          std::size_t idx = next.fetch_add(1);
          if (idx >= tasks.size()) break;
          workers[i].run(tasks[idx].entry, std::move(tasks[idx].list), tasks[idx].k);
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& w : workers)
      for (auto& c : w.out) candidates.push_back(std::move(c));
  }

  auto groups = merge_and_refine(std::move(candidates));
  return detail::finalize_groups(t, theta, std::move(profile), std::move(groups), true,
                                 verify_hashes);
}

/// Brute-force materialization: enumerates all 2^n ancestor selectors of
/// every record, groups populations by exact coverage, and derives bounds
/// from explicit member sets. The testing oracle for materialize_dfs.
inline MaterializationResult materialize_bruteforce(const BaseTable& t, const Rat& theta) {
  detail::validate_theta(theta);
  if (t.n_records < 1) fail(errc::empty_table, "materialization needs at least one record");
  if (t.n_attrs > 24) fail(errc::too_many_attributes, "brute force limited to 24 attributes");

  std::unordered_map<Population, std::vector<std::uint32_t>, PopulationHash> cov_of;
  Population s(static_cast<std::size_t>(t.n_attrs));
  for (std::int64_t r = 0; r < t.n_records; ++r) {
    const std::uint32_t rid = static_cast<std::uint32_t>(r);
    const std::uint32_t limit = 1u << t.n_attrs;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      for (int i = 0; i < t.n_attrs; ++i)
        s[i] = (mask & (1u << i)) ? t.cat(r, i) : kWildcard;
      cov_of[s].push_back(rid);
    }
  }

  // Group by exact record set (compare contents, not just hashes).
  struct Class {
    std::vector<std::uint32_t> ids;
    std::vector<Population> members;
  };
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  std::vector<Class> classes;
  for (auto& [pop, ids] : cov_of) {
    if (!detail::meets_threshold(static_cast<std::int64_t>(ids.size()), theta, t.n_records))
      continue;
    std::uint64_t h = coverage_hash_of(ids);
    auto& bucket = buckets[h];
    bool placed = false;
    for (auto ci : bucket) {
      if (classes[ci].ids == ids) {
        classes[ci].members.push_back(pop);
        placed = true;
        break;
      }
    }
    if (!placed) {
      bucket.push_back(classes.size());
      classes.push_back({ids, {pop}});
    }
  }

  auto profile = std::make_shared<detail::Profile>(detail::Profile::build(t));
  std::vector<CoverageGroup> groups;
  groups.reserve(classes.size());
  for (auto& cls : classes) {
    CoverageGroup g;
    // Upper bound: the least descendant fills every slot on which the
    // covered records agree.
    g.upper = Population(static_cast<std::size_t>(t.n_attrs));
    for (int i = 0; i < t.n_attrs; ++i) {
      std::int32_t v = t.cat(cls.ids[0], i);
      bool same = true;
      for (std::size_t x = 1; x < cls.ids.size(); ++x)
        if (t.cat(cls.ids[x], i) != v) {
          same = false;
          break;
        }
      if (same) g.upper[i] = v;
    }
    // Lower bounds: members with no parent inside the class.
    std::unordered_set<Population, PopulationHash> member_set(cls.members.begin(),
                                                              cls.members.end());
    for (const auto& m : cls.members) {
      bool has_parent = false;
      for (int i = 0; i < t.n_attrs && !has_parent; ++i) {
        if (m[i] == kWildcard) continue;
        if (member_set.count(m.with_slot(i, kWildcard))) has_parent = true;
      }
      if (!has_parent) g.lowers.push_back(m);
    }
    std::sort(g.lowers.begin(), g.lowers.end());
    std::unordered_set<std::uint32_t> uniq;
    for (auto r : cls.ids) uniq.insert(profile->uniq_of_record[r]);
    g.uniq_ids.assign(uniq.begin(), uniq.end());
    groups.push_back(std::move(g));
  }
  return detail::finalize_groups(t, theta, std::move(profile), std::move(groups), false, false);
}

} // namespace simpson
