#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "simpson/paradox.hpp"
#include "simpson/rng.hpp"

namespace simpson {

enum class PerturbKind { label, coverage, sibling_equiv, separator_equiv };

struct PerturbConfig {
  Rat fraction{1, 20};
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  PerturbKind kind = PerturbKind::label;
  Rat robust_threshold{19, 20};
  bool exact_count = false;  // coverage kind: exact-count label reassignment
  int threads = 1;
};

struct SurvivalReport {
  std::string subject;
  std::int64_t survived = 0;
  std::int64_t trials = 0;
  Rat survival_rate{0, 1};
  bool robust = false;
};

namespace detail {

inline std::int64_t perturb_count(const Rat& fraction, std::int64_t pool) {
  if (pool <= 0) return 0;
  // ceil(fraction * pool), at least 1 for a non-empty pool
  std::int64_t k = (fraction.num * pool + fraction.den - 1) / fraction.den;
  return std::max<std::int64_t>(1, std::min(k, pool));
}

inline std::int64_t round_nearest(std::int64_t num, std::int64_t den) {
  return (2 * num + den) / (2 * den);
}

inline SurvivalReport finish_report(std::string subject, std::int64_t survived,
                                    const PerturbConfig& cfg) {
  SurvivalReport rep;
  rep.subject = std::move(subject);
  rep.survived = survived;
  rep.trials = cfg.trials;
  rep.survival_rate = Rat(survived, std::max<std::int64_t>(1, cfg.trials));
  rep.robust = rep.survival_rate >= cfg.robust_threshold;
  return rep;
}

/// Runs `trial(index, rng)` over all trial indices on cfg.threads workers.
/// Each trial owns an rng stream derived from (seed, index), so the counts
/// are identical no matter how trials are scheduled.
template <typename Trial>
inline std::int64_t run_trials(const PerturbConfig& cfg, Trial&& trial) {
  if (cfg.trials < 1) fail(errc::invalid_value, "trials must be >= 1");
  int workers = std::max(1, cfg.threads);
  if (workers == 1) {
    std::int64_t s = 0;
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
      if (trial(rng)) ++s;
    }
    return s;
  }
  std::atomic<std::int64_t> survived{0};
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      std::int64_t local = 0;
      for (;;) {
        std::int64_t t = next.fetch_add(1);
        if (t >= cfg.trials) break;
        Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
        if (trial(rng)) ++local;
      }
      survived.fetch_add(local);
    });
  }
  for (auto& th : pool) th.join();
  return survived.load();
}

/// Pool bookkeeping for the AC perturbations: every covered record with its
/// side (0 = s1, 1 = s2) and separator value, plus baseline cell counts.
struct AcPool {
  std::vector<std::uint32_t> records;
  std::vector<std::uint8_t> side;
  std::vector<std::int32_t> sep_value;
  std::vector<std::uint8_t> label_bit;
  std::int32_t domain = 0;
  std::vector<std::int64_t> n[2], pos[2];  // per cell [side][value]

  static AcPool build(const BaseTable& t, const AssocConfig& ac) {
    AcPool p;
    Coverage c1 = coverage(t, ac.s1);
    Coverage c2 = coverage(t, ac.s2);
    if (c1.empty() || c2.empty()) fail(errc::empty_population, "sibling with empty coverage");
    p.domain = t.dicts[ac.sep].cardinality();
    for (int s = 0; s < 2; ++s) {
      p.n[s].assign(p.domain, 0);
      p.pos[s].assign(p.domain, 0);
    }
    auto add = [&](const Coverage& c, std::uint8_t side) {
      for (auto r : c.record_ids) {
        std::int32_t v = t.cat(r, ac.sep);
        std::uint8_t bit = t.label(r, ac.label);
        p.records.push_back(r);
        p.side.push_back(side);
        p.sep_value.push_back(v);
        p.label_bit.push_back(bit);
        p.n[side][v] += 1;
        p.pos[side][v] += bit;
      }
    };
    add(c1, 0);
    add(c2, 1);
    return p;
  }

  /// Paradox check in a fixed direction from per-cell counts.
  static bool holds(const std::vector<std::int64_t>& n1, const std::vector<std::int64_t>& p1,
                    const std::vector<std::int64_t>& n2, const std::vector<std::int64_t>& p2,
                    int direction) {
    std::int64_t a1 = 0, t1 = 0, a2 = 0, t2 = 0;
    const std::int32_t d = static_cast<std::int32_t>(n1.size());
    for (std::int32_t v = 0; v < d; ++v) {
      a1 += p1[v];
      t1 += n1[v];
      a2 += p2[v];
      t2 += n2[v];
    }
    if (t1 == 0 || t2 == 0) return false;
    int agg = sign_of(a1, t1, a2, t2);
    if (direction < 0) agg = -agg;
    bool any_active = false;
    bool all_nonpos = true, all_neg = true;
    for (std::int32_t v = 0; v < d; ++v) {
      if (n1[v] == 0 || n2[v] == 0) continue;
      any_active = true;
      int s = sign_of(p1[v], n1[v], p2[v], n2[v]);
      if (direction < 0) s = -s;
      if (s > 0) all_nonpos = false;
      if (s >= 0) all_neg = false;
    }
    if (!any_active) return false;
    return agg >= 0 && all_nonpos && (agg > 0 || all_neg);
  }
};

/// Without-replacement sampling of k indices out of n per call.
struct Sampler {
  std::vector<std::uint32_t> idx;

  explicit Sampler(std::size_t n) : idx(n) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  }

  template <typename Fn>
  void sample(std::int64_t k, Rng& rng, Fn&& fn) {
    std::size_t n = idx.size();
    for (std::int64_t i = 0; i < k; ++i) {
      std::size_t j = static_cast<std::size_t>(i) + rng.bounded(n - i);
      std::swap(idx[i], idx[j]);
      fn(idx[i]);
    }
  }
};

} // namespace detail

/// Label perturbation: per trial flips the label bit of ceil(fraction*N)
/// records drawn without replacement from cov(s1) u cov(s2), re-evaluates,
/// and counts survivals in the original direction. Flips are applied as
/// count deltas on a scratch copy; the table is never mutated.
inline SurvivalReport perturb_labels(const BaseTable& t, const AssocConfig& ac,
                                     const PerturbConfig& cfg, std::string subject = "ac") {
  detail::validate_ac(t, ac);
  auto pool = detail::AcPool::build(t, ac);
  Verdict base = evaluate_ac(t, ac);
  const int direction = base.direction == 0 ? 1 : base.direction;
  const std::int64_t k =
      detail::perturb_count(cfg.fraction, static_cast<std::int64_t>(pool.records.size()));

  std::int64_t survived = detail::run_trials(cfg, [&](Rng& rng) {
    detail::Sampler sampler(pool.records.size());
    std::vector<std::int64_t> pos1 = pool.pos[0], pos2 = pool.pos[1];
    sampler.sample(k, rng, [&](std::uint32_t i) {
      int delta = pool.label_bit[i] ? -1 : 1;
      auto& pos = pool.side[i] == 0 ? pos1 : pos2;
      pos[pool.sep_value[i]] += delta;
    });
    return detail::AcPool::holds(pool.n[0], pos1, pool.n[1], pos2, direction);
  });
  return detail::finish_report(std::move(subject), survived, cfg);
}

/// Coverage perturbation: per trial reassigns the separator value of the
/// chosen records (uniform over the other domain values), then resamples
/// every covered record's label as an independent biased bit with its
/// sub-population's original frequency, or reassigns exact counts in
/// exact-count mode.
inline SurvivalReport perturb_coverage(const BaseTable& t, const AssocConfig& ac,
                                       const PerturbConfig& cfg, std::string subject = "ac") {
  detail::validate_ac(t, ac);
  auto pool = detail::AcPool::build(t, ac);
  Verdict base = evaluate_ac(t, ac);
  const int direction = base.direction == 0 ? 1 : base.direction;
  const std::size_t pool_n = pool.records.size();
  const std::int64_t k = detail::perturb_count(cfg.fraction, static_cast<std::int64_t>(pool_n));
  const std::int32_t dom = pool.domain;

  // Original per-cell fractions; a record moved onto a separator value that
  // was empty before falls back to its side's aggregate fraction.
  Rat agg_frac[2];
  for (int s = 0; s < 2; ++s) {
    std::int64_t tp = 0, tn = 0;
    for (std::int32_t v = 0; v < dom; ++v) {
      tp += pool.pos[s][v];
      tn += pool.n[s][v];
    }
    agg_frac[s] = Rat(tp, std::max<std::int64_t>(1, tn));
  }
  auto cell_frac = [&](int side, std::int32_t v) -> Rat {
    if (pool.n[side][v] > 0) return Rat(pool.pos[side][v], pool.n[side][v]);
    return agg_frac[side];
  };

  std::int64_t survived = detail::run_trials(cfg, [&](Rng& rng) {
    std::vector<std::int32_t> value(pool.sep_value);
    detail::Sampler sampler(pool_n);
    sampler.sample(k, rng, [&](std::uint32_t i) {
      std::int32_t old = value[i];
      std::int32_t nv =
          dom > 1 ? static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(dom - 1)))
                  : old;
      if (dom > 1 && nv >= old) ++nv;
      value[i] = nv;
    });
    std::vector<std::int64_t> n1(dom, 0), n2(dom, 0), p1(dom, 0), p2(dom, 0);
    for (std::size_t i = 0; i < pool_n; ++i) (pool.side[i] == 0 ? n1 : n2)[value[i]] += 1;
    if (cfg.exact_count) {
      for (std::int32_t v = 0; v < dom; ++v) {
        Rat f1 = cell_frac(0, v), f2 = cell_frac(1, v);
        p1[v] = detail::round_nearest(n1[v] * f1.num, f1.den);
        p2[v] = detail::round_nearest(n2[v] * f2.num, f2.den);
      }
    } else {
      for (std::size_t i = 0; i < pool_n; ++i) {
        Rat f = cell_frac(pool.side[i], value[i]);
        bool bit =
            static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(f.den))) < f.num;
        if (bit) (pool.side[i] == 0 ? p1 : p2)[value[i]] += 1;
      }
    }
    return detail::AcPool::holds(n1, p1, n2, p2, direction);
  });
  return detail::finish_report(std::move(subject), survived, cfg);
}

namespace detail {

/// Membership machinery for the group perturbations: with exactly one
/// attribute altered per trial, membership factors into a precomputed
/// "matches everywhere else" bit and a check of the altered slot.
struct GroupPool {
  std::vector<std::uint32_t> records;
  // match_except[pop][attr * records + i]
  std::vector<std::vector<std::uint8_t>> match_except;
  std::vector<Population> pops;

  static GroupPool build(const BaseTable& t, std::vector<Population> populations,
                         const std::vector<Coverage>& pool_covs) {
    GroupPool g;
    g.pops = std::move(populations);
    std::vector<std::uint32_t> pool;
    for (const auto& c : pool_covs)
      pool.insert(pool.end(), c.record_ids.begin(), c.record_ids.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    g.records = std::move(pool);
    g.match_except.assign(g.pops.size(), {});
    for (std::size_t pi = 0; pi < g.pops.size(); ++pi) {
      auto& table_row = g.match_except[pi];
      table_row.assign(static_cast<std::size_t>(t.n_attrs) * g.records.size(), 0);
      for (std::size_t i = 0; i < g.records.size(); ++i) {
        std::uint32_t r = g.records[i];
        int mismatches = 0;
        int mismatch_attr = -1;
        for (int a = 0; a < t.n_attrs; ++a) {
          if (g.pops[pi][a] != kWildcard && t.cat(r, a) != g.pops[pi][a]) {
            ++mismatches;
            mismatch_attr = a;
          }
        }
        for (int a = 0; a < t.n_attrs; ++a) {
          bool ok = mismatches == 0 || (mismatches == 1 && mismatch_attr == a);
          table_row[static_cast<std::size_t>(a) * g.records.size() + i] = ok ? 1 : 0;
        }
      }
    }
    return g;
  }

  bool matches(std::size_t pop_idx, std::size_t i, int altered_attr,
               std::int32_t altered_value) const {
    if (!match_except[pop_idx][static_cast<std::size_t>(altered_attr) * records.size() + i])
      return false;
    std::int32_t want = pops[pop_idx][altered_attr];
    return want == kWildcard || want == altered_value;
  }
};

} // namespace detail

/// Sibling-equivalence robustness: per trial one attribute distinguishing
/// the two designated sibling pairs is altered on a share of the pooled
/// records; survival means both coverage identities still hold.
inline SurvivalReport perturb_group_sibling(const BaseTable& t, const ParadoxGroup& g,
                                            const PerturbConfig& cfg,
                                            std::string subject = "group") {
  auto members = reconstruct_members(g);
  std::vector<std::pair<Population, Population>> pairs;
  for (const auto& ac : members) {
    auto pr = std::make_pair(ac.s1, ac.s2);
    if (std::find(pairs.begin(), pairs.end(), pr) == pairs.end()) pairs.push_back(pr);
  }
  std::sort(pairs.begin(), pairs.end());
  if (pairs.size() < 2) fail(errc::group_has_no_sibling_pair, "group has no second sibling pair");
  const auto& [s1, s2] = pairs[0];
  const auto& [s1b, s2b] = pairs[1];

  // attributes concrete in exactly one of the two pairs, separators excluded
  std::vector<int> candidates;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    bool in_first = s1[i] != kWildcard || s2[i] != kWildcard;
    bool in_second = s1b[i] != kWildcard || s2b[i] != kWildcard;
    if (in_first == in_second) continue;
    if (std::find(g.seps.begin(), g.seps.end(), static_cast<int>(i)) != g.seps.end()) continue;
    candidates.push_back(static_cast<int>(i));
  }
  if (candidates.empty())
    fail(errc::group_has_no_sibling_pair, "pairs are not distinguished by any attribute");

  auto gp = detail::GroupPool::build(t, {s1, s1b, s2, s2b},
                                     {coverage(t, s1), coverage(t, s2)});
  const std::int64_t k =
      detail::perturb_count(cfg.fraction, static_cast<std::int64_t>(gp.records.size()));

  std::int64_t survived = detail::run_trials(cfg, [&](Rng& rng) {
    int attr = candidates[rng.bounded(candidates.size())];
    std::int32_t dom = t.dicts[attr].cardinality();
    std::vector<std::int32_t> altered(gp.records.size(), -2);  // -2: untouched
    detail::Sampler sampler(gp.records.size());
    sampler.sample(k, rng, [&](std::uint32_t i) {
      std::int32_t old = t.cat(gp.records[i], attr);
      std::int32_t nv =
          dom > 1 ? static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(dom - 1)))
                  : old;
      if (dom > 1 && nv >= old) ++nv;
      altered[i] = nv;
    });
    for (std::size_t i = 0; i < gp.records.size(); ++i) {
      std::int32_t v = altered[i] == -2 ? t.cat(gp.records[i], attr) : altered[i];
      if (gp.matches(0, i, attr, v) != gp.matches(1, i, attr, v)) return false;
      if (gp.matches(2, i, attr, v) != gp.matches(3, i, attr, v)) return false;
    }
    return true;
  });
  return detail::finish_report(std::move(subject), survived, cfg);
}

/// Separator-equivalence robustness: the value bijection between the first
/// two separators is computed once from unperturbed data and held fixed;
/// trials perturb attributes other than the two separators and test that
/// the per-value sub-coverage identities persist.
inline SurvivalReport perturb_group_separator(const BaseTable& t, const ParadoxGroup& g,
                                              const PerturbConfig& cfg,
                                              std::string subject = "group") {
  if (g.seps.size() < 2) fail(errc::group_has_single_separator, "group has a single separator");
  const int x = g.seps[0], x2 = g.seps[1];
  auto gp = detail::GroupPool::build(t, {g.up_e1, g.up_e2},
                                     {coverage(t, g.up_e1), coverage(t, g.up_e2)});

  std::vector<std::int32_t> f(t.dicts[x].cardinality(), -1);
  for (auto r : gp.records) {
    std::int32_t v = t.cat(r, x), w = t.cat(r, x2);
    if (f[v] == -1)
      f[v] = w;
    else if (f[v] != w)
      fail(errc::group_has_single_separator, "separators are not aligned by a bijection");
  }

  std::vector<int> candidates;
  for (int i = 0; i < t.n_attrs; ++i)
    if (i != x && i != x2) candidates.push_back(i);
  const std::int64_t k =
      detail::perturb_count(cfg.fraction, static_cast<std::int64_t>(gp.records.size()));

  std::int64_t survived = detail::run_trials(cfg, [&](Rng& rng) {
    int attr = candidates[rng.bounded(candidates.size())];
    std::int32_t dom = t.dicts[attr].cardinality();
    std::vector<std::int32_t> altered(gp.records.size(), -2);
    detail::Sampler sampler(gp.records.size());
    sampler.sample(k, rng, [&](std::uint32_t i) {
      std::int32_t old = t.cat(gp.records[i], attr);
      std::int32_t nv =
          dom > 1 ? static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(dom - 1)))
                  : old;
      if (dom > 1 && nv >= old) ++nv;
      altered[i] = nv;
    });
    for (std::size_t i = 0; i < gp.records.size(); ++i) {
      std::int32_t v = altered[i] == -2 ? t.cat(gp.records[i], attr) : altered[i];
      for (std::size_t side = 0; side < 2; ++side) {
        if (!gp.matches(side, i, attr, v)) continue;
        std::int32_t xv = attr == x ? v : t.cat(gp.records[i], x);
        std::int32_t xv2 = attr == x2 ? v : t.cat(gp.records[i], x2);
        if (f[xv] == -1 || xv2 != f[xv]) return false;
      }
    }
    return true;
  });
  return detail::finish_report(std::move(subject), survived, cfg);
}

} // namespace simpson
