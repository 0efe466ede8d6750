#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "simpson/paradox.hpp"
#include "simpson/rng.hpp"

namespace simpson {

/// Generator parameters. Each plant needs a differential and a separator
/// attribute; sibling equivalence claims one more attribute, separator
/// equivalence another. Remaining attributes hold per-plant territory
/// values so plants never overlap in coverage.
struct SynthSpec {
  int n_attrs = 6;
  int m_labels = 2;
  int domain_size = 4;
  std::int64_t paradox_size = 100;   // records per sibling (U)
  std::int64_t target_unique = 512;  // distinct records to reach (t)
  std::uint64_t seed = 0;
  bool enable_sibling = true;
  bool enable_separator = true;
  bool enable_statistic = true;
  Rat margin{1, 100};
};

/// Ground truth for one planted paradox: the base configuration, the
/// frequency pattern and sample distributions that realized it, and the
/// configurations expected to land in the same group.
struct PlantedParadox {
  AssocConfig ac;
  std::vector<Rat> sub_freq1, sub_freq2;  // per separator value
  std::vector<Rat> dist1, dist2;          // sample distributions on the simplex
  Rat margin_used;
  std::vector<AssocConfig> planted_equivalents;
};

/// Raw rows before table assembly.
struct RecordBatch {
  int n_attrs = 0;
  int m_labels = 0;
  std::vector<std::vector<std::int32_t>> cat;
  std::vector<std::vector<std::uint8_t>> lab;
};

/// Interleaved sub-population frequency pattern: 2*dX equally spaced
/// rationals k/(2*dX+1) with P2[j] < P1[j] < P2[j+1] throughout, so every
/// sub-population comparison favors side 1.
inline std::pair<std::vector<Rat>, std::vector<Rat>> make_sub_freqs(int dX) {
  if (dX < 2) fail(errc::domain_too_small, "separator domain must have at least 2 values");
  std::vector<Rat> p1(dX), p2(dX);
  const std::int64_t den = 2 * dX + 1;
  for (int j = 0; j < dX; ++j) {
    p2[j] = Rat(2 * j + 1, den);
    p1[j] = Rat(2 * j + 2, den);
  }
  return {p1, p2};
}

namespace detail {

inline void project_to_simplex(std::vector<double>& x) {
  // Euclidean projection onto the probability simplex (sort-based).
  std::vector<double> u = x;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) tau = t;
  }
  for (auto& v : x) v = std::max(0.0, v - tau);
}

inline std::vector<Rat> rationalize_simplex(const std::vector<double>& x) {
  const std::int64_t den = 1000000;
  std::vector<std::int64_t> num(x.size());
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num[i] = std::max<std::int64_t>(1, std::llround(x[i] * den));
    sum += num[i];
  }
  // absorb the rounding residual into the largest entry
  std::size_t big = std::max_element(num.begin(), num.end()) - num.begin();
  num[big] += den - sum;
  std::vector<Rat> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = Rat(num[i], den);
  return out;
}

inline Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  Rat acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

} // namespace detail

/// Solves for sample distributions Q1, Q2 closest to uniform subject to
/// the aggregate reversal Q2*P2 >= Q1*P1 + margin. Projected gradient with
/// a penalty ramp; the float solution is rationalized and then verified
/// exactly, halving the margin on failure (up to 8 times).
inline std::pair<std::vector<Rat>, std::vector<Rat>> solve_sample_dists(
    const std::vector<Rat>& p1, const std::vector<Rat>& p2, Rat margin,
    Rat* margin_used = nullptr) {
  const int d = static_cast<int>(p1.size());
  if (d < 2 || p2.size() != p1.size())
    fail(errc::domain_too_small, "need at least two separator values");
  for (int j = 0; j < d; ++j) {
    if (!(p2[j] < p1[j])) fail(errc::bad_pattern, "frequency pattern must satisfy P2[j] < P1[j]");
    if (j + 1 < d && !(p1[j] < p2[j + 1]))
      fail(errc::bad_pattern, "frequency pattern must interleave P1[j] < P2[j+1]");
  }
  std::vector<double> fp1(d), fp2(d);
  for (int j = 0; j < d; ++j) {
    fp1[j] = p1[j].to_double();
    fp2[j] = p2[j].to_double();
  }

  for (int attempt = 0; attempt < 8; ++attempt) {
    double eps = margin.to_double();
    std::vector<double> q1(d, 1.0 / d), q2(d, 1.0 / d);
    double rho = 10.0;
    for (int round = 0; round < 60; ++round) {
      const double step = 0.02;
      for (int it = 0; it < 200; ++it) {
        double g = 0.0;
        for (int j = 0; j < d; ++j) g += q1[j] * fp1[j] - q2[j] * fp2[j];
        g += 2.0 * eps;  // aim past the margin so rounding keeps it
        double push = g > 0 ? 2.0 * rho * g : 0.0;
        for (int j = 0; j < d; ++j) {
          double g1 = 2.0 * (q1[j] - 1.0 / d) + push * fp1[j];
          double g2 = 2.0 * (q2[j] - 1.0 / d) - push * fp2[j];
          q1[j] -= step * g1;
          q2[j] -= step * g2;
        }
        detail::project_to_simplex(q1);
        detail::project_to_simplex(q2);
      }
      double g = 0.0;
      for (int j = 0; j < d; ++j) g += q1[j] * fp1[j] - q2[j] * fp2[j];
      if (g + 1.5 * eps <= 0) break;
      rho *= 4.0;
    }
    auto r1 = detail::rationalize_simplex(q1);
    auto r2 = detail::rationalize_simplex(q2);
    // exact feasibility: strictly positive simplex entries and the margin
    bool ok = true;
    Rat sum1(0), sum2(0);
    for (int j = 0; j < d; ++j) {
      if (!(r1[j] > Rat(0)) || !(r2[j] > Rat(0))) ok = false;
      sum1 = sum1 + r1[j];
      sum2 = sum2 + r2[j];
    }
    if (!(sum1 == Rat(1)) || !(sum2 == Rat(1))) ok = false;
    if (ok) {
      Rat lhs = detail::dot(r2, p2);
      Rat rhs = detail::dot(r1, p1) + margin;
      if (!(lhs >= rhs)) ok = false;
    }
    if (ok) {
      if (margin_used) *margin_used = margin;
      return {r1, r2};
    }
    margin = margin / Rat(2);
  }
  fail(errc::infeasible, "no feasible sample distribution after margin retries");
}

namespace detail {

/// Largest-remainder apportionment of U records over a distribution, with
/// every cell kept at >= 1 record.
inline std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<Rat>& q) {
  const int d = static_cast<int>(q.size());
  std::vector<std::int64_t> out(d);
  std::vector<std::pair<Rat, int>> rem;
  std::int64_t assigned = 0;
  for (int j = 0; j < d; ++j) {
    Rat ideal = q[j] * Rat(total);
    out[j] = ideal.num / ideal.den;
    assigned += out[j];
    rem.push_back({ideal - Rat(out[j]), j});
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return b.first < a.first;
    return a.second < b.second;
  });
  for (std::int64_t k = 0; k < total - assigned; ++k) out[rem[k % d].second] += 1;
  for (int j = 0; j < d; ++j) {
    if (out[j] == 0) {
      auto big = std::max_element(out.begin(), out.end()) - out.begin();
      out[big] -= 1;
      out[j] += 1;
    }
  }
  return out;
}

inline std::int64_t round_half_up(std::int64_t num, std::int64_t den) {
  return (2 * num + den) / (2 * den);
}

} // namespace detail

/// Builds a table from raw rows; every attribute dictionary carries the
/// full domain v1..vd so absent values stay part of the domain.
inline BaseTable batch_to_table(const RecordBatch& batch, int domain_size) {
  BaseTable t;
  t.n_attrs = batch.n_attrs;
  t.m_labels = batch.m_labels;
  for (int i = 0; i < t.n_attrs; ++i) {
    AttributeDict d;
    d.attr_index = i;
    d.name = "X" + std::to_string(i + 1);
    for (int v = 0; v < domain_size; ++v) d.add("v" + std::to_string(v + 1));
    t.dicts.push_back(std::move(d));
  }
  for (int j = 0; j < t.m_labels; ++j) {
    t.label_names.push_back("Y" + std::to_string(j + 1));
    t.label_raw.push_back({"0", "1"});
  }
  t.n_records = static_cast<std::int64_t>(batch.cat.size());
  for (std::size_t r = 0; r < batch.cat.size(); ++r) {
    for (int i = 0; i < t.n_attrs; ++i) t.cat_rows.push_back(batch.cat[r][i]);
    for (int j = 0; j < t.m_labels; ++j) t.label_rows.push_back(batch.lab[r][j]);
  }
  t.finalize_columns();
  return t;
}

/// Emits 2*U records realizing one paradox: cell sizes by largest-remainder
/// apportionment of U*Q, positives rounded to nearest, then verified with
/// evaluate_ac and nudged by +-1 positives until the verdict holds.
inline RecordBatch emit_paradox_records(const SynthSpec& spec, PlantedParadox& plan) {
  const int d = static_cast<int>(plan.sub_freq1.size());
  std::int64_t unit = std::max<std::int64_t>(spec.paradox_size, 4LL * d);
  auto n1 = detail::apportion(unit, plan.dist1);
  auto n2 = detail::apportion(unit, plan.dist2);
  std::vector<std::int64_t> pos1(d), pos2(d);
  auto clamp_mixed = [](std::int64_t v, std::int64_t n) {
    if (n >= 2) return std::min(std::max<std::int64_t>(v, 1), n - 1);
    return std::min(std::max<std::int64_t>(v, 0), n);
  };
  for (int j = 0; j < d; ++j) {
    pos1[j] = clamp_mixed(detail::round_half_up(n1[j] * plan.sub_freq1[j].num, plan.sub_freq1[j].den), n1[j]);
    pos2[j] = clamp_mixed(detail::round_half_up(n2[j] * plan.sub_freq2[j].num, plan.sub_freq2[j].den), n2[j]);
  }

  // Counts must satisfy: per cell side 1 >= side 2, aggregate side 1 < side 2
  // (or the tie rules of the definition). Integer rounding can break either;
  // nudge single positives until evaluate_ac accepts.
  auto cell_sign = [&](int j) { return detail::sign_of(pos1[j], n1[j], pos2[j], n2[j]); };
  auto agg_sign = [&]() {
    std::int64_t a1 = 0, a2 = 0, t1 = 0, t2 = 0;
    for (int j = 0; j < d; ++j) {
      a1 += pos1[j];
      a2 += pos2[j];
      t1 += n1[j];
      t2 += n2[j];
    }
    return detail::sign_of(a1, t1, a2, t2);
  };
  bool ok = false;
  for (int iter = 0; iter < 500; ++iter) {
    int bad_cell = -1;
    for (int j = 0; j < d; ++j)
      if (cell_sign(j) < 0) {
        bad_cell = j;
        break;
      }
    if (bad_cell >= 0) {
      if (pos1[bad_cell] < n1[bad_cell])
        pos1[bad_cell] += 1;
      else if (pos2[bad_cell] > 0)
        pos2[bad_cell] -= 1;
      else
        break;
      continue;
    }
    if (agg_sign() >= 0) {
      // lower side 1 or raise side 2 where the cell has strict slack
      int pick = -1;
      for (int j = d - 1; j >= 0; --j)
        if (cell_sign(j) > 0 && pos2[j] < n2[j]) {
          pick = j;
          break;
        }
      if (pick >= 0) {
        pos2[pick] += 1;
        continue;
      }
      for (int j = 0; j < d; ++j)
        if (cell_sign(j) > 0 && pos1[j] > 0) {
          pick = j;
          break;
        }
      if (pick >= 0) {
        pos1[pick] -= 1;
        continue;
      }
      break;
    }
    ok = true;
    break;
  }
  if (!ok) fail(errc::infeasible, "could not realize paradox counts after nudging");

  RecordBatch batch;
  batch.n_attrs = spec.n_attrs;
  batch.m_labels = spec.m_labels;
  auto emit_side = [&](const Population& s, const std::vector<std::int64_t>& n,
                       const std::vector<std::int64_t>& pos) {
    for (int v = 0; v < d; ++v) {
      for (std::int64_t k = 0; k < n[v]; ++k) {
        std::vector<std::int32_t> row(spec.n_attrs);
        for (int i = 0; i < spec.n_attrs; ++i) row[i] = s[i] == kWildcard ? 0 : s[i];
        row[plan.ac.sep] = v;
        batch.cat.push_back(std::move(row));
        std::vector<std::uint8_t> labels(spec.m_labels, 0);
        labels[plan.ac.label] = k < pos[v] ? 1 : 0;
        batch.lab.push_back(std::move(labels));
      }
    }
  };
  emit_side(plan.ac.s1, n1, pos1);
  emit_side(plan.ac.s2, n2, pos2);

  BaseTable check = batch_to_table(batch, spec.domain_size);
  Verdict v = evaluate_ac(check, plan.ac);
  if (!v.is_paradox) fail(errc::infeasible, "emitted records do not verify as a paradox");
  return batch;
}

/// Value mapping that aligns a second sibling pair with the planted one.
struct SiblingMapping {
  int src_attr = -1;
  int dst_attr = -1;
  std::map<std::int32_t, std::int32_t> values;
};

/// Realizes sibling child equivalence: optionally re-anchors records onto a
/// target parent, then writes dst_attr as the mapped image of src_attr so
/// the second pair's coverages coincide with the planted pair's.
inline void realize_sibling_equiv(RecordBatch& batch, const Population& target_parent,
                                  const SiblingMapping& mapping, const AssocConfig& planted) {
  int diff = -1;
  for (std::size_t i = 0; i < planted.s1.size(); ++i)
    if (planted.s1[i] != planted.s2[i]) diff = static_cast<int>(i);
  if (mapping.dst_attr == planted.sep || mapping.dst_attr == diff)
    fail(errc::attribute_collision, "mapping target already used as separator or differential");
  for (std::size_t r = 0; r < batch.cat.size(); ++r) {
    auto& row = batch.cat[r];
    for (std::size_t i = 0; i < target_parent.size(); ++i)
      if (target_parent[i] != kWildcard) row[i] = target_parent[i];
    auto it = mapping.values.find(row[mapping.src_attr]);
    if (it != mapping.values.end()) row[mapping.dst_attr] = it->second;
  }
}

/// Realizes separator equivalence: rewrites sep2 through a fixed bijection
/// of the planted separator's domain on every record.
inline void realize_separator_equiv(RecordBatch& batch, int sep, int sep2,
                                    const std::vector<std::int32_t>& bijection, int domain_size) {
  if (static_cast<int>(bijection.size()) != domain_size)
    fail(errc::domain_size_mismatch, "bijection must cover the separator domain");
  std::vector<bool> seen(domain_size, false);
  for (auto v : bijection) {
    if (v < 0 || v >= domain_size || seen[v])
      fail(errc::domain_size_mismatch, "mapping is not a bijection of the domain");
    seen[v] = true;
  }
  for (auto& row : batch.cat) row[sep2] = bijection[row[sep]];
}

/// Realizes statistic equivalence: label2 becomes a copy of the planted
/// label on all batch records.
inline void realize_statistic_equiv(RecordBatch& batch, int label, int label2) {
  if (label2 < 0 || label2 >= batch.m_labels || label < 0 || label >= batch.m_labels)
    fail(errc::label_index_invalid, "label index out of range");
  for (auto& lab : batch.lab) lab[label2] = lab[label];
}

struct GenerateResult {
  BaseTable table;
  std::vector<PlantedParadox> plants;
};

/// Plants paradoxes on disjoint attribute-value territory until the unique
/// record target is met, applying the enabled equivalence realizations.
/// Deterministic under the seed.
inline GenerateResult generate(const SynthSpec& spec) {
  const int n = spec.n_attrs, m = spec.m_labels, d = spec.domain_size;
  if (d < 2 || n < 3 || m < 1) fail(errc::spec_infeasible, "need d >= 2, n >= 3, m >= 1");
  if (spec.enable_statistic && m < 2)
    fail(errc::spec_infeasible, "statistic equivalence needs at least two labels");
  int needed = 2 + (spec.enable_sibling ? 1 : 0) + (spec.enable_separator ? 1 : 0);
  if (needed > n) fail(errc::spec_infeasible, "not enough attributes for the enabled equivalences");
  {
    // enforce t << product of domains (t <= prod d / 4), saturating the product
    __int128 prod = 1;
    for (int i = 0; i < n && prod < (static_cast<__int128>(1) << 62); ++i) prod *= d;
    if (static_cast<__int128>(spec.target_unique) * 4 > prod)
      fail(errc::spec_infeasible, "target_unique must be at most domain product / 4");
  }

  const int a_diff = 0;
  const int a_sep = 1;
  const int a_sib = spec.enable_sibling ? 2 : -1;
  const int a_sep2 = spec.enable_separator ? (spec.enable_sibling ? 3 : 2) : -1;
  std::vector<int> territory;
  for (int i = needed; i < n; ++i) territory.push_back(i);

  std::int64_t combos = 1;
  for (std::size_t k = 0; k < territory.size(); ++k) {
    combos *= d;
    if (combos > (1LL << 40)) break;
  }
  const std::int64_t pairs = d / 2;
  const std::int64_t capacity = combos * pairs;

  RecordBatch all;
  all.n_attrs = n;
  all.m_labels = m;
  GenerateResult res;
  if (spec.target_unique <= 0) {
    res.table = batch_to_table(all, d);
    return res;
  }

  Rng rng(spec.seed);
  auto [p1, p2] = make_sub_freqs(d);
  Rat margin_used;
  auto [q1, q2] = solve_sample_dists(p1, p2, spec.margin, &margin_used);

  std::unordered_set<std::uint64_t> unique_rows;
  auto row_key = [&](const std::vector<std::int32_t>& cat, const std::vector<std::uint8_t>& lab) {
    std::uint64_t h = 0x9ae16a3b2f90404fULL;
    for (auto v : cat) h = splitmix64(h ^ static_cast<std::uint64_t>(v + 1));
    for (auto v : lab) h = splitmix64(h ^ (static_cast<std::uint64_t>(v) + 0x51));
    return h;
  };

  std::int64_t planted = 0;
  while (static_cast<std::int64_t>(unique_rows.size()) < spec.target_unique) {
    if (planted >= capacity)
      fail(errc::spec_infeasible, "attribute/value territory exhausted before reaching target");
    // combo-major allocation: every territory combo is claimed once before
    // a second differential-value pair lands next to an existing plant
    std::int64_t slot = planted++;
    std::int64_t combo = slot % combos;
    std::int32_t pair_idx = static_cast<std::int32_t>(slot / combos);
    std::int32_t u1 = 2 * pair_idx, u2 = 2 * pair_idx + 1;
    int base_label = static_cast<int>(slot % m);

    Population parent(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < territory.size(); ++k) {
      parent[territory[k]] = static_cast<std::int32_t>(combo % d);
      combo /= d;
    }

    PlantedParadox plan;
    plan.ac.s1 = parent.with_slot(a_diff, u1);
    plan.ac.s2 = parent.with_slot(a_diff, u2);
    plan.ac.sep = a_sep;
    plan.ac.label = base_label;
    plan.sub_freq1 = p1;
    plan.sub_freq2 = p2;
    plan.dist1 = q1;
    plan.dist2 = q2;
    plan.margin_used = margin_used;

    RecordBatch batch = emit_paradox_records(spec, plan);

    if (spec.enable_sibling) {
      SiblingMapping map;
      map.src_attr = a_diff;
      map.dst_attr = a_sib;
      map.values[u1] = u1;
      map.values[u2] = u2;
      realize_sibling_equiv(batch, parent, map, plan.ac);
      AssocConfig twin;
      twin.s1 = parent.with_slot(a_sib, u1);
      twin.s2 = parent.with_slot(a_sib, u2);
      twin.sep = a_sep;
      twin.label = base_label;
      plan.planted_equivalents.push_back(std::move(twin));
    }
    if (spec.enable_separator) {
      std::int32_t rot = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(d)));
      std::vector<std::int32_t> bij(d);
      for (int v = 0; v < d; ++v) bij[v] = (v + rot) % d;
      realize_separator_equiv(batch, a_sep, a_sep2, bij, d);
      AssocConfig twin = plan.ac;
      twin.sep = a_sep2;
      plan.planted_equivalents.push_back(std::move(twin));
    }
    if (spec.enable_statistic) {
      for (int y = 0; y < m; ++y) {
        if (y == base_label) continue;
        realize_statistic_equiv(batch, base_label, y);
        AssocConfig twin = plan.ac;
        twin.label = y;
        plan.planted_equivalents.push_back(std::move(twin));
      }
    }

    for (std::size_t r = 0; r < batch.cat.size(); ++r) {
      unique_rows.insert(row_key(batch.cat[r], batch.lab[r]));
      all.cat.push_back(batch.cat[r]);
      all.lab.push_back(batch.lab[r]);
    }
    res.plants.push_back(std::move(plan));
  }

  res.table = batch_to_table(all, d);

  // Final verification against the assembled table; unverified plants are
  // dropped from the ground truth.
  std::vector<PlantedParadox> verified;
  for (auto& plan : res.plants) {
    bool ok = evaluate_ac(res.table, plan.ac).is_paradox;
    for (const auto& eq : plan.planted_equivalents)
      if (ok) ok = evaluate_ac(res.table, eq).is_paradox;
    if (ok) verified.push_back(std::move(plan));
  }
  res.plants = std::move(verified);
  return res;
}

} // namespace simpson
