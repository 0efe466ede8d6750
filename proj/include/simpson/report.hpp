#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

#include "simpson/materialize.hpp"
#include "simpson/paradox.hpp"
#include "simpson/robustness.hpp"
#include "simpson/synth.hpp"

namespace simpson {

using json = nlohmann::ordered_json;

inline double ms_between(std::chrono::steady_clock::time_point a,
                         std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

struct GroupCounts {
  std::int64_t total = 0;       // paradoxes via reconstruction
  std::int64_t groups = 0;
  std::int64_t standalone = 0;
  std::int64_t sibling_child = 0;
  std::int64_t separator = 0;
  std::int64_t statistic = 0;
};

/// Redundancy kinds of one group: sibling-child if members span more than
/// one population pair, separator if several separators, statistic if
/// several labels; standalone groups have a single member.
struct GroupKinds {
  std::int64_t member_count = 0;
  std::int64_t pair_count = 0;
  bool sibling_child = false;
  bool separator = false;
  bool statistic = false;
  bool standalone = false;
};

inline GroupKinds classify_group(const ParadoxGroup& g,
                                 const std::vector<AssocConfig>* members = nullptr) {
  std::vector<AssocConfig> local;
  if (!members) {
    local = reconstruct_members(g);
    members = &local;
  }
  GroupKinds k;
  k.member_count = static_cast<std::int64_t>(members->size());
  std::set<std::pair<Population, Population>> pairs;
  for (const auto& ac : *members) pairs.emplace(ac.s1, ac.s2);
  k.pair_count = static_cast<std::int64_t>(pairs.size());
  k.sibling_child = pairs.size() > 1;
  k.separator = g.seps.size() > 1;
  k.statistic = g.labels.size() > 1;
  k.standalone = k.member_count == 1;
  return k;
}

inline GroupCounts count_groups(const std::vector<ParadoxGroup>& groups) {
  GroupCounts c;
  c.groups = static_cast<std::int64_t>(groups.size());
  for (const auto& g : groups) {
    auto k = classify_group(g);
    c.total += k.member_count;
    c.standalone += k.standalone;
    c.sibling_child += k.sibling_child;
    c.separator += k.separator;
    c.statistic += k.statistic;
  }
  return c;
}

inline json counts_to_json(const GroupCounts& c) {
  json j;
  j["paradoxes"] = c.total;
  j["groups"] = c.groups;
  j["standalone"] = c.standalone;
  j["sibling_child_eq"] = c.sibling_child;
  j["separator_eq"] = c.separator;
  j["statistic_eq"] = c.statistic;
  return j;
}

inline json ac_to_json(const BaseTable& t, const AssocConfig& ac) {
  json j;
  j["s1"] = render(t, ac.s1);
  j["s2"] = render(t, ac.s2);
  j["separator"] = t.dicts[ac.sep].name;
  j["label"] = t.label_names[ac.label];
  return j;
}

inline json group_to_json(const BaseTable& t, const ParadoxGroup& g, bool emit_members) {
  auto members = reconstruct_members(g);
  auto kinds = classify_group(g, &members);
  json j;
  j["up_e1"] = render(t, g.up_e1);
  json l1 = json::array();
  for (const auto& l : g.low_e1) l1.push_back(render(t, l));
  j["low_e1"] = std::move(l1);
  j["up_e2"] = render(t, g.up_e2);
  json l2 = json::array();
  for (const auto& l : g.low_e2) l2.push_back(render(t, l));
  j["low_e2"] = std::move(l2);
  json seps = json::array();
  for (int s : g.seps) seps.push_back(t.dicts[s].name);
  j["separators"] = std::move(seps);
  json labels = json::array();
  for (int y : g.labels) labels.push_back(t.label_names[y]);
  j["labels"] = std::move(labels);
  j["direction"] = g.direction;
  j["member_count"] = kinds.member_count;
  j["coverage_sizes"] = json::array({g.cov_size1, g.cov_size2});
  json agg = json::array();
  for (int y : g.labels) {
    json a;
    a["label"] = t.label_names[y];
    a["e1"] = g.agg1[y].str();
    a["e2"] = g.agg2[y].str();
    agg.push_back(std::move(a));
  }
  j["aggregate"] = std::move(agg);
  j["kinds"] = json::array();
  if (kinds.sibling_child) j["kinds"].push_back("sibling_child");
  if (kinds.separator) j["kinds"].push_back("separator");
  if (kinds.statistic) j["kinds"].push_back("statistic");
  if (kinds.standalone) j["kinds"].push_back("standalone");
  char sigbuf[32];
  std::snprintf(sigbuf, sizeof sigbuf, "%016llx",
                static_cast<unsigned long long>(g.signature.key()));
  j["signature"] = sigbuf;
  if (emit_members) {
    json ms = json::array();
    for (const auto& ac : members) ms.push_back(ac_to_json(t, ac));
    j["members"] = std::move(ms);
  }
  return j;
}

inline json discovery_report(const BaseTable& t, const std::vector<ParadoxGroup>& groups,
                             const std::string& command, const Rat& theta, int threads,
                             double materialize_ms, double discover_ms, bool emit_members) {
  json j;
  j["schema"] = "sp-report/1";
  j["command"] = command;
  j["theta"] = theta.str();
  j["threads"] = threads;
  j["counts"] = counts_to_json(count_groups(groups));
  json timing;
  timing["materialize_ms"] = materialize_ms;
  timing["discover_ms"] = discover_ms;
  j["timing"] = std::move(timing);
  json gs = json::array();
  for (const auto& g : groups) gs.push_back(group_to_json(t, g, emit_members));
  j["groups"] = std::move(gs);
  return j;
}

inline json histogram_report(const std::vector<ParadoxGroup>& groups) {
  std::map<std::int64_t, std::int64_t> bins;
  for (const auto& g : groups) bins[classify_group(g).member_count] += 1;
  json j;
  j["schema"] = "sp-report/1";
  j["command"] = "stats";
  json arr = json::array();
  for (auto& [members, count] : bins) {
    json b;
    b["members"] = members;
    b["groups"] = count;
    arr.push_back(std::move(b));
  }
  j["histogram"] = std::move(arr);
  return j;
}

inline json survival_to_json(const SurvivalReport& r) {
  json j;
  j["subject"] = r.subject;
  j["survived"] = r.survived;
  j["trials"] = r.trials;
  j["survival_rate"] = r.survival_rate.str();
  j["robust"] = r.robust;
  return j;
}

inline std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string table_to_csv(const BaseTable& t) {
  std::string out;
  for (int i = 0; i < t.n_attrs; ++i) {
    if (i) out += ",";
    out += csv_escape(t.dicts[i].name);
  }
  for (int j = 0; j < t.m_labels; ++j) {
    out += ",";
    out += csv_escape(t.label_names[j]);
  }
  out += "\n";
  for (std::int64_t r = 0; r < t.n_records; ++r) {
    for (int i = 0; i < t.n_attrs; ++i) {
      if (i) out += ",";
      out += csv_escape(t.dicts[i].values[t.cat(r, i)]);
    }
    for (int j = 0; j < t.m_labels; ++j) {
      out += ",";
      out += csv_escape(t.decode_label(r, j));
    }
    out += "\n";
  }
  return out;
}

inline json ground_truth_json(const SynthSpec& spec, const GenerateResult& gen) {
  json j;
  j["schema"] = "sp-report/1";
  j["command"] = "generate";
  json sp;
  sp["n_attrs"] = spec.n_attrs;
  sp["m_labels"] = spec.m_labels;
  sp["domain_size"] = spec.domain_size;
  sp["paradox_size"] = spec.paradox_size;
  sp["target_unique"] = spec.target_unique;
  sp["seed"] = spec.seed;
  sp["enable_sibling"] = spec.enable_sibling;
  sp["enable_separator"] = spec.enable_separator;
  sp["enable_statistic"] = spec.enable_statistic;
  j["spec"] = std::move(sp);
  j["records"] = gen.table.n_records;
  json plants = json::array();
  for (const auto& plan : gen.plants) {
    json p;
    p["ac"] = ac_to_json(gen.table, plan.ac);
    json q1 = json::array(), q2 = json::array(), f1 = json::array(), f2 = json::array();
    for (const auto& r : plan.dist1) q1.push_back(r.str());
    for (const auto& r : plan.dist2) q2.push_back(r.str());
    for (const auto& r : plan.sub_freq1) f1.push_back(r.str());
    for (const auto& r : plan.sub_freq2) f2.push_back(r.str());
    p["dist1"] = std::move(q1);
    p["dist2"] = std::move(q2);
    p["sub_freq1"] = std::move(f1);
    p["sub_freq2"] = std::move(f2);
    p["margin"] = plan.margin_used.str();
    json eqs = json::array();
    for (const auto& eq : plan.planted_equivalents) eqs.push_back(ac_to_json(gen.table, eq));
    p["planted_equivalents"] = std::move(eqs);
    plants.push_back(std::move(p));
  }
  j["plants"] = std::move(plants);
  return j;
}

} // namespace simpson
