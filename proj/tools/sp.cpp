// Command-line front end: materialize, discover, bruteforce, generate,
// perturb, and stats over CSV tables. JSON reports go to stdout or --output.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "simpson/simpson.hpp"

namespace {

using namespace simpson;

struct CommonOpts {
  std::string input;
  std::vector<std::string> labels;
  std::vector<std::string> positive_values;  // col=value
  std::string theta_text = "0";
  std::string output;
  std::string cache_dir;
  int threads = 1;
  bool verify_hashes = false;
  bool emit_members = false;
  bool strict_empty = false;
  bool ndjson = false;
  bool compare_table4 = false;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_input = true) {
  if (needs_input)
    cmd->add_option("-i,--input", o.input, "input CSV file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-l,--labels", o.labels, "label column names")->delimiter(',');
  cmd->add_option("--positive-value", o.positive_values,
                  "COL=VALUE raw value mapping to 1 for a label column");
  cmd->add_option("-t,--theta", o.theta_text, "pruning threshold (decimal or p/q)");
  cmd->add_option("-o,--output", o.output, "write the JSON report to this file");
  cmd->add_option("--threads", o.threads, "worker threads (1 = serial reference)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--verify-hashes", o.verify_hashes, "re-check record sets on every hash match");
  cmd->add_flag("--emit-members", o.emit_members, "include reconstructed members per group");
  cmd->add_flag("--strict-empty", o.strict_empty,
                "reject configurations with a half-empty separator value");
  cmd->add_flag("--ndjson", o.ndjson, "stream groups as newline-delimited JSON");
  cmd->add_flag("--compare-table4", o.compare_table4,
                "print counts beside the published Adult reference row");
  cmd->add_option("--cache", o.cache_dir, "directory for the binary materialization cache");
  cmd->add_flag("--no-timing", o.no_timing, "omit timing from the report (byte-stable output)");
}

/// Materializes through the binary cache when a cache directory is set.
MaterializationResult materialize_cached(const CommonOpts& o, const BaseTable& t,
                                         const Rat& theta) {
  if (o.cache_dir.empty()) return materialize_dfs(t, theta, o.threads, o.verify_hashes);
  std::uint64_t digest = fnv1a_digest(o.input);
  char name[64];
  std::snprintf(name, sizeof name, "%016llx_%lld_%lld.spmat",
                static_cast<unsigned long long>(digest), static_cast<long long>(theta.num),
                static_cast<long long>(theta.den));
  std::string path = o.cache_dir + "/" + name;
  MaterializationResult mat;
  if (load_materialization(path, t, digest, theta, mat)) return mat;
  mat = materialize_dfs(t, theta, o.threads, o.verify_hashes);
  save_materialization(path, mat, digest);
  return mat;
}

std::map<std::string, std::string> parse_positive(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      fail(errc::invalid_value, "--positive-value expects COL=VALUE, got " + kv);
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

BaseTable load_input(const CommonOpts& o) {
  if (o.labels.empty())
    fail(errc::missing_column, "at least one --labels column is required");
  std::set<std::string> labels(o.labels.begin(), o.labels.end());
  return load_csv(o.input, labels, parse_positive(o.positive_values));
}

void write_json(const CommonOpts& o, const json& j) {
  if (o.output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(o.output, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + o.output);
    out << j.dump(2) << "\n";
  }
}

void write_report(const CommonOpts& o, const BaseTable& t, json j,
                  const std::vector<ParadoxGroup>& groups) {
  if (o.ndjson) {
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!o.output.empty()) {
      file.open(o.output, std::ios::binary);
      if (!file) fail(errc::io_error, "cannot write " + o.output);
      out = &file;
    }
    j.erase("groups");
    *out << j.dump() << "\n";
    for (const auto& g : groups) *out << group_to_json(t, g, o.emit_members).dump() << "\n";
    return;
  }
  write_json(o, j);
}

void print_table4_block(const GroupCounts& c) {
  // published Adult reference row for side-by-side reading
  const long long ref[6] = {3880, 3460, 3094, 366, 0, 0};
  const char* names[6] = {"paradoxes",  "groups",       "standalone",
                          "sibling_eq", "separator_eq", "statistic_eq"};
  const long long got[6] = {c.total, c.groups, c.standalone, c.sibling_child, c.separator,
                            c.statistic};
  std::cerr << "counts vs published Adult row (reported, not asserted):\n";
  for (int i = 0; i < 6; ++i)
    std::cerr << "  " << names[i] << ": " << got[i] << " (published " << ref[i] << ")\n";
}

int run_discover(const CommonOpts& o, bool brute) {
  BaseTable t = load_input(o);
  Rat theta = parse_rational(o.theta_text);
  auto t0 = std::chrono::steady_clock::now();
  MaterializationResult mat =
      brute ? materialize_bruteforce(t, theta) : materialize_cached(o, t, theta);
  auto t1 = std::chrono::steady_clock::now();
  std::vector<ParadoxGroup> groups;
  if (brute) {
    // Alg. 1 + Alg. 3 path: group the flat paradox list by signature so the
    // report carries the same count block.
    auto flat = discover_bruteforce(mat, o.strict_empty);
    std::map<Signature, std::vector<const DiscoveredParadox*>> by_sig;
    for (const auto& d : flat) by_sig[compute_signature(t, d.ac)].push_back(&d);
    for (auto& [sig, ps] : by_sig) {
      auto g = construct_by_sibling(mat, ps.front()->ac);
      for (auto* d : ps) g = extend_by_sep_stat(mat, g, d->ac);
      groups.push_back(std::move(g));
    }
  } else {
    groups = discover(mat, o.threads, o.strict_empty);
  }
  auto t2 = std::chrono::steady_clock::now();
  json j = discovery_report(t, groups, brute ? "bruteforce" : "discover", theta, o.threads,
                            ms_between(t0, t1), ms_between(t1, t2), o.emit_members);
  if (o.no_timing) j.erase("timing");
  j["input"] = o.input;
  if (o.compare_table4) print_table4_block(count_groups(groups));
  write_report(o, t, std::move(j), groups);
  return 0;
}

int run_materialize(const CommonOpts& o) {
  BaseTable t = load_input(o);
  Rat theta = parse_rational(o.theta_text);
  auto t0 = std::chrono::steady_clock::now();
  auto mat = materialize_cached(o, t, theta);
  auto t1 = std::chrono::steady_clock::now();
  json j;
  j["schema"] = "sp-report/1";
  j["command"] = "materialize";
  j["input"] = o.input;
  j["theta"] = theta.str();
  if (!o.no_timing) j["timing"] = {{"materialize_ms", ms_between(t0, t1)}};
  j["group_count"] = mat.groups.size();
  json gs = json::array();
  for (const auto& g : mat.groups) {
    json e;
    e["upper"] = render(t, g.upper);
    json lows = json::array();
    for (const auto& l : g.lowers) lows.push_back(render(t, l));
    e["lowers"] = std::move(lows);
    e["coverage"] = g.cov.size();
    json stats = json::array();
    for (int y = 0; y < t.m_labels; ++y) {
      json s;
      s["label"] = t.label_names[y];
      s["fraction"] = g.stats[y].str();
      stats.push_back(std::move(s));
    }
    e["stats"] = std::move(stats);
    gs.push_back(std::move(e));
  }
  j["groups"] = std::move(gs);
  write_json(o, j);
  return 0;
}

int run_stats(const CommonOpts& o, const std::string& sweep_path) {
  if (!sweep_path.empty()) {
    std::ifstream in(sweep_path);
    if (!in) fail(errc::io_error, "cannot open sweep manifest " + sweep_path);
    json manifest = json::parse(in);
    json rows = json::array();
    for (const auto& entry : manifest) {
      SynthSpec spec;
      spec.n_attrs = entry.value("n_attrs", spec.n_attrs);
      spec.m_labels = entry.value("m_labels", spec.m_labels);
      spec.domain_size = entry.value("domain_size", spec.domain_size);
      spec.paradox_size = entry.value("paradox_size", spec.paradox_size);
      spec.target_unique = entry.value("target_unique", spec.target_unique);
      spec.seed = entry.value("seed", spec.seed);
      spec.enable_sibling = entry.value("enable_sibling", spec.enable_sibling);
      spec.enable_separator = entry.value("enable_separator", spec.enable_separator);
      spec.enable_statistic = entry.value("enable_statistic", spec.enable_statistic);
      auto gen = generate(spec);
      auto mat = materialize_dfs(gen.table, parse_rational(o.theta_text), o.threads);
      auto groups = discover(mat, o.threads);
      auto counts = count_groups(groups);
      json row;
      row["params"] = entry;
      row["counts"] = counts_to_json(counts);
      rows.push_back(std::move(row));
    }
    json j;
    j["schema"] = "sp-report/1";
    j["command"] = "stats";
    j["sweep"] = std::move(rows);
    write_json(o, j);
    return 0;
  }
  BaseTable t = load_input(o);
  Rat theta = parse_rational(o.theta_text);
  auto mat = materialize_dfs(t, theta, o.threads, o.verify_hashes);
  auto groups = discover(mat, o.threads, o.strict_empty);
  json j = histogram_report(groups);
  j["input"] = o.input;
  write_json(o, j);
  return 0;
}

std::uint64_t seed_or_env(std::uint64_t seed, bool seed_given) {
  if (seed_given) return seed;
  if (const char* env = std::getenv("SP_SEED")) return std::strtoull(env, nullptr, 10);
  return seed;
}

int run_generate(const SynthSpec& spec, const std::string& out_csv, const std::string& out_truth) {
  auto gen = generate(spec);
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + out_csv);
    out << table_to_csv(gen.table);
  } else {
    std::cout << table_to_csv(gen.table);
  }
  json truth = ground_truth_json(spec, gen);
  if (!out_truth.empty()) {
    std::ofstream out(out_truth, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + out_truth);
    out << truth.dump(2) << "\n";
  }
  return 0;
}

int run_perturb(const CommonOpts& o, PerturbConfig cfg, const std::string& kind,
                const std::string& subjects, const std::string& fraction_text,
                const std::string& threshold_text) {
  cfg.fraction = parse_rational(fraction_text);
  cfg.robust_threshold = parse_rational(threshold_text);
  cfg.threads = o.threads;
  BaseTable t = load_input(o);
  Rat theta = parse_rational(o.theta_text);
  auto mat = materialize_dfs(t, theta, o.threads, o.verify_hashes);
  auto groups = discover(mat, o.threads, o.strict_empty);

  std::vector<std::size_t> selected;
  if (subjects == "all") {
    for (std::size_t i = 0; i < groups.size(); ++i) selected.push_back(i);
  } else {
    std::stringstream ss(subjects);
    std::string tok;
    while (std::getline(ss, tok, ',')) selected.push_back(std::stoul(tok));
  }

  json arr = json::array();
  for (auto gi : selected) {
    if (gi >= groups.size()) fail(errc::index_out_of_range, "no group with id " + std::to_string(gi));
    const auto& g = groups[gi];
    std::string subject = "group:" + std::to_string(gi);
    SurvivalReport rep;
    if (kind == "label" || kind == "coverage") {
      auto members = reconstruct_members(g);
      if (members.empty()) fail(errc::group_not_found, "group has no members");
      const AssocConfig& ac = members.front();
      rep = kind == "label" ? perturb_labels(t, ac, cfg, subject)
                            : perturb_coverage(t, ac, cfg, subject);
    } else if (kind == "sibling") {
      rep = perturb_group_sibling(t, g, cfg, subject);
    } else if (kind == "separator") {
      rep = perturb_group_separator(t, g, cfg, subject);
    } else {
      fail(errc::invalid_value, "unknown perturbation kind " + kind);
    }
    arr.push_back(survival_to_json(rep));
  }
  json j;
  j["schema"] = "sp-report/1";
  j["command"] = "perturb";
  j["kind"] = kind;
  j["trials"] = cfg.trials;
  j["fraction"] = cfg.fraction.str();
  j["seed"] = cfg.seed;
  j["reports"] = std::move(arr);
  write_json(o, j);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simpson's paradox discovery with redundancy-aware grouping"};
  app.require_subcommand(1);

  CommonOpts disc, brute, mater, stats, pert;
  std::string sweep_path;

  auto* cmd_discover = app.add_subcommand("discover", "materialize + grouped paradox discovery");
  add_common(cmd_discover, disc);

  auto* cmd_brute = app.add_subcommand("bruteforce", "brute-force baseline (oracle and timing)");
  add_common(cmd_brute, brute);

  auto* cmd_mat = app.add_subcommand("materialize", "coverage groups only");
  add_common(cmd_mat, mater);

  auto* cmd_stats = app.add_subcommand("stats", "group size histogram or sweep table");
  add_common(cmd_stats, stats, false);
  cmd_stats->add_option("-i,--input", stats.input, "input CSV file");
  cmd_stats->add_option("--sweep", sweep_path, "JSON manifest of generator parameter sets");

  SynthSpec spec;
  std::string gen_csv, gen_truth;
  bool no_sibling = false, no_separator = false, no_statistic = false;
  bool seed_given = false;
  auto* cmd_gen = app.add_subcommand("generate", "synthetic table with planted paradoxes");
  cmd_gen->add_option("-n,--attrs", spec.n_attrs, "categorical attributes");
  cmd_gen->add_option("-m,--label-count", spec.m_labels, "label attributes");
  cmd_gen->add_option("-d,--domain", spec.domain_size, "values per attribute");
  cmd_gen->add_option("-U,--paradox-size", spec.paradox_size, "records per planted sibling");
  cmd_gen->add_option("--target-unique", spec.target_unique, "distinct records to reach");
  cmd_gen->add_option("--seed", spec.seed, "generator seed")->each([&](const std::string&) {
    seed_given = true;
  });
  cmd_gen->add_flag("--no-sibling", no_sibling, "skip sibling child equivalence");
  cmd_gen->add_flag("--no-separator", no_separator, "skip separator equivalence");
  cmd_gen->add_flag("--no-statistic", no_statistic, "skip statistic equivalence");
  cmd_gen->add_option("-o,--output", gen_csv, "CSV output path (default stdout)");
  cmd_gen->add_option("--truth", gen_truth, "ground-truth JSON path");

  auto* cmd_pert = app.add_subcommand("perturb", "perturbation robustness harness");
  add_common(cmd_pert, pert);
  PerturbConfig pcfg;
  std::string pkind = "label", psubjects = "all", pfraction = "1/20", pthreshold = "19/20";
  bool pseed_given = false;
  cmd_pert->add_option("--kind", pkind, "label | coverage | sibling | separator");
  cmd_pert->add_option("--subjects", psubjects, "comma-separated group ids or 'all'");
  cmd_pert->add_option("--fraction", pfraction, "perturbed record share");
  cmd_pert->add_option("--trials", pcfg.trials, "trial count");
  cmd_pert->add_option("--seed", pcfg.seed, "harness seed")->each([&](const std::string&) {
    pseed_given = true;
  });
  cmd_pert->add_option("--robust-threshold", pthreshold, "survival fraction marking robustness");
  cmd_pert->add_flag("--exact-count", pcfg.exact_count,
                     "coverage kind: exact-count label reassignment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_discover->parsed()) return run_discover(disc, false);
    if (cmd_brute->parsed()) return run_discover(brute, true);
    if (cmd_mat->parsed()) return run_materialize(mater);
    if (cmd_stats->parsed()) return run_stats(stats, sweep_path);
    if (cmd_gen->parsed()) {
      spec.seed = seed_or_env(spec.seed, seed_given);
      return run_generate(spec, gen_csv, gen_truth);
    }
    if (cmd_pert->parsed()) {
      pcfg.seed = seed_or_env(pcfg.seed, pseed_given);
      return run_perturb(pert, pcfg, pkind, psubjects, pfraction, pthreshold);
    }
  } catch (const simpson::error& e) {
    simpson::json err;
    err["error"] = simpson::errc_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    switch (e.code()) {
      case simpson::errc::infeasible:
      case simpson::errc::spec_infeasible:
        return 4;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"Internal\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  }
  return 0;
}
