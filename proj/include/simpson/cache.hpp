#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "simpson/materialize.hpp"

namespace simpson {

/// Binary cache of a MaterializationResult keyed by (input digest, theta).
/// The record-level data is rebuilt from the table on load; only the group
/// structure is persisted.

inline std::uint64_t fnv1a_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i)
      h = (h ^ static_cast<unsigned char>(buf[i])) * 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_i64(std::ostream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

inline std::int64_t get_i64(std::istream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

inline void put_population(std::ostream& out, const Population& p) {
  put_i64(out, static_cast<std::int64_t>(p.size()));
  for (auto v : p.slots) put_i64(out, v);
}

inline Population get_population(std::istream& in) {
  std::int64_t n = get_i64(in);
  Population p(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) p[i] = static_cast<std::int32_t>(get_i64(in));
  return p;
}

constexpr std::uint64_t kCacheMagic = 0x53504d4154303153ULL;  // "SPMAT01S"

} // namespace detail

inline void save_materialization(const std::string& path, const MaterializationResult& mat,
                                 std::uint64_t input_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write cache " + path);
  detail::put_u64(out, detail::kCacheMagic);
  detail::put_u64(out, input_digest);
  detail::put_i64(out, mat.theta.num);
  detail::put_i64(out, mat.theta.den);
  detail::put_i64(out, mat.table->n_records);
  detail::put_i64(out, static_cast<std::int64_t>(mat.groups.size()));
  for (const auto& g : mat.groups) {
    detail::put_population(out, g.upper);
    detail::put_i64(out, static_cast<std::int64_t>(g.lowers.size()));
    for (const auto& l : g.lowers) detail::put_population(out, l);
    detail::put_i64(out, static_cast<std::int64_t>(g.uniq_ids.size()));
    for (auto u : g.uniq_ids) detail::put_u64(out, u);
  }
}

/// Loads a cached materialization for the given table; returns false when
/// the file is absent or keyed differently. Coverage, statistics and the
/// hash index are recomputed from the table.
inline bool load_materialization(const std::string& path, const BaseTable& t,
                                 std::uint64_t input_digest, const Rat& theta,
                                 MaterializationResult& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  if (detail::get_u64(in) != detail::kCacheMagic) return false;
  if (detail::get_u64(in) != input_digest) return false;
  std::int64_t num = detail::get_i64(in);
  std::int64_t den = detail::get_i64(in);
  if (den == 0 || Rat(num, den) != theta) return false;
  if (detail::get_i64(in) != t.n_records) return false;
  std::int64_t n_groups = detail::get_i64(in);
  std::vector<CoverageGroup> groups;
  groups.reserve(static_cast<std::size_t>(n_groups));
  for (std::int64_t i = 0; i < n_groups; ++i) {
    CoverageGroup g;
    g.upper = detail::get_population(in);
    std::int64_t n_lowers = detail::get_i64(in);
    for (std::int64_t k = 0; k < n_lowers; ++k) g.lowers.push_back(detail::get_population(in));
    std::int64_t n_uniq = detail::get_i64(in);
    for (std::int64_t k = 0; k < n_uniq; ++k)
      g.uniq_ids.push_back(static_cast<std::uint32_t>(detail::get_u64(in)));
    groups.push_back(std::move(g));
  }
  if (!in) return false;
  auto profile = std::make_shared<detail::Profile>(detail::Profile::build(t));
  out = detail::finalize_groups(t, theta, std::move(profile), std::move(groups), false, false);
  return true;
}

} // namespace simpson
