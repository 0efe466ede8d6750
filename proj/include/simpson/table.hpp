#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simpson/error.hpp"

namespace simpson {

/// Dictionary of one categorical attribute. Value ids follow first
/// appearance in the file, which makes two loads of the same file produce
/// identical encodings.
struct AttributeDict {
  int attr_index = 0;
  std::string name;
  std::vector<std::string> values;
  std::unordered_map<std::string, std::int32_t> ids;

  std::int32_t cardinality() const { return static_cast<std::int32_t>(values.size()); }

  std::int32_t id_of(const std::string& raw) const {
    auto it = ids.find(raw);
    return it == ids.end() ? -1 : it->second;
  }

  std::int32_t add(const std::string& raw) {
    auto it = ids.find(raw);
    if (it != ids.end()) return it->second;
    std::int32_t id = cardinality();
    ids.emplace(raw, id);
    values.push_back(raw);
    return id;
  }
};

/// Dictionary-encoded categorical table with binary label columns.
/// Immutable after load; safe for concurrent readers.
struct BaseTable {
  int n_attrs = 0;
  int m_labels = 0;
  std::vector<AttributeDict> dicts;
  std::vector<std::string> label_names;
  // raw strings mapped to 0 / 1 per label column, kept for exact round-trips
  std::vector<std::array<std::string, 2>> label_raw;

  std::int64_t n_records = 0;
  std::vector<std::int32_t> cat_rows;  // row-major, n_attrs per record
  std::vector<std::uint8_t> label_rows;  // row-major, m_labels per record
  std::vector<std::vector<std::int32_t>> cat_cols;  // column-major mirror

  std::int32_t cat(std::int64_t record, int attr) const {
    return cat_rows[record * n_attrs + attr];
  }
  std::uint8_t label(std::int64_t record, int lab) const {
    return label_rows[record * m_labels + lab];
  }

  void finalize_columns() {
    cat_cols.assign(n_attrs, {});
    for (int i = 0; i < n_attrs; ++i) {
      cat_cols[i].resize(n_records);
      for (std::int64_t r = 0; r < n_records; ++r) cat_cols[i][r] = cat(r, i);
    }
  }

  /// Raw categorical strings of one record, in attribute order.
  std::vector<std::string> decode_record(std::int64_t record) const {
    if (record < 0 || record >= n_records)
      fail(errc::index_out_of_range, "record index out of range");
    std::vector<std::string> out(n_attrs);
    for (int i = 0; i < n_attrs; ++i) out[i] = dicts[i].values[cat(record, i)];
    return out;
  }

  std::string decode_label(std::int64_t record, int lab) const {
    return label_raw[lab][label(record, lab)];
  }
};

namespace detail {

/// RFC 4180 row reader: quoted fields, "" escapes, CRLF line ends.
/// Returns false at end of input.
inline bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline int builtin_label_value(const std::string& raw) {
  std::string l = lower(raw);
  if (l == "1" || l == "true" || l == "yes") return 1;
  if (l == "0" || l == "false" || l == "no") return 0;
  return -1;
}

} // namespace detail

/// Loads a CSV with header. Non-label columns become categorical attributes
/// in header order; label columns are mapped to {0,1}. A column whose values
/// are outside the builtin true/false vocabulary needs an entry in
/// `positive_values` naming which raw value maps to 1.
inline BaseTable load_csv_stream(std::istream& in, const std::set<std::string>& label_columns,
                                 const std::map<std::string, std::string>& positive_values = {}) {
  std::vector<std::string> header;
  if (!detail::read_csv_row(in, header) || header.empty())
    fail(errc::empty_table, "input has no header row");

  for (const auto& lc : label_columns)
    if (std::find(header.begin(), header.end(), lc) == header.end())
      fail(errc::missing_column, "label column not in header: " + lc);

  BaseTable t;
  std::vector<int> col_kind(header.size(), 0);  // 0 = categorical, 1 = label
  std::vector<int> col_slot(header.size(), -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (label_columns.count(header[c])) {
      col_kind[c] = 1;
      col_slot[c] = t.m_labels++;
      t.label_names.push_back(header[c]);
    } else {
      col_kind[c] = 0;
      col_slot[c] = t.n_attrs;
      AttributeDict d;
      d.attr_index = t.n_attrs++;
      d.name = header[c];
      t.dicts.push_back(std::move(d));
    }
  }

  // raw label strings per column, in first-appearance order
  std::vector<std::vector<std::string>> label_values(t.m_labels);
  std::vector<std::vector<std::string>> raw_labels;  // per record, per label
  std::vector<std::string> row;
  while (detail::read_csv_row(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    if (row.size() != header.size())
      fail(errc::ragged_row, "row " + std::to_string(t.n_records + 1) + " has " +
                                 std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(header.size()));
    raw_labels.emplace_back(t.m_labels);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (col_kind[c] == 0) {
        t.cat_rows.push_back(t.dicts[col_slot[c]].add(row[c]));
      } else {
        auto& seen = label_values[col_slot[c]];
        if (std::find(seen.begin(), seen.end(), row[c]) == seen.end()) seen.push_back(row[c]);
        raw_labels.back()[col_slot[c]] = row[c];
      }
    }
    ++t.n_records;
  }
  if (t.n_records == 0) fail(errc::empty_table, "input has no data rows");

  // Resolve the 0/1 mapping per label column, then encode.
  t.label_raw.assign(t.m_labels, {std::string(), std::string()});
  std::vector<std::map<std::string, std::uint8_t>> label_map(t.m_labels);
  for (int j = 0; j < t.m_labels; ++j) {
    const auto& seen = label_values[j];
    if (seen.size() > 2)
      fail(errc::non_binary_label,
           "label column " + t.label_names[j] + " has " + std::to_string(seen.size()) +
               " distinct values");
    auto pv = positive_values.find(t.label_names[j]);
    if (pv != positive_values.end()) {
      for (const auto& v : seen) {
        std::uint8_t bit = (v == pv->second) ? 1 : 0;
        label_map[j][v] = bit;
        t.label_raw[j][bit] = v;
      }
      if (seen.size() == 2 && label_map[j][seen[0]] == label_map[j][seen[1]])
        fail(errc::non_binary_label, "positive value " + pv->second + " not found in column " +
                                         t.label_names[j]);
    } else {
      for (const auto& v : seen) {
        int bit = detail::builtin_label_value(v);
        if (bit < 0)
          fail(errc::non_binary_label, "label column " + t.label_names[j] +
                                           " has unmappable value '" + v +
                                           "' (use a positive-value override)");
        label_map[j][v] = static_cast<std::uint8_t>(bit);
        t.label_raw[j][bit] = v;
      }
      if (seen.size() == 2 && label_map[j][seen[0]] == label_map[j][seen[1]])
        fail(errc::non_binary_label,
             "label column " + t.label_names[j] + " maps both values to the same bit");
    }
  }
  t.label_rows.reserve(t.n_records * t.m_labels);
  for (std::int64_t r = 0; r < t.n_records; ++r)
    for (int j = 0; j < t.m_labels; ++j) t.label_rows.push_back(label_map[j][raw_labels[r][j]]);

  t.finalize_columns();
  return t;
}

inline BaseTable load_csv(const std::string& path, const std::set<std::string>& label_columns,
                          const std::map<std::string, std::string>& positive_values = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  return load_csv_stream(in, label_columns, positive_values);
}

inline BaseTable load_csv_text(const std::string& text, const std::set<std::string>& label_columns,
                               const std::map<std::string, std::string>& positive_values = {}) {
  std::istringstream in(text);
  return load_csv_stream(in, label_columns, positive_values);
}

} // namespace simpson
