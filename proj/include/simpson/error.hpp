#pragma once

#include <stdexcept>
#include <string>

namespace simpson {

enum class errc {
  // table
  missing_column,
  non_binary_label,
  empty_table,
  ragged_row,
  // lattice
  index_out_of_range,
  invalid_value,
  length_mismatch,
  not_comparable,
  empty_population,
  // materialize
  theta_out_of_range,
  too_many_attributes,
  // paradox
  separator_equals_differential,
  group_not_found,
  signature_mismatch,
  // synth
  domain_too_small,
  bad_pattern,
  infeasible,
  spec_infeasible,
  attribute_collision,
  domain_size_mismatch,
  label_index_invalid,
  // robustness
  group_has_no_sibling_pair,
  group_has_single_separator,
  // misc
  io_error,
  hash_collision,
};

/// Single exception type carrying a machine-checkable error code.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_column: return "MissingColumn";
    case errc::non_binary_label: return "NonBinaryLabel";
    case errc::empty_table: return "EmptyTable";
    case errc::ragged_row: return "RaggedRow";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::invalid_value: return "InvalidValue";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::not_comparable: return "NotComparable";
    case errc::empty_population: return "EmptyPopulation";
    case errc::theta_out_of_range: return "ThetaOutOfRange";
    case errc::too_many_attributes: return "TooManyAttributes";
    case errc::separator_equals_differential: return "SeparatorEqualsDifferential";
    case errc::group_not_found: return "GroupNotFound";
    case errc::signature_mismatch: return "SignatureMismatch";
    case errc::domain_too_small: return "DomainTooSmall";
    case errc::bad_pattern: return "BadPattern";
    case errc::infeasible: return "Infeasible";
    case errc::spec_infeasible: return "SpecInfeasible";
    case errc::attribute_collision: return "AttributeCollision";
    case errc::domain_size_mismatch: return "DomainSizeMismatch";
    case errc::label_index_invalid: return "LabelIndexInvalid";
    case errc::group_has_no_sibling_pair: return "GroupHasNoSiblingPair";
    case errc::group_has_single_separator: return "GroupHasSingleSeparator";
    case errc::io_error: return "IoError";
    case errc::hash_collision: return "HashCollision";
  }
  return "Unknown";
}

} // namespace simpson
