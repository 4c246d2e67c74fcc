#pragma once

#include <stdexcept>
#include <string>

namespace leadvel {

// Every failure the library reports deliberately. Violated preconditions on
// well-formed data are surfaced as one of these; anything else escaping is a
// bug.
enum class ErrorKind {
  // dataset io
  missing_file,
  malformed_json,
  raster_shape_mismatch,
  invariant_violation,
  io_failure,
  bad_magic,
  bad_maxval,
  truncated_payload,
  // geometry / samples
  box_out_of_bounds,
  no_valid_pixels,
  empty_samples,
  too_few_samples,
  // tracking
  dimension_mismatch,
  missing_ground_truth,
  // velocity / features
  non_positive_dt,
  index_out_of_range,
  feature_length_mismatch,
  // evaluation
  length_mismatch,
  empty_input,
  // configuration
  config_invalid,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace leadvel
