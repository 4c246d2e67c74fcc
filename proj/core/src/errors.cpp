#include "leadvel/errors.hpp"

namespace leadvel {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::missing_file: return "MissingFile";
    case ErrorKind::malformed_json: return "MalformedJson";
    case ErrorKind::raster_shape_mismatch: return "RasterShapeMismatch";
    case ErrorKind::invariant_violation: return "InvariantViolation";
    case ErrorKind::io_failure: return "IoFailure";
    case ErrorKind::bad_magic: return "BadMagic";
    case ErrorKind::bad_maxval: return "BadMaxval";
    case ErrorKind::truncated_payload: return "TruncatedPayload";
    case ErrorKind::box_out_of_bounds: return "BoxOutOfBounds";
    case ErrorKind::no_valid_pixels: return "NoValidPixels";
    case ErrorKind::empty_samples: return "EmptySamples";
    case ErrorKind::too_few_samples: return "TooFewSamples";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::missing_ground_truth: return "MissingGroundTruth";
    case ErrorKind::non_positive_dt: return "NonPositiveDt";
    case ErrorKind::index_out_of_range: return "IndexOutOfRange";
    case ErrorKind::feature_length_mismatch: return "FeatureLengthMismatch";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::empty_input: return "Empty";
    case ErrorKind::config_invalid: return "ConfigInvalid";
  }
  return "UnknownError";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace leadvel
