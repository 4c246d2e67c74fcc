#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leadvel/types.hpp"

namespace leadvel {

// Per-pixel distances extracted from a boxed disparity region.
struct DistanceSamples {
  std::vector<double> values;  // meters, all finite and > 0
  BoundingBox source_box;
  double valid_fraction = 0.0;  // valid pixels / box area
};

struct KdeConfig {
  // Empty selects Silverman's rule; a value pins the bandwidth in meters.
  std::optional<double> fixed_bandwidth_m;
  int grid_points = 512;
  int resample_count = 1000;
  std::uint64_t rng_seed = 0;
};

enum class Estimator { mode, kde, resampled };

Estimator estimator_from_name(const std::string& name);
const char* to_string(Estimator estimator) noexcept;

struct DistanceConfig {
  Estimator estimator = Estimator::kde;
  KdeConfig kde;
  double mode_bin_width_m = 0.5;
};

// distance = offset * focal_length / disparity for every valid (> 0) pixel in
// the box. Throws BoxOutOfBounds / NoValidPixels.
DistanceSamples pixel_distances(const DisparityMap& dmap, const BoundingBox& box,
                                const CameraRig& rig);

// Center of the most populated histogram bin [k*w, (k+1)*w); ties go to the
// nearer (smaller) bin.
double mode_estimate(const DistanceSamples& samples, double bin_width_m);

// 0.9 * min(sigma, IQR/1.34) * n^(-1/5), sample sigma (n-1 denominator),
// quartiles by linear interpolation between order statistics. Falls back to
// the non-zero candidate if one of sigma/IQR is zero, and to
// max(1e-6, 0.001*|x|) when both are.
double silverman_bandwidth(const DistanceSamples& samples);

// Argmax of the Gaussian KDE on a uniform grid of cfg.grid_points over
// [min-3h, max+3h]; ties go to the smallest grid value. A single sample (or
// all-equal samples) is returned as-is.
double kde_estimate(const DistanceSamples& samples, const KdeConfig& cfg);

// Draws cfg.resample_count points from the fitted KDE (uniform sample index
// plus Gaussian(0,h) noise, seeded by cfg.rng_seed), refits, and returns the
// refit's mode.
double resampled_kde_estimate(const DistanceSamples& samples, const KdeConfig& cfg);

struct DistanceTrace {
  std::vector<double> distance_m;
  // Frames whose box had no valid disparity pixel carry the previous frame's
  // estimate and are flagged here.
  std::vector<char> carried_forward;
};

// One estimate per frame from the chosen aggregator. A frame-0 box without
// valid pixels is a hard NoValidPixels error; later ones carry forward.
DistanceTrace estimate_distance_trace(const Scene& scene,
                                      const std::vector<BoundingBox>& boxes,
                                      const DistanceConfig& cfg);

}  // namespace leadvel
