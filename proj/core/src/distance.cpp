#include "leadvel/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "leadvel/errors.hpp"
#include "leadvel/rng.hpp"

namespace leadvel {

namespace {

constexpr double kDegenerateBandwidthFloor = 1e-6;

double quantile_lerp(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double silverman_from_values(std::vector<double> values) {
  const size_t n = values.size();
  std::sort(values.begin(), values.end());

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n - 1));

  const double iqr = quantile_lerp(values, 0.75) - quantile_lerp(values, 0.25);

  double spread;
  if (sigma > 0.0 && iqr > 0.0) {
    spread = std::min(sigma, iqr / 1.34);
  } else if (sigma > 0.0) {
    spread = sigma;
  } else if (iqr > 0.0) {
    spread = iqr / 1.34;
  } else {
    return std::max(kDegenerateBandwidthFloor, 0.001 * std::fabs(values.front()));
  }
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double bandwidth_for(const std::vector<double>& values, const KdeConfig& cfg) {
  if (cfg.fixed_bandwidth_m) {
    if (!(*cfg.fixed_bandwidth_m > 0.0)) {
      raise(ErrorKind::config_invalid, "fixed KDE bandwidth must be > 0");
    }
    return *cfg.fixed_bandwidth_m;
  }
  if (values.size() == 1) {
    return std::max(kDegenerateBandwidthFloor, 0.001 * std::fabs(values.front()));
  }
  return silverman_from_values(values);
}

// Grid argmax of the Gaussian kernel density over [min-3h, max+3h].
double kde_mode_of(const std::vector<double>& values, const KdeConfig& cfg) {
  if (cfg.grid_points < 2) {
    raise(ErrorKind::config_invalid, "grid_points must be >= 2");
  }
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) return *min_it;

  const double h = bandwidth_for(values, cfg);
  const double lo = *min_it - 3.0 * h;
  const double hi = *max_it + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(cfg.grid_points - 1);

  double best_density = -1.0;
  double best_x = lo;
  for (int g = 0; g < cfg.grid_points; ++g) {
    const double x = lo + static_cast<double>(g) * step;
    double density = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      density += std::exp(-0.5 * z * z);
    }
    // The 1/(n h sqrt(2 pi)) factor is constant across the grid and cannot
    // change the argmax; kept for an honest density value.
    density /= static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi);
    if (density > best_density) {
      best_density = density;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

Estimator estimator_from_name(const std::string& name) {
  if (name == "mode") return Estimator::mode;
  if (name == "kde") return Estimator::kde;
  if (name == "resampled") return Estimator::resampled;
  raise(ErrorKind::config_invalid, "unknown estimator \"" + name + "\" (want mode|kde|resampled)");
}

const char* to_string(Estimator estimator) noexcept {
  switch (estimator) {
    case Estimator::mode: return "mode";
    case Estimator::kde: return "kde";
    case Estimator::resampled: return "resampled";
  }
  return "?";
}

DistanceSamples pixel_distances(const DisparityMap& dmap, const BoundingBox& box,
                                const CameraRig& rig) {
  if (!box.fits_within(dmap.width, dmap.height)) {
    raise(ErrorKind::box_out_of_bounds,
          "box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
              std::to_string(box.w) + "," + std::to_string(box.h) + ") exceeds raster " +
              std::to_string(dmap.width) + "x" + std::to_string(dmap.height));
  }
  DistanceSamples samples;
  samples.source_box = box;
  samples.values.reserve(static_cast<size_t>(box.area()));
  const double scale = rig.offset_m * rig.focal_length_px;
  for (int row = 0; row < box.h; ++row) {
    const float* p = dmap.values.data() + static_cast<size_t>(box.y + row) * dmap.width + box.x;
    for (int col = 0; col < box.w; ++col) {
      const float disparity = p[col];
      if (disparity > 0.0f) {
        samples.values.push_back(scale / static_cast<double>(disparity));
      }
    }
  }
  if (samples.values.empty()) {
    raise(ErrorKind::no_valid_pixels, "every pixel in the box has disparity 0");
  }
  samples.valid_fraction =
      static_cast<double>(samples.values.size()) / static_cast<double>(box.area());
  return samples;
}

double mode_estimate(const DistanceSamples& samples, double bin_width_m) {
  if (samples.values.empty()) {
    raise(ErrorKind::empty_samples, "mode_estimate needs at least one sample");
  }
  if (!(bin_width_m > 0.0)) {
    raise(ErrorKind::config_invalid, "mode bin width must be > 0");
  }
  std::map<long long, size_t> bins;
  for (double v : samples.values) {
    bins[static_cast<long long>(std::floor(v / bin_width_m))] += 1;
  }
  // std::map iterates keys ascending, so keeping strictly-greater counts
  // resolves ties toward the nearer bin.
  long long best_bin = bins.begin()->first;
  size_t best_count = 0;
  for (const auto& [bin, count] : bins) {
    if (count > best_count) {
      best_count = count;
      best_bin = bin;
    }
  }
  return (static_cast<double>(best_bin) + 0.5) * bin_width_m;
}

double silverman_bandwidth(const DistanceSamples& samples) {
  if (samples.values.size() < 2) {
    raise(ErrorKind::too_few_samples, "Silverman's rule needs >= 2 samples");
  }
  return silverman_from_values(samples.values);
}

double kde_estimate(const DistanceSamples& samples, const KdeConfig& cfg) {
  if (samples.values.empty()) {
    raise(ErrorKind::empty_samples, "kde_estimate needs at least one sample");
  }
  if (samples.values.size() == 1) return samples.values.front();
  return kde_mode_of(samples.values, cfg);
}

double resampled_kde_estimate(const DistanceSamples& samples, const KdeConfig& cfg) {
  if (samples.values.empty()) {
    raise(ErrorKind::empty_samples, "resampled_kde_estimate needs at least one sample");
  }
  if (cfg.resample_count < 1) {
    raise(ErrorKind::config_invalid, "resample_count must be >= 1");
  }
  if (samples.values.size() == 1) return samples.values.front();

  const double h = bandwidth_for(samples.values, cfg);
  Rng rng(cfg.rng_seed);
  std::vector<double> resampled(static_cast<size_t>(cfg.resample_count));
  for (double& r : resampled) {
    const auto idx = rng.index_below(samples.values.size());
    r = samples.values[idx] + h * rng.gaussian();
  }
  const auto [min_it, max_it] = std::minmax_element(resampled.begin(), resampled.end());
  if (*min_it == *max_it) return *min_it;
  return kde_mode_of(resampled, cfg);
}

DistanceTrace estimate_distance_trace(const Scene& scene,
                                      const std::vector<BoundingBox>& boxes,
                                      const DistanceConfig& cfg) {
  if (boxes.size() != scene.frames.size()) {
    raise(ErrorKind::length_mismatch,
          "need one box per frame: " + std::to_string(boxes.size()) + " boxes, " +
              std::to_string(scene.frames.size()) + " frames");
  }
  DistanceTrace trace;
  trace.distance_m.reserve(boxes.size());
  trace.carried_forward.reserve(boxes.size());
  for (size_t i = 0; i < boxes.size(); ++i) {
    try {
      const DistanceSamples samples =
          pixel_distances(scene.frames[i].disparity, boxes[i], scene.rig);
      double estimate = 0.0;
      switch (cfg.estimator) {
        case Estimator::mode: estimate = mode_estimate(samples, cfg.mode_bin_width_m); break;
        case Estimator::kde: estimate = kde_estimate(samples, cfg.kde); break;
        case Estimator::resampled: estimate = resampled_kde_estimate(samples, cfg.kde); break;
      }
      trace.distance_m.push_back(estimate);
      trace.carried_forward.push_back(0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_valid_pixels || i == 0) throw;
      trace.distance_m.push_back(trace.distance_m.back());
      trace.carried_forward.push_back(1);
    }
  }
  return trace;
}

}  // namespace leadvel
