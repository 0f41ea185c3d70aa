#pragma once

// SMOGN rebalancing for the regression target: high-impact samples are
// oversampled by SMOTER interpolation (close neighbours) or Gaussian
// perturbation (distant neighbours); low-impact samples are undersampled.

#include <cstdint>
#include <span>
#include <vector>

#include "outage/features.hpp"
#include "outage/rng.hpp"

namespace outage {

struct TrainingSample {
  std::vector<double> z;
  double q = 0.0;

  bool operator==(const TrainingSample&) const = default;
};

struct RebalanceConfig {
  double tau = 380.0;
  std::size_t k_neighbors = 5;
  std::size_t oversample_rate = 1;  // synthetic samples per high-impact sample
  double undersample_rate = 0.5;    // retained fraction of the low-impact set
  double noise_fraction = 0.02;     // Gaussian sigma as a fraction of the feature std
  std::uint64_t seed = 0;

  void validate() const;
};

struct PartitionResult {
  std::vector<std::size_t> high;  // q >= tau
  std::vector<std::size_t> low;   // q < tau
};

PartitionResult partition(std::span<const TrainingSample> samples, double tau);

/// z* = z_r + u (z_m - z_r); q* weights each endpoint target by the distance to
/// the other endpoint, so q* = (1-u) q_r + u q_m.
TrainingSample smoter_interpolate_at(const TrainingSample& seed, const TrainingSample& neighbor, double u);
TrainingSample smoter_interpolate(const TrainingSample& seed, const TrainingSample& neighbor, Rng& rng);

/// Adds N(0, (noise_fraction * std_j)^2) to each feature; the target is copied.
/// A zero std leaves that feature unchanged.
TrainingSample gaussian_perturb(const TrainingSample& seed, double noise_fraction, std::span<const double> feature_stds,
                                Rng& rng);

enum class SampleOrigin { HighOriginal, Smoter, Gaussian, LowOriginal };

struct RebalanceResult {
  std::vector<TrainingSample> samples;
  std::vector<SampleOrigin> origin;
  std::vector<std::size_t> source;  // input index of the (seed) sample
  std::vector<std::size_t> partner;  // SMOTER neighbour input index, else == source
};

/// Output order: high-impact originals, synthetics (per rare sample in input
/// order), then the undersampled low-impact originals in shuffled order.
RebalanceResult rebalance_detailed(std::span<const TrainingSample> samples, const RebalanceConfig& cfg);
std::vector<TrainingSample> rebalance(std::span<const TrainingSample> samples, const RebalanceConfig& cfg);

std::vector<TrainingSample> to_samples(const FeatureMatrix& m);
/// Rebalances a feature matrix; synthetic rows carry the key of their seed row.
FeatureMatrix rebalance_matrix(const FeatureMatrix& m, const RebalanceConfig& cfg);

}  // namespace outage
