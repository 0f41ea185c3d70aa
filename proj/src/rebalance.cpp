#include "outage/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "outage/error.hpp"
#include "outage/scaler.hpp"
#include "outage/simd.hpp"

namespace outage {

namespace {

constexpr std::uint64_t kUndersampleStream = 0xFFFF'FFFF'FFFF'FFFFull;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> population_stds(std::span<const TrainingSample> samples) {
  const std::size_t d = samples.front().z.size();
  std::vector<double> mean(d, 0.0), stds(d, 0.0);
  for (const auto& s : samples)
    for (std::size_t j = 0; j < d; ++j) mean[j] += s.z[j];
  for (auto& m : mean) m /= static_cast<double>(samples.size());
  for (const auto& s : samples)
    for (std::size_t j = 0; j < d; ++j) stds[j] += (s.z[j] - mean[j]) * (s.z[j] - mean[j]);
  for (auto& v : stds) v = std::sqrt(v / static_cast<double>(samples.size()));
  return stds;
}

}  // namespace

void RebalanceConfig::validate() const {
  if (!(tau > 0.0)) throw UserError("rebalance: tau must be positive");
  if (k_neighbors == 0) throw UserError("rebalance: k must be positive");
  if (!(undersample_rate > 0.0 && undersample_rate <= 1.0)) throw UserError("rebalance: undersample rate must be in (0, 1]");
  if (!(noise_fraction >= 0.0)) throw UserError("rebalance: noise fraction must be non-negative");
}

PartitionResult partition(std::span<const TrainingSample> samples, double tau) {
  PartitionResult p;
  for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].q >= tau ? p.high : p.low).push_back(i);
  return p;
}

TrainingSample smoter_interpolate_at(const TrainingSample& seed, const TrainingSample& neighbor, double u) {
  if (seed.z.size() != neighbor.z.size()) throw UserError("SMOTER: feature dimension mismatch");
  TrainingSample out;
  out.z.resize(seed.z.size());
  for (std::size_t j = 0; j < seed.z.size(); ++j) out.z[j] = seed.z[j] + u * (neighbor.z[j] - seed.z[j]);
  const double d_seed = std::sqrt(simd::squared_distance(out.z, seed.z));
  const double d_neighbor = std::sqrt(simd::squared_distance(out.z, neighbor.z));
  if (d_seed + d_neighbor == 0.0) {
    out.q = 0.5 * (seed.q + neighbor.q);
  } else {
    // Same as (d_m q_r + d_r q_m) / (d_r + d_m), written as a convex step from q_r.
    const double w = d_seed / (d_seed + d_neighbor);
    out.q = seed.q + w * (neighbor.q - seed.q);
    out.q = std::clamp(out.q, std::min(seed.q, neighbor.q), std::max(seed.q, neighbor.q));
  }
  return out;
}

TrainingSample smoter_interpolate(const TrainingSample& seed, const TrainingSample& neighbor, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return smoter_interpolate_at(seed, neighbor, unit(rng));
}

TrainingSample gaussian_perturb(const TrainingSample& seed, double noise_fraction, std::span<const double> feature_stds,
                                Rng& rng) {
  if (feature_stds.size() != seed.z.size()) throw UserError("gaussian_perturb: std vector dimension mismatch");
  if (!(noise_fraction >= 0.0)) throw UserError("gaussian_perturb: noise fraction must be non-negative");
  TrainingSample out = seed;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < out.z.size(); ++j) {
    if (!(feature_stds[j] >= 0.0) || !std::isfinite(feature_stds[j]))
      throw UserError("gaussian_perturb: feature std must be finite and non-negative");
    const double sigma = noise_fraction * feature_stds[j];
    const double draw = normal(rng);
    if (sigma > 0.0) out.z[j] += sigma * draw;
  }
  return out;
}

RebalanceResult rebalance_detailed(std::span<const TrainingSample> samples, const RebalanceConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw UserError("rebalance: no samples");
  const std::size_t dim = samples.front().z.size();
  for (const auto& s : samples) {
    if (s.z.size() != dim) throw UserError("rebalance: inconsistent feature dimension");
    if (s.q < 0.0) throw UserError("rebalance: negative target");
  }
  const auto parts = partition(samples, cfg.tau);
  if (cfg.oversample_rate > 0 && parts.high.size() < 2)
    throw UserError("rebalance: need at least 2 high-impact samples to oversample (have " +
                    std::to_string(parts.high.size()) + ")");

  RebalanceResult out;
  auto emit = [&](TrainingSample s, SampleOrigin o, std::size_t src, std::size_t partner) {
    out.samples.push_back(std::move(s));
    out.origin.push_back(o);
    out.source.push_back(src);
    out.partner.push_back(partner);
  };
  for (std::size_t i : parts.high) emit(samples[i], SampleOrigin::HighOriginal, i, i);

  if (cfg.oversample_rate > 0) {
    // Neighbour distances on min-max scaled features.
    Matrix scaled_high(parts.high.size(), dim);
    {
      Matrix all(samples.size(), dim);
      for (std::size_t i = 0; i < samples.size(); ++i) std::copy(samples[i].z.begin(), samples[i].z.end(), all.row(i).begin());
      MinMaxScaler scaler;
      scaler.fit(all);
      for (std::size_t i = 0; i < parts.high.size(); ++i) {
        const auto row = scaler.apply(std::span<const double>(samples[parts.high[i]].z));
        std::copy(row.begin(), row.end(), scaled_high.row(i).begin());
      }
    }
    const auto stds = population_stds(samples);
    const std::size_t k = std::min(cfg.k_neighbors, parts.high.size() - 1);

    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t r = 0; r < parts.high.size(); ++r) {
      dist.clear();
      for (std::size_t m = 0; m < parts.high.size(); ++m)
        if (m != r) dist.emplace_back(simd::squared_distance(scaled_high.row(r), scaled_high.row(m)), m);
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      std::vector<double> deltas(k);
      for (std::size_t i = 0; i < k; ++i) deltas[i] = std::sqrt(dist[i].first);
      const double safe_range = 0.5 * median(deltas);

      Rng rng = derive_rng(cfg.seed, r);
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      const std::size_t seed_idx = parts.high[r];
      for (std::size_t s = 0; s < cfg.oversample_rate; ++s) {
        const std::size_t n = pick(rng);
        const std::size_t neighbor_idx = parts.high[dist[n].second];
        if (deltas[n] < safe_range)
          emit(smoter_interpolate(samples[seed_idx], samples[neighbor_idx], rng), SampleOrigin::Smoter, seed_idx,
               neighbor_idx);
        else
          emit(gaussian_perturb(samples[seed_idx], cfg.noise_fraction, stds, rng), SampleOrigin::Gaussian, seed_idx,
               seed_idx);
      }
    }
  }

  std::vector<std::size_t> low = parts.low;
  Rng rng = derive_rng(cfg.seed, kUndersampleStream);
  std::shuffle(low.begin(), low.end(), rng);
  const auto keep = static_cast<std::size_t>(std::floor(static_cast<double>(low.size()) * cfg.undersample_rate));
  low.resize(std::min(keep, low.size()));
  for (std::size_t i : low) emit(samples[i], SampleOrigin::LowOriginal, i, i);
  return out;
}

std::vector<TrainingSample> rebalance(std::span<const TrainingSample> samples, const RebalanceConfig& cfg) {
  return rebalance_detailed(samples, cfg).samples;
}

std::vector<TrainingSample> to_samples(const FeatureMatrix& m) {
  std::vector<TrainingSample> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.values.row(r);
    out[r].z.assign(row.begin(), row.end());
    out[r].q = m.target[r];
  }
  return out;
}

FeatureMatrix rebalance_matrix(const FeatureMatrix& m, const RebalanceConfig& cfg) {
  const auto samples = to_samples(m);
  const auto result = rebalance_detailed(samples, cfg);
  FeatureMatrix out;
  out.columns = m.columns;
  out.lag = m.lag;
  out.values.cols = m.values.cols;
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    out.keys.push_back(m.keys[result.source[i]]);
    out.values.append_row(result.samples[i].z);
    out.target.push_back(result.samples[i].q);
  }
  return out;
}

}  // namespace outage
