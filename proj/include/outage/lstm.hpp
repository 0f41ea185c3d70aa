#pragma once

// Single-layer LSTM regressor trained with backpropagation through time and Adam.

#include <cstdint>
#include <span>
#include <vector>

#include "outage/features.hpp"
#include "outage/rng.hpp"
#include "outage/scaler.hpp"

namespace outage {

struct LstmConfig {
  std::size_t hidden = 128;
  std::size_t epochs = 100;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool all_sigmoid = false;  // sigmoid also for the candidate and cell output
  std::uint64_t seed = 0;

  bool operator==(const LstmConfig&) const = default;
};

/// Sequences are stored flat: sample-major, then step, then input feature.
struct SequenceBatch {
  std::span<const double> data;
  std::size_t count = 0;
  std::size_t steps = 0;
  std::size_t width = 0;

  std::span<const double> sample(std::size_t i) const { return data.subspan(i * steps * width, steps * width); }
};

/// Per-step activations of one sequence, for inspection.
struct LstmTrace {
  std::vector<double> gates;   // steps x 4H: input, forget, candidate, output (post-activation)
  std::vector<double> cell;    // steps x H
  std::vector<double> hidden;  // steps x H
  double output = 0.0;
};

class LstmNetwork {
 public:
  LstmNetwork() = default;
  LstmNetwork(std::size_t input, std::size_t hidden, bool all_sigmoid = false);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1.
  void initialize(Rng& rng);

  std::size_t input_size() const noexcept { return input_; }
  std::size_t hidden_size() const noexcept { return hidden_; }
  bool all_sigmoid() const noexcept { return all_sigmoid_; }

  /// Flat layout: W (4H x D), U (4H x H), b (4H), head weights (H), head bias.
  std::span<double> parameters() noexcept { return theta_; }
  std::span<const double> parameters() const noexcept { return theta_; }

  double predict(std::span<const double> sequence, std::size_t steps) const;
  std::vector<double> predict(const SequenceBatch& batch) const;
  LstmTrace trace(std::span<const double> sequence, std::size_t steps) const;

  /// Mean squared error over the selected samples; writes dLoss/dtheta into `grad`.
  double loss_and_gradient(const SequenceBatch& batch, std::span<const double> targets,
                           std::span<const std::size_t> indices, std::span<double> grad) const;
  double loss(const SequenceBatch& batch, std::span<const double> targets) const;

  bool operator==(const LstmNetwork&) const = default;

 private:
  std::size_t w_offset() const noexcept { return 0; }
  std::size_t u_offset() const noexcept { return 4 * hidden_ * input_; }
  std::size_t b_offset() const noexcept { return u_offset() + 4 * hidden_ * hidden_; }
  std::size_t head_offset() const noexcept { return b_offset() + 4 * hidden_; }
  std::size_t head_bias_offset() const noexcept { return head_offset() + hidden_; }

  void forward(const SequenceBatch& batch, std::span<const std::size_t> indices, std::vector<double>& gates,
               std::vector<double>& cell, std::vector<double>& hidden, std::vector<double>& out) const;

  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
  bool all_sigmoid_ = false;
  std::vector<double> theta_;
};

struct LstmFit {
  LstmNetwork network;
  std::vector<double> training_curve;  // mean training loss per epoch
};

/// Mini-batch Adam on MSE with seeded shuffling. Throws on a non-finite loss,
/// naming the epoch.
LstmFit train_lstm(const SequenceBatch& sequences, std::span<const double> targets, const LstmConfig& cfg);

struct LstmModel {
  LstmConfig config;
  LstmNetwork network;
  SequenceLayout layout;
  MinMaxScaler input_scaler;   // over feature-matrix columns
  MinMaxScaler target_scaler;  // one column
  std::vector<double> training_curve;
  std::vector<std::string> feature_names;
};

/// Scales inputs and targets with min-max scalers fit on `m`, gathers lag
/// sequences and trains.
LstmModel train_lstm(const FeatureMatrix& m, const LstmConfig& cfg);

/// Forward pass, inverse target scaling, negative outputs clamped to 0.
std::vector<double> predict_lstm(const LstmModel& model, const FeatureMatrix& m);
double invert_lstm_output(const LstmModel& model, double scaled);

}  // namespace outage
