#include "outage/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "outage/error.hpp"
#include "outage/simd.hpp"

namespace outage {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmNetwork::LstmNetwork(std::size_t input, std::size_t hidden, bool all_sigmoid)
    : input_(input), hidden_(hidden), all_sigmoid_(all_sigmoid) {
  if (input == 0 || hidden == 0) throw UserError("LSTM input and hidden sizes must be positive");
  theta_.assign(head_bias_offset() + 1, 0.0);
}

void LstmNetwork::initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& p : theta_) p = dist(rng);
  for (std::size_t j = 0; j < hidden_; ++j) theta_[b_offset() + hidden_ + j] = 1.0;
}

void LstmNetwork::forward(const SequenceBatch& batch, std::span<const std::size_t> indices, std::vector<double>& gates,
                          std::vector<double>& cell, std::vector<double>& hidden, std::vector<double>& out) const {
  const std::size_t B = indices.size(), L = batch.steps, D = input_, H = hidden_, G = 4 * H;
  if (batch.width != D) throw UserError("sequence width does not match the LSTM input size");
  gates.assign(L * B * G, 0.0);
  cell.assign((L + 1) * B * H, 0.0);
  hidden.assign((L + 1) * B * H, 0.0);
  out.assign(B, 0.0);
  std::vector<double> x(B * D);
  const std::span<const double> theta(theta_);
  const auto W = theta.subspan(w_offset(), G * D);
  const auto U = theta.subspan(u_offset(), G * H);
  const auto bias = theta.subspan(b_offset(), G);

  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto s = batch.sample(indices[b]).subspan(t * D, D);
      std::copy(s.begin(), s.end(), x.begin() + static_cast<std::ptrdiff_t>(b * D));
    }
    const std::span<double> pre(gates.data() + t * B * G, B * G);
    for (std::size_t b = 0; b < B; ++b) std::copy(bias.begin(), bias.end(), pre.begin() + static_cast<std::ptrdiff_t>(b * G));
    simd::gemm_nt(x, W, pre, B, G, D);
    simd::gemm_nt(std::span<const double>(hidden.data() + t * B * H, B * H), U, pre, B, G, H);

    for (std::size_t b = 0; b < B; ++b) {
      double* a = pre.data() + b * G;
      const double* c_prev = cell.data() + (t * B + b) * H;
      double* c_next = cell.data() + ((t + 1) * B + b) * H;
      double* h_next = hidden.data() + ((t + 1) * B + b) * H;
      for (std::size_t j = 0; j < H; ++j) {
        const double i = sigmoid(a[j]);
        const double f = sigmoid(a[H + j]);
        const double g = all_sigmoid_ ? sigmoid(a[2 * H + j]) : std::tanh(a[2 * H + j]);
        const double o = sigmoid(a[3 * H + j]);
        a[j] = i;
        a[H + j] = f;
        a[2 * H + j] = g;
        a[3 * H + j] = o;
        c_next[j] = f * c_prev[j] + i * g;
        h_next[j] = o * (all_sigmoid_ ? sigmoid(c_next[j]) : std::tanh(c_next[j]));
      }
    }
  }
  const auto head = theta.subspan(head_offset(), H);
  for (std::size_t b = 0; b < B; ++b)
    out[b] = simd::dot(head, std::span<const double>(hidden.data() + (L * B + b) * H, H)) + theta_[head_bias_offset()];
}

double LstmNetwork::predict(std::span<const double> sequence, std::size_t steps) const {
  const SequenceBatch one{sequence, 1, steps, input_};
  const std::size_t idx = 0;
  std::vector<double> gates, cell, hidden, out;
  forward(one, std::span<const std::size_t>(&idx, 1), gates, cell, hidden, out);
  return out[0];
}

std::vector<double> LstmNetwork::predict(const SequenceBatch& batch) const {
  std::vector<double> result(batch.count);
  std::vector<double> gates, cell, hidden, out;
  constexpr std::size_t chunk = 64;
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < batch.count; s += chunk) {
    idx.resize(std::min(chunk, batch.count - s));
    std::iota(idx.begin(), idx.end(), s);
    forward(batch, idx, gates, cell, hidden, out);
    std::copy(out.begin(), out.end(), result.begin() + static_cast<std::ptrdiff_t>(s));
  }
  return result;
}

LstmTrace LstmNetwork::trace(std::span<const double> sequence, std::size_t steps) const {
  const SequenceBatch one{sequence, 1, steps, input_};
  const std::size_t idx = 0;
  std::vector<double> gates, cell, hidden, out;
  forward(one, std::span<const std::size_t>(&idx, 1), gates, cell, hidden, out);
  LstmTrace tr;
  tr.gates = std::move(gates);
  tr.cell.assign(cell.begin() + static_cast<std::ptrdiff_t>(hidden_), cell.end());
  tr.hidden.assign(hidden.begin() + static_cast<std::ptrdiff_t>(hidden_), hidden.end());
  tr.output = out[0];
  return tr;
}

double LstmNetwork::loss_and_gradient(const SequenceBatch& batch, std::span<const double> targets,
                                      std::span<const std::size_t> indices, std::span<double> grad) const {
  const std::size_t B = indices.size(), L = batch.steps, D = input_, H = hidden_, G = 4 * H;
  if (grad.size() != theta_.size()) throw UserError("gradient buffer has the wrong size");
  std::vector<double> gates, cell, hidden, out;
  forward(batch, indices, gates, cell, hidden, out);
  std::fill(grad.begin(), grad.end(), 0.0);

  const std::span<const double> theta(theta_);
  const auto U = theta.subspan(u_offset(), G * H);
  const auto head = theta.subspan(head_offset(), H);
  auto dW = grad.subspan(w_offset(), G * D);
  auto dU = grad.subspan(u_offset(), G * H);
  auto db = grad.subspan(b_offset(), G);
  auto dhead = grad.subspan(head_offset(), H);

  double loss = 0.0;
  std::vector<double> dh(B * H, 0.0), dc(B * H, 0.0), da(B * G), x(B * D);
  const double scale = 2.0 / static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double e = out[b] - targets[indices[b]];
    loss += e * e;
    const double dy = scale * e;
    grad[head_bias_offset()] += dy;
    simd::axpy(dy, std::span<const double>(hidden.data() + (L * B + b) * H, H), dhead);
    simd::axpy(dy, head, std::span<double>(dh.data() + b * H, H));
  }

  for (std::size_t t = L; t-- > 0;) {
    for (std::size_t b = 0; b < B; ++b) {
      const double* a = gates.data() + (t * B + b) * G;
      const double* c_prev = cell.data() + (t * B + b) * H;
      const double* c_t = cell.data() + ((t + 1) * B + b) * H;
      double* dhb = dh.data() + b * H;
      double* dcb = dc.data() + b * H;
      double* dab = da.data() + b * G;
      for (std::size_t j = 0; j < H; ++j) {
        const double i = a[j], f = a[H + j], g = a[2 * H + j], o = a[3 * H + j];
        const double act = all_sigmoid_ ? sigmoid(c_t[j]) : std::tanh(c_t[j]);
        const double act_grad = all_sigmoid_ ? act * (1.0 - act) : 1.0 - act * act;
        const double d_o = dhb[j] * act;
        const double d_c = dcb[j] + dhb[j] * o * act_grad;
        dab[j] = d_c * g * i * (1.0 - i);
        dab[H + j] = d_c * c_prev[j] * f * (1.0 - f);
        dab[2 * H + j] = d_c * i * (all_sigmoid_ ? g * (1.0 - g) : 1.0 - g * g);
        dab[3 * H + j] = d_o * o * (1.0 - o);
        dcb[j] = d_c * f;
      }
      const auto s = batch.sample(indices[b]).subspan(t * D, D);
      std::copy(s.begin(), s.end(), x.begin() + static_cast<std::ptrdiff_t>(b * D));
      simd::axpy(1.0, std::span<const double>(dab, G), db);
    }
    simd::gemm_tn(da, x, dW, G, D, B);
    simd::gemm_tn(da, std::span<const double>(hidden.data() + t * B * H, B * H), dU, G, H, B);
    if (t > 0) {
      std::fill(dh.begin(), dh.end(), 0.0);
      simd::gemm_nn(da, U, dh, B, H, G);
    }
  }
  return loss / static_cast<double>(B);
}

double LstmNetwork::loss(const SequenceBatch& batch, std::span<const double> targets) const {
  const auto pred = predict(batch);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - targets[i]) * (pred[i] - targets[i]);
  return s / static_cast<double>(pred.size());
}

LstmFit train_lstm(const SequenceBatch& sequences, std::span<const double> targets, const LstmConfig& cfg) {
  if (sequences.count == 0 || sequences.steps == 0 || sequences.width == 0) throw UserError("no training sequences");
  if (targets.size() != sequences.count) throw UserError("target count does not match sequence count");
  if (sequences.data.size() != sequences.count * sequences.steps * sequences.width)
    throw UserError("sequence buffer size does not match count x steps x width");
  if (cfg.batch_size == 0 || !(cfg.learning_rate > 0.0)) throw UserError("invalid LSTM optimizer settings");

  LstmFit fit{LstmNetwork(sequences.width, cfg.hidden, cfg.all_sigmoid), {}};
  Rng init_rng = derive_rng(cfg.seed, 1);
  fit.network.initialize(init_rng);
  Rng shuffle_rng = derive_rng(cfg.seed, 2);

  auto theta = fit.network.parameters();
  std::vector<double> grad(theta.size()), m(theta.size(), 0.0), v(theta.size(), 0.0);
  std::vector<std::size_t> order(sequences.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < order.size(); s += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + s, std::min(cfg.batch_size, order.size() - s));
      const double batch_loss = fit.network.loss_and_gradient(sequences, targets, idx, grad);
      if (!std::isfinite(batch_loss))
        throw UserError("LSTM training diverged: non-finite loss in epoch " + std::to_string(epoch + 1));
      epoch_loss += batch_loss * static_cast<double>(idx.size());
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < theta.size(); ++p) {
        m[p] = cfg.beta1 * m[p] + (1.0 - cfg.beta1) * grad[p];
        v[p] = cfg.beta2 * v[p] + (1.0 - cfg.beta2) * grad[p] * grad[p];
        theta[p] -= cfg.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + cfg.epsilon);
      }
    }
    fit.training_curve.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return fit;
}

namespace {

std::vector<double> gather_all(const FeatureMatrix& m, const MinMaxScaler& scaler, const SequenceLayout& layout) {
  std::vector<double> seq(m.rows() * layout.steps * layout.step_width);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto scaled = scaler.apply(m.values.row(r));
    gather_sequence(layout, scaled,
                    std::span<double>(seq.data() + r * layout.steps * layout.step_width, layout.steps * layout.step_width));
  }
  return seq;
}

}  // namespace

LstmModel train_lstm(const FeatureMatrix& m, const LstmConfig& cfg) {
  if (m.rows() == 0) throw UserError("LSTM training needs at least one row");
  LstmModel model;
  model.config = cfg;
  model.feature_names = m.columns;
  model.layout = SequenceLayout::from(m);
  model.input_scaler.fit(m.values);
  model.target_scaler.fit(m.target);
  const auto seq = gather_all(m, model.input_scaler, model.layout);
  std::vector<double> targets(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) targets[r] = model.target_scaler.apply(m.target[r]);
  const SequenceBatch batch{seq, m.rows(), model.layout.steps, model.layout.step_width};
  auto fit = train_lstm(batch, targets, cfg);
  model.network = std::move(fit.network);
  model.training_curve = std::move(fit.training_curve);
  return model;
}

double invert_lstm_output(const LstmModel& model, double scaled) {
  return std::max(0.0, model.target_scaler.invert(scaled));
}

std::vector<double> predict_lstm(const LstmModel& model, const FeatureMatrix& m) {
  if (!model.target_scaler.fitted() || !model.input_scaler.fitted()) throw UserError("LSTM model has no fitted scalers");
  if (m.values.cols != model.input_scaler.dimension())
    throw UserError("feature matrix has " + std::to_string(m.values.cols) + " columns, LSTM expects " +
                    std::to_string(model.input_scaler.dimension()));
  if (SequenceLayout::from(m) != model.layout) throw UserError("sequence length does not match the trained LSTM");
  const auto seq = gather_all(m, model.input_scaler, model.layout);
  const SequenceBatch batch{seq, m.rows(), model.layout.steps, model.layout.step_width};
  auto out = model.network.predict(batch);
  for (auto& v : out) v = invert_lstm_output(model, v);
  return out;
}

}  // namespace outage
