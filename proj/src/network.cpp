#include "gailpen/network.hpp"

#include <cmath>
#include <stdexcept>

#include "gailpen/errors.hpp"
#include "gailpen/rng.hpp"

namespace gailpen {
namespace {

void check_spec(const NetworkSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("NetworkSpec: invalid shape");
  }
}

void check_states(const NetworkSpec& spec, std::span<const State> states) {
  if (states.empty()) {
    throw std::invalid_argument("forward: empty state batch");
  }
  for (const State& s : states) {
    if (s.horizon() != spec.sequence_length) {
      throw std::invalid_argument(
          "forward: state horizon " + std::to_string(s.horizon()) +
          " does not match network sequence length " +
          std::to_string(spec.sequence_length));
    }
  }
}

// Gathers the sliding windows of a channels x (T*B) activation matrix into
// kernel*channels x (T*B) columns, sample by sample. Row block
// [k*channels, (k+1)*channels) holds the input shifted by k - pad.
void im2col(const Eigen::MatrixXd& src, int channels, int seq_len, int batch,
            Eigen::MatrixXd& dst) {
  constexpr int kKernel = NetworkSpec::kKernel;
  constexpr int kPad = NetworkSpec::kPad;
  dst.setZero(kKernel * channels, src.cols());
  for (int b = 0; b < batch; ++b) {
    const int base = b * seq_len;
    for (int k = 0; k < kKernel; ++k) {
      const int offset = k - kPad;
      const int lo = std::max(0, -offset);
      const int hi = std::min(seq_len, seq_len - offset);
      if (hi <= lo) continue;
      dst.block(k * channels, base + lo, channels, hi - lo) =
          src.block(0, base + lo + offset, channels, hi - lo);
    }
  }
}

// Transpose of im2col: scatter-adds column gradients back onto the input.
void col2im(const Eigen::MatrixXd& src, int channels, int seq_len, int batch,
            Eigen::MatrixXd& dst) {
  constexpr int kKernel = NetworkSpec::kKernel;
  constexpr int kPad = NetworkSpec::kPad;
  dst.setZero(channels, src.cols());
  for (int b = 0; b < batch; ++b) {
    const int base = b * seq_len;
    for (int k = 0; k < kKernel; ++k) {
      const int offset = k - kPad;
      const int lo = std::max(0, -offset);
      const int hi = std::min(seq_len, seq_len - offset);
      if (hi <= lo) continue;
      dst.block(0, base + lo + offset, channels, hi - lo) +=
          src.block(k * channels, base + lo, channels, hi - lo);
    }
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

NetworkSpec actor_spec(int sequence_length) {
  return {sequence_length, 2, Squash::logistic};
}
NetworkSpec critic_spec(int sequence_length) {
  return {sequence_length, 1, Squash::identity};
}
NetworkSpec discriminator_spec(int sequence_length) {
  return {sequence_length, 1, Squash::logistic};
}

std::array<ParameterSet::ArrayRef, 6> ParameterSet::arrays() {
  return {{{"conv1_w", conv1_w.data(), conv1_w.size()},
           {"conv1_b", conv1_b.data(), conv1_b.size()},
           {"conv2_w", conv2_w.data(), conv2_w.size()},
           {"conv2_b", conv2_b.data(), conv2_b.size()},
           {"dense_w", dense_w.data(), dense_w.size()},
           {"dense_b", dense_b.data(), dense_b.size()}}};
}

std::array<ParameterSet::ConstArrayRef, 6> ParameterSet::arrays() const {
  return {{{"conv1_w", conv1_w.data(), conv1_w.size()},
           {"conv1_b", conv1_b.data(), conv1_b.size()},
           {"conv2_w", conv2_w.data(), conv2_w.size()},
           {"conv2_b", conv2_b.data(), conv2_b.size()},
           {"dense_w", dense_w.data(), dense_w.size()},
           {"dense_b", dense_b.data(), dense_b.size()}}};
}

std::ptrdiff_t ParameterSet::total_size() const {
  std::ptrdiff_t total = 0;
  for (const auto& a : arrays()) total += a.size;
  return total;
}

bool ParameterSet::all_finite() const {
  for (const auto& a : arrays()) {
    for (std::ptrdiff_t i = 0; i < a.size; ++i) {
      if (!std::isfinite(a.data[i])) return false;
    }
  }
  return true;
}

void ParameterSet::set_zero() {
  conv1_w.setZero();
  conv1_b.setZero();
  conv2_w.setZero();
  conv2_b.setZero();
  dense_w.setZero();
  dense_b.setZero();
}

ParameterSet ParameterSet::zeros(const NetworkSpec& spec) {
  check_spec(spec);
  ParameterSet p;
  p.spec = spec;
  constexpr int kIn = NetworkSpec::kInputChannels;
  constexpr int kC1 = NetworkSpec::kConv1Channels;
  constexpr int kC2 = NetworkSpec::kConv2Channels;
  constexpr int kK = NetworkSpec::kKernel;
  p.conv1_w = Eigen::MatrixXd::Zero(kC1, kK * kIn);
  p.conv1_b = Eigen::VectorXd::Zero(kC1);
  p.conv2_w = Eigen::MatrixXd::Zero(kC2, kK * kC1);
  p.conv2_b = Eigen::VectorXd::Zero(kC2);
  p.dense_w = Eigen::MatrixXd::Zero(spec.output_dim, spec.flat_dim());
  p.dense_b = Eigen::VectorXd::Zero(spec.output_dim);
  return p;
}

ParameterSet init_params(const NetworkSpec& spec, std::uint64_t seed) {
  ParameterSet p = ParameterSet::zeros(spec);
  Rng rng(seed);
  const auto fill = [&rng](Eigen::MatrixXd& w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::ptrdiff_t i = 0; i < w.size(); ++i) {
      w.data()[i] = rng.uniform(-bound, bound);
    }
  };
  fill(p.conv1_w, NetworkSpec::kInputChannels * NetworkSpec::kKernel);
  fill(p.conv2_w, NetworkSpec::kConv1Channels * NetworkSpec::kKernel);
  fill(p.dense_w, spec.flat_dim());
  return p;
}

void BatchWorkspace::forward(const ParameterSet& params,
                             std::span<const State> states) {
  check_spec(params.spec);
  check_states(params.spec, states);
  params_ = &params;
  batch_ = static_cast<int>(states.size());
  const int seq = params.spec.sequence_length;
  const int cols = seq * batch_;
  constexpr int kIn = NetworkSpec::kInputChannels;
  constexpr int kC1 = NetworkSpec::kConv1Channels;
  constexpr int kC2 = NetworkSpec::kConv2Channels;

  input_.resize(kIn, cols);
  for (int b = 0; b < batch_; ++b) {
    states[static_cast<std::size_t>(b)].fill_input(input_.data() +
                                                   static_cast<std::ptrdiff_t>(b) * 3 * seq);
  }

  im2col(input_, kIn, seq, batch_, col1_);
  pre1_.noalias() = params.conv1_w * col1_;
  pre1_.colwise() += params.conv1_b;
  act1_ = pre1_.cwiseMax(0.0);

  im2col(act1_, kC1, seq, batch_, col2_);
  pre2_.noalias() = params.conv2_w * col2_;
  pre2_.colwise() += params.conv2_b;
  act2_ = pre2_.cwiseMax(0.0);

  // column-major flatten: each sample's 64 x T block is already contiguous
  const Eigen::Map<const Eigen::MatrixXd> flat(act2_.data(),
                                               params.spec.flat_dim(), batch_);
  presquash_.noalias() = params.dense_w * flat;
  presquash_.colwise() += params.dense_b;

  if (params.spec.squash == Squash::logistic) {
    squashed_ = presquash_.unaryExpr([](double z) { return sigmoid(z); });
  } else {
    squashed_ = presquash_;
  }
}

Eigen::MatrixXd BatchWorkspace::squash_backward(
    const Eigen::MatrixXd& output_grad) const {
  if (params_->spec.squash == Squash::logistic) {
    return (output_grad.array() * squashed_.array() *
            (1.0 - squashed_.array()))
        .matrix();
  }
  return output_grad;
}

ParameterSet BatchWorkspace::param_gradients(
    const Eigen::MatrixXd& presquash_grad) const {
  const ParameterSet& p = *params_;
  const int seq = p.spec.sequence_length;

  ParameterSet g = ParameterSet::zeros(p.spec);

  const Eigen::Map<const Eigen::MatrixXd> flat(act2_.data(), p.spec.flat_dim(),
                                               batch_);
  g.dense_w.noalias() = presquash_grad * flat.transpose();
  g.dense_b = presquash_grad.rowwise().sum();

  Eigen::MatrixXd d_flat = p.dense_w.transpose() * presquash_grad;
  const Eigen::Map<const Eigen::MatrixXd> d_act2(
      d_flat.data(), NetworkSpec::kConv2Channels, seq * batch_);
  const Eigen::MatrixXd d_pre2 =
      d_act2.cwiseProduct((pre2_.array() > 0.0).cast<double>().matrix());

  g.conv2_w.noalias() = d_pre2 * col2_.transpose();
  g.conv2_b = d_pre2.rowwise().sum();

  Eigen::MatrixXd d_col2 = p.conv2_w.transpose() * d_pre2;
  Eigen::MatrixXd d_act1;
  col2im(d_col2, NetworkSpec::kConv1Channels, seq, batch_, d_act1);
  const Eigen::MatrixXd d_pre1 =
      d_act1.cwiseProduct((pre1_.array() > 0.0).cast<double>().matrix());

  g.conv1_w.noalias() = d_pre1 * col1_.transpose();
  g.conv1_b = d_pre1.rowwise().sum();
  return g;
}

Eigen::MatrixXd BatchWorkspace::input_gradients(
    const Eigen::MatrixXd& presquash_grad) const {
  const ParameterSet& p = *params_;
  const int seq = p.spec.sequence_length;

  Eigen::MatrixXd d_flat = p.dense_w.transpose() * presquash_grad;
  const Eigen::Map<const Eigen::MatrixXd> d_act2(
      d_flat.data(), NetworkSpec::kConv2Channels, seq * batch_);
  const Eigen::MatrixXd d_pre2 =
      d_act2.cwiseProduct((pre2_.array() > 0.0).cast<double>().matrix());

  Eigen::MatrixXd d_col2 = p.conv2_w.transpose() * d_pre2;
  Eigen::MatrixXd d_act1;
  col2im(d_col2, NetworkSpec::kConv1Channels, seq, batch_, d_act1);
  const Eigen::MatrixXd d_pre1 =
      d_act1.cwiseProduct((pre1_.array() > 0.0).cast<double>().matrix());

  Eigen::MatrixXd d_col1 = p.conv1_w.transpose() * d_pre1;
  Eigen::MatrixXd d_input;
  col2im(d_col1, NetworkSpec::kInputChannels, seq, batch_, d_input);
  return d_input;
}

namespace {

Eigen::MatrixXd forward_single(const ParameterSet& params, const State& state,
                               BatchWorkspace& ws) {
  ws.forward(params, std::span<const State>(&state, 1));
  return ws.outputs();
}

}  // namespace

Action actor_forward(const ParameterSet& params, const State& state) {
  if (params.spec.output_dim != 2 || params.spec.squash != Squash::logistic) {
    throw std::invalid_argument("actor_forward: not an actor parameter set");
  }
  BatchWorkspace ws;
  const Eigen::MatrixXd out = forward_single(params, state, ws);
  return Action{{out(0, 0), out(1, 0)}};
}

double critic_forward(const ParameterSet& params, const State& state) {
  if (params.spec.output_dim != 1 || params.spec.squash != Squash::identity) {
    throw std::invalid_argument("critic_forward: not a critic parameter set");
  }
  BatchWorkspace ws;
  return forward_single(params, state, ws)(0, 0);
}

double discriminator_forward(const ParameterSet& params, const State& state) {
  if (params.spec.output_dim != 1 || params.spec.squash != Squash::logistic) {
    throw std::invalid_argument(
        "discriminator_forward: not a discriminator parameter set");
  }
  BatchWorkspace ws;
  return forward_single(params, state, ws)(0, 0);
}

LossGradients loss_gradients(const ParameterSet& params,
                             std::span<const State> states,
                             const BatchLoss& loss) {
  BatchWorkspace ws;
  ws.forward(params, states);
  const double value = loss.value(ws.outputs());
  if (!std::isfinite(value)) {
    throw train_error("loss_gradients: non-finite loss value");
  }
  const Eigen::MatrixXd output_grad = loss.output_gradient(ws.outputs());
  const Eigen::MatrixXd presquash_grad = ws.squash_backward(output_grad);
  return {value, ws.param_gradients(presquash_grad)};
}

}  // namespace gailpen
