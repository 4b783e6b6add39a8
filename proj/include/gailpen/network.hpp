#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "gailpen/state.hpp"

namespace gailpen {

enum class Squash { identity, logistic };

// Shared architecture of the actor, critic and discriminator: two 1D
// convolutions over the slot axis (kernel 7, stride 1, zero padding 3 so the
// length stays T), each followed by a rectifier, then one dense layer.
// Input is the 3-channel state representation; only the output head differs.
struct NetworkSpec {
  int sequence_length = 0;  // T
  int output_dim = 1;
  Squash squash = Squash::identity;

  static constexpr int kInputChannels = 3;
  static constexpr int kConv1Channels = 128;
  static constexpr int kConv2Channels = 64;
  static constexpr int kKernel = 7;
  static constexpr int kPad = kKernel / 2;

  int flat_dim() const { return kConv2Channels * sequence_length; }
  bool valid() const {
    return sequence_length >= 1 && (output_dim == 1 || output_dim == 2);
  }
  bool operator==(const NetworkSpec&) const = default;
};

NetworkSpec actor_spec(int sequence_length);          // 2 outputs, logistic
NetworkSpec critic_spec(int sequence_length);         // 1 output, identity
NetworkSpec discriminator_spec(int sequence_length);  // 1 output, logistic

// All weights of one network. Convolution weights are stored as
// (out_channels x kernel*in_channels) matrices whose column index is
// tap * in_channels + channel, where tap k reads input position p + k - 3.
// The dense layer consumes the conv2 activation matrix (64 x T) flattened
// column-major, i.e. the 64 channels of each position are contiguous.
struct ParameterSet {
  NetworkSpec spec;
  Eigen::MatrixXd conv1_w;  // 128 x 21
  Eigen::VectorXd conv1_b;  // 128
  Eigen::MatrixXd conv2_w;  // 64 x 896
  Eigen::VectorXd conv2_b;  // 64
  Eigen::MatrixXd dense_w;  // output_dim x flat_dim
  Eigen::VectorXd dense_b;  // output_dim

  struct ArrayRef {
    const char* name;
    double* data;
    std::ptrdiff_t size;
  };
  struct ConstArrayRef {
    const char* name;
    const double* data;
    std::ptrdiff_t size;
  };
  std::array<ArrayRef, 6> arrays();
  std::array<ConstArrayRef, 6> arrays() const;
  std::ptrdiff_t total_size() const;
  bool all_finite() const;
  void set_zero();

  static ParameterSet zeros(const NetworkSpec& spec);
};

// Deterministic initialization: weights uniform in ±1/sqrt(fan_in), biases
// zero. The same seed always yields the same bytes.
ParameterSet init_params(const NetworkSpec& spec, std::uint64_t seed);

// Single-state forward passes.
Action actor_forward(const ParameterSet& params, const State& state);
double critic_forward(const ParameterSet& params, const State& state);
double discriminator_forward(const ParameterSet& params, const State& state);

// Batched forward pass with cached activations for backpropagation. The
// backward entry points take the gradient of a scalar loss with respect to
// the pre-squash outputs (out_dim x batch) and return exact gradients.
class BatchWorkspace {
 public:
  void forward(const ParameterSet& params, std::span<const State> states);

  int batch() const { return batch_; }
  const Eigen::MatrixXd& outputs() const { return squashed_; }
  const Eigen::MatrixXd& presquash() const { return presquash_; }

  // Gradients of the loss w.r.t. every parameter.
  ParameterSet param_gradients(const Eigen::MatrixXd& presquash_grad) const;
  // Gradients w.r.t. the input channels, 3 x (T * batch), one T-column block
  // per state in batch order.
  Eigen::MatrixXd input_gradients(const Eigen::MatrixXd& presquash_grad) const;

  // Chain rule through the output squash: maps d(loss)/d(outputs) to
  // d(loss)/d(presquash).
  Eigen::MatrixXd squash_backward(const Eigen::MatrixXd& output_grad) const;

 private:
  const ParameterSet* params_ = nullptr;
  int batch_ = 0;
  Eigen::MatrixXd input_;       // 3 x T*B
  Eigen::MatrixXd col1_;        // 21 x T*B
  Eigen::MatrixXd act1_;        // 128 x T*B (after relu; sign taken from pre1_)
  Eigen::MatrixXd pre1_;        // 128 x T*B
  Eigen::MatrixXd col2_;        // 896 x T*B
  Eigen::MatrixXd pre2_;        // 64 x T*B
  Eigen::MatrixXd act2_;        // 64 x T*B
  Eigen::MatrixXd presquash_;   // out x B
  Eigen::MatrixXd squashed_;    // out x B
};

// A scalar training loss expressed on the squashed batch outputs.
class BatchLoss {
 public:
  virtual ~BatchLoss() = default;
  virtual double value(const Eigen::MatrixXd& outputs) const = 0;
  virtual Eigen::MatrixXd output_gradient(const Eigen::MatrixXd& outputs) const = 0;
};

struct LossGradients {
  double loss = 0.0;
  ParameterSet gradients;
};

// Evaluates `loss` on the batch outputs of `params` and returns its exact
// gradient with respect to every parameter. Throws train_error when the
// loss value is not finite.
LossGradients loss_gradients(const ParameterSet& params,
                             std::span<const State> states,
                             const BatchLoss& loss);

double sigmoid(double z);

}  // namespace gailpen
