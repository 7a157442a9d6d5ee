#ifndef SPIKESEV_NN_LAYERS_HPP
#define SPIKESEV_NN_LAYERS_HPP

// Layer kernels as free functions over row-major Eigen matrices, plus the
// stateful layer objects that cache what their backward pass needs.
//
// Sequence activations are [length, channels] matrices; flat activations
// are 1 x n row vectors.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spikesev/common.hpp"
#include "spikesev/nn/spec.hpp"
#include "spikesev/random.hpp"

namespace spikesev::nn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// A trainable tensor. `shape` is the logical shape; `value` stores the data
/// row-major as a 2-D matrix whose size equals product(shape).
template <typename Scalar>
struct Param {
  std::string name;
  std::vector<int> shape;
  Mat<Scalar> value;
  Mat<Scalar> grad;
  bool regularized = true;  // biases are excluded from the L2 penalty

  Eigen::Index size() const { return value.size(); }
};

template <typename Scalar>
Param<Scalar> make_param(std::string name, std::vector<int> shape, Eigen::Index rows,
                         Eigen::Index cols, bool regularized) {
  Param<Scalar> p;
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value = Mat<Scalar>::Zero(rows, cols);
  p.grad = Mat<Scalar>::Zero(rows, cols);
  p.regularized = regularized;
  return p;
}

/// Train samples fresh dropout masks, Replay reuses the last ones, Infer
/// disables dropout. All three cache activations for backward.
enum class Mode { Train, Replay, Infer };

// ---------------------------------------------------------------------------
// Kernels

/// Row t of the returned view is input rows t..t+k-1 flattened, so valid
/// convolution becomes one matrix product.
template <typename Scalar>
auto sliding_windows(const Mat<Scalar>& input, int kernel) {
  using Strided = Eigen::Map<const Mat<Scalar>, 0, Eigen::OuterStride<>>;
  const Eigen::Index channels = input.cols();
  return Strided(input.data(), input.rows() - kernel + 1, kernel * channels,
                 Eigen::OuterStride<>(channels));
}

/// out[t, f] = bias[f] + sum_{i<k, c<C} input[t+i, c] * weights[i*C + c, f]
template <typename Scalar>
Mat<Scalar> conv1d_forward(const Mat<Scalar>& input, const Mat<Scalar>& weights,
                           const RowVec<Scalar>& bias) {
  const Eigen::Index channels = input.cols();
  if (channels == 0 || weights.rows() % channels != 0)
    throw ShapeError("conv1d: weight rows must be kernel * channels");
  const int kernel = static_cast<int>(weights.rows() / channels);
  if (input.rows() < kernel)
    throw ShapeError("conv1d: input length " + std::to_string(input.rows()) + " < kernel " +
                     std::to_string(kernel));
  if (bias.size() != weights.cols()) throw ShapeError("conv1d: bias size mismatch");
  Mat<Scalar> out = sliding_windows(input, kernel) * weights;
  out.rowwise() += bias;
  return out;
}

/// Accumulates weight/bias gradients and returns the input gradient.
template <typename Scalar>
Mat<Scalar> conv1d_backward(const Mat<Scalar>& input, const Mat<Scalar>& weights,
                            const Mat<Scalar>& grad_out, Mat<Scalar>& grad_weights,
                            Mat<Scalar>& grad_bias) {
  const Eigen::Index channels = input.cols();
  const int kernel = static_cast<int>(weights.rows() / channels);
  const auto windows = sliding_windows(input, kernel);
  grad_weights.noalias() += windows.transpose() * grad_out;
  grad_bias += grad_out.colwise().sum();

  const Mat<Scalar> grad_windows = grad_out * weights.transpose();
  Mat<Scalar> grad_in = Mat<Scalar>::Zero(input.rows(), channels);
  const Eigen::Index span = kernel * channels;
  for (Eigen::Index t = 0; t < grad_windows.rows(); ++t) {
    Eigen::Map<RowVec<Scalar>> dst(grad_in.data() + t * channels, span);
    dst += grad_windows.row(t);
  }
  return grad_in;
}

/// Non-overlapping max pooling, trailing remainder dropped. `argmax` (if
/// given) receives the winning input row per output cell; ties go to the
/// first maximum.
template <typename Scalar>
Mat<Scalar> maxpool1d_forward(const Mat<Scalar>& input, int pool,
                              std::vector<Eigen::Index>* argmax = nullptr) {
  if (pool < 1) throw ShapeError("maxpool1d: pool must be >= 1");
  const Eigen::Index out_len = input.rows() / pool;
  const Eigen::Index channels = input.cols();
  Mat<Scalar> out(out_len, channels);
  if (argmax) argmax->assign(static_cast<std::size_t>(out_len * channels), 0);
  for (Eigen::Index t = 0; t < out_len; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      Eigen::Index best = t * pool;
      for (Eigen::Index j = 1; j < pool; ++j)
        if (input(t * pool + j, c) > input(best, c)) best = t * pool + j;
      out(t, c) = input(best, c);
      if (argmax) (*argmax)[static_cast<std::size_t>(t * channels + c)] = best;
    }
  }
  return out;
}

template <typename Scalar>
Mat<Scalar> maxpool1d_backward(Eigen::Index input_rows, const std::vector<Eigen::Index>& argmax,
                               const Mat<Scalar>& grad_out) {
  Mat<Scalar> grad_in = Mat<Scalar>::Zero(input_rows, grad_out.cols());
  for (Eigen::Index t = 0; t < grad_out.rows(); ++t)
    for (Eigen::Index c = 0; c < grad_out.cols(); ++c)
      grad_in(argmax[static_cast<std::size_t>(t * grad_out.cols() + c)], c) += grad_out(t, c);
  return grad_in;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Mat<Scalar> activate(const Mat<Scalar>& z, Activation act) {
  switch (act) {
    case Activation::Relu: return z.cwiseMax(Scalar(0));
    case Activation::Sigmoid: return z.unaryExpr([](Scalar v) { return sigmoid(v); });
    case Activation::Linear: return z;
  }
  return z;
}

/// Affine map then activation; input is 1 x n, weights n x m.
template <typename Scalar>
Mat<Scalar> dense_forward(const Mat<Scalar>& input, const Mat<Scalar>& weights,
                          const RowVec<Scalar>& bias, Activation act) {
  if (input.cols() != weights.rows() || bias.size() != weights.cols())
    throw ShapeError("dense: shape mismatch (" + std::to_string(input.cols()) + " inputs, " +
                     std::to_string(weights.rows()) + "x" + std::to_string(weights.cols()) +
                     " weights)");
  Mat<Scalar> z = input * weights;
  z.rowwise() += bias;
  return activate(z, act);
}

/// Inverted dropout. In training each unit is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate).
template <typename Scalar>
Mat<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("dropout rate must lie in [0, 1)");
  const Scalar keep = Scalar(1.0 / (1.0 - rate));
  Mat<Scalar> mask(rows, cols);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.uniform() < rate ? Scalar(0) : keep;
  return mask;
}

template <typename Scalar>
Mat<Scalar> dropout(const Mat<Scalar>& input, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("dropout rate must lie in [0, 1)");
  if (mode == Mode::Infer || rate == 0.0) return input;
  return input.cwiseProduct(dropout_mask<Scalar>(input.rows(), input.cols(), rate, rng));
}

/// Parameters of a single-layer LSTM. Gate blocks are ordered i, f, g, o
/// along the 4*units axis.
template <typename Scalar>
struct LstmWeights {
  const Mat<Scalar>& kernel;     // C x 4U
  const Mat<Scalar>& recurrent;  // U x 4U
  const Mat<Scalar>& bias;       // 1 x 4U
};

/// Per-step activations kept for backpropagation through time.
template <typename Scalar>
struct LstmTrace {
  Mat<Scalar> gates;   // T x 4U, activated
  Mat<Scalar> cells;   // T x U
  Mat<Scalar> hidden;  // T x U
};

/// Runs the LSTM from zero state and returns the final hidden state (1 x U).
template <typename Scalar>
Mat<Scalar> lstm_forward(const Mat<Scalar>& input, const LstmWeights<Scalar>& w,
                         LstmTrace<Scalar>* trace = nullptr) {
  const Eigen::Index steps = input.rows();
  const Eigen::Index units = w.recurrent.rows();
  if (steps == 0) throw ShapeError("lstm: empty input sequence");
  if (input.cols() != w.kernel.rows() || w.kernel.cols() != 4 * units)
    throw ShapeError("lstm: kernel shape mismatch");

  // Input contributions for all steps at once.
  Mat<Scalar> pre = input * w.kernel;
  pre.rowwise() += RowVec<Scalar>(w.bias);
  if (trace) {
    trace->gates.resize(steps, 4 * units);
    trace->cells.resize(steps, units);
    trace->hidden.resize(steps, units);
  }
  RowVec<Scalar> h = RowVec<Scalar>::Zero(units);
  RowVec<Scalar> c = RowVec<Scalar>::Zero(units);
  RowVec<Scalar> z(4 * units);
  for (Eigen::Index t = 0; t < steps; ++t) {
    z = pre.row(t);
    z.noalias() += h * w.recurrent;
    for (Eigen::Index j = 0; j < units; ++j) {
      const Scalar ig = sigmoid(z[j]);
      const Scalar fg = sigmoid(z[units + j]);
      const Scalar gg = std::tanh(z[2 * units + j]);
      const Scalar og = sigmoid(z[3 * units + j]);
      c[j] = fg * c[j] + ig * gg;
      h[j] = og * std::tanh(c[j]);
      z[j] = ig;
      z[units + j] = fg;
      z[2 * units + j] = gg;
      z[3 * units + j] = og;
    }
    if (trace) {
      trace->gates.row(t) = z;
      trace->cells.row(t) = c;
      trace->hidden.row(t) = h;
    }
  }
  return h;
}

/// Backpropagation through time for a final-hidden-state output.
template <typename Scalar>
Mat<Scalar> lstm_backward(const Mat<Scalar>& input, const LstmWeights<Scalar>& w,
                          const LstmTrace<Scalar>& trace, const Mat<Scalar>& grad_h_last,
                          Mat<Scalar>& grad_kernel, Mat<Scalar>& grad_recurrent,
                          Mat<Scalar>& grad_bias) {
  const Eigen::Index steps = input.rows();
  const Eigen::Index units = w.recurrent.rows();
  Mat<Scalar> grad_pre(steps, 4 * units);
  RowVec<Scalar> dh = grad_h_last;
  RowVec<Scalar> dc = RowVec<Scalar>::Zero(units);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    for (Eigen::Index j = 0; j < units; ++j) {
      const Scalar ig = trace.gates(t, j);
      const Scalar fg = trace.gates(t, units + j);
      const Scalar gg = trace.gates(t, 2 * units + j);
      const Scalar og = trace.gates(t, 3 * units + j);
      const Scalar tc = std::tanh(trace.cells(t, j));
      const Scalar c_prev = t > 0 ? trace.cells(t - 1, j) : Scalar(0);
      const Scalar d_o = dh[j] * tc;
      const Scalar d_c = dc[j] + dh[j] * og * (Scalar(1) - tc * tc);
      grad_pre(t, j) = d_c * gg * ig * (Scalar(1) - ig);
      grad_pre(t, units + j) = d_c * c_prev * fg * (Scalar(1) - fg);
      grad_pre(t, 2 * units + j) = d_c * ig * (Scalar(1) - gg * gg);
      grad_pre(t, 3 * units + j) = d_o * og * (Scalar(1) - og);
      dc[j] = d_c * fg;
    }
    dh.noalias() = grad_pre.row(t) * w.recurrent.transpose();
  }
  grad_kernel.noalias() += input.transpose() * grad_pre;
  if (steps > 1)
    grad_recurrent.noalias() +=
        trace.hidden.topRows(steps - 1).transpose() * grad_pre.bottomRows(steps - 1);
  grad_bias += grad_pre.colwise().sum();
  return grad_pre * w.kernel.transpose();
}

// ---------------------------------------------------------------------------
// Layers

template <typename Scalar>
class Conv1D {
 public:
  Conv1D(const Conv1DSpec& spec, int channels)
      : weights_(make_param<Scalar>("kernel", {spec.kernel, channels, spec.filters},
                                    spec.kernel * channels, spec.filters, true)),
        bias_(make_param<Scalar>("bias", {spec.filters}, 1, spec.filters, false)) {}

  void init(Rng& rng) {
    const double limit = std::sqrt(3.0 / static_cast<double>(weights_.value.rows()));
    for (Eigen::Index i = 0; i < weights_.size(); ++i)
      weights_.value.data()[i] = Scalar(rng.uniform(-limit, limit));
  }

  Mat<Scalar> infer(const Mat<Scalar>& in) const {
    return conv1d_forward<Scalar>(in, weights_.value, bias_.value);
  }
  Mat<Scalar> forward(const Mat<Scalar>& in, Mode, Rng&) {
    input_ = in;
    return infer(in);
  }
  Mat<Scalar> backward(const Mat<Scalar>& grad_out) {
    return conv1d_backward<Scalar>(input_, weights_.value, grad_out, weights_.grad, bias_.grad);
  }
  std::vector<Param<Scalar>*> params() { return {&weights_, &bias_}; }

 private:
  Param<Scalar> weights_;
  Param<Scalar> bias_;
  Mat<Scalar> input_;
};

template <typename Scalar>
class MaxPool1D {
 public:
  explicit MaxPool1D(const MaxPool1DSpec& spec) : pool_(spec.pool) {}
  void init(Rng&) {}
  Mat<Scalar> infer(const Mat<Scalar>& in) const { return maxpool1d_forward<Scalar>(in, pool_); }
  Mat<Scalar> forward(const Mat<Scalar>& in, Mode, Rng&) {
    rows_ = in.rows();
    return maxpool1d_forward<Scalar>(in, pool_, &argmax_);
  }
  Mat<Scalar> backward(const Mat<Scalar>& grad_out) {
    return maxpool1d_backward<Scalar>(rows_, argmax_, grad_out);
  }
  std::vector<Param<Scalar>*> params() { return {}; }

 private:
  int pool_;
  Eigen::Index rows_ = 0;
  std::vector<Eigen::Index> argmax_;
};

template <typename Scalar>
class Dropout {
 public:
  explicit Dropout(const DropoutSpec& spec) : rate_(spec.rate) {}
  void init(Rng&) {}
  Mat<Scalar> infer(const Mat<Scalar>& in) const { return in; }
  Mat<Scalar> forward(const Mat<Scalar>& in, Mode mode, Rng& rng) {
    if (mode == Mode::Train)
      mask_ = dropout_mask<Scalar>(in.rows(), in.cols(), rate_, rng);
    else if (mode == Mode::Infer || mask_.rows() != in.rows() || mask_.cols() != in.cols())
      mask_ = Mat<Scalar>::Ones(in.rows(), in.cols());
    return in.cwiseProduct(mask_);
  }
  Mat<Scalar> backward(const Mat<Scalar>& grad_out) { return grad_out.cwiseProduct(mask_); }
  std::vector<Param<Scalar>*> params() { return {}; }

 private:
  double rate_;
  Mat<Scalar> mask_;
};

template <typename Scalar>
class Lstm {
 public:
  Lstm(const LstmSpec& spec, int channels)
      : kernel_(make_param<Scalar>("kernel", {channels, 4 * spec.units}, channels,
                                   4 * spec.units, true)),
        recurrent_(make_param<Scalar>("recurrent_kernel", {spec.units, 4 * spec.units},
                                      spec.units, 4 * spec.units, true)),
        bias_(make_param<Scalar>("bias", {4 * spec.units}, 1, 4 * spec.units, false)) {}

  void init(Rng& rng) {
    const Eigen::Index units = recurrent_.value.rows();
    const double limit = 1.0 / std::sqrt(static_cast<double>(units));
    for (auto* p : {&kernel_, &recurrent_})
      for (Eigen::Index i = 0; i < p->size(); ++i)
        p->value.data()[i] = Scalar(rng.uniform(-limit, limit));
    bias_.value.setZero();
    bias_.value.block(0, units, 1, units).setConstant(Scalar(1));  // forget gate
  }

  Mat<Scalar> infer(const Mat<Scalar>& in) const {
    return lstm_forward<Scalar>(in, weights());
  }
  Mat<Scalar> forward(const Mat<Scalar>& in, Mode, Rng&) {
    input_ = in;
    return lstm_forward<Scalar>(in, weights(), &trace_);
  }
  Mat<Scalar> backward(const Mat<Scalar>& grad_out) {
    return lstm_backward<Scalar>(input_, weights(), trace_, grad_out, kernel_.grad,
                                 recurrent_.grad, bias_.grad);
  }
  std::vector<Param<Scalar>*> params() { return {&kernel_, &recurrent_, &bias_}; }

 private:
  LstmWeights<Scalar> weights() const { return {kernel_.value, recurrent_.value, bias_.value}; }

  Param<Scalar> kernel_;
  Param<Scalar> recurrent_;
  Param<Scalar> bias_;
  Mat<Scalar> input_;
  LstmTrace<Scalar> trace_;
};

template <typename Scalar>
class Dense {
 public:
  Dense(const DenseSpec& spec, int inputs)
      : act_(spec.activation),
        weights_(make_param<Scalar>("kernel", {inputs, spec.units}, inputs, spec.units, true)),
        bias_(make_param<Scalar>("bias", {spec.units}, 1, spec.units, false)) {}

  void init(Rng& rng) {
    const double fan_in = static_cast<double>(weights_.value.rows());
    const double limit = std::sqrt((act_ == Activation::Relu ? 6.0 : 3.0) / fan_in);
    for (Eigen::Index i = 0; i < weights_.size(); ++i)
      weights_.value.data()[i] = Scalar(rng.uniform(-limit, limit));
  }

  Mat<Scalar> infer(const Mat<Scalar>& in) const {
    return dense_forward<Scalar>(in, weights_.value, bias_.value, act_);
  }
  Mat<Scalar> forward(const Mat<Scalar>& in, Mode, Rng&) {
    input_ = in;
    output_ = infer(in);
    return output_;
  }
  Mat<Scalar> backward(const Mat<Scalar>& grad_out) {
    Mat<Scalar> dz;
    switch (act_) {
      case Activation::Relu:
        dz = grad_out.cwiseProduct(
            output_.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));
        break;
      case Activation::Sigmoid:
        dz = grad_out.cwiseProduct(
            output_.unaryExpr([](Scalar v) { return v * (Scalar(1) - v); }));
        break;
      case Activation::Linear: dz = grad_out; break;
    }
    weights_.grad.noalias() += input_.transpose() * dz;
    bias_.grad += dz;
    return dz * weights_.value.transpose();
  }
  std::vector<Param<Scalar>*> params() { return {&weights_, &bias_}; }

 private:
  Activation act_;
  Param<Scalar> weights_;
  Param<Scalar> bias_;
  Mat<Scalar> input_;
  Mat<Scalar> output_;
};

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_LAYERS_HPP
