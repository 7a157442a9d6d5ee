#ifndef SPIKESEV_NN_MODEL_HPP
#define SPIKESEV_NN_MODEL_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "spikesev/nn/layers.hpp"
#include "spikesev/nn/spec.hpp"

namespace spikesev::nn {

/// An ordered layer stack fed with a [input_length, 1] sequence and
/// producing a single probability.
template <typename Scalar>
class Model {
 public:
  using Layer = std::variant<Conv1D<Scalar>, MaxPool1D<Scalar>, Dropout<Scalar>, Lstm<Scalar>,
                             Dense<Scalar>>;
  using Input = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Builds the stack and initializes parameters from `seed`.
  Model(int input_length, std::vector<LayerSpec> specs, std::uint64_t seed)
      : input_length_(input_length), specs_(std::move(specs)), seed_(seed) {
    const auto shapes = infer_shapes(input_length_, specs_);
    if (shapes.empty() || shapes.back().sequence || shapes.back().channels != 1)
      throw ShapeError("model must end in a single flat output unit");
    Shape in{input_length_, 1, true};
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      layers_.push_back(std::visit(
          [&](const auto& s) -> Layer {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Conv1DSpec>) return Conv1D<Scalar>(s, in.channels);
            else if constexpr (std::is_same_v<S, MaxPool1DSpec>) return MaxPool1D<Scalar>(s);
            else if constexpr (std::is_same_v<S, DropoutSpec>) return Dropout<Scalar>(s);
            else if constexpr (std::is_same_v<S, LstmSpec>) return Lstm<Scalar>(s, in.channels);
            else return Dense<Scalar>(s, in.channels);
          },
          specs_[i]));
      in = shapes[i];
    }
    Rng rng(seed_);
    for (auto& layer : layers_) std::visit([&](auto& l) { l.init(rng); }, layer);
  }

  int input_length() const { return input_length_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::uint64_t seed() const { return seed_; }

  /// Forward pass that caches intermediates for backward().
  Scalar forward(const Eigen::Ref<const Input>& x, Mode mode, Rng& rng) {
    Mat<Scalar> a = as_sequence(x);
    for (auto& layer : layers_) a = std::visit([&](auto& l) { return l.forward(a, mode, rng); }, layer);
    ready_ = true;
    return a(0, 0);
  }

  /// Inference without touching any cached state; safe for concurrent use.
  Scalar predict(const Eigen::Ref<const Input>& x) const {
    Mat<Scalar> a = as_sequence(x);
    for (const auto& layer : layers_) a = std::visit([&](const auto& l) { return l.infer(a); }, layer);
    return a(0, 0);
  }

  /// Accumulates d(loss)/d(param) into every Param::grad given d(loss)/d(output).
  void backward(Scalar grad_output) {
    if (!ready_) throw std::logic_error("backward() called without a preceding forward()");
    Mat<Scalar> g(1, 1);
    g(0, 0) = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      g = std::visit([&](auto& l) { return l.backward(g); }, *it);
    ready_ = false;
  }

  std::vector<Param<Scalar>*> params() {
    std::vector<Param<Scalar>*> out;
    for (auto& layer : layers_)
      for (auto* p : std::visit([](auto& l) { return l.params(); }, layer)) out.push_back(p);
    return out;
  }
  std::vector<const Param<Scalar>*> params() const {
    std::vector<const Param<Scalar>*> out;
    for (auto* p : const_cast<Model*>(this)->params()) out.push_back(p);
    return out;
  }

  /// Per-layer parameter lists, in layer order.
  std::vector<std::vector<Param<Scalar>*>> layer_params() {
    std::vector<std::vector<Param<Scalar>*>> out;
    for (auto& layer : layers_) out.push_back(std::visit([](auto& l) { return l.params(); }, layer));
    return out;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto* p : params()) n += static_cast<std::size_t>(p->size());
    return n;
  }

  /// Sum of squared entries over the weight matrices (biases excluded).
  Scalar weight_sq_sum() const {
    Scalar s(0);
    for (const auto* p : params())
      if (p->regularized) s += p->value.squaredNorm();
    return s;
  }

  void zero_grad() {
    for (auto* p : params()) p->grad.setZero();
  }

  /// Same architecture and values in another scalar type.
  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out(input_length_, specs_, seed_);
    auto dst = out.params();
    const auto src = params();
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i]->value = src[i]->value.template cast<Other>();
    return out;
  }

 private:
  Mat<Scalar> as_sequence(const Eigen::Ref<const Input>& x) const {
    if (x.size() != input_length_)
      throw ShapeError("input width " + std::to_string(x.size()) + " != model input length " +
                       std::to_string(input_length_));
    return Mat<Scalar>(x);
  }

  int input_length_;
  std::vector<LayerSpec> specs_;
  std::uint64_t seed_;
  std::vector<Layer> layers_;
  bool ready_ = false;
};

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_MODEL_HPP
