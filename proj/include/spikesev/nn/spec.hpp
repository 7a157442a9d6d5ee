#ifndef SPIKESEV_NN_SPEC_HPP
#define SPIKESEV_NN_SPEC_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spikesev::nn {

enum class Activation { Relu, Sigmoid, Linear };

struct Conv1DSpec {
  int filters = 1;
  int kernel = 1;
  bool operator==(const Conv1DSpec&) const = default;
};
struct MaxPool1DSpec {
  int pool = 2;
  bool operator==(const MaxPool1DSpec&) const = default;
};
struct DropoutSpec {
  double rate = 0.0;
  bool operator==(const DropoutSpec&) const = default;
};
struct LstmSpec {
  int units = 1;
  bool operator==(const LstmSpec&) const = default;
};
struct DenseSpec {
  int units = 1;
  Activation activation = Activation::Linear;
  bool operator==(const DenseSpec&) const = default;
};

using LayerSpec = std::variant<Conv1DSpec, MaxPool1DSpec, DropoutSpec, LstmSpec, DenseSpec>;

/// Validates hyperparameters (sizes >= 1, 0 <= rate < 1).
void validate(const LayerSpec& spec);

/// "conv1d:128:4", "maxpool1d:2", "dropout:0.166", "lstm:64", "dense:64:relu".
std::string format_layer(const LayerSpec& spec);
LayerSpec parse_layer(std::string_view text);

/// Comma-joined layer list, e.g. "conv1d:8:4,maxpool1d:2,lstm:4,dense:1:sigmoid".
std::string format_architecture(const std::vector<LayerSpec>& specs);
std::vector<LayerSpec> parse_architecture(std::string_view text);

std::string layer_type_name(const LayerSpec& spec);

/// The reference stack: four Conv1D/MaxPool1D stages with dropout 0.166 after
/// each pooling stage, LSTM(64), Dense 64/32/16 (relu) with dropout after the
/// first dense layer, and a single sigmoid output.
std::vector<LayerSpec> default_architecture();

/// Input length at which the reference stack has its documented shapes.
inline constexpr int kDefaultInputLength = 16730;

/// Activation shape between layers: [length, channels] for sequences,
/// [channels] once flattened by the LSTM.
struct Shape {
  int length = 0;
  int channels = 0;
  bool sequence = true;

  std::string str() const;
  bool operator==(const Shape&) const = default;
};

/// Output shape of every layer for a [input_length, 1] input. Throws
/// ShapeError naming the first layer whose output would be empty or whose
/// input rank is wrong.
std::vector<Shape> infer_shapes(int input_length, const std::vector<LayerSpec>& specs);

/// Trainable parameters of one layer given its input shape.
std::size_t layer_param_count(const LayerSpec& spec, const Shape& input);

/// Sum over the stack.
std::size_t param_count(int input_length, const std::vector<LayerSpec>& specs);

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_SPEC_HPP
