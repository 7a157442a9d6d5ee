#include "spikesev/nn/spec.hpp"

#include "spikesev/common.hpp"
#include "spikesev/text.hpp"

namespace spikesev::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "linear") return Activation::Linear;
  throw InputError("unknown activation '" + std::string(s) + "'");
}

}  // namespace

void validate(const LayerSpec& spec) {
  std::visit(overloaded{
                 [](const Conv1DSpec& s) {
                   if (s.filters < 1 || s.kernel < 1)
                     throw InputError("conv1d needs filters >= 1 and kernel >= 1");
                 },
                 [](const MaxPool1DSpec& s) {
                   if (s.pool < 1) throw InputError("maxpool1d needs pool >= 1");
                 },
                 [](const DropoutSpec& s) {
                   if (!(s.rate >= 0.0 && s.rate < 1.0))
                     throw InputError("dropout rate must lie in [0, 1)");
                 },
                 [](const LstmSpec& s) {
                   if (s.units < 1) throw InputError("lstm needs units >= 1");
                 },
                 [](const DenseSpec& s) {
                   if (s.units < 1) throw InputError("dense needs units >= 1");
                 },
             },
             spec);
}

std::string layer_type_name(const LayerSpec& spec) {
  return std::visit(overloaded{
                        [](const Conv1DSpec&) { return std::string("Conv1D"); },
                        [](const MaxPool1DSpec&) { return std::string("MaxPooling1D"); },
                        [](const DropoutSpec&) { return std::string("Dropout"); },
                        [](const LstmSpec&) { return std::string("LSTM"); },
                        [](const DenseSpec&) { return std::string("Dense"); },
                    },
                    spec);
}

std::string format_layer(const LayerSpec& spec) {
  return std::visit(
      overloaded{
          [](const Conv1DSpec& s) {
            return "conv1d:" + std::to_string(s.filters) + ":" + std::to_string(s.kernel);
          },
          [](const MaxPool1DSpec& s) { return "maxpool1d:" + std::to_string(s.pool); },
          [](const DropoutSpec& s) { return "dropout:" + text::exact(s.rate); },
          [](const LstmSpec& s) { return "lstm:" + std::to_string(s.units); },
          [](const DenseSpec& s) {
            return "dense:" + std::to_string(s.units) + ":" + activation_name(s.activation);
          },
      },
      spec);
}

LayerSpec parse_layer(std::string_view text) {
  const auto f = text::split(text::trim(text), ':');
  auto integer = [&](std::size_t i) {
    return static_cast<int>(text::parse_int(f.at(i), "layer " + std::string(text)));
  };
  LayerSpec spec;
  if (f[0] == "conv1d" && f.size() == 3) spec = Conv1DSpec{integer(1), integer(2)};
  else if (f[0] == "maxpool1d" && f.size() == 2) spec = MaxPool1DSpec{integer(1)};
  else if (f[0] == "dropout" && f.size() == 2)
    spec = DropoutSpec{text::parse_double(f[1], "dropout rate")};
  else if (f[0] == "lstm" && f.size() == 2) spec = LstmSpec{integer(1)};
  else if (f[0] == "dense" && f.size() == 3) spec = DenseSpec{integer(1), parse_activation(f[2])};
  else throw InputError("cannot parse layer '" + std::string(text) + "'");
  validate(spec);
  return spec;
}

std::string format_architecture(const std::vector<LayerSpec>& specs) {
  std::string out;
  for (const auto& s : specs) {
    if (!out.empty()) out += ',';
    out += format_layer(s);
  }
  return out;
}

std::vector<LayerSpec> parse_architecture(std::string_view text) {
  std::vector<LayerSpec> specs;
  for (const auto& part : text::split(text, ','))
    if (!text::trim(part).empty()) specs.push_back(parse_layer(part));
  if (specs.empty()) throw InputError("empty architecture");
  return specs;
}

std::vector<LayerSpec> default_architecture() {
  constexpr double kDrop = 0.166;
  return {
      Conv1DSpec{128, 4}, MaxPool1DSpec{2}, DropoutSpec{kDrop},
      Conv1DSpec{64, 4},  MaxPool1DSpec{2}, DropoutSpec{kDrop},
      Conv1DSpec{64, 4},  MaxPool1DSpec{2}, DropoutSpec{kDrop},
      Conv1DSpec{24, 4},  MaxPool1DSpec{2}, DropoutSpec{kDrop},
      LstmSpec{64},
      DenseSpec{64, Activation::Relu},  DropoutSpec{kDrop},
      DenseSpec{32, Activation::Relu},
      DenseSpec{16, Activation::Relu},
      DenseSpec{1, Activation::Sigmoid},
  };
}

std::string Shape::str() const {
  if (sequence) return "(" + std::to_string(length) + ", " + std::to_string(channels) + ")";
  return "(" + std::to_string(channels) + ")";
}

std::vector<Shape> infer_shapes(int input_length, const std::vector<LayerSpec>& specs) {
  if (input_length < 1) throw ShapeError("input length must be >= 1");
  Shape shape{input_length, 1, true};
  std::vector<Shape> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    validate(spec);
    auto fail = [&](const std::string& why) {
      throw ShapeError("layer " + std::to_string(i) + " (" + format_layer(spec) + "): " + why);
    };
    std::visit(overloaded{
                   [&](const Conv1DSpec& s) {
                     if (!shape.sequence) fail("expects a sequence input");
                     if (shape.length < s.kernel)
                       fail("input length " + std::to_string(shape.length) + " < kernel " +
                            std::to_string(s.kernel));
                     shape = {shape.length - s.kernel + 1, s.filters, true};
                   },
                   [&](const MaxPool1DSpec& s) {
                     if (!shape.sequence) fail("expects a sequence input");
                     if (shape.length / s.pool < 1)
                       fail("input length " + std::to_string(shape.length) + " < pool " +
                            std::to_string(s.pool));
                     shape = {shape.length / s.pool, shape.channels, true};
                   },
                   [&](const DropoutSpec&) {},
                   [&](const LstmSpec& s) {
                     if (!shape.sequence) fail("expects a sequence input");
                     shape = {1, s.units, false};
                   },
                   [&](const DenseSpec& s) {
                     if (shape.sequence) fail("expects a flat input (place it after the LSTM)");
                     shape = {1, s.units, false};
                   },
               },
               spec);
    out.push_back(shape);
  }
  return out;
}

std::size_t layer_param_count(const LayerSpec& spec, const Shape& input) {
  const auto c = static_cast<std::size_t>(input.channels);
  return std::visit(
      overloaded{
          [&](const Conv1DSpec& s) {
            return (static_cast<std::size_t>(s.kernel) * c + 1) * static_cast<std::size_t>(s.filters);
          },
          [](const MaxPool1DSpec&) { return std::size_t{0}; },
          [](const DropoutSpec&) { return std::size_t{0}; },
          [&](const LstmSpec& s) {
            const auto u = static_cast<std::size_t>(s.units);
            return 4 * ((c + u) * u + u);
          },
          [&](const DenseSpec& s) { return (c + 1) * static_cast<std::size_t>(s.units); },
      },
      spec);
}

std::size_t param_count(int input_length, const std::vector<LayerSpec>& specs) {
  const auto shapes = infer_shapes(input_length, specs);
  std::size_t total = 0;
  Shape in{input_length, 1, true};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    total += layer_param_count(specs[i], in);
    in = shapes[i];
  }
  return total;
}

}  // namespace spikesev::nn
