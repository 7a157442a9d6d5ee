#include "spikesev/nn/checkpoint.hpp"

#include <fstream>

#include "spikesev/binary_io.hpp"

namespace spikesev::nn {

namespace {

constexpr std::string_view kMagic = "SSEVCKPT";

void put_matrix(std::ostream& out, const Mat<float>& m) {
  binary::put_floats(out, m.data(), static_cast<std::size_t>(m.size()));
}

void get_matrix(std::istream& in, Mat<float>& m, const std::string& what) {
  binary::get_floats(in, m.data(), static_cast<std::size_t>(m.size()), what);
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model<float>& model,
                     const AdamState<float>& optimizer, const std::string& registry_hash) {
  binary::put_magic(out, kMagic);
  binary::put<std::uint32_t>(out, kCheckpointVersion);
  binary::put_string(out, format_architecture(model.specs()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_length()));
  binary::put_string(out, registry_hash);
  binary::put<std::uint64_t>(out, model.seed());

  const auto params = model.params();
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    binary::put_string(out, p->name);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    put_matrix(out, p->value);
  }

  const auto& cfg = optimizer.config();
  binary::put<double>(out, cfg.learning_rate);
  binary::put<double>(out, cfg.beta1);
  binary::put<double>(out, cfg.beta2);
  binary::put<double>(out, cfg.epsilon);
  binary::put<std::uint64_t>(out, optimizer.step_count());
  const bool has_moments = !optimizer.first_moments().empty();
  binary::put<std::uint8_t>(out, has_moments ? 1 : 0);
  if (has_moments) {
    if (optimizer.first_moments().size() != params.size())
      throw ShapeError("checkpoint: optimizer state does not match model");
    for (const auto& m : optimizer.first_moments()) put_matrix(out, m);
    for (const auto& v : optimizer.second_moments()) put_matrix(out, v);
  }
}

void save_checkpoint(const std::string& path, const Model<float>& model,
                     const AdamState<float>& optimizer, const std::string& registry_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  save_checkpoint(out, model, optimizer, registry_hash);
}

Checkpoint load_checkpoint(std::istream& in,
                           const std::optional<std::string>& expected_registry_hash) {
  binary::expect_magic(in, kMagic);
  const auto version = binary::get<std::uint32_t>(in, "checkpoint version");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  const auto arch = binary::get_string(in, "architecture");
  const auto input_length = binary::get<std::uint32_t>(in, "input length");
  auto hash = binary::get_string(in, "registry hash");
  if (expected_registry_hash && hash != *expected_registry_hash)
    throw FormatError("checkpoint registry hash " + hash + " does not match scales " +
                      *expected_registry_hash + "; features would be inconsistent");
  const auto seed = binary::get<std::uint64_t>(in, "seed");

  Model<float> model(static_cast<int>(input_length), parse_architecture(arch), seed);
  auto params = model.params();
  const auto n = binary::get<std::uint32_t>(in, "tensor count");
  if (n != params.size())
    throw FormatError("checkpoint has " + std::to_string(n) + " tensors, architecture needs " +
                      std::to_string(params.size()));
  for (auto* p : params) {
    const auto name = binary::get_string(in, "tensor name");
    const auto rank = binary::get<std::uint32_t>(in, "tensor rank");
    std::vector<int> shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(static_cast<int>(binary::get<std::uint32_t>(in, "tensor dims")));
    if (name != p->name || shape != p->shape)
      throw FormatError("checkpoint tensor '" + name + "' does not match expected '" + p->name + "'");
    get_matrix(in, p->value, name);
  }

  AdamConfig cfg;
  cfg.learning_rate = binary::get<double>(in, "learning rate");
  cfg.beta1 = binary::get<double>(in, "beta1");
  cfg.beta2 = binary::get<double>(in, "beta2");
  cfg.epsilon = binary::get<double>(in, "epsilon");
  AdamState<float> optimizer(cfg);
  const auto step = binary::get<std::uint64_t>(in, "optimizer step");
  const auto has_moments = binary::get<std::uint8_t>(in, "moment flag");
  std::vector<Mat<float>> m, v;
  if (has_moments) {
    for (auto* list : {&m, &v})
      for (const auto* p : params) {
        Mat<float> t(p->value.rows(), p->value.cols());
        get_matrix(in, t, "optimizer moments");
        list->push_back(std::move(t));
      }
  }
  optimizer.restore(step, std::move(m), std::move(v));
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError("trailing bytes after checkpoint payload");
  return Checkpoint{std::move(model), std::move(optimizer), std::move(hash)};
}

Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<std::string>& expected_registry_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return load_checkpoint(in, expected_registry_hash);
}

}  // namespace spikesev::nn
