#ifndef SPIKESEV_NN_CHECKPOINT_HPP
#define SPIKESEV_NN_CHECKPOINT_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "spikesev/nn/model.hpp"
#include "spikesev/nn/optim.hpp"

namespace spikesev::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model<float> model;
  AdamState<float> optimizer;
  std::string registry_hash;
};

/// Layout (little-endian):
///   "SSEVCKPT", u32 version, string architecture, u32 input_length,
///   string registry_hash, u64 seed,
///   u32 n_tensors, per tensor: string name, u32 rank, u32 dims[rank], f32 data,
///   optimizer: f64 lr, beta1, beta2, epsilon, u64 step, u8 has_moments,
///   then (if set) first and second moments per tensor as f32 data.
/// Strings are u32 length + bytes.
void save_checkpoint(std::ostream& out, const Model<float>& model,
                     const AdamState<float>& optimizer, const std::string& registry_hash);
void save_checkpoint(const std::string& path, const Model<float>& model,
                     const AdamState<float>& optimizer, const std::string& registry_hash);

/// Refuses the file when `expected_registry_hash` is given and differs.
Checkpoint load_checkpoint(std::istream& in,
                           const std::optional<std::string>& expected_registry_hash = {});
Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<std::string>& expected_registry_hash = {});

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_CHECKPOINT_HPP
