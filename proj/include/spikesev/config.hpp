#ifndef SPIKESEV_CONFIG_HPP
#define SPIKESEV_CONFIG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spikesev/dataset.hpp"
#include "spikesev/training.hpp"

namespace spikesev {

/// Resolved settings for one pipeline run. The text form is flat
/// "key = value" lines; '#' starts a comment. Keys:
///
///   fasta, metadata, metadata_delimiter (auto|tab|comma), workdir, scales
///   n_model, block_weight_sequence, block_weight_covariates,
///   age_encoding (onehot|decade)
///   split_ratio, split_seed, smote_k, smote_seed
///   epochs, batch_size, learning_rate, lambda_l2, train_seed, shuffle
///   architecture, threshold
///   search_space, n_trials, cv_folds, search_seed, include_published
///   jobs
struct RunConfig {
  std::string fasta;
  std::string metadata;
  std::string metadata_delimiter = "auto";
  std::string workdir = ".";
  std::string scales;  // empty: built-in table

  int n_model = kDefaultModelLength;
  BlockWeights weights;
  AgeEncoding age_encoding = AgeEncoding::OneHot;

  double split_ratio = 0.8;
  std::uint64_t split_seed = 42;
  int smote_k = 5;
  std::uint64_t smote_seed = 42;

  TrainConfig train{100, 32, 1e-3, 1e-3, 42, true};
  std::string architecture;  // empty: reference stack
  double threshold = 0.5;

  std::string search_space;  // empty: neighbourhood of the reference values
  int n_trials = 10;
  int cv_folds = 5;
  std::uint64_t search_seed = 42;
  bool include_published = true;

  int jobs = 1;

  /// Applies one key; throws InputError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Sets every seed at once.
  void set_seed(std::uint64_t seed);

  void merge_text(std::string_view text);
  static RunConfig load(const std::string& path);

  /// Canonical serialization of every key, in a fixed order.
  std::string to_text() const;

  std::vector<nn::LayerSpec> layers() const;
  char delimiter_for(const std::string& path) const;
};

}  // namespace spikesev

#endif  // SPIKESEV_CONFIG_HPP
