#ifndef SPIKESEV_TESTS_SUPPORT_HPP
#define SPIKESEV_TESTS_SUPPORT_HPP

// Fixtures shared by the unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "spikesev/dataset.hpp"
#include "spikesev/nn/spec.hpp"
#include "spikesev/synthetic.hpp"

namespace spikesev::testing {

/// Synthetic separable cohort featurized into the standard layout at width
/// `n_model`. Sequence length and age range are chosen so nothing is truncated.
inline Dataset separable_dataset(std::size_t records, int n_model, std::uint64_t seed,
                                 int sequence_length = 40) {
  SyntheticOptions opt;
  opt.records = records;
  opt.sequence_length = sequence_length;
  opt.min_age = 30;
  opt.max_age = 39;
  opt.seed = seed;
  const auto cohort = synthetic_cohort(opt);
  FeatureSpec spec;
  spec.codebook = CovariateCodebook::fit(cohort);
  spec.n_model = n_model;
  spec.registry_hash = ScalesRegistry::standard().content_hash();
  return featurize(cohort, ScalesRegistry::standard(), spec).dataset;
}

/// Four conv/pool/dropout stages, LSTM 16, one hidden dense layer.
inline std::vector<nn::LayerSpec> scaled_architecture() {
  return nn::parse_architecture(
      "conv1d:16:4,maxpool1d:2,dropout:0.1,conv1d:16:4,maxpool1d:2,dropout:0.1,"
      "conv1d:16:4,maxpool1d:2,dropout:0.1,conv1d:8:4,maxpool1d:2,dropout:0.1,"
      "lstm:16,dense:16:relu,dense:1:sigmoid");
}

/// Scores reproducing the reference confusion matrix at threshold 0.5:
/// 383 negatives at 0.2, 84 negatives at 0.7, 37 positives at 0.3 and
/// 190 positives at 0.9.
struct ScoredLabels {
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
};

inline ScoredLabels reference_confusion_fixture() {
  ScoredLabels f;
  auto add = [&](int n, std::uint8_t label, double score) {
    for (int i = 0; i < n; ++i) {
      f.labels.push_back(label);
      f.scores.push_back(score);
    }
  };
  add(383, 0, 0.2);
  add(84, 0, 0.7);
  add(37, 1, 0.3);
  add(190, 1, 0.9);
  return f;
}

}  // namespace spikesev::testing

#endif  // SPIKESEV_TESTS_SUPPORT_HPP
