#ifndef SPIKESEV_TRAINING_HPP
#define SPIKESEV_TRAINING_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spikesev/dataset.hpp"
#include "spikesev/nn/model.hpp"
#include "spikesev/nn/optim.hpp"

namespace spikesev {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double lambda_l2 = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

void write_epoch_header(std::ostream& out);
void write_epoch(std::ostream& out, const EpochLog& log);

struct TrainResult {
  nn::AdamState<float> optimizer;
  std::vector<EpochLog> log;
};

/// Mini-batch training for exactly config.epochs epochs (no early stopping).
/// Per batch the loss is mean BCE + lambda * sum(w^2). Dropout masks and
/// shuffling draw from one generator seeded with config.seed. When `stream`
/// is given each epoch row is written as it completes.
TrainResult train(nn::Model<float>& model, const Dataset& train_set, const TrainConfig& config,
                  const Dataset* validation = nullptr, std::ostream* stream = nullptr);

/// Mean BCE (inference mode) and accuracy at threshold 0.5.
std::pair<double, double> loss_and_accuracy(const nn::Model<float>& model, const Dataset& data);

struct CrossValidation {
  std::vector<double> fold_f1;  // weighted F1 per held-out fold
  double mean_f1 = 0.0;
  double std_f1 = 0.0;          // sample standard deviation
};

struct CrossValidationOptions {
  int folds = 5;
  int smote_k = 5;
  std::uint64_t seed = 0;  // fold assignment, SMOTE and model init derive from it
  double threshold = 0.5;
};

/// Stratified k-fold CV; SMOTE is applied to each fold's training part only.
CrossValidation cross_validate(const Dataset& data, const std::vector<nn::LayerSpec>& architecture,
                               const TrainConfig& config, const CrossValidationOptions& options);

// ---------------------------------------------------------------------------
// Hyperparameter search

struct Hyperparameters {
  std::vector<int> conv_filters;
  int kernel = 4;
  int pool = 2;
  double dropout = 0.166;
  int lstm_units = 64;
  std::vector<int> dense_units;  // hidden relu layers before the sigmoid output
  double learning_rate = 1e-3;

  /// conv/pool/dropout stages, LSTM, dense stack with dropout after the first
  /// hidden dense layer, sigmoid output.
  std::vector<nn::LayerSpec> architecture() const;

  /// The reference configuration (128/64/64/24 filters, kernel 4, dropout
  /// 0.166, LSTM 64, dense 64/32/16).
  static Hyperparameters published();
};

/// Sampling domains. Integer hyperparameters are drawn uniformly from their
/// choice lists; dropout uniformly from [min, max]; learning rate
/// log-uniformly from [min, max].
struct SearchSpace {
  std::vector<std::vector<int>> conv_filters;  // one choice list per conv stage
  std::vector<int> kernels;
  int pool = 2;
  std::pair<double, double> dropout{0.1, 0.3};
  std::vector<int> lstm_units;
  std::vector<std::vector<int>> dense_units;   // one choice list per hidden layer
  std::pair<double, double> learning_rate{1e-4, 1e-2};

  void validate() const;
  Hyperparameters sample(Rng& rng) const;

  /// Neighbourhood of the reference values.
  static SearchSpace around_published();

  /// Key-value text: "conv_filters = 128,96 ; 64,32", "kernel = 3,4,5",
  /// "pool = 2", "dropout = 0.1:0.3", "lstm_units = 32,64",
  /// "dense_units = 64 ; 32 ; 16", "learning_rate = 1e-4:1e-2".
  static SearchSpace parse(std::string_view text);
  void write(std::ostream& out) const;
};

struct Trial {
  int index = 0;
  bool fixed = false;  // injected rather than sampled
  Hyperparameters hyperparameters;
  std::string status = "ok";
  std::size_t param_count = 0;
  CrossValidation cv;

  bool ok() const { return status == "ok"; }
};

struct SearchOptions {
  CrossValidationOptions cv;
  std::uint64_t seed = 0;
  bool include_published = false;
};

struct SearchResult {
  std::vector<Trial> ranked;  // best first; failed trials last
  const Trial& best() const;
  void write_tsv(std::ostream& out) const;
};

/// Ranks by mean CV F1 (descending), ties by smaller parameter count. A
/// trial whose architecture fails shape inference is kept as "failed".
SearchResult random_search(const SearchSpace& space, int n_trials, const Dataset& data,
                           const TrainConfig& config, const SearchOptions& options);

}  // namespace spikesev

#endif  // SPIKESEV_TRAINING_HPP
