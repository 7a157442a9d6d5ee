#include "spikesev/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "spikesev/evaluation.hpp"
#include "spikesev/text.hpp"

namespace spikesev {

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be > 0");
  if (!(lambda_l2 >= 0.0)) throw InputError("lambda_l2 must be >= 0");
}

void write_epoch_header(std::ostream& out) {
  out << "epoch\tloss\taccuracy\tval_loss\tval_accuracy\n";
}

void write_epoch(std::ostream& out, const EpochLog& log) {
  auto opt = [](const std::optional<double>& v) { return v ? text::fixed(*v, 6) : "NA"; };
  out << log.epoch << '\t' << text::fixed(log.train_loss, 6) << '\t'
      << text::fixed(log.train_accuracy, 6) << '\t' << opt(log.val_loss) << '\t'
      << opt(log.val_accuracy) << '\n';
}

std::pair<double, double> loss_and_accuracy(const nn::Model<float>& model, const Dataset& data) {
  const auto scores = predict_scores(model, data);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    loss += nn::bce(scores[i], data.labels[i]);
    correct += (scores[i] >= 0.5) == (data.labels[i] == 1);
  }
  const double n = static_cast<double>(scores.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainResult train(nn::Model<float>& model, const Dataset& train_set, const TrainConfig& config,
                  const Dataset* validation, std::ostream* stream) {
  config.validate();
  if (train_set.rows() == 0) throw InputError("training set is empty");
  if (train_set.cols() != model.input_length())
    throw InputError("feature width " + std::to_string(train_set.cols()) +
                     " != model input length " + std::to_string(model.input_length()));

  nn::AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  TrainResult result{nn::AdamState<float>(adam), {}};
  Rng rng(config.seed);
  const auto lambda = static_cast<float>(config.lambda_l2);
  const auto n = static_cast<std::size_t>(train_set.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (stream) write_epoch_header(*stream);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0, b = 0; start < n; start += batch, ++b) {
      const std::size_t end = std::min(n, start + batch);
      const float scale = 1.0f / static_cast<float>(end - start);
      model.zero_grad();
      const double penalty = lambda * model.weight_sq_sum();
      double batch_bce = 0.0;
      for (std::size_t s = start; s < end; ++s) {
        const auto row = static_cast<Eigen::Index>(order[s]);
        const int label = train_set.labels[order[s]];
        const float p = model.forward(train_set.features.row(row).transpose(), nn::Mode::Train, rng);
        batch_bce += nn::bce(p, label);
        correct += (p >= 0.5f) == (label == 1);
        model.backward(scale * nn::bce_grad(p, label));
      }
      const double batch_loss = batch_bce / static_cast<double>(end - start) + penalty;
      if (!std::isfinite(batch_loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(b + 1));
      nn::add_l2_gradient(model, lambda);
      nn::adam_step(result.optimizer, model);
      loss_sum += batch_bce + penalty * static_cast<double>(end - start);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(n);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (validation && validation->rows() > 0) {
      const auto [vl, va] = loss_and_accuracy(model, *validation);
      log.val_loss = vl;
      log.val_accuracy = va;
    }
    if (stream) {
      write_epoch(*stream, log);
      stream->flush();
    }
    result.log.push_back(log);
  }
  return result;
}

CrossValidation cross_validate(const Dataset& data, const std::vector<nn::LayerSpec>& architecture,
                               const TrainConfig& config, const CrossValidationOptions& options) {
  config.validate();
  const auto folds = stratified_folds(data.labels, options.folds, options.seed);
  CrossValidation cv;
  for (int f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train_idx, held_idx;
    for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? held_idx : train_idx).push_back(i);
    const auto fold_seed = options.seed + static_cast<std::uint64_t>(f) + 1;
    const Dataset fold_train = smote(data.subset(train_idx), options.smote_k, fold_seed);
    const Dataset held = data.subset(held_idx);

    nn::Model<float> model(static_cast<int>(data.cols()), architecture, config.seed + fold_seed);
    TrainConfig fold_config = config;
    fold_config.seed = config.seed + fold_seed;
    train(model, fold_train, fold_config);
    const auto report = evaluate(model, held, options.threshold);
    cv.fold_f1.push_back(report.weighted.f1);
  }
  const double k = static_cast<double>(cv.fold_f1.size());
  cv.mean_f1 = std::accumulate(cv.fold_f1.begin(), cv.fold_f1.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : cv.fold_f1) ss += (v - cv.mean_f1) * (v - cv.mean_f1);
  cv.std_f1 = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
  return cv;
}

// ---------------------------------------------------------------------------
// Hyperparameter search

std::vector<nn::LayerSpec> Hyperparameters::architecture() const {
  std::vector<nn::LayerSpec> specs;
  for (int filters : conv_filters) {
    specs.push_back(nn::Conv1DSpec{filters, kernel});
    specs.push_back(nn::MaxPool1DSpec{pool});
    specs.push_back(nn::DropoutSpec{dropout});
  }
  specs.push_back(nn::LstmSpec{lstm_units});
  for (std::size_t i = 0; i < dense_units.size(); ++i) {
    specs.push_back(nn::DenseSpec{dense_units[i], nn::Activation::Relu});
    if (i == 0) specs.push_back(nn::DropoutSpec{dropout});
  }
  specs.push_back(nn::DenseSpec{1, nn::Activation::Sigmoid});
  return specs;
}

Hyperparameters Hyperparameters::published() {
  Hyperparameters hp;
  hp.conv_filters = {128, 64, 64, 24};
  hp.kernel = 4;
  hp.pool = 2;
  hp.dropout = 0.166;
  hp.lstm_units = 64;
  hp.dense_units = {64, 32, 16};
  hp.learning_rate = 1e-3;
  return hp;
}

void SearchSpace::validate() const {
  auto non_empty = [](const std::vector<int>& v, const char* what) {
    if (v.empty()) throw InputError(std::string("search space: empty choices for ") + what);
    for (int x : v)
      if (x < 1) throw InputError(std::string("search space: ") + what + " choices must be >= 1");
  };
  for (const auto& c : conv_filters) non_empty(c, "conv_filters");
  non_empty(kernels, "kernel");
  non_empty(lstm_units, "lstm_units");
  for (const auto& c : dense_units) non_empty(c, "dense_units");
  if (pool < 1) throw InputError("search space: pool must be >= 1");
  if (!(dropout.first >= 0.0 && dropout.first <= dropout.second && dropout.second < 1.0))
    throw InputError("search space: dropout range must satisfy 0 <= min <= max < 1");
  if (!(learning_rate.first > 0.0 && learning_rate.first <= learning_rate.second))
    throw InputError("search space: learning_rate range must satisfy 0 < min <= max");
}

Hyperparameters SearchSpace::sample(Rng& rng) const {
  auto pick = [&](const std::vector<int>& v) { return v[rng.index(v.size())]; };
  Hyperparameters hp;
  for (const auto& c : conv_filters) hp.conv_filters.push_back(pick(c));
  hp.kernel = pick(kernels);
  hp.pool = pool;
  hp.dropout = rng.uniform(dropout.first, dropout.second);
  hp.lstm_units = pick(lstm_units);
  for (const auto& c : dense_units) hp.dense_units.push_back(pick(c));
  hp.learning_rate = std::exp(
      rng.uniform(std::log(learning_rate.first), std::log(learning_rate.second)));
  return hp;
}

SearchSpace SearchSpace::around_published() {
  SearchSpace s;
  s.conv_filters = {{96, 128, 160}, {48, 64, 96}, {48, 64, 96}, {16, 24, 32}};
  s.kernels = {3, 4, 5};
  s.pool = 2;
  s.dropout = {0.1, 0.3};
  s.lstm_units = {32, 64, 96};
  s.dense_units = {{32, 64}, {16, 32}, {8, 16}};
  s.learning_rate = {3e-4, 3e-3};
  return s;
}

namespace {

std::vector<int> int_list(std::string_view s, std::string_view key) {
  std::vector<int> out;
  for (const auto& part : text::split(s, ','))
    out.push_back(static_cast<int>(text::parse_int(part, key)));
  return out;
}

std::vector<std::vector<int>> stage_lists(std::string_view s, std::string_view key) {
  std::vector<std::vector<int>> out;
  for (const auto& stage : text::split(s, ';'))
    if (!text::trim(stage).empty()) out.push_back(int_list(stage, key));
  return out;
}

std::pair<double, double> range(std::string_view s, std::string_view key) {
  const auto parts = text::split(s, ':');
  if (parts.size() != 2)
    throw InputError("search space: " + std::string(key) + " needs 'min:max'");
  return {text::parse_double(parts[0], key), text::parse_double(parts[1], key)};
}

std::string join(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

SearchSpace SearchSpace::parse(std::string_view text) {
  SearchSpace s;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (text::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("search space: expected 'key = value'");
    const auto key = std::string(text::trim(std::string_view(line).substr(0, eq)));
    const auto value = text::trim(std::string_view(line).substr(eq + 1));
    if (key == "conv_filters") s.conv_filters = stage_lists(value, key);
    else if (key == "kernel") s.kernels = int_list(value, key);
    else if (key == "pool") s.pool = static_cast<int>(text::parse_int(value, key));
    else if (key == "dropout") s.dropout = range(value, key);
    else if (key == "lstm_units") s.lstm_units = int_list(value, key);
    else if (key == "dense_units") s.dense_units = stage_lists(value, key);
    else if (key == "learning_rate") s.learning_rate = range(value, key);
    else throw InputError("search space: unknown key '" + key + "'");
  }
  s.validate();
  return s;
}

void SearchSpace::write(std::ostream& out) const {
  auto stages = [](const std::vector<std::vector<int>>& v) {
    std::string o;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) o += " ; ";
      o += join(v[i], ',');
    }
    return o;
  };
  out << "conv_filters = " << stages(conv_filters) << '\n';
  out << "kernel = " << join(kernels, ',') << '\n';
  out << "pool = " << pool << '\n';
  out << "dropout = " << text::exact(dropout.first) << ':' << text::exact(dropout.second) << '\n';
  out << "lstm_units = " << join(lstm_units, ',') << '\n';
  out << "dense_units = " << stages(dense_units) << '\n';
  out << "learning_rate = " << text::exact(learning_rate.first) << ':'
      << text::exact(learning_rate.second) << '\n';
}

const Trial& SearchResult::best() const {
  if (ranked.empty() || !ranked.front().ok()) throw InputError("no successful search trial");
  return ranked.front();
}

void SearchResult::write_tsv(std::ostream& out) const {
  out << "rank\ttrial\torigin\tstatus\tconv_filters\tkernel\tpool\tdropout\tlstm_units\t"
         "dense_units\tlearning_rate\tparam_count\tmean_f1\tstd_f1\tfold_f1\n";
  int rank = 0;
  for (const auto& t : ranked) {
    const auto& hp = t.hyperparameters;
    std::string folds;
    for (std::size_t i = 0; i < t.cv.fold_f1.size(); ++i) {
      if (i) folds += ',';
      folds += text::fixed(t.cv.fold_f1[i], 6);
    }
    out << ++rank << '\t' << t.index << '\t' << (t.fixed ? "fixed" : "sampled") << '\t'
        << t.status << '\t' << join(hp.conv_filters, '/') << '\t' << hp.kernel << '\t'
        << hp.pool << '\t' << text::fixed(hp.dropout, 6) << '\t' << hp.lstm_units << '\t'
        << join(hp.dense_units, '/') << '\t' << text::exact(hp.learning_rate) << '\t'
        << t.param_count << '\t' << (t.ok() ? text::fixed(t.cv.mean_f1, 6) : "NA") << '\t'
        << (t.ok() ? text::fixed(t.cv.std_f1, 6) : "NA") << '\t' << (folds.empty() ? "NA" : folds)
        << '\n';
  }
}

SearchResult random_search(const SearchSpace& space, int n_trials, const Dataset& data,
                           const TrainConfig& config, const SearchOptions& options) {
  if (n_trials < 1) throw InputError("n_trials must be >= 1");
  space.validate();
  Rng rng(options.seed);
  std::vector<Trial> trials;
  if (options.include_published) {
    Trial t;
    t.fixed = true;
    t.hyperparameters = Hyperparameters::published();
    trials.push_back(std::move(t));
  }
  for (int i = 0; i < n_trials; ++i) {
    Trial t;
    t.hyperparameters = space.sample(rng);
    trials.push_back(std::move(t));
  }

  const int width = static_cast<int>(data.cols());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto& t = trials[i];
    t.index = static_cast<int>(i);
    const auto arch = t.hyperparameters.architecture();
    try {
      t.param_count = nn::param_count(width, arch);
    } catch (const ShapeError& e) {
      t.status = std::string("failed: ") + e.what();
      continue;
    }
    TrainConfig trial_config = config;
    trial_config.learning_rate = t.hyperparameters.learning_rate;
    t.cv = cross_validate(data, arch, trial_config, options.cv);
  }

  std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return false;
    if (a.cv.mean_f1 != b.cv.mean_f1) return a.cv.mean_f1 > b.cv.mean_f1;
    return a.param_count < b.param_count;
  });
  return SearchResult{std::move(trials)};
}

}  // namespace spikesev
