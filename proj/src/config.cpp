#include "spikesev/config.hpp"

#include <fstream>
#include <sstream>

#include "spikesev/text.hpp"

namespace spikesev {

namespace {

bool parse_bool(std::string_view v, std::string_view key) {
  const auto s = text::lower(text::trim(v));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw InputError("invalid boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

std::uint64_t parse_seed(std::string_view v, std::string_view key) {
  const auto n = text::parse_int(v, key);
  if (n < 0) throw InputError(std::string(key) + " must be non-negative");
  return static_cast<std::uint64_t>(n);
}

int parse_count(std::string_view v, std::string_view key) {
  return static_cast<int>(text::parse_int(v, key));
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto value = std::string(text::trim(raw));
  if (key == "fasta") fasta = value;
  else if (key == "metadata") metadata = value;
  else if (key == "metadata_delimiter") {
    if (value != "auto" && value != "tab" && value != "comma")
      throw InputError("metadata_delimiter must be auto, tab or comma");
    metadata_delimiter = value;
  } else if (key == "workdir") workdir = value;
  else if (key == "scales") scales = value;
  else if (key == "n_model") n_model = parse_count(value, key);
  else if (key == "block_weight_sequence") weights.sequence = text::parse_double(value, key);
  else if (key == "block_weight_covariates") weights.covariates = text::parse_double(value, key);
  else if (key == "age_encoding") {
    if (value == "onehot") age_encoding = AgeEncoding::OneHot;
    else if (value == "decade") age_encoding = AgeEncoding::Decade;
    else throw InputError("age_encoding must be onehot or decade");
  } else if (key == "split_ratio") split_ratio = text::parse_double(value, key);
  else if (key == "split_seed") split_seed = parse_seed(value, key);
  else if (key == "smote_k") smote_k = parse_count(value, key);
  else if (key == "smote_seed") smote_seed = parse_seed(value, key);
  else if (key == "epochs") train.epochs = parse_count(value, key);
  else if (key == "batch_size") train.batch_size = parse_count(value, key);
  else if (key == "learning_rate") train.learning_rate = text::parse_double(value, key);
  else if (key == "lambda_l2") train.lambda_l2 = text::parse_double(value, key);
  else if (key == "train_seed") train.seed = parse_seed(value, key);
  else if (key == "shuffle") train.shuffle = parse_bool(value, key);
  else if (key == "architecture") {
    if (!value.empty()) nn::parse_architecture(value);
    architecture = value;
  } else if (key == "threshold") threshold = text::parse_double(value, key);
  else if (key == "search_space") search_space = value;
  else if (key == "n_trials") n_trials = parse_count(value, key);
  else if (key == "cv_folds") cv_folds = parse_count(value, key);
  else if (key == "search_seed") search_seed = parse_seed(value, key);
  else if (key == "include_published") include_published = parse_bool(value, key);
  else if (key == "jobs") jobs = parse_count(value, key);
  else throw InputError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::set_seed(std::uint64_t seed) {
  split_seed = smote_seed = train.seed = search_seed = seed;
}

void RunConfig::merge_text(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (text::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    set(text::trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  cfg.merge_text(buf.str());
  return cfg;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  kv("fasta", fasta);
  kv("metadata", metadata);
  kv("metadata_delimiter", metadata_delimiter);
  kv("workdir", workdir);
  kv("scales", scales);
  kv("n_model", std::to_string(n_model));
  kv("block_weight_sequence", text::exact(weights.sequence));
  kv("block_weight_covariates", text::exact(weights.covariates));
  kv("age_encoding", age_encoding == AgeEncoding::Decade ? "decade" : "onehot");
  kv("split_ratio", text::exact(split_ratio));
  kv("split_seed", std::to_string(split_seed));
  kv("smote_k", std::to_string(smote_k));
  kv("smote_seed", std::to_string(smote_seed));
  kv("epochs", std::to_string(train.epochs));
  kv("batch_size", std::to_string(train.batch_size));
  kv("learning_rate", text::exact(train.learning_rate));
  kv("lambda_l2", text::exact(train.lambda_l2));
  kv("train_seed", std::to_string(train.seed));
  kv("shuffle", train.shuffle ? "true" : "false");
  kv("architecture", architecture.empty() ? nn::format_architecture(layers()) : architecture);
  kv("threshold", text::exact(threshold));
  kv("search_space", search_space);
  kv("n_trials", std::to_string(n_trials));
  kv("cv_folds", std::to_string(cv_folds));
  kv("search_seed", std::to_string(search_seed));
  kv("include_published", include_published ? "true" : "false");
  kv("jobs", std::to_string(jobs));
  return out.str();
}

std::vector<nn::LayerSpec> RunConfig::layers() const {
  return architecture.empty() ? nn::default_architecture() : nn::parse_architecture(architecture);
}

char RunConfig::delimiter_for(const std::string& path) const {
  if (metadata_delimiter == "tab") return '\t';
  if (metadata_delimiter == "comma") return ',';
  const auto dot = path.rfind('.');
  const auto ext = dot == std::string::npos ? std::string() : text::lower(path.substr(dot));
  return ext == ".csv" ? ',' : '\t';
}

}  // namespace spikesev
