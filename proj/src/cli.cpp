#include "spikesev/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "spikesev/config.hpp"
#include "spikesev/dataset.hpp"
#include "spikesev/evaluation.hpp"
#include "spikesev/ingest.hpp"
#include "spikesev/nn/checkpoint.hpp"
#include "spikesev/nn/gradcheck.hpp"
#include "spikesev/synthetic.hpp"
#include "spikesev/text.hpp"
#include "spikesev/training.hpp"

namespace spikesev {

namespace {

namespace fs = std::filesystem;

// Fixed artifact names inside the workdir.
constexpr const char* kCohortFile = "cohort.tsv";
constexpr const char* kExclusionFile = "exclusions.tsv";
constexpr const char* kFeaturesFile = "features.mat";
constexpr const char* kCodebookFile = "codebook.tsv";
constexpr const char* kTrainFile = "train.mat";
constexpr const char* kTestFile = "test.mat";
constexpr const char* kBalancedFile = "train_balanced.mat";
constexpr const char* kCheckpointFile = "model.ckpt";
constexpr const char* kEpochFile = "epochs.tsv";
constexpr const char* kReportFile = "report.tsv";
constexpr const char* kReportTextFile = "report.txt";
constexpr const char* kConfusionFile = "confusion.tsv";
constexpr const char* kPredictionFile = "predictions.tsv";
constexpr const char* kTrialsFile = "trials.tsv";
constexpr const char* kStatsFile = "stats.tsv";
constexpr const char* kGradcheckFile = "gradcheck.tsv";
constexpr const char* kSynthFasta = "synthetic.fasta";
constexpr const char* kSynthMetadata = "synthetic_metadata.tsv";

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  RunConfig config;
  std::string input;  // predict: cohort file to score
  std::size_t synth_records = 1000;
  double synth_mild_fraction = 0.5;
  int synth_length = 40;
  std::ostream& out;
  std::ostream& err;

  fs::path path(const char* name) const { return fs::path(config.workdir) / name; }
};

std::string ids_path(const fs::path& matrix) {
  auto p = matrix;
  p.replace_extension(".ids");
  return p.string();
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write output file: " + path.string());
  return out;
}

Dataset load_dataset(const fs::path& matrix) {
  if (!fs::exists(matrix)) throw InputError("cannot open input file: " + matrix.string());
  auto data = read_matrix(matrix.string());
  const auto ids = ids_path(matrix);
  if (fs::exists(ids)) {
    data.ids = read_ids(ids);
    if (data.ids.size() != static_cast<std::size_t>(data.rows()))
      throw FormatError(ids + ": id count does not match matrix rows");
  }
  return data;
}

void save_dataset(const Dataset& data, const fs::path& matrix) {
  write_matrix(data, matrix.string());
  write_ids(data.ids, ids_path(matrix));
}

std::vector<SpikeRecord> load_cohort(const fs::path& path) {
  auto in = open_input(path);
  return read_cohort(in);
}

ScalesRegistry load_scales(const RunConfig& cfg) {
  return cfg.scales.empty() ? ScalesRegistry::standard() : ScalesRegistry::load(cfg.scales);
}

FeatureSpec load_feature_spec(const fs::path& path) {
  auto in = open_input(path);
  return FeatureSpec::read(in);
}

std::string registry_hash_for(const Context& ctx) {
  const auto codebook = ctx.path(kCodebookFile);
  if (fs::exists(codebook)) return load_feature_spec(codebook).registry_hash;
  return load_scales(ctx.config).content_hash();
}

// Subcommands -----------------------------------------------------------

void cmd_synth(Context& ctx) {
  SyntheticOptions opt;
  opt.records = ctx.synth_records;
  opt.mild_fraction = ctx.synth_mild_fraction;
  opt.sequence_length = ctx.synth_length;
  opt.seed = ctx.config.split_seed;
  const auto records = synthetic_cohort(opt);
  auto fa = open_output(ctx.path(kSynthFasta));
  auto md = open_output(ctx.path(kSynthMetadata));
  write_synthetic_inputs(records, opt.seed, fa, md);
  ctx.out << "wrote " << records.size() << " synthetic records to " << ctx.path(kSynthFasta).string()
          << " and " << ctx.path(kSynthMetadata).string() << '\n';
}

void cmd_ingest(Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.fasta.empty()) throw InputError("ingest: no FASTA path given (--fasta or fasta=)");
  if (cfg.metadata.empty()) throw InputError("ingest: no metadata path given (--metadata or metadata=)");
  FastaParse fasta;
  {
    auto in = open_input(cfg.fasta);
    try {
      fasta = parse_fasta(in);
    } catch (const ParseError& e) {
      throw InputError(cfg.fasta + ": " + e.what());
    }
  }
  std::vector<RawMetadataRow> rows;
  {
    auto in = open_input(cfg.metadata);
    try {
      rows = parse_metadata(in, cfg.delimiter_for(cfg.metadata));
    } catch (const InputError& e) {
      throw InputError(cfg.metadata + ": " + e.what());
    }
  }
  const auto cohort = build_cohort(fasta, rows);
  {
    auto out = open_output(ctx.path(kCohortFile));
    write_cohort(out, cohort.records);
  }
  {
    auto out = open_output(ctx.path(kExclusionFile));
    write_exclusion_report(out, cohort.report);
  }
  if (cohort.records.empty())
    ctx.err << "warning: cohort is empty; every joined record was excluded\n";
  ctx.out << "retained " << cohort.report.retained << " of " << cohort.report.joined
          << " metadata rows; excluded " << cohort.report.excluded_total() << '\n';
}

void cmd_featurize(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto records = load_cohort(ctx.path(kCohortFile));
  const auto scales = load_scales(cfg);
  FeatureSpec spec;
  spec.codebook = CovariateCodebook::fit(records, cfg.age_encoding);
  spec.n_model = cfg.n_model;
  spec.weights = cfg.weights;
  spec.registry_hash = scales.content_hash();
  const auto result = featurize(records, scales, spec, cfg.jobs);
  save_dataset(result.dataset, ctx.path(kFeaturesFile));
  {
    auto out = open_output(ctx.path(kCodebookFile));
    spec.write(out);
  }
  if (result.truncated > 0)
    ctx.err << "warning: " << result.truncated << " record(s) truncated to fit n_model "
            << spec.n_model << '\n';
  ctx.out << "featurized " << result.dataset.rows() << " records into " << result.dataset.cols()
          << " columns\n";
}

void cmd_split(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto data = load_dataset(ctx.path(kFeaturesFile));
  const auto split = stratified_split(data, cfg.split_ratio, cfg.split_seed);
  save_dataset(split.train, ctx.path(kTrainFile));
  save_dataset(split.test, ctx.path(kTestFile));
  ctx.out << "train " << split.train.rows() << " (mild " << split.train.count(1) << ", severe "
          << split.train.count(0) << "); test " << split.test.rows() << " (mild "
          << split.test.count(1) << ", severe " << split.test.count(0) << ")\n";
}

void cmd_balance(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto data = load_dataset(ctx.path(kTrainFile));
  const auto balanced = smote(data, cfg.smote_k, cfg.smote_seed);
  save_dataset(balanced, ctx.path(kBalancedFile));
  ctx.out << "balanced " << data.rows() << " -> " << balanced.rows() << " rows\n";
}

void cmd_train(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto train_path =
      fs::exists(ctx.path(kBalancedFile)) ? ctx.path(kBalancedFile) : ctx.path(kTrainFile);
  const auto data = load_dataset(train_path);
  std::optional<Dataset> validation;
  if (fs::exists(ctx.path(kTestFile))) validation = load_dataset(ctx.path(kTestFile));
  const auto hash = registry_hash_for(ctx);
  nn::Model<float> model(static_cast<int>(data.cols()), cfg.layers(), cfg.train.seed);
  auto log = open_output(ctx.path(kEpochFile));
  const auto result = train(model, data, cfg.train, validation ? &*validation : nullptr, &log);
  nn::save_checkpoint(ctx.path(kCheckpointFile).string(), model, result.optimizer, hash);
  const auto& last = result.log.back();
  ctx.out << "trained " << model.param_count() << " parameters on " << train_path.filename().string()
          << " for " << cfg.train.epochs << " epochs; final loss " << text::fixed(last.train_loss, 4)
          << ", accuracy " << text::fixed(last.train_accuracy, 4) << '\n';
}

void cmd_evaluate(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto ckpt = nn::load_checkpoint(ctx.path(kCheckpointFile).string(), registry_hash_for(ctx));
  const auto test = load_dataset(ctx.path(kTestFile));
  const auto report = evaluate(ckpt.model, test, cfg.threshold);
  {
    auto out = open_output(ctx.path(kReportFile));
    report.write_tsv(out);
  }
  {
    auto out = open_output(ctx.path(kConfusionFile));
    report.write_confusion_tsv(out);
  }
  {
    auto out = open_output(ctx.path(kReportTextFile));
    report.write_text(out);
  }
  report.write_text(ctx.out);
}

void cmd_predict(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto spec = load_feature_spec(ctx.path(kCodebookFile));
  const auto scales = load_scales(cfg);
  if (scales.content_hash() != spec.registry_hash)
    throw InputError("scales registry " + scales.content_hash() +
                     " does not match the codebook's registry " + spec.registry_hash);
  const auto ckpt = nn::load_checkpoint(ctx.path(kCheckpointFile).string(), spec.registry_hash);
  const fs::path input = ctx.input.empty() ? ctx.path(kCohortFile) : fs::path(ctx.input);
  const auto records = load_cohort(input);
  const auto features = featurize(records, scales, spec, cfg.jobs).dataset;
  const auto scores = predict_scores(ckpt.model, features);
  auto out = open_output(ctx.path(kPredictionFile));
  out << "accession_id\tscore\tpredicted\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int label = scores[i] >= cfg.threshold ? 1 : 0;
    out << features.ids[i] << '\t' << text::fixed(scores[i], 6) << '\t'
        << to_string(label_from_value(label)) << '\n';
  }
  ctx.out << "scored " << scores.size() << " records into " << ctx.path(kPredictionFile).string()
          << '\n';
}

void cmd_search(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto source = fs::exists(ctx.path(kTrainFile)) ? ctx.path(kTrainFile) : ctx.path(kFeaturesFile);
  const auto data = load_dataset(source);
  SearchSpace space = SearchSpace::around_published();
  if (!cfg.search_space.empty()) {
    auto in = open_input(cfg.search_space);
    std::stringstream buf;
    buf << in.rdbuf();
    space = SearchSpace::parse(buf.str());
  }
  SearchOptions options;
  options.cv.folds = cfg.cv_folds;
  options.cv.smote_k = cfg.smote_k;
  options.cv.seed = cfg.search_seed;
  options.cv.threshold = cfg.threshold;
  options.seed = cfg.search_seed;
  options.include_published = cfg.include_published;
  const auto result = random_search(space, cfg.n_trials, data, cfg.train, options);
  auto out = open_output(ctx.path(kTrialsFile));
  result.write_tsv(out);
  const auto& best = result.best();
  ctx.out << "best trial " << best.index << " mean F1 " << text::fixed(best.cv.mean_f1, 4) << " +/- "
          << text::fixed(best.cv.std_f1, 4) << " (" << best.param_count << " parameters)\n";
}

void cmd_gradcheck(Context& ctx) {
  const auto report = nn::run_gradcheck(ctx.config.train.seed);
  {
    auto out = open_output(ctx.path(kGradcheckFile));
    report.write(out);
  }
  report.write(ctx.out);
  if (!report.passed())
    throw CheckFailure("gradient check failed: worst relative error " + text::exact(report.worst()));
}

void cmd_stats(Context& ctx) {
  const auto stats = cohort_stats(load_cohort(ctx.path(kCohortFile)));
  auto out = open_output(ctx.path(kStatsFile));
  write_stats(out, stats);
  write_stats(ctx.out, stats);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spike-protein COVID-19 severity toolkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> flags;
  std::vector<std::string> overrides;
  std::string input;
  std::size_t synth_records = 1000;
  double synth_mild = 0.5;
  int synth_length = 40;

  app.add_option("--config", config_path, "Key-value config file");
  app.add_option("--seed", seed, "Set every seed (split, SMOTE, training, search)");
  const std::pair<const char*, const char*> mapped[] = {
      {"--threshold", "threshold"}, {"--jobs", "jobs"},       {"--ratio", "split_ratio"},
      {"--k", "smote_k"},           {"--epochs", "epochs"},   {"--n-model", "n_model"},
      {"--workdir", "workdir"},     {"--fasta", "fasta"},     {"--metadata", "metadata"},
      {"--arch", "architecture"}};
  for (const auto& [flag, key] : mapped)
    app.add_option_function<std::string>(flag, [&flags, key = std::string(key)](const std::string& v) {
      flags[key] = v;
    }, "Overrides config key '" + std::string(key) + "'");
  app.add_option("--set", overrides, "Override any config key: key=value (repeatable)");

  using Handler = std::function<void(Context&)>;
  std::map<std::string, Handler> handlers;
  auto sub = [&](const char* name, const char* help, Handler h) {
    handlers[name] = std::move(h);
    return app.add_subcommand(name, help);
  };
  sub("ingest", "FASTA + metadata -> cohort.tsv, exclusions.tsv", cmd_ingest);
  sub("featurize", "cohort.tsv -> features.mat/.ids, codebook.tsv", cmd_featurize);
  sub("split", "features.mat -> train.mat, test.mat (stratified)", cmd_split);
  sub("balance", "train.mat -> train_balanced.mat (SMOTE)", cmd_balance);
  sub("train", "train_balanced.mat (or train.mat) -> model.ckpt, epochs.tsv", cmd_train);
  sub("evaluate", "model.ckpt + test.mat -> report.tsv, report.txt, confusion.tsv", cmd_evaluate);
  auto* predict = sub("predict", "model.ckpt + codebook.tsv + cohort -> predictions.tsv", cmd_predict);
  predict->add_option("--input", input, "Cohort file to score (default: workdir cohort.tsv)");
  sub("search", "random hyperparameter search with cross-validation -> trials.tsv", cmd_search);
  sub("gradcheck", "finite-difference gradient check of a tiny model", cmd_gradcheck);
  sub("stats", "cohort.tsv -> stats.tsv frequency tables", cmd_stats);
  auto* synth = sub("synth", "write a seeded synthetic FASTA + metadata pair", cmd_synth);
  synth->add_option("--records", synth_records, "Number of records");
  synth->add_option("--mild-fraction", synth_mild, "Fraction of Mild records");
  synth->add_option("--length", synth_length, "Sequence length");

  std::vector<const char*> argv{"spikesev"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto name = chosen->get_name();
  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
    for (const auto& [key, value] : flags) cfg.set(key, value);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      cfg.set(text::trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
    }
    cfg.train.validate();

    std::error_code ec;
    fs::create_directories(cfg.workdir, ec);
    if (ec) throw InputError("cannot create workdir " + cfg.workdir + ": " + ec.message());

    Context ctx{cfg, input, synth_records, synth_mild, synth_length, out, err};
    {
      auto resolved = open_output(ctx.path((name + ".config").c_str()));
      resolved << cfg.to_text();
    }
    handlers.at(name)(ctx);
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ShapeError& e) {
    // An architecture that does not fit the input is a configuration error.
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const CheckFailure& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace spikesev
