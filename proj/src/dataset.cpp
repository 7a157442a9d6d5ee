#include "spikesev/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "spikesev/binary_io.hpp"
#include "spikesev/random.hpp"
#include "spikesev/seqfeatures.hpp"
#include "spikesev/text.hpp"

namespace spikesev {

int label_value(SeverityLabel label) {
  switch (label) {
    case SeverityLabel::Mild: return 1;
    case SeverityLabel::Severe: return 0;
    default: throw InputError("only Mild/Severe records carry a training label");
  }
}

SeverityLabel label_from_value(int value) {
  if (value == 1) return SeverityLabel::Mild;
  if (value == 0) return SeverityLabel::Severe;
  throw InputError("label value must be 0 or 1");
}

// ---------------------------------------------------------------------------
// Covariates

namespace {

std::vector<std::string> sorted_unique(std::set<std::string> values) {
  return {values.begin(), values.end()};
}

void one_hot(Eigen::VectorXd& out, Eigen::Index offset,
             const std::vector<std::string>& categories, const std::string& value) {
  auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it != categories.end() && *it == value) out[offset + (it - categories.begin())] = 1.0;
}

// Ages sort numerically rather than as text.
bool age_less(const std::string& a, const std::string& b) {
  const auto na = std::stoi(a), nb = std::stoi(b);
  return na != nb ? na < nb : a < b;
}

}  // namespace

CovariateCodebook CovariateCodebook::fit(const std::vector<SpikeRecord>& records,
                                         AgeEncoding age_encoding) {
  CovariateCodebook cb;
  cb.age_encoding_ = age_encoding;
  std::set<std::string> genders, ages, clades, lineages;
  for (const auto& r : records) {
    genders.insert(to_string(r.gender));
    ages.insert(cb.age_category(r.age));
    clades.insert(r.clade);
    lineages.insert(r.lineage);
  }
  cb.genders_ = sorted_unique(std::move(genders));
  cb.ages_ = sorted_unique(std::move(ages));
  std::sort(cb.ages_.begin(), cb.ages_.end(), age_less);
  cb.clades_ = sorted_unique(std::move(clades));
  cb.lineages_ = sorted_unique(std::move(lineages));
  return cb;
}

std::string CovariateCodebook::age_category(int age) const {
  if (age_encoding_ == AgeEncoding::Decade) return std::to_string(age / 10 * 10);
  return std::to_string(age);
}

int CovariateCodebook::width() const {
  return static_cast<int>(genders_.size() + ages_.size() + clades_.size() + lineages_.size());
}

Eigen::VectorXd CovariateCodebook::encode(const SpikeRecord& record) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(width());
  Eigen::Index offset = 0;
  one_hot(out, offset, genders_, to_string(record.gender));
  offset += static_cast<Eigen::Index>(genders_.size());
  const auto age = age_category(record.age);
  auto it = std::find(ages_.begin(), ages_.end(), age);
  if (it != ages_.end()) out[offset + (it - ages_.begin())] = 1.0;
  offset += static_cast<Eigen::Index>(ages_.size());
  one_hot(out, offset, clades_, record.clade);
  offset += static_cast<Eigen::Index>(clades_.size());
  one_hot(out, offset, lineages_, record.lineage);
  return out;
}

Eigen::VectorXd encode_covariates(const SpikeRecord& record,
                                  const CovariateCodebook& codebook) {
  return codebook.encode(record);
}

// ---------------------------------------------------------------------------
// Feature spec file

void FeatureSpec::write(std::ostream& out) const {
  out << "# feature specification and covariate codebook\n";
  out << "registry_hash\t" << registry_hash << '\n';
  out << "n_model\t" << n_model << '\n';
  out << "block_weight_sequence\t" << text::exact(weights.sequence) << '\n';
  out << "block_weight_covariates\t" << text::exact(weights.covariates) << '\n';
  out << "age_encoding\t"
      << (codebook.age_encoding() == AgeEncoding::Decade ? "decade" : "onehot") << '\n';
  auto field = [&](const char* name, const std::vector<std::string>& values) {
    for (const auto& v : values) out << "category\t" << name << '\t' << v << '\n';
  };
  field("gender", codebook.genders());
  field("age", codebook.ages());
  field("clade", codebook.clades());
  field("lineage", codebook.lineages());
}

FeatureSpec FeatureSpec::read(std::istream& in) {
  FeatureSpec spec;
  std::string line;
  bool have_n_model = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f[0] == "registry_hash" && f.size() == 2) {
      spec.registry_hash = f[1];
    } else if (f[0] == "n_model" && f.size() == 2) {
      spec.n_model = static_cast<int>(text::parse_int(f[1], "n_model"));
      have_n_model = true;
    } else if (f[0] == "block_weight_sequence" && f.size() == 2) {
      spec.weights.sequence = text::parse_double(f[1], "block_weight_sequence");
    } else if (f[0] == "block_weight_covariates" && f.size() == 2) {
      spec.weights.covariates = text::parse_double(f[1], "block_weight_covariates");
    } else if (f[0] == "age_encoding" && f.size() == 2) {
      if (f[1] == "onehot") spec.codebook.age_encoding_ = AgeEncoding::OneHot;
      else if (f[1] == "decade") spec.codebook.age_encoding_ = AgeEncoding::Decade;
      else throw InputError("codebook: unknown age_encoding '" + f[1] + "'");
    } else if (f[0] == "category" && f.size() == 3) {
      if (f[1] == "gender") spec.codebook.genders_.push_back(f[2]);
      else if (f[1] == "age") spec.codebook.ages_.push_back(f[2]);
      else if (f[1] == "clade") spec.codebook.clades_.push_back(f[2]);
      else if (f[1] == "lineage") spec.codebook.lineages_.push_back(f[2]);
      else throw InputError("codebook: unknown field '" + f[1] + "'");
    } else {
      throw InputError("codebook: unrecognised line '" + line + "'");
    }
  }
  if (!have_n_model || spec.registry_hash.empty())
    throw InputError("codebook: missing n_model or registry_hash");
  return spec;
}

// ---------------------------------------------------------------------------
// Assembly

FeatureVector assemble(const SpikeRecord& record, const ScalesRegistry& scales,
                       const CovariateCodebook& codebook, int n_model,
                       const BlockWeights& weights) {
  const int width = codebook.width();
  if (n_model < kGlobalWidth + width)
    throw InputError("model length too small: " + std::to_string(n_model) + " < " +
                     std::to_string(kGlobalWidth + width) + " (global + covariates)");

  const auto global = global_descriptors(record.sequence, scales).flatten();
  const auto residues = residue_encoding(record.sequence, scales);
  const int available_rows = (n_model - kGlobalWidth - width) / kResidueWidth;
  const int rows = std::min(static_cast<int>(residues.rows.rows()), available_rows);

  FeatureVector fv;
  fv.accession_id = record.accession_id;
  fv.label = label_value(record.label);
  auto& L = fv.layout;
  L.global_end = kGlobalWidth;
  L.residue_begin = kGlobalWidth;
  L.residue_end = L.residue_begin + rows * kResidueWidth;
  L.covariate_begin = L.residue_end;
  L.covariate_end = L.covariate_begin + width;
  L.length = n_model;
  L.truncated = rows < residues.rows.rows();

  Eigen::VectorXd values = Eigen::VectorXd::Zero(n_model);
  values.head(kGlobalWidth) = weights.sequence * global;
  // Row-major storage makes the top rows a contiguous flattened block.
  values.segment(L.residue_begin, rows * kResidueWidth) =
      weights.sequence *
      Eigen::Map<const Eigen::VectorXd>(residues.rows.data(), rows * kResidueWidth);
  values.segment(L.covariate_begin, width) = weights.covariates * codebook.encode(record);
  fv.values = values.cast<float>();
  return fv;
}

// ---------------------------------------------------------------------------
// Dataset

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), static_cast<std::uint8_t>(label)));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), cols());
  out.labels.reserve(indices.size());
  out.ids.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(indices[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(src);
    out.labels.push_back(labels[indices[i]]);
    out.ids.push_back(ids.empty() ? std::string() : ids[indices[i]]);
  }
  if (ids.empty()) out.ids.clear();
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features &&
         labels == other.labels && ids == other.ids;
}

FeaturizeResult featurize(const std::vector<SpikeRecord>& records,
                          const ScalesRegistry& scales, const FeatureSpec& spec, int jobs) {
  if (records.empty()) throw InputError("no records to featurize");
  const auto n = records.size();
  std::vector<FeatureVector> vectors(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      vectors[i] = assemble(records[i], scales, spec.codebook, spec.n_model, spec.weights);
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    work(0, n);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n + static_cast<std::size_t>(jobs) - 1) / static_cast<std::size_t>(jobs);
      for (int j = 0; j < jobs; ++j) {
        const std::size_t begin = static_cast<std::size_t>(j) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, j, begin, end] {
          try {
            work(begin, end);
          } catch (...) {
            errors[static_cast<std::size_t>(j)] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  FeaturizeResult result;
  auto& ds = result.dataset;
  ds.features.resize(static_cast<Eigen::Index>(n), spec.n_model);
  for (std::size_t i = 0; i < n; ++i) {
    ds.features.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
    ds.labels.push_back(static_cast<std::uint8_t>(vectors[i].label));
    ds.ids.push_back(vectors[i].accession_id);
    result.truncated += vectors[i].layout.truncated;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Splitting

DatasetSplit stratified_split(const Dataset& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("split ratio must lie in (0, 1)");
  Rng rng(seed);
  std::vector<std::size_t> train, test;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
      if (data.labels[i] == cls) members.push_back(i);
    if (members.empty())
      throw InputError("class " + std::to_string(cls) + " has no records; cannot stratify");
    rng.shuffle(members);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(members.size())));
    train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test), seed};
}

std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int k,
                                  std::uint64_t seed) {
  if (k < 2) throw InputError("cross-validation needs k >= 2");
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(k))
      throw InputError("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                       " records, fewer than k = " + std::to_string(k) + " folds");
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j)
      fold[members[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fold;
}

// ---------------------------------------------------------------------------
// SMOTE

Dataset smote(const Dataset& train, int k, std::uint64_t seed) {
  if (k < 1) throw InputError("SMOTE requires k >= 1");
  const auto n0 = train.count(0), n1 = train.count(1);
  if (n0 == n1) return train;
  const std::uint8_t minority = n1 < n0 ? 1 : 0;
  const std::size_t n_min = std::min(n0, n1);
  if (n_min < 2) throw InputError("SMOTE requires ≥2 minority samples");
  const std::size_t needed = std::max(n0, n1) - n_min;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n_min - 1);

  std::vector<Eigen::Index> members;
  for (std::size_t i = 0; i < train.labels.size(); ++i)
    if (train.labels[i] == minority) members.push_back(static_cast<Eigen::Index>(i));

  // Neighbour lists are computed lazily, once per minority row.
  std::vector<std::vector<std::size_t>> neighbours(n_min);
  auto nearest = [&](std::size_t a) -> const std::vector<std::size_t>& {
    auto& list = neighbours[a];
    if (!list.empty()) return list;
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n_min - 1);
    const auto xa = train.features.row(members[a]).cast<double>();
    for (std::size_t b = 0; b < n_min; ++b) {
      if (b == a) continue;
      dist.emplace_back((train.features.row(members[b]).cast<double>() - xa).squaredNorm(), b);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t j = 0; j < kk; ++j) list.push_back(dist[j].second);
    return list;
  };

  Dataset out;
  const auto rows = train.rows() + static_cast<Eigen::Index>(needed);
  out.features.resize(rows, train.cols());
  out.features.topRows(train.rows()) = train.features;
  out.labels = train.labels;
  out.ids = train.ids;
  if (out.ids.empty()) out.ids.resize(train.labels.size());

  Rng rng(seed);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = rng.index(n_min);
    const auto& list = nearest(a);
    const std::size_t b = list[rng.index(list.size())];
    const double lambda = rng.uniform();
    const auto x = train.features.row(members[a]);
    const auto z = train.features.row(members[b]);
    out.features.row(train.rows() + static_cast<Eigen::Index>(s)) =
        (x.cast<double>() + lambda * (z.cast<double>() - x.cast<double>())).cast<float>();
    out.labels.push_back(minority);
    out.ids.push_back("smote:" + std::to_string(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix file

namespace {
constexpr std::string_view kMatrixMagic = "SSEVMAT1";
}

void write_matrix(const Dataset& data, std::ostream& out) {
  if (data.labels.size() != static_cast<std::size_t>(data.rows()))
    throw InputError("label count does not match matrix rows");
  binary::put_magic(out, kMatrixMagic);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(data.rows()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(data.cols()));
  binary::put_floats(out, data.features.data(), static_cast<std::size_t>(data.features.size()));
  out.write(reinterpret_cast<const char*>(data.labels.data()),
            static_cast<std::streamsize>(data.labels.size()));
}

Dataset read_matrix(std::istream& in) {
  std::string magic(kMatrixMagic.size(), '\0');
  if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())))
    throw FormatError("truncated file while reading matrix magic");
  if (magic.substr(0, 7) == kMatrixMagic.substr(0, 7) && magic != kMatrixMagic)
    throw FormatError("unsupported matrix format version '" + magic.substr(7) + "'");
  if (magic != kMatrixMagic) throw FormatError("bad magic: not a matrix file");

  const auto rows = binary::get<std::uint32_t>(in, "matrix row count");
  const auto cols = binary::get<std::uint32_t>(in, "matrix column count");
  // Reject truncated payloads before allocating when the stream can tell us its size.
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
    in.seekg(here);
    const auto expected = static_cast<std::uint64_t>(rows) * cols * sizeof(float) + rows;
    if (remaining < expected)
      throw FormatError("truncated file: header declares " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " but only " + std::to_string(remaining) +
                        " payload bytes follow");
  }
  Dataset data;
  data.features.resize(rows, cols);
  binary::get_floats(in, data.features.data(), static_cast<std::size_t>(rows) * cols,
                     "matrix payload");
  data.labels.resize(rows);
  if (rows && !in.read(reinterpret_cast<char*>(data.labels.data()), rows))
    throw FormatError("truncated file while reading matrix labels");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError("dimension mismatch: trailing bytes after " + std::to_string(rows) +
                      "x" + std::to_string(cols) + " payload");
  for (auto l : data.labels)
    if (l > 1) throw FormatError("matrix label outside {0,1}");
  return data;
}

void write_matrix(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_matrix(data, out);
}

Dataset read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_matrix(in);
}

void write_ids(const std::vector<std::string>& ids, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& id : ids) out << id << '\n';
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) ids.push_back(line);
  return ids;
}

}  // namespace spikesev
