#ifndef SPIKESEV_DATASET_HPP
#define SPIKESEV_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spikesev/ingest.hpp"
#include "spikesev/nn/spec.hpp"
#include "spikesev/scales.hpp"

namespace spikesev {

/// Default model input length. Valid convolution with kernel 4 over 16,730
/// samples gives the 16,727-long first feature map of the reference network.
inline constexpr int kDefaultModelLength = nn::kDefaultInputLength;

/// Mild is the positive class.
int label_value(SeverityLabel label);
SeverityLabel label_from_value(int value);

enum class AgeEncoding { OneHot, Decade };

/// Ordered category lists for the one-hot covariates, fitted once.
class CovariateCodebook {
 public:
  CovariateCodebook() = default;

  static CovariateCodebook fit(const std::vector<SpikeRecord>& records,
                               AgeEncoding age_encoding = AgeEncoding::OneHot);

  /// Category key used for a record's age under the codebook's encoding.
  std::string age_category(int age) const;

  const std::vector<std::string>& genders() const { return genders_; }
  const std::vector<std::string>& ages() const { return ages_; }
  const std::vector<std::string>& clades() const { return clades_; }
  const std::vector<std::string>& lineages() const { return lineages_; }
  AgeEncoding age_encoding() const { return age_encoding_; }

  int width() const;

  /// Concatenated one-hot blocks in order gender, age, clade, lineage.
  /// A value not seen during fitting yields an all-zero block.
  Eigen::VectorXd encode(const SpikeRecord& record) const;

  bool operator==(const CovariateCodebook&) const = default;

 private:
  friend struct FeatureSpec;
  std::vector<std::string> genders_;
  std::vector<std::string> ages_;
  std::vector<std::string> clades_;
  std::vector<std::string> lineages_;
  AgeEncoding age_encoding_ = AgeEncoding::OneHot;
};

Eigen::VectorXd encode_covariates(const SpikeRecord& record,
                                  const CovariateCodebook& codebook);

struct BlockWeights {
  double sequence = 1.0;
  double covariates = 1.0;
};

/// Block boundaries within one assembled vector, as [begin, end) offsets.
struct FeatureLayout {
  int global_end = 0;
  int residue_begin = 0;
  int residue_end = 0;
  int covariate_begin = 0;
  int covariate_end = 0;
  int length = 0;          // padding covers [covariate_end, length)
  bool truncated = false;  // residue rows were dropped to fit
};

struct FeatureVector {
  std::string accession_id;
  Eigen::VectorXf values;
  FeatureLayout layout;
  int label = 0;
};

/// Everything needed to featurize a record the same way twice.
struct FeatureSpec {
  CovariateCodebook codebook;
  int n_model = kDefaultModelLength;
  BlockWeights weights;
  std::string registry_hash;

  void write(std::ostream& out) const;
  static FeatureSpec read(std::istream& in);
};

/// [global | residue rows, row-major | covariates | zeros]. When the record
/// does not fit, trailing residue rows are dropped and layout.truncated set.
FeatureVector assemble(const SpikeRecord& record, const ScalesRegistry& scales,
                       const CovariateCodebook& codebook, int n_model,
                       const BlockWeights& weights = {});

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-aligned features, binary labels and record ids.
struct Dataset {
  FeatureMatrix features;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> ids;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  std::size_t count(int label) const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
  bool operator==(const Dataset& other) const;
};

struct FeaturizeResult {
  Dataset dataset;
  std::size_t truncated = 0;
};

/// Assembles every record. With jobs > 1 records are processed on worker
/// threads; output order and values do not depend on jobs.
FeaturizeResult featurize(const std::vector<SpikeRecord>& records,
                          const ScalesRegistry& scales, const FeatureSpec& spec,
                          int jobs = 1);

struct DatasetSplit {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

/// Per-class seeded shuffle; floor(ratio * n_class) rows of each class go
/// to train, the rest to test. Rows keep their original relative order.
DatasetSplit stratified_split(const Dataset& data, double ratio, std::uint64_t seed);

/// Fold index in [0, k) per row, stratified by class.
std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int k,
                                  std::uint64_t seed);

/// Balances classes by interpolating minority rows towards one of their k
/// nearest minority neighbours (Euclidean). Input rows are kept verbatim at
/// the front; synthetic rows are appended with ids "smote:<n>".
Dataset smote(const Dataset& train, int k, std::uint64_t seed);

// Matrix file: "SSEVMAT1", u32 rows, u32 cols, rows*cols f32, rows u8 labels,
// all little-endian.
void write_matrix(const Dataset& data, const std::string& path);
Dataset read_matrix(const std::string& path);
void write_matrix(const Dataset& data, std::ostream& out);
Dataset read_matrix(std::istream& in);

/// Sidecar with one record id per line, row-aligned with a matrix file.
void write_ids(const std::vector<std::string>& ids, const std::string& path);
std::vector<std::string> read_ids(const std::string& path);

}  // namespace spikesev

#endif  // SPIKESEV_DATASET_HPP
