#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "spikesev/dataset.hpp"
#include "spikesev/random.hpp"
#include "spikesev/seqfeatures.hpp"
#include "spikesev/synthetic.hpp"

using namespace spikesev;

namespace {

SpikeRecord record(std::string id, std::string seq, SeverityLabel label, int age, Gender g,
                   std::string clade, std::string lineage) {
  SpikeRecord r;
  r.accession_id = std::move(id);
  r.sequence = std::move(seq);
  r.label = label;
  r.age = age;
  r.gender = g;
  r.clade = std::move(clade);
  r.lineage = std::move(lineage);
  r.collection_date = "2021-01-01";
  return r;
}

std::vector<SpikeRecord> small_cohort() {
  return {record("a", "MKVLL", SeverityLabel::Mild, 50, Gender::Male, "GR", "P.1"),
          record("b", "ACDEW", SeverityLabel::Severe, 9, Gender::Female, "GK", "AY.99.2"),
          record("c", "NNQST", SeverityLabel::Mild, 100, Gender::Female, "GR", "P.1")};
}

Dataset random_dataset(Rng& rng, std::size_t n0, std::size_t n1, Eigen::Index d) {
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n0 + n1), d);
  for (Eigen::Index i = 0; i < data.features.size(); ++i)
    data.features.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    data.labels.push_back(i < n0 ? 0 : 1);
    data.ids.push_back("r" + std::to_string(i));
  }
  return data;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("label mapping is a bijection with Mild as 1") {
  CHECK(label_value(SeverityLabel::Mild) == 1);
  CHECK(label_value(SeverityLabel::Severe) == 0);
  CHECK(label_from_value(1) == SeverityLabel::Mild);
  CHECK(label_from_value(0) == SeverityLabel::Severe);
  CHECK_THROWS(label_value(SeverityLabel::Inconclusive));
}

TEST_CASE("codebook fit orders categories and encodes one-hot blocks") {
  const auto cohort = small_cohort();
  const auto cb = CovariateCodebook::fit(cohort);
  CHECK(cb.genders() == std::vector<std::string>{"female", "male"});
  CHECK(cb.clades() == std::vector<std::string>{"GK", "GR"});
  CHECK(cb.ages() == std::vector<std::string>{"9", "50", "100"});
  CHECK(cb.width() == 2 + 3 + 2 + 2);
  const auto v = cb.encode(cohort[0]);
  CHECK(v.size() == cb.width());
  CHECK(v.sum() == 4.0);
  // clade block: [GK, GR] with value GR
  CHECK(v[5] == 0.0);
  CHECK(v[6] == 1.0);
}

TEST_CASE("unseen categories encode as zero blocks") {
  const auto cb = CovariateCodebook::fit(small_cohort());
  auto novel = small_cohort()[0];
  novel.lineage = "B.1.1.7";
  CHECK(encode_covariates(novel, cb).sum() == 3.0);
  novel.age = 33;
  novel.clade = "O";
  CHECK(encode_covariates(novel, cb).sum() == 1.0);
}

TEST_CASE("decade age encoding bins ages") {
  const auto cb = CovariateCodebook::fit(small_cohort(), AgeEncoding::Decade);
  CHECK(cb.ages() == std::vector<std::string>{"0", "50", "100"});
  CHECK(cb.age_category(57) == "50");
}

TEST_CASE("feature spec round-trips through text") {
  FeatureSpec spec;
  spec.codebook = CovariateCodebook::fit(small_cohort(), AgeEncoding::Decade);
  spec.n_model = 777;
  spec.weights = {2.0, 0.5};
  spec.registry_hash = ScalesRegistry::standard().content_hash();
  std::stringstream buf;
  spec.write(buf);
  const auto back = FeatureSpec::read(buf);
  CHECK(back.codebook == spec.codebook);
  CHECK(back.n_model == 777);
  CHECK(back.weights.sequence == 2.0);
  CHECK(back.weights.covariates == 0.5);
  CHECK(back.registry_hash == spec.registry_hash);
}

TEST_CASE("assemble lays out blocks and pads with zeros") {
  const auto& reg = ScalesRegistry::standard();
  const auto cohort = small_cohort();
  const auto cb = CovariateCodebook::fit(cohort);
  const int w = cb.width();
  const auto fv = assemble(cohort[0], reg, cb, 200);
  CHECK(fv.values.size() == 200);
  CHECK(fv.label == 1);
  CHECK(fv.layout.residue_end == 29 + 50);
  CHECK(fv.layout.covariate_begin == 29 + 50);
  CHECK(fv.layout.covariate_end == 29 + 50 + w);
  CHECK_FALSE(fv.layout.truncated);
  CHECK(fv.values.tail(200 - (29 + 50 + w)).isZero());
  const Eigen::VectorXf global = global_descriptors("MKVLL", reg).flatten().cast<float>();
  CHECK(fv.values.head(29) == global);
  CHECK(fv.values.segment(29, 10) == residue_row('M', reg).transpose().cast<float>());
  CHECK(fv.values.segment(29 + 50, w) == cb.encode(cohort[0]).cast<float>());
}

TEST_CASE("assemble block weights are linear") {
  const auto& reg = ScalesRegistry::standard();
  const auto cohort = small_cohort();
  const auto cb = CovariateCodebook::fit(cohort);
  const auto base = assemble(cohort[1], reg, cb, 150, {1.0, 1.0});
  const auto doubled = assemble(cohort[1], reg, cb, 150, {2.0, 1.0});
  const int seq_end = 29 + 50;
  CHECK(doubled.values.head(seq_end) == 2.0f * base.values.head(seq_end));
  CHECK(doubled.values.tail(150 - seq_end) == base.values.tail(150 - seq_end));
  const auto cov = assemble(cohort[1], reg, cb, 150, {1.0, 3.0});
  CHECK(cov.values.segment(seq_end, cb.width()) == 3.0f * base.values.segment(seq_end, cb.width()));
}

TEST_CASE("assemble truncates trailing residue rows and rejects too-small models") {
  const auto& reg = ScalesRegistry::standard();
  const auto cohort = small_cohort();
  const auto cb = CovariateCodebook::fit(cohort);
  const int n = 29 + 20 + cb.width() + 5;  // room for 2 residue rows
  const auto fv = assemble(cohort[0], reg, cb, n);
  CHECK(fv.layout.truncated);
  CHECK(fv.layout.residue_end == 29 + 20);
  CHECK(fv.values.size() == n);
  CHECK_THROWS_WITH_AS(assemble(cohort[0], reg, cb, 29 + cb.width() - 1),
                       doctest::Contains("model length too small"), InputError);
}

TEST_CASE("featurize is deterministic and independent of the worker count") {
  SyntheticOptions opt;
  opt.records = 60;
  opt.seed = 3;
  const auto cohort = synthetic_cohort(opt);
  FeatureSpec spec;
  spec.codebook = CovariateCodebook::fit(cohort);
  spec.n_model = 600;
  const auto a = featurize(cohort, ScalesRegistry::standard(), spec, 1).dataset;
  const auto b = featurize(cohort, ScalesRegistry::standard(), spec, 4).dataset;
  CHECK(a == b);
  CHECK(a.rows() == 60);
  CHECK(a.ids[0] == "SYN1");
}

TEST_CASE("stratified_split sizes, disjointness and determinism") {
  Rng rng(11);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n0 = 1 + rng.index(60), n1 = 1 + rng.index(60);
    const auto data = random_dataset(rng, n0, n1, 3);
    const double ratio = 0.5 + 0.4 * rng.uniform();
    const auto s = stratified_split(data, ratio, 100 + t);
    CHECK(s.train.count(0) == static_cast<std::size_t>(std::floor(ratio * n0)));
    CHECK(s.train.count(1) == static_cast<std::size_t>(std::floor(ratio * n1)));
    CHECK(s.train.rows() + s.test.rows() == data.rows());
    std::multiset<std::string> all(s.train.ids.begin(), s.train.ids.end());
    all.insert(s.test.ids.begin(), s.test.ids.end());
    CHECK(all == std::multiset<std::string>(data.ids.begin(), data.ids.end()));
    std::set<std::string> train_ids(s.train.ids.begin(), s.train.ids.end());
    for (const auto& id : s.test.ids) CHECK(train_ids.count(id) == 0);
    // Test-part class proportion stays within one sample of the cohort's.
    const double expect1 = static_cast<double>(n1) / static_cast<double>(n0 + n1) * s.test.rows();
    CHECK(std::abs(static_cast<double>(s.test.count(1)) - expect1) <= 1.0 + 1e-9);
    CHECK(stratified_split(data, ratio, 100 + t).test == s.test);
  }
  Rng r2(1);
  CHECK_THROWS_AS(stratified_split(random_dataset(r2, 5, 0, 2), 0.8, 1), InputError);
  CHECK_THROWS_AS(stratified_split(random_dataset(r2, 5, 5, 2), 1.0, 1), InputError);
}

TEST_CASE("stratified_folds balance each class across folds") {
  std::vector<std::uint8_t> labels(23, 0);
  std::fill(labels.begin() + 13, labels.end(), 1);
  const auto folds = stratified_folds(labels, 5, 9);
  for (int f = 0; f < 5; ++f) {
    int c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (folds[i] == f) (labels[i] ? c1 : c0)++;
    CHECK(c0 >= 2);
    CHECK(c0 <= 3);
    CHECK(c1 == 2);
  }
  CHECK_THROWS_AS(stratified_folds(std::vector<std::uint8_t>{0, 0, 0, 1}, 2, 1), InputError);
}

TEST_CASE("smote on 1-D points stays inside the segment") {
  Dataset d;
  d.features.resize(5, 1);
  d.features << 0.0f, 1.0f, 7.0f, 8.0f, 9.0f;
  d.labels = {1, 1, 0, 0, 0};
  d.ids = {"m0", "m1", "x0", "x1", "x2"};
  const auto out = smote(d, 5, 1);
  CHECK(out.rows() == 6);
  CHECK(out.count(0) == 3);
  CHECK(out.count(1) == 3);
  CHECK(out.features(5, 0) >= 0.0f);
  CHECK(out.features(5, 0) <= 1.0f);
  CHECK(out.ids[5] == "smote:0");
}

TEST_CASE("smote balances, keeps originals and is seeded") {
  Rng rng(12);
  const auto data = random_dataset(rng, 10, 4, 6);
  const auto out = smote(data, 3, 77);
  CHECK(out.count(0) == 10);
  CHECK(out.count(1) == 10);
  CHECK(out.features.topRows(data.rows()) == data.features);
  CHECK(std::equal(data.ids.begin(), data.ids.end(), out.ids.begin()));
  CHECK(smote(data, 3, 77) == out);
  CHECK_FALSE(smote(data, 3, 78) == out);
  const auto balanced = random_dataset(rng, 4, 4, 2);
  CHECK(smote(balanced, 5, 1) == balanced);
  CHECK_THROWS_WITH_AS(smote(random_dataset(rng, 5, 1, 2), 5, 1),
                       "SMOTE requires ≥2 minority samples", InputError);
}

TEST_CASE("matrix file round-trips bit-exactly") {
  Rng rng(13);
  const auto data = random_dataset(rng, 7, 5, 9);
  std::stringstream buf;
  write_matrix(data, buf);
  const auto bytes = buf.str();
  CHECK(bytes.size() == 8 + 4 + 4 + 12 * 9 * 4 + 12);
  std::stringstream in(bytes);
  auto back = read_matrix(in);
  back.ids = data.ids;
  CHECK(back == data);
}

TEST_CASE("matrix file errors are distinct") {
  Rng rng(14);
  const auto data = random_dataset(rng, 3, 2, 4);
  std::stringstream buf;
  write_matrix(data, buf);
  const auto good = buf.str();
  auto read = [](const std::string& bytes) {
    std::stringstream in(bytes);
    return read_matrix(in);
  };
  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(read(bad_magic), doctest::Contains("bad magic"), FormatError);
  auto bad_version = good;
  bad_version[7] = '2';
  CHECK_THROWS_WITH_AS(read(bad_version), doctest::Contains("version"), FormatError);
  CHECK_THROWS_WITH_AS(read(good.substr(0, good.size() - 3)), doctest::Contains("truncated"),
                       FormatError);
  CHECK_THROWS_WITH_AS(read(good.substr(0, 5)), doctest::Contains("truncated"), FormatError);
  CHECK_THROWS_WITH_AS(read(good + "zz"), doctest::Contains("dimension mismatch"), FormatError);
  auto huge = good;
  huge[8] = '\xff';
  huge[9] = '\xff';
  huge[10] = '\xff';
  CHECK_THROWS_WITH_AS(read(huge), doctest::Contains("truncated"), FormatError);
}

}  // TEST_SUITE
