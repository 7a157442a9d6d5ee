#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spikesev/evaluation.hpp"
#include "spikesev/random.hpp"
#include "support.hpp"

using namespace spikesev;
using spikesev::testing::reference_confusion_fixture;

namespace {

// Every positive/negative pair, ties worth one half.
double brute_force_auc(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

std::string metric_line(const std::string& tsv, const std::string& prefix) {
  std::istringstream in(tsv);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) return line;
  return {};
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("confusion counts and contracts") {
  const std::vector<std::uint8_t> y{0, 0, 1, 1};
  const std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
  const auto cm = confusion(y, perfect);
  CHECK(cm == ConfusionMatrix{2, 2, 0, 0});
  // Ties at the threshold count as positive.
  CHECK(confusion(y, std::vector<double>{0.5, 0.4, 0.5, 0.5}).fp == 1);
  const auto all_pos = confusion(y, perfect, 0.0);
  CHECK(all_pos.tn + all_pos.fn == 0);
  CHECK(all_pos.tp == 2);
  CHECK(all_pos.fp == 2);
  const auto all_neg = confusion(y, perfect, 1.0);
  CHECK(all_neg.tp + all_neg.fp == 0);
  CHECK(all_neg.total() == 4);
  CHECK_THROWS_AS(confusion(y, std::vector<double>{0.1}), InputError);
  CHECK_THROWS_AS(confusion({}, {}), InputError);
}

TEST_CASE("reference confusion fixture reproduces its counts and rates") {
  const auto f = reference_confusion_fixture();
  const auto cm = confusion(f.labels, f.scores);
  CHECK(cm.tn == 383);
  CHECK(cm.fp == 84);
  CHECK(cm.fn == 37);
  CHECK(cm.tp == 190);
  const auto r = basic_rates(cm);
  CHECK(std::abs(*r.sensitivity - 0.8370) <= 1e-4);
  CHECK(std::abs(*r.specificity - 0.8201) <= 1e-4);
  CHECK(*r.accuracy == doctest::Approx(573.0 / 694.0));

  CHECK(std::abs(prf(cm, Averaging::Weighted).f1 - 0.8292) <= 1e-4);
  CHECK(std::abs(prf(cm, Averaging::Macro).recall - 0.8286) <= 2e-4);
  CHECK(std::abs(prf(cm, Averaging::Macro).recall - 0.8285) <= 2e-4);
  // Precision under each convention; none reproduces the reference 0.8356.
  CHECK(std::abs(prf(cm, Averaging::Positive).precision - 0.6934) <= 1e-4);
  CHECK(std::abs(prf(cm, Averaging::Macro).precision - 0.8027) <= 1e-4);
  CHECK(std::abs(prf(cm, Averaging::Weighted).precision - 0.8404) <= 1e-4);

  const auto pc = per_class_prf(cm);
  CHECK(std::abs(pc.negative.f1 - 0.8636) <= 1e-4);
  CHECK(std::abs(pc.positive.f1 - 0.7585) <= 1e-4);
  CHECK(pc.support_negative == 467);
  CHECK(pc.support_positive == 227);
}

TEST_CASE("basic rates: undefined is empty, perfect is one") {
  const auto perfect = basic_rates(ConfusionMatrix{5, 3, 0, 0});
  CHECK(*perfect.sensitivity == 1.0);
  CHECK(*perfect.specificity == 1.0);
  CHECK(*perfect.accuracy == 1.0);
  const auto no_positives = basic_rates(ConfusionMatrix{0, 4, 1, 0});
  CHECK_FALSE(no_positives.sensitivity.has_value());
  CHECK(*no_positives.specificity == 0.8);
  CHECK_FALSE(basic_rates(ConfusionMatrix{}).accuracy.has_value());
}

TEST_CASE("prf conventions and identities") {
  // Single class present: macro keeps only that class, and the flag is set.
  const ConfusionMatrix only_neg{0, 6, 2, 0};
  const auto macro = prf(only_neg, Averaging::Macro);
  const auto pc = per_class_prf(only_neg);
  CHECK(macro.degenerate);
  CHECK(macro.recall == pc.negative.recall);
  CHECK(macro.f1 == pc.negative.f1);
  CHECK(prf(only_neg, Averaging::Positive).degenerate);

  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    ConfusionMatrix cm{1 + rng.index(50), 1 + rng.index(50), rng.index(50), rng.index(50)};
    const auto rates = basic_rates(cm);
    const auto per = per_class_prf(cm);
    CHECK(*rates.sensitivity == doctest::Approx(per.positive.recall));
    CHECK(*rates.specificity == doctest::Approx(per.negative.recall));
    CHECK(prf(cm, Averaging::Weighted).recall == doctest::Approx(*rates.accuracy));
    const double lo = std::min(per.negative.f1, per.positive.f1);
    const double hi = std::max(per.negative.f1, per.positive.f1);
    for (auto a : {Averaging::Positive, Averaging::Macro, Averaging::Weighted}) {
      const auto v = prf(cm, a);
      CHECK(v.f1 >= lo - 1e-12);
      CHECK(v.f1 <= hi + 1e-12);
    }
  }
  CHECK(to_string(Averaging::Weighted) == "weighted");
}

TEST_CASE("roc_auc") {
  CHECK(roc_auc(std::vector<std::uint8_t>{0, 0, 1, 1}, std::vector<double>{0.1, 0.4, 0.35, 0.8}) ==
        0.75);
  CHECK(roc_auc(std::vector<std::uint8_t>{0, 1, 0, 1}, std::vector<double>{0.1, 0.9, 0.2, 0.8}) ==
        1.0);
  CHECK(roc_auc(std::vector<std::uint8_t>{0, 1, 0, 1}, std::vector<double>(4, 0.3)) == 0.5);
  CHECK_THROWS_AS(roc_auc(std::vector<std::uint8_t>{1, 1}, std::vector<double>{0.1, 0.2}),
                  InputError);

  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<std::uint8_t> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::uint8_t>(i < 2 ? i : rng.index(2));
      s[i] = static_cast<double>(rng.index(8)) / 8.0;  // coarse grid forces ties
    }
    const double auc = roc_auc(y, s);
    CHECK(std::abs(auc - brute_force_auc(y, s)) < 1e-12);
    std::vector<double> warped(n);
    std::transform(s.begin(), s.end(), warped.begin(), [](double v) { return std::exp(3 * v) - 7; });
    CHECK(std::abs(roc_auc(y, warped) - auc) < 1e-12);
  }
}

TEST_CASE("report serialization") {
  const auto f = reference_confusion_fixture();
  const auto report = evaluate_scores(f.labels, f.scores);
  std::ostringstream tsv;
  report.write_tsv(tsv);
  CHECK(tsv.str().rfind("metric\tconvention\tvalue\n", 0) == 0);
  CHECK(metric_line(tsv.str(), "sensitivity\t") == "sensitivity\tpositive-class\t0.837004");
  CHECK(metric_line(tsv.str(), "f1\tweighted\t") == "f1\tweighted\t0.829207");
  CHECK(metric_line(tsv.str(), "recall\tmacro\t").substr(0, 19) == "recall\tmacro\t0.8285");
  CHECK(metric_line(tsv.str(), "precision\tpositive\t") == "precision\tpositive\t0.693431");
  CHECK(metric_line(tsv.str(), "roc_auc\t").size() > 8);

  std::ostringstream cm;
  report.write_confusion_tsv(cm);
  CHECK(cm.str() ==
        "\tpredicted_negative\tpredicted_positive\n"
        "actual_negative\t383\t84\n"
        "actual_positive\t37\t190\n");

  std::ostringstream text;
  report.write_text(text);
  CHECK(text.str().find("weighted") != std::string::npos);

  // A single-class test set has no AUC and no sensitivity.
  const std::vector<std::uint8_t> y(5, 0);
  const std::vector<double> s{0.1, 0.2, 0.3, 0.6, 0.9};
  std::ostringstream na;
  evaluate_scores(y, s).write_tsv(na);
  CHECK(metric_line(na.str(), "roc_auc\t") == "roc_auc\t-\tNA");
  CHECK(metric_line(na.str(), "sensitivity\t") == "sensitivity\tpositive-class\tNA");
}

TEST_CASE("evaluate on a model is deterministic") {
  Dataset data;
  data.features = FeatureMatrix::Zero(12, 32);
  Rng rng(13);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) data.features(i, j) = static_cast<float>(rng.uniform());
    data.labels.push_back(static_cast<std::uint8_t>(i % 2));
    data.ids.push_back("r" + std::to_string(i));
  }
  const nn::Model<float> model(32, nn::parse_architecture("conv1d:3:3,maxpool1d:2,lstm:2,dense:1:sigmoid"), 4);
  const auto a = evaluate(model, data);
  const auto b = evaluate(model, data);
  std::ostringstream ta, tb;
  a.write_tsv(ta);
  b.write_tsv(tb);
  CHECK(ta.str() == tb.str());
  CHECK(a.confusion.total() == 12);
  const auto scores = predict_scores(model, data);
  for (double s : scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

}  // TEST_SUITE
