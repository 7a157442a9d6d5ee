#include "spikesev/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "spikesev/text.hpp"

namespace spikesev {

ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const double> scores,
                          double threshold) {
  if (labels.size() != scores.size())
    throw InputError("confusion: " + std::to_string(labels.size()) + " labels vs " +
                     std::to_string(scores.size()) + " scores");
  if (labels.empty()) throw InputError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) predicted ? ++cm.tp : ++cm.fn;
    else predicted ? ++cm.fp : ++cm.tn;
  }
  return cm;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

PrecisionRecallF1 class_prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrecisionRecallF1 r;
  const auto p = ratio(tp, tp + fp);
  const auto q = ratio(tp, tp + fn);
  r.degenerate = !p || !q;
  r.precision = p.value_or(0.0);
  r.recall = q.value_or(0.0);
  const double s = r.precision + r.recall;
  if (s > 0.0) r.f1 = 2.0 * r.precision * r.recall / s;
  else r.degenerate = true;
  return r;
}

}  // namespace

BasicRates basic_rates(const ConfusionMatrix& cm) {
  return {ratio(cm.tp, cm.tp + cm.fn), ratio(cm.tn, cm.tn + cm.fp),
          ratio(cm.tp + cm.tn, cm.total())};
}

std::string to_string(Averaging averaging) {
  switch (averaging) {
    case Averaging::Positive: return "positive";
    case Averaging::Macro: return "macro";
    case Averaging::Weighted: return "weighted";
  }
  return "positive";
}

PerClassPrf per_class_prf(const ConfusionMatrix& cm) {
  PerClassPrf out;
  out.positive = class_prf(cm.tp, cm.fp, cm.fn);
  out.negative = class_prf(cm.tn, cm.fn, cm.fp);
  out.support_positive = cm.tp + cm.fn;
  out.support_negative = cm.tn + cm.fp;
  return out;
}

PrecisionRecallF1 prf(const ConfusionMatrix& cm, Averaging averaging) {
  const auto pc = per_class_prf(cm);
  if (averaging == Averaging::Positive) return pc.positive;

  struct Entry {
    const PrecisionRecallF1* values;
    double weight;
  };
  std::vector<Entry> entries;
  const double n = static_cast<double>(pc.support_negative + pc.support_positive);
  for (const auto& [values, support] : {std::pair{&pc.negative, pc.support_negative},
                                        std::pair{&pc.positive, pc.support_positive}}) {
    if (support == 0 && averaging == Averaging::Macro) continue;
    const double w = averaging == Averaging::Macro ? 1.0 : static_cast<double>(support) / n;
    entries.push_back({values, w});
  }
  PrecisionRecallF1 out;
  double total_weight = 0.0;
  for (const auto& e : entries) {
    out.precision += e.weight * e.values->precision;
    out.recall += e.weight * e.values->recall;
    out.f1 += e.weight * e.values->f1;
    out.degenerate = out.degenerate || e.values->degenerate;
    total_weight += e.weight;
  }
  if (total_weight > 0.0) {
    out.precision /= total_weight;
    out.recall /= total_weight;
    out.f1 /= total_weight;
  }
  out.degenerate = out.degenerate || pc.support_negative == 0 || pc.support_positive == 0;
  return out;
}

double roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InputError("roc_auc: length mismatch");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share their average.
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) {
        rank_sum += avg;
        ++positives;
      }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw InputError("roc_auc: both classes must be present");
  const double np = static_cast<double>(positives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

EvalReport evaluate_scores(std::span<const std::uint8_t> labels, std::span<const double> scores,
                           double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion(labels, scores, threshold);
  r.rates = basic_rates(r.confusion);
  r.positive = prf(r.confusion, Averaging::Positive);
  r.macro = prf(r.confusion, Averaging::Macro);
  r.weighted = prf(r.confusion, Averaging::Weighted);
  const auto has = [&](int c) { return std::find(labels.begin(), labels.end(), c) != labels.end(); };
  if (has(0) && has(1)) r.roc_auc = roc_auc(labels, scores);
  return r;
}

std::vector<double> predict_scores(const nn::Model<float>& model, const Dataset& data) {
  if (data.cols() != model.input_length())
    throw InputError("feature width " + std::to_string(data.cols()) + " != model input length " +
                     std::to_string(model.input_length()));
  std::vector<double> scores(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    scores[static_cast<std::size_t>(i)] = model.predict(data.features.row(i).transpose());
  return scores;
}

EvalReport evaluate(const nn::Model<float>& model, const Dataset& test, double threshold) {
  const auto scores = predict_scores(model, test);
  return evaluate_scores(test.labels, scores, threshold);
}

namespace {

std::string value(const std::optional<double>& v) { return v ? text::fixed(*v, 6) : "NA"; }

}  // namespace

void EvalReport::write_tsv(std::ostream& out) const {
  out << "metric\tconvention\tvalue\n";
  out << "threshold\t-\t" << text::fixed(threshold, 6) << '\n';
  out << "accuracy\t-\t" << value(rates.accuracy) << '\n';
  out << "sensitivity\tpositive-class\t" << value(rates.sensitivity) << '\n';
  out << "specificity\tnegative-class\t" << value(rates.specificity) << '\n';
  const std::pair<const char*, const PrecisionRecallF1*> conventions[] = {
      {"positive", &positive}, {"macro", &macro}, {"weighted", &weighted}};
  for (const char* metric : {"precision", "recall", "f1"})
    for (const auto& [name, v] : conventions) {
      const double x = metric[0] == 'p' ? v->precision : metric[0] == 'r' ? v->recall : v->f1;
      out << metric << '\t' << name << '\t' << text::fixed(x, 6) << '\n';
    }
  out << "roc_auc\t-\t" << value(roc_auc) << '\n';
}

void EvalReport::write_confusion_tsv(std::ostream& out) const {
  out << "\tpredicted_negative\tpredicted_positive\n";
  out << "actual_negative\t" << confusion.tn << '\t' << confusion.fp << '\n';
  out << "actual_positive\t" << confusion.fn << '\t' << confusion.tp << '\n';
}

void EvalReport::write_text(std::ostream& out) const {
  out << "Confusion matrix (positive = Mild = 1), threshold " << text::fixed(threshold, 3) << "\n";
  char row[96];
  std::snprintf(row, sizeof row, "  %-17s%14s  %14s\n", "", "pred. negative", "pred. positive");
  out << row;
  std::snprintf(row, sizeof row, "  %-17s%14zu  %14zu\n", "actual negative", confusion.tn, confusion.fp);
  out << row;
  std::snprintf(row, sizeof row, "  %-17s%14zu  %14zu\n", "actual positive", confusion.fn, confusion.tp);
  out << row;
  out << "\n";
  out << "  accuracy          " << value(rates.accuracy) << '\n';
  out << "  sensitivity       " << value(rates.sensitivity) << "  (positive-class recall)\n";
  out << "  specificity       " << value(rates.specificity) << "  (negative-class recall)\n";
  out << "  roc_auc           " << value(roc_auc) << '\n';
  out << "\n  convention   precision  recall     f1\n";
  const std::pair<const char*, const PrecisionRecallF1*> conventions[] = {
      {"positive", &positive}, {"macro   ", &macro}, {"weighted", &weighted}};
  for (const auto& [name, v] : conventions)
    out << "  " << name << "     " << text::fixed(v->precision, 4) << "     "
        << text::fixed(v->recall, 4) << "     " << text::fixed(v->f1, 4)
        << (v->degenerate ? "  (degenerate: some class value undefined, taken as 0)" : "")
        << '\n';
}

}  // namespace spikesev
