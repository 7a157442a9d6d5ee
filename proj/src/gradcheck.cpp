#include "spikesev/nn/gradcheck.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "spikesev/nn/optim.hpp"
#include "spikesev/text.hpp"

namespace spikesev::nn {

bool GradCheckReport::passed() const {
  return std::all_of(tensors.begin(), tensors.end(),
                     [&](const TensorCheck& t) { return t.relative_error < tolerance; });
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& t : tensors) w = std::max(w, t.relative_error);
  return w;
}

void GradCheckReport::write(std::ostream& out) const {
  out << "tensor\tsize\trelative_error\tmax_abs_diff\tstatus\n";
  for (const auto& t : tensors) {
    char rel[32], diff[32];
    std::snprintf(rel, sizeof rel, "%.3e", t.relative_error);
    std::snprintf(diff, sizeof diff, "%.3e", t.max_abs_diff);
    out << t.name << '\t' << t.size << '\t' << rel << '\t' << diff << '\t'
        << (t.relative_error < tolerance ? "ok" : "FAIL") << '\n';
  }
}

GradCheckReport gradient_check(Model<double>& model, const Eigen::VectorXd& input, int label,
                               double lambda, std::uint64_t seed, double step,
                               double tolerance) {
  Rng rng(seed);
  model.zero_grad();
  const double p = model.forward(input, Mode::Train, rng);
  model.backward(bce_grad(p, label));
  add_l2_gradient(model, lambda);

  auto loss = [&] {
    const double q = model.forward(input, Mode::Replay, rng);
    return bce_l2_loss(q, label, model, lambda);
  };

  GradCheckReport report;
  report.tolerance = tolerance;
  const auto per_layer = model.layer_params();
  for (std::size_t li = 0; li < per_layer.size(); ++li) {
    for (auto* param : per_layer[li]) {
      const Mat<double> analytic = param->grad;
      Mat<double> numeric(analytic.rows(), analytic.cols());
      for (Eigen::Index i = 0; i < param->size(); ++i) {
        double& w = param->value.data()[i];
        const double saved = w;
        w = saved + step;
        const double up = loss();
        w = saved - step;
        const double down = loss();
        w = saved;
        numeric.data()[i] = (up - down) / (2.0 * step);
      }
      TensorCheck check;
      check.name = std::to_string(li) + "." + layer_type_name(model.specs()[li]) + "." + param->name;
      check.size = static_cast<std::size_t>(param->size());
      const double scale = std::max(analytic.norm(), numeric.norm());
      check.relative_error = scale > 0.0 ? (analytic - numeric).norm() / scale : 0.0;
      check.max_abs_diff = (analytic - numeric).cwiseAbs().maxCoeff();
      report.tensors.push_back(std::move(check));
    }
  }
  return report;
}

std::vector<LayerSpec> gradcheck_architecture() {
  return {Conv1DSpec{3, 4}, MaxPool1DSpec{2}, DropoutSpec{0.25}, LstmSpec{4},
          DenseSpec{5, Activation::Relu}, DenseSpec{1, Activation::Sigmoid}};
}

GradCheckReport run_gradcheck(std::uint64_t seed) {
  Model<double> model(kGradcheckInputLength, gradcheck_architecture(), seed);
  Rng rng(seed ^ 0x5eedULL);
  Eigen::VectorXd x(kGradcheckInputLength);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();

  GradCheckReport merged;
  for (int label : {0, 1}) {
    auto r = gradient_check(model, x, label, 1e-3, seed + static_cast<std::uint64_t>(label));
    for (auto& t : r.tensors) {
      t.name += label ? " (y=1)" : " (y=0)";
      merged.tensors.push_back(std::move(t));
    }
    merged.tolerance = r.tolerance;
  }
  return merged;
}

}  // namespace spikesev::nn
