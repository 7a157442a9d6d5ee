#ifndef SPIKESEV_NN_OPTIM_HPP
#define SPIKESEV_NN_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spikesev/nn/model.hpp"

namespace spikesev::nn {

inline constexpr double kProbabilityEpsilon = 1e-7;

/// Binary cross-entropy on a probability clamped to [eps, 1 - eps].
template <typename Scalar>
Scalar bce(Scalar p, int label) {
  const Scalar eps = Scalar(kProbabilityEpsilon);
  const Scalar q = std::clamp(p, eps, Scalar(1) - eps);
  return label == 1 ? -std::log(q) : -std::log(Scalar(1) - q);
}

/// d bce / d p; zero where the clamp is active.
template <typename Scalar>
Scalar bce_grad(Scalar p, int label) {
  const Scalar eps = Scalar(kProbabilityEpsilon);
  if (p < eps || p > Scalar(1) - eps) return Scalar(0);
  return label == 1 ? -Scalar(1) / p : Scalar(1) / (Scalar(1) - p);
}

/// BCE plus lambda times the sum of squared weight-matrix entries.
template <typename Scalar>
Scalar bce_l2_loss(Scalar p, int label, const Model<Scalar>& model, Scalar lambda) {
  return bce(p, label) + lambda * model.weight_sq_sum();
}

/// Adds d(lambda * sum w^2)/dw = 2 lambda w to the weight gradients.
template <typename Scalar>
void add_l2_gradient(Model<Scalar>& model, Scalar lambda) {
  if (lambda == Scalar(0)) return;
  for (auto* p : model.params())
    if (p->regularized) p->grad += Scalar(2) * lambda * p->value;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. Moments are allocated on the first
/// step and must keep matching the parameter shapes afterwards.
template <typename Scalar>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }
  const std::vector<Mat<Scalar>>& first_moments() const { return m_; }
  const std::vector<Mat<Scalar>>& second_moments() const { return v_; }

  /// Used when restoring from a checkpoint.
  void restore(std::uint64_t step, std::vector<Mat<Scalar>> m, std::vector<Mat<Scalar>> v) {
    if (m.size() != v.size()) throw ShapeError("adam: moment list size mismatch");
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  void step(const std::vector<Param<Scalar>*>& params) {
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
      }
    }
    if (m_.size() != params.size()) throw ShapeError("adam: parameter count changed");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto* p = params[i];
      if (p->grad.rows() != m_[i].rows() || p->grad.cols() != m_[i].cols() ||
          p->value.rows() != m_[i].rows() || p->value.cols() != m_[i].cols())
        throw ShapeError("adam: shape mismatch for parameter " + p->name);
    }
    ++step_;
    const Scalar b1 = Scalar(config_.beta1), b2 = Scalar(config_.beta2);
    const Scalar c1 = Scalar(1) - Scalar(std::pow(config_.beta1, static_cast<double>(step_)));
    const Scalar c2 = Scalar(1) - Scalar(std::pow(config_.beta2, static_cast<double>(step_)));
    const Scalar lr = Scalar(config_.learning_rate), eps = Scalar(config_.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto* p = params[i];
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * p->grad;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * p->grad.cwiseAbs2();
      p->value.array() -=
          lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
  }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Mat<Scalar>> m_;
  std::vector<Mat<Scalar>> v_;
};

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, Model<Scalar>& model) {
  state.step(model.params());
}

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_OPTIM_HPP
