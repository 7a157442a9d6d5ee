#ifndef SPIKESEV_NN_GRADCHECK_HPP
#define SPIKESEV_NN_GRADCHECK_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spikesev/nn/model.hpp"

namespace spikesev::nn {

struct TensorCheck {
  std::string name;     // "<layer index>.<LayerType>.<param>"
  std::size_t size = 0;
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double max_abs_diff = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double tolerance = 1e-4;

  bool passed() const;
  double worst() const;
  void write(std::ostream& out) const;
};

/// Central finite differences of bce_l2_loss for every parameter entry.
/// Dropout masks are sampled once and replayed for each perturbation.
GradCheckReport gradient_check(Model<double>& model, const Eigen::VectorXd& input, int label,
                               double lambda, std::uint64_t seed, double step = 1e-5,
                               double tolerance = 1e-4);

/// One of each layer type over a 32-long input.
std::vector<LayerSpec> gradcheck_architecture();
inline constexpr int kGradcheckInputLength = 32;

/// Builds the tiny model from `seed`, checks both labels with lambda 0.001.
GradCheckReport run_gradcheck(std::uint64_t seed);

}  // namespace spikesev::nn

#endif  // SPIKESEV_NN_GRADCHECK_HPP
