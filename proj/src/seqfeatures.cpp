#include "spikesev/seqfeatures.hpp"

#include <cmath>
#include <string>

#include "spikesev/common.hpp"
#include "spikesev/ingest.hpp"

namespace spikesev {

namespace {

void require_sequence(std::string_view sequence) {
  if (sequence.empty()) throw InputError("empty sequence");
}

int index_of(char residue) {
  const int i = residue_index(residue);
  if (i < 0) throw InputError(std::string("non-canonical residue '") + residue + "'");
  return i;
}

template <typename Fn>
double mean_over(std::string_view sequence, Fn&& value) {
  require_sequence(sequence);
  double sum = 0.0;
  for (char c : sequence) sum += value(c);
  return sum / static_cast<double>(sequence.size());
}

double min_max(const ResidueScale& scale, int i) {
  const double lo = scale.minCoeff();
  const double hi = scale.maxCoeff();
  return hi > lo ? (scale[i] - lo) / (hi - lo) : 0.0;
}

}  // namespace

Eigen::Matrix<double, 20, 1> amino_acid_composition(std::string_view sequence) {
  require_sequence(sequence);
  Eigen::Matrix<double, 20, 1> counts = Eigen::Matrix<double, 20, 1>::Zero();
  for (char c : sequence) counts[index_of(c)] += 1.0;
  return counts / static_cast<double>(sequence.size());
}

double mean_hydrophobicity(std::string_view sequence, const ScalesRegistry& scales) {
  return mean_over(sequence, [&](char c) { return scales.hydrophobicity()[index_of(c)]; });
}

double net_charge(std::string_view sequence, const ScalesRegistry& scales, double ph) {
  require_sequence(sequence);
  if (!(ph > 0.0 && ph < 14.0)) throw InputError("pH must lie in (0, 14)");
  auto positive = [ph](double pka) { return 1.0 / (1.0 + std::pow(10.0, ph - pka)); };
  auto negative = [ph](double pka) { return 1.0 / (1.0 + std::pow(10.0, pka - ph)); };

  double charge = positive(scales.pka_n_term()) - negative(scales.pka_c_term());
  for (char c : sequence) {
    index_of(c);
    const auto pka = scales.pka_side_chain(c);
    if (!pka) continue;
    if (c == 'K' || c == 'R' || c == 'H') charge += positive(*pka);
    else charge -= negative(*pka);
  }
  return charge;
}

Eigen::Vector3d ss_fractions(std::string_view sequence, const ScalesRegistry& scales) {
  require_sequence(sequence);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  const auto& helix = scales.class_set("helix_class");
  const auto& strand = scales.class_set("strand_class");
  const auto& coil = scales.class_set("coil_class");
  for (char c : sequence) {
    index_of(c);
    counts[0] += helix.find(c) != std::string::npos;
    counts[1] += strand.find(c) != std::string::npos;
    counts[2] += coil.find(c) != std::string::npos;
  }
  return counts / static_cast<double>(sequence.size());
}

double weighted_polarity(std::string_view sequence, const ScalesRegistry& scales) {
  return amino_acid_composition(sequence).dot(scales.polarity());
}

double hbond_potential(std::string_view sequence, const ScalesRegistry& scales) {
  const auto& set = scales.class_set("hbond_capable");
  return mean_over(sequence, [&](char c) {
    index_of(c);
    return set.find(c) != std::string::npos ? 1.0 : 0.0;
  });
}

Eigen::Matrix<double, kGlobalWidth, 1> GlobalDescriptors::flatten() const {
  Eigen::Matrix<double, kGlobalWidth, 1> v;
  v << aac, static_cast<double>(length), static_cast<double>(diversity),
      mean_hydrophobicity, net_charge, ss_fractions, polarity, hbond_potential;
  return v;
}

GlobalDescriptors global_descriptors(std::string_view sequence,
                                     const ScalesRegistry& scales) {
  GlobalDescriptors d;
  d.aac = amino_acid_composition(sequence);
  d.length = static_cast<int>(sequence.size());
  d.diversity = static_cast<int>((d.aac.array() > 0.0).count());
  d.mean_hydrophobicity = mean_hydrophobicity(sequence, scales);
  d.net_charge = net_charge(sequence, scales, kPhysiologicalPh);
  d.ss_fractions = ss_fractions(sequence, scales);
  d.polarity = weighted_polarity(sequence, scales);
  d.hbond_potential = hbond_potential(sequence, scales);
  return d;
}

Eigen::Matrix<double, 1, kResidueWidth> residue_row(char residue,
                                                    const ScalesRegistry& scales) {
  const int i = index_of(residue);
  Eigen::Matrix<double, 1, kResidueWidth> row = Eigen::Matrix<double, 1, kResidueWidth>::Zero();
  row[kPolarityNorm] = min_max(scales.polarity(), i);
  row[kPiNorm] = min_max(scales.isoelectric_point(), i);
  row[kHydrophobicityNorm] = min_max(scales.hydrophobicity(), i);
  row[kIsPolar] = scales.in_class("polar", residue);
  row[kIsCharged] = scales.in_class("charged", residue);
  row[kIsAromatic] = scales.in_class("aromatic", residue);
  row[kIsAliphatic] = scales.in_class("aliphatic", residue);
  if (scales.in_class("helix_class", residue)) row[kSsHelix] = 1.0;
  else if (scales.in_class("strand_class", residue)) row[kSsStrand] = 1.0;
  else row[kSsCoil] = 1.0;
  return row;
}

ResidueEncoding residue_encoding(std::string_view sequence, const ScalesRegistry& scales) {
  require_sequence(sequence);
  // Precompute the 20 unweighted rows once.
  Eigen::Matrix<double, 20, kResidueWidth, Eigen::RowMajor> table;
  for (int r = 0; r < 20; ++r)
    table.row(r) = residue_row(kAminoAcids[static_cast<std::size_t>(r)], scales);

  const auto n = static_cast<Eigen::Index>(sequence.size());
  ResidueEncoding enc;
  enc.rows.resize(n, kResidueWidth);
  enc.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index position = i + 1;
    const double w = (position >= kRbdFirst && position <= kRbdLast) ? kRbdWeight : 1.0;
    enc.weights[i] = w;
    enc.rows.row(i) = w * table.row(index_of(sequence[static_cast<std::size_t>(i)]));
  }
  return enc;
}

}  // namespace spikesev
