#ifndef SPIKESEV_SEQFEATURES_HPP
#define SPIKESEV_SEQFEATURES_HPP

#include <string_view>

#include <Eigen/Core>

#include "spikesev/scales.hpp"

namespace spikesev {

/// Number of values in the flattened global descriptor block.
inline constexpr int kGlobalWidth = 29;
/// Columns per residue row in the per-residue encoding.
inline constexpr int kResidueWidth = 10;

/// Receptor-binding domain, 1-based inclusive positions, and its row weight.
inline constexpr int kRbdFirst = 319;
inline constexpr int kRbdLast = 541;
inline constexpr double kRbdWeight = 5.0;

inline constexpr double kPhysiologicalPh = 7.4;

Eigen::Matrix<double, 20, 1> amino_acid_composition(std::string_view sequence);
double mean_hydrophobicity(std::string_view sequence, const ScalesRegistry& scales);

/// Henderson-Hasselbalch net charge including one N- and one C-terminus.
double net_charge(std::string_view sequence, const ScalesRegistry& scales,
                  double ph = kPhysiologicalPh);

/// (helix, strand, coil) membership fractions. Sets may overlap so the sum
/// is unconstrained.
Eigen::Vector3d ss_fractions(std::string_view sequence, const ScalesRegistry& scales);

double weighted_polarity(std::string_view sequence, const ScalesRegistry& scales);
double hbond_potential(std::string_view sequence, const ScalesRegistry& scales);

struct GlobalDescriptors {
  Eigen::Matrix<double, 20, 1> aac;
  int length = 0;
  int diversity = 0;
  double mean_hydrophobicity = 0.0;
  double net_charge = 0.0;
  Eigen::Vector3d ss_fractions;
  double polarity = 0.0;
  double hbond_potential = 0.0;

  /// [aac(20), length, diversity, mean_hydro, net_charge, ss(3), polarity, hbond]
  Eigen::Matrix<double, kGlobalWidth, 1> flatten() const;
};

GlobalDescriptors global_descriptors(std::string_view sequence,
                                     const ScalesRegistry& scales);

/// Column order of a residue row.
enum ResidueColumn : int {
  kPolarityNorm = 0,
  kPiNorm,
  kHydrophobicityNorm,
  kIsPolar,
  kIsCharged,
  kIsAromatic,
  kIsAliphatic,
  kSsHelix,
  kSsStrand,
  kSsCoil,
};

using ResidueRows = Eigen::Matrix<double, Eigen::Dynamic, kResidueWidth, Eigen::RowMajor>;

struct ResidueEncoding {
  ResidueRows rows;          // already multiplied by weights
  Eigen::VectorXd weights;   // 5 inside the RBD window, 1 elsewhere
};

/// Unweighted 10-column row for a single residue. The structure class is
/// the first of helix, strand, coil whose set contains the residue; residues
/// in none of the sets are coil.
Eigen::Matrix<double, 1, kResidueWidth> residue_row(char residue,
                                                    const ScalesRegistry& scales);

ResidueEncoding residue_encoding(std::string_view sequence, const ScalesRegistry& scales);

}  // namespace spikesev

#endif  // SPIKESEV_SEQFEATURES_HPP
