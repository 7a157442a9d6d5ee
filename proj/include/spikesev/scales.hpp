#ifndef SPIKESEV_SCALES_HPP
#define SPIKESEV_SCALES_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace spikesev {

/// One value per canonical residue, alphabetical order (A, C, D, ..., Y).
using ResidueScale = Eigen::Matrix<double, 20, 1>;

/// Index of a canonical residue in alphabetical order, or -1.
int residue_index(char residue);

/// Immutable per-residue constant tables used by the sequence descriptors.
///
/// The default table is version "scales-v1":
///   hydrophobicity     Kyte & Doolittle (1982)
///   polarity           Hopp & Woods (1981) hydrophilicity
///   isoelectric_point  free amino-acid pI (Lehninger)
///   pKa                Biopython IsoelectricPoint side-chain and terminus
///                      values (N-term 9.0, C-term 2.0)
///   helix/strand/coil  Biopython ProteinAnalysis.secondary_structure_fraction
///                      sets (helix VIYFWL, sheet EMAL, turn NPGS)
///
/// Class sets may overlap. The content hash covers the canonical text form,
/// so it changes whenever any value or set changes.
class ScalesRegistry {
 public:
  static const ScalesRegistry& standard();

  const std::string& version() const { return version_; }
  const ResidueScale& hydrophobicity() const { return hydrophobicity_; }
  const ResidueScale& polarity() const { return polarity_; }
  const ResidueScale& isoelectric_point() const { return isoelectric_point_; }

  /// Side-chain pKa for ionizable residues {C, D, E, H, K, R, Y}.
  std::optional<double> pka_side_chain(char residue) const;
  const std::map<char, double>& pka_side_chains() const { return pka_side_chain_; }
  double pka_n_term() const { return pka_n_term_; }
  double pka_c_term() const { return pka_c_term_; }

  /// Named residue set: polar, charged, aromatic, aliphatic, hbond_capable,
  /// helix_class, strand_class, coil_class.
  const std::string& class_set(std::string_view name) const;
  bool in_class(std::string_view name, char residue) const;
  const std::map<std::string, std::string, std::less<>>& class_sets() const {
    return class_sets_;
  }

  /// FNV-1a 64-bit over the canonical text serialization, as 16 hex digits.
  const std::string& content_hash() const { return hash_; }

  /// Canonical human-readable table. Round-trips through from_text.
  std::string to_text() const;
  static ScalesRegistry from_text(std::string_view text);
  static ScalesRegistry load(const std::string& path);

  /// Returns a copy with one scale entry replaced (for experiments/tests).
  ScalesRegistry with_value(std::string_view scale, char residue, double value) const;

 private:
  ScalesRegistry() = default;
  void validate_and_hash();

  std::string version_;
  ResidueScale hydrophobicity_;
  ResidueScale polarity_;
  ResidueScale isoelectric_point_;
  std::map<char, double> pka_side_chain_;
  double pka_n_term_ = 0.0;
  double pka_c_term_ = 0.0;
  std::map<std::string, std::string, std::less<>> class_sets_;
  std::string hash_;
};

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace spikesev

#endif  // SPIKESEV_SCALES_HPP
