#ifndef SPIKESEV_SYNTHETIC_HPP
#define SPIKESEV_SYNTHETIC_HPP

// Seeded synthetic cohorts with a planted, linearly separable class signal.
// Used by the test suites and by the `synth` CLI subcommand to produce
// shareable fixtures in place of restricted surveillance data.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spikesev/ingest.hpp"

namespace spikesev {

struct SyntheticOptions {
  std::size_t records = 1000;
  double mild_fraction = 0.5;
  int sequence_length = 40;
  /// Probability that a residue is drawn from the class-specific pool
  /// (hydrophobic for Mild, charged for Severe) instead of uniformly.
  double signal = 0.6;
  int min_age = 20;
  int max_age = 80;
  std::uint64_t seed = 0;
};

/// Exactly round(records * mild_fraction) Mild records, the rest Severe,
/// interleaved in a seeded order. Ids are "SYN<n>".
std::vector<SpikeRecord> synthetic_cohort(const SyntheticOptions& options);

/// Writes the cohort as raw inputs: FASTA plus a tab-separated metadata
/// table whose status column uses the reference free-text terms.
void write_synthetic_inputs(const std::vector<SpikeRecord>& records, std::uint64_t seed,
                            std::ostream& fasta, std::ostream& metadata);

}  // namespace spikesev

#endif  // SPIKESEV_SYNTHETIC_HPP
