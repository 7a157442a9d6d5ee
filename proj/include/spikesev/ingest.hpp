#ifndef SPIKESEV_INGEST_HPP
#define SPIKESEV_INGEST_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spikesev/common.hpp"

namespace spikesev {

/// Thrown for structurally broken FASTA or metadata text.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class SeverityLabel { Mild, Severe, Inconclusive, Unmapped };
enum class Gender { Male, Female };

std::string to_string(SeverityLabel label);
std::string to_string(Gender gender);

// ---------------------------------------------------------------------------
// FASTA

struct FastaRecord {
  std::string id;
  std::string sequence;

  bool operator==(const FastaRecord&) const = default;
};

/// A record dropped by the parser, with the 1-based residue offset of the
/// first offending character (0 when the sequence is empty).
struct FastaIssue {
  std::string id;
  std::size_t offset = 0;
  char residue = '\0';
  std::string message;
};

struct FastaParse {
  std::vector<FastaRecord> records;
  std::vector<FastaIssue> invalid;
};

/// The 20 canonical residues in alphabetical one-letter order.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

bool is_canonical_residue(char c);

/// Parses FASTA text. The record id is the header text up to the first
/// whitespace. Sequence lines are upper-cased and concatenated; any
/// non-canonical residue (including 'X', '-', '*') excludes the record.
FastaParse parse_fasta(std::istream& in);
FastaParse parse_fasta(std::string_view text);

/// Writes records with sequence lines wrapped at `width` residues.
void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records,
                 std::size_t width = 60);

// ---------------------------------------------------------------------------
// Metadata

struct RawMetadataRow {
  std::string accession_id;
  std::string status_text;
  std::optional<int> age;
  std::optional<std::string> gender;
  std::optional<std::string> clade;
  std::optional<std::string> lineage;
  std::optional<std::string> collection_date;
  std::optional<std::string> country;
};

/// Parses a delimited metadata table. Header names are matched after
/// lower-casing and mapping spaces/dashes to '_'. Accepted aliases:
///
///   accession : accession_id, accession, gisaid_epi_isl
///   status    : patient_status, status, clinical_status
///   age       : patient_age, age
///   gender    : gender, sex
///   clade     : clade, gisaid_clade
///   lineage   : lineage, pango_lineage
///   date      : collection_date, date
///   country   : country, location   (optional column)
///
/// Empty cells become absent optionals; an age cell that is not a
/// non-negative integer is treated as absent.
std::vector<RawMetadataRow> parse_metadata(std::istream& in, char delimiter);
std::vector<RawMetadataRow> parse_metadata(std::string_view text,
                                           char delimiter);

// ---------------------------------------------------------------------------
// Clinical status

/// Trim, case-fold and collapse internal whitespace runs to one space.
std::string canonical_status_text(std::string_view text);

/// Maps a free-text clinical status onto the severity classes. Matching is
/// exact on the canonical text; anything unknown is Unmapped.
SeverityLabel normalize_status(std::string_view status_text);

/// The literal status terms recognised by normalize_status.
const std::vector<std::pair<std::string, SeverityLabel>>& status_terms();

// ---------------------------------------------------------------------------
// Cohort

struct SpikeRecord {
  std::string accession_id;
  std::string sequence;
  int age = 0;
  Gender gender = Gender::Male;
  std::string clade;
  std::string lineage;
  std::string collection_date;
  std::string country;
  SeverityLabel label = SeverityLabel::Mild;

  bool operator==(const SpikeRecord&) const = default;
};

/// Exclusion reasons, in the order they are checked.
namespace reason {
inline constexpr std::string_view kMissingSequence = "missing sequence";
inline constexpr std::string_view kInvalidSequence = "invalid sequence";
inline constexpr std::string_view kInconclusive = "inconclusive status";
inline constexpr std::string_view kUnmapped = "unmapped status";
inline constexpr std::string_view kMissingMetadata = "missing metadata";
inline constexpr std::string_view kUnsupportedGender =
    "unsupported gender value";
inline constexpr std::string_view kIncompleteDate = "incomplete collection date";
}  // namespace reason

struct ExclusionReport {
  std::size_t joined = 0;    // metadata rows considered
  std::size_t retained = 0;
  std::map<std::string, std::size_t> excluded;  // reason -> count
  std::size_t unmatched_sequences = 0;  // FASTA records with no metadata row

  std::size_t excluded_total() const;
};

struct Cohort {
  std::vector<SpikeRecord> records;
  ExclusionReport report;
};

/// True for a full YYYY-MM-DD calendar date.
bool is_complete_date(std::string_view text);

/// Joins metadata rows to sequences. A row matches a FASTA record whose id
/// equals the accession or has it as one of its '|'-separated fields.
Cohort build_cohort(const FastaParse& fasta,
                    const std::vector<RawMetadataRow>& metadata);

void write_exclusion_report(std::ostream& out, const ExclusionReport& report);

/// Cohort file: TSV with header
/// accession_id, label, age, gender, clade, lineage, collection_date,
/// country, sequence.
void write_cohort(std::ostream& out, const std::vector<SpikeRecord>& records);
std::vector<SpikeRecord> read_cohort(std::istream& in);

// ---------------------------------------------------------------------------
// Descriptive statistics

struct FrequencyRow {
  std::string name;
  std::size_t count = 0;
};

struct CohortStats {
  std::size_t total = 0;
  std::vector<FrequencyRow> labels;
  std::vector<FrequencyRow> genders;
  std::vector<FrequencyRow> lineages;
  std::vector<FrequencyRow> clades;
  double mean_age = 0.0;
  std::optional<double> mean_age_male;
  std::optional<double> mean_age_female;
};

/// Frequency tables sorted by count (descending), ties by name.
CohortStats cohort_stats(const std::vector<SpikeRecord>& records);

void write_stats(std::ostream& out, const CohortStats& stats);

}  // namespace spikesev

#endif  // SPIKESEV_INGEST_HPP
