#include "spikesev/synthetic.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "spikesev/random.hpp"

namespace spikesev {

namespace {

constexpr std::string_view kMildPool = "AILVFM";
constexpr std::string_view kSeverePool = "DEKRNQ";
const char* const kClades[] = {"GK", "GR", "GH", "G"};
const char* const kLineages[] = {"P.1", "AY.99.2", "AY.43.3", "B.1.1.33", "B.1.1.28", "P.2"};

}  // namespace

std::vector<SpikeRecord> synthetic_cohort(const SyntheticOptions& o) {
  Rng rng(o.seed);
  const auto n_mild = static_cast<std::size_t>(std::llround(o.mild_fraction * static_cast<double>(o.records)));
  std::vector<SeverityLabel> labels(o.records, SeverityLabel::Severe);
  for (std::size_t i = 0; i < n_mild && i < o.records; ++i) labels[i] = SeverityLabel::Mild;
  rng.shuffle(labels);

  std::vector<SpikeRecord> out;
  out.reserve(o.records);
  for (std::size_t i = 0; i < o.records; ++i) {
    SpikeRecord r;
    r.accession_id = "SYN" + std::to_string(i + 1);
    r.label = labels[i];
    const auto pool = r.label == SeverityLabel::Mild ? kMildPool : kSeverePool;
    for (int j = 0; j < o.sequence_length; ++j)
      r.sequence.push_back(rng.uniform() < o.signal ? pool[rng.index(pool.size())]
                                                    : kAminoAcids[rng.index(kAminoAcids.size())]);
    r.age = o.min_age + static_cast<int>(rng.index(static_cast<std::size_t>(o.max_age - o.min_age + 1)));
    r.gender = rng.index(2) ? Gender::Female : Gender::Male;
    r.clade = kClades[rng.index(std::size(kClades))];
    r.lineage = kLineages[rng.index(std::size(kLineages))];
    const int month = 1 + static_cast<int>(rng.index(12));
    const int day = 1 + static_cast<int>(rng.index(28));
    char date[16];
    std::snprintf(date, sizeof date, "2021-%02d-%02d", month, day);
    r.collection_date = date;
    r.country = "Brazil";
    out.push_back(std::move(r));
  }
  return out;
}

void write_synthetic_inputs(const std::vector<SpikeRecord>& records, std::uint64_t seed,
                            std::ostream& fasta, std::ostream& metadata) {
  Rng rng(seed);
  std::vector<std::string> mild, severe;
  for (const auto& [term, label] : status_terms()) {
    if (label == SeverityLabel::Mild) mild.push_back(term);
    if (label == SeverityLabel::Severe) severe.push_back(term);
  }
  std::vector<FastaRecord> fa;
  metadata << "Accession ID\tPatient status\tPatient age\tGender\tClade\tLineage\t"
              "Collection date\tLocation\n";
  for (const auto& r : records) {
    fa.push_back({r.accession_id, r.sequence});
    const auto& terms = r.label == SeverityLabel::Mild ? mild : severe;
    metadata << r.accession_id << '\t' << terms[rng.index(terms.size())] << '\t' << r.age << '\t'
             << (r.gender == Gender::Male ? "Male" : "Female") << '\t' << r.clade << '\t'
             << r.lineage << '\t' << r.collection_date << '\t' << r.country << '\n';
  }
  write_fasta(fasta, fa);
}

}  // namespace spikesev
