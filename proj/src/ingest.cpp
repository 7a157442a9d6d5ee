#include "spikesev/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "spikesev/text.hpp"

namespace spikesev {

std::string to_string(SeverityLabel label) {
  switch (label) {
    case SeverityLabel::Mild: return "Mild";
    case SeverityLabel::Severe: return "Severe";
    case SeverityLabel::Inconclusive: return "Inconclusive";
    case SeverityLabel::Unmapped: return "Unmapped";
  }
  return "Unmapped";
}

std::string to_string(Gender gender) {
  return gender == Gender::Male ? "male" : "female";
}

bool is_canonical_residue(char c) {
  return kAminoAcids.find(c) != std::string_view::npos;
}

// ---------------------------------------------------------------------------
// FASTA

namespace {

void finish_record(FastaParse& out, std::string id, std::string seq) {
  if (seq.empty()) {
    out.invalid.push_back({std::move(id), 0, '\0', "empty sequence"});
    return;
  }
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!is_canonical_residue(seq[i])) {
      std::string msg = "invalid residue '";
      msg += seq[i];
      msg += "' at offset " + std::to_string(i + 1);
      out.invalid.push_back({std::move(id), i + 1, seq[i], std::move(msg)});
      return;
    }
  }
  out.records.push_back({std::move(id), std::move(seq)});
}

}  // namespace

FastaParse parse_fasta(std::istream& in) {
  FastaParse out;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::string> id;
  std::string seq;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '>') {
      if (id) finish_record(out, std::move(*id), std::move(seq));
      seq.clear();
      auto header = text::trim(std::string_view(line).substr(1));
      const auto ws = header.find_first_of(" \t");
      id = std::string(header.substr(0, ws));
      continue;
    }
    if (text::trim(line).empty()) continue;
    if (!id) throw ParseError("sequence data before first FASTA header", line_no);
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  if (id) finish_record(out, std::move(*id), std::move(seq));
  return out;
}

FastaParse parse_fasta(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_fasta(in);
}

void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records,
                 std::size_t width) {
  for (const auto& r : records) {
    out << '>' << r.id << '\n';
    for (std::size_t i = 0; i < r.sequence.size(); i += width)
      out << r.sequence.substr(i, width) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Metadata

namespace {

enum class Column { Accession, Status, Age, Gender, Clade, Lineage, Date, Country };

const std::vector<std::pair<std::string, Column>>& header_aliases() {
  static const std::vector<std::pair<std::string, Column>> aliases = {
      {"accession_id", Column::Accession}, {"accession", Column::Accession},
      {"gisaid_epi_isl", Column::Accession}, {"patient_status", Column::Status},
      {"status", Column::Status},         {"clinical_status", Column::Status},
      {"patient_age", Column::Age},       {"age", Column::Age},
      {"gender", Column::Gender},         {"sex", Column::Gender},
      {"clade", Column::Clade},           {"gisaid_clade", Column::Clade},
      {"lineage", Column::Lineage},       {"pango_lineage", Column::Lineage},
      {"collection_date", Column::Date},  {"date", Column::Date},
      {"country", Column::Country},       {"location", Column::Country},
  };
  return aliases;
}

std::string header_key(std::string_view name) {
  std::string key = text::lower(text::trim(name));
  for (char& c : key)
    if (c == ' ' || c == '-') c = '_';
  return key;
}

std::optional<std::string> cell(const std::vector<std::string>& cells,
                                std::optional<std::size_t> index) {
  if (!index || *index >= cells.size()) return std::nullopt;
  auto v = text::trim(cells[*index]);
  if (v.empty()) return std::nullopt;
  return std::string(v);
}

std::optional<int> parse_age(const std::optional<std::string>& s) {
  if (!s || s->size() > 3) return std::nullopt;
  if (!std::all_of(s->begin(), s->end(),
                   [](unsigned char c) { return std::isdigit(c); }))
    return std::nullopt;
  return std::stoi(*s);
}

}  // namespace

std::vector<RawMetadataRow> parse_metadata(std::istream& in, char delimiter) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("metadata is empty", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::map<Column, std::size_t> index;
  const auto headers = text::split(line, delimiter);
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const auto key = header_key(headers[i]);
    for (const auto& [alias, column] : header_aliases())
      if (key == alias && !index.count(column)) index[column] = i;
  }
  const std::pair<Column, const char*> mandatory[] = {
      {Column::Accession, "accession_id"}, {Column::Status, "status"},
      {Column::Age, "age"},                {Column::Gender, "gender"},
      {Column::Clade, "clade"},            {Column::Lineage, "lineage"},
      {Column::Date, "collection_date"}};
  for (const auto& [column, name] : mandatory)
    if (!index.count(column))
      throw ParseError(std::string("missing mandatory column '") + name + "'", 1);

  auto at = [&](Column c) -> std::optional<std::size_t> {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  std::vector<RawMetadataRow> rows;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, delimiter);
    RawMetadataRow row;
    auto accession = cell(cells, at(Column::Accession));
    if (!accession) throw ParseError("empty accession id", line_no);
    if (!seen.insert(*accession).second)
      throw ParseError("duplicate accession id '" + *accession + "'", line_no);
    row.accession_id = *accession;
    row.status_text = cell(cells, at(Column::Status)).value_or("");
    row.age = parse_age(cell(cells, at(Column::Age)));
    row.gender = cell(cells, at(Column::Gender));
    row.clade = cell(cells, at(Column::Clade));
    row.lineage = cell(cells, at(Column::Lineage));
    row.collection_date = cell(cells, at(Column::Date));
    row.country = cell(cells, at(Column::Country));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawMetadataRow> parse_metadata(std::string_view text,
                                           char delimiter) {
  std::istringstream in{std::string(text)};
  return parse_metadata(in, delimiter);
}

// ---------------------------------------------------------------------------
// Clinical status

const std::vector<std::pair<std::string, SeverityLabel>>& status_terms() {
  using L = SeverityLabel;
  static const std::vector<std::pair<std::string, SeverityLabel>> terms = {
      {"not hospitalized", L::Mild},
      {"alive/not hospitalized", L::Mild},
      {"Asymptomatic", L::Mild},
      {"Home", L::Mild},
      {"Not Hospitalized.", L::Mild},
      {"mild symptomatic", L::Mild},
      {"Mild", L::Mild},
      {"Mild symptoms, not-hospitalized", L::Mild},
      {"No clinical signs", L::Mild},
      {"Not hospitalized", L::Mild},
      {"DEAD", L::Severe},
      {"Dead, hospitalized", L::Severe},
      {"Death", L::Severe},
      {"deceased 14/8", L::Severe},
      {"deceased 20/8", L::Severe},
      {"Decease", L::Severe},
      {"Deceased", L::Severe},
      {"Hospitalized (Intensive care unit)", L::Severe},
      {"Hospitalized, Live.", L::Severe},
      {"IC", L::Severe},
      {"Intensive Care", L::Severe},
      {"Intensive Care Unit", L::Severe},
      {"severe symptomatic, required IC", L::Severe},
      {"ALIVE", L::Inconclusive},
      {"Alive, hospitalized", L::Inconclusive},
      {"Emergency Care", L::Inconclusive},
      {"Hospitalized", L::Inconclusive},
      {"Inpatient", L::Inconclusive},
      {"Live", L::Inconclusive},
      {"moderate symptomatic, hospita", L::Inconclusive},
      {"Moderate", L::Inconclusive},
  };
  return terms;
}

std::string canonical_status_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text::trim(text)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

SeverityLabel normalize_status(std::string_view status_text) {
  static const auto table = [] {
    std::unordered_map<std::string, SeverityLabel> m;
    for (const auto& [term, label] : status_terms())
      m.emplace(canonical_status_text(term), label);
    return m;
  }();
  auto it = table.find(canonical_status_text(status_text));
  return it == table.end() ? SeverityLabel::Unmapped : it->second;
}

// ---------------------------------------------------------------------------
// Cohort

std::size_t ExclusionReport::excluded_total() const {
  std::size_t n = 0;
  for (const auto& [_, count] : excluded) n += count;
  return n;
}

bool is_complete_date(std::string_view s) {
  s = text::trim(s);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int y = std::stoi(std::string(s.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                     std::chrono::day{d}}
      .ok();
}

Cohort build_cohort(const FastaParse& fasta,
                    const std::vector<RawMetadataRow>& metadata) {
  // Index every sequence under its full id and each '|' field.
  std::unordered_map<std::string, std::size_t> valid;
  std::unordered_map<std::string, std::size_t> invalid;
  auto index_id = [](auto& map, const std::string& id, std::size_t i) {
    map.emplace(id, i);
    for (const auto& field : text::split(id, '|'))
      if (!field.empty()) map.emplace(field, i);
  };
  for (std::size_t i = 0; i < fasta.records.size(); ++i)
    index_id(valid, fasta.records[i].id, i);
  for (std::size_t i = 0; i < fasta.invalid.size(); ++i)
    index_id(invalid, fasta.invalid[i].id, i);

  Cohort cohort;
  auto& report = cohort.report;
  std::set<std::size_t> used;
  auto reject = [&](std::string_view why) { ++report.excluded[std::string(why)]; };

  for (const auto& row : metadata) {
    ++report.joined;
    auto seq_it = valid.find(row.accession_id);
    if (seq_it == valid.end()) {
      reject(invalid.count(row.accession_id) ? reason::kInvalidSequence
                                             : reason::kMissingSequence);
      continue;
    }
    used.insert(seq_it->second);
    const auto label = normalize_status(row.status_text);
    if (label == SeverityLabel::Inconclusive) { reject(reason::kInconclusive); continue; }
    if (label == SeverityLabel::Unmapped) { reject(reason::kUnmapped); continue; }
    if (!row.age || !row.gender || !row.clade || !row.lineage || !row.collection_date) {
      reject(reason::kMissingMetadata);
      continue;
    }
    const auto gender = text::lower(*row.gender);
    if (gender != "male" && gender != "female") {
      reject(reason::kUnsupportedGender);
      continue;
    }
    if (!is_complete_date(*row.collection_date)) {
      reject(reason::kIncompleteDate);
      continue;
    }
    SpikeRecord rec;
    rec.accession_id = row.accession_id;
    rec.sequence = fasta.records[seq_it->second].sequence;
    rec.age = *row.age;
    rec.gender = gender == "male" ? Gender::Male : Gender::Female;
    rec.clade = *row.clade;
    rec.lineage = *row.lineage;
    rec.collection_date = std::string(text::trim(*row.collection_date));
    rec.country = row.country.value_or("");
    rec.label = label;
    cohort.records.push_back(std::move(rec));
    ++report.retained;
  }
  report.unmatched_sequences = fasta.records.size() - used.size();
  return cohort;
}

void write_exclusion_report(std::ostream& out, const ExclusionReport& report) {
  out << "item\tcount\n";
  out << "joined\t" << report.joined << '\n';
  out << "retained\t" << report.retained << '\n';
  for (const auto& [why, count] : report.excluded)
    out << "excluded:" << why << '\t' << count << '\n';
  out << "unmatched_sequences\t" << report.unmatched_sequences << '\n';
}

namespace {
constexpr const char* kCohortHeader =
    "accession_id\tlabel\tage\tgender\tclade\tlineage\tcollection_date\tcountry\tsequence";
}

void write_cohort(std::ostream& out, const std::vector<SpikeRecord>& records) {
  out << kCohortHeader << '\n';
  for (const auto& r : records)
    out << r.accession_id << '\t' << to_string(r.label) << '\t' << r.age << '\t'
        << to_string(r.gender) << '\t' << r.clade << '\t' << r.lineage << '\t'
        << r.collection_date << '\t' << r.country << '\t' << r.sequence << '\n';
}

std::vector<SpikeRecord> read_cohort(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || text::trim(line) != kCohortHeader)
    throw ParseError("not a cohort file (unexpected header)", 1);
  std::vector<SpikeRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = text::split(line, '\t');
    if (c.size() != 9) throw ParseError("expected 9 columns", line_no);
    SpikeRecord r;
    r.accession_id = c[0];
    if (c[1] == "Mild") r.label = SeverityLabel::Mild;
    else if (c[1] == "Severe") r.label = SeverityLabel::Severe;
    else throw ParseError("label must be Mild or Severe", line_no);
    r.age = static_cast<int>(text::parse_int(c[2], "age"));
    if (c[3] == "male") r.gender = Gender::Male;
    else if (c[3] == "female") r.gender = Gender::Female;
    else throw ParseError("gender must be male or female", line_no);
    r.clade = c[4];
    r.lineage = c[5];
    r.collection_date = c[6];
    r.country = c[7];
    r.sequence = c[8];
    if (r.sequence.empty() ||
        !std::all_of(r.sequence.begin(), r.sequence.end(), is_canonical_residue))
      throw ParseError("non-canonical sequence for '" + r.accession_id + "'", line_no);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Descriptive statistics

namespace {

std::vector<FrequencyRow> ranked(const std::map<std::string, std::size_t>& counts) {
  std::vector<FrequencyRow> rows;
  for (const auto& [name, count] : counts) rows.push_back({name, count});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return a.name < b.name;
                   });
  return rows;
}

}  // namespace

CohortStats cohort_stats(const std::vector<SpikeRecord>& records) {
  if (records.empty()) throw InputError("empty cohort");
  std::map<std::string, std::size_t> labels, genders, lineages, clades;
  double age_sum = 0, male_sum = 0, female_sum = 0;
  std::size_t males = 0, females = 0;
  for (const auto& r : records) {
    ++labels[to_string(r.label)];
    ++genders[to_string(r.gender)];
    ++lineages[r.lineage];
    ++clades[r.clade];
    age_sum += r.age;
    if (r.gender == Gender::Male) { male_sum += r.age; ++males; }
    else { female_sum += r.age; ++females; }
  }
  CohortStats s;
  s.total = records.size();
  s.labels = ranked(labels);
  s.genders = ranked(genders);
  s.lineages = ranked(lineages);
  s.clades = ranked(clades);
  s.mean_age = age_sum / static_cast<double>(records.size());
  if (males) s.mean_age_male = male_sum / static_cast<double>(males);
  if (females) s.mean_age_female = female_sum / static_cast<double>(females);
  return s;
}

void write_stats(std::ostream& out, const CohortStats& s) {
  out << "table\tname\tcount\n";
  out << "total\tall\t" << s.total << '\n';
  auto table = [&](const char* name, const std::vector<FrequencyRow>& rows) {
    for (const auto& r : rows) out << name << '\t' << r.name << '\t' << r.count << '\n';
  };
  table("label", s.labels);
  table("gender", s.genders);
  table("lineage", s.lineages);
  table("clade", s.clades);
  out << "mean_age\tall\t" << text::fixed(s.mean_age, 2) << '\n';
  if (s.mean_age_male) out << "mean_age\tmale\t" << text::fixed(*s.mean_age_male, 2) << '\n';
  if (s.mean_age_female)
    out << "mean_age\tfemale\t" << text::fixed(*s.mean_age_female, 2) << '\n';
}

}  // namespace spikesev
