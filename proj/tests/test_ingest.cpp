#include <doctest.h>

#include <sstream>

#include "spikesev/ingest.hpp"
#include "spikesev/random.hpp"

using namespace spikesev;

namespace {

const char* kHeader =
    "accession_id\tpatient_status\tage\tgender\tclade\tlineage\tcollection_date\tcountry\n";

std::string row(const std::string& id, const std::string& status, const std::string& age = "50",
                const std::string& gender = "Male", const std::string& date = "2021-03-04") {
  return id + "\t" + status + "\t" + age + "\t" + gender + "\tGR\tP.1\t" + date + "\tBrazil\n";
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("parse_fasta concatenates multi-line records") {
  const auto p = parse_fasta(">a\nMKV\nLL\n");
  REQUIRE(p.records.size() == 1);
  CHECK(p.records[0] == FastaRecord{"a", "MKVLL"});
  CHECK(p.invalid.empty());
}

TEST_CASE("parse_fasta preserves record order") {
  const auto p = parse_fasta(">a\nMKV\n>b\nACD\n");
  REQUIRE(p.records.size() == 2);
  CHECK(p.records[0].id == "a");
  CHECK(p.records[1].id == "b");
  CHECK(p.records[1].sequence == "ACD");
}

TEST_CASE("parse_fasta flags non-canonical residues with their offset") {
  const auto p = parse_fasta(">a\nMKX\n");
  CHECK(p.records.empty());
  REQUIRE(p.invalid.size() == 1);
  CHECK(p.invalid[0].id == "a");
  CHECK(p.invalid[0].offset == 3);
  CHECK(p.invalid[0].residue == 'X');
  for (const char* bad : {">g\nAC-D\n", ">s\nACD*\n"}) {
    const auto q = parse_fasta(bad);
    CHECK(q.records.empty());
    CHECK(q.invalid.size() == 1);
  }
}

TEST_CASE("parse_fasta edge cases") {
  CHECK(parse_fasta("").records.empty());
  // Lowercase and internal whitespace are normalized; the id stops at whitespace.
  const auto p = parse_fasta(">hCoV-19/x|EPI_1 extra words\r\nmk v\n\nll\n");
  REQUIRE(p.records.size() == 1);
  CHECK(p.records[0].id == "hCoV-19/x|EPI_1");
  CHECK(p.records[0].sequence == "MKVLL");
  // A header with no sequence is invalid rather than silently empty.
  CHECK(parse_fasta(">e\n>f\nA\n").invalid.size() == 1);
}

TEST_CASE("parse_fasta reports sequence data before the first header") {
  try {
    parse_fasta("\nMKV\n>a\nA\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write_fasta then parse_fasta is the identity") {
  Rng rng(7);
  std::vector<FastaRecord> records;
  for (int i = 0; i < 25; ++i) {
    FastaRecord r{"id" + std::to_string(i), ""};
    const auto n = 1 + rng.index(200);
    for (std::size_t j = 0; j < n; ++j) r.sequence.push_back(kAminoAcids[rng.index(20)]);
    records.push_back(r);
  }
  std::ostringstream out;
  write_fasta(out, records, 17);
  CHECK(parse_fasta(out.str()).records == records);
}

TEST_CASE("parse_metadata reads a complete row") {
  const auto rows = parse_metadata(std::string(kHeader) + row("A1", "Mild"), '\t');
  REQUIRE(rows.size() == 1);
  const auto& r = rows[0];
  CHECK(r.accession_id == "A1");
  CHECK(r.status_text == "Mild");
  CHECK(r.age == 50);
  CHECK(r.gender == "Male");
  CHECK(r.clade == "GR");
  CHECK(r.lineage == "P.1");
  CHECK(r.collection_date == "2021-03-04");
  CHECK(r.country == "Brazil");
}

TEST_CASE("parse_metadata maps empty cells to absent values") {
  const auto rows = parse_metadata(std::string(kHeader) + row("A1", "Mild", ""), '\t');
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].age.has_value());
}

TEST_CASE("parse_metadata accepts comma-separated files and header aliases") {
  const auto rows = parse_metadata(
      "Accession ID,Patient status,Patient age,Sex,GISAID clade,Pango lineage,Collection date\n"
      "EPI_1,Deceased,71,Female,GK,AY.99.2,2021-06-30\n",
      ',');
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].age == 71);
  CHECK(rows[0].gender == "Female");
  CHECK_FALSE(rows[0].country.has_value());
}

TEST_CASE("parse_metadata rejects duplicate accessions and missing columns") {
  const auto dup = std::string(kHeader) + row("A1", "Mild") + row("A1", "Dead");
  CHECK_THROWS_WITH_AS(parse_metadata(dup, '\t'), doctest::Contains("A1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_metadata("accession_id\tage\tgender\tclade\tlineage\tdate\nA\t1\tm\tc\tl\td\n", '\t'),
                       doctest::Contains("status"), InputError);
}

TEST_CASE("normalize_status maps the reference examples") {
  CHECK(normalize_status("DEAD") == SeverityLabel::Severe);
  CHECK(normalize_status("Asymptomatic") == SeverityLabel::Mild);
  CHECK(normalize_status("Hospitalized") == SeverityLabel::Inconclusive);
  CHECK(normalize_status("recovering at home") == SeverityLabel::Unmapped);
  CHECK(normalize_status("") == SeverityLabel::Unmapped);
}

TEST_CASE("normalize_status is invariant under trimming, case folding and whitespace runs") {
  for (const auto& [term, label] : status_terms()) {
    std::string upper, spaced = "  \t";
    for (char c : term) {
      upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      spaced += c == ' ' ? std::string(" \t ") : std::string(1, c);
    }
    spaced += " \n";
    CHECK(normalize_status(term) == label);
    CHECK(normalize_status(upper) == label);
    CHECK(normalize_status(spaced) == label);
  }
}

TEST_CASE("the status table lists the 31 distinct reference literals") {
  CHECK(status_terms().size() == 31);
  int mild = 0, severe = 0, inconclusive = 0;
  for (const auto& [term, label] : status_terms()) {
    mild += label == SeverityLabel::Mild;
    severe += label == SeverityLabel::Severe;
    inconclusive += label == SeverityLabel::Inconclusive;
  }
  CHECK(mild == 10);
  CHECK(severe == 13);
  CHECK(inconclusive == 8);
}

TEST_CASE("is_complete_date requires a real calendar day") {
  CHECK(is_complete_date("2021-03-04"));
  CHECK(is_complete_date("2020-02-29"));
  CHECK_FALSE(is_complete_date("2021-02-29"));
  CHECK_FALSE(is_complete_date("2021-03"));
  CHECK_FALSE(is_complete_date("2021"));
  CHECK_FALSE(is_complete_date("2021-13-01"));
  CHECK_FALSE(is_complete_date("04/03/2021"));
}

TEST_CASE("build_cohort applies the inclusion filters and accounts for every row") {
  const auto fasta = parse_fasta(">A1\nMKV\n>A2\nMKV\n>A3\nMKV\n>A4\nMKX\n>A5\nMK\n>A6\nMK\n>A7\nMK\n>A8\nAA\n");
  const auto meta = parse_metadata(std::string(kHeader) + row("A1", "Mild") + row("A2", "Live") +
                                       row("A3", "Mild", "") + row("A4", "Dead") +
                                       row("A5", "recovering at home") + row("A6", "Dead", "40", "Other") +
                                       row("A7", "Dead", "40", "female", "2021-03") +
                                       row("A9", "Mild"),
                                   '\t');
  const auto cohort = build_cohort(fasta, meta);
  REQUIRE(cohort.records.size() == 1);
  CHECK(cohort.records[0].accession_id == "A1");
  CHECK(cohort.records[0].label == SeverityLabel::Mild);
  CHECK(cohort.records[0].sequence == "MKV");
  const auto& rep = cohort.report;
  CHECK(rep.excluded.at(std::string(reason::kInconclusive)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kMissingMetadata)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kInvalidSequence)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kUnmapped)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kUnsupportedGender)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kIncompleteDate)) == 1);
  CHECK(rep.excluded.at(std::string(reason::kMissingSequence)) == 1);
  CHECK(rep.retained + rep.excluded_total() == rep.joined);
  CHECK(rep.unmatched_sequences == 1);  // A8
}

TEST_CASE("build_cohort joins on a '|' field of a GISAID-style header") {
  const auto fasta = parse_fasta(">hCoV-19/Brazil/X/2021|EPI_ISL_1|2021-03-04\nMKV\n");
  const auto cohort = build_cohort(fasta, parse_metadata(std::string(kHeader) + row("EPI_ISL_1", "IC"), '\t'));
  REQUIRE(cohort.records.size() == 1);
  CHECK(cohort.records[0].label == SeverityLabel::Severe);
}

TEST_CASE("cohort file round-trips") {
  const auto cohort = build_cohort(parse_fasta(">A1\nMKV\n>A2\nWWY\n"),
                                   parse_metadata(std::string(kHeader) + row("A1", "Mild") +
                                                      row("A2", "Death", "33", "female"),
                                                  '\t'));
  std::stringstream buf;
  write_cohort(buf, cohort.records);
  CHECK(read_cohort(buf) == cohort.records);
}

TEST_CASE("cohort_stats counts, orders and averages") {
  auto rec = [](SeverityLabel l, int age, Gender g, std::string lineage) {
    SpikeRecord r;
    r.label = l;
    r.age = age;
    r.gender = g;
    r.lineage = std::move(lineage);
    r.clade = "GR";
    return r;
  };
  const std::vector<SpikeRecord> records = {rec(SeverityLabel::Mild, 50, Gender::Male, "P.1"),
                                            rec(SeverityLabel::Severe, 58, Gender::Male, "P.1"),
                                            rec(SeverityLabel::Mild, 20, Gender::Female, "P.1")};
  const auto s = cohort_stats(records);
  REQUIRE(s.labels.size() == 2);
  CHECK(s.labels[0].name == "Mild");
  CHECK(s.labels[0].count == 2);
  CHECK(s.labels[1].count == 1);
  CHECK(s.lineages.size() == 1);
  CHECK(s.lineages[0].name == "P.1");
  CHECK(s.lineages[0].count == 3);
  CHECK(*s.mean_age_male == doctest::Approx(54.0));
  std::ostringstream out;
  write_stats(out, s);
  CHECK(out.str().find("mean_age\tmale\t54.00\n") != std::string::npos);
  CHECK_THROWS_WITH(cohort_stats({}), "empty cohort");
}

TEST_CASE("cohort_stats breaks count ties by name") {
  std::vector<SpikeRecord> records(2);
  records[0].lineage = "P.2";
  records[1].lineage = "B.1";
  const auto s = cohort_stats(records);
  CHECK(s.lineages[0].name == "B.1");
  CHECK(s.lineages[1].name == "P.2");
}

}  // TEST_SUITE
