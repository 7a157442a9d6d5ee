#include "spikesev/scales.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spikesev/common.hpp"
#include "spikesev/ingest.hpp"
#include "spikesev/text.hpp"

namespace spikesev {

int residue_index(char residue) {
  const auto pos = kAminoAcids.find(residue);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

const char* const kRequiredSets[] = {"polar",       "charged",      "aromatic",
                                     "aliphatic",   "hbond_capable", "helix_class",
                                     "strand_class", "coil_class"};

std::string sorted_residues(std::string s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

const ScalesRegistry& ScalesRegistry::standard() {
  static const ScalesRegistry registry = [] {
    ScalesRegistry r;
    r.version_ = "scales-v1";
    //                     A     C     D     E     F     G     H     I     K     L
    //                     M     N     P     Q     R     S     T     V     W     Y
    r.hydrophobicity_ << 1.8, 2.5, -3.5, -3.5, 2.8, -0.4, -3.2, 4.5, -3.9, 3.8,
                         1.9, -3.5, -1.6, -3.5, -4.5, -0.8, -0.7, 4.2, -0.9, -1.3;
    r.polarity_ << -0.5, -1.0, 3.0, 3.0, -2.5, 0.0, -0.5, -1.8, 3.0, -1.8,
                   -1.3, 0.2, 0.0, 0.2, 3.0, 0.3, -0.4, -1.5, -3.4, -2.3;
    r.isoelectric_point_ << 6.00, 5.07, 2.77, 3.22, 5.48, 5.97, 7.59, 6.02, 9.74, 5.98,
                            5.74, 5.41, 6.30, 5.65, 10.76, 5.68, 5.60, 5.96, 5.89, 5.66;
    r.pka_side_chain_ = {{'C', 9.0}, {'D', 4.05}, {'E', 4.45}, {'H', 5.98},
                         {'K', 10.0}, {'R', 12.0}, {'Y', 10.0}};
    r.pka_n_term_ = 9.0;
    r.pka_c_term_ = 2.0;
    r.class_sets_ = {
        {"polar", "CNQSTY"},        {"charged", "DEHKR"},
        {"aromatic", "FHWY"},       {"aliphatic", "AILV"},
        {"hbond_capable", "HNQSTY"}, {"helix_class", "FILVWY"},
        {"strand_class", "AELM"},   {"coil_class", "GNPS"},
    };
    r.validate_and_hash();
    return r;
  }();
  return registry;
}

std::optional<double> ScalesRegistry::pka_side_chain(char residue) const {
  auto it = pka_side_chain_.find(residue);
  if (it == pka_side_chain_.end()) return std::nullopt;
  return it->second;
}

const std::string& ScalesRegistry::class_set(std::string_view name) const {
  auto it = class_sets_.find(name);
  if (it == class_sets_.end())
    throw InputError("unknown residue class set '" + std::string(name) + "'");
  return it->second;
}

bool ScalesRegistry::in_class(std::string_view name, char residue) const {
  return class_set(name).find(residue) != std::string::npos;
}

void ScalesRegistry::validate_and_hash() {
  for (const char* name : kRequiredSets)
    if (!class_sets_.count(std::string_view(name)))
      throw InputError(std::string("scales: missing class set '") + name + "'");
  for (auto& [name, set] : class_sets_) {
    set = sorted_residues(set);
    for (char c : set)
      if (residue_index(c) < 0)
        throw InputError("scales: non-canonical residue in set '" + name + "'");
  }
  for (const auto& [res, _] : pka_side_chain_)
    if (residue_index(res) < 0) throw InputError("scales: bad pKa residue");
  hash_ = fnv1a64_hex(to_text());
}

std::string ScalesRegistry::to_text() const {
  std::ostringstream out;
  out << "# residue scales table\n";
  out << "version\t" << version_ << '\n';
  out << "# residue\thydrophobicity\tpolarity\tisoelectric_point\n";
  for (int i = 0; i < 20; ++i)
    out << "residue\t" << kAminoAcids[static_cast<std::size_t>(i)] << '\t'
        << text::exact(hydrophobicity_[i]) << '\t' << text::exact(polarity_[i])
        << '\t' << text::exact(isoelectric_point_[i]) << '\n';
  for (const auto& [res, pka] : pka_side_chain_)
    out << "pka\t" << res << '\t' << text::exact(pka) << '\n';
  out << "pka_n_term\t" << text::exact(pka_n_term_) << '\n';
  out << "pka_c_term\t" << text::exact(pka_c_term_) << '\n';
  for (const auto& [name, set] : class_sets_)
    out << "class\t" << name << '\t' << set << '\n';
  return out.str();
}

ScalesRegistry ScalesRegistry::from_text(std::string_view text) {
  ScalesRegistry r;
  std::array<bool, 20> seen{};
  bool n_term = false, c_term = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f[0] == "version" && f.size() == 2) {
      r.version_ = f[1];
    } else if (f[0] == "residue" && f.size() == 5 && f[1].size() == 1) {
      const int i = residue_index(f[1][0]);
      if (i < 0) throw InputError("scales: bad residue '" + f[1] + "'");
      r.hydrophobicity_[i] = text::parse_double(f[2], "hydrophobicity");
      r.polarity_[i] = text::parse_double(f[3], "polarity");
      r.isoelectric_point_[i] = text::parse_double(f[4], "isoelectric_point");
      seen[static_cast<std::size_t>(i)] = true;
    } else if (f[0] == "pka" && f.size() == 3 && f[1].size() == 1) {
      r.pka_side_chain_[f[1][0]] = text::parse_double(f[2], "pka");
    } else if (f[0] == "pka_n_term" && f.size() == 2) {
      r.pka_n_term_ = text::parse_double(f[1], "pka_n_term");
      n_term = true;
    } else if (f[0] == "pka_c_term" && f.size() == 2) {
      r.pka_c_term_ = text::parse_double(f[1], "pka_c_term");
      c_term = true;
    } else if (f[0] == "class" && f.size() == 3) {
      r.class_sets_[f[1]] = f[2];
    } else {
      throw InputError("scales: unrecognised line '" + line + "'");
    }
  }
  if (r.version_.empty()) throw InputError("scales: missing version");
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw InputError("scales: every residue needs a scale row");
  if (!n_term || !c_term) throw InputError("scales: missing terminus pKa");
  r.validate_and_hash();
  return r;
}

ScalesRegistry ScalesRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scales file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

ScalesRegistry ScalesRegistry::with_value(std::string_view scale, char residue,
                                          double value) const {
  ScalesRegistry r = *this;
  const int i = residue_index(residue);
  if (i < 0) throw InputError("with_value: bad residue");
  if (scale == "hydrophobicity") r.hydrophobicity_[i] = value;
  else if (scale == "polarity") r.polarity_[i] = value;
  else if (scale == "isoelectric_point") r.isoelectric_point_[i] = value;
  else throw InputError("with_value: unknown scale '" + std::string(scale) + "'");
  r.validate_and_hash();
  return r;
}

}  // namespace spikesev
