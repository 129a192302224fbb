#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occmarkov/posterior.hpp"
#include "occmarkov/sampler.hpp"
#include "occmarkov/simulate.hpp"
#include "occmarkov/types.hpp"

namespace occmarkov {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, int line);
long parse_long(std::string_view text, int line);

struct DatasetParseOptions {
  std::string quadrat;       // empty: the file must hold a single quadrat
  long merge_threshold = 0;  // >0: states with fewer total records fold into
                             // one trailing "other" class
};

struct ParsedDataset {
  ObservationSet observations;
  SiteFrame frame;
  StateSpace states;           // labels carry the original state codes
  std::string quadrat;
  std::vector<long> site_ids;  // dense site index - 1 -> original id
};

ParsedDataset parse_dataset_text(const std::string& text,
                                 const DatasetParseOptions& options = {});
ParsedDataset parse_dataset(const std::string& path,
                            const DatasetParseOptions& options = {});

// Canonical long-format dataset: one row per record, one empty-state row for
// each never-surveyed cell, periods outermost. Writing then parsing then
// writing again reproduces the bytes.
std::string format_dataset(const ObservationSet& data, const SiteFrame& frame,
                           const std::string& quadrat = "Q1");
void write_dataset(const std::string& path, const ObservationSet& data,
                   const SiteFrame& frame, const std::string& quadrat = "Q1");

// Simulation truth sidecar.
struct TruthRecord {
  TransitionMatrix transition;
  Vector phi;
  double error_rate = 0.0;
  std::optional<BandwidthMatrix> bandwidth;
  IntMatrix z;  // may be 0 x 0 when withheld
  std::uint64_t seed = 0;
  int replicate_index = 0;
};

std::string format_truth(const TruthRecord& truth);
void write_truth(const std::string& path, const TruthRecord& truth);
TruthRecord parse_truth_text(const std::string& text);
TruthRecord read_truth(const std::string& path);

// Retained draws, one row each: chain, iteration, P row-major, e, phi, and
// for spatial fits sigma1, sigma2, rho.
std::string format_draws(const PosteriorDraws& draws);
void write_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws parse_draws_text(const std::string& text);
PosteriorDraws read_draws(const std::string& path);

std::string format_summary(const SummaryReport& report);
void write_summary(const std::string& path, const SummaryReport& report);

std::string format_acceptance(const PosteriorDraws& draws);
void write_acceptance(const std::string& path, const PosteriorDraws& draws);

std::string format_rhat_table(const SummaryReport& report);
void write_rhat_table(const std::string& path, const SummaryReport& report);

// Long-format trace table (chain, iteration, param, value) for plotting.
std::string format_traces(const PosteriorDraws& draws);
void write_traces(const std::string& path, const PosteriorDraws& draws);

// Flat sectioned key-value config text: [section] headers, key = value lines,
// '#' comments. Keys are unique per section.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const std::string* find(const std::string& section,
                          const std::string& key) const;
};

IniFile parse_ini_text(const std::string& text);
IniFile parse_ini(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::vector<double> parse_double_list(std::string_view text, int line = 0);

}  // namespace occmarkov
