#include "occmarkov/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace occmarkov {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  if (line > 0)
    fail(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
  fail(Errc::ParseError, what);
}

bool is_missing(std::string_view field) {
  return field.empty() || field == "NA";
}

// Walks lines of a text blob, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(const std::string& text) : text_(text) {}

  bool next(std::string_view& line, int& number) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    line = std::string_view(text_).substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    number = ++count_;
    return true;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int count_ = 0;
};

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, int line) {
  text = trim(text);
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    parse_fail(line, "bad number '" + std::string(text) + "'");
  return value;
}

long parse_long(std::string_view text, int line) {
  text = trim(text);
  long value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    parse_fail(line, "bad integer '" + std::string(text) + "'");
  return value;
}

std::vector<double> parse_double_list(std::string_view text, int line) {
  std::vector<double> values;
  if (trim(text).empty()) return values;
  for (auto field : split(text, ','))
    values.push_back(parse_double(field, line));
  return values;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(Errc::IoFailure, "cannot read " + path);
  return std::move(buf).str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoFailure, "cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::IoFailure, "cannot write " + path);
}

namespace {

constexpr const char* kDatasetHeader = "quadrat,site,x,y,t,replicate,state";

struct RawRow {
  long site = 0;
  int t = 0;
  long replicate = 0;
  long state = 0;  // 0 = missing survey
  int line = 0;
};

}  // namespace

ParsedDataset parse_dataset_text(const std::string& text,
                                 const DatasetParseOptions& options) {
  LineReader reader(text);
  std::string_view line;
  int lineno = 0;
  bool saw_header = false;
  std::string quadrat = options.quadrat;
  bool quadrat_fixed = !options.quadrat.empty();

  std::map<long, std::pair<double, double>> coords;  // site id -> position
  std::map<std::tuple<std::string, long, int, long>, int> seen;
  std::vector<RawRow> rows;
  int T = 0;

  while (reader.next(line, lineno)) {
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    if (!saw_header) {
      if (stripped != kDatasetHeader)
        parse_fail(lineno, std::string("expected header '") + kDatasetHeader +
                               "', got '" + std::string(stripped) + "'");
      saw_header = true;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 7)
      parse_fail(lineno, "expected 7 fields, got " +
                             std::to_string(fields.size()));

    std::string q(trim(fields[0]));
    if (q.empty()) parse_fail(lineno, "empty quadrat label");
    if (quadrat_fixed) {
      if (q != options.quadrat) continue;
    } else if (quadrat.empty()) {
      quadrat = q;
    } else if (q != quadrat) {
      parse_fail(lineno,
                 "file holds multiple quadrats ('" + quadrat + "', '" + q +
                     "'); select one");
    }

    RawRow row;
    row.line = lineno;
    row.site = parse_long(fields[1], lineno);
    row.t = static_cast<int>(parse_long(fields[4], lineno));
    row.replicate = parse_long(fields[5], lineno);
    if (row.t < 1) parse_fail(lineno, "period must be >= 1");
    if (row.replicate < 1) parse_fail(lineno, "replicate must be >= 1");

    auto xsv = trim(fields[2]), ysv = trim(fields[3]);
    auto it = coords.find(row.site);
    if (is_missing(xsv) || is_missing(ysv)) {
      if (it == coords.end())
        fail(Errc::UnknownSite, "line " + std::to_string(lineno) + ": site " +
                                    std::to_string(row.site) +
                                    " has no declared coordinates");
    } else {
      double x = parse_double(xsv, lineno), y = parse_double(ysv, lineno);
      if (it == coords.end()) {
        coords.emplace(row.site, std::make_pair(x, y));
      } else if (it->second.first != x || it->second.second != y) {
        parse_fail(lineno, "site " + std::to_string(row.site) +
                               " re-declared at a different position");
      }
    }

    auto key = std::make_tuple(q, row.site, row.t, row.replicate);
    auto [slot, inserted] = seen.emplace(key, lineno);
    if (!inserted)
      fail(Errc::DuplicateRecord,
           "line " + std::to_string(lineno) + ": duplicate survey for site " +
               std::to_string(row.site) + ", period " + std::to_string(row.t) +
               ", replicate " + std::to_string(row.replicate) +
               " (first at line " + std::to_string(slot->second) + ")");

    auto ssv = trim(fields[6]);
    if (!is_missing(ssv)) {
      row.state = parse_long(ssv, lineno);
      if (row.state < 1) parse_fail(lineno, "state codes must be >= 1");
    }
    T = std::max(T, row.t);
    rows.push_back(row);
  }
  if (!saw_header) fail(Errc::ParseError, "missing dataset header");
  if (rows.empty()) fail(Errc::EmptyData, "no survey rows");

  // Dense site indices in ascending id order.
  std::map<long, int> site_index;
  for (const auto& [id, xy] : coords)
    site_index.emplace(id, static_cast<int>(site_index.size()) + 1);
  const int I = static_cast<int>(site_index.size());

  // Dense state codes, rare classes folded into a trailing "other" slot.
  std::map<long, long> state_count;
  for (const auto& row : rows)
    if (row.state > 0) state_count[row.state] += 1;
  if (state_count.empty()) fail(Errc::EmptyData, "no recorded states");

  std::map<long, int> state_index;
  std::vector<std::string> labels;
  bool merged = false;
  for (const auto& [code, count] : state_count) {
    if (options.merge_threshold > 0 && count < options.merge_threshold) {
      merged = true;
      continue;
    }
    state_index.emplace(code, static_cast<int>(state_index.size()) + 1);
    labels.push_back(std::to_string(code));
  }
  if (merged) {
    int other = static_cast<int>(state_index.size()) + 1;
    for (const auto& [code, count] : state_count)
      if (!state_index.count(code)) state_index.emplace(code, other);
    labels.push_back("other");
  }
  const int S = static_cast<int>(labels.size());

  std::sort(rows.begin(), rows.end(), [&](const RawRow& a, const RawRow& b) {
    return std::make_tuple(a.t, site_index.at(a.site), a.replicate) <
           std::make_tuple(b.t, site_index.at(b.site), b.replicate);
  });

  ObservationBuilder builder(I, T, S);
  for (const auto& row : rows)
    if (row.state > 0)
      builder.add(site_index.at(row.site), row.t, state_index.at(row.state));

  ParsedDataset out;
  out.observations = builder.build();
  CoordTable table(I, 2);
  out.site_ids.reserve(static_cast<std::size_t>(I));
  for (const auto& [id, idx] : site_index) {
    table(idx - 1, 0) = coords.at(id).first;
    table(idx - 1, 1) = coords.at(id).second;
    out.site_ids.push_back(id);
  }
  out.frame = make_site_frame(std::move(table));
  out.states = make_state_space(S, std::move(labels));
  out.quadrat = quadrat;
  return out;
}

ParsedDataset parse_dataset(const std::string& path,
                            const DatasetParseOptions& options) {
  return parse_dataset_text(read_text_file(path), options);
}

std::string format_dataset(const ObservationSet& data, const SiteFrame& frame,
                           const std::string& quadrat) {
  if (data.I != frame.I())
    fail(Errc::InvalidArgument, "observation set does not match the site frame");
  std::string out(kDatasetHeader);
  out += '\n';
  for (int t = 1; t <= data.T; ++t)
    for (int i = 1; i <= data.I; ++i) {
      auto row_prefix = [&](long replicate) {
        out += quadrat;
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_double(frame.coords(i - 1, 0));
        out += ',';
        out += format_double(frame.coords(i - 1, 1));
        out += ',';
        out += std::to_string(t);
        out += ',';
        out += std::to_string(replicate);
        out += ',';
      };
      const int n = data.n(i, t);
      if (n == 0) {
        row_prefix(1);
        out += '\n';
        continue;
      }
      for (int r = 0; r < n; ++r) {
        row_prefix(r + 1);
        out += std::to_string(
            data.y[static_cast<std::size_t>(data.begin(i, t)) +
                   static_cast<std::size_t>(r)]);
        out += '\n';
      }
    }
  return out;
}

void write_dataset(const std::string& path, const ObservationSet& data,
                   const SiteFrame& frame, const std::string& quadrat) {
  write_text_file(path, format_dataset(data, frame, quadrat));
}

std::string format_truth(const TruthRecord& truth) {
  json j;
  j["error_rate"] = truth.error_rate;
  j["replicate"] = truth.replicate_index;
  j["seed"] = truth.seed;
  const int S = truth.transition.S();
  json p = json::array();
  for (int row = 0; row < S; ++row) {
    json r = json::array();
    for (int col = 0; col < S; ++col) r.push_back(truth.transition.p(row, col));
    p.push_back(std::move(r));
  }
  j["transition"] = std::move(p);
  json phi = json::array();
  for (int s = 0; s < truth.phi.size(); ++s) phi.push_back(truth.phi(s));
  j["phi"] = std::move(phi);
  if (truth.bandwidth) {
    j["bandwidth"] = {{"sigma1", truth.bandwidth->sigma1},
                      {"sigma2", truth.bandwidth->sigma2},
                      {"rho", truth.bandwidth->rho}};
  } else {
    j["bandwidth"] = nullptr;
  }
  json z = json::array();
  for (Eigen::Index i = 0; i < truth.z.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index t = 0; t < truth.z.cols(); ++t) r.push_back(truth.z(i, t));
    z.push_back(std::move(r));
  }
  j["z"] = std::move(z);
  return j.dump(2) + "\n";
}

void write_truth(const std::string& path, const TruthRecord& truth) {
  write_text_file(path, format_truth(truth));
}

TruthRecord parse_truth_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("truth file: ") + e.what());
  }
  TruthRecord out;
  try {
    out.error_rate = j.at("error_rate").get<double>();
    out.replicate_index = j.at("replicate").get<int>();
    out.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("transition");
    const int S = static_cast<int>(p.size());
    Matrix P(S, S);
    for (int row = 0; row < S; ++row)
      for (int col = 0; col < S; ++col)
        P(row, col) = p.at(row).at(col).get<double>();
    out.transition = validate_transition_matrix(P);
    const auto& phi = j.at("phi");
    out.phi.resize(static_cast<Eigen::Index>(phi.size()));
    for (Eigen::Index s = 0; s < out.phi.size(); ++s)
      out.phi(s) = phi.at(static_cast<std::size_t>(s)).get<double>();
    if (!j.at("bandwidth").is_null()) {
      const auto& b = j.at("bandwidth");
      out.bandwidth = validate_bandwidth(b.at("sigma1").get<double>(),
                                         b.at("sigma2").get<double>(),
                                         b.at("rho").get<double>());
    }
    const auto& z = j.at("z");
    const auto I = static_cast<Eigen::Index>(z.size());
    if (I > 0) {
      const auto T = static_cast<Eigen::Index>(z.at(0).size());
      out.z.resize(I, T);
      for (Eigen::Index i = 0; i < I; ++i)
        for (Eigen::Index t = 0; t < T; ++t)
          out.z(i, t) = z.at(static_cast<std::size_t>(i))
                            .at(static_cast<std::size_t>(t))
                            .get<int>();
    }
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("truth file: ") + e.what());
  }
  return out;
}

TruthRecord read_truth(const std::string& path) {
  return parse_truth_text(read_text_file(path));
}

namespace {

std::vector<std::string> draws_columns(int S, bool spatial) {
  std::vector<std::string> cols = {"chain", "iteration"};
  for (int j = 1; j <= S; ++j)
    for (int k = 1; k <= S; ++k)
      cols.push_back("p_" + std::to_string(j) + "_" + std::to_string(k));
  cols.emplace_back("e");
  for (int s = 1; s <= S; ++s) cols.push_back("phi_" + std::to_string(s));
  if (spatial) {
    cols.emplace_back("sigma1");
    cols.emplace_back("sigma2");
    cols.emplace_back("rho");
  }
  return cols;
}

void append_acceptance_comment(std::string& out, int chain, const char* param,
                               const AcceptanceCounter& counter) {
  out += "#acceptance,";
  out += std::to_string(chain);
  out += ',';
  out += param;
  out += ',';
  out += std::to_string(counter.accepted);
  out += ',';
  out += std::to_string(counter.proposals);
  out += '\n';
}

}  // namespace

std::string format_draws(const PosteriorDraws& draws) {
  const int S = draws.S;
  const bool spatial = draws.model == ModelKind::spatial;
  std::string out;
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    if (!spatial) break;
    const auto& log = draws.chains[c].acceptance;
    append_acceptance_comment(out, static_cast<int>(c) + 1, "sigma1", log.sigma1);
    append_acceptance_comment(out, static_cast<int>(c) + 1, "sigma2", log.sigma2);
    append_acceptance_comment(out, static_cast<int>(c) + 1, "rho", log.rho);
  }
  auto cols = draws_columns(S, spatial);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) out += ',';
    out += cols[k];
  }
  out += '\n';
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& chain = draws.chains[c];
    for (int d = 0; d < chain.size(); ++d) {
      out += std::to_string(c + 1);
      out += ',';
      out += std::to_string(d + 1);
      for (int j = 0; j < S; ++j)
        for (int k = 0; k < S; ++k) {
          out += ',';
          out += format_double(chain.transition[static_cast<std::size_t>(d)](j, k));
        }
      out += ',';
      out += format_double(chain.e[static_cast<std::size_t>(d)]);
      for (int s = 0; s < S; ++s) {
        out += ',';
        out += format_double(chain.phi[static_cast<std::size_t>(d)](s));
      }
      if (spatial) {
        out += ',';
        out += format_double(chain.sigma1[static_cast<std::size_t>(d)]);
        out += ',';
        out += format_double(chain.sigma2[static_cast<std::size_t>(d)]);
        out += ',';
        out += format_double(chain.rho[static_cast<std::size_t>(d)]);
      }
      out += '\n';
    }
  }
  return out;
}

void write_draws(const std::string& path, const PosteriorDraws& draws) {
  write_text_file(path, format_draws(draws));
}

PosteriorDraws parse_draws_text(const std::string& text) {
  LineReader reader(text);
  std::string_view line;
  int lineno = 0;

  struct AcceptanceRow {
    int chain;
    std::string param;
    std::int64_t accepted, proposals;
  };
  std::vector<AcceptanceRow> acceptance;
  std::vector<std::string> header;

  while (reader.next(line, lineno)) {
    std::string_view stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '#') {
      if (stripped.rfind("#acceptance,", 0) == 0) {
        auto fields = split(stripped.substr(12), ',');
        if (fields.size() != 4)
          parse_fail(lineno, "malformed acceptance comment");
        acceptance.push_back({static_cast<int>(parse_long(fields[0], lineno)),
                              std::string(trim(fields[1])),
                              parse_long(fields[2], lineno),
                              parse_long(fields[3], lineno)});
      }
      continue;
    }
    for (auto f : split(stripped, ',')) header.emplace_back(trim(f));
    break;
  }
  if (header.empty()) fail(Errc::ParseError, "missing draws header");

  bool spatial = std::find(header.begin(), header.end(), "sigma1") != header.end();
  int S = 0;
  for (const auto& col : header)
    if (col.rfind("phi_", 0) == 0) ++S;
  if (S == 0) fail(Errc::ParseError, "draws header lists no phi columns");
  auto expected = draws_columns(S, spatial);
  if (header != expected) fail(Errc::ParseError, "unexpected draws header");
  const std::size_t ncols = expected.size();

  PosteriorDraws draws;
  draws.model = spatial ? ModelKind::spatial : ModelKind::nonspatial;
  draws.S = S;
  while (reader.next(line, lineno)) {
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = split(stripped, ',');
    if (fields.size() != ncols)
      parse_fail(lineno, "expected " + std::to_string(ncols) + " fields, got " +
                             std::to_string(fields.size()));
    long chain = parse_long(fields[0], lineno);
    if (chain < 1) parse_fail(lineno, "chain index must be >= 1");
    if (chain > static_cast<long>(draws.chains.size()) + 1)
      parse_fail(lineno, "chain indices must be contiguous");
    if (chain == static_cast<long>(draws.chains.size()) + 1)
      draws.chains.emplace_back();
    auto& tgt = draws.chains[static_cast<std::size_t>(chain - 1)];

    std::size_t f = 2;
    Matrix P(S, S);
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k) P(j, k) = parse_double(fields[f++], lineno);
    tgt.transition.push_back(std::move(P));
    tgt.e.push_back(parse_double(fields[f++], lineno));
    Vector phi(S);
    for (int s = 0; s < S; ++s) phi(s) = parse_double(fields[f++], lineno);
    tgt.phi.push_back(std::move(phi));
    if (spatial) {
      tgt.sigma1.push_back(parse_double(fields[f++], lineno));
      tgt.sigma2.push_back(parse_double(fields[f++], lineno));
      tgt.rho.push_back(parse_double(fields[f++], lineno));
    }
  }
  if (draws.chains.empty()) fail(Errc::EmptyData, "draws file holds no rows");
  for (const auto& chain : draws.chains)
    if (chain.size() != draws.chains.front().size())
      fail(Errc::ParseError, "chains carry unequal draw counts");
  for (const auto& row : acceptance) {
    if (row.chain < 1 || row.chain > static_cast<int>(draws.chains.size()))
      fail(Errc::ParseError, "acceptance comment names an unknown chain");
    auto& log = draws.chains[static_cast<std::size_t>(row.chain - 1)].acceptance;
    AcceptanceCounter* tgt = row.param == "sigma1"   ? &log.sigma1
                             : row.param == "sigma2" ? &log.sigma2
                             : row.param == "rho"    ? &log.rho
                                                     : nullptr;
    if (!tgt) fail(Errc::ParseError, "acceptance comment names an unknown parameter");
    tgt->accepted = row.accepted;
    tgt->proposals = row.proposals;
  }
  return draws;
}

PosteriorDraws read_draws(const std::string& path) {
  return parse_draws_text(read_text_file(path));
}

std::string format_summary(const SummaryReport& report) {
  std::string out;
  out += "#model,";
  out += model_name(report.model);
  out += "\n#chains,";
  out += std::to_string(report.chains);
  out += "\n#draws_per_chain,";
  out += std::to_string(report.draws_per_chain);
  out += "\n#level,";
  out += format_double(report.options.level);
  out += "\n#rhat_threshold,";
  out += format_double(report.options.rhat_threshold);
  out += "\n#any_flagged,";
  out += report.any_flagged ? '1' : '0';
  out += "\nparam,point,lo,hi,rhat,flagged\n";
  for (const auto& row : report.params) {
    out += row.name;
    out += ',';
    out += format_double(row.point);
    out += ',';
    out += format_double(row.lo);
    out += ',';
    out += format_double(row.hi);
    out += ',';
    if (row.rhat_known) out += format_double(row.rhat);
    out += ',';
    out += row.flagged ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_summary(const std::string& path, const SummaryReport& report) {
  write_text_file(path, format_summary(report));
}

std::string format_acceptance(const PosteriorDraws& draws) {
  std::string out = "chain,param,accepted,proposed,rate\n";
  if (draws.model != ModelKind::spatial) return out;
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& log = draws.chains[c].acceptance;
    auto emit = [&](const char* param, const AcceptanceCounter& counter) {
      out += std::to_string(c + 1);
      out += ',';
      out += param;
      out += ',';
      out += std::to_string(counter.accepted);
      out += ',';
      out += std::to_string(counter.proposals);
      out += ',';
      out += format_double(counter.rate());
      out += '\n';
    };
    emit("sigma1", log.sigma1);
    emit("sigma2", log.sigma2);
    emit("rho", log.rho);
  }
  return out;
}

void write_acceptance(const std::string& path, const PosteriorDraws& draws) {
  write_text_file(path, format_acceptance(draws));
}

std::string format_rhat_table(const SummaryReport& report) {
  std::string out = "param,rhat,flagged\n";
  for (const auto& row : report.params) {
    out += row.name;
    out += ',';
    if (row.rhat_known) out += format_double(row.rhat);
    out += ',';
    out += row.flagged ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_rhat_table(const std::string& path, const SummaryReport& report) {
  write_text_file(path, format_rhat_table(report));
}

std::string format_traces(const PosteriorDraws& draws) {
  const int S = draws.S;
  const bool spatial = draws.model == ModelKind::spatial;
  auto cols = draws_columns(S, spatial);
  std::string out = "chain,iteration,param,value\n";
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& chain = draws.chains[c];
    for (int d = 0; d < chain.size(); ++d) {
      auto emit = [&](const std::string& param, double value) {
        out += std::to_string(c + 1);
        out += ',';
        out += std::to_string(d + 1);
        out += ',';
        out += param;
        out += ',';
        out += format_double(value);
        out += '\n';
      };
      std::size_t col = 2;
      const auto du = static_cast<std::size_t>(d);
      for (int j = 0; j < S; ++j)
        for (int k = 0; k < S; ++k) emit(cols[col++], chain.transition[du](j, k));
      emit(cols[col++], chain.e[du]);
      for (int s = 0; s < S; ++s) emit(cols[col++], chain.phi[du](s));
      if (spatial) {
        emit(cols[col++], chain.sigma1[du]);
        emit(cols[col++], chain.sigma2[du]);
        emit(cols[col++], chain.rho[du]);
      }
    }
  }
  return out;
}

void write_traces(const std::string& path, const PosteriorDraws& draws) {
  write_text_file(path, format_traces(draws));
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const std::string* IniFile::find(const std::string& section,
                                 const std::string& key) const {
  auto sec = sections.find(section);
  if (sec == sections.end()) return nullptr;
  auto it = sec->second.find(key);
  return it == sec->second.end() ? nullptr : &it->second;
}

IniFile parse_ini_text(const std::string& text) {
  IniFile ini;
  LineReader reader(text);
  std::string_view line;
  int lineno = 0;
  std::string section;
  while (reader.next(line, lineno)) {
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#' || stripped.front() == ';')
      continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        parse_fail(lineno, "unterminated section header");
      section = std::string(trim(stripped.substr(1, stripped.size() - 2)));
      if (section.empty()) parse_fail(lineno, "empty section name");
      ini.sections[section];
      continue;
    }
    auto eq = stripped.find('=');
    if (eq == std::string_view::npos)
      parse_fail(lineno, "expected 'key = value'");
    std::string key(trim(stripped.substr(0, eq)));
    std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) parse_fail(lineno, "empty key");
    auto [it, inserted] = ini.sections[section].emplace(key, value);
    if (!inserted)
      parse_fail(lineno, "duplicate key '" + key + "' in section '" + section +
                             "'");
  }
  return ini;
}

IniFile parse_ini(const std::string& path) {
  return parse_ini_text(read_text_file(path));
}

}  // namespace occmarkov
