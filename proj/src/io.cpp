#include "aisets/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>

#include "aisets/error.hpp"

namespace aisets {

std::string config_hash(const json& config) {
  const std::string text = config.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016" PRIx64, hash);
  return buffer;
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.15g", value);
  return buffer;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(const std::string& value) {
  if (rows_.empty()) row();
  rows_.back().push_back(value);
  return *this;
}

CsvTable& CsvTable::cell(double value) { return cell(format_number(value)); }
CsvTable& CsvTable::cell(std::int64_t value) { return cell(std::to_string(value)); }
CsvTable& CsvTable::cell(std::size_t value) { return cell(std::to_string(value)); }

std::string CsvTable::render(const Stamp& stamp) const {
  std::string out = "# config_hash=" + stamp.config_hash + " seed=" + std::to_string(stamp.seed) + "\n";
  auto append_line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append_line(columns_);
  for (const auto& r : rows_) {
    if (r.size() != columns_.size()) {
      throw Error(ErrorKind::InvalidArgument, "CSV row width differs from the header");
    }
    append_line(r);
  }
  return out;
}

namespace {

std::vector<Word> rows_from_json(const json& j, const char* field) {
  std::vector<Word> rows;
  for (const json& row : j.at(field)) rows.push_back(row.get<Word>());
  return rows;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, where + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw Error(ErrorKind::InvalidArgument, where + ": unknown field '" + item.key() + "'");
    }
  }
}

json matrix_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

}  // namespace

IntegerCodebook codebook_from_json(const json& j) {
  reject_unknown_keys(j, {"K", "n", "P", "rows", "mapping", "messages"}, "codebook");
  const int users = j.value("K", 2);
  const double power = j.at("P").get<double>();
  IntegerCodebook codebook;
  if (users == 2 && j.contains("rows")) {
    codebook = IntegerCodebook::two_user(rows_from_json(j, "rows"), rows_from_json(j, "mapping"),
                                         power);
  } else {
    codebook.users = users;
    codebook.power = power;
    codebook.messages = j.at("messages").get<std::vector<std::vector<Word>>>();
    if (codebook.messages.empty() || codebook.messages.front().empty()) {
      throw Error(ErrorKind::InvalidArgument, "codebook has no messages");
    }
    codebook.length = static_cast<int>(codebook.messages.front().front().size());
    codebook.validate();
  }
  if (j.contains("n") && j.at("n").get<int>() != codebook.length) {
    throw Error(ErrorKind::InvalidArgument, "codebook n differs from the row length");
  }
  return codebook;
}

json codebook_to_json(const IntegerCodebook& codebook) {
  json j{{"K", codebook.users}, {"n", codebook.length}, {"P", codebook.power}};
  if (codebook.users == 2) {
    json rows = json::array();
    json mapping = json::array();
    for (const auto& message : codebook.messages) {
      rows.push_back(message[0]);
      mapping.push_back(message[1]);
    }
    j["rows"] = rows;
    j["mapping"] = mapping;
  } else {
    j["messages"] = codebook.messages;
  }
  return j;
}

DensitySpec density_spec_from_json(const json& j) {
  reject_unknown_keys(j, {"family", "lo", "hi", "mean", "stddev", "alpha", "scale", "bits", "atoms"},
                      "density");
  DensitySpec spec;
  spec.family = j.value("family", spec.family);
  spec.lo = j.value("lo", spec.lo);
  spec.hi = j.value("hi", spec.hi);
  spec.mean = j.value("mean", spec.mean);
  spec.stddev = j.value("stddev", spec.stddev);
  if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
  if (j.contains("scale")) spec.scale = j.at("scale").get<double>();
  if (j.contains("bits")) spec.bits = j.at("bits").get<int>();
  if (j.contains("atoms")) spec.atoms = j.at("atoms").get<std::vector<double>>();
  return spec;
}

json density_to_json(const ChannelDensity& density) {
  json j{{"family", to_string(density.family())},
         {"lo", density.lo()},
         {"hi", density.hi()},
         {"peak", density.peak()},
         {"f_max", density.f_max()}};
  if (density.gaussian_shape()) {
    j["mean"] = density.mean();
    j["stddev"] = density.stddev();
  }
  if (density.has_scaling()) {
    j["alpha"] = density.alpha();
    j["scale"] = density.scale();
  }
  return j;
}

json to_json(const CanonicalReduction& reduction) {
  const CanonicalChannel& channel = reduction.channel;
  json cross = json::array();
  json forward = json::array();
  json inverse = json::array();
  for (int t = 0; t < channel.length(); ++t) {
    cross.push_back(channel.coefficient(1, 0, t));
    forward.push_back(matrix_json(reduction.transform.forward[t]));
    inverse.push_back(matrix_json(reduction.transform.inverse[t]));
  }
  return {{"canonical_bound", channel.bound()},
          {"canonical_power", channel.power()},
          {"cross", cross},
          {"forward", forward},
          {"inverse", inverse}};
}

json to_json(const AlignmentBoundReport& report) {
  json pairs = json::array();
  for (const PairRecord& pair : report.pairs) {
    pairs.push_back({{"x", pair.x}, {"nu", pair.nu}, {"exact", pair.exact}, {"bound", pair.bound}});
  }
  return {{"P", report.power},
          {"n", report.length},
          {"alpha", report.alpha},
          {"f_max", report.f_max},
          {"codebook_size", report.codebook_size},
          {"samples", report.samples},
          {"empirical_E_S", report.empirical_expected_size},
          {"empirical_stderr", report.empirical_stderr},
          {"exact_E_S", report.exact_expected_size},
          {"exact_max_E_S", report.exact_max_expected_size},
          {"exact_is_monte_carlo", report.exact_is_monte_carlo},
          {"analytic_bound", report.analytic_bound},
          {"max_width_ratio", report.max_width_ratio},
          {"pair_bound_violated", report.pair_bound_violated},
          {"size_bound_violated", report.size_bound_violated},
          {"pairs", pairs}};
}

json to_json(const EntropyLedger& ledger) {
  return {{"P", ledger.power},
          {"n", ledger.length},
          {"alpha", ledger.alpha},
          {"codebook_size", ledger.codebook_size},
          {"H_Y1_given_G", ledger.h_y1},
          {"H_Y2_given_G", ledger.h_y2},
          {"H_Y1_given_Y2_G", ledger.h_y1_given_y2},
          {"E_log_S", ledger.expected_log_set},
          {"log_E_S", ledger.log_expected_set},
          {"normalizer", ledger.normalizer},
          {"difference", ledger.difference},
          {"normalized_difference", ledger.normalized_difference},
          {"log_analytic_bound", ledger.log_analytic_bound},
          {"H_Y2_cardinality_bound", ledger.h_y2_cardinality_bound},
          {"exact", ledger.exact},
          {"cells", ledger.cells},
          {"difference_stderr", ledger.difference_stderr},
          {"ci", json::array({ledger.ci_low, ledger.ci_high})},
          {"chain_residual", ledger.chain_residual()}};
}

json to_json(const LimitFit& fit) {
  return {{"limit", fit.limit},
          {"loglog_coefficient", fit.loglog_coefficient},
          {"inverse_coefficient", fit.inverse_coefficient},
          {"residual_rms", fit.residual_rms}};
}

json to_json(const SumDofReport& report) {
  json fits = json::array();
  for (const LengthFit& fit : report.fits) {
    fits.push_back({{"n", fit.length},
                    {"alpha", fit.alpha},
                    {"log_E_S_ratio", to_json(fit.log_expected_set)},
                    {"analytic_ratio", to_json(fit.analytic)}});
  }
  return {{"theorem_value", report.theorem_value},
          {"fits", fits},
          {"warnings", report.warnings},
          {"within_theorem", report.within_theorem}};
}

json to_json(const RatePoint& point) {
  return {{"scheme", point.scheme}, {"P", point.power},       {"alpha", point.alpha},
          {"B", point.feedback_bits}, {"R1", point.r1},       {"R2", point.r2},
          {"sum", point.sum()},     {"residual_power", point.residual_power},
          {"trials", point.trials}};
}

json to_json(const SlopeFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"stderr", fit.stderr_slope},
          {"ci95", json::array({fit.ci_low, fit.ci_high})},
          {"points", fit.points}};
}

json to_json(const SchemeSummary& summary) {
  json j{{"d1", to_json(summary.d1)}, {"d2", to_json(summary.d2)}, {"sum", to_json(summary.sum)}};
  if (summary.residual_exponent.points > 0) {
    j["residual_exponent"] = to_json(summary.residual_exponent);
  }
  return j;
}

json to_json(const ToyReport& report) {
  return {{"image_counts", report.image_counts},
          {"classes", report.classes},
          {"single_slope_holds", report.single_slope_holds},
          {"max_images", report.max_images},
          {"min_images", report.min_images},
          {"pigeonhole_holds", report.pigeonhole_holds}};
}

json to_json(const PigeonholeSearch& search) {
  return {{"complete_mappings_visited", search.mappings},
          {"min_max_images", search.min_max_images},
          {"extremal_mapping", search.extremal_mapping},
          {"all_reach_sqrt", search.all_reach_sqrt}};
}

std::string render_json(json document, const Stamp& stamp) {
  document["config_hash"] = stamp.config_hash;
  document["seed"] = stamp.seed;
  return document.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing " + path.string());
}

}  // namespace aisets
