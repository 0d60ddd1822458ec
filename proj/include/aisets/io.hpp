#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aisets/aligned_sets.hpp"
#include "aisets/channel.hpp"
#include "aisets/deterministic.hpp"
#include "aisets/entropy.hpp"
#include "aisets/schemes.hpp"

namespace aisets {

using json = nlohmann::json;

/// 64-bit FNV-1a of the compact JSON dump (keys sorted), as 16 hex digits.
std::string config_hash(const json& config);

/// Provenance stamped into every artifact.
struct Stamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Shortest-round-trip-safe text form used in CSV cells.
std::string format_number(double value);

/// In-memory CSV table. The first line of the rendered file is a comment
/// carrying the stamp; the second is the header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  CsvTable& row();
  CsvTable& cell(const std::string& value);
  CsvTable& cell(double value);
  CsvTable& cell(std::int64_t value);
  CsvTable& cell(std::size_t value);
  CsvTable& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
  std::string render(const Stamp& stamp) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Codebook file: {"K", "n", "P", "rows", "mapping"} for two users, where
/// rows[m] is X1 of message m and mapping[m] is X2 = L(X1); for K > 2 the
/// field "messages" holds every user's row per message.
IntegerCodebook codebook_from_json(const json& j);
json codebook_to_json(const IntegerCodebook& codebook);

DensitySpec density_spec_from_json(const json& j);
json density_to_json(const ChannelDensity& density);

json to_json(const CanonicalReduction& reduction);
json to_json(const AlignmentBoundReport& report);
json to_json(const EntropyLedger& ledger);
json to_json(const SumDofReport& report);
json to_json(const RatePoint& point);
json to_json(const SlopeFit& fit);
json to_json(const SchemeSummary& summary);
json to_json(const ToyReport& report);
json to_json(const PigeonholeSearch& search);
json to_json(const LimitFit& fit);

/// Adds the stamp to a JSON document and renders it with two-space indent.
std::string render_json(json document, const Stamp& stamp);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace aisets
