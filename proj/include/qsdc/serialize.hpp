#pragma once

// JSON/CSV rendering of engine results. Every run emits one ResultDocument:
//   { schema_version, command, config, payload, timings }
// Payloads are deterministic functions of the resolved config (timings are
// not part of the payload), amplitudes are [re, im] pairs rounded at 12
// decimals, and histograms/tables are emitted in sorted order.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qsdc/entangle.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/swap_test.hpp"

namespace qsdc {

using json = nlohmann::ordered_json;

inline constexpr int result_schema_version = 1;

// ---------------------------------------------------------------------------
// Scalars.

inline double round_amplitude(double v) {
  const double r = std::round(v * 1e12) / 1e12;
  return r == 0.0 ? 0.0 : r;  // normalize -0
}

inline json amplitude_json(complex a) {
  return json::array({round_amplitude(a.real()), round_amplitude(a.imag())});
}

inline json state_json(const StateVector& state) {
  json amps = json::array();
  for (std::size_t k = 0; k < state.dim(); ++k) amps.push_back(amplitude_json(state.amplitude(k)));
  return amps;
}

// ---------------------------------------------------------------------------
// Tables.

template <typename Label>
json swap_table_json(const SwapDecomposition<Label>& table) {
  json rows = json::array();
  for (const auto& term : table) {
    rows.push_back({{"outcome", to_string(term.outcome)},
                    {"residual", to_string(term.residual)},
                    {"amplitude", round_amplitude(term.amplitude)},
                    {"probability", round_amplitude(term.amplitude * term.amplitude)}});
  }
  return rows;
}

template <typename Label>
json decoy_table_json(const std::vector<DecoyTerm<Label>>& table) {
  json rows = json::array();
  for (const auto& term : table) {
    rows.push_back({{"outcome", to_string(term.label)},
                    {"amplitude", round_amplitude(term.amplitude)},
                    {"probability", round_amplitude(term.amplitude * term.amplitude)}});
  }
  return rows;
}

inline json estimate_json(const InnerProductEstimate& est) {
  return {{"p_all_zero", est.p_all_zero},
          {"estimate", est.estimate},
          {"standard_error", est.standard_error},
          {"shots", est.shots},
          {"at_floor", est.at_floor}};
}

inline json security_report_json(const SecurityReport& report) {
  json checks = json::array();
  for (const auto& check : report.checks) {
    checks.push_back({{"position", check.position},
                      {"claimed", check.claimed},
                      {"expected", check.expected},
                      {"estimate", estimate_json(check.estimate)},
                      {"relative_error", check.relative_error},
                      {"flagged", check.flagged}});
  }
  return {{"threshold", report.threshold},
          {"shots_per_position", report.shots_per_position},
          {"insufficient_sample", report.insufficient_sample},
          {"max_relative_error", report.max_relative_error},
          {"decision", to_string(report.decision)},
          {"checks", std::move(checks)}};
}

// ---------------------------------------------------------------------------
// Round transcript.

inline json position_json(const Round& round, const Position& pos) {
  const Variant variant = round.config.variant;
  json entry = {{"index", pos.index},
                {"kind", to_string(pos.kind)},
                {"alice", pos.alice.describe(variant)},
                {"bob", pos.bob.describe(variant)}};
  if (pos.announced >= 0) entry["announced"] = announced_label_name(variant, pos.announced);
  if (pos.discarded) entry["discarded"] = true;
  if (pos.message_position) {
    entry["message_position"] = true;
    if (!pos.encoded_bits.empty()) entry["encoded_bits"] = pos.encoded_bits;
    entry["masked"] = pos.masked;
    if (pos.message_announced >= 0) {
      entry["message_announced"] = announced_label_name(variant, pos.message_announced);
      entry["message_announced_bits"] = message_bits_of_label(variant, pos.message_announced);
    }
  }
  return entry;
}

inline json round_json(const Round& round) {
  json positions = json::array();
  for (const Position& pos : round.positions) positions.push_back(position_json(round, pos));
  return {{"variant", to_string(round.config.variant)},
          {"num_positions", round.config.num_positions},
          {"normalized", round.normalized},
          {"positions", std::move(positions)}};
}

inline json session_json(const SessionResult& result) {
  json doc = {{"decision", to_string(result.decision)},
              {"security", security_report_json(result.security)},
              {"round", round_json(result.round)}};
  json message = {{"bits_sent", result.message_bits},
                  {"capacity_bits", message_capacity(result.round)}};
  if (result.decision == SessionDecision::Proceed) {
    message["bits_decoded"] = result.decoded_bits;
    message["decoded_ok"] = result.message_ok;
  }
  doc["message"] = std::move(message);
  return doc;
}

// ---------------------------------------------------------------------------
// Envelope and output.

inline json result_document(const std::string& command, json config, json payload,
                            double elapsed_ms) {
  return {{"schema_version", result_schema_version},
          {"command", command},
          {"config", std::move(config)},
          {"payload", std::move(payload)},
          {"timings", {{"elapsed_ms", elapsed_ms}}}};
}

// Atomic write: the document lands complete or not at all.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write output file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV rendering for tabular payloads (security-check and swapping-table).

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Flattens an array-of-objects payload table (one scalar value per cell).
inline std::string csv_table(const json& rows) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_object())
    throw std::invalid_argument("csv output requires a table payload");
  std::string out;
  bool first = true;
  for (const auto& [key, value] : rows.front().items()) {
    (void)value;
    if (!first) out += ',';
    out += csv_escape(key);
    first = false;
  }
  out += '\n';
  for (const auto& row : rows) {
    first = true;
    for (const auto& [key, value] : row.items()) {
      (void)key;
      if (!first) out += ',';
      if (value.is_string())
        out += csv_escape(value.get<std::string>());
      else if (value.is_number_float())
        out += format_double(value.get<double>());
      else
        out += value.dump();
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace qsdc
