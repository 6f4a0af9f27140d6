#pragma once

// Command-line front end. Five subcommands:
//   session         full protocol run (security decision + superdense message)
//   security-check  claimed state vs received state, collapse-replay estimate
//   swap-test       direct overlap estimate between two small states
//   swapping-table  exact outcome/amplitude tables for labels or decoy products
//   superdense      single-position encode/mask/announce histogram
// Exit codes: 0 success or Proceed, 2 security Terminate, 3 usage error,
// 4 internal error. Every run emits one ResultDocument (JSON by default);
// re-running with the echoed config reproduces the payload byte for byte.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsdc/protocol.hpp"
#include "qsdc/serialize.hpp"

namespace qsdc::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_terminate = 2;
inline constexpr int exit_usage = 3;
inline constexpr int exit_internal = 4;

inline constexpr const char* output_dir_env = "QSDC_OUTPUT_DIR";

// ---------------------------------------------------------------------------
// Operand and option parsing.

// State mini-grammar: entangled label names (psi+, phi-, ghz000..ghz111) or
// 1..3 concatenated preparation symbols over {0, 1, +, -}.
inline StateVector parse_state(const std::string& text) {
  if (text.rfind("psi", 0) == 0 || text.rfind("phi", 0) == 0)
    return prepare_bell(parse_bell_label(text));
  if (text.rfind("ghz", 0) == 0) return prepare_ghz(parse_ghz_label(text));
  if (is_decoy_symbols(text) && !text.empty() && text.size() <= 3)
    return ket_from_symbols(text);
  throw std::invalid_argument("unrecognized state '" + text +
                              "': expected psi+/psi-/phi+/phi-, ghz000..ghz111, or 1-3 "
                              "symbols over {0,1,+,-}");
}

inline SwapTestVariant parse_ancilla(const std::string& text) {
  if (text == "single") return SwapTestVariant::SingleAncilla;
  if (text == "per-qubit") return SwapTestVariant::PerQubitAncilla;
  throw std::invalid_argument("ancilla mode must be 'single' or 'per-qubit'");
}

inline std::string to_string(SwapTestVariant variant) {
  return variant == SwapTestVariant::SingleAncilla ? "single" : "per-qubit";
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

// Adversary grammar:
//   none
//   replace:<alice|bob>:<position>:<0|1|+|->[:<line-qubit>]
//   replace:+to0          (sugar; resolved against the built round)
//   intercept:<computational|hadamard>:<probability>
struct AdversarySpec {
  std::string text = "none";
  bool sugar_plus_to_zero = false;
  AdversaryModel model;
};

inline AdversarySpec parse_adversary(const std::string& text) {
  AdversarySpec spec;
  spec.text = text;
  if (text == "none") return spec;
  const std::vector<std::string> parts = split(text, ':');
  if (parts[0] == "replace") {
    if (parts.size() == 2 && parts[1] == "+to0") {
      spec.sugar_plus_to_zero = true;
      return spec;
    }
    if (parts.size() != 4 && parts.size() != 5)
      throw std::invalid_argument(
          "replace adversary needs replace:<alice|bob>:<position>:<state>[:<line-qubit>]");
    AdversaryModel::Line line;
    if (parts[1] == "alice")
      line = AdversaryModel::Line::Alice;
    else if (parts[1] == "bob")
      line = AdversaryModel::Line::Bob;
    else
      throw std::invalid_argument("adversary line must be 'alice' or 'bob'");
    if (parts[3].size() != 1)
      throw std::invalid_argument("replacement state must be one of 0, 1, +, -");
    const int position = std::stoi(parts[2]);
    const int line_qubit = parts.size() == 5 ? std::stoi(parts[4]) : 0;
    spec.model = AdversaryModel::fixed_replace(line, position, parts[3][0], line_qubit);
    return spec;
  }
  if (parts[0] == "intercept") {
    if (parts.size() != 3)
      throw std::invalid_argument("intercept adversary needs intercept:<basis>:<probability>");
    AdversaryModel::Basis basis;
    if (parts[1] == "computational")
      basis = AdversaryModel::Basis::Computational;
    else if (parts[1] == "hadamard")
      basis = AdversaryModel::Basis::Hadamard;
    else
      throw std::invalid_argument("intercept basis must be 'computational' or 'hadamard'");
    spec.model = AdversaryModel::intercept_resend(basis, std::stod(parts[2]));
    return spec;
  }
  throw std::invalid_argument("adversary must be 'none', 'replace:...', or 'intercept:...'");
}

// The +to0 sugar targets the first decoy/decoy position where Alice claims
// "+" and Bob's claim is entirely Hadamard-basis — the configuration whose
// replacement signature is statistically visible.
inline AdversaryModel resolve_adversary(const AdversarySpec& spec, const Round& round) {
  if (!spec.sugar_plus_to_zero) return spec.model;
  for (const Position& pos : round.positions) {
    if (pos.kind != PositionKind::DecoyDecoy) continue;
    if (pos.alice.symbols != "+") continue;
    const bool bob_hadamard = std::all_of(pos.bob.symbols.begin(), pos.bob.symbols.end(),
                                          [](char c) { return c == '+' || c == '-'; });
    if (!bob_hadamard) continue;
    return AdversaryModel::fixed_replace(AdversaryModel::Line::Alice, pos.index, '0');
  }
  throw std::invalid_argument(
      "replace:+to0 found no decoy/decoy position with a '+' claim from Alice and a "
      "Hadamard-basis claim from Bob; pick another seed or use the explicit replace form");
}

// Message text is hex; each digit contributes 4 bits, most significant first.
inline std::string bits_from_hex(const std::string& hex) {
  std::string bits;
  bits.reserve(hex.size() * 4);
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw std::invalid_argument(std::string("message must be hex; got '") + c + "'");
    for (int i = 3; i >= 0; --i) bits += (v >> i) & 1 ? '1' : '0';
  }
  return bits;
}

inline std::optional<std::string> hex_from_bits(const std::string& bits) {
  if (bits.size() % 4 != 0) return std::nullopt;
  static constexpr char digits[] = "0123456789abcdef";
  std::string hex;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int v = 0;
    for (int j = 0; j < 4; ++j) v = v * 2 + (bits[i + std::size_t(j)] == '1' ? 1 : 0);
    hex += digits[v];
  }
  return hex;
}

inline std::string read_trimmed_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  std::erase_if(text, [](unsigned char c) { return std::isspace(c) != 0; });
  return text;
}

// ---------------------------------------------------------------------------
// Output plumbing.

struct OutputOptions {
  std::string path;            // empty: stdout
  std::string format = "json"; // json | csv (csv only for table payloads)
};

inline std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(output_dir_env); dir != nullptr && *dir != '\0')
      p = std::filesystem::path(dir) / p;
  }
  return p;
}

inline void emit(const json& document, const OutputOptions& out) {
  std::string text;
  if (out.format == "json") {
    text = document.dump(2);
    text += '\n';
  } else if (out.format == "csv") {
    const json& payload = document.at("payload");
    const json& rows = payload.contains("rows") ? payload.at("rows") : payload;
    text = csv_table(rows);
  } else {
    throw std::invalid_argument("format must be 'json' or 'csv'");
  }
  if (out.path.empty()) {
    std::cout << text;
  } else {
    write_text_file(resolve_output_path(out.path), text);
  }
}

class Timer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

// ---------------------------------------------------------------------------
// session

struct SessionOptions {
  std::string variant = "bell";
  int positions = 64;
  double decoy_fraction = 0.25;
  std::uint64_t shots = 8192;
  double threshold = 0.15;
  std::string swap_ancilla = "single";
  std::uint64_t seed = 0;
  std::string adversary = "none";
  std::string message;  // hex
  std::string message_file;
  OutputOptions out;
};

// Config file: JSON object mirroring SessionOptions; unknown keys rejected;
// command-line flags override file values.
inline void apply_config_file(SessionOptions& opt, const std::string& path,
                              const std::vector<std::string>& overridden) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");

  auto is_overridden = [&](const std::string& key) {
    return std::find(overridden.begin(), overridden.end(), key) != overridden.end();
  };
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "variant") { if (!is_overridden(key)) opt.variant = value.get<std::string>(); }
      else if (key == "positions") { if (!is_overridden(key)) opt.positions = value.get<int>(); }
      else if (key == "decoy_fraction") { if (!is_overridden(key)) opt.decoy_fraction = value.get<double>(); }
      else if (key == "shots") { if (!is_overridden(key)) opt.shots = value.get<std::uint64_t>(); }
      else if (key == "threshold") { if (!is_overridden(key)) opt.threshold = value.get<double>(); }
      else if (key == "swap_ancilla") { if (!is_overridden(key)) opt.swap_ancilla = value.get<std::string>(); }
      else if (key == "seed") { if (!is_overridden(key)) opt.seed = value.get<std::uint64_t>(); }
      else if (key == "adversary") { if (!is_overridden(key)) opt.adversary = value.get<std::string>(); }
      else if (key == "message") { if (!is_overridden(key)) opt.message = value.get<std::string>(); }
      else if (key == "message_file") { if (!is_overridden(key)) opt.message_file = value.get<std::string>(); }
      else if (key == "output") { if (!is_overridden(key)) opt.out.path = value.get<std::string>(); }
      else if (key == "format") { if (!is_overridden(key)) opt.out.format = value.get<std::string>(); }
      else throw std::invalid_argument("config file " + path + ": unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw std::invalid_argument("config file " + path + ", key '" + key + "': " + e.what());
    }
  }
}

inline json session_config_json(const SessionOptions& opt) {
  return {{"variant", opt.variant},
          {"positions", opt.positions},
          {"decoy_fraction", opt.decoy_fraction},
          {"shots", opt.shots},
          {"threshold", opt.threshold},
          {"swap_ancilla", opt.swap_ancilla},
          {"seed", opt.seed},
          {"adversary", opt.adversary},
          {"message", opt.message},
          {"output", opt.out.path},
          {"format", opt.out.format}};
}

inline int cmd_session(SessionOptions opt) {
  Timer timer;
  if (!opt.message_file.empty()) {
    if (!opt.message.empty())
      throw std::invalid_argument("give either --message or --message-file, not both");
    opt.message = read_trimmed_file(opt.message_file);
  }
  const std::string message_bits = bits_from_hex(opt.message);

  ProtocolConfig config;
  config.variant = parse_variant(opt.variant);
  config.num_positions = opt.positions;
  config.decoy_fraction = opt.decoy_fraction;
  config.security_shots = opt.shots;
  config.error_threshold = opt.threshold;
  config.swap_variant = parse_ancilla(opt.swap_ancilla);
  config.seed = RngSeed{opt.seed};
  config.validate_session();

  const AdversarySpec spec = parse_adversary(opt.adversary);
  const AdversaryModel adversary = resolve_adversary(spec, build_round(config));

  const SessionResult result = run_full_session(config, message_bits, adversary);

  json payload = session_json(result);
  payload["message"]["hex_sent"] = opt.message;
  if (result.decision == SessionDecision::Proceed)
    if (auto hex = hex_from_bits(result.decoded_bits)) payload["message"]["hex_decoded"] = *hex;

  emit(result_document("session", session_config_json(opt), std::move(payload),
                       timer.elapsed_ms()),
       opt.out);
  if (result.decision != SessionDecision::Proceed) return exit_terminate;
  return result.message_ok ? exit_ok : exit_internal;
}

// ---------------------------------------------------------------------------
// security-check

struct SecurityCheckOptions {
  std::string claimed;
  std::string received;
  std::uint64_t shots = 8192;
  int repeats = 1;
  double threshold = 0.05;
  double expected = 0.0;  // 0: default for the operand size
  std::string swap_ancilla = "single";
  std::uint64_t seed = 0;
  OutputOptions out;
};

inline int cmd_security_check(const SecurityCheckOptions& opt) {
  Timer timer;
  const StateVector claimed = parse_state(opt.claimed);
  const StateVector received = parse_state(opt.received);
  if (opt.repeats < 1) throw std::invalid_argument("repeats must be positive");
  if (opt.threshold <= 0.0) throw std::invalid_argument("threshold must be positive");

  // Default expectation is the honest same-basis claim value for the size.
  const double expected = opt.expected > 0.0
                              ? opt.expected
                              : (claimed.num_qubits() == 2 ? 1.0 / std::sqrt(2.0) : 0.5);

  json rows = json::array();
  bool any_flagged = false;
  for (int r = 0; r < opt.repeats; ++r) {
    RngStream rng =
        derive_stream(RngSeed{opt.seed}, {stage::table_repeat, std::uint64_t(r)});
    const InnerProductEstimate est = replay_overlap_estimate(
        claimed, received, opt.shots, rng, parse_ancilla(opt.swap_ancilla));
    const double error_rate = std::abs(est.estimate - expected) / expected;
    const bool flagged = error_rate > opt.threshold;
    any_flagged = any_flagged || flagged;
    rows.push_back({{"repeat", r},
                    {"value", est.estimate},
                    {"standard_error", est.standard_error},
                    {"error_rate", error_rate},
                    {"status", flagged ? "Terminate" : "Proceed"}});
  }

  const json config = {{"claimed", opt.claimed}, {"received", opt.received},
                       {"shots", opt.shots},     {"repeats", opt.repeats},
                       {"threshold", opt.threshold}, {"expected", expected},
                       {"swap_ancilla", opt.swap_ancilla}, {"seed", opt.seed},
                       {"output", opt.out.path}, {"format", opt.out.format}};
  const json payload = {{"expected", expected},
                        {"threshold", opt.threshold},
                        {"decision", any_flagged ? "Terminate" : "Proceed"},
                        {"rows", rows}};
  emit(result_document("security-check", config, payload, timer.elapsed_ms()), opt.out);
  return any_flagged ? exit_terminate : exit_ok;
}

// ---------------------------------------------------------------------------
// swap-test

struct SwapTestOptions {
  std::string state1;
  std::string state2;
  std::uint64_t shots = 8192;
  std::string ancilla = "single";
  std::uint64_t seed = 0;
  OutputOptions out;
};

inline int cmd_swap_test(const SwapTestOptions& opt) {
  Timer timer;
  const StateVector s1 = parse_state(opt.state1);
  const StateVector s2 = parse_state(opt.state2);
  const SwapTestVariant variant = parse_ancilla(opt.ancilla);

  const double analytic_p = analytic_p_all_zero(s1, s2, variant);
  const double overlap = std::abs(inner_product(s1, s2));
  RngStream rng = derive_stream(RngSeed{opt.seed}, {stage::table_repeat});
  const InnerProductEstimate est = estimate_inner_product(s1, s2, variant, opt.shots, rng);

  const json config = {{"state1", opt.state1}, {"state2", opt.state2},
                       {"shots", opt.shots},   {"ancilla", opt.ancilla},
                       {"seed", opt.seed},     {"output", opt.out.path},
                       {"format", opt.out.format}};
  const json payload = {{"analytic_p_all_zero", analytic_p},
                        {"analytic_overlap", overlap},
                        {"sampled", estimate_json(est)}};
  emit(result_document("swap-test", config, payload, timer.elapsed_ms()), opt.out);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// swapping-table

struct SwappingTableOptions {
  std::vector<std::string> states;  // two entangled labels, or one symbol string
  OutputOptions out;
};

inline int cmd_swapping_table(const SwappingTableOptions& opt) {
  Timer timer;
  json payload;
  if (opt.states.size() == 2) {
    const std::string& l = opt.states[0];
    const std::string& r = opt.states[1];
    const bool ghz = l.rfind("ghz", 0) == 0;
    if (ghz != (r.rfind("ghz", 0) == 0))
      throw std::invalid_argument("both labels must belong to the same variant");
    json rows = ghz ? swap_table_json(ghz_swapping_table(parse_ghz_label(l), parse_ghz_label(r)))
                    : swap_table_json(swapping_table(parse_bell_label(l), parse_bell_label(r)));
    payload = {{"kind", "swap"}, {"left", l}, {"right", r}, {"rows", std::move(rows)}};
  } else if (opt.states.size() == 1) {
    const std::string& text = opt.states[0];
    if (!is_decoy_symbols(text) || (text.size() != 2 && text.size() != 3))
      throw std::invalid_argument(
          "decoy decomposition needs 2 or 3 preparation symbols over {0,1,+,-}");
    const StateVector state = ket_from_symbols(text);
    json rows = text.size() == 2 ? decoy_table_json(decoy_decomposition(state))
                                 : decoy_table_json(ghz_decoy_decomposition(state));
    payload = {{"kind", "decoy"}, {"state", text}, {"rows", std::move(rows)}};
  } else {
    throw std::invalid_argument(
        "swapping-table takes two entangled labels or one decoy symbol string");
  }

  json config = {{"states", opt.states}, {"output", opt.out.path}, {"format", opt.out.format}};
  emit(result_document("swapping-table", std::move(config), std::move(payload),
                       timer.elapsed_ms()),
       opt.out);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// superdense

struct SuperdenseOptions {
  std::string bits;
  std::string variant = "bell";
  bool mask = false;
  std::uint64_t shots = 1024;
  std::uint64_t seed = 0;
  OutputOptions out;
};

inline int cmd_superdense(const SuperdenseOptions& opt) {
  Timer timer;
  const Variant variant = parse_variant(opt.variant);
  const int width = bits_per_position(variant);
  if (static_cast<int>(opt.bits.size()) != width)
    throw std::invalid_argument("superdense " + opt.variant + " takes exactly " +
                                std::to_string(width) + " bits");
  for (char c : opt.bits)
    if (c != '0' && c != '1') throw std::invalid_argument("bits must be over {0, 1}");
  if (opt.shots == 0) throw std::invalid_argument("shot count must be positive");

  // One message position from the normalized base, encode, optional mask.
  StateVector state =
      variant == Variant::Bell ? prepare_bell(bell_base) : prepare_ghz(ghz_base);
  if (variant == Variant::Bell) {
    if (opt.bits[1] == '1') state.apply(gate::x(0));
    if (opt.bits[0] == '1') state.apply(gate::z(0));
    if (opt.mask) state.apply(gate::z(1));
  } else {
    if (opt.bits[0] == '1') state.apply(gate::x(1));
    if (opt.bits[1] == '1') state.apply(gate::x(0));
    if (opt.bits[2] == '1') state.apply(gate::z(0));
    if (opt.mask) state.apply(gate::z(2));
  }

  // Announced histogram keyed by the label's message-bit presentation.
  RngStream rng = derive_stream(RngSeed{opt.seed}, {stage::message_measure});
  std::map<std::string, std::uint64_t> histogram;
  std::string announced_label;
  for (std::uint64_t shot = 0; shot < opt.shots; ++shot) {
    StateVector copy = state;
    int label;
    if (variant == Variant::Bell) {
      label = static_cast<int>(bell_measure(copy, 0, 1, rng).label);
    } else {
      label = ghz_measure(copy, 0, 1, 2, rng).label.index();
    }
    ++histogram[message_bits_of_label(variant, label)];
    announced_label = announced_label_name(variant, label);
  }

  // Bob undoes his mask on the identified label and inverts the code lookup.
  int observed = variant == Variant::Bell ? static_cast<int>(identify_bell(state))
                                          : identify_ghz(state).index();
  if (opt.mask) {
    observed = variant == Variant::Bell
                   ? static_cast<int>(detail::bell_label_after(
                         static_cast<BellLabel>(observed), false, false, true))
                   : detail::ghz_label_after(GhzLabel::from_index(observed), false, false,
                                             false, true)
                         .index();
  }
  const std::string decoded = message_bits_of_label(variant, observed);

  const json config = {{"variant", opt.variant}, {"bits", opt.bits}, {"mask", opt.mask},
                       {"shots", opt.shots},     {"seed", opt.seed},
                       {"output", opt.out.path}, {"format", opt.out.format}};
  json hist_json = json::object();
  for (const auto& [key, count] : histogram) hist_json[key] = count;
  const json payload = {{"histogram", hist_json},
                        {"announced_label", announced_label},
                        {"decoded_bits", decoded},
                        {"decoded_ok", decoded == opt.bits}};
  emit(result_document("superdense", config, payload, timer.elapsed_ms()), opt.out);
  return decoded == opt.bits ? exit_ok : exit_internal;
}

// ---------------------------------------------------------------------------
// Dispatch.

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Entanglement-swapping secure-messaging protocol simulator"};
  app.require_subcommand(1);

  SessionOptions session;
  std::string session_config_path;
  CLI::App* cmd_session_app = app.add_subcommand("session", "Run a full protocol session");
  cmd_session_app->add_option("--config", session_config_path, "JSON config file");
  cmd_session_app->add_option("--variant", session.variant, "bell | ghz");
  cmd_session_app->add_option("--positions", session.positions, "number of positions");
  cmd_session_app->add_option("--decoy-fraction", session.decoy_fraction,
                              "per-party decoy fraction in (0, 1)");
  cmd_session_app->add_option("--shots", session.shots, "swap-test shots per decoy position");
  cmd_session_app->add_option("--threshold", session.threshold,
                              "relative-error threshold for Terminate");
  cmd_session_app->add_option("--swap-ancilla", session.swap_ancilla, "single | per-qubit");
  cmd_session_app->add_option("--seed", session.seed, "RNG seed");
  cmd_session_app->add_option("--adversary", session.adversary,
                              "none | replace:... | intercept:...");
  cmd_session_app->add_option("--message", session.message, "message as hex digits");
  cmd_session_app->add_option("--message-file", session.message_file,
                              "file containing the hex message");
  cmd_session_app->add_option("--output", session.out.path, "output file (default stdout)");
  cmd_session_app->add_option("--format", session.out.format, "json | csv");

  SecurityCheckOptions security;
  CLI::App* cmd_security_app =
      app.add_subcommand("security-check", "Compare a claimed state against a received state");
  cmd_security_app->add_option("claimed", security.claimed, "claimed state")->required();
  cmd_security_app->add_option("received", security.received, "received state")->required();
  cmd_security_app->add_option("--shots", security.shots, "swap-test shots per repeat");
  cmd_security_app->add_option("--repeats", security.repeats, "independent repeats");
  cmd_security_app->add_option("--threshold", security.threshold, "relative-error threshold");
  cmd_security_app->add_option("--expected", security.expected,
                               "expected estimate (default: honest same-basis value)");
  cmd_security_app->add_option("--swap-ancilla", security.swap_ancilla, "single | per-qubit");
  cmd_security_app->add_option("--seed", security.seed, "RNG seed");
  cmd_security_app->add_option("--output", security.out.path, "output file (default stdout)");
  cmd_security_app->add_option("--format", security.out.format, "json | csv");

  SwapTestOptions swap;
  CLI::App* cmd_swap_app = app.add_subcommand("swap-test", "Sampled overlap of two states");
  cmd_swap_app->add_option("state1", swap.state1, "first state")->required();
  cmd_swap_app->add_option("state2", swap.state2, "second state")->required();
  cmd_swap_app->add_option("--shots", swap.shots, "measurement shots");
  cmd_swap_app->add_option("--ancilla", swap.ancilla, "single | per-qubit");
  cmd_swap_app->add_option("--seed", swap.seed, "RNG seed");
  cmd_swap_app->add_option("--output", swap.out.path, "output file (default stdout)");
  cmd_swap_app->add_option("--format", swap.out.format, "json | csv");

  SwappingTableOptions table;
  CLI::App* cmd_table_app = app.add_subcommand(
      "swapping-table", "Exact outcome table for labels or a decoy product");
  cmd_table_app->add_option("states", table.states,
                            "two entangled labels, or one decoy symbol string");
  cmd_table_app->add_option("--output", table.out.path, "output file (default stdout)");
  cmd_table_app->add_option("--format", table.out.format, "json | csv");

  SuperdenseOptions dense;
  CLI::App* cmd_dense_app =
      app.add_subcommand("superdense", "Encode bits on one message position and announce");
  cmd_dense_app->add_option("bits", dense.bits, "message bits for one position")->required();
  cmd_dense_app->add_option("--variant", dense.variant, "bell | ghz");
  cmd_dense_app->add_flag("--mask", dense.mask, "apply the receiving party's phase mask");
  cmd_dense_app->add_option("--shots", dense.shots, "announcement shots");
  cmd_dense_app->add_option("--seed", dense.seed, "RNG seed");
  cmd_dense_app->add_option("--output", dense.out.path, "output file (default stdout)");
  cmd_dense_app->add_option("--format", dense.out.format, "json | csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (cmd_session_app->parsed()) {
      if (!session_config_path.empty()) {
        std::vector<std::string> overridden;
        for (const auto* option : cmd_session_app->get_options()) {
          if (option->count() == 0) continue;
          std::string name = option->get_name();
          if (name.rfind("--", 0) == 0) name = name.substr(2);
          std::replace(name.begin(), name.end(), '-', '_');
          overridden.push_back(name);
        }
        apply_config_file(session, session_config_path, overridden);
      }
      return cmd_session(session);
    }
    if (cmd_security_app->parsed()) return cmd_security_check(security);
    if (cmd_swap_app->parsed()) return cmd_swap_test(swap);
    if (cmd_table_app->parsed()) return cmd_swapping_table(table);
    if (cmd_dense_app->parsed()) return cmd_superdense(dense);
    std::cerr << "no command selected\n";
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
}

}  // namespace qsdc::cli
