#pragma once

// Three-party protocol engine: round construction, quantum channel with
// adversary models, the third party's entangled-basis measurements and
// announcements, the decoy security decision, Z-normalization, superdense
// encoding under Bob's random mask, and decoding.
//
// Register layouts per position (qubit roles in order):
//   bell pair/pair    [A, C1, B, C2]             retained A; B   transit C1; C2
//   bell decoy/decoy  [C1, C2]
//   bell mixed        [A, C1, C2] or [C1, B, C2]
//   ghz  pair/pair    [A1, A2, C1, B, C2, C3]    retained A1 A2; B
//   ghz  decoy/decoy  [C1, C2, C3]               Alice sends 1, Bob sends 2
//   ghz  mixed        [A1, A2, C1, C2, C3] or [C1, B, C2, C3]
// The third party measures the transit qubits (forward phase) or the retained
// qubits (message phase) in the entangled basis of the variant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdc/entangle.hpp"
#include "qsdc/labels.hpp"
#include "qsdc/state.hpp"
#include "qsdc/swap_test.hpp"

namespace qsdc {

// ---------------------------------------------------------------------------

enum class PositionKind { PairPair, DecoyDecoy, Mixed };

inline std::string to_string(PositionKind kind) {
  switch (kind) {
    case PositionKind::PairPair: return "pair-pair";
    case PositionKind::DecoyDecoy: return "decoy-decoy";
    case PositionKind::Mixed: return "mixed";
  }
  throw std::invalid_argument("bad position kind");
}

enum class SessionDecision { Proceed, Terminate };

inline std::string to_string(SessionDecision decision) {
  return decision == SessionDecision::Proceed ? "Proceed" : "Terminate";
}

struct ProtocolConfig {
  Variant variant = Variant::Bell;
  int num_positions = 64;
  double decoy_fraction = 0.25;
  std::uint64_t security_shots = 8192;
  // Session default 0.15: at 8192 shots the noisiest honest claim sits 7
  // sigma inside while the |+> -> |0> replacement attack sits 9+ sigma
  // outside. Table-style single checks use 0.05 (see the cli layer).
  double error_threshold = 0.15;
  SwapTestVariant swap_variant = SwapTestVariant::SingleAncilla;
  RngSeed seed{0};

  // Round construction allows the degenerate fractions (all pairs / all
  // decoys); a full session needs both kinds, hence the open interval.
  void validate_round() const {
    if (num_positions < 1) throw std::invalid_argument("num_positions must be positive");
    if (decoy_fraction < 0.0 || decoy_fraction > 1.0)
      throw std::invalid_argument("decoy_fraction must lie in [0, 1]");
    if (security_shots == 0) throw std::invalid_argument("security_shots must be positive");
    if (error_threshold <= 0.0) throw std::invalid_argument("error_threshold must be positive");
  }

  void validate_session() const {
    validate_round();
    if (num_positions < 4) throw std::invalid_argument("a session needs at least 4 positions");
    if (decoy_fraction <= 0.0 || decoy_fraction >= 1.0)
      throw std::invalid_argument("a session needs decoy_fraction strictly inside (0, 1)");
  }
};

// Stream ids for deriving independent randomness per protocol stage.
namespace stage {
inline constexpr std::uint64_t alice_decoy_pick = 1;
inline constexpr std::uint64_t bob_decoy_pick = 2;
inline constexpr std::uint64_t alice_prep = 3;
inline constexpr std::uint64_t bob_prep = 4;
inline constexpr std::uint64_t forward_channel = 5;
inline constexpr std::uint64_t forward_measure = 6;
inline constexpr std::uint64_t security = 7;
inline constexpr std::uint64_t mask = 8;
inline constexpr std::uint64_t message_channel = 9;
inline constexpr std::uint64_t message_measure = 10;
inline constexpr std::uint64_t table_repeat = 11;
}  // namespace stage

// ---------------------------------------------------------------------------
// Round state.

struct PartyPrep {
  bool decoy = false;
  BellLabel bell = BellLabel::PsiPlus;  // bell variant, entangled prep
  GhzLabel ghz{};                       // ghz variant, entangled prep
  std::string symbols;                  // decoy prep, one char per sent qubit

  std::string describe(Variant variant) const {
    if (decoy) return symbols;
    return variant == Variant::Bell ? to_string(bell) : to_string(ghz);
  }
};

struct Position {
  int index = 0;
  PositionKind kind = PositionKind::PairPair;
  PartyPrep alice, bob;
  StateVector reg{1};
  std::vector<int> alice_retained, alice_transit, bob_retained, bob_transit;
  int announced = -1;  // forward-phase basis label index, -1 before announce
  bool discarded = false;
  // message phase:
  bool message_position = false;
  std::string encoded_bits;
  bool masked = false;
  int message_announced = -1;
};

struct Round {
  ProtocolConfig config;
  std::vector<Position> positions;
  bool announced_forward = false;
  bool normalized = false;
  std::string message_bits;  // padded to capacity once encoded
};

// ---------------------------------------------------------------------------
// Adversary models. Transformations apply only to qubits in transit to the
// measuring party: FixedReplace swaps one forward-phase transit qubit for a
// fresh symbol state; InterceptResend measures each traveling qubit with the
// given probability in the given basis and forwards the collapse.

struct AdversaryModel {
  enum class Kind { None, FixedReplace, InterceptResend };
  enum class Line { Alice, Bob };
  enum class Basis { Computational, Hadamard };

  Kind kind = Kind::None;
  // FixedReplace:
  Line line = Line::Alice;
  int position = 0;
  char replacement = '0';
  int line_qubit = 0;  // index into that line's transit-qubit list
  // InterceptResend:
  Basis basis = Basis::Computational;
  double probability = 1.0;

  static AdversaryModel none() { return {}; }

  static AdversaryModel fixed_replace(Line line, int position, char replacement,
                                      int line_qubit = 0) {
    AdversaryModel adv;
    adv.kind = Kind::FixedReplace;
    adv.line = line;
    adv.position = position;
    adv.replacement = replacement;
    adv.line_qubit = line_qubit;
    if (replacement != '0' && replacement != '1' && replacement != '+' && replacement != '-')
      throw std::invalid_argument("replacement state must be one of 0, 1, +, -");
    if (position < 0) throw std::invalid_argument("adversary position must be non-negative");
    if (line_qubit < 0) throw std::invalid_argument("adversary line qubit must be non-negative");
    return adv;
  }

  static AdversaryModel intercept_resend(Basis basis, double probability) {
    AdversaryModel adv;
    adv.kind = Kind::InterceptResend;
    adv.basis = basis;
    adv.probability = probability;
    if (probability < 0.0 || probability > 1.0)
      throw std::invalid_argument("interception probability must lie in [0, 1]");
    return adv;
  }
};

enum class TransmitPhase { Forward, Message };

// ---------------------------------------------------------------------------
// Round construction.

namespace detail {

inline int uniform_below(RngStream& rng, int n) {
  const int k = static_cast<int>(rng.uniform() * n);
  return k >= n ? n - 1 : k;
}

// n_pick distinct indices in [0, n) via a partial Fisher-Yates shuffle.
inline std::vector<bool> pick_distinct(int n, int n_pick, RngStream rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 0; i < n_pick; ++i)
    std::swap(order[i], order[i + uniform_below(rng, n - i)]);
  std::vector<bool> picked(n, false);
  for (int i = 0; i < n_pick; ++i) picked[order[i]] = true;
  return picked;
}

inline PartyPrep make_prep(Variant variant, bool decoy, int decoy_qubits, RngStream rng) {
  PartyPrep prep;
  prep.decoy = decoy;
  if (decoy) {
    static constexpr char symbols[4] = {'0', '1', '+', '-'};
    for (int q = 0; q < decoy_qubits; ++q) prep.symbols += symbols[uniform_below(rng, 4)];
  } else if (variant == Variant::Bell) {
    prep.bell = rng.bernoulli(0.5) ? BellLabel::PsiMinus : BellLabel::PsiPlus;
  } else {
    prep.ghz = GhzLabel{0, 0, rng.bernoulli(0.5) ? 1 : 0};
  }
  return prep;
}

inline StateVector prep_state(Variant variant, const PartyPrep& prep) {
  if (prep.decoy) return ket_from_symbols(prep.symbols);
  return variant == Variant::Bell ? prepare_bell(prep.bell) : prepare_ghz(prep.ghz);
}

inline Position assemble_position(Variant variant, int index, PartyPrep alice, PartyPrep bob) {
  Position pos;
  pos.index = index;
  pos.kind = alice.decoy ? (bob.decoy ? PositionKind::DecoyDecoy : PositionKind::Mixed)
                         : (bob.decoy ? PositionKind::Mixed : PositionKind::PairPair);
  // Entangled preps place their transit qubits last: bell (A, C1); ghz
  // (A1, A2, C1) for Alice and (B, C2, C3) for Bob.
  const StateVector alice_state = prep_state(variant, alice);
  const StateVector bob_state = prep_state(variant, bob);
  pos.reg = alice_state.tensor(bob_state);

  int next = 0;
  if (variant == Variant::Bell) {
    if (!alice.decoy) pos.alice_retained.push_back(next++);
    pos.alice_transit.push_back(next++);
    if (!bob.decoy) pos.bob_retained.push_back(next++);
    pos.bob_transit.push_back(next++);
  } else {
    if (!alice.decoy) {
      pos.alice_retained.push_back(next++);
      pos.alice_retained.push_back(next++);
    }
    pos.alice_transit.push_back(next++);
    if (!bob.decoy) pos.bob_retained.push_back(next++);
    pos.bob_transit.push_back(next++);
    pos.bob_transit.push_back(next++);
  }
  pos.alice = std::move(alice);
  pos.bob = std::move(bob);
  return pos;
}

}  // namespace detail

inline Round build_round(const ProtocolConfig& config) {
  config.validate_round();
  const int n = config.num_positions;
  const int n_decoy = static_cast<int>(std::llround(config.decoy_fraction * n));
  const std::vector<bool> alice_decoy = detail::pick_distinct(
      n, n_decoy, derive_stream(config.seed, {stage::alice_decoy_pick}));
  const std::vector<bool> bob_decoy = detail::pick_distinct(
      n, n_decoy, derive_stream(config.seed, {stage::bob_decoy_pick}));

  const int bob_decoy_qubits = config.variant == Variant::Bell ? 1 : 2;
  Round round;
  round.config = config;
  round.positions.reserve(n);
  for (int i = 0; i < n; ++i) {
    PartyPrep alice =
        detail::make_prep(config.variant, alice_decoy[i], 1,
                          derive_stream(config.seed, {stage::alice_prep, std::uint64_t(i)}));
    PartyPrep bob =
        detail::make_prep(config.variant, bob_decoy[i], bob_decoy_qubits,
                          derive_stream(config.seed, {stage::bob_prep, std::uint64_t(i)}));
    round.positions.push_back(
        detail::assemble_position(config.variant, i, std::move(alice), std::move(bob)));
  }
  return round;
}

// One position's preparation as text: an entangled label ("psi+", "ghz000")
// or decoy symbols ("+", "-", "10"). Used for fixed layouts in tests and the
// table tooling.
struct PositionSpec {
  std::string alice;
  std::string bob;
};

inline Round build_round_from_layout(const ProtocolConfig& base_config,
                                     const std::vector<PositionSpec>& layout) {
  ProtocolConfig config = base_config;
  config.num_positions = static_cast<int>(layout.size());
  config.validate_round();

  auto parse_prep = [&](const std::string& text, int decoy_qubits) {
    PartyPrep prep;
    if (config.variant == Variant::Bell && (text.rfind("psi", 0) == 0 || text.rfind("phi", 0) == 0)) {
      prep.bell = parse_bell_label(text);
      return prep;
    }
    if (config.variant == Variant::Ghz && text.rfind("ghz", 0) == 0) {
      prep.ghz = parse_ghz_label(text);
      return prep;
    }
    if (!is_decoy_symbols(text) || static_cast<int>(text.size()) != decoy_qubits)
      throw std::invalid_argument("position prep must be an entangled label or " +
                                  std::to_string(decoy_qubits) + " decoy symbol(s): " + text);
    prep.decoy = true;
    prep.symbols = text;
    return prep;
  };

  const int bob_decoy_qubits = config.variant == Variant::Bell ? 1 : 2;
  Round round;
  round.config = config;
  round.positions.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i)
    round.positions.push_back(detail::assemble_position(
        config.variant, static_cast<int>(i), parse_prep(layout[i].alice, 1),
        parse_prep(layout[i].bob, bob_decoy_qubits)));
  return round;
}

// ---------------------------------------------------------------------------
// Channel.

namespace detail {

inline void collapse_to_symbol(StateVector& reg, int qubit, char symbol, RngStream& rng) {
  const MeasureResult m = measure(reg, {qubit}, rng);
  reg = m.state;
  if (m.bits == "1") reg.apply(gate::x(qubit));  // reset to |0>
  switch (symbol) {
    case '0': break;
    case '1': reg.apply(gate::x(qubit)); break;
    case '+': reg.apply(gate::h(qubit)); break;
    case '-':
      reg.apply(gate::x(qubit));
      reg.apply(gate::h(qubit));
      break;
    default: throw std::invalid_argument("replacement state must be one of 0, 1, +, -");
  }
}

inline void intercept_qubits(StateVector& reg, const std::vector<int>& qubits,
                             const AdversaryModel& adv, RngStream& rng) {
  for (int q : qubits) {
    if (!rng.bernoulli(adv.probability)) continue;
    if (adv.basis == AdversaryModel::Basis::Hadamard) reg.apply(gate::h(q));
    reg = measure(reg, {q}, rng).state;
    if (adv.basis == AdversaryModel::Basis::Hadamard) reg.apply(gate::h(q));
  }
}

// Traveling qubits of one position for the given phase, Alice's line first.
inline std::pair<std::vector<int>, std::vector<int>> traveling_qubits(const Position& pos,
                                                                      TransmitPhase phase) {
  if (phase == TransmitPhase::Forward) return {pos.alice_transit, pos.bob_transit};
  return {pos.alice_retained, pos.bob_retained};
}

inline void apply_adversary_at(Position& pos, TransmitPhase phase, const AdversaryModel& adv,
                               RngStream& rng) {
  const auto [alice_line, bob_line] = traveling_qubits(pos, phase);
  switch (adv.kind) {
    case AdversaryModel::Kind::None: return;
    case AdversaryModel::Kind::FixedReplace: {
      // Replacement targets the forward transmission only.
      if (phase != TransmitPhase::Forward || adv.position != pos.index) return;
      const auto& line = adv.line == AdversaryModel::Line::Alice ? alice_line : bob_line;
      if (adv.line_qubit >= static_cast<int>(line.size()))
        throw std::invalid_argument("adversary targets a qubit that is not in transit");
      collapse_to_symbol(pos.reg, line[adv.line_qubit], adv.replacement, rng);
      return;
    }
    case AdversaryModel::Kind::InterceptResend: {
      intercept_qubits(pos.reg, alice_line, adv, rng);
      intercept_qubits(pos.reg, bob_line, adv, rng);
      return;
    }
  }
}

}  // namespace detail

inline void transmit(Round& round, TransmitPhase phase, const AdversaryModel& adversary) {
  if (adversary.kind == AdversaryModel::Kind::FixedReplace &&
      phase == TransmitPhase::Forward &&
      adversary.position >= static_cast<int>(round.positions.size()))
    throw std::invalid_argument("adversary position exceeds the round size");
  const std::uint64_t tag =
      phase == TransmitPhase::Forward ? stage::forward_channel : stage::message_channel;
  for (Position& pos : round.positions) {
    if (pos.discarded) continue;
    RngStream rng = derive_stream(round.config.seed, {tag, std::uint64_t(pos.index)});
    detail::apply_adversary_at(pos, phase, adversary, rng);
  }
}

// ---------------------------------------------------------------------------
// Announcements (forward phase and message phase).

namespace detail {

// Measure one position's target qubits in the variant's entangled basis.
inline int entangled_measure_index(Variant variant, StateVector& reg,
                                   const std::vector<int>& qubits, RngStream& rng) {
  if (variant == Variant::Bell) {
    auto m = bell_measure(reg, qubits.at(0), qubits.at(1), rng);
    reg = std::move(m.state);
    return static_cast<int>(m.label);
  }
  auto m = ghz_measure(reg, qubits.at(0), qubits.at(1), qubits.at(2), rng);
  reg = std::move(m.state);
  return m.label.index();
}

inline std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace detail

inline std::string announced_label_name(Variant variant, int index) {
  if (index < 0) throw std::invalid_argument("no announcement recorded");
  if (variant == Variant::Bell) return to_string(static_cast<BellLabel>(index));
  return to_string(GhzLabel::from_index(index));
}

inline void charlie_announce(Round& round) {
  for (Position& pos : round.positions) {
    RngStream rng =
        derive_stream(round.config.seed, {stage::forward_measure, std::uint64_t(pos.index)});
    pos.announced = detail::entangled_measure_index(
        round.config.variant, pos.reg,
        detail::concat(pos.alice_transit, pos.bob_transit), rng);
    if (pos.kind == PositionKind::Mixed) {
      // The lone retained qubit must decouple after the collapse; anything
      // else is an engine bookkeeping fault, not a protocol event.
      const auto& retained =
          pos.alice_retained.empty() ? pos.bob_retained : pos.alice_retained;
      if (std::abs(reduced_purity(pos.reg, retained) - 1.0) > 1e-6)
        throw std::logic_error("mixed-position retained qubits failed the purity check");
      pos.discarded = true;
    }
  }
  round.announced_forward = true;
}

inline void charlie_announce_message(Round& round) {
  if (!round.normalized) throw std::invalid_argument("message phase requires normalization");
  for (Position& pos : round.positions) {
    if (!pos.message_position) continue;
    RngStream rng =
        derive_stream(round.config.seed, {stage::message_measure, std::uint64_t(pos.index)});
    pos.message_announced = detail::entangled_measure_index(
        round.config.variant, pos.reg,
        detail::concat(pos.alice_retained, pos.bob_retained), rng);
  }
}

// ---------------------------------------------------------------------------
// Security check. For each decoy/decoy position the claimed product state is
// compared against the collapsed basis state behind the announcement with a
// sampled swap test. Every shot re-runs channel + collapse, so the estimate
// converges to sqrt(sum_o P(o | received) |<o | claimed>|^2); honestly that
// equals the claimed decomposition's in-support amplitude magnitude, which is
// also the reported expected value sqrt(sum amp^4).

struct SecurityPositionCheck {
  int position = 0;
  std::string claimed;  // Alice's then Bob's decoy symbols
  double expected = 0.0;
  InnerProductEstimate estimate;
  double relative_error = 0.0;
  bool flagged = false;
};

struct SecurityReport {
  std::vector<SecurityPositionCheck> checks;
  double threshold = 0.0;
  std::uint64_t shots_per_position = 0;
  bool insufficient_sample = false;  // no decoy/decoy positions to check
  double max_relative_error = 0.0;
  SessionDecision decision = SessionDecision::Terminate;
};

namespace detail {

inline StateVector basis_state(Variant variant, int label_index) {
  if (variant == Variant::Bell) return prepare_bell(static_cast<BellLabel>(label_index));
  return prepare_ghz(GhzLabel::from_index(label_index));
}

// Distribution of entangled-basis outcomes (by label index) for a register
// holding only the measured qubits.
inline std::vector<double> announce_distribution(Variant variant, const StateVector& state) {
  StateVector work = state;
  std::vector<int> qubits;
  if (variant == Variant::Bell) {
    work.apply(bell_unrotate(0, 1));
    qubits = {0, 1};
  } else {
    work.apply(ghz_unrotate(0, 1, 2));
    qubits = {0, 1, 2};
  }
  const std::vector<double> by_bits = outcome_distribution(work, qubits);
  std::vector<double> by_label(by_bits.size(), 0.0);
  for (std::size_t bits = 0; bits < by_bits.size(); ++bits) {
    const int label = variant == Variant::Bell
                          ? static_cast<int>(bell_bit_lookup().label_of_bits[bits])
                          : ghz_bit_lookup().label_of_bits[bits].index();
    by_label[std::size_t(label)] = by_bits[bits];
  }
  return by_label;
}

// Honest-channel limit of the replay estimator: sqrt(2 p - 1) with
// p = sum_o P(o) p_zero(claimed, o). With a single ancilla this reduces to
// sqrt(sum_o amp_o^4); the per-qubit variant has its own (lower) limit.
inline double expected_overlap(Variant variant, const StateVector& claimed,
                               SwapTestVariant swap_variant) {
  double p = 0.0;
  auto accumulate = [&](double amplitude, const StateVector& outcome) {
    p += amplitude * amplitude * analytic_p_all_zero(claimed, outcome, swap_variant);
  };
  if (variant == Variant::Bell) {
    for (const auto& term : decoy_decomposition(claimed))
      accumulate(term.amplitude, prepare_bell(term.label));
  } else {
    for (const auto& term : ghz_decoy_decomposition(claimed))
      accumulate(term.amplitude, prepare_ghz(term.label));
  }
  return std::sqrt(std::max(0.0, 2.0 * p - 1.0));
}

// The claimed decoy product rebuilt with the adversary applied, as the third
// party receives it on a register holding only this position's transit qubits.
inline StateVector received_decoy_state(const Position& pos, const AdversaryModel& adv,
                                        RngStream& rng) {
  StateVector reg = ket_from_symbols(pos.alice.symbols + pos.bob.symbols);
  Position probe;  // minimal stand-in with transit-only qubit roles
  probe.index = pos.index;
  probe.kind = PositionKind::DecoyDecoy;
  probe.reg = std::move(reg);
  probe.alice_transit = {0};
  probe.bob_transit.clear();
  for (int q = 1; q < probe.reg.num_qubits(); ++q) probe.bob_transit.push_back(q);
  apply_adversary_at(probe, TransmitPhase::Forward, adv, rng);
  return probe.reg;
}

}  // namespace detail

// Collapse-replay estimator: the received state is measured in the entangled
// basis, and each shot runs the ancilla readout of a swap test between the
// claimed state and the collapsed basis state. Converges to
// sqrt(sum_o P(o | received) |<o | claimed>|^2).
inline InnerProductEstimate replay_overlap_estimate(const StateVector& claimed,
                                                    const StateVector& received,
                                                    std::uint64_t shots, RngStream& rng,
                                                    SwapTestVariant swap_variant) {
  if (claimed.num_qubits() != received.num_qubits())
    throw std::invalid_argument("claimed and received states must have the same qubit count");
  if (claimed.num_qubits() < 2 || claimed.num_qubits() > 3)
    throw std::invalid_argument("entangled-basis replay needs a 2- or 3-qubit state");
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  const Variant variant = claimed.num_qubits() == 2 ? Variant::Bell : Variant::Ghz;
  const int num_labels = variant == Variant::Bell ? 4 : 8;

  std::vector<double> p_zero(std::size_t(num_labels), 0.0);
  for (int l = 0; l < num_labels; ++l)
    p_zero[std::size_t(l)] =
        analytic_p_all_zero(claimed, detail::basis_state(variant, l), swap_variant);
  const std::vector<double> dist = detail::announce_distribution(variant, received);

  std::uint64_t zeros = 0;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    const std::size_t outcome = detail::draw_outcome(dist, rng);
    if (rng.bernoulli(p_zero[outcome])) ++zeros;
  }
  return estimate_from_p(static_cast<double>(zeros) / static_cast<double>(shots), shots);
}

inline SecurityReport run_security_check(const Round& round, const AdversaryModel& adversary,
                                         RngSeed security_seed, std::uint64_t shots_per_position,
                                         double threshold, SwapTestVariant swap_variant) {
  if (!round.announced_forward)
    throw std::invalid_argument("security check requires forward announcements");
  if (shots_per_position == 0) throw std::invalid_argument("shot count must be positive");
  if (threshold <= 0.0) throw std::invalid_argument("error_threshold must be positive");

  const Variant variant = round.config.variant;
  SecurityReport report;
  report.threshold = threshold;
  report.shots_per_position = shots_per_position;

  const int num_labels = variant == Variant::Bell ? 4 : 8;
  const bool channel_is_stochastic = adversary.kind == AdversaryModel::Kind::InterceptResend;

  for (const Position& pos : round.positions) {
    if (pos.kind != PositionKind::DecoyDecoy) continue;
    SecurityPositionCheck check;
    check.position = pos.index;
    check.claimed = pos.alice.symbols + pos.bob.symbols;

    const StateVector claimed = ket_from_symbols(check.claimed);
    check.expected = detail::expected_overlap(variant, claimed, swap_variant);

    RngStream rng = derive_stream(security_seed, {stage::security, std::uint64_t(pos.index)});
    if (!channel_is_stochastic) {
      // Deterministic channel: the received state is fixed, so one replay
      // covers all shots.
      const StateVector received = detail::received_decoy_state(pos, adversary, rng);
      check.estimate =
          replay_overlap_estimate(claimed, received, shots_per_position, rng, swap_variant);
    } else {
      // Per-shot channel randomness: rebuild the received state every shot.
      std::vector<double> p_zero(std::size_t(num_labels), 0.0);
      for (int l = 0; l < num_labels; ++l)
        p_zero[std::size_t(l)] =
            analytic_p_all_zero(claimed, detail::basis_state(variant, l), swap_variant);
      std::uint64_t zeros = 0;
      for (std::uint64_t shot = 0; shot < shots_per_position; ++shot) {
        const std::vector<double> dist = detail::announce_distribution(
            variant, detail::received_decoy_state(pos, adversary, rng));
        const std::size_t outcome = detail::draw_outcome(dist, rng);
        if (rng.bernoulli(p_zero[outcome])) ++zeros;
      }
      check.estimate = estimate_from_p(
          static_cast<double>(zeros) / static_cast<double>(shots_per_position),
          shots_per_position);
    }
    check.relative_error = std::abs(check.estimate.estimate - check.expected) / check.expected;
    check.flagged = check.relative_error > threshold;
    report.max_relative_error = std::max(report.max_relative_error, check.relative_error);
    report.checks.push_back(std::move(check));
  }

  if (report.checks.empty()) {
    report.insufficient_sample = true;
    report.decision = SessionDecision::Terminate;
    return report;
  }
  const bool any_flagged =
      std::any_of(report.checks.begin(), report.checks.end(),
                  [](const SecurityPositionCheck& c) { return c.flagged; });
  report.decision = any_flagged ? SessionDecision::Terminate : SessionDecision::Proceed;
  return report;
}

inline SecurityReport run_security_check(const Round& round, const AdversaryModel& adversary) {
  return run_security_check(round, adversary, round.config.seed, round.config.security_shots,
                            round.config.error_threshold, round.config.swap_variant);
}

// ---------------------------------------------------------------------------
// Normalization: after Proceed, Alice phase-flips her retained qubit at every
// message position she prepared with the off-base label, leaving the shared
// residuals as if she had prepared psi- (bell) / ghz000 (ghz) throughout.

inline constexpr BellLabel bell_base = BellLabel::PsiMinus;
inline constexpr GhzLabel ghz_base{0, 0, 0};

inline void normalize_alice(Round& round, const SecurityReport& report) {
  if (report.decision != SessionDecision::Proceed)
    throw std::invalid_argument("normalization requires a Proceed decision");
  if (!round.announced_forward)
    throw std::invalid_argument("normalization requires forward announcements");
  for (Position& pos : round.positions) {
    if (pos.kind != PositionKind::PairPair) continue;
    pos.message_position = true;
    if (round.config.variant == Variant::Bell) {
      if (pos.alice.bell != bell_base) pos.reg.apply(gate::z(pos.alice_retained[0]));
    } else {
      if (!(pos.alice.ghz == ghz_base)) pos.reg.apply(gate::z(pos.alice_retained[0]));
    }
  }
  round.normalized = true;
}

// ---------------------------------------------------------------------------
// Superdense code. Generated lookups relative to the normalized base states:
// bell bits (b1, b2) apply X^(b2) then Z^(b1) on Alice's qubit; ghz bits
// (m1, m2, m3) apply X^(m1) on A2, X^(m2) on A1, Z^(m3) on A1. Announced
// message-phase labels are presented as the bit pattern that encodes them
// from the base, which reproduces the published histogram labels.

namespace detail {

inline BellLabel bell_label_after(BellLabel start, bool x_a, bool z_a, bool z_b) {
  StateVector s = prepare_bell(start);
  if (x_a) s.apply(gate::x(0));
  if (z_a) s.apply(gate::z(0));
  if (z_b) s.apply(gate::z(1));
  return identify_bell(s);
}

inline GhzLabel ghz_label_after(GhzLabel start, bool x_a2, bool x_a1, bool z_a1, bool z_b) {
  StateVector s = prepare_ghz(start);
  if (x_a2) s.apply(gate::x(1));
  if (x_a1) s.apply(gate::x(0));
  if (z_a1) s.apply(gate::z(0));
  if (z_b) s.apply(gate::z(2));
  return identify_ghz(s);
}

template <int N>
struct CodeTable {
  std::array<int, N> label_of_bits;  // encoding applied to the base state
  std::array<int, N> bits_of_label;
};

inline const CodeTable<4>& bell_code() {
  static const CodeTable<4> table = [] {
    CodeTable<4> t{};
    std::array<bool, 4> seen{};
    for (int bits = 0; bits < 4; ++bits) {
      const int label = static_cast<int>(
          bell_label_after(bell_base, (bits & 1) != 0, (bits & 2) != 0, false));
      t.label_of_bits[std::size_t(bits)] = label;
      t.bits_of_label[std::size_t(label)] = bits;
      seen[std::size_t(label)] = true;
    }
    for (bool s : seen)
      if (!s) std::abort();  // encoding must reach every label exactly once
    return t;
  }();
  return table;
}

inline const CodeTable<8>& ghz_code() {
  static const CodeTable<8> table = [] {
    CodeTable<8> t{};
    std::array<bool, 8> seen{};
    for (int bits = 0; bits < 8; ++bits) {
      const bool m1 = (bits & 4) != 0, m2 = (bits & 2) != 0, m3 = (bits & 1) != 0;
      const int label = ghz_label_after(ghz_base, m1, m2, m3, false).index();
      t.label_of_bits[std::size_t(bits)] = label;
      t.bits_of_label[std::size_t(label)] = bits;
      seen[std::size_t(label)] = true;
    }
    for (bool s : seen)
      if (!s) std::abort();
    return t;
  }();
  return table;
}

inline std::string bits_string(int value, int width) {
  std::string out(std::size_t(width), '0');
  for (int i = 0; i < width; ++i)
    if (value & (1 << (width - 1 - i))) out[std::size_t(i)] = '1';
  return out;
}

}  // namespace detail

inline int bits_per_position(Variant variant) { return variant == Variant::Bell ? 2 : 3; }

// Announced message-phase label rendered as its encoding bit pattern.
inline std::string message_bits_of_label(Variant variant, int label_index) {
  if (variant == Variant::Bell)
    return detail::bits_string(detail::bell_code().bits_of_label.at(std::size_t(label_index)), 2);
  return detail::bits_string(detail::ghz_code().bits_of_label.at(std::size_t(label_index)), 3);
}

inline int message_capacity(const Round& round) {
  int pairs = 0;
  for (const Position& pos : round.positions)
    if (pos.kind == PositionKind::PairPair) ++pairs;
  return pairs * bits_per_position(round.config.variant);
}

inline void encode_superdense(Round& round, const std::string& message_bits) {
  if (!round.normalized) throw std::invalid_argument("encoding requires normalization");
  for (char bit : message_bits)
    if (bit != '0' && bit != '1')
      throw std::invalid_argument("message bits must be a string over {0, 1}");
  const int capacity = message_capacity(round);
  if (static_cast<int>(message_bits.size()) > capacity)
    throw std::invalid_argument("message of " + std::to_string(message_bits.size()) +
                                " bits exceeds session capacity " + std::to_string(capacity));
  std::string padded = message_bits;
  padded.resize(std::size_t(capacity), '0');
  round.message_bits = message_bits;

  std::size_t cursor = 0;
  const int width = bits_per_position(round.config.variant);
  for (Position& pos : round.positions) {
    if (!pos.message_position) continue;
    pos.encoded_bits = padded.substr(cursor, std::size_t(width));
    cursor += std::size_t(width);
    if (round.config.variant == Variant::Bell) {
      if (pos.encoded_bits[1] == '1') pos.reg.apply(gate::x(pos.alice_retained[0]));
      if (pos.encoded_bits[0] == '1') pos.reg.apply(gate::z(pos.alice_retained[0]));
    } else {
      if (pos.encoded_bits[0] == '1') pos.reg.apply(gate::x(pos.alice_retained[1]));
      if (pos.encoded_bits[1] == '1') pos.reg.apply(gate::x(pos.alice_retained[0]));
      if (pos.encoded_bits[2] == '1') pos.reg.apply(gate::z(pos.alice_retained[0]));
    }
  }
}

inline void bob_mask(Round& round) {
  if (!round.normalized) throw std::invalid_argument("masking requires normalization");
  for (Position& pos : round.positions) {
    if (!pos.message_position) continue;
    RngStream rng = derive_stream(round.config.seed, {stage::mask, std::uint64_t(pos.index)});
    pos.masked = rng.bernoulli(0.5);
    if (pos.masked) pos.reg.apply(gate::z(pos.bob_retained[0]));
  }
}

// ---------------------------------------------------------------------------
// Decoding. Bob undoes his mask on the announced label, looks up the shared
// residual the swap left behind (Alice's label is the base after
// normalization), and inverts the encoding lookup.

namespace detail {

inline BellLabel bell_residual_for(BellLabel alice, BellLabel bob, BellLabel outcome) {
  for (const auto& term : swapping_table(alice, bob))
    if (term.outcome == outcome) return term.residual;
  throw std::logic_error("announced outcome is absent from the swapping table");
}

inline GhzLabel ghz_residual_for(GhzLabel alice, GhzLabel bob, GhzLabel outcome) {
  for (const auto& term : ghz_swapping_table(alice, bob))
    if (term.outcome == outcome) return term.residual;
  throw std::logic_error("announced outcome is absent from the swapping table");
}

}  // namespace detail

inline std::string decode_message(const Round& round) {
  const Variant variant = round.config.variant;
  const int width = bits_per_position(variant);
  std::string decoded;
  for (const Position& pos : round.positions) {
    if (!pos.message_position) continue;
    if (pos.message_announced < 0)
      throw std::invalid_argument("message-phase announcement missing at position " +
                                  std::to_string(pos.index));
    if (variant == Variant::Bell) {
      BellLabel label = static_cast<BellLabel>(pos.message_announced);
      if (pos.masked) label = detail::bell_label_after(label, false, false, true);
      const BellLabel residual = detail::bell_residual_for(
          bell_base, pos.bob.bell, static_cast<BellLabel>(pos.announced));
      // find the bits whose encoding carries the residual to the unmasked label
      for (int bits = 0; bits < 4; ++bits) {
        if (detail::bell_label_after(residual, (bits & 1) != 0, (bits & 2) != 0, false) == label) {
          decoded += detail::bits_string(bits, width);
          break;
        }
      }
    } else {
      GhzLabel label = GhzLabel::from_index(pos.message_announced);
      if (pos.masked) label = detail::ghz_label_after(label, false, false, false, true);
      const GhzLabel residual = detail::ghz_residual_for(
          ghz_base, pos.bob.ghz, GhzLabel::from_index(pos.announced));
      for (int bits = 0; bits < 8; ++bits) {
        const bool m1 = (bits & 4) != 0, m2 = (bits & 2) != 0, m3 = (bits & 1) != 0;
        if (detail::ghz_label_after(residual, m1, m2, m3, false) == label) {
          decoded += detail::bits_string(bits, width);
          break;
        }
      }
    }
  }
  decoded.resize(round.message_bits.size());
  return decoded;
}

// ---------------------------------------------------------------------------
// Full session orchestration.

struct SessionResult {
  Round round;
  SecurityReport security;
  SessionDecision decision = SessionDecision::Terminate;
  std::string message_bits;
  std::string decoded_bits;
  bool message_ok = false;
};

inline SessionResult run_full_session(const ProtocolConfig& config,
                                      const std::string& message_bits,
                                      const AdversaryModel& adversary) {
  config.validate_session();
  SessionResult result;
  result.message_bits = message_bits;
  result.round = build_round(config);
  transmit(result.round, TransmitPhase::Forward, adversary);
  charlie_announce(result.round);
  result.security = run_security_check(result.round, adversary);
  result.decision = result.security.decision;
  if (result.decision != SessionDecision::Proceed) return result;

  normalize_alice(result.round, result.security);
  encode_superdense(result.round, message_bits);
  bob_mask(result.round);
  transmit(result.round, TransmitPhase::Message, adversary);
  charlie_announce_message(result.round);
  result.decoded_bits = decode_message(result.round);
  result.message_ok = result.decoded_bits == message_bits;
  return result;
}

}  // namespace qsdc
