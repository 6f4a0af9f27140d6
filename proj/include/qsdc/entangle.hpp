#pragma once

// Entangled-state preparation, entangled-basis measurement, entanglement
// swapping decompositions, and decoy-product decompositions.
//
// Canonical two-qubit basis (qubits A=0, B=1):
//   psi+ = (|00> + |11>)/sqrt2     psi- = (|00> - |11>)/sqrt2
//   phi+ = (|01> + |10>)/sqrt2     phi- = (|01> - |10>)/sqrt2
// Canonical three-qubit basis, label bits (a,b,c):
//   ghz_abc = (|b a 0> + (-1)^c |!b !a 1>)/sqrt2
// Both are produced by explicit circuits so measurement is exactly the
// inverse rotation plus a computational readout.

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdc/labels.hpp"
#include "qsdc/state.hpp"

namespace qsdc {

// --------------------------------------------------------------------------
// Preparation. Bell: H(a), CNOT(a->b), then Z/X corrections select the label.
// GHZ: X gates load the pattern, then H on the last qubit and CNOTs fan the
// superposition out; the sign bit rides on the |..1> branch directly.

inline std::vector<GateOp> bell_prep_circuit(BellLabel label, int qa, int qb) {
  std::vector<GateOp> ops{gate::h(qa), gate::cnot(qa, qb)};
  if (label == BellLabel::PsiMinus || label == BellLabel::PhiMinus) ops.push_back(gate::z(qa));
  if (label == BellLabel::PhiPlus || label == BellLabel::PhiMinus) ops.push_back(gate::x(qb));
  return ops;
}

inline StateVector prepare_bell(BellLabel label) {
  StateVector state(2);
  state.apply(bell_prep_circuit(label, 0, 1));
  return state;
}

inline std::vector<GateOp> ghz_prep_circuit(GhzLabel label, int q1, int q2, int q3) {
  std::vector<GateOp> ops;
  if (label.b) ops.push_back(gate::x(q1));
  if (label.a) ops.push_back(gate::x(q2));
  if (label.c) ops.push_back(gate::x(q3));
  ops.push_back(gate::h(q3));
  ops.push_back(gate::cnot(q3, q1));
  ops.push_back(gate::cnot(q3, q2));
  return ops;
}

inline StateVector prepare_ghz(GhzLabel label) {
  StateVector state(3);
  state.apply(ghz_prep_circuit(label, 0, 1, 2));
  return state;
}

// --------------------------------------------------------------------------
// Label identification: project onto the canonical basis. Valid only for
// states that are a basis element up to global phase.

inline BellLabel identify_bell(const StateVector& state) {
  for (BellLabel label : all_bell_labels)
    if (std::abs(inner_product(prepare_bell(label), state)) > 1.0 - 1e-9) return label;
  throw std::invalid_argument("state is not a two-qubit basis element");
}

inline GhzLabel identify_ghz(const StateVector& state) {
  for (int i = 0; i < 8; ++i) {
    GhzLabel label = GhzLabel::from_index(i);
    if (std::abs(inner_product(prepare_ghz(label), state)) > 1.0 - 1e-9) return label;
  }
  throw std::invalid_argument("state is not a three-qubit basis element");
}

// --------------------------------------------------------------------------
// Entangled-basis measurement: rotate into the computational frame with the
// inverse preparation circuit, measure, map bits to a label through a
// generated lookup (validated by round-trip at first use), then undo the
// rotation so the collapsed register is the announced basis state and any
// bystander qubits stay interpretable.

namespace detail {

inline std::vector<GateOp> bell_unrotate(int qa, int qb) {
  return {gate::cnot(qa, qb), gate::h(qa)};
}

inline std::vector<GateOp> ghz_unrotate(int q1, int q2, int q3) {
  return {gate::cnot(q3, q2), gate::cnot(q3, q1), gate::h(q3)};
}

template <typename Label, int N>
struct BitLookup {
  std::array<Label, N> label_of_bits;
  std::array<int, N> bits_of_label;
};

inline const BitLookup<BellLabel, 4>& bell_bit_lookup() {
  static const BitLookup<BellLabel, 4> table = [] {
    BitLookup<BellLabel, 4> t{};
    std::array<bool, 4> seen{};
    for (BellLabel label : all_bell_labels) {
      StateVector probe = prepare_bell(label);
      probe.apply(bell_unrotate(0, 1));
      std::size_t bits = 0;
      for (std::size_t i = 0; i < probe.dim(); ++i)
        if (std::abs(probe.amplitude(i)) > 0.5) bits = i;
      t.label_of_bits[bits] = label;
      t.bits_of_label[static_cast<int>(label)] = static_cast<int>(bits);
      seen[bits] = true;
    }
    for (bool s : seen)
      if (!s) std::abort();  // lookup must be a bijection
    return t;
  }();
  return table;
}

inline const BitLookup<GhzLabel, 8>& ghz_bit_lookup() {
  static const BitLookup<GhzLabel, 8> table = [] {
    BitLookup<GhzLabel, 8> t{};
    std::array<bool, 8> seen{};
    for (int i = 0; i < 8; ++i) {
      GhzLabel label = GhzLabel::from_index(i);
      StateVector probe = prepare_ghz(label);
      probe.apply(ghz_unrotate(0, 1, 2));
      std::size_t bits = 0;
      for (std::size_t k = 0; k < probe.dim(); ++k)
        if (std::abs(probe.amplitude(k)) > 0.5) bits = k;
      t.label_of_bits[bits] = label;
      t.bits_of_label[i] = static_cast<int>(bits);
      seen[bits] = true;
    }
    for (bool s : seen)
      if (!s) std::abort();
    return t;
  }();
  return table;
}

}  // namespace detail

template <typename Label>
struct EntangledMeasurement {
  Label label;
  std::string bits;   // computational readout before the rotation is undone
  StateVector state;  // collapsed full register, announced basis state intact
};

inline EntangledMeasurement<BellLabel> bell_measure(const StateVector& state, int qa, int qb,
                                                    RngStream& rng) {
  StateVector work = state;
  work.apply(detail::bell_unrotate(qa, qb));
  MeasureResult m = measure(work, {qa, qb}, rng);
  const int bits = (m.bits[0] - '0') * 2 + (m.bits[1] - '0');
  m.state.apply({gate::h(qa), gate::cnot(qa, qb)});
  return {detail::bell_bit_lookup().label_of_bits[bits], m.bits, std::move(m.state)};
}

inline EntangledMeasurement<GhzLabel> ghz_measure(const StateVector& state, int q1, int q2, int q3,
                                                  RngStream& rng) {
  StateVector work = state;
  work.apply(detail::ghz_unrotate(q1, q2, q3));
  MeasureResult m = measure(work, {q1, q2, q3}, rng);
  const int bits = (m.bits[0] - '0') * 4 + (m.bits[1] - '0') * 2 + (m.bits[2] - '0');
  m.state.apply({gate::h(q3), gate::cnot(q3, q1), gate::cnot(q3, q2)});
  return {detail::ghz_bit_lookup().label_of_bits[bits], m.bits, std::move(m.state)};
}

// --------------------------------------------------------------------------
// Entanglement swapping table, computed by brute-force projection: the joint
// state of pairs (A,C1) and (B,C2) is expanded over (residual basis on the
// retained qubits) x (measurement basis on the qubits Charlie measures). Real
// amplitudes throughout; terms below 1e-12 are dropped.

template <typename Label>
struct SwapTerm {
  Label outcome;   // Charlie's announced label
  Label residual;  // retained-qubit basis state left behind
  double amplitude;
};

template <typename Label>
using SwapDecomposition = std::vector<SwapTerm<Label>>;

namespace detail {

inline double real_overlap(const StateVector& basis, const StateVector& state) {
  const complex ip = inner_product(basis, state);
  if (std::abs(ip.imag()) > 1e-12) throw std::logic_error("expected a real overlap");
  return ip.real();
}

}  // namespace detail

// Bell variant: Alice holds (A, C1), Bob holds (B, C2); Charlie measures
// (C1, C2) and the residual lives on (A, B). Register order A, B, C1, C2.
inline SwapDecomposition<BellLabel> swapping_table(BellLabel left, BellLabel right) {
  const StateVector lhs = prepare_bell(left), rhs = prepare_bell(right);
  StateVector joint(4);
  {
    std::vector<complex> amps(16, complex{0.0, 0.0});
    for (int a = 0; a < 2; ++a)
      for (int c1 = 0; c1 < 2; ++c1)
        for (int b = 0; b < 2; ++b)
          for (int c2 = 0; c2 < 2; ++c2)
            amps[std::size_t(a * 8 + b * 4 + c1 * 2 + c2)] =
                lhs.amplitude(std::size_t(a * 2 + c1)) * rhs.amplitude(std::size_t(b * 2 + c2));
    joint = StateVector::from_amplitudes(std::move(amps));
  }
  SwapDecomposition<BellLabel> terms;
  for (BellLabel outcome : all_bell_labels)
    for (BellLabel residual : all_bell_labels) {
      const double amp =
          detail::real_overlap(prepare_bell(residual).tensor(prepare_bell(outcome)), joint);
      if (std::abs(amp) > 1e-12) terms.push_back({outcome, residual, amp});
    }
  return terms;
}

// GHZ variant: Alice holds (A1, A2, C1), Bob holds (B, C2, C3); Charlie
// measures (C1, C2, C3), residual on (A1, A2, B). Register order
// A1, A2, B, C1, C2, C3.
inline SwapDecomposition<GhzLabel> ghz_swapping_table(GhzLabel left, GhzLabel right) {
  const StateVector lhs = prepare_ghz(left), rhs = prepare_ghz(right);
  StateVector joint(6);
  {
    std::vector<complex> amps(64, complex{0.0, 0.0});
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c1 = 0; c1 < 2; ++c1)
          for (int b = 0; b < 2; ++b)
            for (int c2 = 0; c2 < 2; ++c2)
              for (int c3 = 0; c3 < 2; ++c3)
                amps[std::size_t(a1 * 32 + a2 * 16 + b * 8 + c1 * 4 + c2 * 2 + c3)] =
                    lhs.amplitude(std::size_t(a1 * 4 + a2 * 2 + c1)) *
                    rhs.amplitude(std::size_t(b * 4 + c2 * 2 + c3));
    joint = StateVector::from_amplitudes(std::move(amps));
  }
  SwapDecomposition<GhzLabel> terms;
  for (int o = 0; o < 8; ++o)
    for (int r = 0; r < 8; ++r) {
      const GhzLabel outcome = GhzLabel::from_index(o), residual = GhzLabel::from_index(r);
      const double amp =
          detail::real_overlap(prepare_ghz(residual).tensor(prepare_ghz(outcome)), joint);
      if (std::abs(amp) > 1e-12) terms.push_back({outcome, residual, amp});
    }
  return terms;
}

// --------------------------------------------------------------------------
// Decoy decomposition: expansion of a product state over the entangled
// measurement basis of matching size. Rejects entangled input.

template <typename Label>
struct DecoyTerm {
  Label label;
  double amplitude;
};

namespace detail {

inline bool is_product_state(const StateVector& state) {
  const int n = state.num_qubits();
  // Rank-1 check of every single-qubit bipartition via 2x2 minors.
  for (int q = 0; q < n; ++q) {
    const std::size_t m = state.qubit_mask(q);
    for (std::size_t i = 0; i < state.dim(); ++i) {
      if (i & m) continue;
      for (std::size_t j = i + 1; j < state.dim(); ++j) {
        if (j & m) continue;
        const complex det = state.amplitude(i) * state.amplitude(j | m) -
                            state.amplitude(j) * state.amplitude(i | m);
        if (std::abs(det) > 1e-9) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

inline std::vector<DecoyTerm<BellLabel>> decoy_decomposition(const StateVector& product) {
  if (product.num_qubits() != 2) throw std::invalid_argument("expected a two-qubit state");
  if (!detail::is_product_state(product))
    throw std::invalid_argument("decoy decomposition needs a product state");
  std::vector<DecoyTerm<BellLabel>> terms;
  for (BellLabel label : all_bell_labels) {
    const double amp = detail::real_overlap(prepare_bell(label), product);
    if (std::abs(amp) > 1e-12) terms.push_back({label, amp});
  }
  return terms;
}

inline std::vector<DecoyTerm<GhzLabel>> ghz_decoy_decomposition(const StateVector& product) {
  if (product.num_qubits() != 3) throw std::invalid_argument("expected a three-qubit state");
  if (!detail::is_product_state(product))
    throw std::invalid_argument("decoy decomposition needs a product state");
  std::vector<DecoyTerm<GhzLabel>> terms;
  for (int i = 0; i < 8; ++i) {
    const GhzLabel label = GhzLabel::from_index(i);
    const double amp = detail::real_overlap(prepare_ghz(label), product);
    if (std::abs(amp) > 1e-12) terms.push_back({label, amp});
  }
  return terms;
}

}  // namespace qsdc
