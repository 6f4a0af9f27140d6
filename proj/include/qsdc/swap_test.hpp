#pragma once

// Swap-test circuits and the inner-product estimator built on them.
//
// Circuit layout for k-qubit operands: qubits [0,k) hold the first operand,
// [k,2k) the second, ancillas follow. Each ancilla is Hadamard-framed around
// controlled swaps of corresponding operand qubit pairs. With a single
// ancilla controlling all k swaps, P(ancilla reads 0) = (1 + |<s1|s2>|^2)/2
// exactly, so |<s1|s2>| is estimated as sqrt(max(0, 2p - 1)).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsdc/state.hpp"

namespace qsdc {

enum class SwapTestVariant {
  SingleAncilla,    // one ancilla controls every qubit-pair swap (canonical)
  PerQubitAncilla,  // ancilla i controls the swap of qubit pair i
};

struct SwapTestCircuit {
  int num_qubits = 0;
  int operand_qubits = 0;
  std::vector<int> ancillas;
  std::vector<GateOp> gates;
};

inline SwapTestCircuit build_swap_test(int operand_qubits, SwapTestVariant variant) {
  if (operand_qubits < 1 || operand_qubits > 3)
    throw std::invalid_argument("operand size must be 1..3 qubits");
  const int k = operand_qubits;
  const int num_ancillas = variant == SwapTestVariant::SingleAncilla ? 1 : k;
  SwapTestCircuit circuit;
  circuit.operand_qubits = k;
  circuit.num_qubits = 2 * k + num_ancillas;
  for (int a = 0; a < num_ancillas; ++a) circuit.ancillas.push_back(2 * k + a);
  for (int a : circuit.ancillas) circuit.gates.push_back(gate::h(a));
  for (int i = 0; i < k; ++i) {
    const int control = variant == SwapTestVariant::SingleAncilla ? circuit.ancillas[0]
                                                                  : circuit.ancillas[i];
    circuit.gates.push_back(gate::cswap(control, i, k + i));
  }
  for (int a : circuit.ancillas) circuit.gates.push_back(gate::h(a));
  return circuit;
}

namespace detail {

inline StateVector swap_test_output(const StateVector& s1, const StateVector& s2,
                                    SwapTestVariant variant) {
  if (s1.num_qubits() != s2.num_qubits())
    throw std::invalid_argument("swap test operands must have equal qubit counts");
  const SwapTestCircuit circuit = build_swap_test(s1.num_qubits(), variant);
  StateVector state =
      s1.tensor(s2).tensor(StateVector(static_cast<int>(circuit.ancillas.size())));
  state.apply(circuit.gates);
  return state;
}

}  // namespace detail

// Exact probability that every ancilla reads 0; no sampling involved.
inline double analytic_p_all_zero(const StateVector& s1, const StateVector& s2,
                                  SwapTestVariant variant) {
  const StateVector out = detail::swap_test_output(s1, s2, variant);
  const SwapTestCircuit circuit = build_swap_test(s1.num_qubits(), variant);
  std::size_t ancilla_mask = 0;
  for (int a : circuit.ancillas) ancilla_mask |= out.qubit_mask(a);
  double p = 0.0;
  for (std::size_t i = 0; i < out.dim(); ++i)
    if ((i & ancilla_mask) == 0) p += std::norm(out.amplitude(i));
  return p;
}

struct InnerProductEstimate {
  double p_all_zero = 0.0;
  double estimate = 0.0;        // sqrt(max(0, 2 p - 1))
  double standard_error = 0.0;  // binomial error on p pushed through the sqrt
  std::uint64_t shots = 0;
  bool at_floor = false;  // p <= 1/2: magnitude indistinguishable from 0
};

inline InnerProductEstimate estimate_from_p(double p_all_zero, std::uint64_t shots) {
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  if (p_all_zero < 0.0 || p_all_zero > 1.0)
    throw std::invalid_argument("probability must lie in [0, 1]");
  InnerProductEstimate est;
  est.p_all_zero = p_all_zero;
  est.shots = shots;
  const double excess = 2.0 * p_all_zero - 1.0;
  if (excess <= 0.0) {
    est.at_floor = true;
    return est;
  }
  est.estimate = std::sqrt(excess);
  const double se_p = std::sqrt(p_all_zero * (1.0 - p_all_zero) / static_cast<double>(shots));
  est.standard_error = se_p / est.estimate;
  return est;
}

inline InnerProductEstimate estimate_inner_product(const StateVector& s1, const StateVector& s2,
                                                   SwapTestVariant variant, std::uint64_t shots,
                                                   RngStream& rng) {
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  const StateVector out = detail::swap_test_output(s1, s2, variant);
  const SwapTestCircuit circuit = build_swap_test(s1.num_qubits(), variant);
  const ShotHistogram hist = sample_state_shots(out, circuit.ancillas, shots, rng);
  const std::string all_zero(circuit.ancillas.size(), '0');
  const auto it = hist.counts.find(all_zero);
  const std::uint64_t zeros = it == hist.counts.end() ? 0 : it->second;
  return estimate_from_p(static_cast<double>(zeros) / static_cast<double>(shots), shots);
}

inline InnerProductEstimate estimate_inner_product(const StateVector& s1, const StateVector& s2,
                                                   SwapTestVariant variant, std::uint64_t shots,
                                                   RngSeed seed) {
  RngStream rng = derive_stream(seed, {0x73776170ull});
  return estimate_inner_product(s1, s2, variant, shots, rng);
}

}  // namespace qsdc
