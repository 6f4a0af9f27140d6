#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "qsdc/entangle.hpp"
#include "qsdc/labels.hpp"
#include "qsdc/state.hpp"

using namespace qsdc;

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

void require_amplitudes(const StateVector& state, const std::vector<complex>& expected,
                        double tol = 1e-12) {
  REQUIRE(state.dim() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CAPTURE(i);
    REQUIRE(std::abs(state.amplitude(i) - expected[i]) < tol);
  }
}

}  // namespace

TEST_CASE("two-qubit basis amplitudes") {
  require_amplitudes(prepare_bell(BellLabel::PsiPlus), {kInvSqrt2, 0, 0, kInvSqrt2});
  require_amplitudes(prepare_bell(BellLabel::PsiMinus), {kInvSqrt2, 0, 0, -kInvSqrt2});
  require_amplitudes(prepare_bell(BellLabel::PhiPlus), {0, kInvSqrt2, kInvSqrt2, 0});
  require_amplitudes(prepare_bell(BellLabel::PhiMinus), {0, kInvSqrt2, -kInvSqrt2, 0});
}

TEST_CASE("plus-minus product expands over the minus pair") {
  // (|psi-> - |phi->)/sqrt2 must equal |+->
  const StateVector psi_minus = prepare_bell(BellLabel::PsiMinus);
  const StateVector phi_minus = prepare_bell(BellLabel::PhiMinus);
  std::vector<complex> combo(4);
  for (std::size_t i = 0; i < 4; ++i)
    combo[i] = (psi_minus.amplitude(i) - phi_minus.amplitude(i)) * kInvSqrt2;

  StateVector plus_minus(2);
  plus_minus.apply(gate::h(0));
  plus_minus.apply(gate::x(1));
  plus_minus.apply(gate::h(1));
  require_amplitudes(plus_minus, combo);
}

TEST_CASE("three-qubit basis amplitudes") {
  struct Row {
    GhzLabel label;
    std::size_t hi, lo;  // indices of the two nonzero amplitudes
    double sign;         // sign on the second one
  };
  // label (a,b,c): (|b a 0> + (-1)^c |~b ~a 1>)/sqrt2
  const Row rows[] = {
      {{0, 0, 0}, 0b000, 0b111, +1}, {{0, 0, 1}, 0b000, 0b111, -1},
      {{0, 1, 0}, 0b100, 0b011, +1}, {{0, 1, 1}, 0b100, 0b011, -1},
      {{1, 0, 0}, 0b010, 0b101, +1}, {{1, 0, 1}, 0b010, 0b101, -1},
      {{1, 1, 0}, 0b110, 0b001, +1}, {{1, 1, 1}, 0b110, 0b001, -1},
  };
  for (const Row& row : rows) {
    CAPTURE(to_string(row.label));
    std::vector<complex> expected(8, complex{0.0, 0.0});
    expected[row.hi] = kInvSqrt2;
    expected[row.lo] = row.sign * kInvSqrt2;
    require_amplitudes(prepare_ghz(row.label), expected);
  }
}

TEST_CASE("basis states are mutually orthonormal") {
  for (BellLabel l1 : all_bell_labels)
    for (BellLabel l2 : all_bell_labels) {
      const complex ip = inner_product(prepare_bell(l1), prepare_bell(l2));
      REQUIRE(std::abs(ip - (l1 == l2 ? complex{1.0} : complex{0.0})) < 1e-12);
    }
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const complex ip =
          inner_product(prepare_ghz(GhzLabel::from_index(i)), prepare_ghz(GhzLabel::from_index(j)));
      REQUIRE(std::abs(ip - (i == j ? complex{1.0} : complex{0.0})) < 1e-12);
    }
}

TEST_CASE("identification round trips and rejects imposters") {
  for (BellLabel l : all_bell_labels) REQUIRE(identify_bell(prepare_bell(l)) == l);
  for (int i = 0; i < 8; ++i) {
    const GhzLabel l = GhzLabel::from_index(i);
    REQUIRE(identify_ghz(prepare_ghz(l)) == l);
  }
  StateVector plus_plus(2);
  plus_plus.apply(gate::h(0));
  plus_plus.apply(gate::h(1));
  REQUIRE_THROWS_AS(identify_bell(plus_plus), std::invalid_argument);
  REQUIRE_THROWS_AS(identify_ghz(StateVector(3)), std::invalid_argument);
}

TEST_CASE("label parsing round trips") {
  for (BellLabel l : all_bell_labels) REQUIRE(parse_bell_label(to_string(l)) == l);
  for (int i = 0; i < 8; ++i) {
    const GhzLabel l = GhzLabel::from_index(i);
    REQUIRE(parse_ghz_label(to_string(l)) == l);
  }
  REQUIRE(parse_ghz_label("101") == GhzLabel{1, 0, 1});
  REQUIRE_THROWS_AS(parse_bell_label("psi"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_ghz_label("ghz002"), std::invalid_argument);
}

TEST_CASE("entangled measurement is faithful on basis states") {
  RngStream rng = derive_stream({31}, {1});
  for (BellLabel l : all_bell_labels) {
    const auto m = bell_measure(prepare_bell(l), 0, 1, rng);
    REQUIRE(m.label == l);
    REQUIRE(approx_equal(m.state, prepare_bell(l), 1e-12));
  }
  for (int i = 0; i < 8; ++i) {
    const GhzLabel l = GhzLabel::from_index(i);
    const auto m = ghz_measure(prepare_ghz(l), 0, 1, 2, rng);
    REQUIRE(m.label == l);
    REQUIRE(approx_equal(m.state, prepare_ghz(l), 1e-12));
  }
}

TEST_CASE("entangled measurement of |00> splits over the psi pair") {
  RngStream rng = derive_stream({31}, {2});
  std::map<BellLabel, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto m = bell_measure(StateVector(2), 0, 1, rng);
    ++counts[m.label];
    // collapsed state must be the reported basis state
    REQUIRE(approx_equal(m.state, prepare_bell(m.label), 1e-9));
  }
  REQUIRE(counts.count(BellLabel::PhiPlus) == 0);
  REQUIRE(counts.count(BellLabel::PhiMinus) == 0);
  const double sigma = std::sqrt(0.25 / trials);
  REQUIRE(std::abs(counts[BellLabel::PsiPlus] / double(trials) - 0.5) < 4.0 * sigma);
}

TEST_CASE("entangled measurement embedded in a larger register") {
  // psi+ on qubits (1,2) of a 4-qubit register, spectators |0>
  StateVector s = StateVector(1).tensor(prepare_bell(BellLabel::PsiPlus)).tensor(StateVector(1));
  RngStream rng = derive_stream({31}, {3});
  const auto m = bell_measure(s, 1, 2, rng);
  REQUIRE(m.label == BellLabel::PsiPlus);
  REQUIRE(m.state.num_qubits() == 4);
  REQUIRE(std::abs(reduced_purity(m.state, {0}) - 1.0) < 1e-9);
}

TEST_CASE("three-party measurement of a product of plus and minus") {
  // |+>(|+->): outcomes confined to odd-parity labels, each 1/4
  StateVector s(3);
  s.apply(gate::h(0));
  s.apply(gate::h(1));
  s.apply(gate::x(2));
  s.apply(gate::h(2));
  RngStream rng = derive_stream({31}, {4});
  std::map<int, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto m = ghz_measure(s, 0, 1, 2, rng);
    ++counts[m.label.index()];
    REQUIRE(approx_equal(m.state, prepare_ghz(m.label), 1e-9));
  }
  REQUIRE(counts.size() == 4);
  const double sigma = std::sqrt(0.25 * 0.75 / trials);
  for (int idx : {0b001, 0b011, 0b101, 0b111}) {
    CAPTURE(idx);
    REQUIRE(std::abs(counts[idx] / double(trials) - 0.25) < 4.0 * sigma);
  }
}

TEST_CASE("pair swapping table on matched inputs") {
  // (psi+, psi+): outcome equals residual, every amplitude +1/2
  const auto table = swapping_table(BellLabel::PsiPlus, BellLabel::PsiPlus);
  REQUIRE(table.size() == 4);
  double total = 0.0;
  for (const auto& term : table) {
    REQUIRE(term.outcome == term.residual);
    REQUIRE(std::abs(term.amplitude - 0.5) < 1e-12);
    total += term.amplitude * term.amplitude;
  }
  REQUIRE(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("pair swapping table on mismatched inputs") {
  // (psi+, psi-): psi outcomes swap labels at +1/2, phi outcomes at -1/2
  const auto table = swapping_table(BellLabel::PsiPlus, BellLabel::PsiMinus);
  REQUIRE(table.size() == 4);
  std::map<BellLabel, std::pair<BellLabel, double>> by_outcome;
  for (const auto& term : table) by_outcome[term.outcome] = {term.residual, term.amplitude};

  REQUIRE(by_outcome.at(BellLabel::PsiMinus).first == BellLabel::PsiPlus);
  REQUIRE(std::abs(by_outcome.at(BellLabel::PsiMinus).second - 0.5) < 1e-12);
  REQUIRE(by_outcome.at(BellLabel::PsiPlus).first == BellLabel::PsiMinus);
  REQUIRE(std::abs(by_outcome.at(BellLabel::PsiPlus).second - 0.5) < 1e-12);
  REQUIRE(by_outcome.at(BellLabel::PhiMinus).first == BellLabel::PhiPlus);
  REQUIRE(std::abs(by_outcome.at(BellLabel::PhiMinus).second - (-0.5)) < 1e-12);
  REQUIRE(by_outcome.at(BellLabel::PhiPlus).first == BellLabel::PhiMinus);
  REQUIRE(std::abs(by_outcome.at(BellLabel::PhiPlus).second - (-0.5)) < 1e-12);
}

TEST_CASE("pair swapping table structure holds for every input pair") {
  for (BellLabel l1 : all_bell_labels)
    for (BellLabel l2 : all_bell_labels) {
      const auto table = swapping_table(l1, l2);
      REQUIRE(table.size() == 4);
      double total = 0.0;
      std::map<BellLabel, int> seen;
      for (const auto& term : table) {
        total += term.amplitude * term.amplitude;
        ++seen[term.outcome];
        REQUIRE(std::abs(std::abs(term.amplitude) - 0.5) < 1e-12);
      }
      REQUIRE(std::abs(total - 1.0) < 1e-12);
      REQUIRE(seen.size() == 4);  // each outcome exactly once
    }
}

TEST_CASE("pair swapping table agrees with direct measurement") {
  // Project-and-tabulate must match actually measuring the shared halves.
  RngStream rng = derive_stream({31}, {5});
  const BellLabel l1 = BellLabel::PsiMinus, l2 = BellLabel::PhiPlus;
  const auto table = swapping_table(l1, l2);

  std::map<BellLabel, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    // register [A, C1, B, C2]; shared halves C1, C2 at qubits 1 and 3
    StateVector joint = prepare_bell(l1).tensor(prepare_bell(l2));
    const auto m = bell_measure(joint, 1, 3, rng);
    ++counts[m.label];
    // residual on (A, B) = qubits (0, 2) must match the table row
    for (const auto& term : table) {
      if (term.outcome != m.label) continue;
      const StateVector expected_joint =
          [&] {
            // rebuild [A,C1,B,C2] = residual on (0,2) with outcome on (1,3)
            const StateVector res = prepare_bell(term.residual);
            const StateVector out = prepare_bell(term.outcome);
            std::vector<complex> amps(16);
            for (int a = 0; a < 2; ++a)
              for (int c1 = 0; c1 < 2; ++c1)
                for (int b = 0; b < 2; ++b)
                  for (int c2 = 0; c2 < 2; ++c2)
                    amps[a * 8 + c1 * 4 + b * 2 + c2] =
                        res.amplitude(a * 2 + b) * out.amplitude(c1 * 2 + c2);
            return StateVector::from_amplitudes(std::move(amps));
          }();
      REQUIRE(approx_equal(m.state, expected_joint, 1e-9, /*up_to_global_phase=*/true));
    }
  }
  REQUIRE(counts.size() == 4);
  const double sigma = std::sqrt(0.25 * 0.75 / trials);
  for (const auto& [label, n] : counts) {
    CAPTURE(to_string(label));
    REQUIRE(std::abs(n / double(trials) - 0.25) < 4.0 * sigma);
  }
}

TEST_CASE("triple swapping table on matched inputs") {
  const GhzLabel l{0, 0, 1};
  const auto table = ghz_swapping_table(l, l);
  REQUIRE(table.size() == 4);
  double total = 0.0;
  bool found = false;
  for (const auto& term : table) {
    total += term.amplitude * term.amplitude;
    REQUIRE(std::abs(std::abs(term.amplitude) - 0.5) < 1e-12);
    if (term.outcome == GhzLabel{0, 0, 0}) {
      found = true;
      REQUIRE(term.residual == GhzLabel{0, 0, 0});
      REQUIRE(std::abs(term.amplitude - 0.5) < 1e-12);
    }
  }
  REQUIRE(found);
  REQUIRE(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("triple swapping table structure holds for every input pair") {
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const auto table = ghz_swapping_table(GhzLabel::from_index(i), GhzLabel::from_index(j));
      REQUIRE(table.size() == 4);
      double total = 0.0;
      std::map<int, int> seen;
      for (const auto& term : table) {
        total += term.amplitude * term.amplitude;
        ++seen[term.outcome.index()];
      }
      REQUIRE(std::abs(total - 1.0) < 1e-12);
      REQUIRE(seen.size() == 4);
    }
}

TEST_CASE("triple swapping table agrees with direct measurement") {
  RngStream rng = derive_stream({31}, {6});
  const GhzLabel l1{1, 1, 0}, l2{0, 1, 1};
  const auto table = ghz_swapping_table(l1, l2);
  std::map<int, std::pair<GhzLabel, double>> by_outcome;
  for (const auto& term : table) by_outcome[term.outcome.index()] = {term.residual, term.amplitude};

  const int trials = 4000;
  std::map<int, int> counts;
  for (int t = 0; t < trials; ++t) {
    // register [A1, A2, C1, B, C2, C3]; shared halves at qubits 2, 4, 5
    StateVector joint = prepare_ghz(l1).tensor(prepare_ghz(l2));
    const auto m = ghz_measure(joint, 2, 4, 5, rng);
    ++counts[m.label.index()];
    REQUIRE(by_outcome.count(m.label.index()) == 1);
  }
  REQUIRE(counts.size() == 4);
}

TEST_CASE("decoy expansion of plus-minus") {
  const StateVector s = ket_from_symbols("+-");
  const auto terms = decoy_decomposition(s);
  REQUIRE(terms.size() == 2);
  std::map<BellLabel, double> amps;
  for (const auto& t : terms) amps[t.label] = t.amplitude;
  REQUIRE(std::abs(amps.at(BellLabel::PsiMinus) - kInvSqrt2) < 1e-12);
  REQUIRE(std::abs(amps.at(BellLabel::PhiMinus) - (-kInvSqrt2)) < 1e-12);
}

TEST_CASE("decoy expansion of zero-minus") {
  const auto terms = decoy_decomposition(ket_from_symbols("0-"));
  REQUIRE(terms.size() == 4);
  std::map<BellLabel, double> amps;
  for (const auto& t : terms) amps[t.label] = t.amplitude;
  REQUIRE(std::abs(amps.at(BellLabel::PsiPlus) - 0.5) < 1e-12);
  REQUIRE(std::abs(amps.at(BellLabel::PsiMinus) - 0.5) < 1e-12);
  REQUIRE(std::abs(amps.at(BellLabel::PhiPlus) - (-0.5)) < 1e-12);
  REQUIRE(std::abs(amps.at(BellLabel::PhiMinus) - (-0.5)) < 1e-12);
}

TEST_CASE("decoy expansion of plus-plus-minus") {
  const auto terms = ghz_decoy_decomposition(ket_from_symbols("++-"));
  REQUIRE(terms.size() == 4);
  std::map<int, double> amps;
  for (const auto& t : terms) amps[t.label.index()] = t.amplitude;
  for (int idx : {0b001, 0b011, 0b101, 0b111}) {
    CAPTURE(idx);
    REQUIRE(std::abs(amps.at(idx) - 0.5) < 1e-12);
  }
}

TEST_CASE("decoy expansion of the all-zero triple") {
  const auto terms = ghz_decoy_decomposition(ket_from_symbols("000"));
  REQUIRE(terms.size() == 2);
  std::map<int, double> amps;
  for (const auto& t : terms) amps[t.label.index()] = t.amplitude;
  REQUIRE(std::abs(amps.at(0b000) - kInvSqrt2) < 1e-12);
  REQUIRE(std::abs(amps.at(0b001) - kInvSqrt2) < 1e-12);
}

TEST_CASE("decoy expansions are complete for every symbol product") {
  const char symbols[] = {'0', '1', '+', '-'};
  for (char s1 : symbols)
    for (char s2 : symbols) {
      const auto terms = decoy_decomposition(ket_from_symbols(std::string{s1, s2}));
      double total = 0.0;
      for (const auto& t : terms) total += t.amplitude * t.amplitude;
      CAPTURE(s1, s2);
      REQUIRE(std::abs(total - 1.0) < 1e-12);
    }
  for (char s1 : symbols)
    for (char s2 : symbols)
      for (char s3 : symbols) {
        const auto terms = ghz_decoy_decomposition(ket_from_symbols(std::string{s1, s2, s3}));
        double total = 0.0;
        for (const auto& t : terms) total += t.amplitude * t.amplitude;
        CAPTURE(s1, s2, s3);
        REQUIRE(std::abs(total - 1.0) < 1e-12);
      }
}

TEST_CASE("decoy expansion rejects entangled input") {
  REQUIRE_THROWS_AS(decoy_decomposition(prepare_bell(BellLabel::PsiPlus)), std::invalid_argument);
  REQUIRE_THROWS_AS(ghz_decoy_decomposition(prepare_ghz(GhzLabel{0, 0, 0})), std::invalid_argument);
  REQUIRE_THROWS_AS(decoy_decomposition(StateVector(3)), std::invalid_argument);
  REQUIRE_THROWS_AS(ghz_decoy_decomposition(StateVector(2)), std::invalid_argument);
}

TEST_CASE("symbol kets") {
  require_amplitudes(ket_from_symbols("0"), {1, 0});
  require_amplitudes(ket_from_symbols("1"), {0, 1});
  require_amplitudes(ket_from_symbols("+"), {kInvSqrt2, kInvSqrt2});
  require_amplitudes(ket_from_symbols("-"), {kInvSqrt2, -kInvSqrt2});
  require_amplitudes(ket_from_symbols("10"), {0, 0, 1, 0});
  REQUIRE_THROWS_AS(ket_from_symbols("2"), std::invalid_argument);
  REQUIRE_THROWS_AS(ket_from_symbols(""), std::invalid_argument);
}
