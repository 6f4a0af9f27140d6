#pragma once

// Names for the two-qubit and three-qubit entangled measurement bases and for
// single-qubit preparation symbols. State label grammar used across the CLI
// and file formats: "psi+", "psi-", "phi+", "phi-", "ghz000".."ghz111", or a
// string of per-qubit symbols over {0,1,+,-} ("+-", "010", ...).

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qsdc/state.hpp"

namespace qsdc {

enum class Variant { Bell, Ghz };

inline std::string to_string(Variant v) { return v == Variant::Bell ? "bell" : "ghz"; }

inline Variant parse_variant(std::string_view text) {
  if (text == "bell") return Variant::Bell;
  if (text == "ghz") return Variant::Ghz;
  throw std::invalid_argument("unknown variant: " + std::string(text));
}

enum class BellLabel { PsiPlus = 0, PsiMinus = 1, PhiPlus = 2, PhiMinus = 3 };

struct GhzLabel {
  int a = 0, b = 0, c = 0;
  int index() const { return a * 4 + b * 2 + c; }
  static GhzLabel from_index(int i) {
    if (i < 0 || i > 7) throw std::out_of_range("ghz label index out of range");
    return {(i >> 2) & 1, (i >> 1) & 1, i & 1};
  }
  friend bool operator==(const GhzLabel&, const GhzLabel&) = default;
};

inline std::string to_string(BellLabel label) {
  switch (label) {
    case BellLabel::PsiPlus: return "psi+";
    case BellLabel::PsiMinus: return "psi-";
    case BellLabel::PhiPlus: return "phi+";
    case BellLabel::PhiMinus: return "phi-";
  }
  throw std::invalid_argument("bad bell label");
}

inline std::string to_string(GhzLabel label) {
  return "ghz" + std::to_string(label.a) + std::to_string(label.b) + std::to_string(label.c);
}

inline BellLabel parse_bell_label(std::string_view text) {
  if (text == "psi+") return BellLabel::PsiPlus;
  if (text == "psi-") return BellLabel::PsiMinus;
  if (text == "phi+") return BellLabel::PhiPlus;
  if (text == "phi-") return BellLabel::PhiMinus;
  throw std::invalid_argument("unknown bell label: " + std::string(text));
}

inline GhzLabel parse_ghz_label(std::string_view text) {
  if (text.size() == 6 && text.substr(0, 3) == "ghz") text.remove_prefix(3);
  if (text.size() != 3) throw std::invalid_argument("unknown ghz label: " + std::string(text));
  GhzLabel label;
  int* fields[3] = {&label.a, &label.b, &label.c};
  for (int i = 0; i < 3; ++i) {
    if (text[i] != '0' && text[i] != '1')
      throw std::invalid_argument("unknown ghz label: " + std::string(text));
    *fields[i] = text[i] - '0';
  }
  return label;
}

inline bool is_decoy_symbols(std::string_view text) {
  if (text.empty()) return false;
  for (char ch : text)
    if (ch != '0' && ch != '1' && ch != '+' && ch != '-') return false;
  return true;
}

inline StateVector ket_symbol(char symbol) {
  const double inv_sqrt2 = 0.7071067811865476;
  switch (symbol) {
    case '0': return StateVector::from_amplitudes({1.0, 0.0});
    case '1': return StateVector::from_amplitudes({0.0, 1.0});
    case '+': return StateVector::from_amplitudes({inv_sqrt2, inv_sqrt2});
    case '-': return StateVector::from_amplitudes({inv_sqrt2, -inv_sqrt2});
  }
  throw std::invalid_argument(std::string("unknown state symbol: ") + symbol);
}

// Product ket from per-qubit symbols, first symbol = qubit 0.
inline StateVector ket_from_symbols(std::string_view symbols) {
  if (!is_decoy_symbols(symbols))
    throw std::invalid_argument("state symbols must be over {0,1,+,-}");
  StateVector state = ket_symbol(symbols[0]);
  for (std::size_t i = 1; i < symbols.size(); ++i) state = state.tensor(ket_symbol(symbols[i]));
  return state;
}

inline constexpr std::array<BellLabel, 4> all_bell_labels = {
    BellLabel::PsiPlus, BellLabel::PsiMinus, BellLabel::PhiPlus, BellLabel::PhiMinus};

}  // namespace qsdc
