#pragma once

// Dense statevector simulator for small protocol circuits (1..10 qubits).
// Qubit 0 is the leftmost ket symbol; a basis index is the bit pattern read
// left to right, so |q0 q1 ... q_{n-1}> has index sum_k q_k * 2^(n-1-k).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsdc {

using complex = std::complex<double>;

inline constexpr int max_qubits = 10;
inline constexpr double norm_tolerance = 1e-12;

// ---------------------------------------------------------------------------
// Seeded randomness. Streams are derived from a root seed and an id path, so
// independent batches (shots, positions, trials) can be drawn in any order or
// in parallel without changing results.

struct RngSeed {
  std::uint64_t value = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : engine_(state) {}

  // Uniform double in [0, 1) built from the top 53 bits of the engine output.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline RngStream derive_stream(RngSeed seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(seed.value);
  for (std::uint64_t id : path) s = splitmix64(s ^ splitmix64(id));
  return RngStream(s);
}

// ---------------------------------------------------------------------------
// Gates. The simulator's whole gate set; operand indices must be distinct.

enum class GateKind { H, X, Z, Cnot, Cswap };

struct GateOp {
  GateKind kind;
  int q0 = -1;  // target (H/X/Z), control (Cnot/Cswap)
  int q1 = -1;  // target (Cnot), first swap operand (Cswap)
  int q2 = -1;  // second swap operand (Cswap)
};

namespace gate {
inline GateOp h(int q) { return {GateKind::H, q}; }
inline GateOp x(int q) { return {GateKind::X, q}; }
inline GateOp z(int q) { return {GateKind::Z, q}; }
inline GateOp cnot(int control, int target) { return {GateKind::Cnot, control, target}; }
inline GateOp cswap(int control, int a, int b) { return {GateKind::Cswap, control, a, b}; }
}  // namespace gate

// ---------------------------------------------------------------------------

class StateVector {
 public:
  explicit StateVector(int num_qubits) : n_(num_qubits) {
    if (num_qubits < 1 || num_qubits > max_qubits)
      throw std::invalid_argument("qubit count must be in 1..10");
    amps_.assign(std::size_t{1} << num_qubits, complex{0.0, 0.0});
    amps_[0] = 1.0;
  }

  static StateVector from_amplitudes(std::vector<complex> amps) {
    int n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if (amps.empty() || (std::size_t{1} << n) != amps.size())
      throw std::invalid_argument("amplitude count must be a power of two");
    StateVector s(n);
    s.amps_ = std::move(amps);
    if (std::abs(s.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("state is not normalized");
    return s;
  }

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  complex amplitude(std::size_t index) const { return amps_.at(index); }
  const std::vector<complex>& amplitudes() const { return amps_; }

  double norm() const {
    double s = 0.0;
    for (const complex& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  // Mask with the single bit of qubit q set (big-endian position).
  std::size_t qubit_mask(int q) const {
    check_qubit(q);
    return std::size_t{1} << (n_ - 1 - q);
  }

  int bit_at(std::size_t index, int q) const { return (index & qubit_mask(q)) ? 1 : 0; }

  void apply(const GateOp& op) {
    switch (op.kind) {
      case GateKind::H: apply_h(op.q0); break;
      case GateKind::X: apply_x(op.q0); break;
      case GateKind::Z: apply_z(op.q0); break;
      case GateKind::Cnot: apply_cnot(op.q0, op.q1); break;
      case GateKind::Cswap: apply_cswap(op.q0, op.q1, op.q2); break;
    }
  }

  void apply(const std::vector<GateOp>& ops) {
    for (const GateOp& op : ops) apply(op);
  }

  StateVector tensor(const StateVector& rhs) const {
    if (n_ + rhs.n_ > max_qubits)
      throw std::invalid_argument("tensor product exceeds 10 qubits");
    StateVector out(n_ + rhs.n_);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      for (std::size_t j = 0; j < rhs.amps_.size(); ++j)
        out.amps_[(i << rhs.n_) | j] = amps_[i] * rhs.amps_[j];
    return out;
  }

 private:
  void check_qubit(int q) const {
    if (q < 0 || q >= n_) throw std::out_of_range("qubit index out of range");
  }

  void apply_h(int q) {
    const std::size_t m = qubit_mask(q);
    const double inv_sqrt2 = 0.7071067811865476;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & m) continue;
      const complex a0 = amps_[i], a1 = amps_[i | m];
      amps_[i] = (a0 + a1) * inv_sqrt2;
      amps_[i | m] = (a0 - a1) * inv_sqrt2;
    }
  }

  void apply_x(int q) {
    const std::size_t m = qubit_mask(q);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (!(i & m)) std::swap(amps_[i], amps_[i | m]);
  }

  void apply_z(int q) {
    const std::size_t m = qubit_mask(q);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (i & m) amps_[i] = -amps_[i];
  }

  void apply_cnot(int control, int target) {
    const std::size_t mc = qubit_mask(control), mt = qubit_mask(target);
    if (control == target) throw std::invalid_argument("cnot operands must differ");
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & mc) && !(i & mt)) std::swap(amps_[i], amps_[i | mt]);
  }

  void apply_cswap(int control, int a, int b) {
    if (control == a || control == b || a == b)
      throw std::invalid_argument("cswap operands must be distinct");
    const std::size_t mc = qubit_mask(control), ma = qubit_mask(a), mb = qubit_mask(b);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & mc) && (i & ma) && !(i & mb)) std::swap(amps_[i], amps_[(i ^ ma) | mb]);
  }

  int n_;
  std::vector<complex> amps_;
};

inline complex inner_product(const StateVector& lhs, const StateVector& rhs) {
  if (lhs.num_qubits() != rhs.num_qubits())
    throw std::invalid_argument("inner product needs equal qubit counts");
  complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < lhs.dim(); ++i)
    acc += std::conj(lhs.amplitude(i)) * rhs.amplitude(i);
  return acc;
}

// Equality within tolerance, optionally modulo a global phase (the phase is
// taken from the largest-magnitude amplitude of lhs).
inline bool approx_equal(const StateVector& lhs, const StateVector& rhs, double tol,
                         bool up_to_global_phase = false) {
  if (lhs.num_qubits() != rhs.num_qubits()) return false;
  complex phase{1.0, 0.0};
  if (up_to_global_phase) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < lhs.dim(); ++i)
      if (std::abs(lhs.amplitude(i)) > std::abs(lhs.amplitude(k))) k = i;
    if (std::abs(lhs.amplitude(k)) < tol || std::abs(rhs.amplitude(k)) < tol) return false;
    phase = lhs.amplitude(k) / rhs.amplitude(k);
    phase /= std::abs(phase);
  }
  for (std::size_t i = 0; i < lhs.dim(); ++i)
    if (std::abs(lhs.amplitude(i) - phase * rhs.amplitude(i)) > tol) return false;
  return true;
}

// Purity of the reduced state on `keep`; 1 means the kept qubits are in a
// pure state, i.e. unentangled with the rest of the register.
inline double reduced_purity(const StateVector& state, const std::vector<int>& keep) {
  const int n = state.num_qubits();
  const int k = static_cast<int>(keep.size());
  if (k == 0 || k > n) throw std::invalid_argument("bad subset size");
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  if (static_cast<int>(rest.size()) + k != n)
    throw std::invalid_argument("subset has repeated qubits");

  auto compose = [&](const std::vector<int>& qs, std::size_t bits) {
    std::size_t index = 0;
    for (std::size_t j = 0; j < qs.size(); ++j)
      if (bits & (std::size_t{1} << j)) index |= state.qubit_mask(qs[j]);
    return index;
  };

  const std::size_t dk = std::size_t{1} << k;
  const std::size_t dr = std::size_t{1} << rest.size();
  double purity = 0.0;
  for (std::size_t x = 0; x < dk; ++x) {
    for (std::size_t y = 0; y < dk; ++y) {
      complex rho{0.0, 0.0};
      for (std::size_t e = 0; e < dr; ++e) {
        const std::size_t env = compose(rest, e);
        rho += state.amplitude(compose(keep, x) | env) *
               std::conj(state.amplitude(compose(keep, y) | env));
      }
      purity += std::norm(rho);
    }
  }
  return purity;
}

// ---------------------------------------------------------------------------
// Measurement. Projective, computational basis, Born rule; the full register
// is kept and renormalized so later operations can keep using it.

struct MeasureResult {
  std::string bits;   // one char per measured qubit, in the order given
  StateVector state;  // collapsed full register
};

namespace detail {

inline void check_measured_qubits(int n, const std::vector<int>& qubits) {
  if (qubits.empty()) throw std::invalid_argument("no qubits to measure");
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] < 0 || qubits[i] >= n) throw std::out_of_range("qubit index out of range");
    for (std::size_t j = i + 1; j < qubits.size(); ++j)
      if (qubits[i] == qubits[j]) throw std::invalid_argument("repeated measured qubit");
  }
}

// Probability of each joint outcome of `qubits`, indexed by the outcome bits
// read in list order (first listed qubit = most significant bit).
inline std::vector<double> outcome_distribution(const StateVector& state,
                                                const std::vector<int>& qubits) {
  check_measured_qubits(state.num_qubits(), qubits);
  const int m = static_cast<int>(qubits.size());
  std::vector<double> probs(std::size_t{1} << m, 0.0);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    std::size_t key = 0;
    for (int j = 0; j < m; ++j) key = (key << 1) | std::size_t(state.bit_at(i, qubits[j]));
    probs[key] += std::norm(state.amplitude(i));
  }
  return probs;
}

inline std::size_t draw_outcome(const std::vector<double>& probs, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_nonzero = k;
    acc += probs[k];
    if (u < acc) return k;
  }
  return last_nonzero;  // rounding pushed u past the cumulative sum
}

inline std::string outcome_bits(std::size_t key, int m) {
  std::string bits(m, '0');
  for (int j = 0; j < m; ++j)
    if (key & (std::size_t{1} << (m - 1 - j))) bits[j] = '1';
  return bits;
}

}  // namespace detail

inline MeasureResult measure(const StateVector& state, const std::vector<int>& qubits,
                             RngStream& rng) {
  const std::vector<double> probs = detail::outcome_distribution(state, qubits);
  const int m = static_cast<int>(qubits.size());
  const std::size_t key = detail::draw_outcome(probs, rng);

  std::vector<complex> amps(state.dim(), complex{0.0, 0.0});
  const double scale = 1.0 / std::sqrt(probs[key]);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    std::size_t k = 0;
    for (int j = 0; j < m; ++j) k = (k << 1) | std::size_t(state.bit_at(i, qubits[j]));
    if (k == key) amps[i] = state.amplitude(i) * scale;
  }
  return {detail::outcome_bits(key, m), StateVector::from_amplitudes(std::move(amps))};
}

// ---------------------------------------------------------------------------
// Shot sampling. The circuit runs once; shots are drawn from the exact final
// distribution of the measured qubits, which matches per-shot execution.

struct ShotHistogram {
  std::uint64_t shots = 0;
  std::vector<int> measured_qubits;
  std::map<std::string, std::uint64_t> counts;
};

inline ShotHistogram sample_state_shots(const StateVector& state, const std::vector<int>& measured,
                                        std::uint64_t shots, RngStream& rng) {
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  const std::vector<double> probs = detail::outcome_distribution(state, measured);
  const int m = static_cast<int>(measured.size());
  ShotHistogram hist{shots, measured, {}};
  for (std::uint64_t s = 0; s < shots; ++s)
    ++hist.counts[detail::outcome_bits(detail::draw_outcome(probs, rng), m)];
  return hist;
}

inline ShotHistogram sample_shots(int num_qubits, const std::vector<GateOp>& circuit,
                                  const std::vector<int>& measured, std::uint64_t shots,
                                  RngSeed seed) {
  StateVector state(num_qubits);
  state.apply(circuit);
  RngStream rng = derive_stream(seed, {0x73686f74ull});
  return sample_state_shots(state, measured, shots, rng);
}

}  // namespace qsdc
