#pragma once

// Independent reference computations for tests: dense-matrix energies and
// exhaustive enumeration.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qubench/model.hpp"
#include "qubench/rng.hpp"

namespace oracle {

using qubench::BQM;
using qubench::Vartype;

inline BQM random_bqm(std::size_t n, Vartype vt, qubench::Rng& rng, double density = 0.5,
                      bool integer = false) {
  BQM m(vt, n);
  auto draw = [&]() {
    if (integer) return static_cast<double>(static_cast<int>(qubench::uniform_below(rng, 7)) - 3);
    return 4.0 * qubench::uniform01(rng) - 2.0;
  };
  for (std::size_t i = 0; i < n; ++i) m.set_linear(i, draw());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (qubench::uniform01(rng) < density) m.set_quadratic(i, j, draw());
  m.set_offset(draw());
  return m;
}

inline std::vector<std::vector<double>> dense(const BQM& m) {
  const std::size_t n = m.num_variables();
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) q[i][i] = m.linear(i);
  for (const auto& [uv, b] : m.interactions()) q[uv.first][uv.second] = b;
  return q;
}

/// Double loop over the dense coefficient matrix: the diagonal first, then
/// the upper triangle row by row, then the offset. This is the summation
/// order energy() documents, so results agree bit for bit.
inline double energy(const BQM& m, const std::vector<std::int8_t>& x) {
  const auto q = dense(m);
  double e = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) e += q[i][i] * x[i];
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j) e += q[i][j] * x[i] * x[j];
  return e + m.offset();
}

/// Calls fn for every assignment of n variables in the given domain.
inline void enumerate(std::size_t n, Vartype vt, const std::function<void(const std::vector<std::int8_t>&)>& fn) {
  std::vector<std::int8_t> x(n);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (bits >> i) & 1u;
      x[i] = vt == Vartype::Spin ? (up ? 1 : -1) : (up ? 1 : 0);
    }
    fn(x);
  }
}

struct Ground {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::int8_t>> states;
};

/// Exhaustive minimum by a Gray-code walk over the dense matrix; each step
/// flips one variable and updates the energy by its local field.
inline Ground ground(const BQM& m, double tol = 1e-9) {
  const std::size_t n = m.num_variables();
  const auto q = dense(m);
  std::vector<std::int8_t> x(n, m.vartype() == Vartype::Spin ? -1 : 0);
  double e = energy(m, x);
  Ground g;
  auto offer = [&]() {
    if (e < g.energy - tol) {
      g.energy = e;
      g.states = {x};
    } else if (std::abs(e - g.energy) <= tol) {
      g.states.push_back(x);
    }
  };
  offer();
  for (std::uint64_t k = 1; k < (std::uint64_t{1} << n); ++k) {
    std::size_t i = 0;
    while (!((k >> i) & 1u)) ++i;
    double field = q[i][i];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) field += q[std::min(i, j)][std::max(i, j)] * x[j];
    const std::int8_t next = m.vartype() == Vartype::Spin ? static_cast<std::int8_t>(-x[i])
                                                          : static_cast<std::int8_t>(1 - x[i]);
    e += field * (next - x[i]);
    x[i] = next;
    offer();
  }
  // Drift from incremental updates is bounded; recompute the reported value.
  if (!g.states.empty()) g.energy = energy(m, g.states.front());
  return g;
}

/// Spin-glass model on the given edge list with J drawn from {-1, +1}.
inline BQM spin_glass(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                      qubench::Rng& rng) {
  BQM m(Vartype::Spin, n);
  for (auto [a, b] : edges) m.set_quadratic(a, b, qubench::uniform_below(rng, 2) ? 1.0 : -1.0);
  return m;
}

}  // namespace oracle
