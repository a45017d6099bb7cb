#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qubench/model.hpp"

namespace qubench {

/// Compressed spin form of a model for solver inner loops: fields h, CSR
/// neighbour lists with couplings, and the constant offset.
struct SpinProblem {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> h;
  std::vector<std::size_t> row;  // size n + 1
  std::vector<VariableId> col;
  std::vector<double> weight;
  double offset = 0.0;

  static SpinProblem from(const BQM& model);

  std::size_t degree(std::size_t i) const { return row[i + 1] - row[i]; }
  double energy(std::span<const std::int8_t> spins) const;
  /// h_i + sum_j J_ij x_j for every i.
  void local_fields(std::span<const std::int8_t> spins, std::vector<double>& out) const;

  /// Largest possible |energy change| of one flip, 2 max_i (|h_i| + sum |J_ij|).
  double max_flip_delta() const;
  /// Smallest nonzero |bias|, or 0 for an all-zero model.
  double min_nonzero_bias() const;
  /// Largest |bias|; used as the scale for comparison tolerances.
  double max_abs_bias() const;
};

/// Converts solver-side spins into values of `model`'s vartype.
std::vector<std::int8_t> to_model_values(const BQM& model, std::span<const std::int8_t> spins);

}  // namespace qubench
