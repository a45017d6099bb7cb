#include "qubench/spin_problem.hpp"

#include <algorithm>
#include <cmath>

namespace qubench {

SpinProblem SpinProblem::from(const BQM& model) {
  const BQM spin = model.vartype() == Vartype::Spin ? model : convert(model, Vartype::Spin);
  SpinProblem p;
  p.n = spin.num_variables();
  p.m = spin.num_interactions();
  p.h = spin.linear_biases();
  p.offset = spin.offset();
  p.row.assign(p.n + 1, 0);
  for (const auto& [uv, J] : spin.interactions()) {
    ++p.row[uv.first + 1];
    ++p.row[uv.second + 1];
  }
  for (std::size_t i = 0; i < p.n; ++i) p.row[i + 1] += p.row[i];
  p.col.resize(p.row[p.n]);
  p.weight.resize(p.row[p.n]);
  std::vector<std::size_t> fill(p.row.begin(), p.row.end() - 1);
  for (const auto& [uv, J] : spin.interactions()) {
    p.col[fill[uv.first]] = uv.second;
    p.weight[fill[uv.first]++] = J;
    p.col[fill[uv.second]] = uv.first;
    p.weight[fill[uv.second]++] = J;
  }
  return p;
}

double SpinProblem::energy(std::span<const std::int8_t> x) const {
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) e += h[i] * x[i];
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = row[i]; k < row[i + 1]; ++k)
      if (col[k] > i) q += weight[k] * x[i] * x[col[k]];
  return e + q + offset;
}

void SpinProblem::local_fields(std::span<const std::int8_t> x, std::vector<double>& out) const {
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double f = h[i];
    for (std::size_t k = row[i]; k < row[i + 1]; ++k) f += weight[k] * x[col[k]];
    out[i] = f;
  }
}

double SpinProblem::max_flip_delta() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = std::abs(h[i]);
    for (std::size_t k = row[i]; k < row[i + 1]; ++k) s += std::abs(weight[k]);
    best = std::max(best, 2.0 * s);
  }
  return best;
}

double SpinProblem::min_nonzero_bias() const {
  double best = 0.0;
  auto consider = [&](double b) {
    b = std::abs(b);
    if (b > 0.0 && (best == 0.0 || b < best)) best = b;
  };
  for (double b : h) consider(b);
  for (double b : weight) consider(b);
  return best;
}

double SpinProblem::max_abs_bias() const {
  double best = 0.0;
  for (double b : h) best = std::max(best, std::abs(b));
  for (double b : weight) best = std::max(best, std::abs(b));
  return best;
}

std::vector<std::int8_t> to_model_values(const BQM& model, std::span<const std::int8_t> spins) {
  std::vector<std::int8_t> out(spins.begin(), spins.end());
  if (model.vartype() == Vartype::Binary)
    for (auto& v : out) v = v > 0 ? 1 : 0;
  return out;
}

}  // namespace qubench
