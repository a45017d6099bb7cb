#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qubench {

enum class Vartype : std::uint8_t { Spin, Binary };

std::string_view to_string(Vartype vt);
Vartype parse_vartype(std::string_view text);

using VariableId = std::uint32_t;
using VariablePair = std::pair<VariableId, VariableId>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A binary quadratic model over dense variable ids 0..n-1.
///
/// Interactions are keyed by (u, v) with u < v, so iteration is in ascending
/// id order. `variable_labels` holds the external id of each dense variable
/// when the model was imported from (or built on) a sparse id space, e.g. the
/// qubit ids of a hardware graph with disabled qubits.
class BinaryQuadraticModel {
 public:
  explicit BinaryQuadraticModel(Vartype vartype = Vartype::Spin,
                                std::size_t num_variables = 0);

  Vartype vartype() const { return vartype_; }
  std::size_t num_variables() const { return linear_.size(); }
  std::size_t num_interactions() const { return quadratic_.size(); }

  VariableId add_variable(double bias = 0.0);
  void resize(std::size_t num_variables);

  double linear(VariableId v) const;
  void set_linear(VariableId v, double bias);
  void add_linear(VariableId v, double bias);
  const std::vector<double>& linear_biases() const { return linear_; }

  double quadratic(VariableId u, VariableId v) const;
  bool has_interaction(VariableId u, VariableId v) const;
  void set_quadratic(VariableId u, VariableId v, double bias);
  void add_quadratic(VariableId u, VariableId v, double bias);
  const std::map<VariablePair, double>& interactions() const {
    return quadratic_;
  }

  double offset() const { return offset_; }
  void set_offset(double offset) { offset_ = offset; }
  void add_offset(double delta) { offset_ += delta; }

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// External id of each variable; empty means the identity mapping.
  const std::vector<std::int64_t>& variable_labels() const {
    return variable_labels_;
  }
  void set_variable_labels(std::vector<std::int64_t> labels);
  std::int64_t external_label(VariableId v) const;

  /// Neighbour lists with coupling weights, indexed by variable.
  std::vector<std::vector<std::pair<VariableId, double>>> adjacency() const;

  bool operator==(const BinaryQuadraticModel& other) const = default;

 private:
  VariablePair key(VariableId u, VariableId v) const;
  void check_variable(VariableId v) const;

  Vartype vartype_;
  std::vector<double> linear_;
  std::map<VariablePair, double> quadratic_;
  double offset_ = 0.0;
  std::string label_;
  std::vector<std::int64_t> variable_labels_;
};

using BQM = BinaryQuadraticModel;

/// Values of every model variable, in {-1,+1} for spin or {0,1} for binary.
struct Assignment {
  Vartype vartype = Vartype::Spin;
  std::vector<std::int8_t> values;

  bool operator==(const Assignment&) const = default;
};

/// Checked energy evaluation: validates coverage, vartype and value domain.
double energy(const BQM& model, const Assignment& assignment);

/// Energy of raw values interpreted in the model's own vartype. Only the
/// length is checked; used in solver hot paths.
double energy(const BQM& model, std::span<const std::int8_t> values);

/// Energy-equivalent model in the target vartype, related by x = 2b - 1.
BQM convert(const BQM& model, Vartype target);

/// Converts assignment values between domains with x = 2b - 1.
Assignment convert(const Assignment& assignment, Vartype target);

struct SpinReversal {
  BQM model;
  std::vector<VariableId> flips;
};

/// Gauge transform: negates h_i for flipped i and J_ij when exactly one end is
/// flipped. energy(model, x) == energy(result.model, flip(x, result.flips)).
SpinReversal apply_srt(const BQM& model, std::span<const VariableId> flips);

/// Negates the listed spins.
Assignment flip_spins(const Assignment& assignment,
                      std::span<const VariableId> flips);

// JSON interchange
nlohmann::json to_json(const BQM& model);
BQM bqm_from_json(const nlohmann::json& doc);
std::string dump_bqm(const BQM& model);
void save_bqm(const BQM& model, const std::filesystem::path& path);
BQM load_bqm(const std::filesystem::path& path);

}  // namespace qubench
