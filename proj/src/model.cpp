#include "qubench/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qubench {

using nlohmann::json;

std::string_view to_string(Vartype vt) {
  return vt == Vartype::Spin ? "spin" : "binary";
}

Vartype parse_vartype(std::string_view text) {
  if (text == "spin" || text == "SPIN") return Vartype::Spin;
  if (text == "binary" || text == "BINARY") return Vartype::Binary;
  throw ModelError("unknown vartype '" + std::string(text) + "'");
}

BinaryQuadraticModel::BinaryQuadraticModel(Vartype vartype,
                                           std::size_t num_variables)
    : vartype_(vartype), linear_(num_variables, 0.0) {}

VariableId BinaryQuadraticModel::add_variable(double bias) {
  linear_.push_back(bias);
  return static_cast<VariableId>(linear_.size() - 1);
}

void BinaryQuadraticModel::resize(std::size_t num_variables) {
  if (num_variables < linear_.size()) {
    throw ModelError("resize cannot drop variables");
  }
  linear_.resize(num_variables, 0.0);
}

void BinaryQuadraticModel::check_variable(VariableId v) const {
  if (v >= linear_.size()) {
    throw ModelError("unknown variable " + std::to_string(v));
  }
}

double BinaryQuadraticModel::linear(VariableId v) const {
  check_variable(v);
  return linear_[v];
}

void BinaryQuadraticModel::set_linear(VariableId v, double bias) {
  check_variable(v);
  linear_[v] = bias;
}

void BinaryQuadraticModel::add_linear(VariableId v, double bias) {
  check_variable(v);
  linear_[v] += bias;
}

VariablePair BinaryQuadraticModel::key(VariableId u, VariableId v) const {
  if (u == v) {
    throw ModelError("self-loop on variable " + std::to_string(u));
  }
  check_variable(u);
  check_variable(v);
  return u < v ? VariablePair{u, v} : VariablePair{v, u};
}

double BinaryQuadraticModel::quadratic(VariableId u, VariableId v) const {
  auto it = quadratic_.find(key(u, v));
  return it == quadratic_.end() ? 0.0 : it->second;
}

bool BinaryQuadraticModel::has_interaction(VariableId u, VariableId v) const {
  if (u == v || u >= linear_.size() || v >= linear_.size()) return false;
  return quadratic_.count(key(u, v)) > 0;
}

void BinaryQuadraticModel::set_quadratic(VariableId u, VariableId v,
                                         double bias) {
  quadratic_[key(u, v)] = bias;
}

void BinaryQuadraticModel::add_quadratic(VariableId u, VariableId v,
                                         double bias) {
  quadratic_[key(u, v)] += bias;
}

void BinaryQuadraticModel::set_variable_labels(
    std::vector<std::int64_t> labels) {
  if (!labels.empty() && labels.size() != linear_.size()) {
    throw ModelError("label table size " + std::to_string(labels.size()) +
                     " does not match " + std::to_string(linear_.size()) +
                     " variables");
  }
  variable_labels_ = std::move(labels);
}

std::int64_t BinaryQuadraticModel::external_label(VariableId v) const {
  check_variable(v);
  return variable_labels_.empty() ? static_cast<std::int64_t>(v)
                                  : variable_labels_[v];
}

std::vector<std::vector<std::pair<VariableId, double>>>
BinaryQuadraticModel::adjacency() const {
  std::vector<std::vector<std::pair<VariableId, double>>> adj(linear_.size());
  for (const auto& [uv, bias] : quadratic_) {
    adj[uv.first].emplace_back(uv.second, bias);
    adj[uv.second].emplace_back(uv.first, bias);
  }
  return adj;
}

namespace {

void check_assignment(const BQM& model, const Assignment& a) {
  if (a.vartype != model.vartype()) {
    throw ModelError("vartype mismatch: model is " +
                     std::string(to_string(model.vartype())) +
                     ", assignment is " + std::string(to_string(a.vartype)));
  }
  if (a.values.size() < model.num_variables()) {
    throw ModelError("assignment is missing variable " +
                     std::to_string(a.values.size()));
  }
  if (a.values.size() > model.num_variables()) {
    throw ModelError("assignment has " + std::to_string(a.values.size()) +
                     " values for " + std::to_string(model.num_variables()) +
                     " variables");
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const int x = a.values[i];
    const bool ok = model.vartype() == Vartype::Spin ? (x == -1 || x == 1)
                                                     : (x == 0 || x == 1);
    if (!ok) {
      throw ModelError("variable " + std::to_string(i) + " has value " +
                       std::to_string(x) + " outside the " +
                       std::string(to_string(model.vartype())) + " domain");
    }
  }
}

}  // namespace

double energy(const BQM& model, std::span<const std::int8_t> values) {
  if (values.size() != model.num_variables()) {
    throw ModelError("assignment length " + std::to_string(values.size()) +
                     " does not match " +
                     std::to_string(model.num_variables()) + " variables");
  }
  // linear terms, then quadratic terms, both in ascending id order
  double total = 0.0;
  const auto& h = model.linear_biases();
  for (std::size_t i = 0; i < h.size(); ++i) total += h[i] * values[i];
  for (const auto& [uv, bias] : model.interactions()) {
    total += bias * values[uv.first] * values[uv.second];
  }
  return total + model.offset();
}

double energy(const BQM& model, const Assignment& assignment) {
  check_assignment(model, assignment);
  return energy(model, std::span<const std::int8_t>(assignment.values));
}

BQM convert(const BQM& model, Vartype target) {
  if (model.vartype() == target) return model;
  BQM out(target, model.num_variables());
  out.set_label(model.label());
  out.set_variable_labels(model.variable_labels());
  double offset = model.offset();
  const auto& lin = model.linear_biases();
  if (target == Vartype::Binary) {
    // x = 2b - 1
    for (std::size_t i = 0; i < lin.size(); ++i) {
      out.add_linear(static_cast<VariableId>(i), 2.0 * lin[i]);
      offset -= lin[i];
    }
    for (const auto& [uv, j] : model.interactions()) {
      out.add_quadratic(uv.first, uv.second, 4.0 * j);
      out.add_linear(uv.first, -2.0 * j);
      out.add_linear(uv.second, -2.0 * j);
      offset += j;
    }
  } else {
    // b = (x + 1) / 2
    for (std::size_t i = 0; i < lin.size(); ++i) {
      out.add_linear(static_cast<VariableId>(i), 0.5 * lin[i]);
      offset += 0.5 * lin[i];
    }
    for (const auto& [uv, q] : model.interactions()) {
      out.add_quadratic(uv.first, uv.second, 0.25 * q);
      out.add_linear(uv.first, 0.25 * q);
      out.add_linear(uv.second, 0.25 * q);
      offset += 0.25 * q;
    }
  }
  out.set_offset(offset);
  return out;
}

Assignment convert(const Assignment& assignment, Vartype target) {
  if (assignment.vartype == target) return assignment;
  Assignment out{target, assignment.values};
  for (auto& x : out.values) {
    x = target == Vartype::Spin ? static_cast<std::int8_t>(2 * x - 1)
                                : static_cast<std::int8_t>((x + 1) / 2);
  }
  return out;
}

SpinReversal apply_srt(const BQM& model, std::span<const VariableId> flips) {
  if (model.vartype() != Vartype::Spin) {
    throw ModelError("spin reversal requires a spin-valued model");
  }
  std::vector<bool> flipped(model.num_variables(), false);
  for (VariableId v : flips) {
    if (v >= model.num_variables()) {
      throw ModelError("flip mask names unknown variable " +
                       std::to_string(v));
    }
    flipped[v] = true;
  }
  SpinReversal out{model, {}};
  for (VariableId v = 0; v < flipped.size(); ++v) {
    if (flipped[v]) {
      out.flips.push_back(v);
      out.model.set_linear(v, -model.linear(v));
    }
  }
  for (const auto& [uv, j] : model.interactions()) {
    if (flipped[uv.first] != flipped[uv.second]) {
      out.model.set_quadratic(uv.first, uv.second, -j);
    }
  }
  return out;
}

Assignment flip_spins(const Assignment& assignment,
                      std::span<const VariableId> flips) {
  if (assignment.vartype != Vartype::Spin) {
    throw ModelError("flip_spins requires spin values");
  }
  Assignment out = assignment;
  for (VariableId v : flips) {
    if (v >= out.values.size()) {
      throw ModelError("flip mask names unknown variable " +
                       std::to_string(v));
    }
    out.values[v] = static_cast<std::int8_t>(-out.values[v]);
  }
  return out;
}

json to_json(const BQM& model) {
  json linear = json::array();
  for (VariableId v = 0; v < model.num_variables(); ++v) {
    linear.push_back(json::array({model.external_label(v), model.linear(v)}));
  }
  json quadratic = json::array();
  for (const auto& [uv, bias] : model.interactions()) {
    quadratic.push_back(json::array({model.external_label(uv.first),
                                     model.external_label(uv.second), bias}));
  }
  json doc;
  doc["vartype"] = to_string(model.vartype());
  doc["offset"] = model.offset();
  doc["linear"] = std::move(linear);
  doc["quadratic"] = std::move(quadratic);
  doc["label"] = model.label();
  return doc;
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ModelError("field '" + field + "': " + msg);
}

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) field_error(field, "missing");
  return *it;
}

std::int64_t read_id(const json& value, const std::string& where) {
  if (!value.is_number_integer()) field_error(where, "id must be an integer");
  auto id = value.get<std::int64_t>();
  if (id < 0) field_error(where, "id must be non-negative");
  return id;
}

double read_weight(const json& value, const std::string& where) {
  if (!value.is_number()) field_error(where, "weight must be a number");
  return value.get<double>();
}

}  // namespace

BQM bqm_from_json(const json& doc) {
  if (!doc.is_object()) throw ModelError("BQM document must be an object");
  const json& vt = require(doc, "vartype");
  if (!vt.is_string()) field_error("vartype", "must be a string");
  Vartype vartype;
  try {
    vartype = parse_vartype(vt.get<std::string>());
  } catch (const ModelError& e) {
    field_error("vartype", e.what());
  }

  const json& linear = require(doc, "linear");
  if (!linear.is_array()) field_error("linear", "must be an array");
  std::vector<std::int64_t> ids;
  std::vector<double> biases;
  for (std::size_t i = 0; i < linear.size(); ++i) {
    const std::string where = "linear[" + std::to_string(i) + "]";
    const json& entry = linear[i];
    if (!entry.is_array() || entry.size() != 2) {
      field_error(where, "expected [id, h]");
    }
    const auto id = read_id(entry[0], where);
    if (!ids.empty() && id <= ids.back()) {
      field_error(where, "ids must be strictly ascending");
    }
    ids.push_back(id);
    biases.push_back(read_weight(entry[1], where));
  }

  bool dense = true;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != static_cast<std::int64_t>(i)) {
      dense = false;
      break;
    }
  }
  auto dense_id = [&](std::int64_t id, const std::string& where) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) {
      field_error(where, "variable " + std::to_string(id) +
                             " is absent from 'linear'");
    }
    return static_cast<VariableId>(it - ids.begin());
  };

  BQM model(vartype, ids.size());
  for (std::size_t i = 0; i < biases.size(); ++i) {
    model.set_linear(static_cast<VariableId>(i), biases[i]);
  }
  if (!dense) model.set_variable_labels(ids);

  const json& quadratic = require(doc, "quadratic");
  if (!quadratic.is_array()) field_error("quadratic", "must be an array");
  for (std::size_t i = 0; i < quadratic.size(); ++i) {
    const std::string where = "quadratic[" + std::to_string(i) + "]";
    const json& entry = quadratic[i];
    if (!entry.is_array() || entry.size() != 3) {
      field_error(where, "expected [i, j, J]");
    }
    const auto a = read_id(entry[0], where);
    const auto b = read_id(entry[1], where);
    if (a >= b) field_error(where, "requires i < j");
    const VariableId u = dense_id(a, where);
    const VariableId v = dense_id(b, where);
    if (model.has_interaction(u, v)) field_error(where, "duplicate pair");
    model.set_quadratic(u, v, read_weight(entry[2], where));
  }

  if (auto it = doc.find("offset"); it != doc.end()) {
    model.set_offset(read_weight(*it, "offset"));
  }
  if (auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) field_error("label", "must be a string");
    model.set_label(it->get<std::string>());
  }
  return model;
}

std::string dump_bqm(const BQM& model) { return to_json(model).dump(); }

void save_bqm(const BQM& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write " + path.string());
  out << dump_bqm(model) << '\n';
}

BQM load_bqm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
  try {
    return bqm_from_json(doc);
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

}  // namespace qubench
