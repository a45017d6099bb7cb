#include <fstream>
#include <set>
#include <sstream>

#include "qubench/harness.hpp"
#include "toml.hpp"

namespace qubench {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw HarnessError("suite config: " + what); }

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : t)
    if (!allowed.count(std::string(k.str())))
      bad("unknown key '" + std::string(k.str()) + "'" + (where.empty() ? "" : " in [" + where + "]"));
}

double number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  bad("'" + key + "' must be a number");
}

std::int64_t integer(const toml::node& n, const std::string& key) {
  if (auto v = n.value<std::int64_t>()) return *v;
  bad("'" + key + "' must be an integer");
}

std::string text(const toml::node& n, const std::string& key) {
  if (auto v = n.value<std::string>()) return *v;
  bad("'" + key + "' must be a string");
}

const toml::array& array(const toml::node& n, const std::string& key) {
  if (auto a = n.as_array()) return *a;
  bad("'" + key + "' must be an array");
}

std::vector<Scenario> scenario_pairs(const toml::node& n, const std::string& key) {
  std::vector<Scenario> out;
  for (const auto& item : array(n, key)) {
    const auto& pair = array(item, key);
    if (pair.size() != 2) bad("'" + key + "' entries must be [s, t] pairs");
    out.push_back({static_cast<int>(integer(*pair.get(0), key)), number(*pair.get(1), key)});
  }
  return out;
}

ClassEntry parse_class_entry(const toml::node& n, const std::filesystem::path& base_dir) {
  ClassEntry c;
  if (auto s = n.value<std::string>()) {
    // Shorthand "TAG:size".
    const auto colon = s->find(':');
    c.tag = parse_class_tag(s->substr(0, colon));
    if (colon != std::string::npos) {
      try {
        c.size = std::stoi(s->substr(colon + 1));
      } catch (const std::exception&) {
        bad("bad class size in '" + *s + "'");
      }
    }
    return c;
  }
  const auto* t = n.as_table();
  if (!t) bad("class entries must be strings or tables");
  check_keys(*t, {"tag", "size", "import_dir"}, "classes");
  if (!t->contains("tag")) bad("class entry without 'tag'");
  c.tag = parse_class_tag(text(*t->get("tag"), "tag"));
  if (auto v = t->get("size")) c.size = static_cast<int>(integer(*v, "size"));
  if (auto v = t->get("import_dir")) {
    std::filesystem::path p = text(*v, "import_dir");
    c.import_dir = p.is_absolute() ? p : base_dir / p;
  }
  return c;
}

}  // namespace

SuiteConfig parse_suite_config(std::string_view source, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    bad(msg.str());
  }
  check_keys(root,
             {"classes", "instances", "solvers", "scenarios", "hardware", "node_yield", "edge_yield",
              "master_seed", "output", "jobs", "timing", "dispatch", "qpu"},
             "");
  SuiteConfig c;
  if (auto v = root.get("classes"))
    for (const auto& item : array(*v, "classes")) c.classes.push_back(parse_class_entry(item, base_dir));
  if (auto v = root.get("instances")) c.instances = static_cast<int>(integer(*v, "instances"));
  if (auto v = root.get("solvers")) {
    c.solvers.clear();
    for (const auto& item : array(*v, "solvers")) c.solvers.push_back(text(item, "solvers"));
  }
  if (auto v = root.get("hardware")) {
    c.hardware = text(*v, "hardware");
    if (c.hardware.rfind("pegasus:", 0) != 0 && std::filesystem::path(c.hardware).is_relative() &&
        !base_dir.empty())
      c.hardware = (base_dir / c.hardware).string();
  }
  if (auto v = root.get("node_yield")) c.node_yield = number(*v, "node_yield");
  if (auto v = root.get("edge_yield")) c.edge_yield = number(*v, "edge_yield");
  if (auto v = root.get("master_seed")) c.master_seed = static_cast<std::uint64_t>(integer(*v, "master_seed"));
  if (auto v = root.get("output")) {
    std::filesystem::path p = text(*v, "output");
    c.output = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (auto v = root.get("jobs")) c.jobs = static_cast<int>(integer(*v, "jobs"));
  if (auto v = root.get("dispatch")) c.harness.dispatch = parse_dispatch(text(*v, "dispatch"));

  if (auto v = root.get("scenarios")) {
    const auto* t = v->as_table();
    if (!t) bad("[scenarios] must be a table");
    check_keys(*t, {"s", "t", "floor", "exclude", "list"}, "scenarios");
    if (auto x = t->get("s")) {
      c.grid.sample_counts.clear();
      for (const auto& item : array(*x, "s")) c.grid.sample_counts.push_back(static_cast<int>(integer(item, "s")));
    }
    if (auto x = t->get("t")) {
      c.grid.time_limits.clear();
      for (const auto& item : array(*x, "t")) c.grid.time_limits.push_back(number(item, "t"));
    }
    if (auto x = t->get("floor")) c.grid.floor = number(*x, "floor");
    if (auto x = t->get("exclude")) c.grid.exclude = scenario_pairs(*x, "exclude");
    if (auto x = t->get("list")) c.scenarios = scenario_pairs(*x, "list");
  }
  if (auto v = root.get("timing")) {
    const auto* t = v->as_table();
    if (!t) bad("[timing] must be a table");
    check_keys(*t, {"mode", "seconds_per_op"}, "timing");
    if (auto x = t->get("mode")) c.harness.mode = parse_timing_mode(text(*x, "mode"));
    if (auto x = t->get("seconds_per_op")) c.harness.seconds_per_op = number(*x, "seconds_per_op");
  }
  if (auto v = root.get("qpu")) {
    const auto* t = v->as_table();
    if (!t) bad("[qpu] must be a table");
    check_keys(*t, {"endpoint", "mock_temperature", "mock_anneal_sweeps", "mock_thermal_sweeps"}, "qpu");
    if (auto x = t->get("endpoint")) c.harness.qpu_endpoint = text(*x, "endpoint");
    if (auto x = t->get("mock_temperature")) c.harness.mock.effective_temperature = number(*x, "mock_temperature");
    if (auto x = t->get("mock_anneal_sweeps"))
      c.harness.mock.anneal_sweeps = static_cast<int>(integer(*x, "mock_anneal_sweeps"));
    if (auto x = t->get("mock_thermal_sweeps"))
      c.harness.mock.thermal_sweeps = static_cast<int>(integer(*x, "mock_thermal_sweeps"));
  }
  if (c.instances < 1) bad("instances must be >= 1");
  if (c.jobs < 1) bad("jobs must be >= 1");
  if (!(c.harness.seconds_per_op > 0.0)) bad("seconds_per_op must be positive");
  if (!(c.node_yield > 0.0 && c.node_yield <= 1.0 && c.edge_yield > 0.0 && c.edge_yield <= 1.0))
    bad("yields must lie in (0, 1]");
  for (const auto& cls : c.classes)
    if (cls.size < 0) bad("class sizes must be non-negative");
  return c;
}

SuiteConfig load_suite_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_suite_config(buf.str(), path.parent_path());
}

json to_json(const SuiteConfig& c) {
  json classes = json::array();
  for (const auto& cls : c.classes) {
    json e{{"tag", std::string(to_string(cls.tag))}, {"size", cls.size}};
    if (!cls.import_dir.empty()) e["import_dir"] = cls.import_dir.string();
    classes.push_back(std::move(e));
  }
  auto pairs = [](const std::vector<Scenario>& v) {
    json a = json::array();
    for (const auto& sc : v) a.push_back(json::array({sc.s, sc.t}));
    return a;
  };
  json doc{{"classes", std::move(classes)},
           {"instances", c.instances},
           {"solvers", c.solvers},
           {"scenarios",
            {{"s", c.grid.sample_counts},
             {"t", c.grid.time_limits},
             {"floor", c.grid.floor},
             {"exclude", pairs(c.grid.exclude)}}},
           {"hardware", c.hardware},
           {"node_yield", c.node_yield},
           {"edge_yield", c.edge_yield},
           {"master_seed", c.master_seed},
           {"output", c.output.string()},
           {"jobs", c.jobs},
           {"timing", {{"mode", std::string(to_string(c.harness.mode))}, {"seconds_per_op", c.harness.seconds_per_op}}},
           {"dispatch", std::string(to_string(c.harness.dispatch))},
           {"qpu",
            {{"endpoint", c.harness.qpu_endpoint},
             {"mock_temperature", c.harness.mock.effective_temperature},
             {"mock_anneal_sweeps", c.harness.mock.anneal_sweeps},
             {"mock_thermal_sweeps", c.harness.mock.thermal_sweeps}}}};
  if (c.scenarios) doc["scenarios"]["list"] = pairs(*c.scenarios);
  return doc;
}

}  // namespace qubench
