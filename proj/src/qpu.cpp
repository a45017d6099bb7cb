#include "qubench/qpu.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>

#include "httplib.h"
#include "qubench/spin_problem.hpp"

namespace qubench {

using nlohmann::json;

void AccessTimeModel::validate() const {
  if (!(t_prog > 0 && t_read > 0 && t_anneal > 0 && t_anneal_min > 0 && t_anneal_max > 0))
    throw QpuError("access-time constants must be positive");
  if (t_anneal < t_anneal_min || t_anneal > t_anneal_max)
    throw QpuError("anneal time outside its bounds");
}

std::vector<int> AnnealSchedule::reads_per_block() const {
  if (p < 1 || r < p) throw QpuError("schedule needs p >= 1 and r >= p");
  std::vector<int> out(p, r / p);
  out.back() += r % p;
  return out;
}

double access_time(const AnnealSchedule& sched, const AccessTimeModel& model) {
  if (sched.p < 1) throw QpuError("p must be >= 1");
  if (sched.r < 1) throw QpuError("r must be >= 1");
  return sched.p * model.t_prog + sched.r * (sched.t_anneal + model.t_read);
}

int default_block_reads(const AccessTimeModel& model) {
  return static_cast<int>(std::floor(model.t_prog / (model.t_anneal + model.t_read)));
}

AnnealSchedule plan_schedule(std::size_t s, double t, const AccessTimeModel& model) {
  model.validate();
  if (s < 1) throw QpuError("sample count must be >= 1");
  if (!(t > 0.0)) throw QpuError("time limit must be positive");
  const double cycle = model.t_anneal + model.t_read;
  const int r0 = default_block_reads(model);
  const double block = model.t_prog + r0 * cycle;
  auto fits = [&](const AnnealSchedule& a) { return access_time(a, model) <= t; };

  const int p_default = static_cast<int>(std::floor(t / block));
  if (p_default >= 1) {
    AnnealSchedule a{p_default, p_default * r0, model.t_anneal};
    if (a.r >= static_cast<int>(s) && fits(a)) return a;
  }
  // Fewer programmings, more reads each.
  for (int p = std::max(p_default, 1); p >= 1; --p) {
    const double left = t - p * model.t_prog;
    if (left <= 0.0) continue;
    int r = static_cast<int>(std::floor(left / cycle));
    AnnealSchedule a{p, r, model.t_anneal};
    while (a.r > 0 && !fits(a)) --a.r;
    if (a.r >= static_cast<int>(s) && a.r >= p) return a;
  }
  // One programming and a shorter anneal.
  const double left = t - model.t_prog;
  if (left > 0.0) {
    const double ta = left / static_cast<double>(s) - model.t_read;
    if (ta >= model.t_anneal_min) {
      AnnealSchedule a{1, static_cast<int>(s), std::min(ta, model.t_anneal)};
      if (fits(a)) return a;
    }
  }
  throw InfeasibleSchedule("no schedule returns " + std::to_string(s) + " reads within " +
                           std::to_string(t) + " s");
}

bool schedule_feasible(std::size_t s, double t, const AccessTimeModel& model) {
  try {
    plan_schedule(s, t, model);
    return true;
  } catch (const InfeasibleSchedule&) {
    return false;
  }
}

std::vector<double> chain_strength_ladder(int points) {
  if (points < 1) throw QpuError("ladder needs at least one point");
  if (points == 1) return {1.0};
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = 0.5 + 1.5 * i / (points - 1);
  return out;
}

json to_json(const QpuRequest& req) {
  return json{{"bqm", to_json(req.bqm)},
              {"num_reads", req.num_reads},
              {"annealing_time_us", req.annealing_time_us},
              {"programmings", req.programmings},
              {"modifiers", req.modifiers},
              {"seed", req.seed}};
}

namespace {

const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name))
    throw QpuError(std::string("field '") + name + "': missing");
  return doc.at(name);
}

}  // namespace

QpuRequest qpu_request_from_json(const json& doc) {
  QpuRequest req;
  try {
    req.bqm = bqm_from_json(field(doc, "bqm"));
    req.num_reads = field(doc, "num_reads").get<int>();
    req.annealing_time_us = field(doc, "annealing_time_us").get<double>();
    req.programmings = field(doc, "programmings").get<int>();
    if (doc.contains("modifiers")) req.modifiers = doc["modifiers"];
    if (doc.contains("seed")) req.seed = doc["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw QpuError(std::string("malformed request: ") + e.what());
  }
  if (req.num_reads < 1 || req.programmings < 1)
    throw QpuError("num_reads and programmings must be >= 1");
  return req;
}

json to_json(const QpuResponse& resp) {
  json samples = json::array();
  for (const auto& s : resp.samples) samples.push_back(std::vector<int>(s.begin(), s.end()));
  return json{{"samples", std::move(samples)},
              {"energies", resp.energies},
              {"timing",
               {{"t_prog_us", resp.timing.t_prog_us},
                {"t_anneal_us", resp.timing.t_anneal_us},
                {"t_read_us", resp.timing.t_read_us}}},
              {"mock", resp.mock}};
}

QpuResponse qpu_response_from_json(const json& doc) {
  QpuResponse resp;
  try {
    for (const auto& row : field(doc, "samples")) {
      std::vector<std::int8_t> spins;
      for (const auto& v : row) {
        const int x = v.get<int>();
        if (x != 1 && x != -1) throw QpuError("sample value " + std::to_string(x) + " is not a spin");
        spins.push_back(static_cast<std::int8_t>(x));
      }
      resp.samples.push_back(std::move(spins));
    }
    resp.energies = field(doc, "energies").get<std::vector<double>>();
    const json& timing = field(doc, "timing");
    resp.timing.t_prog_us = field(timing, "t_prog_us").get<double>();
    resp.timing.t_anneal_us = field(timing, "t_anneal_us").get<double>();
    resp.timing.t_read_us = field(timing, "t_read_us").get<double>();
    if (doc.contains("mock")) resp.mock = doc["mock"].get<bool>();
  } catch (const json::exception& e) {
    throw QpuError(std::string("malformed response: ") + e.what());
  }
  if (resp.energies.size() != resp.samples.size())
    throw QpuError("malformed response: energies and samples differ in length");
  return resp;
}

namespace {

std::vector<std::vector<std::int8_t>> mock_reads(const SpinProblem& p, int n_reads,
                                                 std::uint64_t seed, const MockQpuOptions& o) {
  Rng rng(seed);
  const double beta_end = o.effective_temperature > 0.0
                              ? 1.0 / o.effective_temperature
                              : std::numeric_limits<double>::infinity();
  std::vector<double> schedule = default_beta_schedule(p, std::max(1, o.anneal_sweeps));
  for (auto& b : schedule) b = std::min(b, beta_end);
  std::vector<std::vector<std::int8_t>> out;
  out.reserve(n_reads);
  for (int k = 0; k < n_reads; ++k) {
    MetropolisChain chain(p, rng);
    for (double b : schedule) chain.sweep(b, rng);
    for (int i = 0; i < o.thermal_sweeps; ++i) chain.sweep(beta_end, rng);
    out.push_back(chain.spins());
  }
  return out;
}

}  // namespace

SampleSet mock_qpu(const BQM& physical, int n_reads, double t_anneal, std::uint64_t seed,
                   const MockQpuOptions& options) {
  if (n_reads < 1) throw QpuError("n_reads must be >= 1");
  const SpinProblem p = SpinProblem::from(physical);
  auto reads = mock_reads(p, n_reads, seed, options);
  SampleSet out;
  out.solver_id = "qpu-mock";
  out.vartype = physical.vartype();
  out.requested = static_cast<std::size_t>(n_reads);
  out.mock = true;
  for (auto& spins : reads) {
    Sample s;
    s.values = to_model_values(physical, spins);
    s.energy = energy(physical, std::span<const std::int8_t>(s.values));
    out.samples.push_back(std::move(s));
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
  out.status = SampleStatus::Complete;
  out.num_drawn = static_cast<std::uint64_t>(n_reads);
  out.work = static_cast<std::uint64_t>(std::llround(n_reads * t_anneal * 1e6));
  AnnealSchedule sched{1, n_reads, t_anneal};
  out.wall_time = access_time(sched, options.timing);
  return out;
}

QpuResponse handle_mock_request(const QpuRequest& req, const MockQpuOptions& options) {
  const SpinProblem p = SpinProblem::from(req.bqm);
  QpuResponse resp;
  resp.mock = true;
  resp.samples = mock_reads(p, req.num_reads, req.seed, options);
  for (const auto& s : resp.samples) resp.energies.push_back(p.energy(s));
  resp.timing.t_prog_us = options.timing.t_prog * 1e6;
  resp.timing.t_anneal_us = req.annealing_time_us;
  resp.timing.t_read_us = options.timing.t_read * 1e6;
  return resp;
}

QpuResponse MockTransport::submit(const QpuRequest& req) {
  const std::string wire = to_json(req).dump();
  const QpuRequest decoded = qpu_request_from_json(json::parse(wire));
  return qpu_response_from_json(json::parse(to_json(handle_mock_request(decoded, options_)).dump()));
}

HttpTransport::HttpTransport(std::string url, double timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {
  if (url_.empty()) throw QpuError("empty QPU endpoint URL");
}

namespace {

std::mutex& endpoint_mutex(const std::string& url) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard lock(registry_mutex);
  auto& slot = locks[url];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace

QpuResponse HttpTransport::submit(const QpuRequest& req) {
  // Split "scheme://host:port/path".
  const auto scheme_end = url_.find("://");
  const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  std::lock_guard lock(endpoint_mutex(url_));
  httplib::Client client(base);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  auto res = client.Post(path, to_json(req).dump(), "application/json");
  if (!res) throw QpuError("transport failure contacting " + url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw QpuError("endpoint rejected request (HTTP " + std::to_string(res->status) + "): " + res->body);
  try {
    return qpu_response_from_json(json::parse(res->body));
  } catch (const json::parse_error& e) {
    throw QpuError(std::string("malformed response: ") + e.what());
  }
}

std::unique_ptr<Transport> make_transport(bool mock, const std::string& url,
                                          const MockQpuOptions& options) {
  if (mock) return std::make_unique<MockTransport>(options);
  std::string target = url;
  if (target.empty()) {
    const char* env = std::getenv(kQpuEndpointEnv);
    if (env) target = env;
  }
  if (target.empty())
    throw QpuError(std::string("no QPU endpoint: pass a URL, set ") + kQpuEndpointEnv +
                   ", or use the mock");
  return std::make_unique<HttpTransport>(target);
}

SampleSet sample_remote(const QpuJob& job, const AnnealSchedule& sched, Transport& transport,
                        std::uint64_t seed, const AccessTimeModel& model) {
  if (job.base.vartype() != Vartype::Spin) throw QpuError("QPU jobs take spin models");
  const auto blocks = sched.reads_per_block();
  const auto ladder = chain_strength_ladder();
  const std::size_t ladder_start = static_cast<std::size_t>(
      std::find(ladder.begin(), ladder.end(), 1.0) - ladder.begin());
  Rng rng(seed);
  const auto started = std::chrono::steady_clock::now();

  SampleSet out;
  out.solver_id = transport.is_mock() ? "qpu-mock" : "qpu-remote";
  out.vartype = Vartype::Spin;
  out.mock = transport.is_mock();
  const std::size_t n = job.base.num_variables();

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    QpuRequest req;
    req.num_reads = blocks[b];
    req.annealing_time_us = sched.t_anneal * 1e6;
    req.programmings = 1;
    req.seed = derive_seed(seed, {"block", std::to_string(b)});
    std::vector<VariableId> flips;
    if (job.rebuild) {
      const double multiplier = ladder[(ladder_start + b) % ladder.size()];
      req.bqm = job.rebuild(multiplier);
      req.modifiers = json::array({{{"block", b}, {"chain_strength_multiplier", multiplier}}});
    } else {
      for (VariableId v = 0; v < n; ++v)
        if (rng() >> 63) flips.push_back(v);
      req.bqm = apply_srt(job.base, flips).model;
      req.modifiers = json::array({{{"block", b}, {"srt", flips}}});
    }
    const QpuResponse resp = transport.submit(req);
    if (resp.samples.size() != static_cast<std::size_t>(blocks[b]))
      throw QpuError("endpoint returned " + std::to_string(resp.samples.size()) + " reads, expected " +
                     std::to_string(blocks[b]));
    for (const auto& raw : resp.samples) {
      if (raw.size() != n) throw QpuError("malformed response: sample length mismatch");
      Sample s;
      s.values = raw;
      for (VariableId v : flips) s.values[v] = static_cast<std::int8_t>(-s.values[v]);
      s.energy = energy(job.base, std::span<const std::int8_t>(s.values));
      out.samples.push_back(std::move(s));
    }
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
  out.requested = static_cast<std::size_t>(sched.r);
  out.num_drawn = out.samples.size();
  out.status = SampleStatus::Complete;
  out.work = static_cast<std::uint64_t>(std::llround(sched.r * sched.t_anneal * 1e6));
  out.wall_time = transport.is_mock()
                      ? access_time(sched, model)
                      : std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace qubench
