#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/model.hpp"
#include "qubench/solvers.hpp"

namespace qubench {

class QpuError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleSchedule : public QpuError {
 public:
  using QpuError::QpuError;
};

/// Programming, anneal and readout costs in seconds.
struct AccessTimeModel {
  double t_prog = 0.016;
  double t_read = 0.000241;
  double t_anneal = 0.000240;
  double t_anneal_min = 0.0000005;
  double t_anneal_max = 0.002;

  void validate() const;
};

struct AnnealSchedule {
  int p = 1;  // programmings
  int r = 1;  // anneal-read cycles in total
  double t_anneal = 0.000240;

  /// Reads per programming: floor(r/p) each, the last block takes the rest.
  std::vector<int> reads_per_block() const;
};

double access_time(const AnnealSchedule& sched, const AccessTimeModel& model = {});

/// Reads that fit in one programming's worth of time at the default anneal
/// time: floor(t_prog / (t_anneal + t_read)).
int default_block_reads(const AccessTimeModel& model = {});

/// Fills (s, t) with default-size blocks; if that yields fewer than s reads,
/// trades programmings for reads, then shortens the anneal with a single
/// programming. Throws InfeasibleSchedule when nothing fits.
AnnealSchedule plan_schedule(std::size_t s, double t, const AccessTimeModel& model = {});
bool schedule_feasible(std::size_t s, double t, const AccessTimeModel& model = {});

/// Evenly spaced chain-strength multipliers over [0.5, 2.0].
std::vector<double> chain_strength_ladder(int points = 7);

struct QpuRequest {
  BQM bqm;
  int num_reads = 1;
  double annealing_time_us = 240.0;
  int programmings = 1;
  nlohmann::json modifiers = nlohmann::json::array();
  std::uint64_t seed = 0;
};

struct QpuTiming {
  double t_prog_us = 0.0;
  double t_anneal_us = 0.0;
  double t_read_us = 0.0;
};

struct QpuResponse {
  std::vector<std::vector<std::int8_t>> samples;  // spins, physical variable order
  std::vector<double> energies;
  QpuTiming timing;
  bool mock = false;
};

nlohmann::json to_json(const QpuRequest& req);
QpuRequest qpu_request_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QpuResponse& resp);
QpuResponse qpu_response_from_json(const nlohmann::json& doc);

struct MockQpuOptions {
  double effective_temperature = 0.25;  // 0 selects zero-temperature descent
  int anneal_sweeps = 100;
  int thermal_sweeps = 20;
  AccessTimeModel timing;
};

/// Independent reads from a short anneal ending at the effective
/// temperature. Outputs are marked as mock.
SampleSet mock_qpu(const BQM& physical, int n_reads, double t_anneal, std::uint64_t seed,
                   const MockQpuOptions& options = {});

/// Server-side handling of one request by the mock sampler.
QpuResponse handle_mock_request(const QpuRequest& req, const MockQpuOptions& options = {});

class Transport {
 public:
  virtual ~Transport() = default;
  virtual QpuResponse submit(const QpuRequest& req) = 0;
  virtual bool is_mock() const = 0;
  virtual std::string endpoint() const = 0;
};

/// In-process mock; requests still pass through the JSON wire format.
class MockTransport : public Transport {
 public:
  explicit MockTransport(MockQpuOptions options = {}) : options_(options) {}
  QpuResponse submit(const QpuRequest& req) override;
  bool is_mock() const override { return true; }
  std::string endpoint() const override { return "mock"; }

 private:
  MockQpuOptions options_;
};

/// JSON over HTTP POST. At most one request per endpoint is in flight.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string url, double timeout_seconds = 60.0);
  QpuResponse submit(const QpuRequest& req) override;
  bool is_mock() const override { return false; }
  std::string endpoint() const override { return url_; }

 private:
  std::string url_;
  double timeout_seconds_;
};

inline constexpr const char* kQpuEndpointEnv = "QUBENCH_QPU_ENDPOINT";

/// Mock transport when `mock` is set, otherwise HTTP to `url` or, if empty,
/// to the URL in QUBENCH_QPU_ENDPOINT.
std::unique_ptr<Transport> make_transport(bool mock, const std::string& url = {},
                                          const MockQpuOptions& options = {});

/// Per-programming modifiers for a job.
struct QpuJob {
  BQM base;  // spin model; energies are always computed on it
  // Embedded jobs: model at a given chain-strength multiplier. Empty for
  // native jobs, which receive a fresh spin-reversal mask per programming.
  std::function<BQM(double)> rebuild;
};

/// Runs the schedule block by block. wall_time is the access time of the
/// schedule for mock transports and measured time otherwise; work is the
/// total anneal time in microseconds.
SampleSet sample_remote(const QpuJob& job, const AnnealSchedule& sched, Transport& transport,
                        std::uint64_t seed, const AccessTimeModel& model = {});

}  // namespace qubench
