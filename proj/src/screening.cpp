#include "qubench/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace qubench {

using nlohmann::json;

namespace {

double median_of(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int normalize_size(ClassTag tag, int size) {
  // Cubic graphs need an even node count.
  if (tag == ClassTag::DREG03 && size % 2) ++size;
  return size;
}

bool same_energy(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

json to_json(const ScreeningVerdict& v) {
  json probes = json::array();
  for (const auto& p : v.probes)
    probes.push_back({{"size", p.size}, {"lmax", p.lmax}, {"failures", p.failures}, {"median", p.median}});
  return json{{"class", v.class_name},
              {"verdict", v.accept ? "ACCEPT" : "REJECT"},
              {"size", v.size},
              {"size_searched", v.searched},
              {"median_lmax", v.median_lmax},
              {"probes", std::move(probes)},
              {"best_energy", v.agreement.best_energy},
              {"sgd_agreement", v.agreement.sgd_agreement},
              {"sa_agreement", v.agreement.sa_agreement}};
}

SizeProbe probe_size(ClassTag tag, int size, const Graph& hw, const ScreeningOptions& options) {
  SizeProbe probe;
  probe.size = normalize_size(tag, size);
  for (int trial = 0; trial < options.embed_trials; ++trial) {
    const std::uint64_t seed =
        derive_seed(options.seed, {"screen", std::string(to_string(tag)), std::to_string(probe.size),
                                   std::to_string(trial)});
    try {
      const BQM model = generate({tag, probe.size, seed, {}}, &hw);
      const Embedding e = embed_heuristic(graph_of(model), hw, seed, options.embed_options);
      probe.lmax.push_back(static_cast<int>(e.max_chain_length()));
    } catch (const EmbeddingNotFound&) {
      ++probe.failures;
    }
  }
  probe.median = median_of(probe.lmax);
  return probe;
}

SizeProbe search_size(ClassTag tag, const Graph& hw, const ScreeningOptions& options,
                      std::vector<SizeProbe>* probes) {
  if (options.min_size < 1 || options.max_size < options.min_size)
    throw ScreeningError("invalid size range");
  int lo = options.min_size, hi = options.max_size;
  std::optional<SizeProbe> best;
  while (lo <= hi) {
    const int mid = lo + (hi - lo) / 2;
    SizeProbe probe = probe_size(tag, mid, hw, options);
    if (probes) probes->push_back(probe);
    // A size counts as embeddable when most trials succeed.
    const bool embedded = static_cast<int>(probe.lmax.size()) * 2 > options.embed_trials;
    if (!embedded || probe.median > options.lmax_high) {
      hi = mid - 1;
      continue;
    }
    if (!best || probe.size > best->size) best = probe;
    if (probe.median >= options.lmax_low) return probe;
    lo = mid + 1;
  }
  if (!best) throw ScreeningError("embedding failed at every probed size");
  return *best;
}

AgreementResult measure_agreement(const BQM& model, const ScreeningOptions& options) {
  if (options.runs < 1) throw ScreeningError("runs must be >= 1");
  AgreementResult out;
  SolverConfig config;
  config.timing = options.timing;
  config.seconds_per_op = options.seconds_per_op;
  for (int run = 0; run < options.runs; ++run) {
    config.seed = derive_seed(options.seed, {"agree", "sgd", std::to_string(run)});
    const SampleSet sgd = solve_sgd(model, 1, options.solver_time, config);
    config.seed = derive_seed(options.seed, {"agree", "sa", std::to_string(run)});
    // One anneal filling the whole budget; the watchdog shortens it.
    config.num_sweeps = 1 << 20;
    const SampleSet sa = solve_sa(model, 1, options.solver_time, config);
    const double inf = std::numeric_limits<double>::infinity();
    out.sgd_minima.push_back(sgd.samples.empty() ? inf : sgd.samples.front().energy);
    out.sa_minima.push_back(sa.samples.empty() ? inf : sa.samples.front().energy);
  }
  double best = std::numeric_limits<double>::infinity();
  for (double e : out.sgd_minima) best = std::min(best, e);
  for (double e : out.sa_minima) best = std::min(best, e);
  out.best_energy = best;
  auto fraction = [&](const std::vector<double>& v) {
    const auto hits = std::count_if(v.begin(), v.end(), [&](double e) { return same_energy(e, best); });
    return static_cast<double>(hits) / static_cast<double>(v.size());
  };
  out.sgd_agreement = fraction(out.sgd_minima);
  out.sa_agreement = fraction(out.sa_minima);
  return out;
}

bool accept_agreement(const AgreementResult& a, const ScreeningOptions& options) {
  return !(a.sgd_agreement >= options.agreement && a.sa_agreement >= options.agreement);
}

ScreeningVerdict screen_class(ClassTag tag, const Graph& hw, const ScreeningOptions& options) {
  ScreeningVerdict v;
  v.class_name = std::string(to_string(tag));
  const EmbedKind kind = embed_kind(tag);
  if (tag == ClassTag::SOCs || tag == ClassTag::SOCu || tag == ClassTag::DAIG || tag == ClassTag::IMPORT)
    throw ScreeningError("class " + v.class_name + " is file-based; screen its instances with screen_model");
  if (kind == EmbedKind::Heuristic) {
    const SizeProbe chosen = search_size(tag, hw, options, &v.probes);
    v.searched = true;
    v.size = chosen.size;
    v.median_lmax = chosen.median;
  } else if (kind == EmbedKind::Native) {
    v.size = hw.topology().kind == Topology::Kind::Pegasus ? hw.topology().params.at(0) : 0;
  } else if (options.size > 0) {
    v.size = options.size;
  } else if (kind == EmbedKind::Clique && hw.topology().kind == Topology::Kind::Pegasus) {
    v.size = std::min(native_clique_limit(hw.topology().params.at(0)), 64);
  } else {
    v.size = 8;
  }
  const BQM model = generate({tag, v.size, derive_seed(options.seed, {"screen-instance", v.class_name}), {}}, &hw);
  v.agreement = measure_agreement(model, options);
  v.accept = accept_agreement(v.agreement, options);
  return v;
}

ScreeningVerdict screen_model(const std::string& name, const std::function<BQM(std::uint64_t)>& make,
                              const ScreeningOptions& options) {
  ScreeningVerdict v;
  v.class_name = name;
  const BQM model = make(derive_seed(options.seed, {"screen-instance", name}));
  v.size = static_cast<int>(model.num_variables());
  v.agreement = measure_agreement(model, options);
  v.accept = accept_agreement(v.agreement, options);
  return v;
}

}  // namespace qubench
