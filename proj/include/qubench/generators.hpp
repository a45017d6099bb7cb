#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qubench/graph.hpp"
#include "qubench/model.hpp"

namespace qubench {

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClassTag {
  NAT1, NAT7, CBFM, TILE, FCL, LAT3D, DREG03, SK, CDMA, BPSP, SOCs, SOCu, DAIG, IMPORT
};

std::string_view to_string(ClassTag tag);
ClassTag parse_class_tag(std::string_view text);

/// How a class reaches the hardware graph.
enum class EmbedKind { Native, Lattice, Heuristic, Clique };

EmbedKind embed_kind(ClassTag tag);
bool is_native(ClassTag tag);

/// The thirteen benchmark classes in reporting order.
std::span<const ClassTag> benchmark_classes();

struct InstanceSpec {
  ClassTag tag = ClassTag::NAT1;
  int size = 0;  // class-specific; see generate()
  std::uint64_t seed = 0;
  std::filesystem::path path;  // import-only classes
};

/// An empty model with one zero-bias variable per present graph node.
/// Variable labels are the node ids when those are not already 0..n-1.
BQM model_on_graph(const Graph& g, Vartype vartype = Vartype::Spin);

/// Variable index of every graph node, or -1 for absent nodes.
std::vector<std::int64_t> node_to_variable(const Graph& g);

// h = 0, each J drawn uniformly from `values`.
BQM gen_spin_glass(const Graph& g, std::span<const double> values, std::uint64_t seed);

std::vector<double> nat_values(int levels);

struct FclLoop {
  std::vector<NodeId> nodes;  // closed: nodes.back() is adjacent to nodes.front()
  std::size_t plus_edge = 0;  // coupler (nodes[i], nodes[i+1 mod len]) set to +1
};

struct FclInstance {
  BQM model;
  std::vector<FclLoop> loops;
};

FclInstance gen_fcl_detailed(const Graph& g, double alpha, double ruggedness,
                             std::uint64_t seed, int max_retries = 1000);
BQM gen_fcl(const Graph& g, double alpha, double ruggedness, std::uint64_t seed);

struct CbfmParams {
  double p_plus = 0.10;
  double p_minus = 0.625;
  double p_field = 0.10;
};

BQM gen_cbfm(const Graph& g, const CbfmParams& params, std::uint64_t seed);

enum class TileCell { Auto, Triangle, Square };

struct TileParams {
  TileCell cell = TileCell::Auto;
  int max_tiles = -1;  // -1: as many as fit
};

struct TileInstance {
  BQM model;
  std::vector<std::vector<NodeId>> tiles;
};

TileInstance gen_tile_detailed(const Graph& g, const TileParams& params, std::uint64_t seed);
BQM gen_tile(const Graph& g, const TileParams& params, std::uint64_t seed);

/// Multiuser detection: minimise |y - S x|^2 up to a constant, with S the
/// L x n code matrix (entries +-1/sqrt(L)) and y = S b + sigma * noise.
BQM cdma_model(const std::vector<std::vector<double>>& codes, std::span<const double> received);

struct CdmaInstance {
  BQM model;
  std::vector<std::int8_t> transmitted;
};

CdmaInstance gen_cdma_detailed(int n, std::uint64_t seed, int code_length = 0,
                               double sigma = 1.0);
BQM gen_cdma(int n, std::uint64_t seed, int code_length = 0, double sigma = 1.0);

/// Car order in the paint line; each car id in [0, cars) appears twice.
std::vector<int> bpsp_sequence(int cars, std::uint64_t seed);
/// Ising model whose energy is twice the number of colour changes.
BQM bpsp_model(std::span<const int> sequence);
/// Colour changes when car c gets first colour spins[c] and the opposite colour
/// on its second occurrence.
int bpsp_paint_changes(std::span<const int> sequence, std::span<const std::int8_t> spins);
BQM gen_bpsp(int cars, std::uint64_t seed);

/// Loads a BQM JSON instance (SOC, DAIG or any other imported class).
BQM import_instance(const std::filesystem::path& path);

/// Converts a signed edge list ("i j sign" per line, or "i j" for unsigned
/// graphs) into a spin-glass BQM with J = -sign (unsigned: J = -1).
BQM edge_list_to_bqm(std::istream& in, bool is_signed, const std::string& label = {});

/// Builds one instance. Native classes (NAT1, NAT7, CBFM, TILE, FCL) use `hw`;
/// `size` is the cube side for LAT3D, the node count for DREG03/SK/CDMA and
/// the car count for BPSP. Import-only classes read spec.path.
BQM generate(const InstanceSpec& spec, const Graph* hw = nullptr);

}  // namespace qubench
