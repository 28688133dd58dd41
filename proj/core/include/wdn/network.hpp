#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wdn {

/// Raised when an instance file does not conform to the JSON schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a structurally well-formed instance violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Reservoir, Junction };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Junction;
  double fixed_head = 0.0;  // reservoirs only [m]
  double demand = 0.0;      // junctions only [m^3/s], >= 0
  double head_lb = 0.0;     // junctions only [m]
  double head_ub = 0.0;     // junctions only [m]; defaulted to max source head
  bool has_head_ub = false;

  bool is_reservoir() const { return kind == NodeKind::Reservoir; }
};

/// One entry of a pipe's resistance menu. Resistance is per unit length,
/// in (m^3/s)^(-alpha); flow and head-difference caps are directional.
struct ResistanceOption {
  double resistance = 0.0;
  std::optional<double> diameter;  // [m], provenance and bound derivation
  double cost = 0.0;               // per unit length
  double qmax_pos = 0.0;           // [m^3/s]
  double qmax_neg = 0.0;
  double dhmax_pos = 0.0;          // [m]
  double dhmax_neg = 0.0;
  bool has_flow_bounds = false;
};

struct Pipe {
  std::string id;
  int tail = -1;  // node index
  int head = -1;
  double length = 0.0;  // [m]
  double vmax = 0.0;    // [m/s]; 0 when unset
  std::vector<ResistanceOption> options;  // sorted by strictly decreasing resistance
};

/// Immutable directed network. Safe to share across threads once built.
class Network {
 public:
  double alpha = 1.852;
  std::vector<Node> nodes;
  std::vector<Pipe> pipes;
  bool bounds_derived = false;

  int node_index(const std::string& id) const;
  const std::vector<int>& reservoirs() const { return reservoirs_; }
  const std::vector<int>& junctions() const { return junctions_; }
  const std::vector<int>& out_arcs(int node) const { return out_arcs_[node]; }
  const std::vector<int>& in_arcs(int node) const { return in_arcs_[node]; }

  double max_source_head() const;
  double total_demand() const;

  /// Rebuilds adjacency and checks all structural invariants; throws
  /// ValidationError on the first violation found.
  void finalize();

 private:
  std::vector<int> reservoirs_, junctions_;
  std::vector<std::vector<int>> out_arcs_, in_arcs_;
};

/// One resistance choice per pipe, indexed like Network::pipes.
struct DesignVector {
  std::vector<int> choice;
};

Network parse_network(const std::filesystem::path& path);
Network parse_network_json(const nlohmann::json& doc);
nlohmann::json to_json(const Network& net);

/// Fills per-option flow bounds from diameters plus the pipe's vmax, defaults
/// junction head upper bounds to the maximum source head, and derives
/// directional head-difference caps from nodal head bounds. Idempotent.
Network derive_bounds(Network net);

Network scale_demands(Network net, double factor);

double design_cost(const Network& net, const DesignVector& design);

DesignVector parse_design(const std::filesystem::path& path, const Network& net);
nlohmann::json design_to_json(const Network& net, const DesignVector& design);

/// Hazen-Williams resistance per unit length from diameter [m] and roughness.
double hazen_williams_resistance(double diameter, double roughness);

}  // namespace wdn
