#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riverflow/errors.hpp"

namespace riverflow {

struct EdgeRecord {
  std::string id;
  std::optional<int> parent;  // index of the downstream edge; empty at the root
  double area_m2 = 0.0;       // hillslope area draining into this link
};

/// Rooted tree of stream links in canonical order: breadth-first from the
/// root, tributaries in insertion order. The root has index 0 and every
/// edge's index is strictly smaller than those of its tributaries.
/// Immutable after construction.
class RiverNetwork {
 public:
  RiverNetwork() = default;  // empty; assign from a factory before use

  /// Validates and canonicalizes a set of edge records whose `parent`
  /// fields refer to positions in the input vector.
  static RiverNetwork from_edges(std::vector<EdgeRecord> edges);

  int size() const { return static_cast<int>(edges_.size()); }
  int root_index() const { return 0; }
  const EdgeRecord& edge(int e) const { return edges_.at(e); }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  const std::vector<int>& tributaries(int e) const { return tributaries_.at(e); }
  int edge_index(const std::string& id) const;  // -1 when unknown

  Eigen::VectorXd areas() const;
  double total_area() const;

  /// True when every junction has at most two tributaries.
  bool is_binary() const;

 private:
  std::vector<EdgeRecord> edges_;
  std::vector<std::vector<int>> tributaries_;
};

/// Contents of a network file: topology plus the per-edge rates carried
/// in the same rows (consumed by the dynamics module).
struct ParsedNetwork {
  RiverNetwork net;
  Eigen::VectorXd K_per_s;
  Eigen::VectorXd H_per_s;
};

/// Parses the line-oriented network format:
///   edge <id> <parent-id|-> <area_km2> <K_per_hour> <H_per_hour>
/// `#` starts a comment; blank lines are ignored; exactly one root.
ParsedNetwork parse_network(const std::string& text);

ParsedNetwork load_network(const std::string& path);

/// Inverse of parse_network (km2 / per-hour units in the output).
std::string serialize_network(const RiverNetwork& net, const Eigen::VectorXd& K_per_s,
                              const Eigen::VectorXd& H_per_s);

/// Incidence matrix: unit diagonal, -1 at (e, e') when e' is a tributary
/// of e. Upper triangular under the canonical order with determinant 1.
Eigen::MatrixXi incidence_matrix(const RiverNetwork& net);

/// Exact integer inverse of the incidence matrix: entry (e, e') is 1
/// iff e' lies in the subnetwork draining through e.
Eigen::MatrixXi incidence_inverse(const RiverNetwork& net);

/// Horton-Strahler stream orders (leaves are order 1).
std::vector<int> horton_orders(const RiverNetwork& net);

/// The upstream tree with `e` as its outlet, re-indexed canonically.
RiverNetwork subnetwork(const RiverNetwork& net, int e);

/// Canonical indices (in `net`) of the edges of subnetwork(net, e),
/// listed in the subnetwork's own canonical order.
std::vector<int> subnetwork_indices(const RiverNetwork& net, int e);

/// Random binary tree whose root Horton order equals `order`; all
/// hillslope areas are set to `area_m2`. Deterministic in the seed.
RiverNetwork generate_network(int order, std::uint64_t seed,
                              double area_m2 = 0.6e6);

}  // namespace riverflow
