#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afford/instance_map.hpp"

namespace afford {

enum class Topology { spatial, fully_connected, chain, unary };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

enum class Connectivity { four, eight };

struct SceneNode {
  int instance_id = 0;
  int class_id = 0;
  BoundingBox bbox;
  int64_t pixel_count = 0;
};

// Graph the GGNN runs on. Nodes are sorted by instance id. For the
// undirected topologies `edges` holds index pairs (i < j); the chain variant
// is a directed path along `chain_order` and leaves `edges` empty.
struct SceneGraph {
  std::vector<SceneNode> nodes;
  std::vector<std::pair<int, int>> edges;
  Topology topology = Topology::spatial;
  std::vector<int> chain_order;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  size_t edge_count() const {
    return topology == Topology::chain ? (nodes.empty() ? 0 : nodes.size() - 1) : edges.size();
  }

  // Message sources per node: symmetric neighbors for spatial/FC, the chain
  // predecessor for chain, empty for unary. Lists are sorted ascending.
  std::vector<std::vector<int>> in_neighbors() const;

  int node_index_of(int instance_id) const;
};

// One node per distinct instance id, an edge wherever two instances have
// adjacent pixels (unlabeled pixels never bridge), tight bounding boxes and
// pixel counts.
SceneGraph build_spatial_graph(const InstanceMap& map,
                               Connectivity connectivity = Connectivity::four);

// Same nodes, edges replaced per topology. The chain order is drawn from the
// seeded RNG and recorded in the result.
SceneGraph make_variant(const SceneGraph& graph, Topology topology, uint64_t seed);

}  // namespace afford
