#include "afford/scene_graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "afford/rng.hpp"

namespace afford {

std::string to_string(Topology t) {
  switch (t) {
    case Topology::spatial: return "spatial";
    case Topology::fully_connected: return "fc";
    case Topology::chain: return "chain";
    case Topology::unary: return "unary";
  }
  return "spatial";
}

Topology topology_from_string(const std::string& s) {
  if (s == "spatial") return Topology::spatial;
  if (s == "fc" || s == "fully_connected") return Topology::fully_connected;
  if (s == "chain") return Topology::chain;
  if (s == "unary") return Topology::unary;
  throw DataError("unknown topology '" + s + "'");
}

std::vector<std::vector<int>> SceneGraph::in_neighbors() const {
  std::vector<std::vector<int>> adj(nodes.size());
  if (topology == Topology::chain) {
    for (size_t k = 1; k < chain_order.size(); ++k) {
      adj[static_cast<size_t>(chain_order[k])].push_back(chain_order[k - 1]);
    }
  } else {
    for (const auto& [a, b] : edges) {
      adj[static_cast<size_t>(a)].push_back(b);
      adj[static_cast<size_t>(b)].push_back(a);
    }
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

int SceneGraph::node_index_of(int instance_id) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].instance_id == instance_id) return static_cast<int>(i);
  }
  throw DataError("instance id " + std::to_string(instance_id) + " is not a graph node");
}

SceneGraph build_spatial_graph(const InstanceMap& map, Connectivity connectivity) {
  if (map.instance_class().empty()) {
    throw DataError("empty scene: instance map contains no instances");
  }

  SceneGraph g;
  g.topology = Topology::spatial;
  std::map<int, int> index_of;  // instance id -> node index
  for (const auto& [id, cls] : map.instance_class()) {
    index_of[id] = g.num_nodes();
    SceneNode node;
    node.instance_id = id;
    node.class_id = cls;
    node.bbox = {map.width(), map.height(), -1, -1};
    g.nodes.push_back(node);
  }

  std::set<std::pair<int, int>> edges;
  auto touch = [&](int id_a, int id_b) {
    if (id_a == 0 || id_b == 0 || id_a == id_b) return;
    int a = index_of.at(id_a);
    int b = index_of.at(id_b);
    edges.insert({std::min(a, b), std::max(a, b)});
  };

  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      int id = map.pixel(x, y);
      if (id != 0) {
        SceneNode& node = g.nodes[static_cast<size_t>(index_of.at(id))];
        node.pixel_count += 1;
        node.bbox.x_min = std::min(node.bbox.x_min, x);
        node.bbox.x_max = std::max(node.bbox.x_max, x);
        node.bbox.y_min = std::min(node.bbox.y_min, y);
        node.bbox.y_max = std::max(node.bbox.y_max, y);
      }
      if (x + 1 < map.width()) touch(id, map.pixel(x + 1, y));
      if (y + 1 < map.height()) touch(id, map.pixel(x, y + 1));
      if (connectivity == Connectivity::eight && y + 1 < map.height()) {
        if (x + 1 < map.width()) touch(id, map.pixel(x + 1, y + 1));
        if (x - 1 >= 0) touch(id, map.pixel(x - 1, y + 1));
      }
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

SceneGraph make_variant(const SceneGraph& graph, Topology topology, uint64_t seed) {
  if (graph.nodes.empty()) throw DataError("make_variant: graph has no nodes");
  SceneGraph out;
  out.nodes = graph.nodes;
  out.topology = topology;
  switch (topology) {
    case Topology::spatial:
      out.edges = graph.edges;
      break;
    case Topology::unary:
      break;
    case Topology::fully_connected:
      for (int a = 0; a < out.num_nodes(); ++a) {
        for (int b = a + 1; b < out.num_nodes(); ++b) out.edges.push_back({a, b});
      }
      break;
    case Topology::chain: {
      out.chain_order.resize(graph.nodes.size());
      for (size_t i = 0; i < out.chain_order.size(); ++i) out.chain_order[i] = static_cast<int>(i);
      Rng rng(seed);
      rng.shuffle(out.chain_order);
      break;
    }
  }
  return out;
}

}  // namespace afford
