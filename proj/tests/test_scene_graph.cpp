#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "afford/rng.hpp"
#include "afford/scene_graph.hpp"

using namespace afford;

namespace {

InstanceMap make_map(int w, int h, const std::vector<std::vector<int>>& rows,
                     std::map<int, int> classes) {
  std::vector<uint16_t> px;
  for (const auto& row : rows) {
    for (int v : row) px.push_back(static_cast<uint16_t>(v));
  }
  return InstanceMap(w, h, std::move(px), std::move(classes));
}

// Brute-force oracle: scan every pair of pixels for 4-adjacency.
std::set<std::pair<int, int>> brute_force_edges(const InstanceMap& map) {
  std::set<std::pair<int, int>> edges;
  int w = map.width(), h = map.height();
  for (int y1 = 0; y1 < h; ++y1) {
    for (int x1 = 0; x1 < w; ++x1) {
      for (int y2 = 0; y2 < h; ++y2) {
        for (int x2 = 0; x2 < w; ++x2) {
          if (std::abs(x1 - x2) + std::abs(y1 - y2) != 1) continue;
          int a = map.pixel(x1, y1), b = map.pixel(x2, y2);
          if (a == 0 || b == 0 || a == b) continue;
          edges.insert({std::min(a, b), std::max(a, b)});
        }
      }
    }
  }
  return edges;
}

std::set<std::pair<int, int>> edges_by_instance_id(const SceneGraph& g) {
  std::set<std::pair<int, int>> out;
  for (const auto& [a, b] : g.edges) {
    int ia = g.nodes[static_cast<size_t>(a)].instance_id;
    int ib = g.nodes[static_cast<size_t>(b)].instance_id;
    out.insert({std::min(ia, ib), std::max(ia, ib)});
  }
  return out;
}

}  // namespace

TEST_SUITE("scene-graph") {

TEST_CASE("forced adjacency on a 2x2 map") {
  InstanceMap map = make_map(2, 2, {{1, 1}, {2, 2}}, {{1, 0}, {2, 1}});
  SceneGraph g = build_spatial_graph(map);
  REQUIRE(g.num_nodes() == 2);
  CHECK(g.nodes[0].instance_id == 1);
  CHECK(g.nodes[1].instance_id == 2);
  CHECK(edges_by_instance_id(g) == std::set<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("unlabeled pixels separate instances and never bridge") {
  InstanceMap map = make_map(3, 1, {{1, 0, 2}}, {{1, 0}, {2, 0}});
  SceneGraph g = build_spatial_graph(map);
  CHECK(g.edges.empty());
}

TEST_CASE("diagonal touch is not adjacency under 4-connectivity") {
  InstanceMap map = make_map(2, 2, {{1, 0}, {0, 2}}, {{1, 0}, {2, 0}});
  CHECK(build_spatial_graph(map).edges.empty());
  CHECK(build_spatial_graph(map, Connectivity::eight).edges.size() == 1);
}

TEST_CASE("random rectangles match the brute-force pixel-pair oracle (seed 5)") {
  Rng rng(5);
  std::vector<uint16_t> px(16 * 16, 0);
  std::map<int, int> classes;
  for (int id = 1; id <= 5; ++id) {
    int x0 = rng.uniform_int(0, 11), y0 = rng.uniform_int(0, 11);
    int x1 = x0 + rng.uniform_int(1, 4), y1 = y0 + rng.uniform_int(1, 4);
    for (int y = y0; y <= std::min(15, y1); ++y) {
      for (int x = x0; x <= std::min(15, x1); ++x) {
        px[static_cast<size_t>(y) * 16 + x] = static_cast<uint16_t>(id);
      }
    }
    classes[id] = id % 3;
  }
  // Later rectangles may fully overwrite earlier ones; keep only ids present.
  std::set<int> present(px.begin(), px.end());
  for (auto it = classes.begin(); it != classes.end();) {
    it = present.count(it->first) ? std::next(it) : classes.erase(it);
  }
  InstanceMap map(16, 16, px, classes);
  SceneGraph g = build_spatial_graph(map);
  CHECK(edges_by_instance_id(g) == brute_force_edges(map));
}

TEST_CASE("relabeling instances preserves the graph up to the relabeling") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::vector<uint16_t> px(64, 0);
    std::map<int, int> classes;
    for (int i = 0; i < 20; ++i) {
      px[static_cast<size_t>(rng.uniform_int(0, 63))] = static_cast<uint16_t>(rng.uniform_int(1, 4));
    }
    std::set<int> present;
    for (uint16_t v : px) {
      if (v) present.insert(v);
    }
    if (present.empty()) continue;
    for (int id : present) classes[id] = id;

    // Relabel id -> id + 10 (order-reversing under a different permutation
    // would also do; the point is edges must follow instance identity).
    std::vector<uint16_t> px2 = px;
    std::map<int, int> classes2;
    for (auto& v : px2) {
      if (v) v = static_cast<uint16_t>(15 - v);
    }
    for (int id : present) classes2[15 - id] = id;

    auto e1 = brute_force_edges(InstanceMap(8, 8, px, classes));
    std::set<std::pair<int, int>> mapped;
    for (auto [a, b] : e1) {
      int a2 = 15 - a, b2 = 15 - b;
      mapped.insert({std::min(a2, b2), std::max(a2, b2)});
    }
    SceneGraph g2 = build_spatial_graph(InstanceMap(8, 8, px2, classes2));
    CHECK(edges_by_instance_id(g2) == mapped);
  }
}

TEST_CASE("bounding boxes are tight and pixel counts exact") {
  InstanceMap map = make_map(4, 3, {{0, 1, 0, 0}, {1, 1, 0, 2}, {0, 0, 0, 2}},
                             {{1, 0}, {2, 1}});
  SceneGraph g = build_spatial_graph(map);
  const SceneNode& n1 = g.nodes[0];
  CHECK(n1.bbox == BoundingBox{0, 0, 1, 1});
  CHECK(n1.pixel_count == 3);
  const SceneNode& n2 = g.nodes[1];
  CHECK(n2.bbox == BoundingBox{3, 1, 3, 2});
  CHECK(n2.pixel_count == 2);
}

TEST_CASE("multi-component instances are a single node over the pixel union") {
  InstanceMap map = make_map(5, 1, {{1, 0, 1, 0, 2}}, {{1, 0}, {2, 0}});
  SceneGraph g = build_spatial_graph(map);
  CHECK(g.num_nodes() == 2);
  CHECK(g.nodes[0].pixel_count == 2);
  CHECK(g.nodes[0].bbox == BoundingBox{0, 0, 2, 0});
}

TEST_CASE("empty map raises an empty-scene error") {
  CHECK_THROWS_AS(build_spatial_graph(make_map(2, 1, {{0, 0}}, {})), DataError);
}

TEST_CASE("expand_bbox identity, arithmetic, and clamping") {
  BoundingBox box{40, 40, 59, 59};
  CHECK(expand_bbox(box, 1.0, 100, 100) == box);
  // width 20 -> 24 about the center
  CHECK(expand_bbox(box, 1.2, 100, 100) == BoundingBox{38, 38, 61, 61});
  BoundingBox corner{0, 0, 9, 9};
  BoundingBox e = expand_bbox(corner, 1.2, 100, 100);
  CHECK(e.x_min == 0);
  CHECK(e.y_min == 0);
  CHECK(e.x_max == 10);
  BoundingBox tight{95, 95, 99, 99};
  BoundingBox c = expand_bbox(tight, 2.0, 100, 100);
  CHECK(c.x_max == 99);
  CHECK(c.y_max == 99);
}

TEST_CASE("topology variants") {
  InstanceMap map = make_map(4, 1, {{1, 2, 3, 4}}, {{1, 0}, {2, 0}, {3, 0}, {4, 0}});
  SceneGraph g = build_spatial_graph(map);

  SceneGraph unary = make_variant(g, Topology::unary, 0);
  CHECK(unary.edge_count() == 0);
  CHECK(unary.nodes.size() == g.nodes.size());

  SceneGraph fc = make_variant(g, Topology::fully_connected, 0);
  CHECK(fc.edge_count() == 6);

  SceneGraph chain = make_variant(g, Topology::chain, 9);
  CHECK(chain.edge_count() == 3);
  std::set<int> order(chain.chain_order.begin(), chain.chain_order.end());
  CHECK(order.size() == 4);  // a permutation of the nodes
  SceneGraph chain2 = make_variant(g, Topology::chain, 9);
  CHECK(chain.chain_order == chain2.chain_order);

  // chain messages flow from earlier to later in the order only
  auto adj = chain.in_neighbors();
  CHECK(adj[static_cast<size_t>(chain.chain_order[0])].empty());
  for (size_t k = 1; k < chain.chain_order.size(); ++k) {
    CHECK(adj[static_cast<size_t>(chain.chain_order[k])] ==
          std::vector<int>{chain.chain_order[k - 1]});
  }
}

TEST_CASE("spatial edges are symmetric with no self loops") {
  Rng rng(77);
  std::vector<uint16_t> px(100);
  for (auto& v : px) v = static_cast<uint16_t>(rng.uniform_int(0, 5));
  std::map<int, int> classes;
  for (uint16_t v : px) {
    if (v) classes[v] = 0;
  }
  if (classes.empty()) return;
  SceneGraph g = build_spatial_graph(InstanceMap(10, 10, px, classes));
  auto adj = g.in_neighbors();
  for (int v = 0; v < g.num_nodes(); ++v) {
    for (int u : adj[static_cast<size_t>(v)]) {
      CHECK(u != v);
      const auto& back = adj[static_cast<size_t>(u)];
      CHECK(std::find(back.begin(), back.end(), v) != back.end());
    }
  }
}

TEST_CASE("pgm round-trip preserves the map; missing sidecar ids are rejected") {
  InstanceMap map = make_map(3, 2, {{1, 0, 300}, {1, 300, 300}}, {{1, 2}, {300, 5}});
  map.save_pgm("test_map.pgm", "test_map.classes.json");
  InstanceMap loaded = InstanceMap::load_pgm("test_map.pgm", "test_map.classes.json");
  CHECK(loaded.pixels() == map.pixels());
  CHECK(loaded.instance_class() == map.instance_class());

  // Drop an id from the sidecar: the loader must reject the file.
  FILE* f = fopen("test_map_bad.json", "w");
  fputs("{\"instance_classes\": {\"1\": 2}}", f);
  fclose(f);
  CHECK_THROWS_AS(InstanceMap::load_pgm("test_map.pgm", "test_map_bad.json"), DataError);
}

}  // TEST_SUITE
