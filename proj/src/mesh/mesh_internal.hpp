#pragma once

#include <array>
#include <vector>

#include "dbc/mesh.hpp"

namespace dbc::detail {

struct EdgeTable {
  struct Edge {
    int v0 = -1, v1 = -1;  // v0 < v1
    int t0 = -1, t1 = -1;  // t1 < 0 on the boundary
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges;  // local edge k joins tri[k], tri[k+1]
};

EdgeTable build_edges(const std::vector<std::array<int, 3>>& triangles);
std::vector<std::vector<int>> vertex_triangles(const Mesh& m);
double max_edge_length(const Mesh& m);
/// circumradius / inradius of triangle t
double triangle_shape(const Mesh& m, int t);

}  // namespace dbc::detail
