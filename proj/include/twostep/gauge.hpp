#pragma once

// Tree-cotree splitting of the free edge DOFs.
//
// Nodes carrying a constrained edge trace (the edge Dirichlet surfaces) are
// collapsed into one virtual root. The spanning tree then has exactly one edge
// per remaining node, which is the dimension of the gradient kernel of the
// curl-curl matrix on the free edges, and also the number of divergence rows.

#include <Eigen/Core>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <queue>
#include <vector>

#include "twostep/spaces.hpp"

namespace twostep {

struct GaugeGraph {
  static constexpr std::ptrdiff_t kRoot = -1;

  std::shared_ptr<const Mesh> mesh;
  /// Graph vertex per mesh node; collapsed nodes map to the root vertex.
  std::vector<std::ptrdiff_t> vertex_of_node;
  /// Mesh node of each non-virtual vertex, ascending.
  std::vector<std::size_t> vertex_nodes;
  bool has_virtual_root = false;
  /// Edge list: free edge DOF -> (vertex, vertex).
  std::vector<std::array<std::size_t, 2>> edges;

  std::size_t num_vertices() const { return vertex_nodes.size() + (has_virtual_root ? 1 : 0); }
  std::size_t root_vertex() const { return has_virtual_root ? vertex_nodes.size() : 0; }
};

inline GaugeGraph build_gauge_graph(const EdgeSpace& edge_space, const BoundaryTags& tags,
                                    const DirichletSpec& spec) {
  const Mesh& mesh = *edge_space.mesh;
  GaugeGraph g;
  g.mesh = edge_space.mesh;

  std::vector<bool> collapsed(mesh.num_nodes(), false);
  for (auto l : spec.edge)
    for (auto n : tags.nodes_of(l)) collapsed[n] = true;
  g.has_virtual_root = std::find(collapsed.begin(), collapsed.end(), true) != collapsed.end();

  // The collapsed nodes must form one connected piece of boundary; otherwise
  // the curl-curl kernel holds an extra non-gradient field per extra piece.
  if (g.has_virtual_root) {
    std::vector<std::size_t> parent(mesh.num_nodes());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (edge_space.dofs.is_free(e)) continue;
      const auto& en = mesh.edges()[e];
      parent[find(en[0])] = find(en[1]);
    }
    std::ptrdiff_t comp = -1;
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
      if (!collapsed[n]) continue;
      const auto r = static_cast<std::ptrdiff_t>(find(n));
      if (comp < 0) comp = r;
      if (r != comp)
        throw UnsupportedTopology("build_gauge_graph: the constrained boundary has more than one connected piece");
    }
  }

  g.vertex_of_node.assign(mesh.num_nodes(), GaugeGraph::kRoot);
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n)
    if (!collapsed[n]) {
      g.vertex_of_node[n] = static_cast<std::ptrdiff_t>(g.vertex_nodes.size());
      g.vertex_nodes.push_back(n);
    }
  const auto root = static_cast<std::size_t>(g.root_vertex());
  auto vertex = [&](std::size_t node) {
    const auto v = g.vertex_of_node[node];
    return v < 0 ? root : static_cast<std::size_t>(v);
  };
  for (auto e : edge_space.dofs.free_entities()) {
    const auto& en = mesh.edges()[e];
    g.edges.push_back({vertex(en[0]), vertex(en[1])});
  }
  return g;
}

/// Tree (T) and cotree (R) edge DOF sets plus the [R | T] permutation.
struct TreeCotreePartition {
  std::vector<std::size_t> tree;    // ascending free edge DOFs
  std::vector<std::size_t> cotree;  // ascending free edge DOFs
  std::vector<std::size_t> order;   // order[k] = original DOF at position k of [R | T]
  std::vector<std::size_t> position;  // inverse of order
  /// Mesh nodes of the non-root graph vertices: the gauge test space.
  std::vector<std::size_t> gauge_nodes;

  std::size_t size() const { return order.size(); }
  std::size_t num_tree() const { return tree.size(); }
  std::size_t num_cotree() const { return cotree.size(); }
};

/// Breadth-first spanning tree from the root, visiting incident edges in
/// ascending DOF order.
inline TreeCotreePartition spanning_tree(const GaugeGraph& g) {
  const auto nv = g.num_vertices();
  std::vector<std::vector<std::size_t>> incident(nv);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [a, b] = g.edges[e];
    if (a == b) continue;  // both ends on the collapsed boundary
    incident[a].push_back(e);
    incident[b].push_back(e);
  }

  std::vector<bool> seen(nv, false);
  std::vector<bool> in_tree(g.edges.size(), false);
  std::queue<std::size_t> frontier;
  const auto root = g.root_vertex();
  seen[root] = true;
  frontier.push(root);
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto e : incident[v]) {
      const auto& [a, b] = g.edges[e];
      const auto w = a == v ? b : a;
      if (seen[w]) continue;
      seen[w] = true;
      in_tree[e] = true;
      ++reached;
      frontier.push(w);
    }
  }
  if (reached != nv) throw UnsupportedTopology("spanning_tree: gauge graph is not connected");

  TreeCotreePartition p;
  for (std::size_t e = 0; e < g.edges.size(); ++e) (in_tree[e] ? p.tree : p.cotree).push_back(e);
  p.order = p.cotree;
  p.order.insert(p.order.end(), p.tree.begin(), p.tree.end());
  p.position.assign(p.order.size(), 0);
  for (std::size_t k = 0; k < p.order.size(); ++k) p.position[p.order[k]] = k;
  for (std::size_t v = 0; v < g.vertex_nodes.size(); ++v)
    if (v != root || g.has_virtual_root) p.gauge_nodes.push_back(g.vertex_nodes[v]);
  return p;
}

/// Permute a vector into [R | T] order.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> reorder(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                                 const TreeCotreePartition& p) {
  if (static_cast<std::size_t>(x.size()) != p.size()) throw InvalidArgument("reorder: size mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(x.size());
  for (std::size_t k = 0; k < p.size(); ++k) y[static_cast<Eigen::Index>(k)] = x[static_cast<Eigen::Index>(p.order[k])];
  return y;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> unorder(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                                                 const TreeCotreePartition& p) {
  if (static_cast<std::size_t>(y.size()) != p.size()) throw InvalidArgument("unorder: size mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(y.size());
  for (std::size_t k = 0; k < p.size(); ++k) x[static_cast<Eigen::Index>(p.order[k])] = y[static_cast<Eigen::Index>(k)];
  return x;
}

/// Symmetric permutation of a square edge matrix into [R | T] blocks.
template <class Scalar>
Eigen::SparseMatrix<Scalar> reorder(const Eigen::SparseMatrix<Scalar>& a, const TreeCotreePartition& p) {
  if (static_cast<std::size_t>(a.rows()) != p.size() || static_cast<std::size_t>(a.cols()) != p.size())
    throw InvalidArgument("reorder: size mismatch");
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
      t.emplace_back(static_cast<int>(p.position[static_cast<std::size_t>(it.row())]),
                     static_cast<int>(p.position[static_cast<std::size_t>(it.col())]), it.value());
  Eigen::SparseMatrix<Scalar> b(a.rows(), a.cols());
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

/// Debug dump: one "nodeA nodeB edgeId" line per tree edge (mesh ids).
inline void write_tree(std::ostream& os, const EdgeSpace& edges, const TreeCotreePartition& p) {
  for (auto dof : p.tree) {
    const auto e = edges.dofs.free_entities()[dof];
    const auto& en = edges.mesh->edges()[e];
    os << en[0] << ' ' << en[1] << ' ' << e << '\n';
  }
}

}  // namespace twostep
