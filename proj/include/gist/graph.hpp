#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gist/common.hpp"

namespace gist {

/// Immutable undirected simple graph in compressed sparse row form.
/// Adjacency is symmetric with no self-loops and no duplicate edges;
/// column indices within each row are sorted. `coords` is populated for
/// graphs built from meshes or point clouds.
struct Graph {
  Index num_nodes = 0;
  std::vector<Index> row_ptr;  // size num_nodes + 1
  std::vector<Index> col_idx;  // size 2 * num_edges, sorted per row
  std::optional<Matrix> coords;

  Index num_edges() const { return static_cast<Index>(col_idx.size()) / 2; }
  Index degree(Index v) const { return row_ptr[v + 1] - row_ptr[v]; }

  /// Neighbors of v as a [begin, end) index range into col_idx.
  std::pair<const Index*, const Index*> neighbors(Index v) const {
    return {col_idx.data() + row_ptr[v], col_idx.data() + row_ptr[v + 1]};
  }

  bool has_edge(Index u, Index v) const {
    auto [b, e] = neighbors(u);
    return std::binary_search(b, e, v);
  }
};

/// Build a graph from an edge list. Directed input is symmetrized;
/// self-loops and duplicates are dropped. Node count is max id + 1 unless
/// a larger count is forced (for graphs with trailing isolated nodes).
inline Graph make_graph(Index num_nodes, std::vector<std::pair<Index, Index>> edges) {
  Index max_id = num_nodes - 1;
  for (auto& [u, v] : edges) {
    require(u >= 0 && v >= 0, "make_graph: negative node id");
    max_id = std::max({max_id, u, v});
    if (u > v) std::swap(u, v);
  }
  const Index n = max_id + 1;

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });

  Graph g;
  g.num_nodes = n;
  g.row_ptr.assign(n + 1, 0);
  for (const auto& [u, v] : edges) {
    ++g.row_ptr[u + 1];
    ++g.row_ptr[v + 1];
  }
  for (Index i = 0; i < n; ++i) g.row_ptr[i + 1] += g.row_ptr[i];
  g.col_idx.resize(edges.size() * 2);
  std::vector<Index> cursor(g.row_ptr.begin(), g.row_ptr.end() - 1);
  for (const auto& [u, v] : edges) {
    g.col_idx[cursor[u]++] = v;
    g.col_idx[cursor[v]++] = u;
  }
  for (Index i = 0; i < n; ++i)
    std::sort(g.col_idx.begin() + g.row_ptr[i], g.col_idx.begin() + g.row_ptr[i + 1]);
  return g;
}

namespace detail {

inline std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool parse_index(std::string_view tok, Index& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size() && out >= 0;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream in(s);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

} // namespace detail

/// Parse a whitespace-separated edge list ("u v" per line, '#' comments).
inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_edge_list: cannot open " + path);
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(detail::strip_comment(line));
    if (toks.empty()) continue;
    Index u, v;
    if (toks.size() != 2 || !detail::parse_index(toks[0], u) || !detail::parse_index(toks[1], v))
      throw error("load_edge_list: parse error at line " + std::to_string(line_no) +
                  ": expected two integer ids");
    edges.emplace_back(u, v);
  }
  require(!edges.empty(), "load_edge_list: no edges");
  return make_graph(0, std::move(edges));
}

/// Parse an OFF triangle mesh: one node per vertex, edges from triangle
/// sides, vertex positions kept as node coordinates.
inline Graph load_off_mesh(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_off_mesh: cannot open " + path);

  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      out = detail::strip_comment(out);
      if (!detail::split_ws(out).empty()) return true;
    }
    return false;
  };

  std::string line;
  require(next_line(line) && detail::split_ws(line)[0] == "OFF", "load_off_mesh: missing OFF header");
  require(next_line(line), "load_off_mesh: missing count line");
  auto counts = detail::split_ws(line);
  require(counts.size() >= 2, "load_off_mesh: malformed count line");
  Index nv, nf;
  require(detail::parse_index(counts[0], nv) && detail::parse_index(counts[1], nf),
          "load_off_mesh: malformed count line");
  require(nv > 0, "load_off_mesh: no vertices");

  Matrix coords(nv, 3);
  for (Index i = 0; i < nv; ++i) {
    require(next_line(line), "load_off_mesh: unexpected end of file in vertex list");
    auto toks = detail::split_ws(line);
    require(toks.size() >= 3, "load_off_mesh: malformed vertex line");
    for (int c = 0; c < 3; ++c) coords(i, c) = std::stod(toks[c]);
  }

  std::vector<std::pair<Index, Index>> edges;
  for (Index f = 0; f < nf; ++f) {
    require(next_line(line), "load_off_mesh: unexpected end of file in face list");
    auto toks = detail::split_ws(line);
    Index arity;
    require(!toks.empty() && detail::parse_index(toks[0], arity), "load_off_mesh: malformed face line");
    require(arity == 3, "load_off_mesh: non-triangle face");
    require(toks.size() == 4, "load_off_mesh: malformed face line");
    Index v[3];
    for (int c = 0; c < 3; ++c) {
      require(detail::parse_index(toks[c + 1], v[c]), "load_off_mesh: malformed face line");
      require(v[c] < nv, "load_off_mesh: vertex index out of range");
    }
    edges.emplace_back(v[0], v[1]);
    edges.emplace_back(v[1], v[2]);
    edges.emplace_back(v[0], v[2]);
  }

  Graph g = make_graph(nv, std::move(edges));
  require(g.num_nodes == nv, "load_off_mesh: face references exceed vertex count");
  g.coords = std::move(coords);
  return g;
}

// ---------------------------------------------------------------------------
// Dense operators (oracle paths only; guarded by the oracle cap)
// ---------------------------------------------------------------------------

enum class OperatorKind { transition, normalized_laplacian, laplacian_pseudoinverse };

struct DenseOperator {
  Matrix data;
  OperatorKind kind;
};

/// Random-walk transition matrix P = D^-1 A. Zero-degree rows are all zero.
inline DenseOperator transition_matrix(const Graph& g, Index oracle_cap = kDefaultOracleCap) {
  require(g.num_nodes <= oracle_cap, "transition_matrix: oracle only (node count over cap)");
  Matrix p = Matrix::Zero(g.num_nodes, g.num_nodes);
  for (Index i = 0; i < g.num_nodes; ++i) {
    const Index deg = g.degree(i);
    if (deg == 0) continue;
    auto [b, e] = g.neighbors(i);
    for (auto it = b; it != e; ++it) p(i, *it) = 1.0 / static_cast<double>(deg);
  }
  return {std::move(p), OperatorKind::transition};
}

/// Normalized Laplacian L = I - D^-1/2 A D^-1/2. Rows and columns of
/// isolated nodes are all zero (including the diagonal).
inline DenseOperator normalized_laplacian(const Graph& g, Index oracle_cap = kDefaultOracleCap) {
  require(g.num_nodes <= oracle_cap, "normalized_laplacian: oracle only (node count over cap)");
  Matrix l = Matrix::Zero(g.num_nodes, g.num_nodes);
  std::vector<double> inv_sqrt_deg(g.num_nodes, 0.0);
  for (Index i = 0; i < g.num_nodes; ++i)
    if (g.degree(i) > 0) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));
  for (Index i = 0; i < g.num_nodes; ++i) {
    if (g.degree(i) == 0) continue;
    l(i, i) = 1.0;
    auto [b, e] = g.neighbors(i);
    for (auto it = b; it != e; ++it) l(i, *it) = -inv_sqrt_deg[i] * inv_sqrt_deg[*it];
  }
  return {std::move(l), OperatorKind::normalized_laplacian};
}

// ---------------------------------------------------------------------------
// Sparse production paths
// ---------------------------------------------------------------------------

/// out = P * x with P the random-walk transition matrix, never materialized.
inline Matrix transition_multiply(const Graph& g, const Matrix& x) {
  require(x.rows() == g.num_nodes, "transition_multiply: row count mismatch");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index i = 0; i < g.num_nodes; ++i) {
      const Index deg = g.degree(i);
      if (deg == 0) continue;
      auto [b, e] = g.neighbors(i);
      double acc = 0.0;
      for (auto it = b; it != e; ++it) acc += x(*it, c);
      out(i, c) = acc / static_cast<double>(deg);
    }
  }
  return out;
}

/// Neighborhood mean of node features; isolated nodes keep their own row.
inline Matrix graph_convolution(const Graph& g, const Matrix& x) {
  require(x.rows() == g.num_nodes, "graph_convolution: row count mismatch");
  Matrix out = transition_multiply(g, x);
  for (Index i = 0; i < g.num_nodes; ++i)
    if (g.degree(i) == 0) out.row(i) = x.row(i);
  return out;
}

/// out = M^T * x where M is the neighborhood-averaging operator of
/// graph_convolution. Used by reverse-mode differentiation.
inline Matrix graph_convolution_transpose(const Graph& g, const Matrix& x) {
  require(x.rows() == g.num_nodes, "graph_convolution_transpose: row count mismatch");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index i = 0; i < g.num_nodes; ++i) {
      const Index deg = g.degree(i);
      if (deg == 0) {
        out(i, c) += x(i, c);
        continue;
      }
      const double w = x(i, c) / static_cast<double>(deg);
      auto [b, e] = g.neighbors(i);
      for (auto it = b; it != e; ++it) out(*it, c) += w;
    }
  }
  return out;
}

/// Connected components by BFS; returns component id per node.
inline std::vector<Index> connected_components(const Graph& g, Index* count_out = nullptr) {
  std::vector<Index> comp(g.num_nodes, -1);
  std::vector<Index> stack;
  Index count = 0;
  for (Index s = 0; s < g.num_nodes; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      Index v = stack.back();
      stack.pop_back();
      auto [b, e] = g.neighbors(v);
      for (auto it = b; it != e; ++it) {
        if (comp[*it] < 0) {
          comp[*it] = count;
          stack.push_back(*it);
        }
      }
    }
    ++count;
  }
  if (count_out) *count_out = count;
  return comp;
}

/// Relabel nodes by a permutation: node i of the input becomes node
/// perm[i] of the output. Coordinates move with their nodes.
inline Graph permute_graph(const Graph& g, const std::vector<Index>& perm) {
  require(static_cast<Index>(perm.size()) == g.num_nodes, "permute_graph: size mismatch");
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(g.num_edges());
  for (Index u = 0; u < g.num_nodes; ++u) {
    auto [b, e] = g.neighbors(u);
    for (auto it = b; it != e; ++it)
      if (u < *it) edges.emplace_back(perm[u], perm[*it]);
  }
  Graph out = make_graph(g.num_nodes, std::move(edges));
  if (g.coords) {
    Matrix c(g.num_nodes, g.coords->cols());
    for (Index i = 0; i < g.num_nodes; ++i) c.row(perm[i]) = g.coords->row(i);
    out.coords = std::move(c);
  }
  return out;
}

} // namespace gist
