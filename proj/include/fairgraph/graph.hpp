#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairgraph/errors.hpp"
#include "fairgraph/matrix.hpp"

namespace fairgraph {

// Label value for nodes without a known class.
inline constexpr int kUnlabeled = -1;

// Immutable sparse undirected graph with node features and labels.
// Construction is single-threaded; afterwards the object is safe to share
// read-only across workers.
struct Graph {
  int n = 0;
  int num_classes = 0;
  std::vector<std::pair<int, int>> edges;  // deduplicated, u < v, no self-loops
  Csr csr;                                 // symmetric adjacency, unit weights
  Matrix features;                         // n x d_x
  std::vector<int> labels;                 // length n, kUnlabeled when unknown
  std::vector<int> degrees;                // csr row lengths

  int feature_dim() const { return features.cols; }

  bool adjacent(int u, int v) const {
    const int lo = csr.row_ptr[static_cast<std::size_t>(u)];
    const int hi = csr.row_ptr[static_cast<std::size_t>(u) + 1];
    return std::binary_search(csr.col.begin() + lo, csr.col.begin() + hi, v);
  }

  std::vector<int> labeled_nodes() const {
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
      if (labels[static_cast<std::size_t>(v)] != kUnlabeled) out.push_back(v);
    return out;
  }
};

struct LoadStats {
  int duplicate_edges = 0;
  int self_loops = 0;
};

namespace detail {

inline Csr build_symmetric_csr(int n, const std::vector<std::pair<int, int>>& edges) {
  Csr csr;
  csr.rows = n;
  csr.cols = n;
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (auto [u, v] : edges) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  csr.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) csr.row_ptr[static_cast<std::size_t>(i) + 1] = csr.row_ptr[static_cast<std::size_t>(i)] + deg[static_cast<std::size_t>(i)];
  csr.col.resize(static_cast<std::size_t>(csr.row_ptr.back()));
  csr.val.assign(csr.col.size(), 1.0);
  std::vector<int> fill(csr.row_ptr.begin(), csr.row_ptr.end() - 1);
  for (auto [u, v] : edges) {
    csr.col[static_cast<std::size_t>(fill[static_cast<std::size_t>(u)]++)] = v;
    csr.col[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = u;
  }
  for (int i = 0; i < n; ++i)
    std::sort(csr.col.begin() + csr.row_ptr[static_cast<std::size_t>(i)],
              csr.col.begin() + csr.row_ptr[static_cast<std::size_t>(i) + 1]);
  return csr;
}

}  // namespace detail

// Assemble a Graph from raw parts, dropping duplicate edges and self-loops.
inline Graph make_graph(Matrix features, std::vector<std::pair<int, int>> raw_edges,
                        std::vector<int> labels, LoadStats* stats = nullptr) {
  Graph g;
  g.n = features.rows;
  g.features = std::move(features);
  if (static_cast<int>(labels.size()) != g.n)
    throw DataError("labels length " + std::to_string(labels.size()) + " != node count " +
                    std::to_string(g.n));
  g.labels = std::move(labels);

  LoadStats local;
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : raw_edges) {
    if (u < 0 || v < 0 || u >= g.n || v >= g.n)
      throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") references a node outside 0.." + std::to_string(g.n - 1));
    if (u == v) {
      ++local.self_loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) {
      ++local.duplicate_edges;
      continue;
    }
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.csr = detail::build_symmetric_csr(g.n, g.edges);

  g.degrees.resize(static_cast<std::size_t>(g.n));
  for (int v = 0; v < g.n; ++v) g.degrees[static_cast<std::size_t>(v)] = g.csr.row_len(v);

  int max_label = -1;
  for (int y : g.labels) {
    if (y < kUnlabeled) throw DataError("label " + std::to_string(y) + " below -1");
    max_label = std::max(max_label, y);
  }
  g.num_classes = max_label + 1;

  if (stats) *stats = local;
  return g;
}

// ---------------------------------------------------------------------------
// File ingestion. Formats:
//   edges.tsv    two whitespace-separated 0-based ids per line, '#' comments
//   features.tsv line i = tab-separated decimal floats for node i
//   labels.tsv   "node_id label"; omitted nodes stay unlabeled
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::pair<int, int>> parse_edges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long u, v;
    if (!(ss >> u >> v))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected two node ids");
    std::string rest;
    if (ss >> rest)
      throw DataError(path + ":" + std::to_string(lineno) + ": trailing tokens");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return edges;
}

inline Matrix parse_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!ss.eof())
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed float");
    if (row.empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty feature row");
    if (width < 0) width = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != width)
      throw DataError(path + ":" + std::to_string(lineno) + ": feature width " +
                      std::to_string(row.size()) + " != " + std::to_string(width));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no feature rows");
  Matrix m(static_cast<int>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < width; ++j) m(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

inline std::vector<int> parse_labels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<int> labels(static_cast<std::size_t>(n), kUnlabeled);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long id, y;
    if (!(ss >> id >> y))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'node_id label'");
    if (id < 0 || id >= n)
      throw DataError(path + ":" + std::to_string(lineno) + ": node id out of range");
    if (y < kUnlabeled)
      throw DataError(path + ":" + std::to_string(lineno) + ": label below -1");
    labels[static_cast<std::size_t>(id)] = static_cast<int>(y);
  }
  return labels;
}

}  // namespace detail

inline Graph load_graph(const std::string& edges_path, const std::string& features_path,
                        const std::string& labels_path, LoadStats* stats = nullptr) {
  Matrix features = detail::parse_features(features_path);
  auto edges = detail::parse_edges(edges_path);
  auto labels = detail::parse_labels(labels_path, features.rows);
  return make_graph(std::move(features), std::move(edges), std::move(labels), stats);
}

// ---------------------------------------------------------------------------
// Normalized adjacency
// ---------------------------------------------------------------------------

// D^{-1/2} (A [+ I]) D^{-1/2} with degrees counted after the optional
// self-loop addition. Zero-degree nodes get all-zero rows.
struct NormalizedAdjacency {
  Csr matrix;
  bool self_loops = false;
};

inline NormalizedAdjacency normalized_adjacency(const Graph& g, bool add_self_loops = true) {
  NormalizedAdjacency out;
  out.self_loops = add_self_loops;

  std::vector<double> dinv(static_cast<std::size_t>(g.n), 0.0);
  for (int v = 0; v < g.n; ++v) {
    const int d = g.degrees[static_cast<std::size_t>(v)] + (add_self_loops ? 1 : 0);
    if (d > 0) dinv[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(static_cast<double>(d));
  }

  Csr& m = out.matrix;
  m.rows = g.n;
  m.cols = g.n;
  m.row_ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
  for (int v = 0; v < g.n; ++v)
    m.row_ptr[static_cast<std::size_t>(v) + 1] =
        m.row_ptr[static_cast<std::size_t>(v)] + g.csr.row_len(v) + (add_self_loops ? 1 : 0);
  m.col.resize(static_cast<std::size_t>(m.row_ptr.back()));
  m.val.resize(m.col.size());

  for (int v = 0; v < g.n; ++v) {
    int w = m.row_ptr[static_cast<std::size_t>(v)];
    bool self_placed = !add_self_loops;
    for (int p = g.csr.row_ptr[static_cast<std::size_t>(v)]; p < g.csr.row_ptr[static_cast<std::size_t>(v) + 1]; ++p) {
      const int u = g.csr.col[static_cast<std::size_t>(p)];
      if (!self_placed && u > v) {  // keep columns sorted
        m.col[static_cast<std::size_t>(w)] = v;
        m.val[static_cast<std::size_t>(w)] = dinv[static_cast<std::size_t>(v)] * dinv[static_cast<std::size_t>(v)];
        ++w;
        self_placed = true;
      }
      m.col[static_cast<std::size_t>(w)] = u;
      m.val[static_cast<std::size_t>(w)] = dinv[static_cast<std::size_t>(v)] * dinv[static_cast<std::size_t>(u)];
      ++w;
    }
    if (!self_placed) {
      m.col[static_cast<std::size_t>(w)] = v;
      m.val[static_cast<std::size_t>(w)] = dinv[static_cast<std::size_t>(v)] * dinv[static_cast<std::size_t>(v)];
      ++w;
    }
  }
  return out;
}

}  // namespace fairgraph
