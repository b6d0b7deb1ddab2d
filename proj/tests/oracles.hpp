#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's reshaping, union-find or histogram code paths.

#include <complex>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

inline std::vector<int> digits_of(std::size_t index, const std::vector<int>& dims) {
  std::vector<int> d(dims.size());
  for (std::size_t p = dims.size(); p-- > 0;) {
    d[p] = static_cast<int>(index % static_cast<std::size_t>(dims[p]));
    index /= static_cast<std::size_t>(dims[p]);
  }
  return d;
}

// rho[a][b] = sum over x, y with equal traced digits of psi_x conj(psi_y);
// keep holds 1-based parties in ascending order.
inline Eigen::MatrixXcd partial_trace(const Eigen::VectorXcd& psi, const std::vector<int>& dims,
                                      const std::vector<int>& keep) {
  std::size_t dk = 1;
  for (int p : keep) dk *= static_cast<std::size_t>(dims[static_cast<std::size_t>(p - 1)]);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  std::vector<bool> kept(dims.size(), false);
  for (int p : keep) kept[static_cast<std::size_t>(p - 1)] = true;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    const auto dx = digits_of(static_cast<std::size_t>(x), dims);
    for (Eigen::Index y = 0; y < psi.size(); ++y) {
      const auto dy = digits_of(static_cast<std::size_t>(y), dims);
      bool same = true;
      for (std::size_t p = 0; p < dims.size() && same; ++p)
        if (!kept[p] && dx[p] != dy[p]) same = false;
      if (!same) continue;
      Eigen::Index a = 0, b = 0;
      for (int p : keep) {
        const auto q = static_cast<std::size_t>(p - 1);
        a = a * dims[q] + dx[q];
        b = b * dims[q] + dy[q];
      }
      rho(a, b) += psi(x) * std::conj(psi(y));
    }
  }
  return rho;
}

// BFS over the bipartite vertex/edge incidence graph.
inline bool connected_bfs(int n, const std::vector<std::vector<int>>& edges) {
  if (n < 1) return false;
  // nodes 0..n-1 are vertices, n.. are edges
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) + edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int v : edges[e]) {
      adj[static_cast<std::size_t>(v - 1)].push_back(n + static_cast<int>(e));
      adj[static_cast<std::size_t>(n) + e].push_back(v - 1);
    }
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        q.push(w);
      }
  }
  // a lone vertex with no edges is not connected to anything (N = 1 included)
  for (int v = 0; v < n; ++v)
    if (!seen[static_cast<std::size_t>(v)] || adj[static_cast<std::size_t>(v)].empty()) return false;
  return true;
}

// Tuple histogram over every k-column subset chosen by bitmask; returns the
// common multiplicity, or -1 if the counts are not uniform over all d^k tuples.
inline int oa_index_by_histogram(const std::vector<std::vector<int>>& rows, int d, int k) {
  const int n = static_cast<int>(rows.at(0).size());
  int cells = 1;
  for (int i = 0; i < k; ++i) cells *= d;
  int lambda = -2;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    std::map<std::vector<int>, int> hist;
    for (const auto& row : rows) {
      std::vector<int> t;
      for (int c = 0; c < n; ++c)
        if (mask >> c & 1u) t.push_back(row[static_cast<std::size_t>(c)]);
      ++hist[t];
    }
    if (static_cast<int>(hist.size()) != cells) return -1;
    for (const auto& [t, count] : hist) {
      if (lambda == -2) lambda = count;
      if (count != lambda) return -1;
    }
  }
  return lambda;
}

inline Eigen::VectorXcd random_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

} // namespace oracle
