#pragma once

#include <numeric>
#include <utility>
#include <vector>

namespace udp {

// Union-find over 0..n-1 with path halving and union by size.
class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1), sets_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --sets_;
    return true;
  }

  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }
  std::size_t num_sets() const { return sets_; }
  std::size_t size() const { return parent_.size(); }

  // Dense labels 0..num_sets()-1, numbered by first appearance.
  std::vector<int> labels() {
    std::vector<int> root_label(parent_.size(), -1), out(parent_.size());
    int next = 0;
    for (std::size_t v = 0; v < parent_.size(); ++v) {
      const std::size_t r = find(v);
      if (root_label[r] < 0) root_label[r] = next++;
      out[v] = root_label[r];
    }
    return out;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t sets_;
};

} // namespace udp
