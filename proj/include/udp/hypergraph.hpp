#pragma once

// Marginal families as hypergraphs on the parties.
//
// A family whose hypergraph is disconnected splits the parties into J | J^C
// with every marginal inside one side, and phase twists of the Schmidt
// decomposition along that cut leave the whole deck unchanged. For a
// genuinely multipartite entangled state that is a second state with the same
// deck. GME itself is not decided here: callers supply that hypothesis, and
// counterexample_from_disconnection checks the actual Schmidt rank instead.

#include <optional>

#include "udp/disjoint_sets.hpp"
#include "udp/schmidt.hpp"

namespace udp {

class DeckHypergraph {
public:
  explicit DeckHypergraph(const MarginalFamily& family) : n_(family.num_parties()), edges_(family.subsets()) {}

  DeckHypergraph(int num_parties, std::vector<Subset> edges)
      : DeckHypergraph(MarginalFamily(num_parties, std::move(edges))) {}

  int num_vertices() const { return n_; }
  const std::vector<Subset>& edges() const { return edges_; }

  // Size-1 edges only cover their vertex.
  bool has_singleton_edges() const {
    return std::any_of(edges_.begin(), edges_.end(), [](const Subset& e) { return e.size() == 1; });
  }

  // Component label per vertex (index 0 is party 1); uncovered vertices are
  // their own component.
  std::vector<int> components() const {
    DisjointSets sets(static_cast<std::size_t>(n_));
    for (const auto& e : edges_)
      for (std::size_t k = 1; k < e.size(); ++k)
        sets.unite(static_cast<std::size_t>(e[0] - 1), static_cast<std::size_t>(e[k] - 1));
    return sets.labels();
  }

  std::vector<char> covered() const {
    std::vector<char> c(static_cast<std::size_t>(n_), 0);
    for (const auto& e : edges_)
      for (int v : e) c[static_cast<std::size_t>(v - 1)] = 1;
    return c;
  }

private:
  int n_;
  std::vector<Subset> edges_;
};

inline bool is_connected(const DeckHypergraph& g) {
  const auto cov = g.covered();
  if (std::find(cov.begin(), cov.end(), 0) != cov.end()) return false;
  const auto labels = g.components();
  return std::all_of(labels.begin(), labels.end(), [](int l) { return l == 0; });
}

struct NecessaryCheck {
  bool connected = false;
  bool violates_theorem2 = false; // a GME state cannot be determined by this family
};

inline NecessaryCheck udp_necessary_check(const MarginalFamily& family) {
  const bool c = is_connected(DeckHypergraph(family));
  return {c, !c};
}

// Fewest k-body marginals whose hypergraph can connect N vertices.
inline int marginal_number_lower_bound(int num_parties, int k) {
  if (k < 2) throw Error("lower bound needs marginals of size k >= 2");
  if (k > num_parties) throw Error("k cannot exceed the number of parties");
  return (num_parties - 1 + (k - 2)) / (k - 1);
}

// Every bipartition J | J^C (J containing party 1) with no edge crossing it.
inline std::vector<Subset> separating_cuts(const DeckHypergraph& g) {
  const auto labels = g.components();
  const int comps = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Subset> out;
  if (comps < 2) return out;
  // Component 0 holds party 1 and always sits on the left. Past 20 components
  // only the cut isolating component 0 is listed.
  const std::uint32_t limit = comps > 20 ? 1u : (1u << (comps - 1)) - 1u;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    Subset left;
    for (int v = 0; v < g.num_vertices(); ++v) {
      const int l = labels[static_cast<std::size_t>(v)];
      if (l == 0 || ((mask >> (l - 1)) & 1u)) left.push_back(v + 1);
    }
    out.push_back(std::move(left));
  }
  return out;
}

struct Counterexample {
  PureState state;
  Subset cut_left;
  double deck_distance = 0.0;
  double fidelity = 1.0;
};

// A phase-twisted state with the same deck over a disconnected family, or
// nothing when the state is product across every separating cut.
inline std::optional<Counterexample> counterexample_from_disconnection(const PureState& state,
                                                                       const MarginalFamily& family,
                                                                       double deck_tol = kDefaultDeckTol,
                                                                       double distinct_tol = 1e-6) {
  const DeckHypergraph g(family);
  if (is_connected(g)) return std::nullopt;
  const Deck target = compute_deck(state, family);
  for (const Subset& left : separating_cuts(g)) {
    const SchmidtDecomposition dec = schmidt_decompose(state, left);
    if (dec.rank() < 2) continue;
    PureState twisted = phase_twist(dec, balanced_sign_phases(dec));
    const double dist = deck_distance(target, compute_deck(twisted, family));
    const double fid = fidelity_up_to_phase(state, twisted);
    if (dist <= deck_tol && fid < 1.0 - distinct_tol) return Counterexample{std::move(twisted), left, dist, fid};
  }
  return std::nullopt;
}

} // namespace udp
