#pragma once

// Partial traces, decks over marginal families, and deck comparison.

#include <map>
#include <string>
#include <vector>

#include "udp/state.hpp"

namespace udp {

inline constexpr double kDefaultDeckTol = 1e-9;

// Tr_{keep^C} |psi><psi|, indexed big-endian over `keep`.
inline Marginal partial_trace(const PureState& state, const Subset& keep) {
  const auto& s = state.structure();
  if (keep.empty()) throw Error("cannot keep an empty set of parties");
  Subset k = s.canonical(keep);
  std::vector<int> rows;
  rows.reserve(k.size());
  for (int p : k) rows.push_back(p - 1);
  const Eigen::MatrixXcd psi = matricize(state.amplitudes(), s.local_dims(), rows);
  Eigen::MatrixXcd rho = psi * psi.adjoint();
  return {std::move(k), std::move(rho)};
}

// Traces a marginal further down to `keep`, which must be contained in m.parties.
inline Marginal reduce_marginal(const Marginal& m, const Subset& keep, const PartyStructure& s) {
  const auto pos = positions_in(keep, m.parties);
  const auto dims = s.dims_of(m.parties);
  const std::size_t n = dims.size();
  std::vector<char> kept(n, 0);
  for (int p : pos) kept[static_cast<std::size_t>(p)] = 1;

  Eigen::Index dk = 1;
  for (std::size_t p = 0; p < n; ++p)
    if (kept[p]) dk *= dims[p];
  const Eigen::Index dim = m.matrix.rows();

  // (kept index, traced index) for each full index
  std::vector<Eigen::Index> ki(static_cast<std::size_t>(dim)), ti(static_cast<std::size_t>(dim));
  std::vector<int> digit(n, 0);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Eigen::Index a = 0, b = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (kept[p])
        a = a * dims[p] + digit[p];
      else
        b = b * dims[p] + digit[p];
    }
    ki[static_cast<std::size_t>(idx)] = a;
    ti[static_cast<std::size_t>(idx)] = b;
    for (std::size_t p = n; p-- > 0;) {
      if (++digit[p] < dims[p]) break;
      digit[p] = 0;
    }
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
  for (Eigen::Index x = 0; x < dim; ++x)
    for (Eigen::Index y = 0; y < dim; ++y)
      if (ti[static_cast<std::size_t>(x)] == ti[static_cast<std::size_t>(y)])
        out(ki[static_cast<std::size_t>(x)], ki[static_cast<std::size_t>(y)]) += m.matrix(x, y);
  return {keep, std::move(out)};
}

class MarginalFamily {
public:
  MarginalFamily() = default;

  MarginalFamily(int num_parties, std::vector<Subset> subsets) : n_(num_parties) {
    if (num_parties < 1) throw Error("family needs a positive number of parties");
    for (auto& s : subsets) {
      if (s.empty()) throw Error("family contains an empty subset");
      Subset c = canonical_subset(std::move(s), num_parties);
      if (std::find(subsets_.begin(), subsets_.end(), c) != subsets_.end())
        throw Error("family contains subset {" + subset_to_string(c) + "} twice");
      subsets_.push_back(std::move(c));
    }
  }

  // All C(N, k) subsets of size k in lexicographic order.
  static MarginalFamily complete(int num_parties, int k) {
    if (k < 1 || k > num_parties) throw Error("k must lie in 1..N for a complete k-deck");
    std::vector<Subset> subs;
    std::vector<char> mask(static_cast<std::size_t>(num_parties), 0);
    std::fill(mask.begin(), mask.begin() + k, 1);
    do {
      Subset s;
      for (int i = 0; i < num_parties; ++i)
        if (mask[static_cast<std::size_t>(i)]) s.push_back(i + 1);
      subs.push_back(std::move(s));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return MarginalFamily(num_parties, std::move(subs));
  }

  int num_parties() const { return n_; }
  const std::vector<Subset>& subsets() const { return subsets_; }
  std::size_t size() const { return subsets_.size(); }

  MarginalFamily merged_with(const MarginalFamily& other) const {
    std::vector<Subset> subs = subsets_;
    for (const auto& s : other.subsets_)
      if (std::find(subs.begin(), subs.end(), s) == subs.end()) subs.push_back(s);
    return MarginalFamily(n_, std::move(subs));
  }

  friend bool operator==(const MarginalFamily&, const MarginalFamily&) = default;

private:
  int n_ = 0;
  std::vector<Subset> subsets_;
};

// "k=3" (complete 3-deck) or "1,2,3;4,5,6".
inline MarginalFamily parse_family(const std::string& spec, int num_parties) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string t = trim(spec);
  if (t.rfind("k=", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(t.substr(2), &used);
      if (used != t.size() - 2) throw UsageError("bad family spec '" + spec + "'");
      return MarginalFamily::complete(num_parties, k);
    } catch (const std::logic_error&) {
      throw UsageError("bad family spec '" + spec + "'");
    }
  }
  std::vector<Subset> subs;
  std::stringstream groups(t);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    Subset s;
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      try {
        std::size_t used = 0;
        s.push_back(std::stoi(item, &used));
        if (used != item.size()) throw UsageError("bad party '" + item + "' in family spec");
      } catch (const std::logic_error&) {
        throw UsageError("bad party '" + item + "' in family spec");
      }
    }
    subs.push_back(std::move(s));
  }
  if (subs.empty()) throw UsageError("family spec '" + spec + "' names no subsets");
  return MarginalFamily(num_parties, std::move(subs));
}

struct Deck {
  MarginalFamily family;
  std::vector<Marginal> marginals;
};

inline Deck compute_deck(const PureState& state, const MarginalFamily& family) {
  if (family.num_parties() != state.num_parties())
    throw Error("family party count does not match the state");
  Deck d{family, {}};
  d.marginals.reserve(family.size());
  for (const auto& s : family.subsets()) d.marginals.push_back(partial_trace(state, s));
  return d;
}

enum class DeckMatching { ordered, unordered };

// Largest Frobenius distance between corresponding marginals.
inline double deck_distance(const Deck& a, const Deck& b, DeckMatching mode = DeckMatching::ordered) {
  if (mode == DeckMatching::ordered) {
    if (!(a.family == b.family)) throw Error("deck families differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.marginals.size(); ++i)
      worst = std::max(worst, (a.marginals[i].matrix - b.marginals[i].matrix).norm());
    return worst;
  }
  if (a.family.num_parties() != b.family.num_parties() || a.marginals.size() != b.marginals.size())
    throw Error("deck families differ");
  std::map<Subset, const Marginal*> lookup;
  for (const auto& m : b.marginals) lookup[m.parties] = &m;
  double worst = 0.0;
  for (const auto& m : a.marginals) {
    auto it = lookup.find(m.parties);
    if (it == lookup.end()) throw Error("deck families differ at {" + subset_to_string(m.parties) + "}");
    worst = std::max(worst, (m.matrix - it->second->matrix).norm());
  }
  return worst;
}

inline double deck_distance(const PureState& a, const PureState& b, const MarginalFamily& family) {
  return deck_distance(compute_deck(a, family), compute_deck(b, family));
}

inline nlohmann::json marginal_to_json(const Marginal& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < m.matrix.cols(); ++c)
      entries.push_back({m.matrix(r, c).real(), m.matrix(r, c).imag()});
  return {{"parties", m.parties}, {"matrix", std::move(entries)}};
}

inline nlohmann::json deck_to_json(const Deck& d) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : d.marginals) out.push_back(marginal_to_json(m));
  return out;
}

inline Deck deck_from_json(const nlohmann::json& j, int num_parties) {
  Deck d;
  std::vector<Subset> subs;
  try {
    for (const auto& item : j) {
      Marginal m;
      m.parties = item.at("parties").get<Subset>();
      const auto& entries = item.at("matrix");
      const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(entries.size()))));
      if (dim * dim != static_cast<Eigen::Index>(entries.size())) throw Error("marginal matrix is not square");
      m.matrix.resize(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
          const auto& e = entries.at(static_cast<std::size_t>(r * dim + c));
          m.matrix(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
      subs.push_back(m.parties);
      d.marginals.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed deck JSON: ") + e.what());
  }
  d.family = MarginalFamily(num_parties, std::move(subs));
  for (std::size_t i = 0; i < d.marginals.size(); ++i) d.marginals[i].parties = d.family.subsets()[i];
  return d;
}

} // namespace udp
