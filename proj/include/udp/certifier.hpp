#pragma once

// Phase-system certification of uniqueness among pure states.
//
// A state is split by two cross cuts AB|CD and AC|BD. Along the primary cut
// any pure state with the same rho_AB, rho_CD (and a non-degenerate Schmidt
// spectrum) is a phase twist sum_i e^{i phi_i} sqrt(lambda_i)|i>|i>. Writing
//   gamma_ij = (1 - e^{i(phi_i - phi_j)}) sqrt(lambda_i lambda_j),   i < j,
// equality of rho_AC and rho_BD becomes a homogeneous linear system in the
// gamma_ij built from the partial traces
//   Q_ij = Tr_B |i><j|_AB,  P_ij = Tr_D |i><j|_CD,
//   L_ij = Tr_A |i><j|_AB,  M_ij = Tr_C |i><j|_CD.
// A trivial null space forces all phases equal.

#include <optional>
#include <random>
#include <sstream>

#include "udp/disjoint_sets.hpp"
#include "udp/schmidt.hpp"

namespace udp {

inline constexpr double kDefaultSvdTol = 1e-9;
inline constexpr double kDefaultDistinctTol = 1e-6;

struct CrossCutSpec {
  Subset A, B, C, D;

  Subset AB() const { return subset_union(A, B); }
  Subset CD() const { return subset_union(C, D); }
  Subset AC() const { return subset_union(A, C); }
  Subset BD() const { return subset_union(B, D); }

  // Primary and secondary roles exchanged: AB|CD <-> AC|BD.
  CrossCutSpec transposed() const { return {A, C, B, D}; }

  CrossCutSpec canonical(const PartyStructure& s) const {
    CrossCutSpec c{canonical_subset(A, s.num_parties()), canonical_subset(B, s.num_parties()),
                   canonical_subset(C, s.num_parties()), canonical_subset(D, s.num_parties())};
    std::vector<int> seen(static_cast<std::size_t>(s.num_parties() + 1), 0);
    for (const Subset* blk : {&c.A, &c.B, &c.C, &c.D})
      for (int p : *blk) {
        if (seen[static_cast<std::size_t>(p)]++) throw Error("party " + std::to_string(p) + " appears in two blocks");
      }
    for (int p = 1; p <= s.num_parties(); ++p)
      if (!seen[static_cast<std::size_t>(p)]) throw Error("party " + std::to_string(p) + " is in no block");
    if (c.AB().empty() || c.CD().empty() || c.AC().empty() || c.BD().empty())
      throw Error("blocks must make AB, CD, AC and BD all nonempty");
    return c;
  }

  MarginalFamily family(int num_parties) const {
    // empty blocks can make two of the four marginals coincide
    std::vector<Subset> subs;
    for (auto s : {AB(), CD(), AC(), BD()})
      if (std::find(subs.begin(), subs.end(), s) == subs.end()) subs.push_back(std::move(s));
    return MarginalFamily(num_parties, std::move(subs));
  }

  std::string to_string() const {
    return "A=" + subset_to_string(A) + ";B=" + subset_to_string(B) + ";C=" + subset_to_string(C) +
           ";D=" + subset_to_string(D);
  }
};

// "A=1,2;B=3;C=4;D=5,6"; an empty block is written "A=".
inline CrossCutSpec parse_blocks(const std::string& text) {
  CrossCutSpec spec;
  bool given[4] = {false, false, false, false};
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    const auto b = group.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    group = group.substr(b);
    const auto eq = group.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("block '" + group + "' lacks NAME=");
    std::string name = group.substr(0, eq);
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
    Subset* target = nullptr;
    int slot = 0;
    if (name == "A") target = &spec.A, slot = 0;
    else if (name == "B") target = &spec.B, slot = 1;
    else if (name == "C") target = &spec.C, slot = 2;
    else if (name == "D") target = &spec.D, slot = 3;
    else throw UsageError("unknown block name '" + name + "'");
    if (given[slot]) throw UsageError("block " + name + " given twice");
    given[slot] = true;
    std::stringstream items(group.substr(eq + 1));
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto ib = item.find_first_not_of(" \t");
      if (ib == std::string::npos) continue;
      try {
        std::size_t used = 0;
        target->push_back(std::stoi(item.substr(ib), &used));
        if (item.find_first_not_of(" \t", ib + used) != std::string::npos)
          throw UsageError("bad party '" + item + "' in block spec");
      } catch (const std::logic_error&) {
        throw UsageError("bad party '" + item + "' in block spec");
      }
    }
  }
  for (bool g : given)
    if (!g) throw UsageError("block spec must name all of A, B, C, D");
  return spec;
}

// Contiguous blocks of sizes |A|,|B|,|C|,|D| over parties 1..N in order.
inline CrossCutSpec contiguous_blocks(int a, int b, int c, int d) {
  CrossCutSpec s;
  int next = 1;
  for (auto [blk, size] : {std::pair{&s.A, a}, {&s.B, b}, {&s.C, c}, {&s.D, d}})
    for (int i = 0; i < size; ++i) blk->push_back(next++);
  return s;
}

// Contiguous blocks of sizes ceil/floor halves of each half; N = 2n.
inline CrossCutSpec balanced_blocks(int num_parties) {
  const int half = num_parties / 2;
  const int a = (half + 1) / 2, b = half - a;
  const int rest = num_parties - half;
  const int c = rest / 2, d = rest - c;
  return contiguous_blocks(a, b, c, d);
}

// ---------------------------------------------------------------------------
// Cross matrices

struct CrossMatrices {
  int rank = 0;
  // Entry [i * rank + j] holds the (i, j) matrix, for all i, j.
  std::vector<Eigen::MatrixXcd> Q, P, L, M;

  const Eigen::MatrixXcd& q(int i, int j) const { return Q[static_cast<std::size_t>(i * rank + j)]; }
  const Eigen::MatrixXcd& p(int i, int j) const { return P[static_cast<std::size_t>(i * rank + j)]; }
  const Eigen::MatrixXcd& l(int i, int j) const { return L[static_cast<std::size_t>(i * rank + j)]; }
  const Eigen::MatrixXcd& m(int i, int j) const { return M[static_cast<std::size_t>(i * rank + j)]; }
};

namespace detail {

// Factor-wise reshape of each basis column: rows over `sub`, columns over the
// rest of `within`.
inline std::vector<Eigen::MatrixXcd> reshape_columns(const Eigen::MatrixXcd& basis, const PartyStructure& s,
                                                     const Subset& within, const Subset& sub) {
  const auto dims = s.dims_of(within);
  const auto pos = positions_in(sub, within);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(static_cast<std::size_t>(basis.cols()));
  for (Eigen::Index i = 0; i < basis.cols(); ++i) out.push_back(matricize(basis.col(i), dims, pos));
  return out;
}

inline void check_primary_cut(const SchmidtDecomposition& dec, const CrossCutSpec& spec) {
  if (dec.cut.left != spec.AB() || dec.cut.right != spec.CD())
    throw Error("Schmidt decomposition was not taken along the primary cut AB|CD");
}

} // namespace detail

inline CrossMatrices build_cross_matrices(const SchmidtDecomposition& dec, const CrossCutSpec& raw_spec) {
  const CrossCutSpec spec = raw_spec.canonical(dec.structure);
  detail::check_primary_cut(dec, spec);
  const auto& s = dec.structure;
  const Subset ab = spec.AB(), cd = spec.CD();
  const auto xa = detail::reshape_columns(dec.left_basis, s, ab, spec.A);
  const auto xb = detail::reshape_columns(dec.left_basis, s, ab, spec.B);
  const auto yc = detail::reshape_columns(dec.right_basis, s, cd, spec.C);
  const auto yd = detail::reshape_columns(dec.right_basis, s, cd, spec.D);

  CrossMatrices cm;
  cm.rank = dec.rank();
  const auto r = static_cast<std::size_t>(cm.rank);
  cm.Q.resize(r * r);
  cm.P.resize(r * r);
  cm.L.resize(r * r);
  cm.M.resize(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      cm.Q[i * r + j] = xa[i] * xa[j].adjoint();
      cm.L[i * r + j] = xb[i] * xb[j].adjoint();
      cm.P[i * r + j] = yc[i] * yc[j].adjoint();
      cm.M[i * r + j] = yd[i] * yd[j].adjoint();
    }
  return cm;
}

// ---------------------------------------------------------------------------
// Counting

inline std::int64_t choose2(std::int64_t x) { return x * (x - 1) / 2; }

inline std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Complex equations harvested from the Q(x)P and L(x)M block structure.
inline std::int64_t predicted_equation_count(std::int64_t dim_a, std::int64_t dim_b, std::int64_t dim_c,
                                             std::int64_t dim_d) {
  return choose2(dim_a) * (dim_c * dim_c - 1) + choose2(dim_b) * (dim_d * dim_d - 1);
}

inline std::int64_t gamma_variable_count(std::int64_t rank) { return choose2(rank); }

// Equation surplus of the most unbalanced split, closed form for N = 2n qudits.
inline std::int64_t worst_case_surplus_closed_form(int n, std::int64_t d) {
  const std::int64_t twice = ipow(d, 2 * n) - ipow(d, 2 * n - 1) - ipow(d, 2 * n - 2) - ipow(d, n + 1) +
                             ipow(d, n) + ipow(d, n - 1) - d * d + d;
  return twice / 2;
}

// ---------------------------------------------------------------------------
// Gamma system

struct EquationCounts {
  std::int64_t variables = 0;         // complex gamma_ij, i < j
  std::int64_t qp_equations = 0;      // complex, from Q (x) P
  std::int64_t lm_equations = 0;      // complex, from L (x) M
  std::int64_t complex_equations() const { return qp_equations + lm_equations; }
};

struct GammaSystem {
  int rank = 0;
  std::vector<std::pair<int, int>> pairs; // variable k <-> (i, j), i < j
  // Complex form: row e reads sum_k coef(e,k) gamma_k + conj_coef(e,k) conj(gamma_k) = 0.
  Eigen::MatrixXcd coef, conj_coef;
  // Real form over [Re gamma | Im gamma]; rows alternate real and imaginary parts.
  Eigen::MatrixXd matrix;
  EquationCounts counts;

  Eigen::Index num_real_variables() const { return matrix.cols(); }
};

namespace detail {

// Appends the off-diagonal-block equations of sum_{i<j} gamma X_ij (x) Y_ij + h.c. = 0.
inline void harvest_blocks(const CrossMatrices& cm, const std::vector<Eigen::MatrixXcd>& X,
                           const std::vector<Eigen::MatrixXcd>& Y, const std::vector<std::pair<int, int>>& pairs,
                           std::vector<Eigen::VectorXcd>& rows, std::vector<Eigen::VectorXcd>& conj_rows) {
  if (pairs.empty()) return;
  const auto r = static_cast<std::size_t>(cm.rank);
  const Eigen::Index dx = X[0].rows(), dy = Y[0].rows();
  const auto m = static_cast<Eigen::Index>(pairs.size());
  for (Eigen::Index a = 0; a < dx; ++a)
    for (Eigen::Index b = a + 1; b < dx; ++b)
      for (Eigen::Index c = 0; c < dy; ++c)
        for (Eigen::Index e = 0; e < dy; ++e) {
          if (c == dy - 1 && e == dy - 1) continue; // implied by Tr Y_ij = 0
          Eigen::VectorXcd row(m), crow(m);
          for (Eigen::Index k = 0; k < m; ++k) {
            const auto [i, j] = pairs[static_cast<std::size_t>(k)];
            const auto ij = static_cast<std::size_t>(i) * r + static_cast<std::size_t>(j);
            const auto ji = static_cast<std::size_t>(j) * r + static_cast<std::size_t>(i);
            row(k) = X[ij](a, b) * Y[ij](c, e);
            crow(k) = X[ji](a, b) * Y[ji](c, e);
          }
          rows.push_back(std::move(row));
          conj_rows.push_back(std::move(crow));
        }
}

} // namespace detail

inline GammaSystem assemble_gamma_system(const CrossMatrices& cm) {
  GammaSystem sys;
  sys.rank = cm.rank;
  for (int i = 0; i < cm.rank; ++i)
    for (int j = i + 1; j < cm.rank; ++j) sys.pairs.emplace_back(i, j);
  const auto m = static_cast<Eigen::Index>(sys.pairs.size());

  std::vector<Eigen::VectorXcd> rows, conj_rows;
  detail::harvest_blocks(cm, cm.Q, cm.P, sys.pairs, rows, conj_rows);
  const auto qp = static_cast<std::int64_t>(rows.size());
  detail::harvest_blocks(cm, cm.L, cm.M, sys.pairs, rows, conj_rows);
  sys.counts = {static_cast<std::int64_t>(m), qp, static_cast<std::int64_t>(rows.size()) - qp};

  const auto neq = static_cast<Eigen::Index>(rows.size());
  sys.coef.resize(neq, m);
  sys.conj_coef.resize(neq, m);
  sys.matrix.resize(2 * neq, 2 * m);
  for (Eigen::Index e = 0; e < neq; ++e) {
    sys.coef.row(e) = rows[static_cast<std::size_t>(e)].transpose();
    sys.conj_coef.row(e) = conj_rows[static_cast<std::size_t>(e)].transpose();
    for (Eigen::Index k = 0; k < m; ++k) {
      // gamma c + conj(gamma) c' with gamma = x + i y
      const cplx c = sys.coef(e, k), cc = sys.conj_coef(e, k);
      sys.matrix(2 * e, k) = c.real() + cc.real();
      sys.matrix(2 * e, m + k) = -c.imag() + cc.imag();
      sys.matrix(2 * e + 1, k) = c.imag() + cc.imag();
      sys.matrix(2 * e + 1, m + k) = c.real() - cc.real();
    }
  }
  return sys;
}

inline GammaSystem assemble_gamma_system(const CrossMatrices& cm, const CrossCutSpec&) {
  return assemble_gamma_system(cm);
}

// gamma_ij = (1 - e^{i(phi_i - phi_j)}) c_i c_j in the real layout of GammaSystem::matrix.
inline Eigen::VectorXd gamma_from_phases(const GammaSystem& sys, const Eigen::VectorXd& coefficients,
                                         std::span<const double> phases) {
  const auto m = static_cast<Eigen::Index>(sys.pairs.size());
  Eigen::VectorXd x(2 * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto [i, j] = sys.pairs[static_cast<std::size_t>(k)];
    const cplx g = (1.0 - std::polar(1.0, phases[static_cast<std::size_t>(i)] - phases[static_cast<std::size_t>(j)])) *
                   coefficients(i) * coefficients(j);
    x(k) = g.real();
    x(m + k) = g.imag();
  }
  return x;
}

struct NullSpace {
  Eigen::Index null_dim = 0;
  Eigen::MatrixXd basis;              // columns span the numerical null space
  Eigen::VectorXd singular_values;    // descending
  double min_relative_singular = 0.0; // smallest sigma / sigma_max over the full column count
};

inline NullSpace decide_null_space(const GammaSystem& sys, double svd_tol = kDefaultSvdTol) {
  NullSpace ns;
  const Eigen::Index cols = sys.matrix.cols();
  if (cols == 0) return ns;
  if (sys.matrix.rows() == 0 || sys.matrix.norm() == 0.0) {
    ns.null_dim = cols;
    ns.basis = Eigen::MatrixXd::Identity(cols, cols);
    ns.singular_values = Eigen::VectorXd::Zero(std::min(sys.matrix.rows(), cols));
    return ns;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeFullV);
  ns.singular_values = svd.singularValues();
  const double smax = ns.singular_values(0);
  Eigen::Index rank = 0;
  while (rank < ns.singular_values.size() && ns.singular_values(rank) > svd_tol * smax) ++rank;
  ns.null_dim = cols - rank;
  ns.min_relative_singular =
      ns.singular_values.size() < cols ? 0.0 : ns.singular_values(ns.singular_values.size() - 1) / smax;
  if (ns.null_dim > 0) ns.basis = svd.matrixV().rightCols(ns.null_dim);
  return ns;
}

// ---------------------------------------------------------------------------
// Verdict

enum class UdpStatus { certified_udp, not_udp_witnessed, inconclusive };

inline const char* to_string(UdpStatus s) {
  switch (s) {
  case UdpStatus::certified_udp: return "CERTIFIED_UDP";
  case UdpStatus::not_udp_witnessed: return "NOT_UDP_WITNESSED";
  case UdpStatus::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct CertifyOptions {
  double svd_tol = kDefaultSvdTol;
  double gap_tol = kDefaultGapTol;
  double deck_tol = kDefaultDeckTol;
  double rank_tol = kDefaultRankTol;
  double distinct_tol = kDefaultDistinctTol;
  // Extra marginals the witness must reproduce besides AB, CD, AC, BD.
  std::optional<MarginalFamily> family;
  std::uint64_t seed = 0x5eed;
  int random_phase_tries = 64;
};

struct UdpVerdict {
  UdpStatus status = UdpStatus::inconclusive;
  Eigen::Index null_dim = 0;
  std::optional<PureState> witness;
  double witness_deck_distance = 0.0;
  double witness_fidelity = 1.0;
  GenericityReport genericity;
  EquationCounts equation_counts;
  double min_relative_singular = 0.0;
  bool rank_one_primary_cut = false;
  std::vector<std::string> notes;
};

namespace detail {

struct WitnessSearch {
  const PureState& state;
  const SchmidtDecomposition& dec;
  const GammaSystem& sys;
  const Deck& target;
  const CertifyOptions& opt;
  double residual_scale;

  std::optional<std::tuple<PureState, double, double>> attempt(std::span<const double> phases) const {
    const Eigen::VectorXd x = gamma_from_phases(sys, dec.coefficients, phases);
    const double xn = x.norm();
    if (xn < 1e-12) return std::nullopt;
    if ((sys.matrix * x).norm() > 1e-6 * residual_scale * xn) return std::nullopt;
    PureState w = phase_twist(dec, phases);
    const double dist = deck_distance(target, compute_deck(w, target.family));
    const double fid = fidelity_up_to_phase(state, w);
    if (dist <= opt.deck_tol && fid < 1.0 - opt.distinct_tol) return std::tuple{std::move(w), dist, fid};
    return std::nullopt;
  }
};

// Schmidt indices whose gamma vanishes in `g` share a phase class.
inline std::vector<int> phase_classes(const GammaSystem& sys, const Eigen::VectorXd& g, int rank) {
  const auto m = static_cast<Eigen::Index>(sys.pairs.size());
  double gmax = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) gmax = std::max(gmax, std::hypot(g(k), g(m + k)));
  DisjointSets sets(static_cast<std::size_t>(rank));
  for (Eigen::Index k = 0; k < m; ++k)
    if (std::hypot(g(k), g(m + k)) <= 1e-6 * gmax) {
      const auto [i, j] = sys.pairs[static_cast<std::size_t>(k)];
      sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  return sets.labels();
}

} // namespace detail

inline UdpVerdict certify_udp(const PureState& state, const CrossCutSpec& raw_spec, const CertifyOptions& opt = {}) {
  const auto& s = state.structure();
  const CrossCutSpec spec = raw_spec.canonical(s);
  UdpVerdict v;

  const SchmidtDecomposition dec = schmidt_decompose(state, Bipartition{spec.AB(), spec.CD()}, opt.rank_tol);
  v.genericity = classify_genericity(dec, opt.gap_tol);
  const CrossMatrices cm = build_cross_matrices(dec, spec);
  const GammaSystem sys = assemble_gamma_system(cm);
  v.equation_counts = sys.counts;
  const NullSpace ns = decide_null_space(sys, opt.svd_tol);
  v.null_dim = ns.null_dim;
  v.min_relative_singular = ns.min_relative_singular;
  const bool generic = v.genericity.full_rank && v.genericity.distinct_spectrum;

  if (dec.rank() == 1) {
    v.rank_one_primary_cut = true;
    v.notes.emplace_back("rank-1 primary cut: the state is the product of its AB and CD marginals' "
                         "eigenvectors and is fixed by those two marginals alone");
  }
  if (!v.genericity.full_rank) v.notes.emplace_back("primary-cut Schmidt rank is not full");
  if (!v.genericity.distinct_spectrum) v.notes.emplace_back("primary-cut Schmidt spectrum is degenerate");

  if (ns.null_dim == 0) {
    v.status = generic ? UdpStatus::certified_udp : UdpStatus::inconclusive;
    return v;
  }

  MarginalFamily family = spec.family(s.num_parties());
  if (opt.family) family = family.merged_with(*opt.family);
  const Deck target = compute_deck(state, family);
  const double scale = ns.singular_values.size() ? std::max(ns.singular_values(0), 1.0) : 1.0;
  const detail::WitnessSearch search{state, dec, sys, target, opt, scale};
  const int r = dec.rank();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  auto accept = [&](std::tuple<PureState, double, double>&& hit) {
    v.witness = std::move(std::get<0>(hit));
    v.witness_deck_distance = std::get<1>(hit);
    v.witness_fidelity = std::get<2>(hit);
    v.status = UdpStatus::not_udp_witnessed;
    return true;
  };

  auto try_classes = [&](const std::vector<int>& label) {
    const int classes = *std::max_element(label.begin(), label.end()) + 1;
    if (classes < 2) return false;
    std::vector<double> phi(static_cast<std::size_t>(r));
    if (classes <= 10) {
      for (std::uint32_t mask = 1; mask < (1u << (classes - 1)); ++mask) {
        for (int i = 0; i < r; ++i)
          phi[static_cast<std::size_t>(i)] = (label[static_cast<std::size_t>(i)] > 0 &&
                                              (mask >> (label[static_cast<std::size_t>(i)] - 1)) & 1u)
                                                 ? std::numbers::pi
                                                 : 0.0;
        if (auto hit = search.attempt(phi)) return accept(std::move(*hit));
      }
    }
    std::vector<double> class_phase(static_cast<std::size_t>(classes));
    for (int t = 0; t < 16; ++t) {
      class_phase[0] = 0.0;
      for (int c = 1; c < classes; ++c) class_phase[static_cast<std::size_t>(c)] = angle(rng);
      for (int i = 0; i < r; ++i) phi[static_cast<std::size_t>(i)] = class_phase[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
      if (auto hit = search.attempt(phi)) return accept(std::move(*hit));
    }
    return false;
  };

  // 1. sign patterns over the phase classes suggested by null vectors
  std::vector<Eigen::VectorXd> probes;
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(ns.null_dim, 8); ++k) probes.push_back(ns.basis.col(k));
  if (ns.null_dim > 1) probes.push_back(ns.basis.rowwise().sum());
  for (const auto& g : probes)
    if (try_classes(detail::phase_classes(sys, g, r))) return v;

  // 2. single-index flips
  std::vector<double> phi(static_cast<std::size_t>(r), 0.0);
  for (int i = 0; i < r; ++i) {
    std::fill(phi.begin(), phi.end(), 0.0);
    phi[static_cast<std::size_t>(i)] = std::numbers::pi;
    if (auto hit = search.attempt(phi)) {
      accept(std::move(*hit));
      return v;
    }
  }

  // 3. unstructured random phases
  for (int t = 0; t < opt.random_phase_tries; ++t) {
    phi[0] = 0.0;
    for (int i = 1; i < r; ++i) phi[static_cast<std::size_t>(i)] = angle(rng);
    if (auto hit = search.attempt(phi)) {
      accept(std::move(*hit));
      return v;
    }
  }

  v.status = UdpStatus::inconclusive;
  v.notes.emplace_back("null space is nontrivial but no phase twist in it reproduced the deck");
  return v;
}

// ---------------------------------------------------------------------------
// Statistical check of the trace-only dependence among the cross-matrix entries

struct DependenceCheck {
  Eigen::Index measured_rank = 0;
  Eigen::Index predicted_rank = 0;
  Eigen::Index total_entries = 0;
};

inline DependenceCheck verify_dependence_lemma(const PartyStructure& structure, const CrossCutSpec& raw_spec,
                                               int trials, std::uint64_t seed, int i = 0, int j = 1,
                                               double rank_tol = 1e-8) {
  const CrossCutSpec spec = raw_spec.canonical(structure);
  const auto sq = [](std::size_t x) { return static_cast<Eigen::Index>(x * x); };
  const Eigen::Index T = sq(structure.dim_of(spec.A)) + sq(structure.dim_of(spec.B)) +
                         sq(structure.dim_of(spec.C)) + sq(structure.dim_of(spec.D));
  if (trials < T)
    throw Error("need at least " + std::to_string(T) + " trials, got " + std::to_string(trials));
  if (i == j) throw Error("dependence check needs i != j");

  Eigen::MatrixXcd samples(trials, T);
  for (int t = 0; t < trials; ++t) {
    const PureState psi = sample_haar_state(structure, seed + static_cast<std::uint64_t>(t));
    const SchmidtDecomposition dec = schmidt_decompose(psi, Bipartition{spec.AB(), spec.CD()});
    if (std::max(i, j) >= dec.rank()) throw Error("sampled state has Schmidt rank below the requested index");
    const CrossMatrices cm = build_cross_matrices(dec, spec);
    Eigen::Index col = 0;
    for (const auto* mat : {&cm.q(i, j), &cm.l(i, j), &cm.p(i, j), &cm.m(i, j)})
      for (Eigen::Index a = 0; a < mat->rows(); ++a)
        for (Eigen::Index b = 0; b < mat->cols(); ++b) samples(t, col++) = (*mat)(a, b);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(samples);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > rank_tol * sv(0)) ++rank;
  return {rank, T - 4, T};
}

} // namespace udp
