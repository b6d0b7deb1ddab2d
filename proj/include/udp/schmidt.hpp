#pragma once

// Schmidt decomposition along a bipartition J | J^C.
//
// The state is matricized with J's parties as row indices (ascending party
// order, big-endian) and J^C's parties as columns. Left basis vectors live on
// J, right basis vectors on J^C, and
//   |psi> = sum_i coefficients[i] |left_i> |right_i>.

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>

#include "udp/marginal.hpp"

namespace udp {

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultGapTol = 1e-8;

struct Bipartition {
  Subset left;
  Subset right;

  static Bipartition from_left(const PartyStructure& s, const Subset& left) {
    Bipartition b{s.canonical(left), {}};
    b.right = s.complement(b.left);
    if (b.left.empty() || b.right.empty()) throw Error("bipartition sides must both be nonempty");
    return b;
  }

  Bipartition swapped() const { return {right, left}; }
};

struct SchmidtDecomposition {
  PartyStructure structure;
  Bipartition cut;
  Eigen::VectorXd coefficients; // sqrt(lambda_i), strictly decreasing up to ties
  Eigen::MatrixXcd left_basis;  // dim(J) x rank
  Eigen::MatrixXcd right_basis; // dim(J^C) x rank

  int rank() const { return static_cast<int>(coefficients.size()); }
  Eigen::VectorXd lambdas() const { return coefficients.array().square(); }
  std::size_t ambient_rank() const {
    return std::min(structure.dim_of(cut.left), structure.dim_of(cut.right));
  }
};

namespace detail {

inline std::vector<int> zero_based(const Subset& s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (int p : s) out.push_back(p - 1);
  return out;
}

inline cplx first_nonzero(const Eigen::VectorXcd& v, double eps = 1e-12) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > eps) return v(i);
  return {};
}

} // namespace detail

inline SchmidtDecomposition schmidt_decompose(const PureState& state, const Bipartition& cut,
                                              double rank_tol = kDefaultRankTol) {
  const auto& s = state.structure();
  const Bipartition b = Bipartition::from_left(s, cut.left);
  if (!cut.right.empty() && s.canonical(cut.right) != b.right)
    throw Error("cut does not partition the parties");

  const Eigen::MatrixXcd psi = matricize(state.amplitudes(), s.local_dims(), detail::zero_based(b.left));
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > rank_tol * smax) ++rank;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(rank));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Equal coefficients are ordered by the left vector's first nonzero entry.
  const double tie = 1e-12 * smax;
  for (Eigen::Index lo = 0; lo < rank;) {
    Eigen::Index hi = lo + 1;
    while (hi < rank && sv(hi - 1) - sv(hi) <= tie) ++hi;
    if (hi - lo > 1) {
      std::sort(order.begin() + lo, order.begin() + hi, [&](Eigen::Index x, Eigen::Index y) {
        const cplx a = detail::first_nonzero(svd.matrixU().col(x));
        const cplx c = detail::first_nonzero(svd.matrixU().col(y));
        const cplx a_n = a / std::max(std::abs(a), 1e-300), c_n = c / std::max(std::abs(c), 1e-300);
        if (a_n.real() != c_n.real()) return a_n.real() > c_n.real();
        return a_n.imag() > c_n.imag();
      });
    }
    lo = hi;
  }

  SchmidtDecomposition dec{s, b, Eigen::VectorXd(rank), Eigen::MatrixXcd(psi.rows(), rank),
                           Eigen::MatrixXcd(psi.cols(), rank)};
  for (Eigen::Index k = 0; k < rank; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    Eigen::VectorXcd u = svd.matrixU().col(src);
    Eigen::VectorXcd w = svd.matrixV().col(src).conjugate();
    // Gauge: first nonzero entry of the left vector is real and positive.
    const cplx f = detail::first_nonzero(u);
    if (std::abs(f) > 0) {
      const cplx ph = f / std::abs(f);
      u /= ph;
      w *= ph;
    }
    dec.coefficients(k) = sv(src);
    dec.left_basis.col(k) = u;
    dec.right_basis.col(k) = w;
  }
  return dec;
}

inline SchmidtDecomposition schmidt_decompose(const PureState& state, const Subset& left,
                                              double rank_tol = kDefaultRankTol) {
  return schmidt_decompose(state, Bipartition::from_left(state.structure(), left), rank_tol);
}

struct GenericityReport {
  bool full_rank = false;
  bool distinct_spectrum = false;
  double min_gap = std::numeric_limits<double>::infinity(); // over lambda; infinite at rank 1
  int rank = 0;
};

inline GenericityReport classify_genericity(const SchmidtDecomposition& dec, std::size_t ambient_rank,
                                            double gap_tol = kDefaultGapTol) {
  GenericityReport r;
  r.rank = dec.rank();
  r.full_rank = static_cast<std::size_t>(r.rank) == ambient_rank;
  const Eigen::VectorXd lam = dec.lambdas();
  for (Eigen::Index i = 1; i < lam.size(); ++i) r.min_gap = std::min(r.min_gap, std::abs(lam(i - 1) - lam(i)));
  r.distinct_spectrum = r.min_gap > gap_tol;
  return r;
}

inline GenericityReport classify_genericity(const SchmidtDecomposition& dec, double gap_tol = kDefaultGapTol) {
  return classify_genericity(dec, dec.ambient_rank(), gap_tol);
}

// sum_i e^{i phases[i]} sqrt(lambda_i) |left_i>|right_i>
inline PureState phase_twist(const SchmidtDecomposition& dec, std::span<const double> phases) {
  if (phases.size() != static_cast<std::size_t>(dec.rank()))
    throw Error("phase vector length " + std::to_string(phases.size()) + " does not match Schmidt rank " +
                std::to_string(dec.rank()));
  Eigen::VectorXcd weights(dec.rank());
  for (int i = 0; i < dec.rank(); ++i) weights(i) = std::polar(dec.coefficients(i), phases[static_cast<std::size_t>(i)]);
  const Eigen::MatrixXcd psi = dec.left_basis * weights.asDiagonal() * dec.right_basis.transpose();
  return PureState::from_amplitudes(
      dec.structure, dematricize(psi, dec.structure.local_dims(), detail::zero_based(dec.cut.left)), true);
}

inline PureState reconstruct(const SchmidtDecomposition& dec) {
  const std::vector<double> zeros(static_cast<std::size_t>(dec.rank()), 0.0);
  return phase_twist(dec, zeros);
}

// Splits the Schmidt weights into two groups of near-equal mass and gives the
// second group phase pi. The result shares the two cut marginals with the
// original and has overlap |sum of signed lambdas| with it.
inline std::vector<double> balanced_sign_phases(const SchmidtDecomposition& dec) {
  const Eigen::VectorXd lam = dec.lambdas();
  std::vector<double> phases(static_cast<std::size_t>(dec.rank()), 0.0);
  double mass0 = 0.0, mass1 = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (mass1 < mass0) {
      phases[static_cast<std::size_t>(i)] = std::numbers::pi;
      mass1 += lam(i);
    } else {
      mass0 += lam(i);
    }
  }
  return phases;
}

} // namespace udp
