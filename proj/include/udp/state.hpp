#pragma once

// Multi-qudit pure states with an explicit party structure.
//
// Basis indices are mixed-radix with party 1 as the most significant digit,
// so the digit string "0121" reads party 1 first. Party subsets are 1-based,
// sorted and duplicate-free everywhere in this library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "udp/error.hpp"

namespace udp {

using cplx = std::complex<double>;
using Subset = std::vector<int>;

inline constexpr std::size_t kDefaultDimensionCap = 65536;
inline constexpr double kDefaultNormTol = 1e-12;
inline constexpr double kMarginalTol = 1e-10;

inline std::string subset_to_string(const Subset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out;
}

// Returns a sorted copy; rejects out-of-range or repeated parties.
inline Subset canonical_subset(Subset s, int num_parties) {
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 1 || s[i] > num_parties)
      throw Error("party " + std::to_string(s[i]) + " outside 1.." + std::to_string(num_parties));
    if (i && s[i] == s[i - 1])
      throw Error("party " + std::to_string(s[i]) + " repeated in subset");
  }
  return s;
}

inline Subset full_subset(int num_parties) {
  Subset s(static_cast<std::size_t>(num_parties));
  std::iota(s.begin(), s.end(), 1);
  return s;
}

inline Subset subset_union(const Subset& a, const Subset& b) {
  Subset out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline char digit_char(int digit) {
  return digit < 10 ? static_cast<char>('0' + digit) : static_cast<char>('a' + digit - 10);
}

inline int char_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'z') return c - 'a' + 10;
  if (c >= 'A' && c <= 'Z') return c - 'A' + 10;
  return -1;
}

class PartyStructure {
public:
  PartyStructure() = default;

  explicit PartyStructure(std::vector<int> local_dims, std::size_t dim_cap = kDefaultDimensionCap)
      : dims_(std::move(local_dims)) {
    if (dims_.empty()) throw Error("party structure needs at least one party");
    std::size_t total = 1;
    for (int d : dims_) {
      if (d < 2) throw Error("local dimensions must be >= 2");
      if (d > 36) throw Error("local dimensions above 36 have no digit-string encoding");
      if (total > dim_cap / static_cast<std::size_t>(d))
        throw Error("total dimension exceeds cap of " + std::to_string(dim_cap));
      total *= static_cast<std::size_t>(d);
    }
    dim_ = total;
    strides_.assign(dims_.size(), 1);
    for (std::size_t p = dims_.size() - 1; p > 0; --p) strides_[p - 1] = strides_[p] * dims_[p];
  }

  static PartyStructure uniform(int num_parties, int d, std::size_t dim_cap = kDefaultDimensionCap) {
    if (num_parties < 1) throw Error("number of parties must be positive");
    return PartyStructure(std::vector<int>(static_cast<std::size_t>(num_parties), d), dim_cap);
  }

  int num_parties() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& local_dims() const { return dims_; }
  std::size_t dim() const { return dim_; }
  int local_dim(int party) const { return dims_[static_cast<std::size_t>(party - 1)]; }

  std::size_t dim_of(const Subset& parties) const {
    std::size_t out = 1;
    for (int p : parties) out *= static_cast<std::size_t>(local_dim(p));
    return out;
  }

  std::vector<int> dims_of(const Subset& parties) const {
    std::vector<int> out;
    out.reserve(parties.size());
    for (int p : parties) out.push_back(local_dim(p));
    return out;
  }

  Subset complement(const Subset& parties) const {
    Subset out;
    for (int p = 1; p <= num_parties(); ++p)
      if (!std::binary_search(parties.begin(), parties.end(), p)) out.push_back(p);
    return out;
  }

  Subset canonical(Subset s) const { return canonical_subset(std::move(s), num_parties()); }

  std::vector<int> digits(std::size_t index) const {
    std::vector<int> out(dims_.size());
    for (std::size_t p = dims_.size(); p-- > 0;) {
      out[p] = static_cast<int>(index % static_cast<std::size_t>(dims_[p]));
      index /= static_cast<std::size_t>(dims_[p]);
    }
    return out;
  }

  std::size_t index(std::span<const int> digits) const {
    if (digits.size() != dims_.size()) throw Error("digit count does not match number of parties");
    std::size_t out = 0;
    for (std::size_t p = 0; p < dims_.size(); ++p) {
      if (digits[p] < 0 || digits[p] >= dims_[p])
        throw Error("digit " + std::to_string(digits[p]) + " out of range for party " +
                    std::to_string(p + 1) + " of dimension " + std::to_string(dims_[p]));
      out = out * static_cast<std::size_t>(dims_[p]) + static_cast<std::size_t>(digits[p]);
    }
    return out;
  }

  std::string basis_string(std::size_t index) const {
    std::string out;
    for (int d : digits(index)) out += digit_char(d);
    return out;
  }

  std::size_t parse_basis(std::string_view s) const {
    if (s.size() != dims_.size())
      throw Error("basis string '" + std::string(s) + "' has wrong length for " +
                  std::to_string(dims_.size()) + " parties");
    std::vector<int> ds;
    ds.reserve(s.size());
    for (char c : s) {
      const int d = char_digit(c);
      if (d < 0) throw Error("invalid digit '" + std::string(1, c) + "' in basis string");
      ds.push_back(d);
    }
    return index(ds);
  }

  friend bool operator==(const PartyStructure& a, const PartyStructure& b) { return a.dims_ == b.dims_; }

private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 0;
};

// Reshapes a vector over a tensor product of the given dims into a matrix whose
// rows run over the factors at `row_positions` (0-based, ascending) and whose
// columns run over the remaining factors, both in big-endian order.
inline Eigen::MatrixXcd matricize(const Eigen::VectorXcd& v, std::span<const int> dims,
                                  std::span<const int> row_positions) {
  const std::size_t n = dims.size();
  std::vector<char> is_row(n, 0);
  for (int p : row_positions) is_row[static_cast<std::size_t>(p)] = 1;
  Eigen::Index rows = 1, cols = 1;
  for (std::size_t p = 0; p < n; ++p) (is_row[p] ? rows : cols) *= dims[p];
  if (rows * cols != v.size()) throw Error("vector length does not match tensor dims");

  Eigen::MatrixXcd out(rows, cols);
  std::vector<int> digit(n, 0);
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    Eigen::Index r = 0, c = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (is_row[p])
        r = r * dims[p] + digit[p];
      else
        c = c * dims[p] + digit[p];
    }
    out(r, c) = v(idx);
    for (std::size_t p = n; p-- > 0;) {
      if (++digit[p] < dims[p]) break;
      digit[p] = 0;
    }
  }
  return out;
}

// Inverse of matricize.
inline Eigen::VectorXcd dematricize(const Eigen::MatrixXcd& m, std::span<const int> dims,
                                    std::span<const int> row_positions) {
  const std::size_t n = dims.size();
  std::vector<char> is_row(n, 0);
  for (int p : row_positions) is_row[static_cast<std::size_t>(p)] = 1;
  Eigen::VectorXcd out(m.rows() * m.cols());
  std::vector<int> digit(n, 0);
  for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
    Eigen::Index r = 0, c = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (is_row[p])
        r = r * dims[p] + digit[p];
      else
        c = c * dims[p] + digit[p];
    }
    out(idx) = m(r, c);
    for (std::size_t p = n; p-- > 0;) {
      if (++digit[p] < dims[p]) break;
      digit[p] = 0;
    }
  }
  return out;
}

// Positions (0-based) of `sub` inside the sorted superset `within`.
inline std::vector<int> positions_in(const Subset& sub, const Subset& within) {
  std::vector<int> out;
  out.reserve(sub.size());
  for (int p : sub) {
    auto it = std::lower_bound(within.begin(), within.end(), p);
    if (it == within.end() || *it != p) throw Error("party " + std::to_string(p) + " not in enclosing set");
    out.push_back(static_cast<int>(it - within.begin()));
  }
  return out;
}

class PureState {
public:
  PureState() = default;

  static PureState from_amplitudes(PartyStructure structure, Eigen::VectorXcd amplitudes,
                                   bool normalize = false, double norm_tol = kDefaultNormTol) {
    if (static_cast<std::size_t>(amplitudes.size()) != structure.dim())
      throw Error("amplitude vector length " + std::to_string(amplitudes.size()) +
                  " does not match dimension " + std::to_string(structure.dim()));
    const double nrm2 = amplitudes.squaredNorm();
    if (!(nrm2 > 0.0) || !std::isfinite(nrm2)) throw Error("zero or non-finite state vector");
    if (normalize) {
      amplitudes /= std::sqrt(nrm2);
    } else if (std::abs(nrm2 - 1.0) > norm_tol) {
      throw Error("state norm deviates from 1 by " + std::to_string(std::abs(nrm2 - 1.0)));
    }
    PureState s;
    s.structure_ = std::move(structure);
    s.amplitudes_ = std::move(amplitudes);
    return s;
  }

  static PureState basis(PartyStructure structure, std::size_t index) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(structure.dim()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return from_amplitudes(std::move(structure), std::move(v));
  }

  static PureState basis(PartyStructure structure, std::string_view digits) {
    const std::size_t idx = structure.parse_basis(digits);
    return basis(std::move(structure), idx);
  }

  const PartyStructure& structure() const { return structure_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  int num_parties() const { return structure_.num_parties(); }
  std::size_t dim() const { return structure_.dim(); }

  PureState with_global_phase(double theta) const {
    PureState s = *this;
    s.amplitudes_ *= std::polar(1.0, theta);
    return s;
  }

private:
  PartyStructure structure_;
  Eigen::VectorXcd amplitudes_;
};

// <a|b>, conjugate-linear in a.
inline cplx inner_product(const PureState& a, const PureState& b) {
  if (!(a.structure() == b.structure())) throw Error("inner product of states with different structures");
  return a.amplitudes().dot(b.amplitudes());
}

// max over theta of Re<a|e^{i theta} b>, which is |<a|b>|.
inline double fidelity_up_to_phase(const PureState& a, const PureState& b) {
  return std::abs(inner_product(a, b));
}

inline bool equal_up_to_phase(const PureState& a, const PureState& b, double tol = 1e-10) {
  return fidelity_up_to_phase(a, b) >= 1.0 - tol;
}

// Independent standard complex Gaussians, then normalized: Haar distributed.
inline PureState sample_haar_state(const PartyStructure& structure, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(structure.dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = cplx(re, im);
  }
  return PureState::from_amplitudes(structure, std::move(v), true);
}

inline PureState sample_haar_state(const PartyStructure& structure, std::mt19937_64& rng) {
  return sample_haar_state(structure, rng());
}

// Reduced state of a set of parties; dense, big-endian over `parties`.
struct Marginal {
  Subset parties;
  Eigen::MatrixXcd matrix;

  // Throws if the matrix is not a density matrix within `tol`.
  void validate(double tol = kMarginalTol) const {
    if (matrix.rows() != matrix.cols()) throw Error("marginal matrix is not square");
    if ((matrix - matrix.adjoint()).norm() > tol) throw Error("marginal is not Hermitian");
    if (std::abs(matrix.trace() - cplx(1.0, 0.0)) > tol) throw Error("marginal trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().size() && es.eigenvalues().minCoeff() < -tol)
      throw Error("marginal has a negative eigenvalue");
  }
};

// ---------------------------------------------------------------------------
// JSON state files:
// {"num_parties": N, "local_dims": [...], "amplitudes": [{"basis": "...", "re": x, "im": y}],
//  "normalize": false}

inline PureState state_from_json(const nlohmann::json& j, double norm_tol = kDefaultNormTol,
                                 std::size_t dim_cap = kDefaultDimensionCap) {
  try {
    const int n = j.at("num_parties").get<int>();
    auto dims = j.at("local_dims").get<std::vector<int>>();
    if (n < 1 || static_cast<std::size_t>(n) != dims.size())
      throw Error("num_parties does not match local_dims length");
    PartyStructure structure(std::move(dims), dim_cap);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(structure.dim()));
    std::vector<char> seen(structure.dim(), 0);
    for (const auto& entry : j.at("amplitudes")) {
      const auto basis = entry.at("basis").get<std::string>();
      const std::size_t idx = structure.parse_basis(basis);
      if (seen[idx]) throw Error("duplicate basis entry '" + basis + "'");
      seen[idx] = 1;
      v(static_cast<Eigen::Index>(idx)) = cplx(entry.value("re", 0.0), entry.value("im", 0.0));
    }
    const bool normalize = j.value("normalize", false);
    return PureState::from_amplitudes(std::move(structure), std::move(v), normalize, norm_tol);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed state JSON: ") + e.what());
  }
}

inline nlohmann::json state_to_json(const PureState& s) {
  nlohmann::json amps = nlohmann::json::array();
  const auto& a = s.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) == cplx(0.0, 0.0)) continue;
    amps.push_back({{"basis", s.structure().basis_string(static_cast<std::size_t>(i))},
                    {"re", a(i).real()},
                    {"im", a(i).imag()}});
  }
  return {{"num_parties", s.num_parties()}, {"local_dims", s.structure().local_dims()}, {"amplitudes", amps}};
}

// Accepts either inline JSON text or a path to a JSON file.
inline PureState load_state(std::string_view path_or_text, double norm_tol = kDefaultNormTol) {
  std::string text(path_or_text);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') {
    std::ifstream in(text);
    if (!in) throw Error("cannot open state file '" + text + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed state JSON: ") + e.what());
  }
  return state_from_json(j, norm_tol);
}

inline void save_state(const PureState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write state file '" + path + "'");
  out << state_to_json(s).dump(2) << '\n';
}

} // namespace udp
