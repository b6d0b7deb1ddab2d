#pragma once

// Orthogonal arrays, packing arrays and the superposition states built from
// their rows.
//
// If every k-tuple appears at most once in every k columns (index-1 OA or a
// packing array) and k <= N/2, every (N-k)-body marginal of
// sum_i a_i |row_i> is diagonal with entries |a_i|^2, so any relative phases
// on the a_i give a different state with the same complete (N-k)-deck.

#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <variant>

#include "udp/marginal.hpp"

namespace udp {

inline constexpr double kDefaultAmpFloor = 1e-12;

using ArrayRows = std::vector<std::vector<int>>;

namespace detail {

inline int column_count(const ArrayRows& rows) { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }

inline void check_entries(const ArrayRows& rows, int levels, int strength) {
  if (levels < 2) throw Error("arrays need at least 2 levels");
  const int n = column_count(rows);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n) throw Error("array rows have different lengths");
    for (int x : row)
      if (x < 0 || x >= levels)
        throw Error("array entry " + std::to_string(x) + " outside 0.." + std::to_string(levels - 1));
  }
  if (strength < 1) throw Error("strength must be at least 1");
  if (strength > n) throw Error("strength " + std::to_string(strength) + " exceeds column count " + std::to_string(n));
}

// Calls f(cols) for every size-k column subset, ascending.
template <class F>
void for_each_column_subset(int n, int k, F&& f) {
  std::vector<int> cols(static_cast<std::size_t>(k));
  std::iota(cols.begin(), cols.end(), 0);
  while (true) {
    f(std::as_const(cols));
    int i = k - 1;
    while (i >= 0 && cols[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++cols[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) cols[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline std::size_t tuple_code(const std::vector<int>& row, const std::vector<int>& cols, int levels) {
  std::size_t code = 0;
  for (int c : cols) code = code * static_cast<std::size_t>(levels) + static_cast<std::size_t>(row[static_cast<std::size_t>(c)]);
  return code;
}

inline bool distinct_on_all_subsets(const ArrayRows& rows, int width) {
  const int n = column_count(rows);
  if (width == 0) return rows.size() <= 1;
  bool ok = true;
  for_each_column_subset(n, width, [&](const std::vector<int>& cols) {
    if (!ok) return;
    std::set<std::vector<int>> seen;
    for (const auto& row : rows) {
      std::vector<int> t;
      t.reserve(cols.size());
      for (int c : cols) t.push_back(row[static_cast<std::size_t>(c)]);
      if (!seen.insert(std::move(t)).second) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

} // namespace detail

struct OaCheck {
  bool is_oa = false;
  std::optional<int> lambda;
  bool irredundant = false;
};

// Exhaustive tuple counting over every k-column subarray; irredundancy over
// every (N-k)-column subarray.
inline OaCheck verify_oa(const ArrayRows& rows, int levels, int strength) {
  detail::check_entries(rows, levels, strength);
  const int n = detail::column_count(rows);
  OaCheck out;
  out.irredundant = detail::distinct_on_all_subsets(rows, n - strength);

  std::size_t cells = 1;
  for (int i = 0; i < strength; ++i) cells *= static_cast<std::size_t>(levels);
  if (rows.empty() || rows.size() % cells != 0) return out;
  const int lambda = static_cast<int>(rows.size() / cells);
  bool ok = true;
  detail::for_each_column_subset(n, strength, [&](const std::vector<int>& cols) {
    if (!ok) return;
    std::vector<int> hist(cells, 0);
    for (const auto& row : rows) ++hist[detail::tuple_code(row, cols, levels)];
    ok = std::all_of(hist.begin(), hist.end(), [&](int h) { return h == lambda; });
  });
  out.is_oa = ok;
  if (ok) out.lambda = lambda;
  return out;
}

// Every k-column subarray has pairwise distinct rows.
inline bool verify_pa(const ArrayRows& rows, int levels, int strength) {
  detail::check_entries(rows, levels, strength);
  return detail::distinct_on_all_subsets(rows, strength);
}

// Shared row data of OA and PA.
struct RowArray {
  ArrayRows rows;
  int levels = 2;
  int strength = 1;

  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_columns() const { return detail::column_count(rows); }
};

class OrthogonalArray {
public:
  // Verifies the OA property unless told not to; index_lambda is computed.
  static OrthogonalArray make(ArrayRows rows, int levels, int strength, bool verify = true) {
    OrthogonalArray oa;
    oa.data_ = {std::move(rows), levels, strength};
    if (verify) {
      const OaCheck c = verify_oa(oa.data_.rows, levels, strength);
      if (!c.is_oa) throw Error("rows do not form an orthogonal array of strength " + std::to_string(strength));
      oa.lambda_ = *c.lambda;
      oa.irredundant_ = c.irredundant;
    } else {
      detail::check_entries(oa.data_.rows, levels, strength);
      std::size_t cells = 1;
      for (int i = 0; i < strength; ++i) cells *= static_cast<std::size_t>(levels);
      oa.lambda_ = static_cast<int>(oa.data_.rows.size() / cells);
    }
    return oa;
  }

  const RowArray& data() const { return data_; }
  int index_lambda() const { return lambda_; }
  bool irredundant() const { return irredundant_; }

private:
  RowArray data_;
  int lambda_ = 0;
  bool irredundant_ = false;
};

class PackingArray {
public:
  static PackingArray make(ArrayRows rows, int levels, int strength, bool verify = true) {
    PackingArray pa;
    pa.data_ = {std::move(rows), levels, strength};
    detail::check_entries(pa.data_.rows, levels, strength);
    if (pa.data_.rows.size() < 2) throw Error("a packing array needs at least 2 rows");
    if (verify && !verify_pa(pa.data_.rows, levels, strength))
      throw Error("rows repeat a " + std::to_string(strength) + "-tuple within some column subset");
    return pa;
  }

  const RowArray& data() const { return data_; }

private:
  RowArray data_;
};

using CombinatorialArray = std::variant<OrthogonalArray, PackingArray>;

inline const RowArray& row_data(const CombinatorialArray& a) {
  return std::visit([](const auto& x) -> const RowArray& { return x.data(); }, a);
}

// Greedy packing array: candidate rows in seeded random order, kept when no
// k-tuple collides. Returns fewer than `target_rows` rows if it gets stuck.
inline PackingArray greedy_packing_array(int num_columns, int levels, int strength, int target_rows,
                                         std::uint64_t seed) {
  std::size_t total = 1;
  for (int i = 0; i < num_columns; ++i) total *= static_cast<std::size_t>(levels);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<int>> subsets;
  detail::for_each_column_subset(num_columns, strength, [&](const std::vector<int>& c) { subsets.push_back(c); });
  std::vector<std::set<std::size_t>> used(subsets.size());

  ArrayRows rows;
  for (std::size_t code : order) {
    if (static_cast<int>(rows.size()) >= target_rows) break;
    std::vector<int> row(static_cast<std::size_t>(num_columns));
    for (int c = num_columns; c-- > 0;) {
      row[static_cast<std::size_t>(c)] = static_cast<int>(code % static_cast<std::size_t>(levels));
      code /= static_cast<std::size_t>(levels);
    }
    bool fits = true;
    for (std::size_t s = 0; s < subsets.size() && fits; ++s)
      fits = !used[s].count(detail::tuple_code(row, subsets[s], levels));
    if (!fits) continue;
    for (std::size_t s = 0; s < subsets.size(); ++s) used[s].insert(detail::tuple_code(row, subsets[s], levels));
    rows.push_back(std::move(row));
  }
  return PackingArray::make(std::move(rows), levels, strength);
}

// ---------------------------------------------------------------------------
// Text format:
//   OA r N d k            (or PA r N d k)
//   0000                  one row per line, contiguous digits (d <= 10)
//   1 0 2 1               or whitespace-separated integers

inline CombinatorialArray parse_array(const std::string& text, bool verify = true) {
  std::stringstream in(text);
  std::string line;
  std::string kind;
  int r = 0, n = 0, d = 0, k = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#') continue;
    std::stringstream hdr(line);
    if (!(hdr >> kind >> r >> n >> d >> k) || (kind != "OA" && kind != "PA"))
      throw Error("array header must read 'OA r N d k' or 'PA r N d k'");
    break;
  }
  if (kind.empty()) throw Error("array text has no header");
  ArrayRows rows;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    std::vector<std::string> tokens;
    {
      std::stringstream items(line);
      std::string t;
      while (items >> t) tokens.push_back(t);
    }
    std::vector<int> row;
    const bool contiguous = tokens.size() == 1 && n > 1;
    for (const auto& t : tokens) {
      if (contiguous) {
        for (char c : t) {
          if (c < '0' || c > '9') throw Error("bad array row '" + line + "'");
          row.push_back(c - '0');
        }
        continue;
      }
      if (t.find_first_not_of("0123456789") != std::string::npos) throw Error("bad array row '" + line + "'");
      row.push_back(std::stoi(t));
    }
    if (static_cast<int>(row.size()) != n)
      throw Error("array row has " + std::to_string(row.size()) + " entries, header says " + std::to_string(n));
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != r)
    throw Error("array has " + std::to_string(rows.size()) + " rows, header says " + std::to_string(r));
  if (kind == "OA") return OrthogonalArray::make(std::move(rows), d, k, verify);
  return PackingArray::make(std::move(rows), d, k, verify);
}

inline CombinatorialArray load_array(const std::string& path, bool verify = true) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open array file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_array(buf.str(), verify);
}

inline std::string format_array(const CombinatorialArray& a) {
  const RowArray& d = row_data(a);
  std::string out = std::holds_alternative<OrthogonalArray>(a) ? "OA " : "PA ";
  out += std::to_string(d.num_rows()) + ' ' + std::to_string(d.num_columns()) + ' ' + std::to_string(d.levels) +
         ' ' + std::to_string(d.strength) + '\n';
  for (const auto& row : d.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (d.levels > 10 && c) out += ' ';
      out += d.levels > 10 ? std::to_string(row[c]) : std::string(1, static_cast<char>('0' + row[c]));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// States

struct GeneralizedQoaState {
  CombinatorialArray array;
  Eigen::VectorXcd amplitudes; // normalized, one per row
  PureState state;
};

inline GeneralizedQoaState qoa_state(const CombinatorialArray& array,
                                     std::optional<Eigen::VectorXcd> amplitudes = std::nullopt,
                                     double amp_floor = kDefaultAmpFloor) {
  const RowArray& d = row_data(array);
  const auto r = static_cast<Eigen::Index>(d.num_rows());
  Eigen::VectorXcd a = amplitudes ? *amplitudes : Eigen::VectorXcd::Constant(r, cplx(1.0, 0.0));
  if (a.size() != r)
    throw Error("amplitude count " + std::to_string(a.size()) + " does not match " + std::to_string(r) + " rows");
  a /= a.norm();
  for (Eigen::Index i = 0; i < r; ++i)
    if (!(std::abs(a(i)) > amp_floor)) throw Error("amplitude " + std::to_string(i + 1) + " is zero");

  const PartyStructure s = PartyStructure::uniform(d.num_columns(), d.levels);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.dim()));
  for (Eigen::Index i = 0; i < r; ++i) {
    const std::size_t idx = s.index(d.rows[static_cast<std::size_t>(i)]);
    if (v(static_cast<Eigen::Index>(idx)) != cplx(0.0, 0.0)) throw Error("array has repeated rows");
    v(static_cast<Eigen::Index>(idx)) = a(i);
  }
  return {array, a, PureState::from_amplitudes(s, std::move(v), true)};
}

struct WitnessResult {
  PureState witness;
  bool verified = false;
  double deck_distance = 0.0;
  double fidelity = 1.0;
};

inline WitnessResult non_udp_witness(const GeneralizedQoaState& g, const std::vector<double>& phases,
                                     double deck_tol = kDefaultDeckTol, bool allow_large_strength = false,
                                     double distinct_tol = 1e-6) {
  const RowArray& d = row_data(g.array);
  const int n = d.num_columns(), k = d.strength;
  if (!allow_large_strength && k > n / 2)
    throw Error("strength " + std::to_string(k) + " exceeds floor(N/2) = " + std::to_string(n / 2));
  if (static_cast<Eigen::Index>(phases.size()) != g.amplitudes.size())
    throw Error("phase count does not match row count");
  if (std::all_of(phases.begin(), phases.end(), [&](double p) { return std::abs(std::remainder(p - phases[0], 2 * std::numbers::pi)) < 1e-15; }))
    throw Error("all phases equal: the witness would be the same state");

  const PartyStructure& s = g.state.structure();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.dim()));
  for (Eigen::Index i = 0; i < g.amplitudes.size(); ++i)
    v(static_cast<Eigen::Index>(s.index(d.rows[static_cast<std::size_t>(i)]))) =
        g.amplitudes(i) * std::polar(1.0, phases[static_cast<std::size_t>(i)]);
  WitnessResult out{PureState::from_amplitudes(s, std::move(v), true)};
  const MarginalFamily family = MarginalFamily::complete(n, n - k);
  out.deck_distance = deck_distance(g.state, out.witness, family);
  out.fidelity = fidelity_up_to_phase(g.state, out.witness);
  out.verified = out.deck_distance <= deck_tol && out.fidelity < 1.0 - distinct_tol;
  return out;
}

// Flip the sign of row `row` (1-based).
inline WitnessResult non_udp_witness(const GeneralizedQoaState& g, int row, double deck_tol = kDefaultDeckTol,
                                     bool allow_large_strength = false) {
  if (row < 1 || row > g.amplitudes.size()) throw Error("row index " + std::to_string(row) + " out of range");
  std::vector<double> phases(static_cast<std::size_t>(g.amplitudes.size()), 0.0);
  phases[static_cast<std::size_t>(row - 1)] = std::numbers::pi;
  return non_udp_witness(g, phases, deck_tol, allow_large_strength);
}

} // namespace udp
