#pragma once

// Seeded batch certification of Haar-random states and the equation-counting
// table for balanced-vs-unbalanced cross cuts.

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "udp/certifier.hpp"

namespace udp {

struct Tolerances {
  double norm_tol = kDefaultNormTol;
  double gap_tol = kDefaultGapTol;
  double svd_tol = kDefaultSvdTol;
  double deck_tol = kDefaultDeckTol;
};

struct ExperimentConfig {
  int n_parties = 6;
  int local_dim = 2;
  int trials = 100;
  std::uint64_t seed = 1;
  CrossCutSpec blocks = contiguous_blocks(2, 1, 1, 2);
  Tolerances tolerances;
  std::string output_path;
  int threads = 1;

  void validate() const {
    if (trials < 1) throw Error("trials must be at least 1");
    if (threads < 1) throw Error("threads must be at least 1");
    for (double t : {tolerances.norm_tol, tolerances.gap_tol, tolerances.svd_tol, tolerances.deck_tol})
      if (!(t > 0.0 && t < 1e-2)) throw Error("tolerances must lie in (0, 1e-2)");
    const PartyStructure s = PartyStructure::uniform(n_parties, local_dim);
    (void)blocks.canonical(s);
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"n_parties", c.n_parties},
       {"local_dim", c.local_dim},
       {"trials", c.trials},
       {"seed", c.seed},
       {"blocks", c.blocks.to_string()},
       {"tolerances",
        {{"norm_tol", c.tolerances.norm_tol},
         {"gap_tol", c.tolerances.gap_tol},
         {"svd_tol", c.tolerances.svd_tol},
         {"deck_tol", c.tolerances.deck_tol}}},
       {"output_path", c.output_path},
       {"threads", c.threads}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ExperimentConfig def;
  c.n_parties = j.value("n_parties", def.n_parties);
  c.local_dim = j.value("local_dim", def.local_dim);
  c.trials = j.value("trials", def.trials);
  c.seed = j.value("seed", def.seed);
  c.blocks = j.contains("blocks") ? parse_blocks(j.at("blocks").get<std::string>()) : balanced_blocks(c.n_parties);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    c.tolerances.norm_tol = t.value("norm_tol", def.tolerances.norm_tol);
    c.tolerances.gap_tol = t.value("gap_tol", def.tolerances.gap_tol);
    c.tolerances.svd_tol = t.value("svd_tol", def.tolerances.svd_tol);
    c.tolerances.deck_tol = t.value("deck_tol", def.tolerances.deck_tol);
  }
  c.output_path = j.value("output_path", std::string());
  c.threads = j.value("threads", 1);
}

namespace detail {

// Non-finite values are written as null.
inline nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

inline double number_or_inf(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

} // namespace detail

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  UdpStatus status = UdpStatus::inconclusive;
  Eigen::Index null_dim = 0;
  double min_gap = 0.0;
  double min_relative_singular = 0.0;
  bool full_rank = false;
  bool distinct_spectrum = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  int certified = 0, witnessed = 0, inconclusive = 0;
  double min_spectral_gap = 0.0;
  double mean_spectral_gap = 0.0;
  double min_relative_singular = 0.0; // smallest over trials
  EquationCounts counts;
  std::int64_t predicted_equations = 0;
  double runtime_ms = 0.0; // the only non-reproducible field
};

inline UdpStatus status_from_string(const std::string& s) {
  if (s == "CERTIFIED_UDP") return UdpStatus::certified_udp;
  if (s == "NOT_UDP_WITNESSED") return UdpStatus::not_udp_witnessed;
  if (s == "INCONCLUSIVE") return UdpStatus::inconclusive;
  throw Error("unknown verdict status '" + s + "'");
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"index", t.index},
                      {"seed", t.seed},
                      {"status", to_string(t.status)},
                      {"null_dim", t.null_dim},
                      {"min_gap", detail::finite_or_null(t.min_gap)},
                      {"min_relative_singular", t.min_relative_singular},
                      {"full_rank", t.full_rank},
                      {"distinct_spectrum", t.distinct_spectrum}});
  j = {{"config", r.config},
       {"trials", r.config.trials},
       {"certified", r.certified},
       {"witnessed", r.witnessed},
       {"inconclusive", r.inconclusive},
       {"min_spectral_gap", detail::finite_or_null(r.min_spectral_gap)},
       {"mean_spectral_gap", detail::finite_or_null(r.mean_spectral_gap)},
       {"min_relative_singular", r.min_relative_singular},
       {"variables", r.counts.variables},
       {"complex_equations", r.counts.complex_equations()},
       {"qp_equations", r.counts.qp_equations},
       {"lm_equations", r.counts.lm_equations},
       {"predicted_equations", r.predicted_equations},
       {"per_trial", std::move(trials)},
       {"runtime_ms", r.runtime_ms}};
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  r.config = j.at("config").get<ExperimentConfig>();
  r.certified = j.at("certified");
  r.witnessed = j.at("witnessed");
  r.inconclusive = j.at("inconclusive");
  r.min_spectral_gap = detail::number_or_inf(j.at("min_spectral_gap"));
  r.mean_spectral_gap = detail::number_or_inf(j.at("mean_spectral_gap"));
  r.min_relative_singular = j.at("min_relative_singular");
  r.counts.variables = j.at("variables");
  r.counts.qp_equations = j.at("qp_equations");
  r.counts.lm_equations = j.at("lm_equations");
  r.predicted_equations = j.at("predicted_equations");
  r.runtime_ms = j.at("runtime_ms");
  r.trials.clear();
  for (const auto& t : j.at("per_trial"))
    r.trials.push_back({t.at("index"), t.at("seed"), status_from_string(t.at("status")), t.at("null_dim"),
                        detail::number_or_inf(t.at("min_gap")), t.at("min_relative_singular"), t.at("full_rank"),
                        t.at("distinct_spectrum")});
}

// Trial i certifies the Haar state drawn with seed config.seed + i.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const PartyStructure s = PartyStructure::uniform(config.n_parties, config.local_dim);
  const CrossCutSpec spec = config.blocks.canonical(s);
  CertifyOptions opt;
  opt.svd_tol = config.tolerances.svd_tol;
  opt.gap_tol = config.tolerances.gap_tol;
  opt.deck_tol = config.tolerances.deck_tol;

  ExperimentReport rep;
  rep.config = config;
  rep.trials.resize(static_cast<std::size_t>(config.trials));
  std::vector<EquationCounts> counts(static_cast<std::size_t>(config.trials));

  std::atomic<int> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next++; i < config.trials; i = next++) try {
      const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
      const UdpVerdict v = certify_udp(sample_haar_state(s, seed), spec, opt);
      rep.trials[static_cast<std::size_t>(i)] = {i,
                                                 seed,
                                                 v.status,
                                                 v.null_dim,
                                                 v.genericity.min_gap,
                                                 v.min_relative_singular,
                                                 v.genericity.full_rank,
                                                 v.genericity.distinct_spectrum};
      counts[static_cast<std::size_t>(i)] = v.equation_counts;
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < config.threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  rep.min_spectral_gap = std::numeric_limits<double>::infinity();
  rep.min_relative_singular = std::numeric_limits<double>::infinity();
  double gap_sum = 0.0;
  for (const auto& t : rep.trials) {
    switch (t.status) {
    case UdpStatus::certified_udp: ++rep.certified; break;
    case UdpStatus::not_udp_witnessed: ++rep.witnessed; break;
    case UdpStatus::inconclusive: ++rep.inconclusive; break;
    }
    rep.min_spectral_gap = std::min(rep.min_spectral_gap, t.min_gap);
    rep.min_relative_singular = std::min(rep.min_relative_singular, t.min_relative_singular);
    gap_sum += t.min_gap;
  }
  rep.mean_spectral_gap = gap_sum / config.trials;
  rep.counts = counts.front();
  rep.predicted_equations = predicted_equation_count(
      static_cast<std::int64_t>(s.dim_of(spec.A)), static_cast<std::int64_t>(s.dim_of(spec.B)),
      static_cast<std::int64_t>(s.dim_of(spec.C)), static_cast<std::int64_t>(s.dim_of(spec.D)));
  rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (!config.output_path.empty()) {
    std::ofstream out(config.output_path);
    if (!out) throw Error("cannot write report to '" + config.output_path + "'");
    out << nlohmann::json(rep).dump(2) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Counting table

struct CountingRow {
  int n = 0;             // half the number of parties
  int d = 0;
  int a = 0;             // |A|; |B| = |C| = n - a, |D| = a
  std::int64_t variables = 0;
  std::int64_t equations = 0;
  std::int64_t surplus = 0;
};

struct CountingSummary {
  int n = 0, d = 0;
  std::int64_t min_surplus = 0;
  std::vector<int> argmin;          // all |A| attaining the minimum
  std::int64_t closed_form = 0;     // closed-form worst-case surplus
  bool closed_form_matches = false; // closed_form == min_surplus
  bool argmin_at_ends = false;      // every minimizer is 1 or n-1
  bool positive = false;            // min_surplus > 0; false rows are flagged, not dropped
};

struct CountingTable {
  std::vector<CountingRow> rows;
  std::vector<CountingSummary> summaries;

  std::vector<CountingSummary> flagged() const {
    std::vector<CountingSummary> out;
    for (const auto& s : summaries)
      if (!s.positive || !s.closed_form_matches || !s.argmin_at_ends) out.push_back(s);
    return out;
  }
};

inline CountingTable check_counting_table(int max_n, int max_d) {
  if (max_n < 2 || max_d < 2) throw Error("counting table needs max_n >= 2 and max_d >= 2");
  CountingTable table;
  for (int n = 2; n <= max_n; ++n)
    for (int d = 2; d <= max_d; ++d) {
      const std::int64_t r = ipow(d, n);
      CountingSummary sum{n, d};
      sum.min_surplus = std::numeric_limits<std::int64_t>::max();
      for (int a = 1; a <= n - 1; ++a) {
        CountingRow row{n, d, a, gamma_variable_count(r), 0, 0};
        row.equations = predicted_equation_count(ipow(d, a), ipow(d, n - a), ipow(d, n - a), ipow(d, a));
        row.surplus = row.equations - row.variables;
        if (row.surplus < sum.min_surplus) {
          sum.min_surplus = row.surplus;
          sum.argmin.clear();
        }
        if (row.surplus == sum.min_surplus) sum.argmin.push_back(a);
        table.rows.push_back(row);
      }
      sum.closed_form = worst_case_surplus_closed_form(n, d);
      sum.closed_form_matches = sum.closed_form == sum.min_surplus;
      sum.argmin_at_ends =
          std::all_of(sum.argmin.begin(), sum.argmin.end(), [&](int a) { return a == 1 || a == n - 1; });
      sum.positive = sum.min_surplus > 0;
      table.summaries.push_back(sum);
    }
  return table;
}

inline nlohmann::json counting_table_to_json(const CountingTable& t) {
  nlohmann::json rows = nlohmann::json::array(), sums = nlohmann::json::array(), flags = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"n", r.n}, {"N", 2 * r.n}, {"d", r.d}, {"A", r.a}, {"variables", r.variables},
                    {"equations", r.equations}, {"surplus", r.surplus}});
  auto summary_json = [](const CountingSummary& s) {
    return nlohmann::json{{"n", s.n},
                          {"N", 2 * s.n},
                          {"d", s.d},
                          {"min_surplus", s.min_surplus},
                          {"argmin_A", s.argmin},
                          {"closed_form_surplus", s.closed_form},
                          {"closed_form_matches", s.closed_form_matches},
                          {"argmin_at_ends", s.argmin_at_ends},
                          {"positive", s.positive}};
  };
  for (const auto& s : t.summaries) sums.push_back(summary_json(s));
  for (const auto& s : t.flagged()) flags.push_back(summary_json(s));
  return {{"rows", rows}, {"summaries", sums}, {"flagged", flags}};
}

} // namespace udp
