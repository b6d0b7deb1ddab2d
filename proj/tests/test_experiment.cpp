#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "udp/experiment.hpp"

using namespace udp;

namespace {

nlohmann::json without_runtime(nlohmann::json j) {
  j.erase("runtime_ms");
  return j;
}

} // namespace

TEST(Experiment, SmallSweepIsReproducible) {
  ExperimentConfig c;
  c.trials = 6;
  c.seed = 42;
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  EXPECT_EQ(without_runtime(nlohmann::json(a)), without_runtime(nlohmann::json(b)));
  EXPECT_EQ(a.certified, 6);
  EXPECT_EQ(a.counts.variables, 28);
  EXPECT_EQ(a.counts.complex_equations(), 33);
  EXPECT_EQ(a.predicted_equations, 33);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  ExperimentConfig c;
  c.n_parties = 4;
  c.blocks = balanced_blocks(4);
  c.trials = 8;
  const auto one = run_experiment(c);
  c.threads = 3;
  const auto three = run_experiment(c);
  auto ja = without_runtime(nlohmann::json(one)), jb = without_runtime(nlohmann::json(three));
  ja["config"].erase("threads");
  jb["config"].erase("threads");
  EXPECT_EQ(ja, jb);
}

TEST(Experiment, ReportJsonRoundTrip) {
  ExperimentConfig c;
  c.n_parties = 4;
  c.blocks = balanced_blocks(4);
  c.trials = 3;
  c.output_path = testing::TempDir() + "udp_report.json";
  const auto rep = run_experiment(c);
  std::ifstream in(c.output_path);
  const auto j = nlohmann::json::parse(in);
  const auto back = j.get<ExperimentReport>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.certified, rep.certified);
  std::remove(c.output_path.c_str());
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig c;
  c.trials = 0;
  EXPECT_THROW(run_experiment(c), Error);
  c.trials = 1;
  c.threads = 0;
  EXPECT_THROW(run_experiment(c), Error);
  c.threads = 1;
  c.tolerances.svd_tol = 0.5;
  EXPECT_THROW(run_experiment(c), Error);
  c.tolerances.svd_tol = kDefaultSvdTol;
  c.n_parties = 5;
  EXPECT_THROW(run_experiment(c), Error); // default blocks name a sixth party
}

TEST(Experiment, ConfigJsonDefaults) {
  const auto c = nlohmann::json::parse(R"({"n_parties": 8, "trials": 2})").get<ExperimentConfig>();
  EXPECT_EQ(c.blocks.to_string(), balanced_blocks(8).to_string());
  EXPECT_EQ(c.local_dim, 2);
  const auto back = nlohmann::json(c).get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
}

TEST(CountingTable, SixQubitRow) {
  const auto t = check_counting_table(3, 2);
  const auto it = std::find_if(t.rows.begin(), t.rows.end(),
                               [](const CountingRow& r) { return r.n == 3 && r.d == 2 && r.a == 2; });
  ASSERT_NE(it, t.rows.end());
  EXPECT_EQ(it->variables, 28);
  EXPECT_EQ(it->equations, 33);
  EXPECT_EQ(it->surplus, 5);
}

TEST(CountingTable, FourQubitSurplusIsZeroAndFlagged) {
  const auto t = check_counting_table(2, 2);
  ASSERT_EQ(t.summaries.size(), 1u);
  EXPECT_EQ(t.summaries[0].min_surplus, 0);
  EXPECT_EQ(t.summaries[0].closed_form, 0);
  EXPECT_FALSE(t.summaries[0].positive);
  ASSERT_EQ(t.flagged().size(), 1u);
  const auto j = counting_table_to_json(t);
  EXPECT_EQ(j.at("flagged").size(), 1u);
}

// Closed form against a direct sum over every split, and the equation count
// against an independent tally of kept block entries.
TEST(CountingTable, ClosedFormMatchesDirectCount) {
  for (int n = 2; n <= 6; ++n)
    for (std::int64_t d = 2; d <= 4; ++d) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (int a = 1; a < n; ++a) {
        const std::int64_t da = ipow(d, a), db = ipow(d, n - a);
        std::int64_t eqs = 0;
        for (std::int64_t x = 0; x < da; ++x)
          for (std::int64_t y = x + 1; y < da; ++y) eqs += db * db - 1;
        for (std::int64_t x = 0; x < db; ++x)
          for (std::int64_t y = x + 1; y < db; ++y) eqs += da * da - 1;
        const std::int64_t r = ipow(d, n);
        best = std::min(best, eqs - r * (r - 1) / 2);
      }
      EXPECT_EQ(worst_case_surplus_closed_form(n, d), best) << "n=" << n << " d=" << d;
    }
}

TEST(CountingTable, FullGridSummaries) {
  const auto t = check_counting_table(6, 4);
  EXPECT_EQ(t.summaries.size(), 15u);
  for (const auto& s : t.summaries) {
    EXPECT_TRUE(s.closed_form_matches) << s.n << "," << s.d;
    EXPECT_TRUE(s.argmin_at_ends) << s.n << "," << s.d;
    EXPECT_EQ(s.positive, !(s.n == 2 && s.d == 2)) << s.n << "," << s.d;
  }
  EXPECT_EQ(t.flagged().size(), 1u);
  EXPECT_THROW(check_counting_table(1, 2), Error);
}
