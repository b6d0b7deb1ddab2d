#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "udp/certifier.hpp"

using namespace udp;

namespace {

PureState ghz(int n) {
  const auto s = PartyStructure::uniform(n, 2);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.dim()));
  v(0) = 0.6;
  v(v.size() - 1) = 0.8;
  return PureState::from_amplitudes(s, v);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

} // namespace

TEST(CrossCutSpec, BalancedBlocks) {
  EXPECT_EQ(balanced_blocks(6).to_string(), "A=1,2;B=3;C=4;D=5,6");
  EXPECT_EQ(balanced_blocks(4).to_string(), "A=1;B=2;C=3;D=4");
  EXPECT_EQ(balanced_blocks(8).to_string(), "A=1,2;B=3,4;C=5,6;D=7,8");
}

TEST(CrossCutSpec, ParsingAndValidation) {
  const auto s = PartyStructure::uniform(6, 2);
  const auto spec = parse_blocks("A=1,2; B=3; C=4; D=5,6");
  EXPECT_EQ(spec.canonical(s).to_string(), balanced_blocks(6).to_string());
  EXPECT_THROW(parse_blocks("A=1;B=2;C=3"), UsageError);
  EXPECT_THROW(parse_blocks("A=1;B=2;C=3;E=4"), UsageError);
  EXPECT_THROW(parse_blocks("A=1;A=2;C=3;D=4"), UsageError);
  EXPECT_THROW(parse_blocks("A=x;B=2;C=3;D=4"), UsageError);
  EXPECT_THROW(parse_blocks("A=1;B=2;C=3;D=4").canonical(PartyStructure::uniform(5, 2)), Error);
  EXPECT_THROW(parse_blocks("A=1,2;B=2;C=3;D=4").canonical(PartyStructure::uniform(4, 2)), Error);
  EXPECT_THROW(parse_blocks("A=;B=;C=1,2;D=3,4").canonical(PartyStructure::uniform(4, 2)), Error);
  EXPECT_NO_THROW(parse_blocks("A=;B=1;C=2,3;D=").canonical(PartyStructure::uniform(3, 2)));
}

TEST(CrossMatrices, ShapesForSixQubits) {
  const auto psi = sample_haar_state(PartyStructure::uniform(6, 2), 1);
  const auto spec = balanced_blocks(6);
  const auto dec = schmidt_decompose(psi, Bipartition{spec.AB(), spec.CD()});
  const auto cm = build_cross_matrices(dec, spec);
  EXPECT_EQ(cm.rank, 8);
  EXPECT_EQ(cm.q(0, 1).rows(), 4);
  EXPECT_EQ(cm.l(0, 1).rows(), 2);
  EXPECT_EQ(cm.p(0, 1).rows(), 2);
  EXPECT_EQ(cm.m(0, 1).rows(), 4);
  EXPECT_THROW(build_cross_matrices(schmidt_decompose(psi, Subset{1, 2}), spec), Error);
}

// Tr Q_ij = Tr L_ij = delta_ij (same for P, M), and Q_ji = Q_ij^dagger.
TEST(CrossMatrices, TraceAndAdjointIdentities) {
  const auto s = PartyStructure({2, 3, 2, 2, 2});
  const auto spec = parse_blocks("A=1;B=2;C=3,4;D=5");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto dec = schmidt_decompose(sample_haar_state(s, seed), Bipartition{spec.AB(), spec.CD()});
    const auto cm = build_cross_matrices(dec, spec);
    for (int i = 0; i < cm.rank; ++i)
      for (int j = 0; j < cm.rank; ++j) {
        const double delta = i == j ? 1.0 : 0.0;
        for (const auto* m : {&cm.q(i, j), &cm.l(i, j), &cm.p(i, j), &cm.m(i, j)})
          EXPECT_LE(std::abs(m->trace() - delta), 1e-12);
        EXPECT_LE((cm.q(j, i) - cm.q(i, j).adjoint()).norm(), 1e-13);
        EXPECT_LE((cm.m(j, i) - cm.m(i, j).adjoint()).norm(), 1e-13);
      }
  }
}

// rho_AC = sum_ij c_i c_j Q_ij (x) P_ij against a brute-force partial trace.
TEST(CrossMatrices, ReassembleSecondaryMarginals) {
  const auto s = PartyStructure::uniform(6, 2);
  const auto spec = balanced_blocks(6);
  const auto psi = sample_haar_state(s, 12);
  const auto dec = schmidt_decompose(psi, Bipartition{spec.AB(), spec.CD()});
  const auto cm = build_cross_matrices(dec, spec);
  Eigen::MatrixXcd ac = Eigen::MatrixXcd::Zero(8, 8), bd = Eigen::MatrixXcd::Zero(8, 8);
  for (int i = 0; i < cm.rank; ++i)
    for (int j = 0; j < cm.rank; ++j) {
      const double w = dec.coefficients(i) * dec.coefficients(j);
      ac += w * kron(cm.q(i, j), cm.p(i, j));
      bd += w * kron(cm.l(i, j), cm.m(i, j));
    }
  EXPECT_LE((ac - oracle::partial_trace(psi.amplitudes(), s.local_dims(), spec.AC())).norm(), 1e-12);
  EXPECT_LE((bd - oracle::partial_trace(psi.amplitudes(), s.local_dims(), spec.BD())).norm(), 1e-12);
}

TEST(GammaSystem, SixQubitCounts) {
  const auto psi = sample_haar_state(PartyStructure::uniform(6, 2), 2);
  const auto spec = balanced_blocks(6);
  const auto dec = schmidt_decompose(psi, Bipartition{spec.AB(), spec.CD()});
  const auto sys = assemble_gamma_system(build_cross_matrices(dec, spec));
  EXPECT_EQ(sys.counts.variables, 28);
  EXPECT_EQ(sys.counts.complex_equations(), 33);
  EXPECT_EQ(sys.matrix.rows(), 66);
  EXPECT_EQ(sys.matrix.cols(), 56);
  EXPECT_EQ(predicted_equation_count(4, 2, 2, 4), 33);
}

TEST(GammaSystem, CountsMatchFormulaOnMixedShapes) {
  const std::vector<std::pair<std::vector<int>, std::string>> cases{
      {{2, 2, 2, 2}, "A=1;B=2;C=3;D=4"},
      {{3, 3, 3, 3}, "A=1;B=2;C=3;D=4"},
      {{2, 3, 2, 2, 2}, "A=1;B=2;C=3,4;D=5"},
      {{2, 2, 3, 2, 2}, "A=1,2;B=;C=3;D=4,5"},
      {{2, 2, 2, 2, 2, 2, 2, 2}, "A=1,2;B=3,4;C=5,6;D=7,8"}};
  for (const auto& [dims, blocks] : cases) {
    const PartyStructure s(dims);
    const auto spec = parse_blocks(blocks).canonical(s);
    const auto dec = schmidt_decompose(sample_haar_state(s, 3), Bipartition{spec.AB(), spec.CD()});
    const auto sys = assemble_gamma_system(build_cross_matrices(dec, spec));
    const auto d = [&](const Subset& b) { return static_cast<std::int64_t>(s.dim_of(b)); };
    EXPECT_EQ(sys.counts.complex_equations(), predicted_equation_count(d(spec.A), d(spec.B), d(spec.C), d(spec.D)))
        << blocks;
    EXPECT_EQ(sys.counts.variables, gamma_variable_count(dec.rank())) << blocks;
  }
}

// Each complex equation equals an entry of rho_AC(psi) - rho_AC(psi') or of
// rho_BD(psi) - rho_BD(psi') for the phase-twisted psi'.
TEST(GammaSystem, EquationsAreSecondaryMarginalDifferences) {
  const auto s = PartyStructure::uniform(4, 2);
  const auto spec = balanced_blocks(4);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (int t = 0; t < 10; ++t) {
    const auto psi = sample_haar_state(s, rng());
    const auto dec = schmidt_decompose(psi, Bipartition{spec.AB(), spec.CD()});
    const auto sys = assemble_gamma_system(build_cross_matrices(dec, spec));
    std::vector<double> phi(static_cast<std::size_t>(dec.rank()));
    for (auto& p : phi) p = ang(rng);
    const auto twisted = phase_twist(dec, phi);
    const auto diff = [&](const Subset& keep) {
      return (oracle::partial_trace(psi.amplitudes(), s.local_dims(), keep) -
              oracle::partial_trace(twisted.amplitudes(), s.local_dims(), keep))
          .eval();
    };
    const Eigen::MatrixXcd dac = diff(spec.AC()), dbd = diff(spec.BD());

    // expected values in harvest order: (a<b, c, e) without the last diagonal entry
    std::vector<cplx> expected;
    for (const auto* dm : {&dac, &dbd})
      for (int a = 0; a < 2; ++a)
        for (int b = a + 1; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int e = 0; e < 2; ++e)
              if (!(c == 1 && e == 1)) expected.push_back((*dm)(a * 2 + c, b * 2 + e));
    ASSERT_EQ(static_cast<Eigen::Index>(expected.size()), sys.coef.rows());

    const auto m = static_cast<Eigen::Index>(sys.pairs.size());
    const Eigen::VectorXd x = gamma_from_phases(sys, dec.coefficients, phi);
    Eigen::VectorXcd g(m);
    for (Eigen::Index k = 0; k < m; ++k) g(k) = cplx(x(k), x(m + k));
    const Eigen::VectorXcd values = sys.coef * g + sys.conj_coef * g.conjugate();
    const Eigen::VectorXd real_values = sys.matrix * x;
    for (std::size_t e = 0; e < expected.size(); ++e) {
      const auto ei = static_cast<Eigen::Index>(e);
      EXPECT_LE(std::abs(values(ei) - expected[e]), 1e-12);
      EXPECT_NEAR(real_values(2 * ei), expected[e].real(), 1e-12);
      EXPECT_NEAR(real_values(2 * ei + 1), expected[e].imag(), 1e-12);
    }
  }
}

TEST(NullSpace, ZeroRowSystemIsFullyFree) {
  GammaSystem sys;
  sys.matrix.resize(0, 6);
  const auto ns = decide_null_space(sys);
  EXPECT_EQ(ns.null_dim, 6);
  EXPECT_EQ(ns.basis.cols(), 6);
}

TEST(NullSpace, WideSystemCountsMissingSingularValues) {
  GammaSystem sys;
  sys.matrix = Eigen::MatrixXd::Identity(2, 4);
  const auto ns = decide_null_space(sys);
  EXPECT_EQ(ns.null_dim, 2);
  EXPECT_EQ(ns.min_relative_singular, 0.0);
  EXPECT_LE((sys.matrix * ns.basis).norm(), 1e-14);
}

TEST(Certify, HaarSixQubitsAreCertified) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto v = certify_udp(sample_haar_state(PartyStructure::uniform(6, 2), seed), balanced_blocks(6));
    EXPECT_EQ(v.status, UdpStatus::certified_udp) << "seed " << seed;
    EXPECT_EQ(v.null_dim, 0);
    EXPECT_GT(v.min_relative_singular, 1e-9);
    EXPECT_EQ(v.equation_counts.variables, 28);
    EXPECT_EQ(v.equation_counts.complex_equations(), 33);
  }
}

TEST(Certify, VerdictInvariantUnderGlobalPhaseAndTransposition) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto psi = sample_haar_state(PartyStructure::uniform(6, 2), seed);
    const auto spec = balanced_blocks(6);
    const auto a = certify_udp(psi, spec);
    const auto b = certify_udp(psi.with_global_phase(2.1), spec);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.null_dim, b.null_dim);
    EXPECT_NEAR(a.min_relative_singular, b.min_relative_singular, 1e-8);
    // roles of the two cross cuts exchanged
    EXPECT_EQ(certify_udp(psi, spec.transposed()).status, UdpStatus::certified_udp);
  }
}

TEST(Certify, GhzIsWitnessed) {
  for (int n : {4, 6}) {
    const auto psi = ghz(n);
    CertifyOptions opt;
    opt.family = MarginalFamily::complete(n, n - 1);
    const auto v = certify_udp(psi, balanced_blocks(n), opt);
    EXPECT_GE(v.null_dim, 1);
    ASSERT_EQ(v.status, UdpStatus::not_udp_witnessed);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_NEAR(v.witness_fidelity, 0.28, 1e-12);
    // independent recheck of the whole (N-1)-deck
    const auto deck = MarginalFamily::complete(n, n - 1);
    for (const auto& sub : deck.subsets()) {
      const auto a = oracle::partial_trace(psi.amplitudes(), psi.structure().local_dims(), sub);
      const auto b = oracle::partial_trace(v.witness->amplitudes(), psi.structure().local_dims(), sub);
      EXPECT_LE((a - b).norm(), 1e-9);
    }
    EXPECT_NEAR(std::abs(inner_product(psi, *v.witness)), 0.28, 1e-12);
  }
}

TEST(Certify, ProductStateIsInconclusiveWithRankOneNote) {
  const auto s = PartyStructure::uniform(6, 2);
  const auto v = certify_udp(PureState::basis(s, "000000"), balanced_blocks(6));
  EXPECT_EQ(v.status, UdpStatus::inconclusive);
  EXPECT_TRUE(v.rank_one_primary_cut);
  EXPECT_FALSE(v.notes.empty());
}

TEST(Certify, EmptySystemYieldsWitness) {
  // AC = CD and BD = AB, so every phase twist keeps the deck.
  const auto psi = sample_haar_state(PartyStructure::uniform(3, 2), 4);
  const auto v = certify_udp(psi, parse_blocks("A=;B=1;C=2,3;D="));
  EXPECT_EQ(v.equation_counts.complex_equations(), 0);
  EXPECT_EQ(v.null_dim, 2);
  EXPECT_EQ(v.status, UdpStatus::not_udp_witnessed);
  EXPECT_LT(v.witness_fidelity, 1.0 - 1e-6);
}

TEST(Certify, SquareSystemForFourQubits) {
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = certify_udp(sample_haar_state(PartyStructure::uniform(4, 2), seed), balanced_blocks(4));
    EXPECT_EQ(v.equation_counts.variables, 6);
    EXPECT_EQ(v.equation_counts.complex_equations(), 6);
    certified += v.status == UdpStatus::certified_udp;
  }
  EXPECT_EQ(certified, 20);
}

TEST(DependenceLemma, RankDropsByFour) {
  const auto four = verify_dependence_lemma(PartyStructure::uniform(4, 2), balanced_blocks(4), 40, 7);
  EXPECT_EQ(four.total_entries, 16);
  EXPECT_EQ(four.measured_rank, four.predicted_rank);
  const auto six = verify_dependence_lemma(PartyStructure::uniform(6, 2), balanced_blocks(6), 60, 9, 2, 5);
  EXPECT_EQ(six.total_entries, 40);
  EXPECT_EQ(six.measured_rank, 36);
  EXPECT_THROW(verify_dependence_lemma(PartyStructure::uniform(4, 2), balanced_blocks(4), 10, 7), Error);
}
