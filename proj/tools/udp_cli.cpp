#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "udp/udp.hpp"

using namespace udp;
using nlohmann::json;

namespace {

struct Globals {
  bool json_out = false;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  Tolerances tol;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  std::map<std::string, CLI::Option*> tol_opts;
};

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

Subset parse_subset(const std::string& text) {
  // reuse the family parser on a single group
  const auto fam = parse_family(text, 64);
  if (fam.size() != 1) throw UsageError("expected one comma-separated party list, got '" + text + "'");
  return fam.subsets()[0];
}

Eigen::VectorXcd parse_amplitudes(const std::string& text) {
  json j;
  try {
    if (!text.empty() && (text[0] == '[' || text[0] == '{')) {
      j = json::parse(text);
    } else {
      std::ifstream in(text);
      if (!in) throw UsageError("cannot open amplitude file '" + text + "'");
      j = json::parse(in);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad amplitude JSON: ") + e.what());
  }
  if (!j.is_array()) throw UsageError("amplitudes must be a JSON array");
  Eigen::VectorXcd a(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (e.is_number()) a(static_cast<Eigen::Index>(i)) = e.get<double>();
    else if (e.is_array() && e.size() == 2) a(static_cast<Eigen::Index>(i)) = cplx(e[0].get<double>(), e[1].get<double>());
    else throw UsageError("amplitude entries must be numbers or [re, im] pairs");
  }
  return a;
}

std::vector<double> parse_phases(const std::string& text) {
  try {
    return json::parse(text).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("phases must be a JSON array of numbers: ") + e.what());
  }
}

json genericity_json(const GenericityReport& g) {
  return {{"rank", g.rank},
          {"full_rank", g.full_rank},
          {"distinct_spectrum", g.distinct_spectrum},
          {"min_gap", detail::finite_or_null(g.min_gap)}};
}

json counts_json(const EquationCounts& c) {
  return {{"variables", c.variables},
          {"complex_equations", c.complex_equations()},
          {"qp_equations", c.qp_equations},
          {"lm_equations", c.lm_equations}};
}

// ---------------------------------------------------------------------------

struct CertifyArgs {
  std::string state, blocks, family, witness_out;
};

int run_certify(const CertifyArgs& a, const Globals& g) {
  const PureState psi = load_state(a.state, g.tol.norm_tol);
  const CrossCutSpec spec = a.blocks.empty() ? balanced_blocks(psi.num_parties()) : parse_blocks(a.blocks);
  CertifyOptions opt;
  opt.svd_tol = g.tol.svd_tol;
  opt.gap_tol = g.tol.gap_tol;
  opt.deck_tol = g.tol.deck_tol;
  opt.seed = g.seed;
  if (!a.family.empty()) opt.family = parse_family(a.family, psi.num_parties());
  const UdpVerdict v = certify_udp(psi, spec, opt);

  std::string witness_path = a.witness_out.empty() ? g.out : a.witness_out;
  if (v.witness && !witness_path.empty()) save_state(*v.witness, witness_path);

  if (g.json_out) {
    json j = {{"status", to_string(v.status)},
              {"blocks", spec.canonical(psi.structure()).to_string()},
              {"null_dim", v.null_dim},
              {"min_relative_singular", v.min_relative_singular},
              {"genericity", genericity_json(v.genericity)},
              {"counts", counts_json(v.equation_counts)},
              {"rank_one_primary_cut", v.rank_one_primary_cut},
              {"notes", v.notes}};
    if (v.witness) {
      j["witness"] = {{"deck_distance", v.witness_deck_distance},
                      {"fidelity", v.witness_fidelity},
                      {"state", state_to_json(*v.witness)}};
    }
    emit(j);
  } else {
    std::printf("%s\n", to_string(v.status));
    std::printf("blocks %s\n", spec.canonical(psi.structure()).to_string().c_str());
    std::printf("unknowns %lld, complex equations %lld, null dimension %lld, min relative singular value %.3e\n",
                static_cast<long long>(v.equation_counts.variables),
                static_cast<long long>(v.equation_counts.complex_equations()), static_cast<long long>(v.null_dim),
                v.min_relative_singular);
    std::printf("primary cut rank %d, full rank %s, distinct spectrum %s, min gap %.3e\n", v.genericity.rank,
                v.genericity.full_rank ? "yes" : "no", v.genericity.distinct_spectrum ? "yes" : "no",
                v.genericity.min_gap);
    if (v.witness)
      std::printf("witness: deck distance %.3e, fidelity %.12f%s\n", v.witness_deck_distance, v.witness_fidelity,
                  witness_path.empty() ? "" : (", saved to " + witness_path).c_str());
    for (const auto& n : v.notes) std::printf("note: %s\n", n.c_str());
  }
  return 0;
}

struct ExperimentArgs {
  int n = 6, d = 2, trials = 100, threads = 1;
  std::string blocks, csv;
  CLI::Option *n_opt = nullptr, *d_opt = nullptr, *trials_opt = nullptr, *threads_opt = nullptr,
              *blocks_opt = nullptr;
};

int run_experiment_cmd(const ExperimentArgs& a, const Globals& g) {
  ExperimentConfig c;
  if (!g.config.empty()) {
    std::ifstream in(g.config);
    if (!in) throw UsageError("cannot open config '" + g.config + "'");
    try {
      c = json::parse(in).get<ExperimentConfig>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad config JSON: ") + e.what());
    }
  } else {
    c.blocks = balanced_blocks(a.n);
  }
  if (a.n_opt->count()) {
    c.n_parties = a.n;
    if (!a.blocks_opt->count()) c.blocks = balanced_blocks(a.n);
  }
  if (a.d_opt->count()) c.local_dim = a.d;
  if (a.trials_opt->count()) c.trials = a.trials;
  if (a.threads_opt->count()) c.threads = a.threads;
  if (a.blocks_opt->count()) c.blocks = parse_blocks(a.blocks);
  if (g.seed_opt->count()) c.seed = g.seed;
  if (g.out_opt->count()) c.output_path = g.out;
  for (const auto& [name, opt] : g.tol_opts)
    if (opt->count()) {
      if (name == "norm") c.tolerances.norm_tol = g.tol.norm_tol;
      if (name == "gap") c.tolerances.gap_tol = g.tol.gap_tol;
      if (name == "svd") c.tolerances.svd_tol = g.tol.svd_tol;
      if (name == "deck") c.tolerances.deck_tol = g.tol.deck_tol;
    }
  if (c.trials < 1) throw UsageError("trials must be at least 1");

  const ExperimentReport rep = run_experiment(c);
  if (!a.csv.empty()) {
    std::string csv = "index,seed,status,null_dim,min_gap,min_relative_singular,full_rank,distinct_spectrum\n";
    for (const auto& t : rep.trials)
      csv += std::to_string(t.index) + ',' + std::to_string(t.seed) + ',' + to_string(t.status) + ',' +
             std::to_string(t.null_dim) + ',' + json(t.min_gap).dump() + ',' + json(t.min_relative_singular).dump() +
             ',' + (t.full_rank ? "1" : "0") + ',' + (t.distinct_spectrum ? "1" : "0") + '\n';
    write_text(a.csv, csv);
  }
  if (g.json_out) {
    emit(json(rep));
  } else {
    emit({{"trials", c.trials},
          {"certified", rep.certified},
          {"witnessed", rep.witnessed},
          {"inconclusive", rep.inconclusive},
          {"min_spectral_gap", detail::finite_or_null(rep.min_spectral_gap)},
          {"variables", rep.counts.variables},
          {"complex_equations", rep.counts.complex_equations()},
          {"runtime_ms", rep.runtime_ms}});
  }
  return 0;
}

struct DeckArgs {
  std::string a, b, family;
  std::optional<double> tol;
};

int run_deck_diff(const DeckArgs& d, const Globals& g) {
  const PureState a = load_state(d.a, g.tol.norm_tol), b = load_state(d.b, g.tol.norm_tol);
  if (!(a.structure() == b.structure())) throw Error("states have different party structures");
  const MarginalFamily fam = parse_family(d.family, a.num_parties());
  const double tol = d.tol.value_or(g.tol.deck_tol);
  const Deck da = compute_deck(a, fam), db = compute_deck(b, fam);
  json per = json::array();
  for (std::size_t i = 0; i < da.marginals.size(); ++i)
    per.push_back({{"parties", da.marginals[i].parties},
                   {"distance", (da.marginals[i].matrix - db.marginals[i].matrix).norm()}});
  const double dist = deck_distance(da, db);
  const double fid = fidelity_up_to_phase(a, b);
  if (g.json_out) {
    emit({{"distance", dist}, {"tol", tol}, {"equal", dist <= tol}, {"fidelity", fid}, {"per_marginal", per}});
  } else {
    std::printf("max marginal distance %.3e (tol %.1e): decks %s\n", dist, tol, dist <= tol ? "EQUAL" : "DIFFER");
    std::printf("fidelity up to phase %.12f\n", fid);
  }
  return 0;
}

int run_deck_export(const DeckArgs& d, const Globals& g) {
  const PureState a = load_state(d.a, g.tol.norm_tol);
  const json j = deck_to_json(compute_deck(a, parse_family(d.family, a.num_parties())));
  if (!g.out.empty()) write_text(g.out, j.dump(2) + "\n");
  else emit(j);
  return 0;
}

struct SchmidtArgs {
  std::string state, cut;
};

int run_schmidt(const SchmidtArgs& a, const Globals& g) {
  const PureState psi = load_state(a.state, g.tol.norm_tol);
  const SchmidtDecomposition dec = schmidt_decompose(psi, parse_subset(a.cut));
  const GenericityReport gen = classify_genericity(dec, g.tol.gap_tol);
  const Eigen::VectorXd lambdas = dec.lambdas();
  const std::vector<double> lam(lambdas.begin(), lambdas.end());
  emit({{"cut", {{"left", dec.cut.left}, {"right", dec.cut.right}}},
        {"rank", dec.rank()},
        {"ambient_rank", dec.ambient_rank()},
        {"lambdas", lam},
        {"genericity", genericity_json(gen)}});
  return 0;
}

struct HypergraphArgs {
  int n = 0;
  std::string family;
  std::optional<int> k;
};

int run_hypergraph(const HypergraphArgs& a, const Globals& g) {
  const MarginalFamily fam = parse_family(a.family, a.n);
  const DeckHypergraph h(fam);
  const bool connected = is_connected(h);
  std::optional<int> k = a.k;
  if (!k) {
    const std::size_t k0 = fam.subsets().front().size();
    if (std::all_of(fam.subsets().begin(), fam.subsets().end(), [&](const Subset& s) { return s.size() == k0; }))
      k = static_cast<int>(k0);
  }
  json bound = nullptr;
  if (k && *k >= 2 && *k <= a.n) bound = marginal_number_lower_bound(a.n, *k);
  json comps = json::array();
  {
    const auto labels = h.components();
    const int nc = *std::max_element(labels.begin(), labels.end()) + 1;
    for (int c = 0; c < nc; ++c) {
      Subset s;
      for (int v = 0; v < a.n; ++v)
        if (labels[static_cast<std::size_t>(v)] == c) s.push_back(v + 1);
      comps.push_back(s);
    }
  }
  const json j = {{"connected", connected},
                  {"k", k ? json(*k) : json(nullptr)},
                  {"lower_bound_for_k", bound},
                  {"family_size", fam.size()},
                  {"violation", !connected},
                  {"singleton_edges", h.has_singleton_edges()},
                  {"components", comps}};
  if (g.json_out) {
    emit(j);
  } else {
    std::printf("%s, %zu marginals, %zu components\n", connected ? "connected" : "disconnected", fam.size(),
                comps.size());
    if (!bound.is_null()) std::printf("at least %d marginals of size %d are needed to connect %d parties\n",
                                      bound.get<int>(), *k, a.n);
    if (!connected) std::printf("violation: no genuinely multipartite entangled state is determined by this family\n");
    if (h.has_singleton_edges()) std::printf("note: single-party marginals only cover their own party\n");
  }
  return 0;
}

struct OaArgs {
  std::string file, amps, phases;
  int flip = 0;
  bool allow_large = false;
};

json array_summary(const CombinatorialArray& arr) {
  const RowArray& d = row_data(arr);
  const OaCheck oa = verify_oa(d.rows, d.levels, d.strength);
  return {{"kind", std::holds_alternative<OrthogonalArray>(arr) ? "OA" : "PA"},
          {"rows", d.num_rows()},
          {"columns", d.num_columns()},
          {"levels", d.levels},
          {"strength", d.strength},
          {"is_oa", oa.is_oa},
          {"lambda", oa.lambda ? json(*oa.lambda) : json(nullptr)},
          {"irredundant", oa.irredundant},
          {"is_pa", verify_pa(d.rows, d.levels, d.strength)}};
}

int run_oa_verify(const OaArgs& a, const Globals&) {
  const auto arr = load_array(a.file, false);
  const json j = array_summary(arr);
  emit(j);
  const bool claimed = std::holds_alternative<OrthogonalArray>(arr) ? j["is_oa"].get<bool>() : j["is_pa"].get<bool>();
  return claimed ? 0 : 1;
}

int run_oa_state(const OaArgs& a, const Globals& g) {
  const auto arr = load_array(a.file);
  std::optional<Eigen::VectorXcd> amps;
  if (!a.amps.empty()) amps = parse_amplitudes(a.amps);
  const auto st = qoa_state(arr, amps);
  if (!g.out.empty()) save_state(st.state, g.out);
  else emit(state_to_json(st.state));
  return 0;
}

int run_oa_witness(const OaArgs& a, const Globals& g) {
  const auto arr = load_array(a.file);
  std::optional<Eigen::VectorXcd> amps;
  if (!a.amps.empty()) amps = parse_amplitudes(a.amps);
  const auto st = qoa_state(arr, amps);
  WitnessResult w = a.phases.empty() ? non_udp_witness(st, a.flip == 0 ? 1 : a.flip, g.tol.deck_tol, a.allow_large)
                                     : non_udp_witness(st, parse_phases(a.phases), g.tol.deck_tol, a.allow_large);
  if (!g.out.empty()) save_state(w.witness, g.out);
  const RowArray& d = row_data(arr);
  const json j = {{"verified", w.verified},
                  {"deck", "k=" + std::to_string(d.num_columns() - d.strength)},
                  {"deck_distance", w.deck_distance},
                  {"fidelity", w.fidelity}};
  if (g.json_out) {
    json full = j;
    full["witness"] = state_to_json(w.witness);
    emit(full);
  } else {
    emit(j);
  }
  return w.verified ? 0 : 1;
}

struct CountingArgs {
  int max_n = 6, max_d = 4;
  std::string csv;
};

int run_counting(const CountingArgs& a, const Globals& g) {
  if (a.max_n < 2 || a.max_d < 2) throw UsageError("--max-n and --max-d must be at least 2");
  const CountingTable t = check_counting_table(a.max_n, a.max_d);
  const json j = counting_table_to_json(t);
  if (!a.csv.empty()) {
    std::string csv = "n,N,d,A,variables,equations,surplus\n";
    for (const auto& r : t.rows)
      csv += std::to_string(r.n) + ',' + std::to_string(2 * r.n) + ',' + std::to_string(r.d) + ',' +
             std::to_string(r.a) + ',' + std::to_string(r.variables) + ',' + std::to_string(r.equations) + ',' +
             std::to_string(r.surplus) + '\n';
    write_text(a.csv, csv);
  }
  if (!g.out.empty()) write_text(g.out, j.dump(2) + "\n");
  if (g.json_out) {
    emit(j);
    return 0;
  }
  std::printf("%3s %3s %3s %12s %12s %12s %6s %6s %s\n", "N", "d", "A*", "min surplus", "closed form", "unknowns",
              "match", "ends", "flag");
  for (const auto& s : t.summaries) {
    std::string argmin;
    for (int x : s.argmin) argmin += (argmin.empty() ? "" : "/") + std::to_string(x);
    const std::int64_t vars = gamma_variable_count(ipow(s.d, s.n));
    const bool flagged = !s.positive || !s.closed_form_matches || !s.argmin_at_ends;
    std::printf("%3d %3d %3s %12lld %12lld %12lld %6s %6s %s\n", 2 * s.n, s.d, argmin.c_str(),
                static_cast<long long>(s.min_surplus), static_cast<long long>(s.closed_form),
                static_cast<long long>(vars), s.closed_form_matches ? "yes" : "NO", s.argmin_at_ends ? "yes" : "NO",
                flagged ? (s.positive ? "FLAG" : "FLAG non-positive surplus") : "");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify and refute uniqueness of multipartite pure states from their marginals"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json_out, "Machine-readable JSON output");
  g.seed_opt = app.add_option("--seed", g.seed, "RNG seed");
  g.out_opt = app.add_option("--out", g.out, "Output file (witness state, report, deck, ...)");
  app.add_option("--config", g.config, "ExperimentConfig JSON file")->check(CLI::ExistingFile);
  g.tol_opts["norm"] = app.add_option("--tol-norm", g.tol.norm_tol, "Normalization tolerance");
  g.tol_opts["gap"] = app.add_option("--tol-gap", g.tol.gap_tol, "Schmidt spectral gap tolerance");
  g.tol_opts["svd"] = app.add_option("--tol-svd,--svd-tol", g.tol.svd_tol, "Relative SVD rank tolerance");
  g.tol_opts["deck"] = app.add_option("--tol-deck,--deck-tol", g.tol.deck_tol, "Deck equality tolerance");
  for (auto& [name, opt] : g.tol_opts) opt->check(CLI::PositiveNumber);

  std::function<int()> action;

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "Decide whether a state is determined by its cross-cut marginals");
  certify->add_option("state", ca.state, "State JSON file or inline JSON")->required();
  certify->add_option("--blocks", ca.blocks, "A=..;B=..;C=..;D=.. (default: balanced contiguous blocks)");
  certify->add_option("--family", ca.family, "Extra marginals a witness must also reproduce");
  certify->add_option("--witness-out", ca.witness_out, "Write a witness state here");
  certify->callback([&] { action = [&] { return run_certify(ca, g); }; });

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Certify a seeded batch of Haar-random states");
  ea.n_opt = experiment->add_option("--n", ea.n, "Number of parties")->check(CLI::PositiveNumber);
  ea.d_opt = experiment->add_option("--d", ea.d, "Local dimension")->check(CLI::Range(2, 36));
  ea.trials_opt = experiment->add_option("--trials", ea.trials, "Number of states");
  ea.threads_opt = experiment->add_option("--threads", ea.threads, "Worker threads")->check(CLI::PositiveNumber);
  ea.blocks_opt = experiment->add_option("--blocks", ea.blocks, "A=..;B=..;C=..;D=..");
  experiment->add_option("--csv", ea.csv, "Write per-trial CSV here");
  experiment->callback([&] { action = [&] { return run_experiment_cmd(ea, g); }; });

  DeckArgs da;
  auto* deck = app.add_subcommand("deck", "Compare or export marginal decks");
  deck->require_subcommand(1);
  auto* diff = deck->add_subcommand("diff", "Largest Frobenius distance between two decks");
  diff->add_option("stateA", da.a)->required();
  diff->add_option("stateB", da.b)->required();
  diff->add_option("--family", da.family, "k=<int> or 1,2;3,4")->required();
  diff->add_option("--tol", da.tol, "Equality threshold")->check(CLI::PositiveNumber);
  diff->callback([&] { action = [&] { return run_deck_diff(da, g); }; });
  auto* exp = deck->add_subcommand("export", "Write a deck as JSON");
  exp->add_option("state", da.a)->required();
  exp->add_option("--family", da.family, "k=<int> or 1,2;3,4")->required();
  exp->callback([&] { action = [&] { return run_deck_export(da, g); }; });

  SchmidtArgs sa;
  auto* schmidt = app.add_subcommand("schmidt", "Schmidt spectrum and genericity along a cut");
  schmidt->add_option("state", sa.state)->required();
  schmidt->add_option("--cut", sa.cut, "Left side, e.g. 1,2,3")->required();
  schmidt->callback([&] { action = [&] { return run_schmidt(sa, g); }; });

  HypergraphArgs ha;
  auto* hyper = app.add_subcommand("hypergraph", "Connectivity of a marginal family");
  hyper->add_option("--n", ha.n, "Number of parties")->required()->check(CLI::PositiveNumber);
  hyper->add_option("--family", ha.family, "1,2,3;4,5,6;...")->required();
  hyper->add_option("--k", ha.k, "Marginal size for the lower bound");
  hyper->callback([&] { action = [&] { return run_hypergraph(ha, g); }; });

  OaArgs oa;
  auto* oacmd = app.add_subcommand("oa", "Orthogonal and packing arrays");
  oacmd->require_subcommand(1);
  auto* verify = oacmd->add_subcommand("verify", "Check the array property claimed by the header");
  verify->add_option("file", oa.file)->required()->check(CLI::ExistingFile);
  verify->callback([&] { action = [&] { return run_oa_verify(oa, g); }; });
  auto* state = oacmd->add_subcommand("state", "Superpose the array rows");
  state->add_option("file", oa.file)->required()->check(CLI::ExistingFile);
  state->add_option("--amps", oa.amps, "JSON array of amplitudes (numbers or [re, im]) or a file");
  state->callback([&] { action = [&] { return run_oa_state(oa, g); }; });
  auto* witness = oacmd->add_subcommand("witness", "Phase-changed state with the same complementary deck");
  witness->add_option("file", oa.file)->required()->check(CLI::ExistingFile);
  witness->add_option("--amps", oa.amps, "JSON array of amplitudes or a file");
  auto* flip = witness->add_option("--flip", oa.flip, "Flip the sign of this row (1-based)");
  witness->add_option("--phases", oa.phases, "JSON array of per-row phases")->excludes(flip);
  witness->add_flag("--allow-large-strength", oa.allow_large, "Permit strength above N/2");
  witness->callback([&] { action = [&] { return run_oa_witness(oa, g); }; });

  CountingArgs cnt;
  auto* counting = app.add_subcommand("counting-table", "Equation surplus over all unbalanced cross cuts");
  counting->add_option("--max-n", cnt.max_n, "Largest n (N = 2n)");
  counting->add_option("--max-d", cnt.max_d, "Largest local dimension");
  counting->add_option("--csv", cnt.csv, "Write per-split CSV here");
  counting->callback([&] { action = [&] { return run_counting(cnt, g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
