// Command-line front end: analyze chains and pools, generate mixed datasets,
// train multi-kernel models, evaluate bound formulas, and run the Monte-Carlo
// verification suites. Structured reports are JSON; grids and datasets are CSV.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixmkl/mixmkl.hpp"

namespace {

using mixmkl::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitVerifyFailed = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw mixmkl::Error("cannot write " + out_path);
    out << text << "\n";
    std::cerr << "wrote " << out_path << "\n";
  }
}

void emit_report(const json& body, const json& config, const std::string& out_path) {
  emit(mixmkl::wrap_report(body, config).dump(2), out_path);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start, step, stop;
    char c1, c2;
    std::istringstream ss(text);
    if (!(ss >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':')
      throw mixmkl::ConfigError("grid must be \"start:step:stop\" or a comma list");
    for (double v = start; v <= stop + 1e-12; v += step) grid.push_back(v);
  } else {
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) grid.push_back(std::stod(cell));
  }
  if (grid.empty()) throw mixmkl::ConfigError("empty grid");
  return grid;
}

Eigen::VectorXd parse_values(const std::string& text) {
  std::vector<double> vals;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

// Default +/-1 state function: +1 on the upper half of the state indices.
Eigen::VectorXd default_state_function(int states) {
  Eigen::VectorXd g(states);
  for (int s = 0; s < states; ++s) g[s] = s >= (states + 1) / 2 ? 1.0 : -1.0;
  return g;
}

mixmkl::AssignMode parse_mode(const std::string& mode) {
  if (mode == "probabilistic") return mixmkl::AssignMode::probabilistic;
  if (mode == "proportional") return mixmkl::AssignMode::proportional;
  throw mixmkl::ConfigError("mode must be probabilistic or proportional");
}

struct BoundFlags {
  std::string kind;
  mixmkl::BoundInputs in;
  double tau_min = -1.0, b_n = -1.0, q = -1.0, r = -1.0, rademacher = -1.0;
  int d_k = -1;
  std::string sweep, sweep_values;

  mixmkl::BoundInputs resolve() const {
    mixmkl::BoundInputs out = in;
    if (tau_min >= 0.0) out.tau_min = tau_min;
    if (b_n >= 0.0) out.b_n = b_n;
    if (q > 0.0) out.q = q;
    if (r > 0.0) out.r = r;
    if (d_k >= 0) out.d_k = d_k;
    return out;
  }
};

json bound_config_json(const BoundFlags& flags) {
  json cfg = mixmkl::to_json(flags.resolve());
  cfg["kind"] = flags.kind;
  if (flags.rademacher >= 0.0) cfg["rademacher"] = flags.rademacher;
  return cfg;
}

mixmkl::BoundReport evaluate_bound(const std::string& kind,
                                   const mixmkl::BoundInputs& in,
                                   std::optional<double> rademacher) {
  using mixmkl::BoundKind;
  using mixmkl::RademacherKind;
  if (kind == "lemma5") return mixmkl::rademacher_bound(RademacherKind::lemma5, in);
  if (kind == "cortes_q") return mixmkl::rademacher_bound(RademacherKind::cortes_q, in);
  if (kind == "cortes_l1") return mixmkl::rademacher_bound(RademacherKind::cortes_l1, in);
  if (kind == "pseudodim") return mixmkl::rademacher_bound(RademacherKind::pseudodim, in);
  if (kind == "thm1") return mixmkl::generalization_bound(BoundKind::thm1, in, rademacher);
  if (kind == "thm2") return mixmkl::generalization_bound(BoundKind::thm2, in, rademacher);
  if (kind == "thm3") return mixmkl::generalization_bound(BoundKind::thm3, in, rademacher);
  if (kind == "corollary")
    return mixmkl::generalization_bound(BoundKind::corollary, in, rademacher);
  if (kind == "master")
    return mixmkl::generalization_bound(BoundKind::master, in, rademacher);
  throw mixmkl::ConfigError("unknown bound kind \"" + kind + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-kernel learning on mixed Markov data: spectral constants, "
               "bound formulas and Monte-Carlo verification"};
  app.require_subcommand(1);

  std::string spec_path, out_path, data_path, family_path, pool_path;
  std::uint64_t seed = 0;
  int exit_code = kExitOk;

  // --- chain ---------------------------------------------------------------
  auto* chain_cmd = app.add_subcommand("chain", "analyze a single chain spec");
  int chain_kmax = 25, chain_tmax = -1;
  chain_cmd->add_option("--spec", spec_path, "chain JSON")->required();
  chain_cmd->add_option("--out", out_path, "output path (stdout when omitted)");
  chain_cmd->add_option("--k-max", chain_kmax, "pseudo-gap search depth");
  chain_cmd->add_option("--t-max", chain_tmax, "explicit profile horizon");
  chain_cmd->callback([&] {
    const mixmkl::Chain chain = mixmkl::parse_chain(mixmkl::load_json_file(spec_path));
    mixmkl::AnalysisOptions opts;
    opts.k_max = chain_kmax;
    if (chain_tmax > 0) opts.t_max = chain_tmax;
    const mixmkl::ChainAnalysis a = mixmkl::analyze_chain(chain.transition, opts);
    json body;
    body["pi"] = mixmkl::to_json(a.pi);
    body["pi_min"] = a.pi_min;
    body["gamma_star"] = a.spectral.gamma_star;
    body["lambda"] = a.spectral.lambda;
    body["is_reversible"] = a.spectral.is_reversible;
    if (a.spectral.gamma_reversible) body["gamma"] = *a.spectral.gamma_reversible;
    body["gamma_ps"] = a.gamma_ps;
    body["k_star"] = a.k_star;
    body["t_max"] = a.profile.t_max;
    if (a.t_mix_quarter)
      body["t_mix_quarter"] = *a.t_mix_quarter;
    else
      body["t_mix_quarter"] = nullptr;
    if (a.tau_min)
      body["tau_min"] = *a.tau_min;
    else
      body["tau_min"] = nullptr;
    emit_report(body, {{"spec", spec_path}, {"k_max", chain_kmax}}, out_path);
  });

  // --- pool ----------------------------------------------------------------
  auto* pool_cmd = app.add_subcommand("pool", "aggregate constants over a pool spec");
  pool_cmd->add_option("--spec", spec_path, "pool JSON")->required();
  pool_cmd->add_option("--out", out_path, "output path");
  pool_cmd->callback([&] {
    const mixmkl::ChainPool pool = mixmkl::parse_pool(mixmkl::load_json_file(spec_path));
    const mixmkl::PoolSummary summary = mixmkl::pool_summary(pool);
    emit_report(mixmkl::to_json(summary), {{"spec", spec_path}}, out_path);
  });

  // --- generate ------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generate", "simulate a mixed dataset (CSV)");
  int gen_n = 100;
  std::string gen_mode = "probabilistic";
  bool gen_labels = false;
  gen_cmd->add_option("--spec", spec_path, "pool JSON")->required();
  gen_cmd->add_option("--n", gen_n, "sample count")->required();
  gen_cmd->add_option("--seed", seed, "seed (default 0)");
  gen_cmd->add_option("--mode", gen_mode, "probabilistic | proportional");
  gen_cmd->add_flag("--labels", gen_labels, "emit labels as well");
  gen_cmd->add_option("--out", out_path, "output path");
  gen_cmd->callback([&] {
    const mixmkl::ChainPool pool = mixmkl::parse_pool(mixmkl::load_json_file(spec_path));
    mixmkl::MixedDataset ds =
        mixmkl::generate_features(pool, gen_n, seed, parse_mode(gen_mode));
    if (gen_labels) ds = mixmkl::emit_labels(ds, pool, seed);
    std::ostringstream os;
    mixmkl::write_csv(ds, os);
    std::cerr << "seed: " << seed << "\n";
    emit(os.str(), out_path);
  });

  // --- train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a multi-kernel classifier");
  double train_delta = 0.5;
  int train_iters = 500;
  train_cmd->add_option("--pool", pool_path, "pool JSON (for the exact true error)")
      ->required();
  train_cmd->add_option("--data", data_path, "dataset CSV")->required();
  train_cmd->add_option("--family", family_path, "kernel family JSON")->required();
  train_cmd->add_option("--delta", train_delta, "margin in (0,1]");
  train_cmd->add_option("--iters", train_iters, "outer iterations");
  train_cmd->add_option("--out", out_path, "output path");
  train_cmd->callback([&] {
    const mixmkl::ChainPool pool = mixmkl::parse_pool(mixmkl::load_json_file(pool_path));
    const mixmkl::KernelFamily family =
        mixmkl::parse_family(mixmkl::load_json_file(family_path));
    std::ifstream in(data_path);
    if (!in) throw mixmkl::ParseError("cannot open " + data_path);
    const mixmkl::MixedDataset ds = mixmkl::read_csv(in);
    mixmkl::TrainOptions opts;
    opts.iterations = train_iters;
    const mixmkl::MklModel model = mixmkl::train(ds, family, train_delta, opts);
    json body = mixmkl::model_to_json(model);
    body["metrics"] = {
        {"empirical_margin_error",
         mixmkl::empirical_margin_error(model, ds, train_delta)},
        {"true_error", mixmkl::true_error_exact(model, pool)},
        {"estimation_error", mixmkl::estimation_error(model, ds, pool, train_delta)}};
    emit_report(body,
                {{"pool", pool_path},
                 {"data", data_path},
                 {"family", family_path},
                 {"delta", train_delta},
                 {"iters", train_iters}},
                out_path);
  });

  // --- bound ---------------------------------------------------------------
  auto* bound_cmd = app.add_subcommand("bound", "evaluate a bound formula");
  BoundFlags bf;
  bound_cmd->add_option("kind", bf.kind,
                        "thm1|thm2|thm3|corollary|master|lemma5|cortes_q|cortes_l1|pseudodim")
      ->required();
  bound_cmd->add_option("--n", bf.in.n, "sample count")->required();
  bound_cmd->add_option("--m", bf.in.m, "base kernel count")->required();
  bound_cmd->add_option("--B", bf.in.B, "RKHS radius");
  bound_cmd->add_option("--kappa", bf.in.kappa, "kernel sup bound");
  bound_cmd->add_option("--delta", bf.in.delta, "margin");
  bound_cmd->add_option("--alpha", bf.in.alpha, "confidence level");
  bound_cmd->add_option("--tau-min", bf.tau_min, "mixing constant");
  bound_cmd->add_option("--b-n", bf.b_n, "symmetrization offset");
  bound_cmd->add_option("--q", bf.q, "weight exponent");
  bound_cmd->add_option("--r", bf.r, "conjugate exponent");
  bound_cmd->add_option("--d-k", bf.d_k, "pseudo-dimension");
  bound_cmd->add_option("--c-chaos", bf.in.c_chaos, "chaos constant (default 1)");
  bound_cmd->add_option("--rademacher", bf.rademacher, "explicit Rademacher value");
  bound_cmd->add_option("--sweep", bf.sweep, "sweep variable: n | m");
  bound_cmd->add_option("--values", bf.sweep_values, "comma list of sweep values");
  bound_cmd->add_option("--out", out_path, "output path");
  bound_cmd->callback([&] {
    std::optional<double> rv;
    if (bf.rademacher >= 0.0) rv = bf.rademacher;
    if (!bf.sweep.empty()) {
      if (bf.sweep != "n" && bf.sweep != "m")
        throw mixmkl::ConfigError("--sweep must be n or m");
      const Eigen::VectorXd values = parse_values(bf.sweep_values);
      std::ostringstream os;
      os << bf.sweep << ",value,complexity,concentration,b_n\n";
      char buf[200];
      for (int i = 0; i < values.size(); ++i) {
        mixmkl::BoundInputs in = bf.resolve();
        if (bf.sweep == "n")
          in.n = static_cast<int>(values[i]);
        else
          in.m = static_cast<int>(values[i]);
        const mixmkl::BoundReport r = evaluate_bound(bf.kind, in, rv);
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g",
                      static_cast<int>(values[i]), r.value, r.terms.complexity,
                      r.terms.concentration, r.terms.bn);
        os << buf << "\n";
      }
      emit(os.str(), out_path);
      return;
    }
    const mixmkl::BoundReport r = evaluate_bound(bf.kind, bf.resolve(), rv);
    emit_report(mixmkl::to_json(r), bound_config_json(bf), out_path);
  });

  // --- verify --------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "run a Monte-Carlo verification suite");
  std::string which, grid_text, g_text, verify_mode;
  mixmkl::ExperimentConfig cfg;
  int class_size = 20;
  verify_cmd
      ->add_option("which", which,
                   "mcdiarmid | bernstein | symmetrization | generalization | spectral")
      ->required();
  verify_cmd->add_option("--spec", spec_path, "pool JSON")->required();
  verify_cmd->add_option("--seed", cfg.seed, "seed (default 0)");
  verify_cmd->add_option("--n", cfg.n, "sequence length");
  verify_cmd->add_option("--trials", cfg.trials, "Monte-Carlo trials");
  verify_cmd->add_option("--grid", grid_text, "deviation grid, list or start:step:stop");
  verify_cmd->add_option("--g", g_text, "per-state function values (comma list)");
  verify_cmd->add_option("--mode", verify_mode, "probabilistic | proportional");
  verify_cmd->add_option("--family", family_path, "kernel family JSON (generalization)");
  verify_cmd->add_option("--delta", cfg.delta, "margin (generalization)");
  verify_cmd->add_option("--alpha", cfg.alpha, "confidence level (generalization)");
  verify_cmd->add_option("--runs", cfg.runs, "training runs (generalization)");
  verify_cmd->add_option("--iters", cfg.train.iterations, "training iterations");
  verify_cmd->add_option("--class-size", class_size,
                         "random +/-1 tables in the symmetrization class");
  verify_cmd->add_flag("--force-zero", cfg.force_zero_model,
                       "score the zero model instead of training");
  verify_cmd->add_option("--out", out_path, "output path");
  std::string csv_path;
  verify_cmd->add_option("--csv", csv_path,
                         "also write the tail grid as plot-ready CSV");
  verify_cmd->callback([&] {
    const mixmkl::ChainPool pool = mixmkl::parse_pool(mixmkl::load_json_file(spec_path));
    if (!verify_mode.empty()) cfg.mode = parse_mode(verify_mode);
    json config = {{"which", which},  {"spec", spec_path}, {"seed", cfg.seed},
                   {"n", cfg.n},      {"trials", cfg.trials}};
    std::cerr << "seed: " << cfg.seed << "\n";

    bool passed = true;
    json body;
    if (which == "spectral") {
      const mixmkl::SpectralRelationsReport r = mixmkl::verify_spectral_relations(pool);
      body = mixmkl::to_json(r);
      passed = r.all_pass;
    } else if (which == "mcdiarmid" || which == "bernstein") {
      cfg.grid = grid_text.empty()
                     ? (which == "mcdiarmid" ? parse_grid("0.02:0.02:0.20")
                                             : parse_grid("0.05:0.05:0.50"))
                     : parse_grid(grid_text);
      cfg.g = g_text.empty() ? default_state_function(pool.n_states())
                             : parse_values(g_text);
      config["grid"] = cfg.grid;
      const mixmkl::TailReport r = which == "mcdiarmid"
                                       ? mixmkl::verify_mcdiarmid(pool, cfg)
                                       : mixmkl::verify_bernstein(pool, cfg);
      body = mixmkl::to_json(r);
      if (!csv_path.empty()) emit(mixmkl::tail_report_csv(r), csv_path);
      passed = r.all_pass;
    } else if (which == "symmetrization") {
      mixmkl::CounterRng rng(cfg.seed, {0x636c617373ULL});
      for (int f = 0; f < class_size; ++f) {
        Eigen::VectorXd table(pool.n_states());
        for (int s = 0; s < pool.n_states(); ++s) table[s] = rng.next_sign();
        cfg.function_class.push_back(table);
      }
      config["class_size"] = class_size;
      const mixmkl::SymmetrizationReport r = mixmkl::verify_symmetrization(pool, cfg);
      body = mixmkl::to_json(r);
      passed = r.pass;
    } else if (which == "generalization") {
      if (family_path.empty())
        throw mixmkl::ConfigError("generalization needs --family");
      cfg.family = mixmkl::parse_family(mixmkl::load_json_file(family_path));
      config["family"] = family_path;
      config["runs"] = cfg.runs;
      const mixmkl::GeneralizationReport r = mixmkl::verify_generalization(pool, cfg);
      body = mixmkl::to_json(r);
      passed = r.pass;
    } else {
      throw mixmkl::ConfigError("unknown verification suite \"" + which + "\"");
    }
    emit_report(body, config, out_path);
    if (!passed) exit_code = kExitVerifyFailed;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const mixmkl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return exit_code;
}
