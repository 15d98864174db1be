#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixmkl/bounds.hpp"
#include "mixmkl/chain.hpp"
#include "mixmkl/data.hpp"
#include "mixmkl/error.hpp"
#include "mixmkl/kernels.hpp"
#include "mixmkl/mkl.hpp"
#include "mixmkl/pool.hpp"
#include "mixmkl/verify.hpp"
#include "mixmkl/version.hpp"

namespace mixmkl {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected an array of rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols) throw ParseError("ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace detail

// Chain schema: { "states": n, "rows": [[...]] } plus optional "embedding"
// (per-state feature rows; one-hot when absent), "emission_flip" (per-state
// flip probability) and "positive" (states whose clean label is +1; defaults
// to the upper half of the state indices).
inline Chain parse_chain(const json& j) {
  if (!j.contains("rows")) throw ParseError("chain spec needs \"rows\"");
  Chain chain;
  chain.transition = validate_chain(detail::matrix_from_json(j["rows"]));
  const int n = chain.n_states();
  if (j.contains("states") && j["states"].get<int>() != n)
    throw ParseError("\"states\" disagrees with the row count");

  if (j.contains("embedding")) {
    const json& emb = j["embedding"];
    if (static_cast<int>(emb.size()) != n)
      throw ParseError("embedding must have one row per state");
    for (const auto& row : emb)
      chain.embedding.push_back(detail::vector_from_json(row));
    for (const auto& e : chain.embedding)
      if (e.size() != chain.embedding.front().size())
        throw ParseError("embedding rows differ in dimension");
  }

  if (j.contains("emission_flip")) {
    Emission em;
    em.flip = detail::vector_from_json(j["emission_flip"]);
    if (em.flip.size() != n)
      throw ParseError("emission_flip must have one entry per state");
    for (int s = 0; s < n; ++s)
      if (em.flip[s] < 0.0 || em.flip[s] > 1.0)
        throw ParseError("emission_flip entries must lie in [0,1]");
    if (j.contains("positive"))
      em.positive_states = j["positive"].get<std::vector<int>>();
    else
      em.positive_states = default_positive_states(n);
    for (int s : em.positive_states)
      if (s < 0 || s >= n) throw ParseError("positive state index out of range");
    chain.emission = std::move(em);
  }
  return chain;
}

// Pool schema: { "chains": [chain spec + "weight"], "initial": [...] }.
// "initial" defaults to the first chain's stationary distribution.
inline ChainPool parse_pool(const json& j) {
  if (!j.contains("chains") || j["chains"].empty())
    throw ParseError("pool spec needs a non-empty \"chains\" array");
  ChainPool pool;
  for (const auto& cj : j["chains"]) {
    WeightedChain wc;
    wc.chain = parse_chain(cj);
    wc.weight = cj.value("weight", 1.0 / static_cast<double>(j["chains"].size()));
    pool.chains.push_back(std::move(wc));
  }
  if (j.contains("initial"))
    pool.initial = validate_distribution(detail::vector_from_json(j["initial"]));
  else
    pool.initial = stationary_distribution(pool.chains.front().chain.transition);
  validate_pool(pool);
  return pool;
}

// Family schema: { "B": , "q": , "kernels": [{"kind": "gaussian", "sigma": },
// {"kind": "linear"}, {"kind": "polynomial", "degree": , "offset": }] }.
inline KernelFamily parse_family(const json& j) {
  if (!j.contains("kernels") || j["kernels"].empty())
    throw ParseError("family spec needs a non-empty \"kernels\" array");
  KernelFamily family;
  family.B = j.value("B", 1.0);
  family.q = j.value("q", 1.0);
  if (family.B <= 0.0) throw ParseError("B must be positive");
  if (family.q < 1.0) throw ParseError("q must be >= 1");
  for (const auto& kj : j["kernels"]) {
    const std::string kind = kj.value("kind", "");
    if (kind == "linear") {
      family.base.push_back(KernelSpec::linear());
    } else if (kind == "gaussian") {
      if (!kj.contains("sigma")) throw ParseError("gaussian kernel needs \"sigma\"");
      family.base.push_back(KernelSpec::gaussian(kj["sigma"].get<double>()));
    } else if (kind == "polynomial") {
      family.base.push_back(
          KernelSpec::polynomial(kj.value("degree", 1), kj.value("offset", 0.0)));
    } else {
      throw ParseError("unknown kernel kind \"" + kind + "\"");
    }
  }
  return family;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const Distribution& d) {
  json out = json::array();
  for (int i = 0; i < d.size(); ++i) out.push_back(d.probs[i]);
  return out;
}

inline json to_json(const PerChainSummary& pc) {
  json out;
  out["gamma_star"] = pc.gamma_star;
  out["lambda"] = pc.lambda;
  out["is_reversible"] = pc.is_reversible;
  if (pc.gamma_reversible) out["gamma_reversible"] = *pc.gamma_reversible;
  out["gamma_ps"] = pc.gamma_ps;
  out["k_star"] = pc.k_star;
  out["tau_min"] = pc.tau_min;
  out["t_mix_quarter"] = pc.t_mix_quarter;
  out["t_mix_grid"] = pc.t_mix_grid;
  out["pi"] = to_json(pc.pi);
  out["pi_min"] = pc.pi_min;
  out["d1"] = pc.d1;
  out["chi"] = pc.chi;
  return out;
}

inline json to_json(const PoolSummary& s) {
  json out;
  out["tau_min"] = s.tau_min;
  out["gamma_aps"] = s.gamma_aps;
  out["eta"] = s.eta;
  out["eps_grid"] = s.eps_grid;
  out["t_amix"] = s.t_amix;
  out["t_amix_quarter"] = s.t_amix_quarter;
  json chains = json::array();
  for (const auto& pc : s.per_chain) chains.push_back(to_json(pc));
  out["per_chain"] = chains;
  return out;
}

inline json to_json(const BoundInputs& in) {
  json out;
  out["n"] = in.n;
  out["m"] = in.m;
  out["B"] = in.B;
  out["kappa"] = in.kappa;
  out["delta"] = in.delta;
  out["alpha"] = in.alpha;
  out["c_chaos"] = in.c_chaos;
  if (in.tau_min) out["tau_min"] = *in.tau_min;
  if (in.b_n) out["b_n"] = *in.b_n;
  if (in.q) out["q"] = *in.q;
  if (in.r) out["r"] = *in.r;
  if (in.d_k) out["d_k"] = *in.d_k;
  return out;
}

inline json to_json(const BoundReport& r) {
  json out;
  out["kind"] = r.kind;
  out["value"] = r.value;
  out["terms"] = {{"complexity", r.terms.complexity},
                  {"concentration", r.terms.concentration},
                  {"b_n", r.terms.bn}};
  out["inputs"] = to_json(r.inputs);
  if (r.m_subterm) out["m_subterm"] = *r.m_subterm;
  if (r.log2_variant) out["log2_variant"] = *r.log2_variant;
  return out;
}

inline json to_json(const TailReport& r) {
  json out;
  out["kind"] = r.kind;
  out["grid"] = r.grid;
  out["empirical"] = r.empirical;
  out["stderr"] = r.stderr_;
  out["bound"] = r.bound;
  json pass = json::array();
  for (bool p : r.pass) pass.push_back(p);
  out["pass"] = pass;
  out["all_pass"] = r.all_pass;
  out["sanity_ok"] = r.sanity_ok;
  out["trials"] = r.trials;
  out["center"] = r.center;
  out["seed"] = r.seed;
  json constants;
  if (r.tau_min > 0.0) constants["tau_min"] = r.tau_min;
  if (r.gamma_aps > 0.0) constants["gamma_aps"] = r.gamma_aps;
  if (r.eta > 0.0) constants["eta"] = r.eta;
  if (r.v_f > 0.0) constants["v_f"] = r.v_f;
  if (r.c_coord > 0.0) constants["c_coord"] = r.c_coord;
  if (r.m_bound > 0.0) constants["m_bound"] = r.m_bound;
  out["constants"] = constants;
  return out;
}

// Plot-ready CSV: grid, empirical, bound, stderr.
inline std::string tail_report_csv(const TailReport& r) {
  std::ostringstream os;
  os << "grid,empirical,bound,stderr\n";
  char buf[128];
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", r.grid[i],
                  r.empirical[i], r.bound[i], r.stderr_[i]);
    os << buf << "\n";
  }
  return os.str();
}

inline json to_json(const SymmetrizationReport& r) {
  json out;
  out["lhs"] = r.lhs;
  out["lhs_stderr"] = r.lhs_stderr;
  out["pn0"] = r.pn0;
  out["pn0_stderr"] = r.pn0_stderr;
  out["a_n"] = r.a_n;
  out["rhs"] = r.rhs;
  out["combined_stderr"] = r.combined_stderr;
  out["pass"] = r.pass;
  out["trials"] = r.trials;
  out["seed"] = r.seed;
  out["m_bound"] = r.m_bound;
  return out;
}

inline json to_json(const GeneralizationReport& r) {
  json out;
  out["runs"] = r.runs;
  out["coverage"] = r.coverage;
  out["threshold"] = r.threshold;
  out["pass"] = r.pass;
  out["bound"] = r.bound;
  out["tau_min"] = r.tau_min;
  out["b_n"] = r.b_n;
  out["kappa"] = r.kappa_value;
  out["seed"] = r.seed;
  double min_slack = std::numeric_limits<double>::infinity();
  double mean_slack = 0.0;
  for (double s : r.slack) {
    min_slack = std::min(min_slack, s);
    mean_slack += s;
  }
  if (!r.slack.empty()) mean_slack /= static_cast<double>(r.slack.size());
  out["slack"] = {{"min", min_slack}, {"mean", mean_slack}};
  return out;
}

inline json to_json(const SpectralRelationsReport& r) {
  json out;
  out["all_pass"] = r.all_pass;
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back(
        {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}});
  }
  out["checks"] = checks;
  return out;
}

inline json model_to_json(const MklModel& m) {
  json out;
  out["B"] = m.B;
  out["delta"] = m.delta;
  out["q"] = m.q;
  out["final_objective"] = m.final_objective;
  out["objective_history"] = m.objective_history;
  json alpha = json::array();
  for (int i = 0; i < m.alpha.size(); ++i) alpha.push_back(m.alpha[i]);
  out["alpha"] = alpha;
  json eta = json::array();
  for (int i = 0; i < m.eta.eta.size(); ++i) eta.push_back(m.eta.eta[i]);
  out["eta"] = eta;
  json kernels = json::array();
  for (const auto& k : m.family.base) {
    json kj;
    switch (k.kind) {
      case KernelSpec::Kind::linear:
        kj["kind"] = "linear";
        break;
      case KernelSpec::Kind::gaussian:
        kj["kind"] = "gaussian";
        kj["sigma"] = k.sigma;
        break;
      case KernelSpec::Kind::polynomial:
        kj["kind"] = "polynomial";
        kj["degree"] = k.degree;
        kj["offset"] = k.offset;
        break;
    }
    kernels.push_back(kj);
  }
  out["family"] = {{"B", m.family.B}, {"q", m.family.q}, {"kernels", kernels}};
  json points = json::array();
  for (const auto& p : m.train_points) {
    json row = json::array();
    for (int i = 0; i < p.size(); ++i) row.push_back(p[i]);
    points.push_back(row);
  }
  out["train_points"] = points;
  return out;
}

inline MklModel model_from_json(const json& j) {
  MklModel m;
  m.B = j.at("B").get<double>();
  m.delta = j.at("delta").get<double>();
  m.q = j.at("q").get<double>();
  m.final_objective = j.value("final_objective", 0.0);
  if (j.contains("objective_history"))
    m.objective_history = j["objective_history"].get<std::vector<double>>();
  m.alpha = detail::vector_from_json(j.at("alpha"));
  m.eta = CombinationWeights{detail::vector_from_json(j.at("eta"))};
  m.family = parse_family(j.at("family"));
  for (const auto& row : j.at("train_points"))
    m.train_points.push_back(detail::vector_from_json(row));
  return m;
}

// Every emitted report embeds the tool version and the resolved settings so
// identical invocations produce byte-identical files.
inline json wrap_report(const json& body, const json& resolved_config) {
  json out;
  out["version"] = kVersion;
  out["config"] = resolved_config;
  out["report"] = body;
  return out;
}

}  // namespace mixmkl
