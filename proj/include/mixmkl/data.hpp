#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixmkl/error.hpp"
#include "mixmkl/pool.hpp"
#include "mixmkl/rng.hpp"

namespace mixmkl {

enum class AssignMode { probabilistic, proportional };

struct Sample {
  Eigen::VectorXd feature;
  int label = 0;  // -1 / +1, 0 while unset
  int chain_id = 0;
  int state_id = 0;
};

struct MixedDataset {
  std::vector<Sample> samples;
  std::vector<std::vector<int>> partitions;  // T_P: sample indices per chain
  int feature_dim = 0;

  int size() const { return static_cast<int>(samples.size()); }
};

// ---------------------------------------------------------------------------
// State-level simulation (shared by the dataset generator and the Monte-Carlo
// verification loops, which do not need feature vectors)
// ---------------------------------------------------------------------------

struct StateSequence {
  std::vector<int> chain_ids;
  std::vector<int> states;
};

namespace detail {

inline std::vector<int> assign_chains(const ChainPool& pool, int n,
                                      std::uint64_t seed, AssignMode mode) {
  const Eigen::VectorXd weights = pool.weights();
  std::vector<int> ids(static_cast<std::size_t>(n));
  CounterRng rng(seed, {kTagAssign});
  if (mode == AssignMode::probabilistic) {
    for (int i = 0; i < n; ++i)
      ids[static_cast<std::size_t>(i)] = rng.next_categorical(weights);
  } else {
    const std::vector<int> sizes = allocate_proportional(weights, n);
    int cursor = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c)
      for (int k = 0; k < sizes[c]; ++k) ids[static_cast<std::size_t>(cursor++)] = static_cast<int>(c);
    // Fisher-Yates interleave so fixed proportions still produce a mixed order.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
  }
  return ids;
}

}  // namespace detail

// Draws the interleaved chain-id/state sequence. Each chain's sub-sequence is
// a Markov path started from the pool initial distribution; its draws come
// from a stream keyed by (seed, chain), position-indexed, so they do not
// depend on how the chains interleave.
inline StateSequence simulate_states(const ChainPool& pool, int n, std::uint64_t seed,
                                     AssignMode mode = AssignMode::probabilistic) {
  validate_pool(pool);
  if (n < 1) throw InvalidArgument("n must be >= 1");
  StateSequence seq;
  seq.chain_ids = detail::assign_chains(pool, n, seed, mode);
  seq.states.resize(static_cast<std::size_t>(n));

  const int chains = pool.size();
  std::vector<CounterRng> streams;
  streams.reserve(static_cast<std::size_t>(chains));
  std::vector<int> prev_state(static_cast<std::size_t>(chains), -1);
  for (int c = 0; c < chains; ++c)
    streams.emplace_back(fold(derive_key(seed, {kTagState}), static_cast<std::uint64_t>(c)));

  for (int i = 0; i < n; ++i) {
    const int c = seq.chain_ids[static_cast<std::size_t>(i)];
    auto& rng = streams[static_cast<std::size_t>(c)];
    const auto& chain = pool.chains[static_cast<std::size_t>(c)].chain;
    int state;
    if (prev_state[static_cast<std::size_t>(c)] < 0) {
      state = rng.next_categorical(pool.initial.probs);
    } else {
      state = rng.next_categorical(
          chain.transition.rows.row(prev_state[static_cast<std::size_t>(c)]).transpose());
    }
    prev_state[static_cast<std::size_t>(c)] = state;
    seq.states[static_cast<std::size_t>(i)] = state;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

inline MixedDataset generate_features(const ChainPool& pool, int n, std::uint64_t seed,
                                      AssignMode mode = AssignMode::probabilistic) {
  if (pool.chains.empty()) throw EmptyPool("pool has no chains");
  const StateSequence seq = simulate_states(pool, n, seed, mode);

  MixedDataset ds;
  ds.feature_dim = pool.chains.front().chain.feature_dim();
  for (const auto& wc : pool.chains)
    if (wc.chain.feature_dim() != ds.feature_dim)
      throw DimensionMismatch("chains disagree on feature dimension");

  ds.samples.resize(static_cast<std::size_t>(n));
  ds.partitions.assign(static_cast<std::size_t>(pool.size()), {});
  for (int i = 0; i < n; ++i) {
    const int c = seq.chain_ids[static_cast<std::size_t>(i)];
    const int s = seq.states[static_cast<std::size_t>(i)];
    auto& sample = ds.samples[static_cast<std::size_t>(i)];
    sample.chain_id = c;
    sample.state_id = s;
    sample.feature = pool.chains[static_cast<std::size_t>(c)].chain.feature(s);
    ds.partitions[static_cast<std::size_t>(c)].push_back(i);
  }
  return ds;
}

inline MixedDataset emit_labels(const MixedDataset& input, const ChainPool& pool,
                                std::uint64_t seed) {
  for (const auto& wc : pool.chains)
    if (!wc.chain.emission)
      throw MissingEmissionTable("a pool chain has no emission table");
  MixedDataset ds = input;
  for (std::size_t c = 0; c < ds.partitions.size(); ++c) {
    const auto& emission = *pool.chains[c].chain.emission;
    CounterRng rng(fold(derive_key(seed, {kTagLabel}), static_cast<std::uint64_t>(c)));
    for (int idx : ds.partitions[c]) {
      auto& sample = ds.samples[static_cast<std::size_t>(idx)];
      const int clean = emission.sign(sample.state_id);
      const double u = rng.next_unit();
      sample.label = (u < emission.flip[sample.state_id]) ? -clean : clean;
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV round trip
// ---------------------------------------------------------------------------

inline void write_csv(const MixedDataset& ds, std::ostream& os) {
  os << "index,chain_id,state_id,label";
  for (int d = 1; d <= ds.feature_dim; ++d) os << ",f_" << d;
  os << "\n";
  char buf[40];
  for (int i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[static_cast<std::size_t>(i)];
    os << i << ',' << s.chain_id << ',' << s.state_id << ',' << s.label;
    for (int d = 0; d < ds.feature_dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.feature[d]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

inline MixedDataset read_csv(std::istream& is) {
  MixedDataset ds;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty CSV");
  int columns = 1;
  for (char ch : line)
    if (ch == ',') ++columns;
  if (columns < 4) throw ParseError("CSV header too short");
  ds.feature_dim = columns - 4;

  int max_chain = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    auto next_cell = [&]() {
      if (!std::getline(ss, cell, ',')) throw ParseError("short CSV row");
      return cell;
    };
    next_cell();  // index (positional, ignored)
    Sample s;
    s.chain_id = std::stoi(next_cell());
    s.state_id = std::stoi(next_cell());
    s.label = std::stoi(next_cell());
    s.feature.resize(ds.feature_dim);
    for (int d = 0; d < ds.feature_dim; ++d) s.feature[d] = std::stod(next_cell());
    max_chain = std::max(max_chain, s.chain_id);
    ds.samples.push_back(std::move(s));
  }
  ds.partitions.assign(static_cast<std::size_t>(max_chain + 1), {});
  for (int i = 0; i < ds.size(); ++i)
    ds.partitions[static_cast<std::size_t>(ds.samples[static_cast<std::size_t>(i)].chain_id)]
        .push_back(i);
  return ds;
}

}  // namespace mixmkl
