#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cftp/common.hpp"
#include "cftp/event.hpp"
#include "cftp/state.hpp"

namespace cftp {

namespace detail {

// rank-to-rank successor table, one entry per (state, event).
inline std::vector<std::vector<std::uint32_t>> successor_maps(const EventTable& table,
                                                              std::uint64_t n) {
  const auto& space = table.space();
  std::vector<std::vector<std::uint32_t>> maps(
      static_cast<std::size_t>(table.size()),
      std::vector<std::uint32_t>(static_cast<std::size_t>(n)));
  for (std::uint64_t r = 0; r < n; ++r) {
    const State x = space.unrank(r);
    for (int a = 0; a < table.size(); ++a)
      maps[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)] =
          static_cast<std::uint32_t>(space.rank(table.apply(x, a)));
  }
  return maps;
}

// Strongly connected components of the one-step support graph, iterative
// Tarjan. Returns the component id per state and the component count.
inline int scc_of_support(const std::vector<std::vector<std::uint32_t>>& maps, std::uint64_t n,
                          std::vector<int>& comp) {
  const int UNSEEN = -1;
  std::vector<int> index(static_cast<std::size_t>(n), UNSEEN), low(static_cast<std::size_t>(n));
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<std::uint32_t> stack;
  comp.assign(static_cast<std::size_t>(n), -1);
  int next_index = 0, components = 0;

  struct Frame {
    std::uint32_t v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (index[s] != UNSEEN) continue;
    call.push_back({s, 0});
    while (!call.empty()) {
      auto& f = call.back();
      if (f.edge == 0) {
        index[f.v] = low[f.v] = next_index++;
        stack.push_back(f.v);
        on_stack[f.v] = 1;
      }
      if (f.edge < maps.size()) {
        const std::uint32_t w = maps[f.edge][f.v];
        ++f.edge;
        if (index[w] == UNSEEN) {
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      if (low[f.v] == index[f.v]) {
        for (;;) {
          const std::uint32_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = components;
          if (w == f.v) break;
        }
        ++components;
      }
      const std::uint32_t child = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[child]);
    }
  }
  return components;
}

}  // namespace detail

// Exact stationary distribution of the chain induced by the table, solved
// densely for small spaces and by damped power iteration otherwise, to a
// residual of 1e-12 in the infinity norm. The chain must be irreducible;
// aperiodicity is the caller's lookout. Oracle-grade code: not for hot paths.
inline std::vector<double> stationary_solve(const EventTable& table,
                                            std::uint64_t oracle_limit = kDefaultOracleLimit) {
  const auto& space = table.space();
  const auto card = space.cardinality(oracle_limit);
  if (!card)
    throw OracleLimitError("state space exceeds the oracle limit of " +
                           std::to_string(oracle_limit) + " states");
  const std::uint64_t n = *card;
  const auto maps = detail::successor_maps(table, n);

  std::vector<int> comp;
  const int ncomp = detail::scc_of_support(maps, n, comp);
  if (ncomp != 1) {
    std::string msg = "chain is reducible: " + std::to_string(ncomp) + " strata;";
    std::vector<char> seen(static_cast<std::size_t>(ncomp), 0);
    int shown = 0;
    for (std::uint64_t r = 0; r < n && shown < 4; ++r) {
      if (!seen[static_cast<std::size_t>(comp[static_cast<std::size_t>(r)])]) {
        seen[static_cast<std::size_t>(comp[static_cast<std::size_t>(r)])] = 1;
        msg += " stratum " + std::to_string(comp[static_cast<std::size_t>(r)]) + " holds " +
               to_string(space.unrank(r)) + ";";
        ++shown;
      }
    }
    throw ConfigError(msg);
  }

  std::vector<double> prob(static_cast<std::size_t>(table.size()));
  {
    double total = 0;
    for (int a = 0; a < table.size(); ++a) {
      prob[static_cast<std::size_t>(a)] = table.event(a).rate.get_d();
      total += prob[static_cast<std::size_t>(a)];
    }
    for (auto& p : prob) p /= total;
  }

  auto step = [&](const std::vector<double>& pi, std::vector<double>& out) {
    out.assign(pi.size(), 0.0);
    for (int a = 0; a < table.size(); ++a) {
      const auto& map = maps[static_cast<std::size_t>(a)];
      const double pa = prob[static_cast<std::size_t>(a)];
      for (std::uint64_t r = 0; r < n; ++r)
        out[map[static_cast<std::size_t>(r)]] += pa * pi[static_cast<std::size_t>(r)];
    }
  };
  auto residual = [&](const std::vector<double>& pi) {
    std::vector<double> next;
    step(pi, next);
    double res = 0;
    for (std::uint64_t r = 0; r < n; ++r)
      res = std::max(res, std::abs(next[static_cast<std::size_t>(r)] -
                                   pi[static_cast<std::size_t>(r)]));
    return res;
  };

  std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  if (n <= 2048) {
    // pi (P - I) = 0 with one equation replaced by normalization.
    const int ni = static_cast<int>(n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, ni);
    for (int a = 0; a < table.size(); ++a)
      for (int r = 0; r < ni; ++r)
        A(static_cast<int>(maps[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)]), r) +=
            prob[static_cast<std::size_t>(a)];
    A -= Eigen::MatrixXd::Identity(ni, ni);
    A.row(0).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ni);
    b(0) = 1.0;
    Eigen::VectorXd sol = A.partialPivLu().solve(b);
    for (int r = 0; r < ni; ++r) pi[static_cast<std::size_t>(r)] = std::max(0.0, sol(r));
  }
  // Damped power refinement; (P + I)/2 shares the fixed point and is
  // aperiodic even when P is not.
  std::vector<double> next;
  for (int it = 0; it < 200'000; ++it) {
    if (residual(pi) <= 1e-12) break;
    step(pi, next);
    for (std::uint64_t r = 0; r < n; ++r)
      pi[static_cast<std::size_t>(r)] =
          0.5 * (pi[static_cast<std::size_t>(r)] + next[static_cast<std::size_t>(r)]);
  }
  double sum = 0;
  for (double p : pi) sum += p;
  for (auto& p : pi) p /= sum;
  if (residual(pi) > 1e-12)
    throw ConfigError("stationary solve did not reach the 1e-12 residual target");
  return pi;
}

}  // namespace cftp
