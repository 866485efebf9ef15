#pragma once

// Shared helpers for the unit tests and the acceptance harness. The forward
// oracle here deliberately avoids the library's Matrix kernels: it walks the
// snapshot edge list with plain loops so it can catch bugs in both the
// normalization and the optimized matmul path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "thgcn/gcn.hpp"
#include "thgcn/graph.hpp"
#include "thgcn/matrix.hpp"
#include "thgcn/rng.hpp"
#include "thgcn/scenario.hpp"
#include "thgcn/training.hpp"

namespace thgcn::testing {

// Random bipartite snapshot with up to max_vehicles + max_towers nodes.
// Features are arbitrary values in [0, 1]; edge weights in (0, 1]; each
// vehicle-tower pair is joined with probability edge_prob.
inline GraphSnapshot random_snapshot(RngStream& rng, int max_vehicles,
                                     int max_towers, double edge_prob = 0.6) {
  GraphSnapshot s;
  s.timestamp_s = 0.0;
  s.n_vehicles = 1 + static_cast<int>(rng.uniform_int(max_vehicles));
  s.n_towers = 1 + static_cast<int>(rng.uniform_int(max_towers));
  s.X = Matrix(s.n_nodes(), kFeatureDim);
  for (std::size_t i = 0; i < s.X.size(); ++i) s.X.data()[i] = rng.uniform();
  for (int v = 0; v < s.n_vehicles; ++v) {
    for (int t = 0; t < s.n_towers; ++t) {
      if (rng.uniform() < edge_prob) {
        s.edges.emplace_back(s.vehicle_row(v), s.tower_row(t));
        s.edge_weights.push_back(0.05 + 0.95 * rng.uniform());
      }
    }
  }
  s.serving.assign(s.n_vehicles, -1);
  s.in_range.assign(s.n_vehicles, {});
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    int v = s.edges[e].first;
    int t = s.edges[e].second - s.n_vehicles;
    s.in_range[v].push_back(t);
    if (s.serving[v] < 0) s.serving[v] = t;
  }
  return s;
}

inline GcnParams random_params(RngStream& rng, int hidden, int out) {
  GcnParams p;
  p.W1 = Matrix(kFeatureDim, hidden);
  for (std::size_t i = 0; i < p.W1.size(); ++i)
    p.W1.data()[i] = rng.uniform(-0.5, 0.5);
  p.W2 = Matrix(hidden, out);
  for (std::size_t i = 0; i < p.W2.size(); ++i)
    p.W2.data()[i] = rng.uniform(-0.5, 0.5);
  return p;
}

// Dense adjacency with unit self-loops, built straight from the edge list.
inline std::vector<std::vector<double>> oracle_adjacency(const GraphSnapshot& s) {
  int n = s.n_nodes();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) a[i][i] = 1.0;
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    a[s.edges[e].first][s.edges[e].second] = s.edge_weights[e];
    a[s.edges[e].second][s.edges[e].first] = s.edge_weights[e];
  }
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += a[i][j];
    dinv[i] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] *= dinv[i] * dinv[j];
  return a;
}

// Two-layer forward pass with explicit loops: H1 = ReLU(N X W1), E = N H1 W2.
inline std::vector<std::vector<double>> oracle_forward(const GraphSnapshot& s,
                                                       const GcnParams& params) {
  auto nh = oracle_adjacency(s);
  int n = s.n_nodes();
  int hidden = static_cast<int>(params.W1.cols());
  int out = static_cast<int>(params.W2.cols());

  std::vector<std::vector<double>> p(n, std::vector<double>(kFeatureDim, 0.0));
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < kFeatureDim; ++f)
      for (int j = 0; j < n; ++j) p[i][f] += nh[i][j] * s.X(j, f);

  std::vector<std::vector<double>> h1(n, std::vector<double>(hidden, 0.0));
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < hidden; ++h) {
      double acc = 0.0;
      for (int f = 0; f < kFeatureDim; ++f) acc += p[i][f] * params.W1(f, h);
      h1[i][h] = acc > 0.0 ? acc : 0.0;
    }

  std::vector<std::vector<double>> m(n, std::vector<double>(hidden, 0.0));
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < hidden; ++h)
      for (int j = 0; j < n; ++j) m[i][h] += nh[i][j] * h1[j][h];

  std::vector<std::vector<double>> e(n, std::vector<double>(out, 0.0));
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < out; ++o)
      for (int h = 0; h < hidden; ++h) e[i][o] += m[i][h] * params.W2(h, o);
  return e;
}

inline double max_abs_diff_vs(const Matrix& got,
                              const std::vector<std::vector<double>>& want) {
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(got.rows()); ++i)
    for (int j = 0; j < static_cast<int>(got.cols()); ++j)
      worst = std::max(worst, std::abs(got(i, j) - want[i][j]));
  return worst;
}

// A finite-difference case is only meaningful away from the loss kinks:
// a ReLU flip or a hinge (de)activation inside the probe step makes the
// two-sided difference measure a different piecewise branch.
inline bool safely_differentiable(const ForwardCache& c,
                                  const std::vector<Triplet>& triplets,
                                  double margin) {
  for (std::size_t i = 0; i < c.A1.size(); ++i)
    if (std::abs(c.A1.data()[i]) < 1e-3) return false;
  for (const Triplet& t : triplets) {
    double dap = row_distance(c.E, t.anchor_row, t.positive_row);
    double dan = row_distance(c.E, t.anchor_row, t.negative_row);
    if (dap < 1e-3 || dan < 1e-3) return false;
    if (std::abs(dap - dan + margin) < 1e-3) return false;
  }
  return true;
}

inline double loss_at(const GraphSnapshot& s, const GcnParams& params,
                      const std::vector<Triplet>& triplets, double margin) {
  return triplet_loss(forward(s, params), triplets, margin);
}

// Central finite differences, step 1e-5, worst relative error over every
// entry of W1 and W2.
inline double max_rel_error_vs_fd(const GraphSnapshot& s, GcnParams params,
                                  const std::vector<Triplet>& triplets,
                                  double margin) {
  ForwardCache c = forward_cached(s, params);
  Gradients g = backward(c, params, triplets, margin);
  const double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](Matrix& w, const Matrix& dw) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      double saved = w.data()[i];
      w.data()[i] = saved + h;
      double up = loss_at(s, params, triplets, margin);
      w.data()[i] = saved - h;
      double down = loss_at(s, params, triplets, margin);
      w.data()[i] = saved;
      double fd = (up - down) / (2.0 * h);
      double a = dw.data()[i];
      double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-5});
      if (rel > worst) worst = rel;
    }
  };
  probe(params.W1, g.dW1);
  probe(params.W2, g.dW2);
  return worst;
}

// Repeated argmax with the same (similarity, SINR, id) key as the library's
// ranking, kept deliberately naive.
inline std::vector<int> brute_force_top3(
    const std::vector<double>& sim, std::vector<int> pool,
    const std::vector<std::optional<double>>& m) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<int> out;
  while (!pool.empty() && out.size() < 3) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      int x = pool[i], y = pool[best];
      double sx = m[x] ? *m[x] : neg_inf;
      double sy = m[y] ? *m[y] : neg_inf;
      bool better = sim[x] > sim[y] ||
                    (sim[x] == sim[y] && (sx > sy || (sx == sy && x < y)));
      if (better) best = i;
    }
    out.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

}  // namespace thgcn::testing
