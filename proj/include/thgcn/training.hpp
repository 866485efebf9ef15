#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "thgcn/gcn.hpp"
#include "thgcn/graph.hpp"
#include "thgcn/matrix.hpp"
#include "thgcn/rng.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

// Row indices into the embedding matrix.
struct Triplet {
  int anchor_row;
  int positive_row;
  int negative_row;
};

// One triplet per served vehicle: anchor = vehicle, positive = its serving
// tower, negative drawn uniformly among the other towers, preferring
// out-of-range ones so distant towers are pushed away hardest.
inline std::vector<Triplet> sample_triplets(const GraphSnapshot& s, RngStream& rng) {
  std::vector<Triplet> out;
  std::vector<char> reachable(s.n_towers);
  for (int v = 0; v < s.n_vehicles; ++v) {
    int pos = s.serving[v];
    if (pos < 0) continue;
    std::fill(reachable.begin(), reachable.end(), 0);
    for (int t : s.in_range[v]) reachable[t] = 1;
    std::vector<int> far, near;
    for (int t = 0; t < s.n_towers; ++t) {
      if (t == pos) continue;
      (reachable[t] ? near : far).push_back(t);
    }
    const std::vector<int>& pool = far.empty() ? near : far;
    if (pool.empty()) continue;
    int neg = pool[rng.uniform_int(pool.size())];
    out.push_back({s.vehicle_row(v), s.tower_row(pos), s.tower_row(neg)});
  }
  return out;
}

inline double row_distance(const Matrix& e, int i, int j) {
  double s = 0.0;
  for (std::size_t o = 0; o < e.cols(); ++o) {
    double d = e(i, o) - e(j, o);
    s += d * d;
  }
  return std::sqrt(s);
}

// max(||e_a - e_p|| - ||e_a - e_n|| + margin, 0)
inline double triplet_hinge(const Matrix& e, const Triplet& t, double margin) {
  double dap = row_distance(e, t.anchor_row, t.positive_row);
  double dan = row_distance(e, t.anchor_row, t.negative_row);
  return std::max(dap - dan + margin, 0.0);
}

inline double triplet_loss(const Matrix& e, const std::vector<Triplet>& triplets,
                           double margin) {
  if (triplets.empty()) return 0.0;
  double s = 0.0;
  for (const Triplet& t : triplets) s += triplet_hinge(e, t, margin);
  return s / static_cast<double>(triplets.size());
}

struct Gradients {
  Matrix dW1;
  Matrix dW2;
};

// Analytic gradients of the mean triplet loss. dL/dE collects the hinge
// subgradients (zero for inactive hinges and for coincident embeddings, where
// the norm is not differentiable), then flows back through
// E = N H1 W2, H1 = ReLU(N X W1) using the cached intermediates.
inline Gradients backward(const ForwardCache& c, const GcnParams& params,
                          const std::vector<Triplet>& triplets, double margin) {
  Matrix g(c.E.rows(), c.E.cols());
  const std::size_t out = c.E.cols();
  const double scale =
      triplets.empty() ? 0.0 : 1.0 / static_cast<double>(triplets.size());
  for (const Triplet& t : triplets) {
    const double* ea = c.E.row(t.anchor_row);
    const double* ep = c.E.row(t.positive_row);
    const double* en = c.E.row(t.negative_row);
    double dap = row_distance(c.E, t.anchor_row, t.positive_row);
    double dan = row_distance(c.E, t.anchor_row, t.negative_row);
    if (dap - dan + margin <= 0.0) continue;
    if (dap > 0.0) {
      double* ga = g.row(t.anchor_row);
      double* gp = g.row(t.positive_row);
      for (std::size_t o = 0; o < out; ++o) {
        double u = scale * (ea[o] - ep[o]) / dap;
        ga[o] += u;
        gp[o] -= u;
      }
    }
    if (dan > 0.0) {
      double* ga = g.row(t.anchor_row);
      double* gn = g.row(t.negative_row);
      for (std::size_t o = 0; o < out; ++o) {
        double u = scale * (ea[o] - en[o]) / dan;
        ga[o] -= u;
        gn[o] += u;
      }
    }
  }

  Gradients grads;
  grads.dW2 = matmul_transA(c.M, g);            // M^T dE
  Matrix dm = matmul_transB(g, params.W2);      // dE W2^T
  Matrix dh1 = matmul(c.nhat, dm);              // N^T dM, N symmetric
  Matrix da1 = relu_backward(dh1, c.A1);
  grads.dW1 = matmul_transA(c.P, da1);          // P^T dA1
  return grads;
}

inline void sgd_step(GcnParams& p, const Gradients& g, double lr) {
  sub_scaled(p.W1, g.dW1, lr);
  sub_scaled(p.W2, g.dW2, lr);
}

struct EpochStats {
  int epoch;
  double mean_loss;
  std::size_t n_triplets;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  bool skipped = false;  // no served vehicle had a usable negative
};

// Full-batch SGD on one snapshot. The normalization N and propagated features
// P = N X depend only on the snapshot, so they are computed once and reused
// across epochs. Triplet sampling draws from a per-epoch child stream, which
// keeps training reproducible regardless of how far the caller's stream has
// advanced.
inline TrainResult train_interval(GcnParams& params, const GraphSnapshot& s,
                                  const GcnConfig& cfg, RngStream rng) {
  TrainResult result;
  if (cfg.epochs == 0) return result;
  Matrix nhat = normalized_adjacency(s);
  Matrix p = matmul(nhat, s.X);
  for (int e = 0; e < cfg.epochs; ++e) {
    RngStream es = rng.child("epoch", static_cast<std::uint64_t>(e));
    std::vector<Triplet> triplets = sample_triplets(s, es);
    if (triplets.empty()) {
      // Triplet availability is structural (it depends on serving and
      // range sets, not on the draw), so the whole interval is skipped.
      result.skipped = true;
      result.epochs.clear();
      return result;
    }
    ForwardCache c = forward_with(nhat, p, params);
    double loss = triplet_loss(c.E, triplets, cfg.margin);
    Gradients g = backward(c, params, triplets, cfg.margin);
    sgd_step(params, g, cfg.learning_rate);
    result.epochs.push_back({e, loss, triplets.size()});
  }
  return result;
}

}  // namespace thgcn
