#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "thgcn/common.hpp"
#include "thgcn/graph.hpp"
#include "thgcn/matrix.hpp"
#include "thgcn/rng.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

struct GcnParams {
  Matrix W1;  // d_in x hidden
  Matrix W2;  // hidden x out
};

// Glorot-style uniform init in +-sqrt(6 / (fan_in + fan_out)), drawn from the
// training stream so runs are reproducible end to end.
inline GcnParams init_params(const GcnConfig& cfg, RngStream rng) {
  RngStream s = rng.child("init");
  GcnParams p;
  p.W1 = Matrix(kFeatureDim, cfg.hidden);
  double lim1 = std::sqrt(6.0 / (kFeatureDim + cfg.hidden));
  for (std::size_t i = 0; i < p.W1.size(); ++i)
    p.W1.data()[i] = s.uniform(-lim1, lim1);
  p.W2 = Matrix(cfg.hidden, cfg.out);
  double lim2 = std::sqrt(6.0 / (cfg.hidden + cfg.out));
  for (std::size_t i = 0; i < p.W2.size(); ++i)
    p.W2.data()[i] = s.uniform(-lim2, lim2);
  return p;
}

// N = D^(-1/2) (A ⊙ W + I) D^(-1/2): unit self-loops are added before the
// symmetric normalization so every degree is positive, including isolated
// nodes.
inline Matrix normalized_adjacency(const GraphSnapshot& s) {
  int n = s.n_nodes();
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = 1.0;
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    auto [vr, tr] = s.edges[e];
    a(vr, tr) = s.edge_weights[e];
    a(tr, vr) = s.edge_weights[e];
  }
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += a(i, j);
    dinv[i] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) *= dinv[i] * dinv[j];
  return a;
}

// Everything backward() needs is produced by the forward pass:
//   P = N X, A1 = P W1, H1 = ReLU(A1), M = N H1, E = M W2.
// The output layer has no activation so embeddings span negative values for
// cosine similarity and triplet distances.
struct ForwardCache {
  Matrix nhat;
  Matrix P;
  Matrix A1;
  Matrix H1;
  Matrix M;
  Matrix E;
};

inline ForwardCache forward_with(Matrix nhat, Matrix p, const GcnParams& params) {
  if (p.cols() != params.W1.rows())
    throw ConfigError("gcn forward: feature width " + std::to_string(p.cols()) +
                      " does not match W1 rows " + std::to_string(params.W1.rows()));
  ForwardCache c;
  c.nhat = std::move(nhat);
  c.P = std::move(p);
  c.A1 = matmul(c.P, params.W1);
  c.H1 = relu(c.A1);
  c.M = matmul(c.nhat, c.H1);
  c.E = matmul(c.M, params.W2);
  return c;
}

inline ForwardCache forward_cached(const GraphSnapshot& s, const GcnParams& params) {
  Matrix nhat = normalized_adjacency(s);
  Matrix p = matmul(nhat, s.X);
  return forward_with(std::move(nhat), std::move(p), params);
}

inline Matrix forward(const GraphSnapshot& s, const GcnParams& params) {
  return forward_cached(s, params).E;
}

// ---- Parameter persistence -------------------------------------------------
// Layout: "THGCNPRM" magic, u32 schema_version, u32 d_in, u32 hidden,
// u32 out, u64 feature_spec_hash, then W1 and W2 as row-major little-endian
// f64.

inline constexpr char kParamsMagic[8] = {'T', 'H', 'G', 'C', 'N', 'P', 'R', 'M'};

class MissingParamsError : public IoError {
 public:
  explicit MissingParamsError(const std::string& path)
      : IoError("parameter file not found: " + path) {}
};

inline void save_params(const GcnParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write parameter file: " + path);
  out.write(kParamsMagic, 8);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  put_u32(kParamsSchemaVersion);
  put_u32(static_cast<std::uint32_t>(p.W1.rows()));
  put_u32(static_cast<std::uint32_t>(p.W1.cols()));
  put_u32(static_cast<std::uint32_t>(p.W2.cols()));
  std::uint64_t hash = feature_spec_hash();
  out.write(reinterpret_cast<const char*>(&hash), 8);
  out.write(reinterpret_cast<const char*>(p.W1.data()),
            static_cast<std::streamsize>(p.W1.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(p.W2.data()),
            static_cast<std::streamsize>(p.W2.size() * sizeof(double)));
  if (!out) throw IoError("short write to parameter file: " + path);
}

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline GcnParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingParamsError(path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kParamsMagic, 8) != 0)
    throw IoError("not a parameter file (bad magic): " + path);
  std::uint32_t schema = 0, d_in = 0, hidden = 0, out_dim = 0;
  std::uint64_t hash = 0;
  auto get_u32 = [&](std::uint32_t& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), 4));
  };
  if (!get_u32(schema) || !get_u32(d_in) || !get_u32(hidden) || !get_u32(out_dim) ||
      !in.read(reinterpret_cast<char*>(&hash), 8))
    throw IoError("truncated parameter file header: " + path);
  if (schema != kParamsSchemaVersion)
    throw ConfigError("parameter file schema_version " + std::to_string(schema) +
                      " unsupported (expected " +
                      std::to_string(kParamsSchemaVersion) + "): " + path);
  if (hash != feature_spec_hash())
    throw ConfigError("parameter file feature spec mismatch: file has " +
                      hex64(hash) + ", this build expects " +
                      hex64(feature_spec_hash()) + ": " + path);
  GcnParams p;
  p.W1 = Matrix(d_in, hidden);
  p.W2 = Matrix(hidden, out_dim);
  if (!in.read(reinterpret_cast<char*>(p.W1.data()),
               static_cast<std::streamsize>(p.W1.size() * sizeof(double))) ||
      !in.read(reinterpret_cast<char*>(p.W2.data()),
               static_cast<std::streamsize>(p.W2.size() * sizeof(double))))
    throw IoError("truncated parameter file payload: " + path);
  char extra;
  if (in.read(&extra, 1))
    throw IoError("trailing bytes in parameter file: " + path);
  return p;
}

}  // namespace thgcn
