#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gist/common.hpp"
#include "gist/graph.hpp"
#include "gist/rng.hpp"

namespace gist {

enum class EmbeddingSource { exact_eigenmaps, projected_eigenmaps, fastrp };

/// One retained eigenvalue of the normalized Laplacian together with the
/// id of its multiplicity group (eigenvalues equal within the degeneracy
/// tolerance share a group).
struct SpectrumEntry {
  double eigenvalue;
  Index group;
};

/// N x r positional embedding, one node per row. For exact eigenmaps the
/// Gram matrix data * data^T equals the Laplacian pseudoinverse.
struct SpectralEmbedding {
  Matrix data;
  EmbeddingSource source;
  std::optional<std::vector<SpectrumEntry>> spectrum;

  Index num_nodes() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

namespace detail {

struct EigResult {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

inline EigResult symmetric_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double resolve_zero_tol(const Vector& values, double zero_tol) {
  // Negative zero_tol requests the scale-aware default 1e-8 * lambda_max.
  if (zero_tol >= 0.0) return zero_tol;
  const double lmax = values.size() ? values(values.size() - 1) : 0.0;
  return 1e-8 * std::max(lmax, 1.0);
}

} // namespace detail

/// Degeneracy tolerance used to partition eigenvalues into multiplicity
/// groups: eigensolvers split exact degeneracies by machine noise.
inline double degeneracy_tolerance(double lambda_max) {
  return 1e-6 * std::max(1.0, lambda_max);
}

/// Laplacian eigenmaps: column k of the output is u_k / sqrt(lambda_k)
/// for every eigenvalue above zero_tol, ascending. Pass zero_tol < 0 for
/// the scale-aware default.
inline SpectralEmbedding exact_eigenmaps(const DenseOperator& lap, double zero_tol = -1.0,
                                         Index oracle_cap = kDefaultOracleCap) {
  require(lap.kind == OperatorKind::normalized_laplacian, "exact_eigenmaps: wrong operator kind");
  require(lap.data.rows() <= oracle_cap, "exact_eigenmaps: oracle only (node count over cap)");
  auto eig = detail::symmetric_eig(lap.data);
  const double tol = detail::resolve_zero_tol(eig.values, zero_tol);
  const double lmax = eig.values.size() ? eig.values(eig.values.size() - 1) : 0.0;
  const double group_tol = degeneracy_tolerance(lmax);

  std::vector<Index> keep;
  for (Index k = 0; k < eig.values.size(); ++k)
    if (eig.values(k) > tol) keep.push_back(k);

  SpectralEmbedding emb;
  emb.source = EmbeddingSource::exact_eigenmaps;
  emb.data.resize(lap.data.rows(), static_cast<Index>(keep.size()));
  emb.spectrum.emplace();
  Index group = 0;
  for (size_t c = 0; c < keep.size(); ++c) {
    const double lambda = eig.values(keep[c]);
    emb.data.col(static_cast<Index>(c)) = eig.vectors.col(keep[c]) / std::sqrt(lambda);
    if (c > 0 && lambda - (*emb.spectrum)[c - 1].eigenvalue > group_tol) ++group;
    emb.spectrum->push_back({lambda, group});
  }
  return emb;
}

/// Moore-Penrose pseudoinverse of the normalized Laplacian: invert every
/// eigenvalue above zero_tol, zero out the rest.
inline DenseOperator laplacian_pseudoinverse(const DenseOperator& lap, double zero_tol = -1.0,
                                             Index oracle_cap = kDefaultOracleCap) {
  require(lap.kind == OperatorKind::normalized_laplacian,
          "laplacian_pseudoinverse: wrong operator kind");
  require(lap.data.rows() <= oracle_cap, "laplacian_pseudoinverse: oracle only");
  auto eig = detail::symmetric_eig(lap.data);
  const double tol = detail::resolve_zero_tol(eig.values, zero_tol);
  Vector inv = Vector::Zero(eig.values.size());
  for (Index k = 0; k < eig.values.size(); ++k)
    if (eig.values(k) > tol) inv(k) = 1.0 / eig.values(k);
  Matrix pinv = eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
  return {std::move(pinv), OperatorKind::laplacian_pseudoinverse};
}

/// Effective resistance (e_i - e_j)^T L^+ (e_i - e_j).
inline double resistance_distance(const DenseOperator& lap, Index i, Index j,
                                  double zero_tol = -1.0) {
  require(lap.kind == OperatorKind::normalized_laplacian, "resistance_distance: wrong operator kind");
  require(i >= 0 && i < lap.data.rows() && j >= 0 && j < lap.data.rows(),
          "resistance_distance: node id out of range");
  if (i == j) return 0.0;
  DenseOperator pinv = laplacian_pseudoinverse(lap, zero_tol, lap.data.rows());
  return pinv.data(i, i) + pinv.data(j, j) - 2.0 * pinv.data(i, j);
}

// ---------------------------------------------------------------------------
// Very sparse random projections
// ---------------------------------------------------------------------------

/// Parameters of a very sparse random projection. Before rescaling, entries
/// are drawn from {+sqrt(s), 0, -sqrt(s)} with probabilities
/// {1/(2s), 1 - 1/s, 1/(2s)}. sparsity <= 0 requests the default
/// s = sqrt(input_dim).
struct ProjectionSpec {
  Index input_dim;
  Index target_dim;
  double sparsity = 0.0;
  std::uint64_t seed = 0;

  double resolved_sparsity() const {
    return sparsity > 0.0 ? sparsity : std::sqrt(static_cast<double>(std::max<Index>(input_dim, 1)));
  }
};

namespace detail {

/// Draw one entry of the three-point law, pre-scaling: {+sqrt(s),0,-sqrt(s)}.
inline double sparse_projection_entry(Rng& rng, double s) {
  const double u = rng.uniform();
  const double p = 1.0 / (2.0 * s);
  if (u < p) return std::sqrt(s);
  if (u < 2.0 * p) return -std::sqrt(s);
  return 0.0;
}

} // namespace detail

/// Sample the r x input_dim projection matrix. Entries follow the
/// three-point law scaled by 1/sqrt(r) so that E[R^T R] = I, which is the
/// normalization under which <R v, R w> estimates <v, w>. Rows are drawn
/// from per-row split streams, so generation order is immaterial.
inline Matrix sample_projection(const ProjectionSpec& spec) {
  require(spec.target_dim >= 1, "sample_projection: target_dim must be >= 1");
  require(spec.input_dim >= 1, "sample_projection: input_dim must be >= 1");
  const double s = spec.resolved_sparsity();
  require(s >= 1.0, "sample_projection: sparsity must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.target_dim));
  Matrix r(spec.target_dim, spec.input_dim);
  Rng root(spec.seed);
  for (Index row = 0; row < spec.target_dim; ++row) {
    Rng rng = root.split(static_cast<std::uint64_t>(row));
    for (Index col = 0; col < spec.input_dim; ++col)
      r(row, col) = scale * detail::sparse_projection_entry(rng, s);
  }
  return r;
}

/// Project exact eigenmaps: output row i is R * (input row i).
inline SpectralEmbedding project_eigenmaps(const SpectralEmbedding& emb, const Matrix& projection) {
  require(emb.source == EmbeddingSource::exact_eigenmaps,
          "project_eigenmaps: input must be exact eigenmaps");
  require(projection.cols() == emb.dim(), "project_eigenmaps: dimension mismatch");
  SpectralEmbedding out;
  out.source = EmbeddingSource::projected_eigenmaps;
  out.data = emb.data * projection.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// FastRP
// ---------------------------------------------------------------------------

/// N x r projection used inside FastRP (distinct from the r x K matrix that
/// projects exact eigenmaps). Same three-point law, unit variance, per-node
/// split streams.
inline Matrix sample_fastrp_projection(Index num_nodes, Index r, std::uint64_t seed,
                                       double sparsity = 0.0) {
  const double s =
      sparsity > 0.0 ? sparsity : std::sqrt(static_cast<double>(std::max<Index>(num_nodes, 1)));
  require(s >= 1.0, "sample_fastrp_projection: sparsity must be >= 1");
  Matrix proj(num_nodes, r);
  Rng root(seed);
  for (Index i = 0; i < num_nodes; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    for (Index c = 0; c < r; ++c) proj(i, c) = detail::sparse_projection_entry(rng, s);
  }
  return proj;
}

/// Phi = sum_{i=1..k} P^i R for a given projection R, computed by k sparse
/// mat-mat products; P^i is never materialized. Linear in R.
inline SpectralEmbedding fastrp_embed_with_projection(const Graph& g, const Matrix& projection,
                                                      Index k) {
  require(k >= 1, "fastrp_embed: k must be >= 1");
  require(projection.rows() == g.num_nodes, "fastrp_embed: projection row count mismatch");
  Matrix term = transition_multiply(g, projection);
  Matrix acc = term;
  for (Index i = 2; i <= k; ++i) {
    term = transition_multiply(g, term);
    acc += term;
  }
  SpectralEmbedding out;
  out.source = EmbeddingSource::fastrp;
  out.data = std::move(acc);
  return out;
}

/// FastRP spectral embedding (uniform weights over the k power-iteration
/// terms).
inline SpectralEmbedding fastrp_embed(const Graph& g, Index r, Index k, std::uint64_t seed) {
  require(r >= 1, "fastrp_embed: r must be >= 1");
  return fastrp_embed_with_projection(g, sample_fastrp_projection(g.num_nodes, r, seed), k);
}

// ---------------------------------------------------------------------------
// Gauge transforms
// ---------------------------------------------------------------------------

enum class GaugeKind { sign_flip, block_rotation, identity };

/// Block-diagonal orthogonal change of spectral basis: one orthogonal block
/// per eigenvalue-multiplicity group.
struct GaugeTransform {
  std::vector<Matrix> blocks;
  GaugeKind kind;
};

namespace detail {

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// sign convention diag(R) > 0.
inline Matrix random_orthogonal(Index n, Rng& rng) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

inline std::vector<Index> group_sizes(const std::vector<SpectrumEntry>& spectrum) {
  std::vector<Index> sizes;
  for (const auto& entry : spectrum) {
    if (sizes.empty() || entry.group == static_cast<Index>(sizes.size()))
      sizes.push_back(0);
    ++sizes.back();
  }
  return sizes;
}

} // namespace detail

/// Sample a gauge transform compatible with the embedding's multiplicity
/// groups. sign_flip draws a random +-1 diagonal; block_rotation draws a
/// Haar-orthogonal block per group.
inline GaugeTransform sample_gauge_transform(const SpectralEmbedding& emb, GaugeKind kind,
                                             std::uint64_t seed) {
  require(emb.source == EmbeddingSource::exact_eigenmaps && emb.spectrum.has_value(),
          "sample_gauge_transform: embedding must carry a spectrum");
  GaugeTransform t;
  t.kind = kind;
  Rng rng(seed);
  for (Index size : detail::group_sizes(*emb.spectrum)) {
    switch (kind) {
      case GaugeKind::identity:
        t.blocks.push_back(Matrix::Identity(size, size));
        break;
      case GaugeKind::sign_flip: {
        Vector d(size);
        for (Index i = 0; i < size; ++i) d(i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
        t.blocks.push_back(Matrix(d.asDiagonal()));
        break;
      }
      case GaugeKind::block_rotation:
        t.blocks.push_back(detail::random_orthogonal(size, rng));
        break;
    }
  }
  return t;
}

/// Apply a gauge transform: per-group columns are right-multiplied by the
/// group's orthogonal block. The Gram matrix is invariant.
inline SpectralEmbedding apply_gauge(const SpectralEmbedding& emb, const GaugeTransform& t) {
  require(emb.spectrum.has_value(), "apply_gauge: embedding must carry a spectrum");
  auto sizes = detail::group_sizes(*emb.spectrum);
  require(sizes.size() == t.blocks.size(), "apply_gauge: block structure mismatch");
  SpectralEmbedding out = emb;
  Index col = 0;
  for (size_t b = 0; b < sizes.size(); ++b) {
    require(t.blocks[b].rows() == sizes[b] && t.blocks[b].cols() == sizes[b],
            "apply_gauge: block size mismatch");
    out.data.middleCols(col, sizes[b]) = emb.data.middleCols(col, sizes[b]) * t.blocks[b];
    col += sizes[b];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Johnson-Lindenstrauss diagnostics
// ---------------------------------------------------------------------------

/// Inner-product preservation errors |<p_i,p_j> - <e_i,e_j>| over sampled
/// node pairs, normalized by ||e_i|| ||e_j||.
struct JlErrorStats {
  double max_abs_err = 0.0;
  double mean_abs_err = 0.0;
  std::vector<double> normalized_errors;

  double fraction_within_eps(double eps) const {
    if (normalized_errors.empty()) return 1.0;
    Index count = 0;
    for (double e : normalized_errors)
      if (e <= eps) ++count;
    return static_cast<double>(count) / static_cast<double>(normalized_errors.size());
  }
};

inline JlErrorStats jl_error_stats(const SpectralEmbedding& exact,
                                   const SpectralEmbedding& projected, Index num_pairs,
                                   std::uint64_t seed) {
  require(exact.source == EmbeddingSource::exact_eigenmaps,
          "jl_error_stats: reference must be exact eigenmaps");
  require(exact.num_nodes() == projected.num_nodes(), "jl_error_stats: node count mismatch");
  const Index n = exact.num_nodes();
  require(n >= 2, "jl_error_stats: need at least two nodes");
  Rng rng(seed);
  JlErrorStats stats;
  stats.normalized_errors.reserve(num_pairs);
  double sum = 0.0;
  for (Index p = 0; p < num_pairs; ++p) {
    const Index i = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    Index j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    const double ref = exact.data.row(i).dot(exact.data.row(j));
    const double got = projected.data.row(i).dot(projected.data.row(j));
    const double denom = exact.data.row(i).norm() * exact.data.row(j).norm();
    const double err = denom > 0.0 ? std::abs(got - ref) / denom : std::abs(got - ref);
    stats.normalized_errors.push_back(err);
    stats.max_abs_err = std::max(stats.max_abs_err, err);
    sum += err;
  }
  if (num_pairs > 0) stats.mean_abs_err = sum / static_cast<double>(num_pairs);
  return stats;
}

/// JL target dimension r = ceil(c * ln N / eps^2) with the measurement
/// default c = 8.
inline Index jl_dimension(Index num_nodes, double eps, double c = 8.0) {
  return static_cast<Index>(
      std::ceil(c * std::log(static_cast<double>(num_nodes)) / (eps * eps)));
}

} // namespace gist
