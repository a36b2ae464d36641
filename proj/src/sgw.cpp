#include "isograph/sgw.hpp"

#include "isograph/error.hpp"
#include "isograph/parallel.hpp"
#include "isograph/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isograph {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

void check_signal(Index n, const EmbeddingMatrix& signal) {
  if (signal.rows() != n)
    throw DataError("signal has " + std::to_string(signal.rows()) + " rows, graph has " +
                    std::to_string(n) + " vertices");
}

// Plain Chebyshev coefficients: p(x) = sum a_j T_j(x).
Eigen::VectorXd plain(const Eigen::VectorXd& c) {
  Eigen::VectorXd a = c;
  a(0) *= 0.5;
  return a;
}

// Evaluates several Chebyshev series of the scaled Laplacian 2L/lambda_max - I
// on the same block, sharing the three-term recurrence. Columns are split into
// chunks handled independently, so the result does not depend on the thread
// count.
std::vector<Eigen::MatrixXd> apply_series(const Sparse& l, double lambda_max,
                                          const std::vector<Eigen::VectorXd>& series,
                                          const Eigen::MatrixXd& x) {
  const Index cols = x.cols();
  std::vector<Eigen::MatrixXd> out(series.size(), Eigen::MatrixXd::Zero(x.rows(), cols));
  Index max_order = 0;
  for (const auto& a : series) max_order = std::max(max_order, a.size() - 1);
  const std::size_t chunks = std::min<std::size_t>(thread_count(), static_cast<std::size_t>(cols));
  const double scale = 2.0 / lambda_max;
  parallel_for(chunks, [&](std::size_t c) {
    const Index begin = static_cast<Index>(c) * cols / static_cast<Index>(chunks);
    const Index end = static_cast<Index>(c + 1) * cols / static_cast<Index>(chunks);
    const Index w = end - begin;
    if (w == 0) return;
    Eigen::MatrixXd t_prev = x.middleCols(begin, w);
    Eigen::MatrixXd t_cur = scale * (l * t_prev) - t_prev;
    for (std::size_t s = 0; s < series.size(); ++s) {
      out[s].middleCols(begin, w) = series[s](0) * t_prev;
      if (series[s].size() > 1) out[s].middleCols(begin, w) += series[s](1) * t_cur;
    }
    for (Index j = 2; j <= max_order; ++j) {
      Eigen::MatrixXd t_next = 2.0 * (scale * (l * t_cur) - t_cur) - t_prev;
      for (std::size_t s = 0; s < series.size(); ++s)
        if (j < series[s].size()) out[s].middleCols(begin, w) += series[s](j) * t_next;
      t_prev.swap(t_cur);
      t_cur.swap(t_next);
    }
  });
  return out;
}

std::vector<Eigen::VectorXd> all_series(const KernelBank& bank) {
  std::vector<Eigen::VectorXd> s;
  for (int b = 0; b < bank.band_count(); ++b) s.push_back(plain(bank.coefficients(b)));
  return s;
}

Eigen::VectorXd kernel_on(const Spectrum& spec, const KernelBank& bank, int band) {
  return spec.eigenvalues.unaryExpr([&](double lam) { return bank.evaluate(band, lam); });
}

void check_band(const KernelBank& bank, int band) {
  if (band < 0 || band >= bank.band_count())
    throw DataError("band " + std::to_string(band) + " outside 0.." + std::to_string(bank.band_count() - 1));
}

std::vector<Index> sample_centers(Index n, const R0Options& options) {
  std::vector<Index> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), Index{0});
  const auto count = static_cast<std::size_t>(std::min(n, std::max<Index>(options.centers, 1)));
  Rng rng(options.seed);
  for (std::size_t t = 0; t < count; ++t) std::swap(ids[t], ids[t + rng.below(ids.size() - t)]);
  ids.resize(count);
  return ids;
}

// responses: n x centers, column c is the impulse response at centers[c]
bool sign_clean(const Eigen::MatrixXd& responses, const std::vector<Index>& centers, double tol) {
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (Index j = 0; j < responses.rows(); ++j)
      if (j != centers[c] && responses(j, static_cast<Index>(c)) > tol) return false;
  return true;
}

template <class Response>
R0Selection scan_bands(const KernelBank& bank, Index n, const R0Options& options, Response&& response) {
  const int J = bank.wavelet_bands();
  if (J < 3) throw ConfigError("sgw.bands: r0 selection needs at least 3 wavelet bands");
  const auto centers = sample_centers(n, options);
  for (int k = 2; k < J; ++k)
    if (sign_clean(response(k, centers), centers, options.tol)) return {k, false};
  return {J, true};
}

Eigen::MatrixXd impulses(Index n, const std::vector<Index>& centers) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, static_cast<Index>(centers.size()));
  for (std::size_t c = 0; c < centers.size(); ++c) e(centers[c], static_cast<Index>(c)) = 1.0;
  return e;
}

void check_coeffs(const KernelBank& bank, const SgwCoefficients& coeffs, Index n) {
  if (static_cast<int>(coeffs.bands.size()) != bank.band_count())
    throw DataError("coefficient band count does not match the kernel bank");
  for (const auto& b : coeffs.bands)
    if (b.rows() != n || b.cols() != coeffs.bands.front().cols())
      throw DataError("coefficient band shape does not match the graph");
}

}  // namespace

Spectrum eigendecompose(const LaplacianMatrix& l, Index threshold) {
  const Index n = l.size();
  if (n > threshold)
    throw ConfigError("graph has " + std::to_string(n) + " vertices, above sgw.exact_threshold = " +
                      std::to_string(threshold) + "; use the chebyshev path");
  const Eigen::MatrixXd dense(l.matrix);
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DataError("Laplacian is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition did not converge");
  Spectrum s;
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  s.lambda_max = n > 0 ? std::max(0.0, s.eigenvalues(n - 1)) : 0.0;
  return s;
}

double estimate_lambda_max(const LaplacianMatrix& l) {
  const Index n = l.size();
  double gershgorin = 0.0;
  for (Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Sparse::InnerIterator it(l.matrix, j); it; ++it) col += std::abs(it.value());
    gershgorin = std::max(gershgorin, col);
  }
  if (gershgorin == 0.0) return 0.0;

  const Index steps = std::min<Index>(n, 60);
  Eigen::MatrixXd basis(n, steps);
  Eigen::VectorXd alpha(steps), beta(steps);
  Rng rng(0x1a2c20u);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  Index used = 0;
  double last_beta = 0.0;
  for (Index j = 0; j < steps; ++j) {
    basis.col(j) = v;
    Eigen::VectorXd w = l.matrix * v;
    alpha(j) = v.dot(w);
    // full reorthogonalisation, twice
    for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    used = j + 1;
    last_beta = w.norm();
    if (last_beta < 1e-12 * gershgorin) break;
    beta(j) = last_beta;
    v = w / last_beta;
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
  for (Index j = 0; j < used; ++j) {
    t(j, j) = alpha(j);
    if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
  const double ritz = solver.eigenvalues()(used - 1);
  const double residual = std::abs(last_beta * solver.eigenvectors()(used - 1, used - 1));
  return std::min(std::max(1.01 * ritz, ritz + residual), gershgorin);
}

SgwCoefficients forward_sgw(const Spectrum& spec, const KernelBank& bank, const EmbeddingMatrix& signal) {
  check_signal(spec.size(), signal);
  const Eigen::MatrixXd hat = spec.eigenvectors.transpose() * signal.values();
  SgwCoefficients out;
  for (int b = 0; b < bank.band_count(); ++b)
    out.bands.push_back(spec.eigenvectors * (kernel_on(spec, bank, b).asDiagonal() * hat));
  return out;
}

SgwCoefficients forward_sgw(const LaplacianMatrix& l, const KernelBank& bank,
                            const EmbeddingMatrix& signal) {
  check_signal(l.size(), signal);
  return {apply_series(l.matrix, bank.lambda_max(), all_series(bank), signal.values())};
}

Eigen::VectorXd diffusion_values(const Spectrum& spec, const KernelBank& bank, Index i, int band) {
  check_band(bank, band);
  if (i < 0 || i >= spec.size()) throw DataError("vertex " + std::to_string(i) + " outside graph");
  return spec.eigenvectors *
         (kernel_on(spec, bank, band).asDiagonal() * spec.eigenvectors.row(i).transpose());
}

Eigen::VectorXd diffusion_values(const LaplacianMatrix& l, const KernelBank& bank, Index i, int band) {
  check_band(bank, band);
  if (i < 0 || i >= l.size()) throw DataError("vertex " + std::to_string(i) + " outside graph");
  return apply_series(l.matrix, bank.lambda_max(), {plain(bank.coefficients(band))},
                      impulses(l.size(), {i}))[0];
}

R0Selection select_r0(const Spectrum& spec, const KernelBank& bank, const R0Options& options) {
  return scan_bands(bank, spec.size(), options, [&](int k, const std::vector<Index>& centers) {
    Eigen::MatrixXd rows(static_cast<Index>(centers.size()), spec.size());
    for (std::size_t c = 0; c < centers.size(); ++c)
      rows.row(static_cast<Index>(c)) = spec.eigenvectors.row(centers[c]);
    return Eigen::MatrixXd(spec.eigenvectors * (kernel_on(spec, bank, k).asDiagonal() * rows.transpose()));
  });
}

R0Selection select_r0(const LaplacianMatrix& l, const KernelBank& bank, const R0Options& options) {
  return scan_bands(bank, l.size(), options, [&](int k, const std::vector<Index>& centers) {
    return apply_series(l.matrix, bank.lambda_max(), {plain(bank.coefficients(k))},
                        impulses(l.size(), centers))[0];
  });
}

SgwCoefficients annihilate_bands(SgwCoefficients coeffs, int r0) {
  const int J = static_cast<int>(coeffs.bands.size()) - 1;
  if (r0 < 1 || r0 > J + 1) throw DataError("r0 = " + std::to_string(r0) + " outside 1.." + std::to_string(J + 1));
  for (int k = r0; k <= J; ++k) coeffs.bands[static_cast<std::size_t>(k)].setZero();
  return coeffs;
}

EmbeddingMatrix inverse_sgw(const Spectrum& spec, const KernelBank& bank, const SgwCoefficients& coeffs) {
  check_coeffs(bank, coeffs, spec.size());
  const Index n = spec.size();
  const Index dims = coeffs.bands.front().cols();
  Eigen::VectorXd frame = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, dims);
  for (int b = 0; b < bank.band_count(); ++b) {
    const Eigen::VectorXd k = kernel_on(spec, bank, b);
    frame += k.cwiseAbs2();
    acc += k.asDiagonal() * (spec.eigenvectors.transpose() * coeffs.bands[static_cast<std::size_t>(b)]);
  }
  const double guard = 1e-14 * std::max(1.0, frame.maxCoeff());
  for (Index l = 0; l < n; ++l) {
    if (frame(l) > guard)
      acc.row(l) /= frame(l);
    else
      acc.row(l).setZero();
  }
  return EmbeddingMatrix(spec.eigenvectors * acc);
}

EmbeddingMatrix inverse_sgw(const LaplacianMatrix& l, const KernelBank& bank,
                            const SgwCoefficients& coeffs, const CgOptions& options) {
  check_coeffs(bank, coeffs, l.size());
  const Index n = l.size();
  const Index dims = coeffs.bands.front().cols();
  const double lmax = bank.lambda_max();
  const auto series = all_series(bank);

  // sum_k p_k^2 as one series of degree 2m, from T_a T_b = (T_{a+b} + T_{|a-b|}) / 2.
  Eigen::VectorXd gram = Eigen::VectorXd::Zero(2 * bank.order() + 1);
  for (const auto& a : series)
    for (Index i = 0; i < a.size(); ++i)
      for (Index j = 0; j < a.size(); ++j) {
        const double p = 0.5 * a(i) * a(j);
        gram(i + j) += p;
        gram(std::abs(i - j)) += p;
      }

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, dims);
  for (std::size_t b = 0; b < series.size(); ++b)
    rhs += apply_series(l.matrix, lmax, {series[b]}, coeffs.bands[b])[0];

  auto op = [&](const Eigen::MatrixXd& x) { return apply_series(l.matrix, lmax, {gram}, x)[0]; };

  // Column-wise CG; converged columns are frozen so every column follows its
  // own fixed sequence of updates.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, dims);
  Eigen::MatrixXd r = rhs;
  Eigen::MatrixXd p = r;
  Eigen::VectorXd rr = r.colwise().squaredNorm().transpose();
  const Eigen::VectorXd target = rhs.colwise().squaredNorm().transpose() * (options.tolerance * options.tolerance);
  std::vector<bool> active(static_cast<std::size_t>(dims));
  for (Index c = 0; c < dims; ++c) active[static_cast<std::size_t>(c)] = rr(c) > target(c);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (std::none_of(active.begin(), active.end(), [](bool a) { return a; })) break;
    const Eigen::MatrixXd ap = op(p);
    for (Index c = 0; c < dims; ++c) {
      if (!active[static_cast<std::size_t>(c)]) continue;
      const double pap = p.col(c).dot(ap.col(c));
      if (!(pap > 0.0)) {
        active[static_cast<std::size_t>(c)] = false;
        continue;
      }
      const double a = rr(c) / pap;
      x.col(c) += a * p.col(c);
      r.col(c) -= a * ap.col(c);
      const double rr_new = r.col(c).squaredNorm();
      p.col(c) = r.col(c) + (rr_new / rr(c)) * p.col(c);
      rr(c) = rr_new;
      if (rr_new <= target(c)) active[static_cast<std::size_t>(c)] = false;
    }
  }
  if (!x.allFinite()) throw NumericError("conjugate gradient produced non-finite values");
  return EmbeddingMatrix(x);
}

void dump_coefficients(const std::filesystem::path& dir, const SgwCoefficients& coeffs) {
  std::filesystem::create_directories(dir);
  for (std::size_t b = 0; b < coeffs.bands.size(); ++b)
    save_embeddings(dir / ("band_" + std::to_string(b) + ".bin"), EmbeddingMatrix(coeffs.bands[b]),
                    MatrixFormat::bin);
}

TransformPath parse_transform_path(const std::string& name) {
  if (name == "exact") return TransformPath::exact;
  if (name == "chebyshev") return TransformPath::chebyshev;
  throw ConfigError("sgw.path: expected 'exact' or 'chebyshev', got '" + name + "'");
}

std::string to_string(TransformPath p) { return p == TransformPath::exact ? "exact" : "chebyshev"; }

RegularizeResult regularize_embeddings(const Graph& g, const EmbeddingMatrix& s_u,
                                       const RegularizeOptions& options) {
  check_signal(g.size(), s_u);
  RegularizeResult res;
  if (options.delta) {
    res.delta = *options.delta;
  } else {
    try {
      res.delta = estimate_delta(g, options.delta_r_max, options.r0.seed);
    } catch (const DataError&) {
      res.delta = 2.0;
    }
  }
  IplParams ipl = options.ipl;
  ipl.delta = res.delta;
  ipl.validate();

  const LaplacianMatrix l = laplacian(g);
  if (g.edge_count() == 0) {
    res.s_hat = s_u;
    res.r0 = options.bands + 1;
  } else if (options.path == TransformPath::exact) {
    const Spectrum spec = eigendecompose(l, options.exact_threshold);
    res.lambda_max = spec.lambda_max;
    const KernelBank bank = build_kernel_bank(res.lambda_max, options.bands, options.cheby_order,
                                              options.lowpass_factor);
    const auto sel = select_r0(spec, bank, options.r0);
    res.r0 = sel.r0;
    res.r0_fallback = sel.fallback;
    res.s_hat = inverse_sgw(spec, bank, annihilate_bands(forward_sgw(spec, bank, s_u), sel.r0));
  } else {
    res.lambda_max = estimate_lambda_max(l);
    const KernelBank bank = build_kernel_bank(res.lambda_max, options.bands, options.cheby_order,
                                              options.lowpass_factor);
    const auto sel = select_r0(l, bank, options.r0);
    res.r0 = sel.r0;
    res.r0_fallback = sel.fallback;
    res.s_hat = inverse_sgw(l, bank, annihilate_bands(forward_sgw(l, bank, s_u), sel.r0), options.cg);
  }
  res.rebuilt = build_knn_graph(res.s_hat, options.k);
  if (options.compute_gaps) {
    res.gap_before = mean_gap(g, ipl);
    res.gap_after = mean_gap(res.rebuilt, ipl);
  }
  return res;
}

}  // namespace isograph
