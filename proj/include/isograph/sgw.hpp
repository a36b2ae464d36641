#pragma once

#include "isograph/graph.hpp"
#include "isograph/ipl.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace isograph {

/// Full eigendecomposition of a Laplacian, eigenvalues ascending.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  double lambda_max = 0.0;       // largest eigenvalue
  Index size() const { return eigenvalues.size(); }
};

/// Dense symmetric eigensolver. Throws ConfigError when n exceeds `threshold`
/// (use the polynomial path instead) and DataError on a non-symmetric input.
Spectrum eigendecompose(const LaplacianMatrix& l, Index threshold = 4096);

/// Upper bound on the largest Laplacian eigenvalue: Lanczos Ritz value with a
/// residual margin, capped by the Gershgorin bound 2 * max degree. 0 for an
/// edgeless graph.
double estimate_lambda_max(const LaplacianMatrix& l);

using Kernel = std::function<double(double)>;

/// Band 0 is the scaling (lowpass) kernel h, bands 1..J the wavelet kernels,
/// ordered from the coarsest scale (lowest frequencies) to the finest. Each
/// kernel carries an order-m Chebyshev approximation on [0, lambda_max].
class KernelBank {
 public:
  KernelBank(double lambda_max, std::vector<Kernel> kernels, int order,
             std::vector<double> scales = {});

  int wavelet_bands() const { return static_cast<int>(kernels_.size()) - 1; }
  int band_count() const { return static_cast<int>(kernels_.size()); }
  int order() const { return order_; }
  double lambda_max() const { return lambda_max_; }
  const std::vector<double>& scales() const { return scales_; }

  double evaluate(int band, double lambda) const;
  double evaluate_poly(int band, double lambda) const;
  /// Chebyshev coefficients c_0..c_m with p(x) = c_0/2 + sum c_j T_j(x),
  /// x = 2 lambda / lambda_max - 1.
  const Eigen::VectorXd& coefficients(int band) const;

  /// min and max of sum over bands of kernel^2 on a dense grid of [0, lambda_max].
  std::pair<double, double> frame_bounds(int samples = 1000) const;
  /// max |poly - exact| for one band on a uniform grid of [0, lambda_max].
  double approximation_error(int band, int samples = 1000) const;

 private:
  double lambda_max_;
  std::vector<Kernel> kernels_;
  std::vector<Eigen::VectorXd> coeffs_;
  std::vector<double> scales_;
  int order_;
};

/// Mexican-hat wavelets t lambda exp(1 - t lambda) at J log-spaced scales from
/// lowpass_factor / lambda_max down to 1 / lambda_max, plus the scaling kernel
/// exp(-(lambda / (0.6 lambda_min))^2), lambda_min = lambda_max / lowpass_factor.
/// Throws NumericError for lambda_max = 0 (edgeless graph: pass the signal
/// through unchanged instead).
KernelBank build_kernel_bank(double lambda_max, int bands = 3, int order = 60,
                             double lowpass_factor = 20.0);

/// One n x M matrix per band.
struct SgwCoefficients {
  std::vector<Eigen::MatrixXd> bands;
};

SgwCoefficients forward_sgw(const Spectrum& spec, const KernelBank& bank, const EmbeddingMatrix& signal);
SgwCoefficients forward_sgw(const LaplacianMatrix& l, const KernelBank& bank,
                            const EmbeddingMatrix& signal);

/// Band response at every vertex to an impulse at vertex i.
Eigen::VectorXd diffusion_values(const Spectrum& spec, const KernelBank& bank, Index i, int band);
Eigen::VectorXd diffusion_values(const LaplacianMatrix& l, const KernelBank& bank, Index i, int band);

struct R0Options {
  double tol = 1e-9;
  Index centers = 128;
  std::uint64_t seed = 0;
};

struct R0Selection {
  int r0 = 0;
  bool fallback = false;  // no band qualified; r0 = J
};

/// Smallest wavelet band k with 1 < k < J whose off-center responses are all
/// <= tol at every sampled center. Throws ConfigError when J < 3.
R0Selection select_r0(const Spectrum& spec, const KernelBank& bank, const R0Options& options = {});
R0Selection select_r0(const LaplacianMatrix& l, const KernelBank& bank, const R0Options& options = {});

/// Zeroes wavelet bands k >= r0; the scaling band is never touched.
SgwCoefficients annihilate_bands(SgwCoefficients coeffs, int r0);

/// Least-squares synthesis argmin_s sum_k |kernel_k(L) s - coeffs_k|^2.
/// The exact path divides by sum kernel_k^2 per eigenvalue, zeroing components
/// where that sum vanishes.
EmbeddingMatrix inverse_sgw(const Spectrum& spec, const KernelBank& bank, const SgwCoefficients& coeffs);

struct CgOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;  // relative residual
};

/// Conjugate gradient on the frame normal equations
/// (sum p_k(L)^2) s = sum p_k(L) coeffs_k with the polynomial kernels.
EmbeddingMatrix inverse_sgw(const LaplacianMatrix& l, const KernelBank& bank,
                            const SgwCoefficients& coeffs, const CgOptions& options = {});

/// band_<k>.bin files in the binary matrix format.
void dump_coefficients(const std::filesystem::path& dir, const SgwCoefficients& coeffs);

enum class TransformPath { exact, chebyshev };
TransformPath parse_transform_path(const std::string& name);
std::string to_string(TransformPath p);

struct RegularizeOptions {
  int bands = 3;
  int cheby_order = 60;
  Index exact_threshold = 4096;
  double lowpass_factor = 20.0;
  TransformPath path = TransformPath::chebyshev;
  R0Options r0;
  CgOptions cg;
  int k = 15;  // neighbours of the rebuilt graph
  IplParams ipl;
  /// Estimated on the input graph when unset.
  std::optional<double> delta;
  int delta_r_max = 4;
  bool compute_gaps = true;
};

struct RegularizeResult {
  EmbeddingMatrix s_hat;
  int r0 = 0;
  bool r0_fallback = false;
  double lambda_max = 0.0;
  double delta = 0.0;
  Graph rebuilt;
  GapReport gap_before;  // input graph
  GapReport gap_after;   // graph rebuilt on s_hat
};

/// forward -> select_r0 -> annihilate -> inverse on every semantic dimension,
/// then rebuilds the kNN graph on the result with the same k.
RegularizeResult regularize_embeddings(const Graph& g, const EmbeddingMatrix& s_u,
                                       const RegularizeOptions& options = {});

}  // namespace isograph
