#include "isograph/error.hpp"
#include "isograph/sgw.hpp"

#include <cmath>
#include <numbers>

namespace isograph {

namespace {

// Gauss-Chebyshev quadrature on m + 1 nodes.
Eigen::VectorXd chebyshev_coefficients(const Kernel& f, int order, double lambda_max) {
  const int nodes = order + 1;
  const double half = lambda_max / 2.0;
  Eigen::VectorXd fx(nodes), theta(nodes);
  for (int q = 0; q < nodes; ++q) {
    theta(q) = std::numbers::pi * (q + 0.5) / nodes;
    fx(q) = f(half * std::cos(theta(q)) + half);
  }
  Eigen::VectorXd c(order + 1);
  for (int j = 0; j <= order; ++j) {
    double s = 0.0;
    for (int q = 0; q < nodes; ++q) s += fx(q) * std::cos(j * theta(q));
    c(j) = 2.0 * s / nodes;
  }
  return c;
}

}  // namespace

KernelBank::KernelBank(double lambda_max, std::vector<Kernel> kernels, int order,
                       std::vector<double> scales)
    : lambda_max_(lambda_max), kernels_(std::move(kernels)), scales_(std::move(scales)), order_(order) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw NumericError("kernel bank needs lambda_max > 0; an edgeless graph has nothing to "
                       "filter, pass the signal through unchanged");
  if (kernels_.size() < 3) throw ConfigError("sgw.bands: need at least 2 wavelet bands");
  if (order < 3) throw ConfigError("sgw.cheby_order: must be >= 3");
  for (const auto& k : kernels_) coeffs_.push_back(chebyshev_coefficients(k, order, lambda_max));
}

double KernelBank::evaluate(int band, double lambda) const {
  return kernels_.at(static_cast<std::size_t>(band))(lambda);
}

double KernelBank::evaluate_poly(int band, double lambda) const {
  const auto& c = coefficients(band);
  const double x = 2.0 * lambda / lambda_max_ - 1.0;
  // Clenshaw
  double b1 = 0.0, b2 = 0.0;
  for (Index j = c.size() - 1; j >= 1; --j) {
    const double b0 = 2.0 * x * b1 - b2 + c(j);
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + 0.5 * c(0);
}

const Eigen::VectorXd& KernelBank::coefficients(int band) const {
  return coeffs_.at(static_cast<std::size_t>(band));
}

std::pair<double, double> KernelBank::frame_bounds(int samples) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double lambda = lambda_max_ * s / (samples - 1);
    double g = 0.0;
    for (int b = 0; b < band_count(); ++b) g += std::pow(evaluate(b, lambda), 2);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return {lo, hi};
}

double KernelBank::approximation_error(int band, int samples) const {
  double err = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double lambda = lambda_max_ * s / (samples - 1);
    err = std::max(err, std::abs(evaluate_poly(band, lambda) - evaluate(band, lambda)));
  }
  return err;
}

KernelBank build_kernel_bank(double lambda_max, int bands, int order, double lowpass_factor) {
  if (bands < 2) throw ConfigError("sgw.bands: must be >= 2");
  if (!(lowpass_factor > 1.0)) throw ConfigError("sgw.lowpass_factor: must be > 1");
  if (!(lambda_max > 0.0))
    throw NumericError("kernel bank needs lambda_max > 0; an edgeless graph has nothing to "
                       "filter, pass the signal through unchanged");
  const double lambda_min = lambda_max / lowpass_factor;
  std::vector<double> scales(static_cast<std::size_t>(bands));
  const double hi = std::log(1.0 / lambda_min);
  const double lo = std::log(1.0 / lambda_max);
  for (int k = 0; k < bands; ++k) scales[static_cast<std::size_t>(k)] = std::exp(hi + (lo - hi) * k / (bands - 1));
  std::vector<Kernel> kernels;
  const double width = 0.6 * lambda_min;
  kernels.emplace_back([width](double x) { return std::exp(-(x / width) * (x / width)); });
  for (double t : scales) kernels.emplace_back([t](double x) { return t * x * std::exp(1.0 - t * x); });
  return KernelBank(lambda_max, std::move(kernels), order, std::move(scales));
}

}  // namespace isograph
