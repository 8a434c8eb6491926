#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fft.hpp"
#include "parabolic/problem.hpp"

namespace parabolic::detail {

/// Spectral-in, spectral-out application of div(D grad .). Owns scratch
/// buffers, so one instance per thread.
class DiffusionOperator {
 public:
  explicit DiffusionOperator(const DiffusionField& diffusion);

  /// out = coefficients of div(D grad u) given coefficients of u.
  void apply(std::span<const cplx> u_hat, std::span<cplx> out);

  /// Symbol of the exactly treated part, -theta |kappa|^2 (Nyquist zeroed).
  std::vector<double> laplacian_symbol(double theta) const;

 private:
  const DiffusionField& diffusion_;
  GridSpec grid_;
  std::shared_ptr<const FftEngine> engine_;
  std::vector<const double*> d_;
  std::vector<std::vector<double>> grad_;
  std::vector<std::vector<double>> flux_;
  std::vector<cplx> spectral_tmp_;
  std::vector<cplx> physical_tmp_;
};

}  // namespace parabolic::detail
