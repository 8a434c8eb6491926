#include "diffusion_operator.hpp"

#include <algorithm>

#include "parabolic/kernels.hpp"

namespace parabolic::detail {

DiffusionOperator::DiffusionOperator(const DiffusionField& diffusion)
    : diffusion_(diffusion),
      grid_(diffusion.grid()),
      engine_(FftEngine::get(grid_.dim(), grid_.points())),
      grad_(static_cast<std::size_t>(grid_.dim()), std::vector<double>(grid_.size())),
      flux_(static_cast<std::size_t>(grid_.dim()), std::vector<double>(grid_.size())),
      spectral_tmp_(grid_.size()),
      physical_tmp_(grid_.size()) {
  for (const auto& c : diffusion_.components()) d_.push_back(c.data());
}

void DiffusionOperator::apply(std::span<const cplx> u_hat, std::span<cplx> out) {
  const int dim = grid_.dim();
  const std::size_t n = grid_.size();
  for (int a = 0; a < dim; ++a) {
    kernels::imag_scale(u_hat, grid_.derivative_wavenumbers(a), spectral_tmp_);
    engine_->backward(spectral_tmp_, physical_tmp_);
    auto& g = grad_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < n; ++i) g[i] = physical_tmp_[i].real();
  }

  std::vector<const double*> g_ptr;
  std::vector<double*> f_ptr;
  for (auto& g : grad_) g_ptr.push_back(g.data());
  for (auto& f : flux_) f_ptr.push_back(f.data());
  kernels::active().flux_product(dim, d_.data(), g_ptr.data(), f_ptr.data(), n);

  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  const double norm = 1.0 / static_cast<double>(n);
  for (int a = 0; a < dim; ++a) {
    const auto& f = flux_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < n; ++i) physical_tmp_[i] = cplx(f[i] * norm, 0.0);
    engine_->forward(physical_tmp_, spectral_tmp_);
    const auto k = grid_.derivative_wavenumbers(a);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += cplx(-k[i] * spectral_tmp_[i].imag(), k[i] * spectral_tmp_[i].real());
    }
  }
}

std::vector<double> DiffusionOperator::laplacian_symbol(double theta) const {
  std::vector<double> symbol(grid_.size(), 0.0);
  for (int a = 0; a < grid_.dim(); ++a) {
    const auto k = grid_.derivative_wavenumbers(a);
    for (std::size_t i = 0; i < symbol.size(); ++i) symbol[i] -= theta * k[i] * k[i];
  }
  return symbol;
}

}  // namespace parabolic::detail
