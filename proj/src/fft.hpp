#pragma once

#include <complex>
#include <memory>
#include <span>

namespace parabolic::detail {

/// Unnormalized complex n-D DFT on an N^dim grid, backed by FFTW. Instances
/// are cached per shape and immutable; execute calls are thread-safe.
class FftEngine {
 public:
  static std::shared_ptr<const FftEngine> get(int dim, int points);

  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  /// out = sum_x in(x) exp(-i k.x); in and out must not alias.
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  /// out = sum_k in(k) exp(+i k.x); in and out must not alias.
  void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

  std::size_t size() const noexcept { return size_; }

 private:
  FftEngine(int dim, int points);

  std::size_t size_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace parabolic::detail
