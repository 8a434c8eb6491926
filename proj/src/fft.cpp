#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "parabolic/errors.hpp"

namespace parabolic::detail {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftEngine::FftEngine(int dim, int points) : size_(1) {
  std::vector<int> dims(static_cast<std::size_t>(dim), points);
  for (int d : dims) size_ *= static_cast<std::size_t>(d);
  std::vector<fftw_complex> a(size_), b(size_);
  // FFTW_ESTIMATE keeps plans (and results) identical from run to run.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(dim, dims.data(), a.data(), b.data(), FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft(dim, dims.data(), a.data(), b.data(), FFTW_BACKWARD, flags);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "FFTW could not plan the transform");
  }
}

FftEngine::~FftEngine() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

std::shared_ptr<const FftEngine> FftEngine::get(int dim, int points) {
  // Mutex first so it outlives the cache during static destruction.
  std::mutex& m = planner_mutex();
  static std::map<std::pair<int, int>, std::shared_ptr<const FftEngine>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{dim, points}];
  if (!slot) slot.reset(new FftEngine(dim, points));
  return slot;
}

void FftEngine::forward(std::span<const std::complex<double>> in,
                        std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != size_) {
    throw Error(ErrorCode::InvalidArgument, "FFT buffer size mismatch");
  }
  // fftw_execute_dft does not write its input for out-of-place plans.
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void FftEngine::backward(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != size_) {
    throw Error(ErrorCode::InvalidArgument, "FFT buffer size mismatch");
  }
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace parabolic::detail
