#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "parabolic/errors.hpp"

namespace parabolic::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(PARABOLIC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
    case Isa::Avx2:
      return cpu_has_avx2() ? avx2_table() : nullptr;
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("PARABOLIC_ISA")) {
    const std::string value(env);
    if (value == "scalar") return &detail::kScalarTable;
    if (value == "avx2" && table_for(Isa::Avx2) != nullptr) return table_for(Isa::Avx2);
  }
  return table_for(detected_isa());
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::InvalidArgument, "kernel operand sizes differ");
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return detail::kScalarTable; }

const KernelTable* avx2_table() {
#if defined(PARABOLIC_HAVE_AVX2)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

Isa detected_isa() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void select(Isa isa) {
  const KernelTable* table = table_for(isa);
  if (table == nullptr) {
    throw Error(ErrorCode::InvalidArgument,
                "kernel ISA '" + std::string(to_string(isa)) + "' not available on this host");
  }
  active_slot().store(table, std::memory_order_release);
}

double weighted_energy(std::span<const cplx> c, std::span<const double> w) {
  check_sizes(c.size(), w.size());
  return active().weighted_energy(c.data(), w.data(), c.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void imag_scale(std::span<const cplx> in, std::span<const double> k, std::span<cplx> out) {
  check_sizes(in.size(), k.size());
  check_sizes(in.size(), out.size());
  active().imag_scale(in.data(), k.data(), out.data(), in.size());
}

void diag_scale(std::span<const double> a, std::span<const cplx> x, std::span<cplx> out) {
  check_sizes(a.size(), x.size());
  check_sizes(a.size(), out.size());
  active().diag_scale(a.data(), x.data(), out.data(), a.size());
}

void diag_axpy(std::span<const double> a, std::span<const cplx> x, std::span<cplx> y) {
  check_sizes(a.size(), x.size());
  check_sizes(a.size(), y.size());
  active().diag_axpy(a.data(), x.data(), y.data(), a.size());
}

}  // namespace parabolic::kernels
