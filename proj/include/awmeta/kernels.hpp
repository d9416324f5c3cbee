#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, where
// the target supports it, an AVX2 or NEON variant chosen at runtime. All
// variants perform the same IEEE operations in the same order per element,
// so their outputs are bit-identical; tests/test_kernels.cpp enforces that.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace awmeta::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();

/// Variant currently used by the dispatching entry points below.
Isa active_isa();

/// Forces a variant. Throws InvalidInput if the CPU or build lacks it.
void set_isa(Isa isa);

/// Input to the batch two-group t kernel. `x` is sample-major: the values
/// of sample s for all genes are x[s * genes .. s * genes + genes).
struct TwoGroupBatch {
  const double* x = nullptr;
  std::size_t samples = 0;
  std::size_t genes = 0;
  const std::uint8_t* labels = nullptr;  // 0 = control, 1 = case
  std::size_t n_control = 0;
  std::size_t n_case = 0;
};

// Per gene: means of both groups, pooled-variance standard error `se`, and
// t = (mean_case - mean_control) / (se + s0). A zero denominator is not
// checked here; callers inspect `se`.
void moderated_t(const TwoGroupBatch& batch, double s0, double* t, double* se);

void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void min(std::span<const double> a, std::span<const double> b, std::span<double> out);
void max(std::span<const double> a, std::span<const double> b, std::span<double> out);

namespace scalar {
void moderated_t(const TwoGroupBatch& batch, double s0, double* t, double* se);
void add(const double* a, const double* b, double* out, std::size_t n);
void min(const double* a, const double* b, double* out, std::size_t n);
void max(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

#if defined(AWMETA_HAVE_AVX2)
namespace avx2 {
void moderated_t(const TwoGroupBatch& batch, double s0, double* t, double* se);
void add(const double* a, const double* b, double* out, std::size_t n);
void min(const double* a, const double* b, double* out, std::size_t n);
void max(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(AWMETA_HAVE_NEON)
namespace neon {
void moderated_t(const TwoGroupBatch& batch, double s0, double* t, double* se);
void add(const double* a, const double* b, double* out, std::size_t n);
void min(const double* a, const double* b, double* out, std::size_t n);
void max(const double* a, const double* b, double* out, std::size_t n);
}  // namespace neon
#endif

}  // namespace awmeta::kernels
