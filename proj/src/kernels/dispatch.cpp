#include <atomic>
#include <cstdlib>
#include <string>

#include "awmeta/kernels.hpp"
#include "awmeta/types.hpp"

namespace awmeta::kernels {

namespace {

struct Table {
  Isa isa;
  void (*moderated_t)(const TwoGroupBatch&, double, double*, double*);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*min)(const double*, const double*, double*, std::size_t);
  void (*max)(const double*, const double*, double*, std::size_t);
};

constexpr Table kScalar{Isa::Scalar, scalar::moderated_t, scalar::add, scalar::min, scalar::max};
#if defined(AWMETA_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2, avx2::moderated_t, avx2::add, avx2::min, avx2::max};
#endif
#if defined(AWMETA_HAVE_NEON)
constexpr Table kNeon{Isa::Neon, neon::moderated_t, neon::add, neon::min, neon::max};
#endif

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(AWMETA_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(AWMETA_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table* table_for(Isa isa) {
  switch (isa) {
#if defined(AWMETA_HAVE_AVX2)
    case Isa::Avx2:
      return &kAvx2;
#endif
#if defined(AWMETA_HAVE_NEON)
    case Isa::Neon:
      return &kNeon;
#endif
    default:
      return &kScalar;
  }
}

// AWMETA_ISA=scalar|avx2|neon overrides detection (used for benchmarking).
const Table* initial_table() {
  if (const char* env = std::getenv("AWMETA_ISA")) {
    const std::string v(env);
    if (v == "scalar") return &kScalar;
    if (v == "avx2" && supported(Isa::Avx2)) return table_for(Isa::Avx2);
    if (v == "neon" && supported(Isa::Neon)) return table_for(Isa::Neon);
  }
  return table_for(detected_isa());
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

void check_sizes(std::size_t a, std::size_t b, std::size_t out) {
  if (a != b || a != out) throw InvalidInput("kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

Isa detected_isa() {
  if (supported(Isa::Avx2)) return Isa::Avx2;
  if (supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return current().load()->isa; }

void set_isa(Isa isa) {
  if (!supported(isa)) throw InvalidInput("instruction set not available: " + std::string(isa_name(isa)));
  current().store(table_for(isa));
}

void moderated_t(const TwoGroupBatch& batch, double s0, double* t, double* se) {
  current().load()->moderated_t(batch, s0, t, se);
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().load()->add(a.data(), b.data(), out.data(), out.size());
}

void min(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().load()->min(a.data(), b.data(), out.data(), out.size());
}

void max(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().load()->max(a.data(), b.data(), out.data(), out.size());
}

}  // namespace awmeta::kernels
