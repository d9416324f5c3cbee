#include <arm_neon.h>

#include <cmath>

#include "awmeta/kernels.hpp"

namespace awmeta::kernels::neon {

void moderated_t(const TwoGroupBatch& b, double s0, double* t, double* se) {
  const double n = static_cast<double>(b.n_control);
  const double m = static_cast<double>(b.n_case);
  const double dof = n + m - 2.0;
  const double scale = 1.0 / n + 1.0 / m;
  const float64x2_t vn = vdupq_n_f64(n);
  const float64x2_t vm = vdupq_n_f64(m);
  const float64x2_t vdof = vdupq_n_f64(dof);
  const float64x2_t vscale = vdupq_n_f64(scale);
  const float64x2_t vs0 = vdupq_n_f64(s0);

  std::size_t g = 0;
  for (; g + 2 <= b.genes; g += 2) {
    float64x2_t sum_c = vdupq_n_f64(0.0);
    float64x2_t sum_x = vdupq_n_f64(0.0);
    for (std::size_t s = 0; s < b.samples; ++s) {
      const float64x2_t v = vld1q_f64(b.x + s * b.genes + g);
      if (b.labels[s]) sum_x = vaddq_f64(sum_x, v);
      else sum_c = vaddq_f64(sum_c, v);
    }
    const float64x2_t mean_c = vdivq_f64(sum_c, vn);
    const float64x2_t mean_x = vdivq_f64(sum_x, vm);
    float64x2_t ss_c = vdupq_n_f64(0.0);
    float64x2_t ss_x = vdupq_n_f64(0.0);
    for (std::size_t s = 0; s < b.samples; ++s) {
      const float64x2_t v = vld1q_f64(b.x + s * b.genes + g);
      if (b.labels[s]) {
        const float64x2_t d = vsubq_f64(v, mean_x);
        ss_x = vaddq_f64(ss_x, vmulq_f64(d, d));
      } else {
        const float64x2_t d = vsubq_f64(v, mean_c);
        ss_c = vaddq_f64(ss_c, vmulq_f64(d, d));
      }
    }
    const float64x2_t var = vdivq_f64(vaddq_f64(ss_c, ss_x), vdof);
    const float64x2_t e = vsqrtq_f64(vmulq_f64(var, vscale));
    vst1q_f64(se + g, e);
    vst1q_f64(t + g, vdivq_f64(vsubq_f64(mean_x, mean_c), vaddq_f64(e, vs0)));
  }
  for (; g < b.genes; ++g) {
    double sum_c = 0.0, sum_x = 0.0;
    for (std::size_t s = 0; s < b.samples; ++s) {
      const double v = b.x[s * b.genes + g];
      if (b.labels[s]) sum_x += v;
      else sum_c += v;
    }
    const double mean_c = sum_c / n;
    const double mean_x = sum_x / m;
    double ss_c = 0.0, ss_x = 0.0;
    for (std::size_t s = 0; s < b.samples; ++s) {
      const double v = b.x[s * b.genes + g];
      if (b.labels[s]) {
        const double d = v - mean_x;
        ss_x += d * d;
      } else {
        const double d = v - mean_c;
        ss_c += d * d;
      }
    }
    const double e = std::sqrt((ss_c + ss_x) / dof * scale);
    se[g] = e;
    t[g] = (mean_x - mean_c) / (e + s0);
  }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

// Compare-and-select keeps the scalar a < b ? a : b semantics for signed zeros.
void min(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t va = vld1q_f64(a + i);
    const float64x2_t vb = vld1q_f64(b + i);
    vst1q_f64(out + i, vbslq_f64(vcltq_f64(va, vb), va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void max(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t va = vld1q_f64(a + i);
    const float64x2_t vb = vld1q_f64(b + i);
    vst1q_f64(out + i, vbslq_f64(vcgtq_f64(va, vb), va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

}  // namespace awmeta::kernels::neon
