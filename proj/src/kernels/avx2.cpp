#include <immintrin.h>

#include <cmath>

#include "awmeta/kernels.hpp"

namespace awmeta::kernels::avx2 {

namespace {

// Same per-gene operation sequence as scalar::moderated_t.
void moderated_t_tail(const TwoGroupBatch& b, std::size_t g, double s0, double* t, double* se) {
  const double n = static_cast<double>(b.n_control);
  const double m = static_cast<double>(b.n_case);
  const double dof = n + m - 2.0;
  const double scale = 1.0 / n + 1.0 / m;
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

}  // namespace

void moderated_t(const TwoGroupBatch& b, double s0, double* t, double* se) {
  const double n = static_cast<double>(b.n_control);
  const double m = static_cast<double>(b.n_case);
  const __m256d vn = _mm256_set1_pd(n);
  const __m256d vm = _mm256_set1_pd(m);
  const __m256d vdof = _mm256_set1_pd(n + m - 2.0);
  const __m256d vscale = _mm256_set1_pd(1.0 / n + 1.0 / m);
  const __m256d vs0 = _mm256_set1_pd(s0);

  std::size_t g = 0;
  for (; g + 4 <= b.genes; g += 4) {
    __m256d sum_c = _mm256_setzero_pd();
    __m256d sum_x = _mm256_setzero_pd();
    for (std::size_t s = 0; s < b.samples; ++s) {
      const __m256d v = _mm256_loadu_pd(b.x + s * b.genes + g);
      if (b.labels[s]) sum_x = _mm256_add_pd(sum_x, v);
      else sum_c = _mm256_add_pd(sum_c, v);
    }
    const __m256d mean_c = _mm256_div_pd(sum_c, vn);
    const __m256d mean_x = _mm256_div_pd(sum_x, vm);

    __m256d ss_c = _mm256_setzero_pd();
    __m256d ss_x = _mm256_setzero_pd();
    for (std::size_t s = 0; s < b.samples; ++s) {
      const __m256d v = _mm256_loadu_pd(b.x + s * b.genes + g);
      if (b.labels[s]) {
        const __m256d d = _mm256_sub_pd(v, mean_x);
        ss_x = _mm256_add_pd(ss_x, _mm256_mul_pd(d, d));
      } else {
        const __m256d d = _mm256_sub_pd(v, mean_c);
        ss_c = _mm256_add_pd(ss_c, _mm256_mul_pd(d, d));
      }
    }
    const __m256d var = _mm256_div_pd(_mm256_add_pd(ss_c, ss_x), vdof);
    const __m256d e = _mm256_sqrt_pd(_mm256_mul_pd(var, vscale));
    _mm256_storeu_pd(se + g, e);
    _mm256_storeu_pd(t + g, _mm256_div_pd(_mm256_sub_pd(mean_x, mean_c), _mm256_add_pd(e, vs0)));
  }
  for (; g < b.genes; ++g) moderated_t_tail(b, g, s0, t, se);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

// _mm256_min_pd(a, b) yields a < b ? a : b per lane, matching the scalar form.
void min(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void max(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

}  // namespace awmeta::kernels::avx2
