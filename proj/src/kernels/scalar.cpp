#include <cmath>

#include "awmeta/kernels.hpp"

namespace awmeta::kernels::scalar {

void moderated_t(const TwoGroupBatch& b, double s0, double* t, double* se) {
  const double n = static_cast<double>(b.n_control);
  const double m = static_cast<double>(b.n_case);
  const double dof = n + m - 2.0;
  const double scale = 1.0 / n + 1.0 / m;

  for (std::size_t g = 0; g < b.genes; ++g) {
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
    const double var = (ss_c + ss_x) / dof;
    const double e = std::sqrt(var * scale);
    se[g] = e;
    t[g] = (mean_x - mean_c) / (e + s0);
  }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void min(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void max(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

}  // namespace awmeta::kernels::scalar
