#pragma once

namespace awmeta::normal {

/// Phi(z) via erfc; relative accuracy near machine precision in both tails.
double cdf(double z);

/// 1 - Phi(z) computed directly, without cancellation.
double upper_tail(double z);

/// Phi^{-1}(p) by Wichura's AS241 (PPND16), relative error about 1e-16.
/// Throws InvalidInput outside (0, 1).
double quantile(double p);

/// Phi^{-1}(1 - q) for small upper-tail mass q, evaluated as -quantile(q).
double upper_quantile(double q);

double pdf(double z);

}  // namespace awmeta::normal
