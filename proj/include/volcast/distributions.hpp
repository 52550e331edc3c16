#pragma once

namespace volcast {

double normal_cdf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

}  // namespace volcast
