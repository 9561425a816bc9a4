#pragma once

namespace crpslearn {

double normal_pdf(double z);
double normal_cdf(double z);

/// Standard normal quantile function. Acklam's rational approximation refined
/// by one Halley step; absolute error below 1e-13 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

}  // namespace crpslearn
