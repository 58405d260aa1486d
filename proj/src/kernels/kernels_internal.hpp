#pragma once

#include <cmath>
#include <span>

#include "bpj/kernels.hpp"

namespace bpj::kernels {

namespace scalar {
void erfc_batch(std::span<const double> x, std::span<double> out);
void exp_batch(std::span<const double> x, std::span<double> out);
void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define BPJ_HAVE_AVX2_LANE 1
namespace avx2 {
void erfc_batch(std::span<const double> x, std::span<double> out);
void exp_batch(std::span<const double> x, std::span<double> out);
void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out);
}  // namespace avx2
#endif

// One efficiency-function point through the scalar reference kernels.
inline double efficiency_point(double alpha, double beta, double expo, double floor_term,
                               double g) {
    if (g == 0.0) return 0.0;
    double s = std::sqrt(beta * g);
    double q = 0.5 * erfc_core(s * 0.70710678118654752440);
    double u = 1.0 - alpha * q;
    return pow_core(u, expo) - floor_term;
}

}  // namespace bpj::kernels
