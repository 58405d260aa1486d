// Numeric kernels behind the efficiency function.
//
// All transcendentals used by the library (erfc, exp, log, pow) are computed
// by the scalar reference kernels below rather than libm, so results do not
// depend on the host's libm and the batch lanes can be checked against the
// scalar lane bit-for-bit. The AVX2 lane mirrors the scalar reference
// operation-for-operation (same rationals, same rounding; no FMA), and is
// selected at runtime when the CPU supports it.
//
// Accuracy (verified in tests against libm / quadrature): erfc ~7e-16 rel,
// exp ~2e-16 rel, pow(u, e) for u in (0, 1], e <= 200 ~1e-14 rel.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace bpj::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Force a lane (tests, benchmarking). Throws config_error if unavailable.
void force_backend(Backend b);

// Scalar reference kernels.
double exp_core(double x);
double log_core(double x);   // x > 0
double pow_core(double base, double expo);  // base > 0
double erfc_core(double x);
// Single point of the batched efficiency expression below, scalar lane.
double efficiency_core(double alpha, double beta, double expo, double floor_term, double gamma);

// Batched kernels, dispatched to the active lane. in/out may not alias.
void erfc_batch(std::span<const double> x, std::span<double> out);
void exp_batch(std::span<const double> x, std::span<double> out);

// out[i] = (1 - alpha * 0.5 * erfc(sqrt(beta * g[i]) / sqrt(2)))^expo - floor_term.
// g[i] == 0 is special-cased to exactly 0 (the algebraic value; the pow route
// would lose the identity when expo is not integral). Preconditions:
// g[i] >= 0, alpha in [1,2), beta in (0,1], expo > 0, floor_term in [0,1).
void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out);

}  // namespace bpj::kernels
