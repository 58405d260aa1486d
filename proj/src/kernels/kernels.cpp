// Scalar reference kernels and runtime lane dispatch.

#include "bpj/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "bpj/common.hpp"
#include "kernel_tables.hpp"
#include "kernels_internal.hpp"

namespace bpj::kernels {

using namespace tables;

double exp_core(double x) {
    if (x > EXP_MAX_X) return std::numeric_limits<double>::infinity();
    if (x < EXP_MIN_X) return 0.0;
    double n = std::floor(LOG2E * x + 0.5);
    double px = x - n * EXP_C1;
    px -= n * EXP_C2;
    double xx = px * px;
    double p = px * ((EXP_P[0] * xx + EXP_P[1]) * xx + EXP_P[2]);
    double q = ((EXP_Q[0] * xx + EXP_Q[1]) * xx + EXP_Q[2]) * xx + EXP_Q[3];
    double e = 1.0 + 2.0 * p / (q - p);
    // scale by 2^n through the exponent field; n stays in [-1021, 1023] here
    auto n64 = static_cast<std::int64_t>(n);
    double two_n = std::bit_cast<double>(static_cast<std::uint64_t>(n64 + 1023) << 52);
    return e * two_n;
}

double log_core(double x) {
    // precondition: x positive, normal
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    double e = static_cast<double>(static_cast<std::int64_t>(bits >> 52)) - 1022.0;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFULL) | 0x3FE0000000000000ULL);
    if (m < LOG_SQRTH) {
        m = m + m;
        e -= 1.0;
    }
    double xm = m - 1.0;
    double z = xm * xm;
    double num = LOG_P[0];
    for (int i = 1; i < 6; ++i) num = num * xm + LOG_P[i];
    double den = xm + LOG_Q[0];
    for (int i = 1; i < 5; ++i) den = den * xm + LOG_Q[i];
    double y = xm * (z * num / den);
    y = y - e * LOG_LN2_LO;
    y = y - 0.5 * z;
    double r = xm + y;
    r = r + e * LOG_LN2_HI;
    return r;
}

double pow_core(double base, double expo) { return exp_core(expo * log_core(base)); }

double efficiency_core(double alpha, double beta, double expo, double floor_term, double gamma) {
    return efficiency_point(alpha, beta, expo, floor_term, gamma);
}

double erfc_core(double x) {
    const double y = std::fabs(x);
    double result;
    if (y <= ERFC_THRESH) {
        double ysq = (y > ERFC_XSMALL) ? y * y : 0.0;
        double xnum = ERF_A[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + ERF_A[i]) * ysq;
            xden = (xden + ERF_B[i]) * ysq;
        }
        return 1.0 - x * (xnum + ERF_A[3]) / (xden + ERF_B[3]);
    }
    if (y <= 4.0) {
        double xnum = ERFC_C[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + ERFC_C[i]) * y;
            xden = (xden + ERFC_D[i]) * y;
        }
        result = (xnum + ERFC_C[7]) / (xden + ERFC_D[7]);
    } else if (y < ERFC_XBIG) {
        double ysq = 1.0 / (y * y);
        double xnum = ERFC_P[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + ERFC_P[i]) * ysq;
            xden = (xden + ERFC_Q[i]) * ysq;
        }
        result = ysq * (xnum + ERFC_P[4]) / (xden + ERFC_Q[4]);
        result = (ONE_OVER_SQRTPI - result) / y;
    } else {
        result = 0.0;
    }
    if (y < ERFC_XBIG) {
        // exp(-y^2) split so the squared high part is exact
        double yhi = std::trunc(y * 16.0) / 16.0;
        double del = (y - yhi) * (y + yhi);
        result = exp_core(-yhi * yhi) * exp_core(-del) * result;
    }
    if (x < 0.0) result = 2.0 - result;
    return result;
}

namespace scalar {

void erfc_batch(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = erfc_core(x[i]);
}

void exp_batch(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = exp_core(x[i]);
}

void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out) {
    for (std::size_t i = 0; i < gamma.size(); ++i)
        out[i] = efficiency_point(alpha, beta, expo, floor_term, gamma[i]);
}

}  // namespace scalar

namespace {

Backend detect_backend() {
#if defined(BPJ_HAVE_AVX2_LANE)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
    return Backend::scalar;
}

Backend g_backend = detect_backend();

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::avx2: return "avx2";
        case Backend::scalar: return "scalar";
    }
    return "unknown";
}

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
#if defined(BPJ_HAVE_AVX2_LANE)
    if (b == Backend::avx2) return __builtin_cpu_supports("avx2");
#endif
    return false;
}

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
    if (!backend_available(b))
        throw config_error(std::string("kernel backend not available on this host: ") +
                           std::string(backend_name(b)));
    g_backend = b;
}

// TODO: NEON lane for aarch64 hosts; the dispatch and equivalence tests are
// already lane-agnostic.

void erfc_batch(std::span<const double> x, std::span<double> out) {
#if defined(BPJ_HAVE_AVX2_LANE)
    if (g_backend == Backend::avx2) {
        avx2::erfc_batch(x, out);
        return;
    }
#endif
    scalar::erfc_batch(x, out);
}

void exp_batch(std::span<const double> x, std::span<double> out) {
#if defined(BPJ_HAVE_AVX2_LANE)
    if (g_backend == Backend::avx2) {
        avx2::exp_batch(x, out);
        return;
    }
#endif
    scalar::exp_batch(x, out);
}

void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out) {
#if defined(BPJ_HAVE_AVX2_LANE)
    if (g_backend == Backend::avx2) {
        avx2::efficiency_batch(alpha, beta, expo, floor_term, gamma, out);
        return;
    }
#endif
    scalar::efficiency_batch(alpha, beta, expo, floor_term, gamma, out);
}

}  // namespace bpj::kernels
