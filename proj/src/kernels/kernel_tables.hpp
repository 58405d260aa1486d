// Coefficient tables shared by the scalar reference kernels and the SIMD
// lanes. Both lanes must evaluate these with the same operation order.
//
// erfc: W. J. Cody's rational Chebyshev approximations (three regions).
// exp/log: Cephes-style rationals with hi/lo split range reduction.
#pragma once

namespace bpj::kernels::tables {

// erfc region 1: |x| <= 0.46875, erf(x) = x * P(x^2)/Q(x^2)
inline constexpr double ERF_A[5] = {
    3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
    3.20937758913846947e03, 1.85777706184603153e-1};
inline constexpr double ERF_B[4] = {
    2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
    2.84423683343917062e03};

// erfc region 2: 0.46875 < |x| <= 4
inline constexpr double ERFC_C[9] = {
    5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
    2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
    2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
inline constexpr double ERFC_D[8] = {
    1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
    1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
    3.43936767414372164e03, 1.23033935480374942e03};

// erfc region 3: |x| > 4
inline constexpr double ERFC_P[6] = {
    3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
    1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
inline constexpr double ERFC_Q[5] = {
    2.56852019228982242e00, 1.87295284992346047e00, 5.27905102951428412e-1,
    6.05183413124413191e-2, 2.33520497626869185e-3};

inline constexpr double ERFC_THRESH = 0.46875;
inline constexpr double ERFC_XSMALL = 1.11e-16;
inline constexpr double ERFC_XBIG = 26.543;       // erfc underflows beyond
inline constexpr double ONE_OVER_SQRTPI = 5.6418958354775628695e-1;

// exp(x) = 1 + 2 p/(q - p), p = r*P(r^2), q = Q(r^2), r = x - n*ln2
inline constexpr double EXP_P[3] = {
    1.26177193074810590878e-4, 3.02994407707441961300e-2,
    9.99999999999999999910e-1};
inline constexpr double EXP_Q[4] = {
    3.00198505138664455042e-6, 2.52448340349684104192e-3,
    2.27265548208155028766e-1, 2.00000000000000000005e0};
inline constexpr double LOG2E = 1.4426950408889634073599;
inline constexpr double EXP_C1 = 6.93145751953125e-1;     // ln2 hi
inline constexpr double EXP_C2 = 1.42860682030941723212e-6;  // ln2 lo
inline constexpr double EXP_MAX_X = 709.0;
// below this the 2^n exponent-field scaling would need subnormals; true
// values are < 4e-308, returned as 0
inline constexpr double EXP_MIN_X = -708.0;

// log(z), z = m*2^e with m in [sqrt(1/2), sqrt(2)), x = m - 1:
// log(z) = x - 0.5 x^2 + x^3 P(x)/Q(x) + e*ln2 (hi/lo split)
inline constexpr double LOG_P[6] = {
    1.01875663804580931796e-4, 4.97494994976747001425e-1,
    4.70579119878881725854e00, 1.44989225341610930846e01,
    1.79368678507819816313e01, 7.70838733755885391666e00};
inline constexpr double LOG_Q[5] = {  // monic
    1.12873587189167450590e01, 4.52279145837532221105e01,
    8.29875266912776603211e01, 7.11544750618563894466e01,
    2.31251620126765340583e01};
inline constexpr double LOG_SQRTH = 0.70710678118654752440;
inline constexpr double LOG_LN2_LO = 2.121944400546905827679e-4;
inline constexpr double LOG_LN2_HI = 0.693359375;

inline constexpr double INV_SQRT2 = 0.70710678118654752440;

}  // namespace bpj::kernels::tables
