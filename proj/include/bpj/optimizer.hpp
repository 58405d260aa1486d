// Root finding on the efficiency curve: the utility-maximizing SIR gamma*_b,
// the inverse gamma_hat = f^-1(eta), and the bits-per-joule utility factor
// b*f(gamma)/gamma that both revolve around.
#pragma once

#include "bpj/phy.hpp"

namespace bpj::optimizer {

struct OptimumPoint {
    double gamma_star;      // linear SIR maximizing f(gamma)/gamma
    double f_at_star;       // efficiency there
    double utility_factor;  // b * f(gamma*) / gamma*
    double residual;        // |f - gamma f'| / f at the root
};

// Unique positive solution of f(gamma) = gamma * f'(gamma). Bracketing walks a
// geometric ladder out from gamma = 1 to find the region where gamma f' > f,
// then expands upward; bisection + Newton polish. Throws solver_error when no
// bracket exists in (0, 1e8] (pathological curve, e.g. tiny L).
OptimumPoint gamma_star(const phy::ModScheme& scheme, const phy::PacketConfig& pkt);

// gamma_hat = f^-1(eta) for eta in [0, 1 - 2^-L); |f(gamma_hat) - eta| well
// below 1e-10. Throws infeasible_error at or above the supremum.
double invert_efficiency(const phy::ModScheme& scheme, const phy::PacketConfig& pkt, double eta);

// Closed-form seed for the inverse, kept for diagnostics: exact only without
// the 2^-L floor and for unit coding gain.
double invert_efficiency_closed_form(const phy::ModScheme& scheme, const phy::PacketConfig& pkt,
                                     double eta);

// b * f(gamma) / gamma; gamma must be positive.
double utility_factor(const phy::ModScheme& scheme, const phy::PacketConfig& pkt, double gamma);

}  // namespace bpj::optimizer
