#include "bpj/optimizer.hpp"

#include <cmath>
#include <limits>

#include "bpj/common.hpp"

namespace bpj::optimizer {

namespace {

constexpr double BRACKET_CAP = 1e8;

double stationarity(const phy::ModScheme& scheme, const phy::PacketConfig& pkt, double g) {
    return phy::efficiency(scheme, pkt, g) - g * phy::efficiency_derivative(scheme, pkt, g);
}

}  // namespace

OptimumPoint gamma_star(const phy::ModScheme& scheme, const phy::PacketConfig& pkt) {
    auto g = [&](double x) { return stationarity(scheme, pkt, x); };

    // The exact 2^-L floor makes f ~ sqrt(gamma) at astronomically small f
    // values, which creates a second stationary point far below the operating
    // range. Locate the true root from inside the negative region upward.
    double neg = std::nan("");
    for (int k = 0; k < 60 && std::isnan(neg); ++k) {
        double up = std::ldexp(1.0, k);
        double down = std::ldexp(1.0, -k);
        if (up <= BRACKET_CAP && g(up) < 0.0) neg = up;
        else if (k > 0 && g(down) < 0.0) neg = down;
    }
    if (std::isnan(neg))
        throw solver_error("no stationary bracket for gamma* in (0, 1e8]: efficiency curve "
                           "has no interior utility maximum (check b and L)");

    double lo = neg, hi = 2.0 * neg;
    while (g(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > BRACKET_CAP)
            throw solver_error("gamma* bracket exceeded 1e8; pathological efficiency curve");
    }

    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }

    // Newton polish on the stationarity residual with a numeric slope
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        double h = 1e-7 * root;
        double gr = g(root);
        double slope = (g(root + h) - g(root - h)) / (2.0 * h);
        if (slope == 0.0) break;
        double next = root - gr / slope;
        if (next > lo && next < hi) root = next;
    }

    OptimumPoint out;
    out.gamma_star = root;
    out.f_at_star = phy::efficiency(scheme, pkt, root);
    out.utility_factor = scheme.bits_per_symbol() * out.f_at_star / root;
    out.residual = std::fabs(g(root)) / out.f_at_star;
    return out;
}

double invert_efficiency_closed_form(const phy::ModScheme& scheme, const phy::PacketConfig& pkt,
                                     double eta) {
    if (eta < 0.0) throw std::domain_error("efficiency inverse needs eta >= 0");
    if (eta == 0.0) return 0.0;
    const int b = scheme.bits_per_symbol();
    double x = (1.0 - std::pow(eta, b / (2.0 * pkt.bits))) / scheme.alpha();
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    double q = phy::q_tail_inv(x);
    return q * q / scheme.beta();
}

double invert_efficiency(const phy::ModScheme& scheme, const phy::PacketConfig& pkt, double eta) {
    if (eta < 0.0) throw std::domain_error("efficiency inverse needs eta >= 0");
    const double sup = 1.0 - std::ldexp(1.0, -pkt.bits);
    if (eta >= sup)
        throw infeasible_error("required success probability " + std::to_string(eta) +
                                   " is outside the efficiency range [0, 1 - 2^-L)",
                               eta);
    if (eta == 0.0) return 0.0;

    auto f = [&](double g) { return phy::efficiency(scheme, pkt, g); };

    double hi = invert_efficiency_closed_form(scheme, pkt, eta);
    if (!std::isfinite(hi) || hi <= 0.0) hi = 1.0;
    while (f(hi) < eta) {
        hi *= 2.0;
        if (hi > 1e15) throw solver_error("efficiency inverse failed to bracket");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < eta ? lo : hi) = mid;
    }
    double root = 0.5 * (lo + hi);
    // Newton polish pushes |f - eta| to rounding level
    for (int it = 0; it < 3; ++it) {
        double fp = phy::efficiency_derivative(scheme, pkt, root);
        if (fp <= 0.0) break;
        double next = root - (f(root) - eta) / fp;
        if (next > 0.0 && std::isfinite(next)) root = next;
    }
    return root;
}

double utility_factor(const phy::ModScheme& scheme, const phy::PacketConfig& pkt, double gamma) {
    if (gamma <= 0.0) throw std::domain_error("utility factor needs gamma > 0");
    return scheme.bits_per_symbol() * phy::efficiency(scheme, pkt, gamma) / gamma;
}

}  // namespace bpj::optimizer
