#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

double normal_pdf(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

double simpson(double a, double b) {
    double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (normal_pdf(a) + 4.0 * normal_pdf(m) + normal_pdf(b));
}

double adaptive(double a, double b, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double left = simpson(a, m), right = simpson(m, b);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(a, m, left, tol * 0.5, depth - 1) +
           adaptive(m, b, right, tol * 0.5, depth - 1);
}

}  // namespace

double q_libm(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_quadrature(double x) {
    if (x < 0.0) return 1.0 - q_quadrature(-x);
    // density beyond x + 40 is below 1e-300
    double hi = x + 40.0;
    return adaptive(x, hi, simpson(x, hi), 1e-16, 48);
}

double efficiency(int b, int L, double gamma) {
    if (gamma <= 0.0) return 0.0;
    double alpha = 2.0 * (1.0 - std::pow(2.0, -b / 2.0));
    double beta = 3.0 / (std::pow(2.0, b) - 1.0);
    double u = 1.0 - alpha * q_libm(std::sqrt(beta * gamma));
    return std::pow(u, 2.0 * L / b) - std::pow(2.0, -L);
}

double efficiency_coded(int b, int L, double gamma, const bpj::phy::GainParams& gp) {
    double g_eff = gamma * (gp.a + gp.c * std::atan((gamma - gp.gamma_bar) / gp.d));
    return efficiency(b, L, g_eff);
}

double invert(int b, int L, double eta, const bpj::phy::GainParams* gp) {
    if (eta <= 0.0) return 0.0;
    auto f = [&](double g) { return gp ? efficiency_coded(b, L, g, *gp) : efficiency(b, L, g); };
    double hi = 1.0;
    while (f(hi) < eta) {
        hi *= 2.0;
        if (hi > 1e18) throw std::runtime_error("oracle invert: eta unreachable");
    }
    double lo = 0.0;
    for (int i = 0; i < 500 && (hi - lo) > 1e-16 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < eta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

GridBest best_response_grid(double lambda, double D, double bandwidth, int L, int b_max,
                            const std::optional<bpj::phy::TcmConfig>& coding) {
    GridBest best;
    const double f_sup = 1.0 - std::pow(2.0, -L);
    for (int b = 2; b <= b_max; b += 2) {
        const bpj::phy::GainParams* gp = nullptr;
        bpj::phy::GainParams local{};
        if (coding) {
            local = coding->params_for(b);
            gp = &local;
        }
        for (int i = 0; i < 2000; ++i) {
            double rs = bandwidth * std::pow(10.0, -5.0 * (1.0 - i / 1999.0));
            double r = b * rs;
            if (r * D < L) continue;  // bound below the bare transmission time
            double eta = L * lambda / r + L / (r * D) - L * L * lambda / (2.0 * r * r * D);
            if (eta >= f_sup) continue;
            double gamma = invert(b, L, eta, gp);
            if (gamma <= 0.0) continue;
            double f = gp ? efficiency_coded(b, L, gamma, *gp) : efficiency(b, L, gamma);
            double utility = b * f / gamma;
            if (!best.found || utility > best.utility) {
                best = {true, b, rs, gamma, utility};
            }
        }
    }
    return best;
}

void two_user_powers(double bandwidth, double noise, double h1, double h2, double rs1,
                     double rs2, double g1, double g2, double& p1, double& p2) {
    // gamma_k = (B/Rs_k) x_k / (noise + x_j) with x_k = p_k h_k
    double a1 = g1 * rs1 / bandwidth;
    double a2 = g2 * rs2 / bandwidth;
    double det = 1.0 - a1 * a2;
    if (det <= 0.0) throw std::runtime_error("oracle: SIR targets infeasible for two users");
    double x1 = a1 * noise * (1.0 + a2) / det;
    double x2 = a2 * noise * (1.0 + a1) / det;
    p1 = x1 / h1;
    p2 = x2 / h2;
}

}  // namespace oracle
