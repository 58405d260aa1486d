// Computation behind the CLI: the per-constellation optimum table, the
// delay-constraint sweep, and the spectral-vs-energy-efficiency tradeoff.
// Quantities are normalized exactly as plotted in the source experiments:
// delay by 1/B, power by the effective gain, utility by B*h_eff, rate by B,
// so the rows are bandwidth-independent.
#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "bpj/phy.hpp"

namespace bpj::sweeps {

struct TableRow {
    int b = 0;
    double alpha = 0, beta = 0;
    double gamma_star = 0, gamma_star_db = 0, f_star = 0;
    double b_over_gamma_db = 0, utility_factor = 0;
    // coded columns; NaN when the table is uncoded
    double gamma_star_c = std::numeric_limits<double>::quiet_NaN();
    double gamma_star_c_db = std::numeric_limits<double>::quiet_NaN();
    double f_star_c = std::numeric_limits<double>::quiet_NaN();
    double utility_factor_c = std::numeric_limits<double>::quiet_NaN();
};

// One row per b in {2, 4, ..., b_max}. Coded mode uses `gains` (or the
// shipped defaults when absent).
std::vector<TableRow> modulation_table(const phy::PacketConfig& pkt, bool coded,
                                       const std::optional<phy::TcmConfig>& gains = {},
                                       int b_max = 10);

struct DelaySweepSpec {
    double min_norm_delay = 15.0;   // D*B
    double max_norm_delay = 1e4;
    int points = 400;               // log-spaced
    double source_rate_frac = 0.01;  // lambda*L = frac*B
    phy::PacketConfig pkt{};
    bool coded = false;  // also run the coded system and report the TCM gain
    std::optional<phy::TcmConfig> gains;
    int b_max = 10;
};

struct DelayPoint {
    double norm_delay = 0;
    bool feasible = false;
    int b = 0;
    double rate_norm = std::numeric_limits<double>::quiet_NaN();     // b*Rs/B
    double power_norm = std::numeric_limits<double>::quiet_NaN();    // p*h_eff
    double utility_norm = std::numeric_limits<double>::quiet_NaN();  // u/(B*h_eff)
    double phi = std::numeric_limits<double>::quiet_NaN();
    bool at_max_rate = false;
    // coded run (populated when spec.coded)
    int b_c = 0;
    double rate_norm_c = std::numeric_limits<double>::quiet_NaN();
    double power_norm_c = std::numeric_limits<double>::quiet_NaN();
    double utility_norm_c = std::numeric_limits<double>::quiet_NaN();
    double phi_c = std::numeric_limits<double>::quiet_NaN();
    bool at_max_rate_c = false;
    double tcm_gain_db = std::numeric_limits<double>::quiet_NaN();
};

// Rows in ascending normalized delay; infeasible delays are flagged per-row.
std::vector<DelayPoint> delay_sweep(const DelaySweepSpec& spec);

struct TradeoffRow {
    int b = 0;
    double spectral_eff = 0;         // b*Rs/B at the fixed symbol rate
    double energy_factor = 0;        // b*f(gamma*)/gamma*, uncoded
    double energy_factor_coded = 0;
};

// Fixed symbol rate Rs = rs_frac*B, one row per constellation.
std::vector<TradeoffRow> tradeoff(const phy::PacketConfig& pkt, double rs_frac = 0.01,
                                  const std::optional<phy::TcmConfig>& gains = {},
                                  int b_max = 10);

}  // namespace bpj::sweeps
