#include "bpj/sweeps.hpp"

#include <cmath>

#include "bpj/common.hpp"
#include "bpj/game.hpp"
#include "bpj/optimizer.hpp"

namespace bpj::sweeps {

std::vector<TableRow> modulation_table(const phy::PacketConfig& pkt, bool coded,
                                       const std::optional<phy::TcmConfig>& gains, int b_max) {
    std::optional<phy::TcmConfig> cfg;
    if (coded) cfg = gains ? *gains : phy::TcmConfig::defaults();

    std::vector<TableRow> rows;
    for (int b = 2; b <= b_max; b += 2) {
        TableRow row;
        row.b = b;
        row.alpha = phy::alpha_of(b);
        row.beta = phy::beta_of(b);
        auto uncoded = optimizer::gamma_star(phy::ModScheme(b), pkt);
        row.gamma_star = uncoded.gamma_star;
        row.gamma_star_db = linear_to_db(uncoded.gamma_star);
        row.f_star = uncoded.f_at_star;
        row.b_over_gamma_db = linear_to_db(b / uncoded.gamma_star);
        row.utility_factor = uncoded.utility_factor;
        if (cfg) {
            auto codedpt = optimizer::gamma_star(phy::ModScheme(b, cfg), pkt);
            row.gamma_star_c = codedpt.gamma_star;
            row.gamma_star_c_db = linear_to_db(codedpt.gamma_star);
            row.f_star_c = codedpt.f_at_star;
            row.utility_factor_c = codedpt.utility_factor;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

struct SinglePoint {
    bool feasible = false;
    int b = 0;
    double rate_norm = std::numeric_limits<double>::quiet_NaN();
    double power_norm = std::numeric_limits<double>::quiet_NaN();
    double utility_norm = std::numeric_limits<double>::quiet_NaN();
    double phi = std::numeric_limits<double>::quiet_NaN();
    bool at_max_rate = false;
};

SinglePoint eval_point(const queueing::TrafficQos& traffic, double bandwidth, int b_max,
                       const std::optional<phy::TcmConfig>& coding) {
    SinglePoint p;
    game::BestResponseSet br;
    try {
        br = game::best_response_set(traffic, bandwidth, b_max, coding);
    } catch (const infeasible_error&) {
        return p;  // flagged, not fatal
    }
    const auto& s = br.pareto;
    p.feasible = true;
    p.b = s.scheme.bits_per_symbol();
    p.rate_norm = p.b * s.symbol_rate / bandwidth;
    p.power_norm = s.target_sir * s.symbol_rate / bandwidth;  // p*h_eff for one user
    p.utility_norm = optimizer::utility_factor(s.scheme, traffic.pkt, s.target_sir);
    p.phi = game::user_size(s, bandwidth);
    p.at_max_rate = br.at_max_rate;
    return p;
}

}  // namespace

std::vector<DelayPoint> delay_sweep(const DelaySweepSpec& spec) {
    if (spec.points < 2) throw std::invalid_argument("sweep needs at least 2 points");
    if (!(spec.min_norm_delay > 0.0) || !(spec.min_norm_delay < spec.max_norm_delay))
        throw std::invalid_argument("sweep needs 0 < min < max normalized delay");
    if (!(spec.source_rate_frac > 0.0) || !(spec.source_rate_frac < 1.0))
        throw std::invalid_argument("source rate fraction must be in (0, 1)");

    // absolute bandwidth cancels in every reported column
    const double bandwidth = 1.0;
    const double lambda = spec.source_rate_frac * bandwidth / spec.pkt.bits;
    std::optional<phy::TcmConfig> coding;
    if (spec.coded) coding = spec.gains ? *spec.gains : phy::TcmConfig::defaults();

    const double ratio = spec.max_norm_delay / spec.min_norm_delay;
    std::vector<DelayPoint> rows;
    rows.reserve(spec.points);
    for (int i = 0; i < spec.points; ++i) {
        double x = spec.min_norm_delay *
                   std::pow(ratio, static_cast<double>(i) / (spec.points - 1));
        queueing::TrafficQos traffic{lambda, spec.pkt, x / bandwidth};

        DelayPoint row;
        row.norm_delay = x;
        SinglePoint u = eval_point(traffic, bandwidth, spec.b_max, {});
        row.feasible = u.feasible;
        row.b = u.b;
        row.rate_norm = u.rate_norm;
        row.power_norm = u.power_norm;
        row.utility_norm = u.utility_norm;
        row.phi = u.phi;
        row.at_max_rate = u.at_max_rate;
        if (spec.coded) {
            SinglePoint c = eval_point(traffic, bandwidth, spec.b_max, coding);
            row.feasible = row.feasible && c.feasible;
            row.b_c = c.b;
            row.rate_norm_c = c.rate_norm;
            row.power_norm_c = c.power_norm;
            row.utility_norm_c = c.utility_norm;
            row.phi_c = c.phi;
            row.at_max_rate_c = c.at_max_rate;
            if (u.feasible && c.feasible)
                row.tcm_gain_db = linear_to_db(c.utility_norm / u.utility_norm);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TradeoffRow> tradeoff(const phy::PacketConfig& pkt, double rs_frac,
                                  const std::optional<phy::TcmConfig>& gains, int b_max) {
    if (!(rs_frac > 0.0) || rs_frac > 1.0)
        throw std::invalid_argument("symbol-rate fraction must be in (0, 1]");
    phy::TcmConfig cfg = gains ? *gains : phy::TcmConfig::defaults();
    std::vector<TradeoffRow> rows;
    for (int b = 2; b <= b_max; b += 2) {
        TradeoffRow row;
        row.b = b;
        row.spectral_eff = b * rs_frac;
        row.energy_factor = optimizer::gamma_star(phy::ModScheme(b), pkt).utility_factor;
        row.energy_factor_coded =
            optimizer::gamma_star(phy::ModScheme(b, cfg), pkt).utility_factor;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace bpj::sweeps
