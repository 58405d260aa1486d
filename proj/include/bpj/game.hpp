// The strategic layer: per-user best response (lowest feasible constellation,
// delay-governed SIR and symbol rate), closed-form matched-filter equilibrium
// powers, user sizes, equilibrium utilities, and sampling-based verification
// that no unilateral deviation improves a user's utility.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bpj/phy.hpp"
#include "bpj/queueing.hpp"

namespace bpj::game {

struct SceneUser {
    double channel_gain = 1.0;
    queueing::TrafficQos traffic{};
};

struct NetworkScene {
    double bandwidth_hz = 1e6;
    double noise_w = 1e-13;
    std::vector<SceneUser> users;
    int b_max = 10;
    double p_max_w = std::numeric_limits<double>::infinity();
    std::optional<phy::TcmConfig> coding;  // engaged => trellis-coded system
};

// Scene JSON: {bandwidth_hz, noise_w, users:[{gain, lambda_pps, packet_bits,
// delay_s}], b_max, coded, p_max_w?}. A coded scene uses `gains` when given,
// otherwise the shipped default table.
NetworkScene load_scene_text(const std::string& json_text,
                             std::optional<phy::TcmConfig> gains = {});
NetworkScene load_scene_file(const std::string& path,
                             std::optional<phy::TcmConfig> gains = {});

struct Strategy {
    phy::ModScheme scheme{2};
    double symbol_rate = 0.0;
    double target_sir = 0.0;  // linear
    double power = std::numeric_limits<double>::quiet_NaN();  // filled at equilibrium
};

// The best-response set is an interval in symbol rate at fixed SIR; the
// Pareto-dominant equilibrium uses its lower endpoint.
struct BestResponseSet {
    Strategy pareto;
    double rs_min = 0.0;
    double rs_max = 0.0;
    bool at_max_rate = false;  // true when the delay bound forces Rs = B
};

// Smallest feasible constellation, symbol rate min{omega*_b/b, B}, SIR at the
// unconstrained optimum or at the delay threshold when rate-capped. Throws
// infeasible_error (carrying the feasibility LHS at b_max) when no
// constellation up to b_max can meet the QoS.
Strategy best_response(const queueing::TrafficQos& traffic, double bandwidth_hz,
                       int b_max = 10, const std::optional<phy::TcmConfig>& coding = {});
BestResponseSet best_response_set(const queueing::TrafficQos& traffic, double bandwidth_hz,
                                  int b_max = 10,
                                  const std::optional<phy::TcmConfig>& coding = {});

// Fraction of network resources the strategy consumes: (1 + B/(Rs*gamma))^-1.
double user_size(const Strategy& s, double bandwidth_hz);

struct UserOutcome {
    Strategy strategy;
    double size = 0.0;     // Phi
    double utility = std::numeric_limits<double>::quiet_NaN();  // bits/joule
};

struct EquilibriumReport {
    std::vector<UserOutcome> users;
    double total_size = 0.0;
    bool feasible = false;            // sum of sizes < 1
    bool power_cap_exceeded = false;  // some power above the scene's p_max
};

// Best responses depend only on own traffic and B; powers then follow in
// closed form. An infeasible capacity condition yields a report with
// feasible=false and no powers, not an exception.
EquilibriumReport nash_equilibrium(const NetworkScene& scene);

// Per-user bits/joule at the equilibrium (also stored in the report).
std::vector<double> equilibrium_utility(const NetworkScene& scene,
                                        const EquilibriumReport& report);

struct DeviationVerdict {
    double max_gain = 0.0;  // largest relative utility gain over the equilibrium
    int max_gain_user = -1;
    std::uint64_t feasible_deviations = 0;
    std::uint64_t delay_infeasible_deviations = 0;
    bool passed = false;  // max_gain <= tolerance
};

// Samples n_samples unilateral deviations per user (constellation, symbol
// rate log-uniform in (1e-4*B, B], power log-uniform within 1e±2 of the
// equilibrium power) with the other users' powers held fixed; recomputes the
// effective gain and utility for each. Deterministic under a fixed seed.
DeviationVerdict verify_equilibrium(const NetworkScene& scene, const EquilibriumReport& report,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    double tolerance = 1e-6);

std::string report_to_json(const NetworkScene& scene, const EquilibriumReport& report);

}  // namespace bpj::game
