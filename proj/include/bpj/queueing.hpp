// M/G/1 delay model for ARQ packet transmission: geometric number of
// transmission attempts, Pollaczek-Khintchine average delay, the
// delay-constraint threshold eta_b, rate feasibility thresholds, and a
// discrete-event simulator validating the analytic formula.
#pragma once

#include <cstdint>
#include <iosfwd>

#include "bpj/phy.hpp"

namespace bpj::queueing {

// Poisson arrivals at lambda packets/s, L-bit packets, average-delay bound D.
struct TrafficQos {
    double lambda_pps = 0.0;
    phy::PacketConfig pkt{};
    double delay_bound_s = 1.0;
};

// A transmit configuration: symbol rate and constellation. ack_overhead_s is
// the ACK/NACK turnaround per attempt; it is carried by the simulator but
// excluded from the analytic formulas, which treat it as negligible.
struct LinkRate {
    double symbol_rate = 1.0;  // symbols/s
    phy::ModScheme scheme{2};
    double ack_overhead_s = 0.0;
};

// tau = L / (b * Rs)
double packet_time(const LinkRate& link, const phy::PacketConfig& pkt);

// Average total (queueing + transmission) delay at SIR gamma. Throws
// unstable_error when f(gamma) <= lambda*tau (+1e-12 margin).
double avg_delay(const LinkRate& link, const TrafficQos& traffic, double gamma);

// Minimum packet-success probability meeting the delay bound: the constraint
// avg_delay <= D holds iff f(gamma) >= eta. Requires b*Rs >= L/D (the bound
// cannot be smaller than the bare transmission time); throws
// infeasible_error otherwise.
double eta_threshold(const LinkRate& link, const TrafficQos& traffic);

// Left side of the fixed-b feasibility condition (threshold evaluated at the
// maximal symbol rate Rs = B); feasible iff < 1.
double feasibility_lhs(int b, const TrafficQos& traffic, double bandwidth_hz);

// (lambda, D) feasible at constellation b within bandwidth B.
bool qos_feasible(int b, const TrafficQos& traffic, double bandwidth_hz);

// Infimum bit rate b*Rs with eta < 1.
double omega_infinity(const TrafficQos& traffic);

// Bit rate at which the delay-constrained SIR equals gamma*_b; above it the
// unconstrained optimum is delay-feasible. Overload taking f_star avoids
// recomputing the optimum.
double omega_star(const phy::ModScheme& scheme, const TrafficQos& traffic);
double omega_star(const TrafficQos& traffic, double f_star);

struct SimResult {
    double mean_delay;    // sample mean of total per-packet delay
    double std_error;     // batch-means standard error of the mean
    double mean_service;  // sample mean service time (-> tau/f)
    std::uint64_t packets;
};

// FIFO single-server simulation: Poisson arrivals, service = (number of
// attempts) * slot time with geometric attempt count at success probability
// f(gamma). Inverse-CDF sampling from two streams split off `seed`
// (interarrivals, attempt counts), so runs are reproducible bit-for-bit.
// lambda == 0 degenerates to back-to-back packets with no queueing wait.
// horizon_packets >= 1e4 are measured after a discarded warmup; `trace`, when
// given, receives one CSV row per measured packet.
SimResult simulate_queue(const LinkRate& link, const TrafficQos& traffic, double gamma,
                         std::uint64_t horizon_packets, std::uint64_t seed,
                         std::ostream* trace = nullptr);

}  // namespace bpj::queueing
