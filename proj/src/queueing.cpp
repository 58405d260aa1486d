#include "bpj/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <vector>

#include "bpj/common.hpp"
#include "bpj/optimizer.hpp"

namespace bpj::queueing {

namespace {

void check_link(const LinkRate& link) {
    if (!(link.symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    if (link.ack_overhead_s < 0.0) throw std::invalid_argument("ack overhead must be >= 0");
}

void check_traffic(const TrafficQos& t) {
    if (t.lambda_pps < 0.0) throw std::invalid_argument("arrival rate must be >= 0");
    if (!(t.delay_bound_s > 0.0)) throw std::invalid_argument("delay bound must be positive");
    if (t.pkt.bits < 1) throw std::invalid_argument("packet size must be >= 1 bit");
}

double eta_at_bit_rate(double bit_rate, double L, double lambda, double D) {
    return L * lambda / bit_rate + L / (bit_rate * D) -
           L * L * lambda / (2.0 * bit_rate * bit_rate * D);
}

}  // namespace

double packet_time(const LinkRate& link, const phy::PacketConfig& pkt) {
    check_link(link);
    if (pkt.bits < 1) throw std::invalid_argument("packet size must be >= 1 bit");
    return pkt.bits / (link.scheme.bits_per_symbol() * link.symbol_rate);
}

double avg_delay(const LinkRate& link, const TrafficQos& traffic, double gamma) {
    check_traffic(traffic);
    const double tau = packet_time(link, traffic.pkt);
    const double f = phy::efficiency(link.scheme, traffic.pkt, gamma);
    const double lt = traffic.lambda_pps * tau;
    if (!(f - lt > 1e-12))
        throw unstable_error("queue unstable: packet-success rate " + std::to_string(f) +
                             " does not exceed offered load " + std::to_string(lt));
    return tau * (1.0 - 0.5 * lt) / (f - lt);
}

double eta_threshold(const LinkRate& link, const TrafficQos& traffic) {
    check_traffic(traffic);
    const double L = traffic.pkt.bits;
    const double bit_rate = link.scheme.bits_per_symbol() * link.symbol_rate;
    check_link(link);
    if (bit_rate * traffic.delay_bound_s < L)
        throw infeasible_error(
            "delay bound is below the bare transmission time (b*Rs < L/D)",
            L / (bit_rate * traffic.delay_bound_s));
    return eta_at_bit_rate(bit_rate, L, traffic.lambda_pps, traffic.delay_bound_s);
}

double feasibility_lhs(int b, const TrafficQos& traffic, double bandwidth_hz) {
    check_traffic(traffic);
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return eta_at_bit_rate(b * bandwidth_hz, traffic.pkt.bits, traffic.lambda_pps,
                           traffic.delay_bound_s);
}

bool qos_feasible(int b, const TrafficQos& traffic, double bandwidth_hz) {
    // even at Rs = B the bound must cover the bare transmission time
    if (b * bandwidth_hz * traffic.delay_bound_s < traffic.pkt.bits) return false;
    return feasibility_lhs(b, traffic, bandwidth_hz) < 1.0;
}

double omega_infinity(const TrafficQos& traffic) {
    check_traffic(traffic);
    const double L = traffic.pkt.bits;
    const double D = traffic.delay_bound_s;
    const double t = D * traffic.lambda_pps;
    return (L / D) * (1.0 + t + std::sqrt(1.0 + t * t)) / 2.0;
}

double omega_star(const TrafficQos& traffic, double f_star) {
    check_traffic(traffic);
    if (!(f_star > 0.0 && f_star <= 1.0))
        throw std::domain_error("omega_star needs f* in (0, 1]");
    const double L = traffic.pkt.bits;
    const double D = traffic.delay_bound_s;
    const double t = D * traffic.lambda_pps;
    return (L / D) * (1.0 + t + std::sqrt(1.0 + t * t + 2.0 * (1.0 - f_star) * t)) /
           (2.0 * f_star);
}

double omega_star(const phy::ModScheme& scheme, const TrafficQos& traffic) {
    return omega_star(traffic, optimizer::gamma_star(scheme, traffic.pkt).f_at_star);
}

SimResult simulate_queue(const LinkRate& link, const TrafficQos& traffic, double gamma,
                         std::uint64_t horizon_packets, std::uint64_t seed,
                         std::ostream* trace) {
    check_link(link);
    check_traffic(traffic);
    if (horizon_packets < 10000)
        throw std::invalid_argument("simulation horizon must be >= 1e4 packets");

    const double tau = packet_time(link, traffic.pkt);
    const double slot = tau + link.ack_overhead_s;
    const double f = phy::efficiency(link.scheme, traffic.pkt, gamma);
    const double lambda = traffic.lambda_pps;
    if (lambda > 0.0 && !(f - lambda * slot > 1e-12))
        throw unstable_error("refusing to simulate an unstable queue (f <= lambda*slot)");

    // one stream per purpose, split from the seed
    std::mt19937_64 arrivals_rng(derive_seed(seed, 0));
    std::mt19937_64 attempts_rng(derive_seed(seed, 1));
    auto uniform01 = [](std::mt19937_64& g) {
        return static_cast<double>(g() >> 11) * 0x1.0p-53;
    };

    const double log_fail = std::log1p(-f);
    const std::uint64_t warmup = std::min<std::uint64_t>(horizon_packets / 10, 10000);

    if (trace) *trace << "packet_id,arrival_time,start_service,departure,delay\n";

    constexpr int kBatches = 50;
    std::vector<double> batch_sum(kBatches, 0.0);
    std::vector<std::uint64_t> batch_count(kBatches, 0);
    double delay_sum = 0.0, service_sum = 0.0;

    double t_arrival = 0.0;
    double prev_departure = 0.0;
    char row[160];
    for (std::uint64_t i = 0; i < warmup + horizon_packets; ++i) {
        if (lambda > 0.0) {
            t_arrival += -std::log1p(-uniform01(arrivals_rng)) / lambda;
        } else {
            t_arrival = prev_departure;  // closed loop: no queueing at lambda = 0
        }
        double u = uniform01(attempts_rng);
        double attempts = std::max(1.0, std::ceil(std::log1p(-u) / log_fail));
        double service = attempts * slot;
        double start = std::max(t_arrival, prev_departure);
        double departure = start + service;
        prev_departure = departure;
        if (i < warmup) continue;

        std::uint64_t m = i - warmup;
        double delay = departure - t_arrival;
        delay_sum += delay;
        service_sum += service;
        int batch = static_cast<int>(m * kBatches / horizon_packets);
        batch_sum[batch] += delay;
        batch_count[batch] += 1;
        if (trace) {
            std::snprintf(row, sizeof row, "%llu,%.12g,%.12g,%.12g,%.12g\n",
                          static_cast<unsigned long long>(m), t_arrival, start, departure,
                          delay);
            *trace << row;
        }
    }

    const double n = static_cast<double>(horizon_packets);
    const double mean = delay_sum / n;
    double var_bm = 0.0;
    for (int bi = 0; bi < kBatches; ++bi) {
        double bm = batch_sum[bi] / static_cast<double>(batch_count[bi]);
        var_bm += (bm - mean) * (bm - mean);
    }
    var_bm /= (kBatches - 1);

    SimResult out;
    out.mean_delay = mean;
    out.std_error = std::sqrt(var_bm / kBatches);
    out.mean_service = service_sum / n;
    out.packets = horizon_packets;
    return out;
}

}  // namespace bpj::queueing
