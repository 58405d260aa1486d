#include "bpj/queueing.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <vector>

#include "bpj/common.hpp"
#include "bpj/optimizer.hpp"
#include "doctest.h"

using namespace bpj;
using phy::ModScheme;
using phy::PacketConfig;
using queueing::LinkRate;
using queueing::TrafficQos;

namespace {
const PacketConfig kPkt{100};
}

TEST_CASE("packet transmission time") {
    CHECK(queueing::packet_time(LinkRate{50.0, ModScheme(2)}, kPkt) == 1.0);
    CHECK(queueing::packet_time(LinkRate{50.0, ModScheme(4)}, kPkt) == 0.5);
    CHECK(queueing::packet_time(LinkRate{1e6, ModScheme(2)}, kPkt) == doctest::Approx(5e-5));
    CHECK_THROWS_AS(queueing::packet_time(LinkRate{0.0, ModScheme(2)}, kPkt),
                    std::invalid_argument);
}

TEST_CASE("average delay formula") {
    // tau = 0.01, lambda = 50, f = 0.8: tau (1 - lambda tau / 2)/(f - lambda tau)
    LinkRate link{5000.0, ModScheme(2)};
    TrafficQos traffic{50.0, kPkt, 1.0};
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    CHECK(queueing::avg_delay(link, traffic, gamma) == doctest::Approx(0.025).epsilon(1e-9));

    // lambda = 0 collapses to tau / f
    TrafficQos idle{0.0, kPkt, 1.0};
    for (double g : {3.0, 8.0, 20.0}) {
        double f = phy::efficiency(ModScheme(2), kPkt, g);
        CHECK(queueing::avg_delay(link, idle, g) == doctest::Approx(0.01 / f).epsilon(1e-12));
    }

    // instability rejected
    TrafficQos heavy{90.0, kPkt, 1.0};  // lambda*tau = 0.9 > f(gamma) for small gamma
    CHECK_THROWS_AS(queueing::avg_delay(link, heavy, 1.0), unstable_error);
}

TEST_CASE("average delay monotone in SIR and load") {
    LinkRate link{5000.0, ModScheme(2)};
    double prev = 1e300;
    for (double g : {6.5, 8.0, 12.0, 20.0}) {  // f(6.5) ~ 0.57 keeps rho < 1
        double w = queueing::avg_delay(link, TrafficQos{40.0, kPkt, 1.0}, g);
        CHECK(w < prev);
        prev = w;
    }
    prev = 0.0;
    for (double lam : {0.0, 20.0, 40.0, 60.0}) {
        double w = queueing::avg_delay(link, TrafficQos{lam, kPkt, 1.0}, 10.0);
        CHECK(w > prev);
        prev = w;
    }
}

TEST_CASE("delay threshold eta") {
    // hand-evaluated: L=100, lambda=100, b=2, Rs=1e5, D=2e-3
    LinkRate link{1e5, ModScheme(2)};
    TrafficQos traffic{100.0, kPkt, 2e-3};
    CHECK(queueing::eta_threshold(link, traffic) == doctest::Approx(0.29375).epsilon(1e-12));

    // equality case b*Rs = L/D at lambda = 0 forces eta = 1
    LinkRate tight{50.0, ModScheme(2)};
    CHECK(queueing::eta_threshold(tight, TrafficQos{0.0, kPkt, 1.0}) == 1.0);

    // vanishing constraint: D large, lambda = 0
    CHECK(queueing::eta_threshold(link, TrafficQos{0.0, kPkt, 1e12}) < 1e-9);

    // delay bound below the bare transmission time
    CHECK_THROWS_AS(queueing::eta_threshold(tight, TrafficQos{0.0, kPkt, 0.5}),
                    infeasible_error);
}

TEST_CASE("delay bound binds exactly where f equals eta") {
    LinkRate link{2e4, ModScheme(4)};
    TrafficQos traffic{150.0, kPkt, 4e-3};
    double eta = queueing::eta_threshold(link, traffic);
    double gamma_hat = optimizer::invert_efficiency(ModScheme(4), kPkt, eta);
    CHECK(queueing::avg_delay(link, traffic, gamma_hat) ==
          doctest::Approx(traffic.delay_bound_s).epsilon(1e-9));
    // a slightly higher SIR strictly beats the bound
    CHECK(queueing::avg_delay(link, traffic, gamma_hat * 1.01) < traffic.delay_bound_s);
}

TEST_CASE("eta decreases with symbol rate above the feasibility rate") {
    TrafficQos traffic{200.0, kPkt, 5e-3};
    double r_inf = queueing::omega_infinity(traffic);
    double prev = 2.0;
    for (int i = 0; i <= 40; ++i) {
        double bit_rate = r_inf * std::pow(10.0, 2.0 * i / 40.0);
        LinkRate link{bit_rate / 2.0, ModScheme(2)};
        double eta = queueing::eta_threshold(link, traffic);
        CHECK(eta < prev);
        prev = eta;
    }
}

TEST_CASE("fixed-b feasibility") {
    const double B = 1e4;
    // lambda = 0: feasible iff D > L/(bB)
    CHECK(queueing::qos_feasible(2, TrafficQos{0.0, kPkt, 0.006}, B));
    CHECK_FALSE(queueing::qos_feasible(2, TrafficQos{0.0, kPkt, 0.004}, B));

    // the verdict flips exactly where the feasibility expression crosses 1
    TrafficQos probe{80.0, kPkt, 1.0};
    double lo = 1e-5, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = std::sqrt(lo * hi);
        probe.delay_bound_s = mid;
        (queueing::qos_feasible(2, probe, B) ? hi : lo) = mid;
    }
    probe.delay_bound_s = hi;
    CHECK(queueing::feasibility_lhs(2, probe, B) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rate thresholds") {
    TrafficQos idle{0.0, kPkt, 0.02};
    CHECK(queueing::omega_infinity(idle) == doctest::Approx(100.0 / 0.02).epsilon(1e-12));
    CHECK(queueing::omega_star(idle, 1.0) == doctest::Approx(100.0 / 0.02).epsilon(1e-12));

    // eta crosses 1 exactly at omega_infinity
    TrafficQos traffic{120.0, kPkt, 3e-3};
    double r_inf = queueing::omega_infinity(traffic);
    LinkRate just_above{r_inf * (1.0 + 1e-9) / 2.0, ModScheme(2)};
    LinkRate just_below{r_inf * (1.0 - 1e-9) / 2.0, ModScheme(2)};
    CHECK(queueing::eta_threshold(just_above, traffic) < 1.0);
    CHECK(queueing::eta_threshold(just_below, traffic) > 1.0);

    // at bit rate omega*_b the delay-constrained SIR equals gamma*_b
    for (int b : {2, 6}) {
        ModScheme scheme(b);
        auto op = optimizer::gamma_star(scheme, kPkt);
        double om = queueing::omega_star(scheme, traffic);
        LinkRate link{om / b, scheme};
        double eta = queueing::eta_threshold(link, traffic);
        CHECK(eta == doctest::Approx(op.f_at_star).epsilon(1e-9));
        double gamma_hat = optimizer::invert_efficiency(scheme, kPkt, eta);
        CHECK(gamma_hat == doctest::Approx(op.gamma_star).epsilon(1e-7));
    }
}

TEST_CASE("delay-constrained SIR grows at least exponentially with b when delay is tight") {
    // tight-delay regime (eta_2 within [0.75, 0.98]); monotonicity also holds
    // far outside it, the ratio growth does not
    std::mt19937_64 rng(4242);
    auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    int tested = 0;
    for (int trial = 0; trial < 200 && tested < 10; ++trial) {
        double lambda = std::pow(10.0, -1.0 + 3.0 * u01());
        double D = std::pow(10.0, -3.0 + 3.0 * u01());
        double target = 0.75 + 0.23 * u01();
        // pick the bit rate putting eta_2 at the target (larger quadratic root)
        double L = 100.0, t = D * lambda;
        double bit_rate =
            (L / (2.0 * D * target)) * (1.0 + t + std::sqrt((1.0 + t) * (1.0 + t) -
                                                            2.0 * t * target));
        double rs = bit_rate / 2.0;
        TrafficQos traffic{lambda, kPkt, D};
        std::vector<double> gamma_hat;
        bool usable = true;
        for (int b = 2; b <= 10 && usable; b += 2) {
            LinkRate link{rs, ModScheme(b)};
            double eta = queueing::eta_threshold(link, traffic);
            usable = eta > std::exp2(-100.0) && eta < 1.0 - std::exp2(-100.0);
            if (usable)
                gamma_hat.push_back(
                    optimizer::invert_efficiency(ModScheme(b), kPkt, eta));
        }
        if (!usable) continue;
        ++tested;
        for (int i = 0; i + 1 < 5; ++i) CHECK(gamma_hat[i + 1] > gamma_hat[i]);
        double prev_ratio = 0.0;
        for (int i = 0; i + 1 < 5; ++i) {
            double ratio = gamma_hat[i + 1] / gamma_hat[i];
            CHECK(ratio > prev_ratio);
            prev_ratio = ratio;
        }
    }
    CHECK(tested == 10);
}

TEST_CASE("simulator: no queueing at lambda zero") {
    LinkRate link{5000.0, ModScheme(2)};
    TrafficQos idle{0.0, kPkt, 1.0};
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    auto res = queueing::simulate_queue(link, idle, gamma, 20000, 7);
    // every delay equals its service time (up to absolute-time rounding)
    CHECK(res.mean_delay == doctest::Approx(res.mean_service).epsilon(1e-9));
    double expected = queueing::packet_time(link, kPkt) / 0.8;
    CHECK(res.mean_delay == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("simulator agrees with the analytic delay at moderate load") {
    LinkRate link{5000.0, ModScheme(2)};
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    TrafficQos traffic{40.0, kPkt, 1.0};  // rho = lambda*tau/f = 0.5
    auto res = queueing::simulate_queue(link, traffic, gamma, 100000, 12345);
    double analytic = queueing::avg_delay(link, traffic, gamma);
    CHECK(std::fabs(res.mean_delay - analytic) <= 3.0 * res.std_error);
    CHECK(res.mean_service ==
          doctest::Approx(queueing::packet_time(link, kPkt) / 0.8).epsilon(0.01));
}

TEST_CASE("simulator is deterministic under a fixed seed") {
    LinkRate link{5000.0, ModScheme(2)};
    TrafficQos traffic{40.0, kPkt, 1.0};
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    std::ostringstream t1, t2;
    auto a = queueing::simulate_queue(link, traffic, gamma, 10000, 99, &t1);
    auto b = queueing::simulate_queue(link, traffic, gamma, 10000, 99, &t2);
    CHECK(std::memcmp(&a.mean_delay, &b.mean_delay, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.std_error, &b.std_error, sizeof(double)) == 0);
    CHECK(t1.str() == t2.str());
    auto c = queueing::simulate_queue(link, traffic, gamma, 10000, 100);
    CHECK(a.mean_delay != c.mean_delay);
}

TEST_CASE("simulator trace rows are consistent") {
    LinkRate link{5000.0, ModScheme(2)};
    TrafficQos traffic{40.0, kPkt, 1.0};
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    std::ostringstream trace;
    queueing::simulate_queue(link, traffic, gamma, 10000, 3, &trace);
    std::istringstream in(trace.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "packet_id,arrival_time,start_service,departure,delay");
    std::string line;
    std::size_t rows = 0;
    double prev_departure = 0.0;
    while (std::getline(in, line)) {
        unsigned long long id;
        double arr, start, dep, delay;
        REQUIRE(std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf,%lf", &id, &arr, &start, &dep,
                            &delay) == 5);
        CHECK(id == rows);
        CHECK(start >= arr);
        CHECK(start >= prev_departure - 1e-9 * dep);
        CHECK(dep > start);
        CHECK(delay == doctest::Approx(dep - arr).epsilon(1e-9));
        prev_departure = dep;
        ++rows;
    }
    CHECK(rows == 10000);
}

TEST_CASE("simulator input validation") {
    LinkRate link{5000.0, ModScheme(2)};
    CHECK_THROWS_AS(
        queueing::simulate_queue(link, TrafficQos{40.0, kPkt, 1.0}, 5.0, 100, 1),
        std::invalid_argument);  // horizon too small
    CHECK_THROWS_AS(
        queueing::simulate_queue(link, TrafficQos{90.0, kPkt, 1.0}, 1.0, 20000, 1),
        unstable_error);
}

TEST_CASE("ack overhead enters the simulator but not the analytic formulas") {
    LinkRate with_ack{5000.0, ModScheme(2), 0.002};
    LinkRate no_ack{5000.0, ModScheme(2)};
    TrafficQos idle{0.0, kPkt, 1.0};
    CHECK(queueing::packet_time(with_ack, kPkt) == queueing::packet_time(no_ack, kPkt));
    double gamma = optimizer::invert_efficiency(ModScheme(2), kPkt, 0.8);
    auto a = queueing::simulate_queue(with_ack, idle, gamma, 10000, 5);
    auto b = queueing::simulate_queue(no_ack, idle, gamma, 10000, 5);
    CHECK(a.mean_service == doctest::Approx(b.mean_service * 1.2).epsilon(1e-9));
}
