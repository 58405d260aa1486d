#include "bpj/phy.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "bpj/common.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bpj;
using phy::ModScheme;
using phy::PacketConfig;

namespace {
const PacketConfig kPkt{100};
}

TEST_CASE("constellation parameters") {
    CHECK(phy::alpha_of(2) == 1.0);
    CHECK(phy::alpha_of(4) == 1.5);
    CHECK(phy::alpha_of(6) == 1.75);
    CHECK(phy::alpha_of(8) == 1.875);
    CHECK(phy::alpha_of(10) == 1.9375);
    CHECK(phy::beta_of(2) == 1.0);
    CHECK(phy::beta_of(4) == doctest::Approx(0.2));
    CHECK(phy::beta_of(6) == doctest::Approx(3.0 / 63.0));
    CHECK(phy::beta_of(10) == doctest::Approx(3.0 / 1023.0));
    CHECK(ModScheme(4).points() == 16);

    CHECK_THROWS_AS(ModScheme(3), std::invalid_argument);  // odd b rejected
    CHECK_THROWS_AS(ModScheme(0), std::invalid_argument);
    CHECK_THROWS_AS(phy::alpha_of(7), std::invalid_argument);
}

TEST_CASE("efficiency is exactly zero at zero SIR") {
    for (int b = 2; b <= 10; b += 2)
        for (int L : {1, 10, 100, 1000})
            CHECK(phy::efficiency(ModScheme(b), PacketConfig{L}, 0.0) == 0.0);
}

TEST_CASE("efficiency reference values") {
    // published operating points, to their printed precision
    CHECK(phy::efficiency(ModScheme(2), kPkt, std::pow(10.0, 0.91)) ==
          doctest::Approx(0.801).epsilon(0.01));
    CHECK(phy::efficiency(ModScheme(6), kPkt, std::pow(10.0, 2.16)) ==
          doctest::Approx(0.771).epsilon(0.01));
    CHECK_THROWS_AS(phy::efficiency(ModScheme(2), kPkt, -1e-9), std::domain_error);
    CHECK_THROWS_AS(phy::efficiency(ModScheme(2), PacketConfig{0}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("efficiency monotone, bounded, S-shaped") {
    // gamma* per constellation, for scaling the scan windows
    const double gstar[5] = {8.08, 37.1, 143.8, 538.9, 2009.7};
    for (int bi = 0; bi < 5; ++bi) {
        int b = 2 * (bi + 1);
        ModScheme scheme(b);
        const double sup = 1.0 - std::exp2(-100.0);
        // strictly increasing until the double representation saturates at
        // the 1 - 2^-L supremum; never above it
        double prev = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            double g = std::pow(10.0, -2.0 + 7.0 * i / 2000.0);
            double f = phy::efficiency(scheme, kPkt, g);
            CHECK(f <= sup);
            if (prev < 0.999 && f < 0.999) CHECK(f > prev);
            prev = f;
        }
        // one inflection: the second difference on a linear grid around the
        // operating point changes sign exactly once
        std::vector<double> vals;
        double lo = gstar[bi] / 30.0, hi = 2.0 * gstar[bi];
        for (int i = 0; i <= 1500; ++i)
            vals.push_back(phy::efficiency(scheme, kPkt, lo + (hi - lo) * i / 1500.0));
        int sign_changes = 0;
        double last = 0.0;
        for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
            double d2 = vals[i + 1] - 2.0 * vals[i] + vals[i - 1];
            if (std::fabs(d2) > 1e-13) {
                if (last != 0.0 && (d2 > 0) != (last > 0)) ++sign_changes;
                last = d2;
            }
        }
        CHECK(sign_changes == 1);
    }
}

TEST_CASE("efficiency decreases with constellation size at fixed SIR") {
    // above ~10^3 the low-order curves saturate at the common supremum in
    // double precision, so the ordering is checked in the operating range
    for (double g : {1.0, 8.0, 50.0, 300.0}) {
        for (int b = 2; b <= 8; b += 2) {
            double lo = phy::efficiency(ModScheme(b), kPkt, g);
            double hi_order = phy::efficiency(ModScheme(b + 2), kPkt, g);
            CHECK(hi_order < lo);
        }
    }
}

TEST_CASE("efficiency matches the libm oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ug(-2.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        int b = 2 * (1 + static_cast<int>(5.0 * (rng() >> 11) * 0x1.0p-53));
        if (b > 10) b = 10;
        double g = std::pow(10.0, ug(rng));
        double mine = phy::efficiency(ModScheme(b), kPkt, g);
        double ref = oracle::efficiency(b, 100, g);
        if (ref > 1e-280)
            CHECK(mine == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("analytic derivative agrees with central differences") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ug(-1.0, 4.5);
    for (int b = 2; b <= 10; b += 2) {
        for (int i = 0; i < 60; ++i) {
            double g = std::pow(10.0, ug(rng));
            // near the supremum the central difference has no significant
            // bits left; compare where it does
            if (phy::efficiency(ModScheme(b), kPkt, g) > 0.99) continue;
            double d = phy::efficiency_derivative(ModScheme(b), kPkt, g);
            double h = 1e-5 * g;
            double fd = (phy::efficiency(ModScheme(b), kPkt, g + h) -
                         phy::efficiency(ModScheme(b), kPkt, g - h)) /
                        (2.0 * h);
            if (std::fabs(fd) > 1e-200) {
                CHECK(d == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
    // a fixed reference point, cross-checked the same way
    double d = phy::efficiency_derivative(ModScheme(4), kPkt, 10.0);
    double fd = (phy::efficiency(ModScheme(4), kPkt, 10.0 + 1e-4) -
                 phy::efficiency(ModScheme(4), kPkt, 10.0 - 1e-4)) /
                2e-4;
    CHECK(d == doctest::Approx(fd).epsilon(1e-6));
    CHECK_THROWS_AS(phy::efficiency_derivative(ModScheme(2), kPkt, 0.0), std::domain_error);
}

TEST_CASE("coded derivative agrees with an independent finite difference") {
    auto cfg = phy::TcmConfig::defaults();
    for (int b : {2, 6, 10}) {
        ModScheme scheme(b, cfg);
        for (double g : {2.0, 10.0, 120.0, 900.0}) {
            double d = phy::efficiency_derivative(scheme, kPkt, g);
            double h = 1e-5 * g;
            double fd = (phy::efficiency(scheme, kPkt, g + h) -
                         phy::efficiency(scheme, kPkt, g - h)) /
                        (2.0 * h);
            if (std::fabs(fd) > 1e-200) CHECK(d == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("gaussian tail function and inverse") {
    CHECK(phy::q_tail(0.0) == 0.5);
    CHECK(phy::q_tail_inv(0.5) == 0.0);
    // frozen from the quadrature oracle
    CHECK(phy::q_tail(1.2816) == doctest::Approx(0.09999150009767517).epsilon(1e-12));
    CHECK(phy::q_tail(1.2816) == doctest::Approx(oracle::q_quadrature(1.2816)).epsilon(1e-12));

    for (double p :
         {1e-12, 1e-9, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1.0 - 1e-9}) {
        double x = phy::q_tail_inv(p);
        CHECK(phy::q_tail(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(phy::q_tail_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(phy::q_tail_inv(1.0), std::domain_error);
    CHECK_THROWS_AS(phy::q_tail_inv(-0.2), std::domain_error);
}

TEST_CASE("coding gain curve") {
    std::map<int, phy::GainParams> flat{{4, {1.8, 0.0, 3.0, 25.0}}};
    phy::TcmConfig cfg_flat(flat);
    for (double g : {0.0, 1.0, 25.0, 1e6})
        CHECK(phy::coding_gain(cfg_flat, 4, g) == 1.8);  // arctan term vanishes

    auto cfg = phy::TcmConfig::defaults();
    for (int b = 2; b <= 10; b += 2) {
        const auto& p = cfg.params_for(b);
        CHECK(phy::coding_gain(cfg, b, p.gamma_bar) == p.a);  // atan(0) == 0
        // monotone increasing and saturating
        double prev = phy::coding_gain(cfg, b, 0.0);
        CHECK(prev > 0.0);
        for (double g = 1.0; g < 1e7; g *= 3.0) {
            double cur = phy::coding_gain(cfg, b, g);
            CHECK(cur >= prev);
            prev = cur;
        }
        CHECK(prev == doctest::Approx(p.a + p.c * std::acos(-1.0) / 2.0).epsilon(1e-3));
    }
    CHECK_THROWS_AS(phy::coding_gain(cfg, 12, 1.0), config_error);
    CHECK_THROWS_AS(phy::coding_gain(cfg, 2, -1.0), std::domain_error);
}

TEST_CASE("unit coding gain reproduces the uncoded curve exactly") {
    phy::TcmConfig unit(std::map<int, phy::GainParams>{{2, {1.0, 0.0, 1.0, 5.0}},
                                                       {6, {1.0, 0.0, 1.0, 5.0}}});
    for (int b : {2, 6}) {
        ModScheme coded(b, unit), uncoded(b);
        for (double g = 0.0; g < 400.0; g += 7.3) {
            double a = phy::efficiency(coded, kPkt, g);
            double c = phy::efficiency(uncoded, kPkt, g);
            CHECK(std::memcmp(&a, &c, sizeof a) == 0);
        }
    }
}

TEST_CASE("TCM configuration validation") {
    using phy::GainParams;
    // gain curve dipping non-positive over gamma >= 0
    CHECK_THROWS_AS(phy::TcmConfig(std::map<int, GainParams>{{2, {0.1, -0.5, 1.0, 5.0}}}),
                    config_error);
    CHECK_THROWS_AS(phy::TcmConfig(std::map<int, GainParams>{{2, {0.2, 0.6, 2.0, 100.0}}}),
                    config_error);  // A - C*atan(gbar/D) < 0
    CHECK_THROWS_AS(phy::TcmConfig(std::map<int, GainParams>{{2, {1.5, 0.3, -1.0, 5.0}}}),
                    config_error);  // width must be positive
    CHECK_THROWS_AS(phy::TcmConfig(std::map<int, GainParams>{}), config_error);
    CHECK_THROWS_AS(phy::TcmConfig(std::map<int, GainParams>{{2, {1.5, 0.3, 1.0, 5.0}}}, 3, 2),
                    config_error);  // rate must be in (0,1)

    auto cfg = phy::TcmConfig::defaults();
    CHECK(cfg.info_bits(2) == 1);
    CHECK(cfg.coded_bits(2) == 2);
    CHECK(cfg.info_bits(6) == 2);
    CHECK(cfg.coded_bits(6) == 3);
    CHECK(cfg.code_rate(2) == doctest::Approx(0.5));
    CHECK(cfg.code_rate(8) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(ModScheme(4, phy::TcmConfig(std::map<int, GainParams>{
                                    {2, {1.5, 0.3, 1.0, 5.0}}})),
                    config_error);  // no entry for b = 4
}

TEST_CASE("gain parameter file round trip with dB conversion") {
    auto cfg = phy::TcmConfig::defaults();
    auto reloaded = phy::load_gain_params_text(phy::gain_params_to_json(cfg));
    for (int b = 2; b <= 10; b += 2) {
        const auto& a = cfg.params_for(b);
        const auto& r = reloaded.params_for(b);
        CHECK(r.a == doctest::Approx(a.a).epsilon(1e-12));
        CHECK(r.c == doctest::Approx(a.c).epsilon(1e-12));
        CHECK(r.d == doctest::Approx(a.d).epsilon(1e-12));
        CHECK(r.gamma_bar == doctest::Approx(a.gamma_bar).epsilon(1e-12));
    }
    // the file schema stores D and gamma_bar in dB
    auto single = phy::load_gain_params_text(
        R"([{"b": 4, "A": 1.5, "C": 0.4, "D": 10.0, "gamma_bar": 20.0}])");
    CHECK(single.params_for(4).d == doctest::Approx(10.0));           // 10 dB -> 10x
    CHECK(single.params_for(4).gamma_bar == doctest::Approx(100.0));  // 20 dB -> 100x

    CHECK_THROWS_AS(phy::load_gain_params_text("not json"), config_error);
    CHECK_THROWS_AS(phy::load_gain_params_text("[]"), config_error);
    CHECK_THROWS_AS(phy::load_gain_params_text(R"([{"b": 4, "A": 1.5}])"), config_error);
}

TEST_CASE("gain fit recovers exact parameters") {
    phy::GainParams truth{1.7, 0.4, 5.0, 30.0};
    std::vector<phy::GainSample> samples;
    for (double g = 1.0; g <= 200.0; g *= 1.6)
        samples.push_back({g, truth.a + truth.c * std::atan((g - truth.gamma_bar) / truth.d)});
    auto fit = phy::fit_coding_gain(samples);
    CHECK(fit.params.a == doctest::Approx(truth.a).epsilon(1e-6));
    CHECK(fit.params.c == doctest::Approx(truth.c).epsilon(1e-6));
    CHECK(fit.params.d == doctest::Approx(truth.d).epsilon(1e-6));
    CHECK(fit.params.gamma_bar == doctest::Approx(truth.gamma_bar).epsilon(1e-6));
    CHECK(fit.rms < 1e-8);
}

TEST_CASE("gain fit on collinear samples reports its residual") {
    std::vector<phy::GainSample> samples;
    for (double g : {10.0, 20.0, 30.0, 40.0}) samples.push_back({g, 0.9 + 0.001 * g});
    auto fit = phy::fit_coding_gain(samples);
    // recompute the RMS of the returned parameters independently
    double sse = 0.0;
    for (const auto& s : samples) {
        double r = fit.params.a +
                   fit.params.c * std::atan((s.gamma - fit.params.gamma_bar) / fit.params.d) -
                   s.gain;
        sse += r * r;
    }
    CHECK(fit.rms == doctest::Approx(std::sqrt(sse / samples.size())).epsilon(1e-9));
    CHECK(fit.rms < 1e-3);  // a line is well within reach of the arctan family
}

TEST_CASE("gain fit rejects degenerate samples") {
    std::vector<phy::GainSample> same_gamma(5, {10.0, 1.5});
    CHECK_THROWS_AS(phy::fit_coding_gain(same_gamma), std::invalid_argument);
    std::vector<phy::GainSample> too_few = {{1.0, 1.0}, {2.0, 1.1}, {3.0, 1.2}};
    CHECK_THROWS_AS(phy::fit_coding_gain(too_few), std::invalid_argument);
}

TEST_CASE("batched efficiency matches pointwise evaluation, coded and uncoded") {
    auto cfg = phy::TcmConfig::defaults();
    std::vector<double> gammas = {0.0, 0.3, 2.0, 8.08, 55.5, 410.0, 2.2e3};
    std::vector<double> out(gammas.size());
    for (ModScheme scheme : {ModScheme(4), ModScheme(4, cfg)}) {
        phy::efficiency_many(scheme, kPkt, gammas, out);
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            double pt = phy::efficiency(scheme, kPkt, gammas[i]);
            CHECK(std::memcmp(&out[i], &pt, sizeof pt) == 0);
        }
    }
}
