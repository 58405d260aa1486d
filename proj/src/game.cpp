#include "bpj/game.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "bpj/common.hpp"
#include "bpj/optimizer.hpp"
#include "json.hpp"

namespace bpj::game {

namespace {

void check_scene(const NetworkScene& scene) {
    if (!(scene.bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!(scene.noise_w > 0.0)) throw std::invalid_argument("noise power must be positive");
    if (scene.users.empty()) throw std::invalid_argument("scene needs at least one user");
    if (scene.b_max < 2 || scene.b_max % 2 != 0)
        throw std::invalid_argument("b_max must be an even integer >= 2");
    if (!(scene.p_max_w > 0.0)) throw std::invalid_argument("p_max must be positive");
    for (const auto& u : scene.users)
        if (!(u.channel_gain > 0.0))
            throw std::invalid_argument("channel gains must be positive");
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace

BestResponseSet best_response_set(const queueing::TrafficQos& traffic, double bandwidth_hz,
                                  int b_max, const std::optional<phy::TcmConfig>& coding) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    const double f_sup = 1.0 - std::ldexp(1.0, -traffic.pkt.bits);

    int chosen = 0;
    for (int b = 2; b <= b_max; b += 2) {
        // Prop.-1 condition, tightened by the efficiency supremum 1 - 2^-L
        if (queueing::qos_feasible(b, traffic, bandwidth_hz) &&
            queueing::feasibility_lhs(b, traffic, bandwidth_hz) < f_sup) {
            chosen = b;
            break;
        }
    }
    if (chosen == 0)
        throw infeasible_error(
            "traffic (lambda, D) infeasible for every constellation up to b_max",
            queueing::feasibility_lhs(b_max, traffic, bandwidth_hz));

    phy::ModScheme scheme(chosen, coding);
    auto opt = optimizer::gamma_star(scheme, traffic.pkt);
    double rs_unconstrained = queueing::omega_star(traffic, opt.f_at_star) / chosen;

    BestResponseSet out;
    out.rs_max = bandwidth_hz;
    if (rs_unconstrained <= bandwidth_hz) {
        out.rs_min = rs_unconstrained;
        out.at_max_rate = false;
        out.pareto = Strategy{scheme, rs_unconstrained, opt.gamma_star};
    } else {
        out.rs_min = bandwidth_hz;
        out.at_max_rate = true;
        queueing::LinkRate link{bandwidth_hz, scheme};
        double eta = queueing::eta_threshold(link, traffic);
        double gamma_hat = optimizer::invert_efficiency(scheme, traffic.pkt, eta);
        out.pareto = Strategy{scheme, bandwidth_hz, gamma_hat};
    }
    return out;
}

Strategy best_response(const queueing::TrafficQos& traffic, double bandwidth_hz, int b_max,
                       const std::optional<phy::TcmConfig>& coding) {
    return best_response_set(traffic, bandwidth_hz, b_max, coding).pareto;
}

double user_size(const Strategy& s, double bandwidth_hz) {
    if (!(s.symbol_rate > 0.0) || !(s.target_sir > 0.0))
        throw std::invalid_argument("user size needs positive symbol rate and SIR");
    return 1.0 / (1.0 + bandwidth_hz / (s.symbol_rate * s.target_sir));
}

EquilibriumReport nash_equilibrium(const NetworkScene& scene) {
    check_scene(scene);
    EquilibriumReport report;
    report.users.reserve(scene.users.size());

    for (std::size_t k = 0; k < scene.users.size(); ++k) {
        Strategy s;
        try {
            s = best_response(scene.users[k].traffic, scene.bandwidth_hz, scene.b_max,
                              scene.coding);
        } catch (const infeasible_error& e) {
            throw infeasible_error("user " + std::to_string(k) + ": " + e.what(),
                                   e.residual());
        }
        UserOutcome outcome;
        outcome.strategy = s;
        outcome.size = user_size(s, scene.bandwidth_hz);
        report.users.push_back(std::move(outcome));
        report.total_size += report.users.back().size;
    }

    report.feasible = report.total_size < 1.0;
    if (!report.feasible) return report;  // capacity condition violated; no powers

    const double slack = 1.0 - report.total_size;
    for (std::size_t k = 0; k < scene.users.size(); ++k) {
        auto& u = report.users[k];
        u.strategy.power = (scene.noise_w / scene.users[k].channel_gain) * (u.size / slack);
        if (u.strategy.power > scene.p_max_w) report.power_cap_exceeded = true;
    }

    auto utils = equilibrium_utility(scene, report);
    for (std::size_t k = 0; k < utils.size(); ++k) report.users[k].utility = utils[k];
    return report;
}

std::vector<double> equilibrium_utility(const NetworkScene& scene,
                                        const EquilibriumReport& report) {
    check_scene(scene);
    if (!report.feasible)
        throw infeasible_error("utilities are undefined for an infeasible equilibrium");
    if (report.users.size() != scene.users.size())
        throw std::invalid_argument("report does not match scene");

    std::vector<double> out(report.users.size());
    for (std::size_t k = 0; k < report.users.size(); ++k) {
        const auto& u = report.users[k];
        const double gamma = u.strategy.target_sir;
        const double f =
            phy::efficiency(u.strategy.scheme, scene.users[k].traffic.pkt, gamma);
        const double others = report.total_size - u.size;
        // per-rate form scaled by b to stay consistent with throughput/power
        out[k] = u.strategy.scheme.bits_per_symbol() * scene.bandwidth_hz * f *
                 scene.users[k].channel_gain / (scene.noise_w * gamma) *
                 (1.0 - others / (1.0 - u.size));
    }
    return out;
}

DeviationVerdict verify_equilibrium(const NetworkScene& scene, const EquilibriumReport& report,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    double tolerance) {
    check_scene(scene);
    if (!report.feasible)
        throw infeasible_error("cannot verify an infeasible equilibrium");

    const double B = scene.bandwidth_hz;
    DeviationVerdict verdict;

    for (std::size_t k = 0; k < scene.users.size(); ++k) {
        const auto& me = report.users[k];
        const auto& traffic = scene.users[k].traffic;
        const double L = traffic.pkt.bits;
        const double D = traffic.delay_bound_s;

        double interference = scene.noise_w;
        for (std::size_t j = 0; j < report.users.size(); ++j)
            if (j != k) interference += report.users[j].strategy.power *
                                        scene.users[j].channel_gain;
        const double h_eff = scene.users[k].channel_gain / interference;
        const double u_star = me.utility;

        std::mt19937_64 rng(derive_seed(seed, 1000 + k));

        struct Sample {
            int b;
            double rs, p, gamma;
        };
        std::vector<Sample> samples;
        samples.reserve(n_samples + 1);
        // the equilibrium action itself anchors the comparison
        samples.push_back({me.strategy.scheme.bits_per_symbol(), me.strategy.symbol_rate,
                           me.strategy.power,
                           (B / me.strategy.symbol_rate) * me.strategy.power * h_eff});
        const int n_bs = scene.b_max / 2;
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            int b = 2 * (1 + static_cast<int>(uniform01(rng) * n_bs));
            if (b > scene.b_max) b = scene.b_max;
            double rs = B * std::pow(10.0, -4.0 * uniform01(rng));
            double p = me.strategy.power * std::pow(10.0, -2.0 + 4.0 * uniform01(rng));
            samples.push_back({b, rs, p, (B / rs) * p * h_eff});
        }

        // batch the efficiency evaluations per constellation
        std::vector<double> f_of(samples.size());
        for (int b = 2; b <= scene.b_max; b += 2) {
            std::vector<std::size_t> idx;
            std::vector<double> gammas;
            for (std::size_t i = 0; i < samples.size(); ++i)
                if (samples[i].b == b) {
                    idx.push_back(i);
                    gammas.push_back(samples[i].gamma);
                }
            if (idx.empty()) continue;
            phy::ModScheme scheme(b, scene.coding);
            std::vector<double> fs(idx.size());
            phy::efficiency_many(scheme, traffic.pkt, gammas, fs);
            for (std::size_t i = 0; i < idx.size(); ++i) f_of[idx[i]] = fs[i];
        }

        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            const double f = f_of[i];
            const double bit_rate = s.b * s.rs;
            bool delay_ok = bit_rate * D >= L;
            if (delay_ok) {
                double eta = L * traffic.lambda_pps / bit_rate + L / (bit_rate * D) -
                             L * L * traffic.lambda_pps / (2.0 * bit_rate * bit_rate * D);
                delay_ok = f >= eta;
            }
            if (!delay_ok) {
                verdict.delay_infeasible_deviations += 1;
                continue;
            }
            verdict.feasible_deviations += 1;
            double utility = bit_rate * f / s.p;
            double gain = (utility - u_star) / u_star;
            if (gain > verdict.max_gain) {
                verdict.max_gain = gain;
                verdict.max_gain_user = static_cast<int>(k);
            }
        }
    }

    verdict.passed = verdict.max_gain <= tolerance;
    return verdict;
}

NetworkScene load_scene_text(const std::string& json_text,
                             std::optional<phy::TcmConfig> gains) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("scene is not valid JSON: ") + e.what());
    }
    NetworkScene scene;
    try {
        scene.bandwidth_hz = doc.at("bandwidth_hz").get<double>();
        scene.noise_w = doc.at("noise_w").get<double>();
        for (const auto& ju : doc.at("users")) {
            SceneUser u;
            u.channel_gain = ju.at("gain").get<double>();
            u.traffic.lambda_pps = ju.at("lambda_pps").get<double>();
            u.traffic.pkt.bits = ju.at("packet_bits").get<int>();
            u.traffic.delay_bound_s = ju.at("delay_s").get<double>();
            scene.users.push_back(u);
        }
        scene.b_max = doc.value("b_max", 10);
        if (doc.contains("p_max_w")) scene.p_max_w = doc.at("p_max_w").get<double>();
        if (doc.value("coded", false))
            scene.coding = gains ? std::move(*gains) : phy::TcmConfig::defaults();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("scene malformed: ") + e.what());
    }
    check_scene(scene);
    for (const auto& u : scene.users) {
        if (u.traffic.lambda_pps < 0.0 || !(u.traffic.delay_bound_s > 0.0) ||
            u.traffic.pkt.bits < 1)
            throw config_error("scene user has invalid traffic parameters");
    }
    return scene;
}

NetworkScene load_scene_file(const std::string& path, std::optional<phy::TcmConfig> gains) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scene_text(ss.str(), std::move(gains));
}

std::string report_to_json(const NetworkScene& scene, const EquilibriumReport& report) {
    nlohmann::json users = nlohmann::json::array();
    for (std::size_t k = 0; k < report.users.size(); ++k) {
        const auto& u = report.users[k];
        nlohmann::json ju{{"user", k},
                          {"b", u.strategy.scheme.bits_per_symbol()},
                          {"symbol_rate_hz", u.strategy.symbol_rate},
                          {"target_sir", u.strategy.target_sir},
                          {"target_sir_db", linear_to_db(u.strategy.target_sir)},
                          {"phi", u.size}};
        if (report.feasible) {
            ju["power_w"] = u.strategy.power;
            ju["utility_bpj"] = u.utility;
        } else {
            ju["power_w"] = nullptr;
            ju["utility_bpj"] = nullptr;
        }
        users.push_back(std::move(ju));
    }
    nlohmann::json doc{{"bandwidth_hz", scene.bandwidth_hz},
                       {"noise_w", scene.noise_w},
                       {"coded", scene.coding.has_value()},
                       {"feasible", report.feasible},
                       {"total_size", report.total_size},
                       {"power_cap_exceeded", report.power_cap_exceeded},
                       {"users", std::move(users)}};
    return doc.dump(2) + "\n";
}

}  // namespace bpj::game
