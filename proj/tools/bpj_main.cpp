// bpj - energy-efficient modulation and power-control game toolkit.
//
// Subcommands: tables, sweep-delay, tradeoff, nash, validate-queue, fit-gain.
// Exit codes: 0 ok, 1 validation failure, 2 configuration error,
// 3 infeasible scene/traffic, 4 solver failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bpj/common.hpp"
#include "bpj/game.hpp"
#include "bpj/queueing.hpp"
#include "bpj/sweeps.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct OutputTarget {
    std::string path;  // empty -> stdout

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw bpj::config_error("cannot open output file: " + path);
        out << text;
    }
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string num(double v) { return fmt("%.12g", v); }

std::optional<bpj::phy::TcmConfig> gains_from(const std::string& gain_file, bool coded) {
    if (!gain_file.empty()) return bpj::phy::load_gain_params_file(gain_file);
    if (coded) return bpj::phy::TcmConfig::defaults();
    return std::nullopt;
}

int run_tables(const bpj::phy::PacketConfig& pkt, bool coded, const std::string& gain_file,
               const std::string& format, const OutputTarget& out) {
    auto rows = bpj::sweeps::modulation_table(pkt, coded, gains_from(gain_file, coded));
    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json jr{{"b", r.b},
                    {"alpha", r.alpha},
                    {"beta", r.beta},
                    {"gamma_star", r.gamma_star},
                    {"gamma_star_db", r.gamma_star_db},
                    {"f_star", r.f_star},
                    {"b_over_gamma_db", r.b_over_gamma_db},
                    {"utility_factor", r.utility_factor}};
            if (coded) {
                jr["gamma_star_coded"] = r.gamma_star_c;
                jr["gamma_star_coded_db"] = r.gamma_star_c_db;
                jr["f_star_coded"] = r.f_star_c;
                jr["utility_factor_coded"] = r.utility_factor_c;
            }
            arr.push_back(std::move(jr));
        }
        os << arr.dump(2) << "\n";
    } else {
        os << "b,alpha,beta,gamma_star_db,f_star,b_over_gamma_db,utility_factor";
        if (coded) os << ",gamma_star_coded_db,f_star_coded,utility_factor_coded";
        os << "\n";
        for (const auto& r : rows) {
            // rounded the way the reference tables print
            os << r.b << ',' << fmt("%.6g", r.alpha) << ',' << fmt("%.3g", r.beta) << ','
               << fmt("%.1f", r.gamma_star_db) << ',' << fmt("%.3f", r.f_star) << ','
               << fmt("%.1f", r.b_over_gamma_db) << ',' << fmt("%.4f", r.utility_factor);
            if (coded)
                os << ',' << fmt("%.1f", r.gamma_star_c_db) << ',' << fmt("%.3f", r.f_star_c)
                   << ',' << fmt("%.4f", r.utility_factor_c);
            os << "\n";
        }
    }
    out.write(os.str());
    return 0;
}

int run_sweep_delay(const bpj::sweeps::DelaySweepSpec& spec, const std::string& format,
                    const OutputTarget& out) {
    auto rows = bpj::sweeps::delay_sweep(spec);
    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json jr{{"normalized_delay", r.norm_delay}, {"feasible", r.feasible},
                    {"b", r.b},                         {"rate_norm", r.rate_norm},
                    {"power_norm", r.power_norm},       {"utility_norm", r.utility_norm},
                    {"phi", r.phi},                     {"at_max_rate", r.at_max_rate}};
            if (spec.coded) {
                jr["b_coded"] = r.b_c;
                jr["rate_norm_coded"] = r.rate_norm_c;
                jr["power_norm_coded"] = r.power_norm_c;
                jr["utility_norm_coded"] = r.utility_norm_c;
                jr["phi_coded"] = r.phi_c;
                jr["at_max_rate_coded"] = r.at_max_rate_c;
                jr["tcm_gain_db"] = r.tcm_gain_db;
            }
            arr.push_back(std::move(jr));
        }
        os << arr.dump(2) << "\n";
    } else {
        os << "normalized_delay,feasible,b,rate_norm,power_norm,utility_norm,phi,at_max_rate";
        if (spec.coded)
            os << ",b_coded,rate_norm_coded,power_norm_coded,utility_norm_coded,phi_coded,"
                  "at_max_rate_coded,tcm_gain_db";
        os << "\n";
        for (const auto& r : rows) {
            os << num(r.norm_delay) << ',' << (r.feasible ? 1 : 0) << ',' << r.b << ','
               << num(r.rate_norm) << ',' << num(r.power_norm) << ',' << num(r.utility_norm)
               << ',' << num(r.phi) << ',' << (r.at_max_rate ? 1 : 0);
            if (spec.coded)
                os << ',' << r.b_c << ',' << num(r.rate_norm_c) << ',' << num(r.power_norm_c)
                   << ',' << num(r.utility_norm_c) << ',' << num(r.phi_c) << ','
                   << (r.at_max_rate_c ? 1 : 0) << ',' << num(r.tcm_gain_db);
            os << "\n";
        }
    }
    out.write(os.str());
    return 0;
}

int run_tradeoff(const bpj::phy::PacketConfig& pkt, double rs_frac,
                 const std::string& gain_file, const std::string& format,
                 const OutputTarget& out) {
    auto rows = bpj::sweeps::tradeoff(pkt, rs_frac, gains_from(gain_file, true));
    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"b", r.b},
                           {"spectral_eff", r.spectral_eff},
                           {"energy_factor_uncoded", r.energy_factor},
                           {"energy_factor_coded", r.energy_factor_coded}});
        os << arr.dump(2) << "\n";
    } else {
        os << "b,spectral_eff,energy_factor_uncoded,energy_factor_coded\n";
        for (const auto& r : rows)
            os << r.b << ',' << num(r.spectral_eff) << ',' << num(r.energy_factor) << ','
               << num(r.energy_factor_coded) << "\n";
    }
    out.write(os.str());
    return 0;
}

int run_nash(const std::string& scene_path, const std::string& gain_file,
             std::uint64_t verify_samples, std::uint64_t seed, const std::string& format,
             const OutputTarget& out) {
    std::optional<bpj::phy::TcmConfig> gains;
    if (!gain_file.empty()) gains = bpj::phy::load_gain_params_file(gain_file);
    auto scene = bpj::game::load_scene_file(scene_path, gains);
    auto report = bpj::game::nash_equilibrium(scene);

    std::optional<bpj::game::DeviationVerdict> verdict;
    if (verify_samples > 0 && report.feasible)
        verdict = bpj::game::verify_equilibrium(scene, report, verify_samples, seed);

    std::ostringstream os;
    if (format == "json") {
        json doc = json::parse(bpj::game::report_to_json(scene, report));
        if (verdict)
            doc["verification"] = {
                {"samples_per_user", verify_samples},
                {"max_relative_gain", verdict->max_gain},
                {"delay_infeasible_deviations", verdict->delay_infeasible_deviations},
                {"passed", verdict->passed}};
        os << doc.dump(2) << "\n";
    } else {
        os << "user,b,symbol_rate_hz,target_sir,target_sir_db,power_w,phi,utility_bpj,"
              "feasible,total_size\n";
        for (std::size_t k = 0; k < report.users.size(); ++k) {
            const auto& u = report.users[k];
            os << k << ',' << u.strategy.scheme.bits_per_symbol() << ','
               << num(u.strategy.symbol_rate) << ',' << num(u.strategy.target_sir) << ','
               << num(bpj::linear_to_db(u.strategy.target_sir)) << ','
               << num(u.strategy.power) << ',' << num(u.size) << ',' << num(u.utility) << ','
               << (report.feasible ? 1 : 0) << ',' << num(report.total_size) << "\n";
        }
    }
    out.write(os.str());
    if (verdict)
        std::cerr << "verification: max relative gain " << verdict->max_gain << " over "
                  << verify_samples << " deviations/user ("
                  << (verdict->passed ? "pass" : "FAIL") << ")\n";
    if (!report.feasible) {
        std::cerr << "scene infeasible: total user size " << num(report.total_size)
                  << " >= 1\n";
        return 3;
    }
    if (report.power_cap_exceeded) {
        std::cerr << "capacity violation: some equilibrium power exceeds p_max\n";
        return 3;
    }
    return 0;
}

int run_validate_queue(double lambda, double symbol_rate, int b, double gamma_db, int pkt_bits,
                       std::uint64_t packets, std::uint64_t seed, const std::string& trace_path,
                       const std::string& format, const OutputTarget& out) {
    bpj::queueing::LinkRate link{symbol_rate, bpj::phy::ModScheme(b)};
    bpj::queueing::TrafficQos traffic{lambda, {pkt_bits}, 1.0};
    double gamma = bpj::db_to_linear(gamma_db);

    double tau = bpj::queueing::packet_time(link, traffic.pkt);
    double f = bpj::phy::efficiency(link.scheme, traffic.pkt, gamma);
    if (!(f - lambda * tau > 1e-12))
        throw bpj::unstable_error("requested load is unstable (f <= lambda*tau)");
    double analytic = tau * (1.0 - 0.5 * lambda * tau) / (f - lambda * tau);

    std::ofstream trace;
    std::ostream* trace_ptr = nullptr;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::binary);
        if (!trace) throw bpj::config_error("cannot open trace file: " + trace_path);
        trace_ptr = &trace;
    }
    auto sim = bpj::queueing::simulate_queue(link, traffic, gamma, packets, seed, trace_ptr);

    double z = (sim.mean_delay - analytic) / sim.std_error;
    bool pass = std::fabs(sim.mean_delay - analytic) <= 3.0 * sim.std_error;
    double rho = lambda * tau / f;

    std::ostringstream os;
    if (format == "json") {
        json doc{{"rho", rho},
                 {"packet_success", f},
                 {"analytic_mean_delay", analytic},
                 {"empirical_mean_delay", sim.mean_delay},
                 {"std_error", sim.std_error},
                 {"z_score", z},
                 {"empirical_mean_service", sim.mean_service},
                 {"analytic_mean_service", tau / f},
                 {"packets", sim.packets},
                 {"seed", seed},
                 {"pass", pass}};
        os << doc.dump(2) << "\n";
    } else {
        os << "rho " << num(rho) << "\n"
           << "analytic mean delay " << num(analytic) << " s\n"
           << "empirical mean delay " << num(sim.mean_delay) << " s (std error "
           << num(sim.std_error) << ", z " << fmt("%.2f", z) << ")\n"
           << "mean service " << num(sim.mean_service) << " s (analytic " << num(tau / f)
           << ")\n"
           << (pass ? "pass" : "FAIL") << " at 3 standard errors over " << sim.packets
           << " packets\n";
    }
    out.write(os.str());
    return pass ? 0 : 1;
}

int run_fit_gain(const std::string& samples_path, const OutputTarget& out) {
    std::ifstream in(samples_path);
    if (!in) throw bpj::config_error("cannot open samples file: " + samples_path);
    std::map<int, std::vector<bpj::phy::GainSample>> by_b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int b;
        double gamma_db, gain_db;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &b, &gamma_db, &gain_db) == 3) {
            by_b[b].push_back({bpj::db_to_linear(gamma_db), bpj::db_to_linear(gain_db)});
        } else if (lineno == 1) {
            continue;  // header row
        } else {
            throw bpj::config_error("samples line " + std::to_string(lineno) +
                                    " is not 'b,gamma_db,gain_db'");
        }
    }
    if (by_b.empty()) throw bpj::config_error("no samples found in " + samples_path);

    std::map<int, bpj::phy::GainParams> table;
    for (const auto& [b, samples] : by_b) {
        auto fit = bpj::phy::fit_coding_gain(samples);
        table[b] = fit.params;
        std::cerr << "b=" << b << ": " << samples.size() << " samples, rms residual "
                  << num(fit.rms) << "\n";
    }
    bpj::phy::TcmConfig cfg(table);
    out.write(bpj::phy::gain_params_to_json(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-efficient modulation and power-control game toolkit"};
    app.require_subcommand(1);

    int pkt_bits = 100;
    bool coded = false;
    std::string gain_file, format = "csv", out_path, scene_path, trace_path, samples_path;
    std::uint64_t seed = 12345, verify_samples = 0, packets = 100000;
    bpj::sweeps::DelaySweepSpec sweep_spec;
    double rs_frac = 0.01;
    double vq_lambda = 8.0, vq_rate = 1000.0, vq_gamma_db = 9.1;
    int vq_b = 2;

    auto add_common = [&](CLI::App* cmd, bool with_coded = true) {
        cmd->add_option("--packet-bits", pkt_bits, "packet size L in bits")
            ->capture_default_str();
        cmd->add_option("--format", format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        cmd->add_option("--out", out_path, "output path (default stdout)");
        if (with_coded) {
            cmd->add_flag("--coded", coded, "include the trellis-coded system");
            cmd->add_option("--gain-file", gain_file,
                            "JSON coding-gain parameters (default: built-in fitted table)");
        }
    };

    auto* tables = app.add_subcommand("tables", "per-constellation optimum operating points");
    add_common(tables);

    auto* sweep =
        app.add_subcommand("sweep-delay", "best response vs normalized delay constraint");
    add_common(sweep);
    sweep->add_option("--points", sweep_spec.points, "sweep points (log-spaced)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--min-delay", sweep_spec.min_norm_delay, "smallest D*B")
        ->capture_default_str();
    sweep->add_option("--max-delay", sweep_spec.max_norm_delay, "largest D*B")
        ->capture_default_str();
    sweep->add_option("--source-rate-frac", sweep_spec.source_rate_frac,
                      "source rate lambda*L as a fraction of B")
        ->capture_default_str();

    auto* tradeoff = app.add_subcommand("tradeoff",
                                        "spectral vs energy efficiency across constellations");
    add_common(tradeoff);
    tradeoff->add_option("--rs-frac", rs_frac, "fixed symbol rate as a fraction of B")
        ->capture_default_str();

    auto* nash = app.add_subcommand("nash", "Pareto-dominant Nash equilibrium of a scene");
    nash->add_option("--scene", scene_path, "scene JSON file")->required();
    nash->add_option("--gain-file", gain_file, "coding-gain parameters for coded scenes");
    nash->add_option("--verify", verify_samples,
                     "sample this many unilateral deviations per user");
    nash->add_option("--seed", seed, "deviation-sampling seed")->capture_default_str();
    nash->add_option("--format", format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    nash->add_option("--out", out_path, "output path (default stdout)");

    auto* vq =
        app.add_subcommand("validate-queue", "check the analytic delay formula by simulation");
    add_common(vq, false);
    vq->add_option("--lambda", vq_lambda, "packet arrival rate, packets/s")
        ->capture_default_str();
    vq->add_option("--symbol-rate", vq_rate, "symbol rate, symbols/s")->capture_default_str();
    vq->add_option("--b", vq_b, "bits per symbol")->capture_default_str();
    vq->add_option("--gamma-db", vq_gamma_db, "operating SIR in dB")->capture_default_str();
    vq->add_option("--packets", packets, "measured packets (>= 1e4)")->capture_default_str();
    vq->add_option("--seed", seed, "simulation seed")->capture_default_str();
    vq->add_option("--trace", trace_path, "write per-packet trace CSV here");

    auto* fit =
        app.add_subcommand("fit-gain", "fit gain curves to (b, gamma_db, gain_db) samples");
    fit->add_option("--samples", samples_path, "CSV of b,gamma_db,gain_db")->required();
    fit->add_option("--out", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        bpj::phy::PacketConfig pkt{pkt_bits};
        OutputTarget out{out_path};
        if (tables->parsed()) return run_tables(pkt, coded, gain_file, format, out);
        if (sweep->parsed()) {
            sweep_spec.pkt = pkt;
            sweep_spec.coded = coded;
            if (!gain_file.empty())
                sweep_spec.gains = bpj::phy::load_gain_params_file(gain_file);
            return run_sweep_delay(sweep_spec, format, out);
        }
        if (tradeoff->parsed()) return run_tradeoff(pkt, rs_frac, gain_file, format, out);
        if (nash->parsed())
            return run_nash(scene_path, gain_file, verify_samples, seed, format, out);
        if (vq->parsed())
            return run_validate_queue(vq_lambda, vq_rate, vq_b, vq_gamma_db, pkt_bits, packets,
                                      seed, trace_path, format, out);
        if (fit->parsed()) return run_fit_gain(samples_path, out);
    } catch (const bpj::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bpj::infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const bpj::unstable_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const bpj::solver_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
