// Physical layer: square M-QAM constellation parameters, the packet-success
// efficiency function and its derivative, Gaussian tail functions, and the
// trellis-coded-modulation gain model.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bpj::phy {

// L bits per packet.
struct PacketConfig {
    int bits = 100;
};

// Saturating arctan gain curve evaluated at linear SIR. All fields linear.
struct GainParams {
    double a;          // base gain at gamma == gamma_bar
    double c;          // arctan amplitude
    double d;          // transition width, linear SIR
    double gamma_bar;  // curve center, linear SIR
};

// Trellis-coded-modulation configuration: code split (n info bits into l
// coded bits selecting the subset) plus per-constellation gain curves.
class TcmConfig {
public:
    explicit TcmConfig(std::map<int, GainParams> gains,
                       std::optional<int> info_bits = {},
                       std::optional<int> coded_bits = {});

    // Fitted defaults shipped with the library (same table as data/tcm_gains.json).
    static TcmConfig defaults();

    bool has(int b) const { return gains_.count(b) != 0; }
    const GainParams& params_for(int b) const;  // throws config_error when absent

    // n = 1 for QPSK, 2 above, unless overridden.
    int info_bits(int b) const;
    int coded_bits(int b) const;
    double code_rate(int b) const;

    const std::map<int, GainParams>& table() const { return gains_; }

private:
    std::map<int, GainParams> gains_;
    std::optional<int> info_bits_, coded_bits_;
};

// Gain-parameter file I/O. JSON array of {"b", "A", "C", "D", "gamma_bar"}
// with D and gamma_bar stored in dB and converted on load.
TcmConfig load_gain_params_text(const std::string& json_text);
TcmConfig load_gain_params_file(const std::string& path);
std::string gain_params_to_json(const TcmConfig& cfg);

// alpha_b = 2(1 - 2^{-b/2}), beta_b = 3/(2^b - 1); b must be even, >= 2.
double alpha_of(int b);
double beta_of(int b);

// One user's modulation choice: b info bits per symbol (square M-QAM,
// M = 2^b), optionally trellis-coded.
class ModScheme {
public:
    explicit ModScheme(int bits_per_symbol, std::optional<TcmConfig> coding = {});

    int bits_per_symbol() const { return b_; }
    long points() const { return 1L << b_; }
    double alpha() const;
    double beta() const;
    bool coded() const { return coding_.has_value(); }
    const TcmConfig& coding() const;

private:
    int b_;
    std::optional<TcmConfig> coding_;
};

// Gaussian tail probability Q(x) and its inverse.
double q_tail(double x);
double q_tail_inv(double p);  // p in (0,1)

// Effective TCM coding gain at linear SIR gamma.
double coding_gain(const TcmConfig& cfg, int b, double gamma);

// Packet-success probability at linear SIR gamma; exactly 0 at gamma == 0,
// strictly increasing, bounded above by 1 - 2^-L. Coded schemes evaluate the
// same expression at the gain-scaled SIR gamma * G_b(gamma).
double efficiency(const ModScheme& scheme, const PacketConfig& pkt, double gamma);

// d/dgamma of efficiency: analytic for uncoded schemes, central difference
// (relative step 1e-6) for coded ones.
double efficiency_derivative(const ModScheme& scheme, const PacketConfig& pkt, double gamma);

// Batch form over many SIR points; dispatches to the active kernel lane.
// All gamma values must be >= 0.
void efficiency_many(const ModScheme& scheme, const PacketConfig& pkt,
                     std::span<const double> gamma, std::span<double> out);

// Least-squares fit of the arctan gain curve to (gamma, gain) samples, both
// linear. Needs >= 4 samples with at least 4 distinct gamma values.
struct GainSample {
    double gamma;
    double gain;
};
struct GainFit {
    GainParams params;
    double rms;
};
GainFit fit_coding_gain(std::span<const GainSample> samples);

}  // namespace bpj::phy
