#include "bpj/phy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "bpj/common.hpp"
#include "bpj/kernels.hpp"
#include "json.hpp"

namespace bpj::phy {

namespace {

void check_even_b(int b) {
    if (b < 2 || b % 2 != 0)
        throw std::invalid_argument(
            "bits per symbol must be an even integer >= 2 (square M-QAM); got " +
            std::to_string(b) + (b % 2 ? " — odd constellations have no exact "
                                         "symbol-error expression and are rejected"
                                       : ""));
}

void check_pkt(const PacketConfig& pkt) {
    if (pkt.bits < 1) throw std::invalid_argument("packet size must be >= 1 bit");
}

double gain_infimum(const GainParams& p) {
    // G is monotone in gamma (direction set by sign of c); infimum over
    // gamma >= 0 is at 0 for c >= 0 and at +inf for c < 0
    if (p.c >= 0.0) return p.a + p.c * std::atan(-p.gamma_bar / p.d);
    return p.a + p.c * (std::numbers::pi / 2.0);
}

constexpr double INV_SQRT_2PI = 0.39894228040143267794;

double normal_pdf(double x) { return INV_SQRT_2PI * kernels::exp_core(-0.5 * x * x); }

}  // namespace

double alpha_of(int b) {
    check_even_b(b);
    return 2.0 * (1.0 - std::ldexp(1.0, -b / 2));
}

double beta_of(int b) {
    check_even_b(b);
    return 3.0 / (std::ldexp(1.0, b) - 1.0);
}

TcmConfig::TcmConfig(std::map<int, GainParams> gains, std::optional<int> info_bits,
                     std::optional<int> coded_bits)
    : gains_(std::move(gains)), info_bits_(info_bits), coded_bits_(coded_bits) {
    if (gains_.empty()) throw config_error("TCM configuration has no gain entries");
    for (const auto& [b, p] : gains_) {
        check_even_b(b);
        if (p.d <= 0.0)
            throw config_error("TCM gain width D must be positive for b=" + std::to_string(b));
        if (gain_infimum(p) <= 0.0)
            throw config_error("TCM gain curve not positive over gamma >= 0 for b=" +
                               std::to_string(b));
    }
    if (info_bits_ || coded_bits_) {
        int n = info_bits_.value_or(2), l = coded_bits_.value_or(3);
        if (n < 1 || l <= n)
            throw config_error("TCM code split must satisfy 0 < n < l (rate in (0,1))");
    }
}

const GainParams& TcmConfig::params_for(int b) const {
    auto it = gains_.find(b);
    if (it == gains_.end())
        throw config_error("no TCM gain parameters for b=" + std::to_string(b));
    return it->second;
}

int TcmConfig::info_bits(int b) const { return info_bits_.value_or(b > 2 ? 2 : 1); }
int TcmConfig::coded_bits(int b) const { return coded_bits_.value_or(b > 2 ? 3 : 2); }
double TcmConfig::code_rate(int b) const {
    return static_cast<double>(info_bits(b)) / static_cast<double>(coded_bits(b));
}

TcmConfig TcmConfig::defaults() {
    // Fitted so that the coded optimizer reproduces the published coded
    // optima for L = 100; calibration data, not physics constants.
    static const std::map<int, GainParams> table = {
        {2, {1.6419784714561105, 0.45, 0.8159777489336084, 6.498303634842376}},
        {4, {1.6792634359403256, 0.45, 7.823430829344147, 26.472807400175633}},
        {6, {1.4458679779085417, 0.45, 55.63322169801008, 116.14486138403426}},
        {8, {1.456100194437694, 0.45, 269.8066889864359, 423.6429660495409}},
        {10, {1.3854147558092262, 0.45, 2824.935706508891, 1545.254439538414}},
    };
    return TcmConfig(table);
}

TcmConfig load_gain_params_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("gain file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty())
        throw config_error("gain file must be a non-empty JSON array of per-b entries");
    std::map<int, GainParams> table;
    try {
        for (const auto& entry : doc) {
            int b = entry.at("b").get<int>();
            GainParams p;
            p.a = entry.at("A").get<double>();
            p.c = entry.at("C").get<double>();
            p.d = db_to_linear(entry.at("D").get<double>());
            p.gamma_bar = db_to_linear(entry.at("gamma_bar").get<double>());
            table[b] = p;
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("gain entry malformed: ") + e.what());
    }
    return TcmConfig(std::move(table));
}

TcmConfig load_gain_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open gain file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_gain_params_text(ss.str());
}

std::string gain_params_to_json(const TcmConfig& cfg) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [b, p] : cfg.table()) {
        arr.push_back({{"b", b},
                       {"A", p.a},
                       {"C", p.c},
                       {"D", linear_to_db(p.d)},
                       {"gamma_bar", linear_to_db(p.gamma_bar)}});
    }
    return arr.dump(2) + "\n";
}

ModScheme::ModScheme(int bits_per_symbol, std::optional<TcmConfig> coding)
    : b_(bits_per_symbol), coding_(std::move(coding)) {
    check_even_b(b_);
    if (coding_ && !coding_->has(b_))
        throw config_error("coded scheme requested but gain table has no entry for b=" +
                           std::to_string(b_));
}

double ModScheme::alpha() const { return alpha_of(b_); }
double ModScheme::beta() const { return beta_of(b_); }

const TcmConfig& ModScheme::coding() const {
    if (!coding_) throw config_error("scheme is uncoded");
    return *coding_;
}

double q_tail(double x) { return 0.5 * kernels::erfc_core(x * std::numbers::sqrt2 / 2.0); }

namespace {

// Acklam's rational approximation to the standard normal quantile.
double normal_quantile(double p) {
    static constexpr double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
               ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        return (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
               (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
           ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
}

}  // namespace

double q_tail_inv(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("q_tail_inv needs p in (0, 1)");
    if (p == 0.5) return 0.0;
    // Q(x) = p  <=>  Phi(x) = 1 - p; one Newton step on Q refines the seed
    double x = -normal_quantile(p);
    x += (q_tail(x) - p) / normal_pdf(x);
    return x;
}

double coding_gain(const TcmConfig& cfg, int b, double gamma) {
    if (gamma < 0.0) throw std::domain_error("coding gain needs gamma >= 0");
    const GainParams& p = cfg.params_for(b);
    return p.a + p.c * std::atan((gamma - p.gamma_bar) / p.d);
}

double efficiency(const ModScheme& scheme, const PacketConfig& pkt, double gamma) {
    check_pkt(pkt);
    if (gamma < 0.0) throw std::domain_error("efficiency needs gamma >= 0");
    if (gamma == 0.0) return 0.0;
    const int b = scheme.bits_per_symbol();
    double x = gamma;
    if (scheme.coded()) x = gamma * coding_gain(scheme.coding(), b, gamma);
    return kernels::efficiency_core(scheme.alpha(), scheme.beta(), 2.0 * pkt.bits / b,
                                    std::ldexp(1.0, -pkt.bits), x);
}

double efficiency_derivative(const ModScheme& scheme, const PacketConfig& pkt, double gamma) {
    check_pkt(pkt);
    if (gamma <= 0.0) throw std::domain_error("efficiency derivative needs gamma > 0");
    if (scheme.coded()) {
        // the coded success rate composes the gain curve inside the tail
        // argument; use a symmetric difference with relative step 1e-6
        double h = 1e-6 * gamma;
        return (efficiency(scheme, pkt, gamma + h) - efficiency(scheme, pkt, gamma - h)) /
               (2.0 * h);
    }
    const int b = scheme.bits_per_symbol();
    const double a = scheme.alpha(), be = scheme.beta();
    const double expo = 2.0 * pkt.bits / b;
    double u = 1.0 - a * q_tail(std::sqrt(be * gamma));
    return (a * pkt.bits / b) * std::sqrt(be / (2.0 * std::numbers::pi * gamma)) *
           kernels::exp_core(-0.5 * be * gamma) * kernels::pow_core(u, expo - 1.0);
}

void efficiency_many(const ModScheme& scheme, const PacketConfig& pkt,
                     std::span<const double> gamma, std::span<double> out) {
    check_pkt(pkt);
    const int b = scheme.bits_per_symbol();
    const double expo = 2.0 * pkt.bits / b;
    const double floor_term = std::ldexp(1.0, -pkt.bits);
    if (!scheme.coded()) {
        kernels::efficiency_batch(scheme.alpha(), scheme.beta(), expo, floor_term, gamma, out);
        return;
    }
    const GainParams& p = scheme.coding().params_for(b);
    std::vector<double> eff_sir(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        eff_sir[i] = gamma[i] * (p.a + p.c * std::atan((gamma[i] - p.gamma_bar) / p.d));
    kernels::efficiency_batch(scheme.alpha(), scheme.beta(), expo, floor_term, eff_sir, out);
}

namespace {

struct Quad {
    double m[4][4];
    double rhs[4];
};

// solve 4x4 with partial pivoting; returns false when singular
bool solve4(Quad& s, double out[4]) {
    int idx[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(s.m[idx[r]][col]) > std::fabs(s.m[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        double diag = s.m[idx[col]][col];
        if (std::fabs(diag) < 1e-300) return false;
        for (int r = col + 1; r < 4; ++r) {
            double fac = s.m[idx[r]][col] / diag;
            for (int c = col; c < 4; ++c) s.m[idx[r]][c] -= fac * s.m[idx[col]][c];
            s.rhs[idx[r]] -= fac * s.rhs[idx[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double v = s.rhs[idx[col]];
        for (int c = col + 1; c < 4; ++c) v -= s.m[idx[col]][c] * out[c];
        out[col] = v / s.m[idx[col]][col];
    }
    return true;
}

double sse_of(std::span<const GainSample> samples, const GainParams& p) {
    double sse = 0.0;
    for (const auto& s : samples) {
        double r = p.a + p.c * std::atan((s.gamma - p.gamma_bar) / p.d) - s.gain;
        sse += r * r;
    }
    return sse;
}

// linear LS for (a, c) given the arctan basis; returns SSE
double linear_ac(std::span<const GainSample> samples, double d, double gamma_bar,
                 double& a_out, double& c_out) {
    double s1 = 0, sphi = 0, sphi2 = 0, sg = 0, sgphi = 0;
    for (const auto& s : samples) {
        double phi = std::atan((s.gamma - gamma_bar) / d);
        s1 += 1.0;
        sphi += phi;
        sphi2 += phi * phi;
        sg += s.gain;
        sgphi += s.gain * phi;
    }
    double det = s1 * sphi2 - sphi * sphi;
    if (std::fabs(det) < 1e-30 * std::max(1.0, s1 * sphi2)) {
        a_out = sg / s1;
        c_out = 0.0;
    } else {
        a_out = (sg * sphi2 - sgphi * sphi) / det;
        c_out = (s1 * sgphi - sphi * sg) / det;
    }
    double sse = 0.0;
    for (const auto& s : samples) {
        double r = a_out + c_out * std::atan((s.gamma - gamma_bar) / d) - s.gain;
        sse += r * r;
    }
    return sse;
}

}  // namespace

GainFit fit_coding_gain(std::span<const GainSample> samples) {
    std::set<double> distinct;
    for (const auto& s : samples) distinct.insert(s.gamma);
    if (samples.size() < 4 || distinct.size() < 4)
        throw std::invalid_argument(
            "gain fit needs at least 4 samples at 4 distinct gamma values");

    const double gmin = *distinct.begin();
    const double gmax = *distinct.rbegin();
    const double span_g = gmax - gmin;

    // grid seed over (gamma_bar, d) with the linear (a, c) subproblem solved exactly
    GainParams best{0, 0, span_g, 0.5 * (gmin + gmax)};
    double best_sse = std::numeric_limits<double>::infinity();
    for (int ig = 0; ig <= 20; ++ig) {
        double gb = gmin + span_g * ig / 20.0;
        for (int id = 0; id <= 16; ++id) {
            double d = span_g * std::pow(10.0, -3.0 + 4.0 * id / 16.0);
            double a, c;
            double sse = linear_ac(samples, d, gb, a, c);
            if (sse < best_sse) {
                best_sse = sse;
                best = {a, c, d, gb};
            }
        }
    }

    // Levenberg-Marquardt polish on all four parameters
    GainParams cur = best;
    double cur_sse = best_sse;
    double lambda = 1e-3;
    for (int iter = 0; iter < 300; ++iter) {
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (const auto& s : samples) {
            double z = (s.gamma - cur.gamma_bar) / cur.d;
            double r = cur.a + cur.c * std::atan(z) - s.gain;
            double w = cur.c / (1.0 + z * z);
            double jrow[4] = {1.0, std::atan(z), -w * z / cur.d, -w / cur.d};
            for (int i = 0; i < 4; ++i) {
                jtr[i] += jrow[i] * r;
                for (int j = 0; j < 4; ++j) jtj[i][j] += jrow[i] * jrow[j];
            }
        }
        Quad sys;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) sys.m[i][j] = jtj[i][j];
            sys.m[i][i] *= (1.0 + lambda);
            sys.m[i][i] += 1e-14;
            sys.rhs[i] = -jtr[i];
        }
        double step[4];
        if (!solve4(sys, step)) {
            lambda *= 4.0;
            if (lambda > 1e12) break;
            continue;
        }
        GainParams trial{cur.a + step[0], cur.c + step[1], cur.d + step[2],
                         cur.gamma_bar + step[3]};
        if (trial.d == 0.0) trial.d = cur.d * 0.5;
        double trial_sse = sse_of(samples, trial);
        if (trial_sse <= cur_sse) {
            double gained = cur_sse - trial_sse;
            cur = trial;
            cur_sse = trial_sse;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (gained <= 1e-30 + 1e-15 * cur_sse) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }

    // (c, d) -> (-c, -d) is the same curve; report d > 0
    if (cur.d < 0.0) {
        cur.d = -cur.d;
        cur.c = -cur.c;
    }
    return GainFit{cur, std::sqrt(cur_sse / static_cast<double>(samples.size()))};
}

}  // namespace bpj::phy
