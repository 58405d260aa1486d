// Shared helpers: unit conversions, error types, seed splitting.
//
// Convention used throughout the library: SIR and power are linear
// quantities internally; dB appears only at I/O boundaries.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bpj {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Bad configuration: malformed files, missing gain entries, invalid flags.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// QoS / capacity infeasibility. `residual` carries the left side of the
// feasibility condition (threshold at the maximal symbol rate) when known.
class infeasible_error : public std::runtime_error {
public:
    explicit infeasible_error(const std::string& what, double residual = std::nan(""))
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Queue would diverge (offered load at or above the service rate).
class unstable_error : public std::runtime_error {
public:
    explicit unstable_error(const std::string& what) : std::runtime_error(what) {}
};

// Root finder could not bracket/converge; signals a pathological curve.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64; used to derive independent RNG streams from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed + 0x632be59bd9b4e019ULL * (stream + 1);
    return splitmix64(s);
}

}  // namespace bpj
