#pragma once

#include "weakfarima/farima.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace weakfarima {

namespace noise {
/// iid N(0,1).
struct Strong {};
/// eps_t = sigma_t eta_t, sigma_t^2 = omega + alpha eps_{t-1}^2 + beta sigma_{t-1}^2.
struct Garch {
  double omega = 0.04;
  double alpha = 0.12;
  double beta = 0.85;
};
/// eps_t = eta_t^2 eta_{t-1}.
struct WeakProduct {};
}  // namespace noise

using NoiseKind = std::variant<noise::Strong, noise::Garch, noise::WeakProduct>;

/// Throws std::invalid_argument on invalid GARCH parameters.
void validate(const NoiseKind& kind);
std::string noise_name(const NoiseKind& kind);
/// "strong", "garch" (defaults 0.04/0.12/0.85) or "weak".
NoiseKind parse_noise(const std::string& name);

/// `ma_trunc` is the number of lags kept in the (1-L)^{-d} filter; it may be
/// smaller than n, in which case the filter is a finite MA.
struct SimConfig {
  std::size_t n = 2000;
  std::size_t burn_in = 2000;
  std::size_t ma_trunc = 5000;
  std::uint64_t seed = 1;
};

std::vector<double> gen_noise(const NoiseKind& kind, std::size_t count, std::uint64_t seed);

struct SimulatedPath {
  std::vector<double> x;
  std::vector<double> eps;
};

/// Simulates a FARIMA path via the truncated MA(infinity) filter of
/// (1-L)^{-d}, discarding `burn_in` leading values.
SimulatedPath simulate_farima(const FarimaParams& theta0, const NoiseKind& kind,
                              const SimConfig& cfg);

}  // namespace weakfarima
