#include "unida/diagnostics.hpp"

#include <cmath>

#include "unida/error.hpp"

namespace unida {

void DiagnosticsConfig::validate() const {
  if (!(c0 > 0.0) || !(c1 > 0.0)) throw ConfigError("c0 and c1 must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must be in (0, 1)");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
}

double density_estimate(std::size_t k, std::size_t k_i, double r_k, std::size_t m, double c0) {
  if (k == 0 || k_i > k) throw InvalidArgument("need k >= 1 and k_i <= k");
  if (m < 2) throw InvalidArgument("dimension must be >= 2");
  if (!(r_k > 1e-12)) throw ZeroRadius("k-NN radius is zero");
  return c0 * static_cast<double>(k_i) /
         (static_cast<double>(k) * std::pow(r_k, static_cast<double>(m - 1)));
}

double unknown_density_estimate(double max_known_density, const DiagnosticsConfig& cfg) {
  return max_known_density <= cfg.beta ? cfg.c1 : 0.0;
}

PosteriorIndicator unknown_posterior_indicator(double r_k, std::size_t k_max, std::size_t k,
                                               std::size_t m, const DiagnosticsConfig& cfg) {
  const double max_density = density_estimate(k, k_max, r_k, m, cfg.c0);
  if (max_density > cfg.beta) return PosteriorIndicator::ConditionFailed;

  const double volume = std::pow(r_k, static_cast<double>(m - 1));
  if (cfg.gamma >= 1.0) return PosteriorIndicator::BelowGamma;
  const double threshold =
      cfg.epsilon * cfg.c0 * cfg.gamma / ((1.0 - cfg.gamma) * (1.0 - cfg.epsilon));
  return volume < threshold ? PosteriorIndicator::BelowGamma : PosteriorIndicator::NotBelowGamma;
}

std::string_view to_string(PosteriorIndicator indicator) {
  switch (indicator) {
    case PosteriorIndicator::BelowGamma:
      return "below_gamma";
    case PosteriorIndicator::NotBelowGamma:
      return "not_below_gamma";
    case PosteriorIndicator::ConditionFailed:
      return "condition_failed";
  }
  return "unknown";
}

}  // namespace unida
