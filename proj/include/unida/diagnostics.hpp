#pragma once

#include <cstddef>
#include <string_view>

namespace unida {

// Constants of the k-NN density argument behind unknown discovery. They are
// not identifiable from data; these helpers are for validation runs only and
// never feed back into training.
struct DiagnosticsConfig {
  double c0 = 1.0;       // density scale of the known classes
  double c1 = 1.0;       // density level assigned to the unknown class
  double epsilon = 0.5;  // prior mass of the known classes, in (0, 1)
  double beta = 1.0;     // density floor below which a sample counts as unknown
  double gamma = 0.5;    // posterior threshold, in [0, 1]

  void validate() const;  // throws ConfigError
};

// c0 * k_i / (k * r_k^(m-1)). Throws ZeroRadius for r_k <= 1e-12 and
// InvalidArgument for k = 0, k_i > k or m < 2.
double density_estimate(std::size_t k, std::size_t k_i, double r_k, std::size_t m, double c0);

// c1 when the largest known-class density estimate is <= beta, else 0.
double unknown_density_estimate(double max_known_density, const DiagnosticsConfig& cfg);

enum class PosteriorIndicator {
  BelowGamma,       // p(unknown | z) < gamma
  NotBelowGamma,    // p(unknown | z) >= gamma
  ConditionFailed,  // max density above beta: the unknown density is zero,
                    // so the posterior of the unknown class is 0
};

/// Compares the unknown-class posterior against gamma through the k-NN
/// radius. When c0 * k_max / (k * r_k^(m-1)) <= beta the posterior is below
/// gamma exactly when r_k^(m-1) < epsilon * c0 * gamma / ((1 - gamma)(1 - epsilon)).
/// Otherwise the comparison does not apply and ConditionFailed is returned.
PosteriorIndicator unknown_posterior_indicator(double r_k, std::size_t k_max, std::size_t k,
                                               std::size_t m, const DiagnosticsConfig& cfg);

std::string_view to_string(PosteriorIndicator indicator);

}  // namespace unida
