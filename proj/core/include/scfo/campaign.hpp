#pragma once

#include "scfo/algorithms.hpp"
#include "scfo/problem.hpp"
#include "scfo/supervisor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace scfo {

// How gradients are estimated and bounded during a campaign.
//   I   exact gradients
//   II  noisy estimates used as if exact
//   III noisy estimates with boxes of half-width sigma * kappa
//   IV  noisy estimates with boxes sized by the largest feasible multiplier
enum class Implementation { I, II, III, IV };

const char* to_string(Implementation impl);
Implementation parse_implementation(const std::string& s);

struct CampaignConfig {
  AlgorithmSpec algorithm;
  Implementation impl = Implementation::I;
  double sigma = 0.0;
  double sigma_g = 0.0;
  int k_f = 100;
  std::uint64_t seed = 1;
  SupervisorConfig supervisor;
  std::optional<SlackState> slack;  // hard constraints when empty
  bool adaptive_q = false;
  std::optional<Matrix> q_bound;    // overrides the problem default
  bool truncate_constraint_noise = false;
  bool real_plant_mode = false;
  UpperBoundOptions bound_options;
  int max_perturbations = 8;
};

// Noise draws. Each purpose owns an independent stream derived from the seed.
class NoiseStreams {
 public:
  explicit NoiseStreams(std::uint64_t seed);
  std::mt19937_64& gradient() { return gradient_; }
  std::mt19937_64& constraint() { return constraint_; }
  std::mt19937_64& algorithm() { return algorithm_; }

 private:
  std::mt19937_64 gradient_;
  std::mt19937_64 constraint_;
  std::mt19937_64 algorithm_;
};

Vector inject_gradient_noise(const Vector& true_grad, const Vector& kappa_row, double sigma,
                             std::mt19937_64& rng);
// truncate > 0 clips each draw to +-truncate standard deviations.
Vector inject_constraint_noise(const Vector& true_g, double sigma_g, const Vector& eps_bar,
                               std::mt19937_64& rng, double truncate = 0.0);

CampaignTrace run_campaign(const RtoProblem& problem, const CampaignConfig& cfg);

}  // namespace scfo
