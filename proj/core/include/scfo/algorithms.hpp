#pragma once

#include "scfo/problem.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace scfo {

enum class AlgorithmKind { IdealTarget, GradientDescent, ModifierAdaptation, TwoStep, RandomStep };

const char* to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm(const std::string& s);

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::IdealTarget;
  double step_length = 1.0;     // gradient descent
  Vector model_curvature;       // diagonal model Hessian; empty means 2 per input
  int fit_window = 6;           // two-step
  double random_scale = 0.2;    // random step, fraction of the box span
};

// Target for the next iterate, always inside the box.
Vector next_target(const AlgorithmSpec& spec, const IterateState& state,
                   const RtoProblem& problem, std::mt19937_64& rng);

}  // namespace scfo
