#pragma once

#include "scfo/benchmark.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scfo {

// JSON problem description:
//   {"name": "P", "box": {"lo": [...], "hi": [...]}, "u0": [...], "k_f": 100,
//    "cost": [{"start": 0, "terms": [[coef, p1, p2, ...], ...]}],
//    "constraints": [{"terms": [...], "known": false}],
//    "known_cost": false, "cost_kappa": [...], "q_bound": [[...]],
//    "lipschitz": {"kappa_lo": [[...]], "kappa_hi": [[...]], "concave_in": [[...]]}}
// "cost" may also be a single object. Absent optional fields are derived.
ProblemDefinition parse_problem_definition(const std::string& json_text);
ProblemDefinition load_problem_definition(const std::string& path);
std::string problem_definition_to_json(const ProblemDefinition& def);

// One campaign: "problem" is a benchmark name or an inline problem object.
// Other keys: label, algorithm, impl, sigma, sigma_g, k_f, seed, slack_l,
// known, concave ([[j, i], ...] one based), reuse_history, policy, adaptive_q,
// q_bound, step_length, random_scale, fit_window, model_curvature,
// truncate_noise, real_plant.
ExperimentCell parse_cell(const std::string& json_text);

struct GridSpec {
  std::vector<ExperimentCell> cells;
  int replicates = 1;
  std::uint64_t seed_base = 1;
};

// {"preset": "table5"} or {"cells": [...]}, plus optional replicates and seed_base.
GridSpec parse_grid(const std::string& json_text);
GridSpec load_grid(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace scfo
