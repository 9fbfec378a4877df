#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "triagebench/domain.hpp"

namespace triagebench::sim {

struct AppSpec {
  std::string app_id;
  // Row-stochastic advice distribution: confusion(gold, advice), indices in
  // ordinal level order. Each row must sum to 1 within 1e-12.
  Eigen::Matrix3d confusion = Eigen::Matrix3d::Identity();
  double abstain_rate = 0.0;
};

struct SimSpec {
  std::map<TriageLevel, int> vignettes_per_stratum;
  std::vector<AppSpec> apps;
  // Probability that an inputter's record deviates from the app's sampled
  // advice to a uniformly random other level.
  double inputter_noise = 0.0;
  int n_inputters = 2;
  std::uint64_t seed = 0;
};

SimSpec parse_simspec(std::string_view cfg_text, std::string_view source_name);

// Deterministic for a given seed within one build; abstention is sampled
// before advice. The seed is recorded in each vignette's source field.
Study simulate_study(const SimSpec& spec);

}  // namespace triagebench::sim
