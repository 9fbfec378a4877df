#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triagebench/domain.hpp"

namespace triagebench::refine {

// Binary pilot-score matrix: rows are apps, columns are vignettes, a cell is
// 1 when the pooled mapped advice equals the gold standard. Abstentions
// score 0.
struct ScoreMatrix {
  std::vector<std::string> app_ids;
  std::vector<std::string> vignette_ids;
  Eigen::MatrixXi scores;  // apps x vignettes, cells in {0, 1}
};

// Scores a validated study via default-variant majority-vote pooling.
ScoreMatrix build_score_matrix(const Study& study);

enum class Exclusion { No, ZeroDifficulty, NonpositiveItemTotal, ZeroVariance };
std::string_view exclusion_name(Exclusion e);

struct ItemStats {
  std::string vignette_id;
  double difficulty = 0.0;
  std::optional<double> item_total_r;  // nullopt when a variance is zero
  Exclusion excluded = Exclusion::No;
};

// Proportion of apps scoring 1 on the vignette.
double item_difficulty(const ScoreMatrix& matrix,
                       const std::string& vignette_id);

// Corrected item-total correlation: Pearson r between the item column and
// each app's total score excluding the item. nullopt when either variable
// has zero variance.
std::optional<double> item_total_correlation(const ScoreMatrix& matrix,
                                             const std::string& vignette_id);

struct RefineResult {
  // Surviving vignette ids in original column order.
  std::vector<std::string> retained;
  // Stats for every column alive at the start of each iteration; the final
  // iteration carries no exclusions.
  std::vector<std::vector<ItemStats>> iterations;
};

// Fixpoint exclusion: each round drops difficulty-zero items, items with a
// defined item-total r <= 0, and mixed items whose rest-score has no
// variance; universally solved items (difficulty 1) are kept. Rest-scores
// are recomputed from the surviving columns after every round.
RefineResult refine_set(const ScoreMatrix& matrix);

struct SampleSize {
  long per_group = 0;
  long recommended_set_size = 0;  // max(per_group, 45)
};

// Smallest per-group n for a two-sided two-proportion z-test under the
// pooled-variance normal approximation.
SampleSize required_sample_size(double p0, double p1, double alpha,
                                double power);

}  // namespace triagebench::refine
