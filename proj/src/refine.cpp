#include "triagebench/refine.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <map>

#include "triagebench/error.hpp"
#include "triagebench/pool.hpp"

namespace triagebench::refine {

namespace {

// Pearson r from exact integer sums; nullopt when either variance is zero.
std::optional<double> pearson(const Eigen::VectorXi& x,
                              const Eigen::VectorXi& y) {
  const std::int64_t n = x.size();
  if (n < 2) return std::nullopt;
  std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const std::int64_t a = x[i], b = y[i];
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const std::int64_t vx = n * sxx - sx * sx;
  const std::int64_t vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) return std::nullopt;
  return static_cast<double>(n * sxy - sx * sy) /
         std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

Eigen::Index column_of(const ScoreMatrix& matrix,
                       const std::string& vignette_id) {
  auto it = std::find(matrix.vignette_ids.begin(), matrix.vignette_ids.end(),
                      vignette_id);
  if (it == matrix.vignette_ids.end()) {
    throw Error("UnknownVignette", "score matrix",
                "vignette '" + vignette_id + "' not in matrix");
  }
  return static_cast<Eigen::Index>(it - matrix.vignette_ids.begin());
}

}  // namespace

ScoreMatrix build_score_matrix(const Study& study) {
  ScoreMatrix m;
  m.app_ids = study.apps;
  m.vignette_ids.reserve(study.vignettes.size());
  for (const Vignette& v : study.vignettes) m.vignette_ids.push_back(v.id);

  std::map<std::string, Eigen::Index> app_row, vig_col;
  for (std::size_t i = 0; i < m.app_ids.size(); ++i)
    app_row[m.app_ids[i]] = static_cast<Eigen::Index>(i);
  for (std::size_t j = 0; j < m.vignette_ids.size(); ++j)
    vig_col[m.vignette_ids[j]] = static_cast<Eigen::Index>(j);

  m.scores.setZero(static_cast<Eigen::Index>(m.app_ids.size()),
                   static_cast<Eigen::Index>(m.vignette_ids.size()));
  for (const pool::PooledAdvice& p : pool::pool_study(study, pool::kDefaultVariant)) {
    const Vignette* v = study.find_vignette(p.vignette_id);
    if (p.level && v && *p.level == v->gold) {
      m.scores(app_row.at(p.app_id), vig_col.at(p.vignette_id)) = 1;
    }
  }
  return m;
}

std::string_view exclusion_name(Exclusion e) {
  switch (e) {
    case Exclusion::No:
      return "no";
    case Exclusion::ZeroDifficulty:
      return "zero_difficulty";
    case Exclusion::NonpositiveItemTotal:
      return "nonpositive_item_total";
    case Exclusion::ZeroVariance:
      return "zero_variance";
  }
  return "no";
}

double item_difficulty(const ScoreMatrix& matrix,
                       const std::string& vignette_id) {
  const Eigen::Index j = column_of(matrix, vignette_id);
  if (matrix.scores.rows() == 0) return 0.0;
  return static_cast<double>(matrix.scores.col(j).sum()) /
         static_cast<double>(matrix.scores.rows());
}

std::optional<double> item_total_correlation(const ScoreMatrix& matrix,
                                             const std::string& vignette_id) {
  const Eigen::Index j = column_of(matrix, vignette_id);
  const Eigen::VectorXi rest =
      matrix.scores.rowwise().sum() - matrix.scores.col(j);
  return pearson(matrix.scores.col(j), rest);
}

RefineResult refine_set(const ScoreMatrix& matrix) {
  if (matrix.vignette_ids.empty() || matrix.scores.rows() == 0) {
    throw Error("AllItemsExcluded", "score matrix",
                "no items available for refinement");
  }
  const Eigen::Index n_apps = matrix.scores.rows();

  std::vector<Eigen::Index> alive(matrix.vignette_ids.size());
  for (std::size_t j = 0; j < alive.size(); ++j)
    alive[j] = static_cast<Eigen::Index>(j);

  RefineResult out;
  for (;;) {
    Eigen::VectorXi totals = Eigen::VectorXi::Zero(n_apps);
    for (Eigen::Index j : alive) totals += matrix.scores.col(j);

    std::vector<ItemStats> round;
    std::vector<Eigen::Index> next;
    round.reserve(alive.size());
    for (Eigen::Index j : alive) {
      const Eigen::VectorXi col = matrix.scores.col(j);
      const int hits = col.sum();
      ItemStats s;
      s.vignette_id = matrix.vignette_ids[static_cast<std::size_t>(j)];
      s.difficulty = static_cast<double>(hits) / static_cast<double>(n_apps);
      s.item_total_r = pearson(col, totals - col);
      if (hits == 0) {
        s.excluded = Exclusion::ZeroDifficulty;
      } else if (s.item_total_r && *s.item_total_r <= 0.0) {
        s.excluded = Exclusion::NonpositiveItemTotal;
      } else if (!s.item_total_r && hits < n_apps) {
        // Mixed scores but a flat rest-profile: the item cannot be ranked.
        s.excluded = Exclusion::ZeroVariance;
      }
      if (s.excluded == Exclusion::No) next.push_back(j);
      round.push_back(std::move(s));
    }

    const bool removed = next.size() != alive.size();
    out.iterations.push_back(std::move(round));
    if (next.empty()) {
      throw Error("AllItemsExcluded", "score matrix",
                  "every item was excluded during refinement");
    }
    if (!removed) break;
    alive = std::move(next);
  }

  out.retained.reserve(alive.size());
  for (Eigen::Index j : alive)
    out.retained.push_back(matrix.vignette_ids[static_cast<std::size_t>(j)]);
  return out;
}

SampleSize required_sample_size(double p0, double p1, double alpha,
                                double power) {
  const auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!open_unit(p0) || !open_unit(p1)) {
    throw Error("OutOfRange", "", "proportions must lie strictly in (0, 1)");
  }
  if (!open_unit(alpha)) {
    throw Error("OutOfRange", "", "alpha must lie strictly in (0, 1)");
  }
  if (!open_unit(power)) {
    throw Error("OutOfRange", "", "power must lie strictly in (0, 1)");
  }
  if (p0 == p1) {
    throw Error("ZeroEffect", "", "effect size is zero (p0 == p1)");
  }

  const boost::math::normal_distribution<double> normal;
  const double z_alpha = boost::math::quantile(normal, 1.0 - alpha / 2.0);
  const double z_beta = boost::math::quantile(normal, power);
  const double pbar = (p0 + p1) / 2.0;
  const double root =
      z_alpha * std::sqrt(2.0 * pbar * (1.0 - pbar)) +
      z_beta * std::sqrt(p0 * (1.0 - p0) + p1 * (1.0 - p1));
  const double diff = p1 - p0;
  double n = (root * root) / (diff * diff);
  // Absorb representation error before taking the ceiling.
  if (std::abs(n - std::round(n)) < 1e-9) n = std::round(n);

  SampleSize out;
  out.per_group = static_cast<long>(std::ceil(n));
  out.recommended_set_size = std::max<long>(out.per_group, 45);
  return out;
}

}  // namespace triagebench::refine
