#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "triagebench/error.hpp"
#include "triagebench/ingest.hpp"
#include "triagebench/refine.hpp"

using namespace triagebench;

namespace {

refine::ScoreMatrix make_matrix(const std::vector<std::vector<int>>& rows) {
  refine::ScoreMatrix m;
  const int n_apps = static_cast<int>(rows.size());
  const int n_items = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  m.scores.resize(n_apps, n_items);
  for (int a = 0; a < n_apps; ++a) {
    m.app_ids.push_back("app" + std::to_string(a + 1));
    for (int i = 0; i < n_items; ++i) m.scores(a, i) = rows[a][i];
  }
  for (int i = 0; i < n_items; ++i)
    m.vignette_ids.push_back("v" + std::to_string(i + 1));
  return m;
}

}  // namespace

TEST_CASE("item statistics match hand-computed values") {
  // totals: 2, 2, 1, 0, 0 -> rest for item 0: 2,1,0,0,0
  const auto m = make_matrix({{0, 0, 1, 1},
                              {1, 1, 0, 0},
                              {1, 0, 0, 0},
                              {0, 0, 0, 0},
                              {0, 0, 0, 0}});
  CHECK(refine::item_difficulty(m, "v1") == doctest::Approx(0.4));
  CHECK(refine::item_difficulty(m, "v4") == doctest::Approx(0.2));
  const auto r1 = refine::item_total_correlation(m, "v1");
  REQUIRE(r1.has_value());
  // column (0,1,1,0,0) against rest (2,1,0,0,0): covariance sum is -1
  CHECK(*r1 < 0.0);
  CHECK(*r1 ==
        doctest::Approx(testutil::oracle::pearson({0, 1, 1, 0, 0},
                                                  {2, 1, 0, 0, 0})
                            .value())
            .epsilon(1e-12));
  CHECK_THROWS_WITH_AS(refine::item_difficulty(m, "ghost"),
                       doctest::Contains("UnknownVignette"), Error);
}

TEST_CASE("item_total_correlation is undefined without variance") {
  // Item column constant -> nullopt.
  const auto flat = make_matrix({{1, 0}, {1, 1}, {1, 0}});
  CHECK_FALSE(refine::item_total_correlation(flat, "v1").has_value());
  // Rest scores constant -> nullopt.
  const auto rest = make_matrix({{1, 1}, {1, 0}, {1, 1}});
  CHECK_FALSE(refine::item_total_correlation(rest, "v2").has_value());
}

TEST_CASE("refine_set cascades exclusions across iterations") {
  // Iteration 1 drops v1 (negative r), iteration 2 drops v2 (its r turns
  // negative once v1 is gone), iteration 3 keeps v3 and v4.
  const auto m = make_matrix({{0, 0, 1, 1},
                              {1, 1, 0, 0},
                              {1, 0, 0, 0},
                              {0, 0, 0, 0},
                              {0, 0, 0, 0}});
  const refine::RefineResult res = refine::refine_set(m);
  CHECK(res.retained == std::vector<std::string>{"v3", "v4"});
  REQUIRE(res.iterations.size() == 3);
  REQUIRE(res.iterations[0].size() == 4);
  CHECK(res.iterations[0][0].vignette_id == "v1");
  CHECK(res.iterations[0][0].excluded == refine::Exclusion::NonpositiveItemTotal);
  CHECK(res.iterations[0][1].excluded == refine::Exclusion::No);
  REQUIRE(res.iterations[1].size() == 3);
  CHECK(res.iterations[1][0].vignette_id == "v2");
  CHECK(res.iterations[1][0].excluded == refine::Exclusion::NonpositiveItemTotal);
  REQUIRE(res.iterations[2].size() == 2);
  for (const auto& st : res.iterations[2])
    CHECK(st.excluded == refine::Exclusion::No);
}

TEST_CASE("refine_set applies each exclusion rule") {
  SUBCASE("difficulty zero goes first") {
    const auto m = make_matrix(
        {{0, 1, 1}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    const auto res = refine::refine_set(m);
    CHECK(res.iterations[0][0].excluded == refine::Exclusion::ZeroDifficulty);
    CHECK(res.retained == std::vector<std::string>{"v2", "v3"});
  }

  SUBCASE("universally solved items survive") {
    const auto m = make_matrix({{1, 1, 0}, {1, 0, 1}, {1, 1, 1}});
    const auto res = refine::refine_set(m);
    bool kept = false;
    for (const auto& id : res.retained) kept |= id == "v1";
    CHECK(kept);
    CHECK(res.iterations[0][0].excluded == refine::Exclusion::No);
  }

  SUBCASE("mixed item with flat rest-score is dropped") {
    // v1 is mixed but its rest totals are flat (2,2,2) -> ZeroVariance.
    const auto m = make_matrix({{1, 1, 1}, {0, 1, 1}, {0, 1, 1}});
    const auto res = refine::refine_set(m);
    REQUIRE(!res.iterations.empty());
    CHECK(res.iterations[0][0].excluded == refine::Exclusion::ZeroVariance);
    CHECK(res.retained == std::vector<std::string>{"v2", "v3"});
  }

  SUBCASE("everything removable raises AllItemsExcluded") {
    const auto m = make_matrix({{0, 0}, {0, 0}});
    CHECK_THROWS_WITH_AS(refine::refine_set(m),
                         doctest::Contains("AllItemsExcluded"), Error);
    CHECK_THROWS_WITH_AS(refine::refine_set(make_matrix({})),
                         doctest::Contains("AllItemsExcluded"), Error);
  }
}

TEST_CASE("refine_set fixpoint leaves no excludable item behind") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_apps = 3 + static_cast<int>(rng() % 6);
    const int n_items = 2 + static_cast<int>(rng() % 10);
    std::vector<std::vector<int>> rows(
        static_cast<size_t>(n_apps),
        std::vector<int>(static_cast<size_t>(n_items), 0));
    for (auto& row : rows)
      for (auto& cell : row) cell = static_cast<int>(rng() % 2);
    const auto m = make_matrix(rows);
    refine::RefineResult res;
    try {
      res = refine::refine_set(m);
    } catch (const Error& e) {
      CHECK(e.code() == "AllItemsExcluded");
      continue;
    }
    REQUIRE(!res.retained.empty());

    // Rebuild the surviving submatrix and re-check every rule by hand.
    std::set<std::string> keep(res.retained.begin(), res.retained.end());
    refine::ScoreMatrix sub;
    sub.app_ids = m.app_ids;
    sub.scores.resize(n_apps, static_cast<int>(keep.size()));
    int col = 0;
    for (int i = 0; i < n_items; ++i) {
      if (keep.count(m.vignette_ids[static_cast<size_t>(i)]) == 0) continue;
      sub.vignette_ids.push_back(m.vignette_ids[static_cast<size_t>(i)]);
      sub.scores.col(col++) = m.scores.col(i);
    }
    for (const auto& id : sub.vignette_ids) {
      const double diff = refine::item_difficulty(sub, id);
      CHECK(diff > 0.0);
      const auto r = refine::item_total_correlation(sub, id);
      if (r) {
        CHECK(*r > 0.0);
      } else {
        CHECK(diff == doctest::Approx(1.0));  // only solved items may stay
      }
    }

    // Stats reported for the final iteration agree with direct recomputation.
    const auto& last = res.iterations.back();
    REQUIRE(last.size() == res.retained.size());
    for (const auto& st : last) {
      CHECK(st.excluded == refine::Exclusion::No);
      CHECK(st.difficulty ==
            doctest::Approx(refine::item_difficulty(sub, st.vignette_id))
                .epsilon(1e-12));
      const auto want = refine::item_total_correlation(sub, st.vignette_id);
      REQUIRE(st.item_total_r.has_value() == want.has_value());
      if (want)
        CHECK(*st.item_total_r == doctest::Approx(*want).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_score_matrix scores pooled advice against gold") {
  const Study s = assemble_study(
      ingest::parse_vignettes(
          "vignette_id,description,gold_level,stratum,source,panel_count,"
          "consensus_method\n"
          "v1,x,emergency,s,src,2,m\n"
          "v2,y,self_care,s,src,2,m\n",
          "v"),
      ingest::parse_records("vignette_id,app_id,inputter_id,raw_advice\n"
                            "v1,a,i1,go\n"
                            "v1,a,i2,go\n"
                            "v2,a,i1,go\n"
                            "v2,a,i2,stay\n"
                            "v1,b,i1,stay\n"
                            "v1,b,i2,stay\n"
                            "v2,b,i1,stay\n"
                            "v2,b,i2,stay\n",
                            "r"),
      ingest::parse_mapping("[app:a]\ngo = emergency\nstay = self_care\n"
                            "[app:b]\nstay = self_care\n",
                            "m"));
  const refine::ScoreMatrix m = refine::build_score_matrix(s);
  REQUIRE(m.app_ids == std::vector<std::string>{"a", "b"});
  REQUIRE(m.vignette_ids == std::vector<std::string>{"v1", "v2"});
  CHECK(m.scores(0, 0) == 1);  // a pools to emergency on v1
  CHECK(m.scores(0, 1) == 0);  // a ties SC/E -> escalates -> wrong
  CHECK(m.scores(1, 0) == 0);
  CHECK(m.scores(1, 1) == 1);
}

TEST_CASE("required_sample_size reproduces the worked example") {
  const refine::SampleSize n = refine::required_sample_size(0.5, 0.8, 0.05, 0.8);
  CHECK(n.per_group == 39);
  CHECK(n.recommended_set_size == 45);
  const auto oracle = testutil::oracle::sample_size(0.5, 0.8, 0.05, 0.8);
  CHECK(n.per_group == oracle);
}

TEST_CASE("required_sample_size floors the recommendation at 45") {
  const refine::SampleSize big = refine::required_sample_size(0.5, 0.6, 0.05, 0.9);
  CHECK(big.per_group > 45);
  CHECK(big.recommended_set_size == big.per_group);
  const refine::SampleSize small =
      refine::required_sample_size(0.1, 0.9, 0.05, 0.8);
  CHECK(small.per_group < 45);
  CHECK(small.recommended_set_size == 45);
}

TEST_CASE("required_sample_size matches the oracle over a parameter sweep") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double p0 = 0.05 + 0.9 * ((rng() >> 11) * 0x1.0p-53);
    double p1 = 0.05 + 0.9 * ((rng() >> 11) * 0x1.0p-53);
    if (p0 == p1) p1 += 0.01;
    const double alpha = 0.01 + 0.1 * ((rng() >> 11) * 0x1.0p-53);
    const double power = 0.7 + 0.25 * ((rng() >> 11) * 0x1.0p-53);
    const auto got = refine::required_sample_size(p0, p1, alpha, power);
    CHECK(got.per_group == testutil::oracle::sample_size(p0, p1, alpha, power));
    CHECK(got.recommended_set_size == std::max<long>(got.per_group, 45));
  }
}

TEST_CASE("required_sample_size validates its parameters") {
  CHECK_THROWS_WITH_AS(refine::required_sample_size(0.0, 0.8, 0.05, 0.8),
                       doctest::Contains("OutOfRange"), Error);
  CHECK_THROWS_WITH_AS(refine::required_sample_size(0.5, 1.0, 0.05, 0.8),
                       doctest::Contains("OutOfRange"), Error);
  CHECK_THROWS_WITH_AS(refine::required_sample_size(0.5, 0.8, 0.0, 0.8),
                       doctest::Contains("OutOfRange"), Error);
  CHECK_THROWS_WITH_AS(refine::required_sample_size(0.5, 0.8, 0.05, 1.0),
                       doctest::Contains("OutOfRange"), Error);
  CHECK_THROWS_WITH_AS(refine::required_sample_size(0.6, 0.6, 0.05, 0.8),
                       doctest::Contains("ZeroEffect"), Error);
}
