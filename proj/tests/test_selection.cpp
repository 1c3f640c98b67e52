#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "ertkit/rng.hpp"
#include "ertkit/selection.hpp"
#include "ertkit/stats.hpp"
#include "oracles.hpp"

using namespace ertkit;

namespace {

std::vector<std::string> make_subjects(int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back("s" + std::to_string(100 + i));
  return v;
}

std::vector<int> fold_sizes(const CVPlan& plan) {
  std::vector<int> sizes(plan.k, 0);
  for (const auto& [subj, f] : plan.fold_of) ++sizes[f];
  return sizes;
}

// Synthetic per-subject skip data with a smooth signal in one feature.
struct SyntheticData {
  ModelData data;
  std::vector<std::string> names;
};

SyntheticData synth_skip(int n_subjects, int rows_per_subject,
                         std::uint64_t seed) {
  SyntheticData s;
  s.names = make_subjects(n_subjects);
  const int n = n_subjects * rows_per_subject;
  s.data.X.resize(n, kNFeatures);
  s.data.y.resize(n);
  Rng rng(seed);
  int r = 0;
  for (int subj = 0; subj < n_subjects; ++subj) {
    const double shift = 0.3 * rng.normal();
    for (int i = 0; i < rows_per_subject; ++i, ++r) {
      s.data.X(r, 0) = 1.0 + 9.0 * rng.uniform();
      s.data.X(r, 1) = 7.0 * rng.uniform();
      s.data.X(r, 2) = 15.0 * rng.uniform();
      const double eta = -1.5 + 0.35 * s.data.X(r, 0) + shift;
      s.data.y(r) = rng.bernoulli(logistic(eta)) ? 1.0 : 0.0;
      s.data.subject_of_row.push_back(subj);
      s.data.token_rows.push_back(static_cast<std::size_t>(r));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("group_kfold partitions subjects into near-equal folds") {
  SUBCASE("one subject per fold when k equals n") {
    const CVPlan plan = group_kfold(make_subjects(10), 10, 1);
    CHECK(plan.k == 10);
    const auto sizes = fold_sizes(plan);
    for (int c : sizes) CHECK(c == 1);
  }
  SUBCASE("57 subjects in 10 folds gives sizes 5 or 6") {
    const CVPlan plan = group_kfold(make_subjects(57), 10, 2);
    const auto sizes = fold_sizes(plan);
    int small = 0, large = 0;
    for (int c : sizes) {
      CHECK((c == 5 || c == 6));
      (c == 5 ? small : large) += 1;
    }
    CHECK(small == 3);
    CHECK(large == 7);
  }
  SUBCASE("every subject lands in exactly one fold") {
    const auto subjects = make_subjects(23);
    const CVPlan plan = group_kfold(subjects, 4, 9);
    CHECK(plan.fold_of.size() == subjects.size());
    for (const auto& s : subjects) {
      REQUIRE(plan.fold_of.count(s) == 1);
      CHECK(plan.fold_of.at(s) >= 0);
      CHECK(plan.fold_of.at(s) < 4);
    }
  }
  SUBCASE("same seed gives an identical plan, another seed differs") {
    const auto subjects = make_subjects(30);
    const CVPlan a = group_kfold(subjects, 5, 77);
    const CVPlan b = group_kfold(subjects, 5, 77);
    CHECK(a.roster == b.roster);
    CHECK(a.fold_of == b.fold_of);
    const CVPlan c = group_kfold(subjects, 5, 78);
    CHECK(a.fold_of != c.fold_of);
  }
  SUBCASE("rejects bad arguments") {
    CHECK_THROWS_AS(group_kfold(make_subjects(5), 1, 0), validation_error);
    CHECK_THROWS_AS(group_kfold(make_subjects(3), 4, 0), validation_error);
    auto dup = make_subjects(6);
    dup[5] = dup[0];
    CHECK_THROWS_WITH_AS(group_kfold(dup, 3, 0),
                         doctest::Contains("duplicate"), validation_error);
  }
}

TEST_CASE("subject subsample is deterministic and half-sized") {
  const auto subjects = make_subjects(57);
  const auto a = subsample_subjects(subjects, 0.5, 11);
  const auto b = subsample_subjects(subjects, 0.5, 11);
  CHECK(a == b);
  CHECK(a.size() == 29);  // 28.5 rounds half away from zero
  CHECK(std::is_sorted(a.begin(), a.end()));
  const std::set<std::string> pool(subjects.begin(), subjects.end());
  for (const auto& s : a) CHECK(pool.count(s) == 1);
  const auto c = subsample_subjects(subjects, 0.5, 12);
  CHECK(a != c);
  CHECK_THROWS_AS(subsample_subjects(subjects, 0.0, 1), validation_error);
  CHECK_THROWS_AS(subsample_subjects(subjects, 1.5, 1), validation_error);
}

TEST_CASE("default lambda grid spans 1e-3 to 1e5 in 9 steps") {
  const auto grid = default_lambda_grid();
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(grid.back() == doctest::Approx(1e5).epsilon(1e-14));
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("auc matches hand values and the pair-count oracle") {
  SUBCASE("identical scores give one half") {
    Vec labels(6), scores(6);
    labels << 0, 1, 0, 1, 1, 0;
    scores.setConstant(0.4);
    CHECK(auc(labels, scores) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("perfect ranking gives one") {
    Vec labels(4), scores(4);
    labels << 0, 0, 1, 1;
    scores << 0.1, 0.2, 0.8, 0.9;
    CHECK(auc(labels, scores) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("random instances agree with brute-force pair counting") {
    Rng rng(321);
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 30 + static_cast<int>(rng.below(30));
      Vec labels(n), scores(n);
      std::vector<double> sv(n);
      std::vector<int> lv(n);
      bool has0 = false, has1 = false;
      for (int i = 0; i < n; ++i) {
        lv[i] = rng.bernoulli(0.4) ? 1 : 0;
        // Coarse grid forces plenty of ties.
        sv[i] = std::floor(rng.uniform() * 8.0) / 8.0;
        labels(i) = lv[i];
        scores(i) = sv[i];
        (lv[i] ? has1 : has0) = true;
      }
      if (!has0 || !has1) continue;
      CHECK(auc(labels, scores) ==
            doctest::Approx(oracles::naive_auc(sv, lv)).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under strictly increasing transforms") {
    Rng rng(9);
    const int n = 60;
    Vec labels(n), scores(n), warped(n);
    for (int i = 0; i < n; ++i) {
      labels(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      scores(i) = rng.normal();
      warped(i) = std::exp(scores(i));
    }
    CHECK(auc(labels, scores) ==
          doctest::Approx(auc(labels, warped)).epsilon(1e-14));
  }
  SUBCASE("single class or bad labels rejected") {
    Vec ones = Vec::Ones(5), scores = Vec::Zero(5);
    CHECK_THROWS_WITH_AS(auc(ones, scores), doctest::Contains("both classes"),
                         validation_error);
    Vec bad(3), s3(3);
    bad << 0, 0.5, 1;
    s3 << 1, 2, 3;
    CHECK_THROWS_AS(auc(bad, s3), validation_error);
  }
}

TEST_CASE("the 1-SE rule picks the largest lambda within one SE") {
  const std::vector<double> lambdas = {1.0, 10.0, 100.0, 1000.0};
  const std::vector<char> all(4, 1);
  SUBCASE("hand-applied score table") {
    // Best .700 (SE .005) at lambda=1; .697 at lambda=100 is within one SE;
    // .690 at lambda=1000 is not.
    const std::vector<double> means = {0.700, 0.694, 0.697, 0.690};
    const std::vector<double> ses = {0.005, 0.004, 0.006, 0.005};
    CHECK(choose_one_se(lambdas, means, ses, all, true) == 2);
  }
  SUBCASE("flat scores choose the largest lambda") {
    const std::vector<double> means(4, 0.65);
    const std::vector<double> ses(4, 0.01);
    CHECK(choose_one_se(lambdas, means, ses, all, true) == 3);
  }
  SUBCASE("monotone degradation with tiny SE keeps the argmax") {
    const std::vector<double> means = {0.72, 0.70, 0.68, 0.66};
    const std::vector<double> ses(4, 1e-9);
    CHECK(choose_one_se(lambdas, means, ses, all, true) == 0);
  }
  SUBCASE("lower-better flips the comparison") {
    const std::vector<double> means = {0.50, 0.52, 0.505, 0.60};
    const std::vector<double> ses = {0.01, 0.001, 0.001, 0.001};
    CHECK(choose_one_se(lambdas, means, ses, all, false) == 2);
  }
  SUBCASE("failed points are never chosen") {
    const std::vector<double> means = {0.70, 0.0, 0.699, 0.0};
    const std::vector<double> ses = {0.005, 0.0, 0.005, 0.0};
    const std::vector<char> usable = {1, 0, 1, 0};
    CHECK(choose_one_se(lambdas, means, ses, usable, true) == 2);
    CHECK_THROWS_AS(
        choose_one_se(lambdas, means, ses, std::vector<char>(4, 0), true),
        numeric_error);
  }
}

TEST_CASE("grid search freezes a grid lambda and respects the 1-SE order") {
  const SyntheticData s = synth_skip(12, 90, 5150);
  CVPlan plan = group_kfold(s.names, 5, 99);
  plan.lambda_grid = {1e-2, 1e-1, 1.0, 10.0, 100.0};

  SmoothSpec spec;
  spec.feature = Feature::length;
  spec.n_splines = 6;
  const SelectionResult res =
      grid_search(Family::binomial_logit, {spec}, {}, s.data, s.names, plan);

  CHECK(res.frozen);
  CHECK(res.higher_better);
  REQUIRE(res.grid.size() == 5);
  int chosen_count = 0;
  for (const auto& gp : res.grid) {
    CHECK(!gp.failed);
    CHECK(gp.n_folds == 5);
    CHECK(gp.mean_score > 0.5);
    CHECK(gp.mean_score <= 1.0);
    if (gp.chosen) {
      ++chosen_count;
      CHECK(gp.lambda == res.chosen_lambda);
    }
  }
  CHECK(chosen_count == 1);
  CHECK(std::count(plan.lambda_grid.begin(), plan.lambda_grid.end(),
                   res.chosen_lambda) == 1);

  // Monotone-safe: chosen lambda is at least the argmax lambda.
  double best_lambda = 0, best_score = -1;
  for (const auto& gp : res.grid)
    if (gp.mean_score > best_score) {
      best_score = gp.mean_score;
      best_lambda = gp.lambda;
    }
  CHECK(res.chosen_lambda >= best_lambda);

  // Deterministic: a rerun reproduces the result exactly.
  const SelectionResult rerun =
      grid_search(Family::binomial_logit, {spec}, {}, s.data, s.names, plan);
  CHECK(rerun.chosen_lambda == res.chosen_lambda);
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    CHECK(rerun.grid[i].mean_score == res.grid[i].mean_score);
    CHECK(rerun.grid[i].se == res.grid[i].se);
  }
}

TEST_CASE("grid search restricted to a roster ignores other subjects") {
  const SyntheticData s = synth_skip(10, 80, 777);
  // Plan only covers the first half of the subjects.
  const std::vector<std::string> half(s.names.begin(), s.names.begin() + 5);
  CVPlan plan = group_kfold(half, 5, 3);
  plan.lambda_grid = {1.0, 10.0};
  SmoothSpec spec;
  spec.feature = Feature::length;
  spec.n_splines = 5;
  const SelectionResult res =
      grid_search(Family::binomial_logit, {spec}, {}, s.data, s.names, plan);
  for (const auto& gp : res.grid) {
    CHECK(!gp.failed);
    CHECK(gp.n_folds == 5);
  }
  CHECK(res.frozen);
}

TEST_CASE("grid search errors when every point fails") {
  // 5 subjects, 4 rows each: far below the 10-rows-per-coefficient floor.
  const SyntheticData s = synth_skip(5, 4, 31);
  CVPlan plan = group_kfold(s.names, 5, 1);
  plan.lambda_grid = {1.0, 10.0};
  SmoothSpec spec;
  spec.feature = Feature::length;
  spec.n_splines = 8;
  CHECK_THROWS_AS(grid_search(Family::binomial_logit, {spec}, {}, s.data,
                              s.names, plan),
                  numeric_error);
}

TEST_CASE("validation reports per-fold scores at the frozen lambda") {
  SUBCASE("separable skip data scores AUC 1 in every fold") {
    const int n_subj = 12, rows = 60;
    std::vector<std::string> names = make_subjects(n_subj);
    ModelData data;
    data.X.resize(n_subj * rows, kNFeatures);
    data.y.resize(n_subj * rows);
    Rng rng(8);
    int r = 0;
    for (int subj = 0; subj < n_subj; ++subj)
      for (int i = 0; i < rows; ++i, ++r) {
        // Wide margin between the classes keeps the coefficients finite:
        // a thin margin is genuine separation and must throw instead.
        const bool pos = rng.bernoulli(0.5);
        data.X(r, 0) = pos ? 6.0 + 4.0 * rng.uniform() : 4.0 * rng.uniform();
        data.X(r, 1) = 7.0 * rng.uniform();
        data.X(r, 2) = 15.0 * rng.uniform();
        data.y(r) = pos ? 1.0 : 0.0;
        data.subject_of_row.push_back(subj);
      }
    SmoothSpec spec;
    spec.feature = Feature::length;
    spec.n_splines = 6;
    SelectionResult frozen;
    frozen.frozen = true;
    frozen.chosen_lambda = 1.0;
    const CVPlan plan10 = group_kfold(names, 10, 21);
    const ValidationMetrics m = validate(Family::binomial_logit, {spec}, {},
                                         frozen, data, names, plan10);
    REQUIRE(m.fold_scores.size() == 10);
    for (double s : m.fold_scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.mean_score == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("single-class folds are skipped with a warning") {
    const SyntheticData base = synth_skip(12, 50, 44);
    ModelData data = base.data;
    const CVPlan plan = group_kfold(base.names, 6, 13);
    // Force every row of fold 0's subjects to the positive class.
    for (Index r = 0; r < data.X.rows(); ++r) {
      const auto& name = base.names[data.subject_of_row[r]];
      if (plan.fold_of.at(name) == 0) data.y(r) = 1.0;
    }
    SmoothSpec spec;
    spec.feature = Feature::length;
    spec.n_splines = 5;
    SelectionResult frozen;
    frozen.frozen = true;
    frozen.chosen_lambda = 10.0;
    const ValidationMetrics m = validate(Family::binomial_logit, {spec}, {},
                                         frozen, data, base.names, plan);
    CHECK(m.fold_scores.size() == 5);
    REQUIRE(!m.warnings.empty());
    CHECK(m.warnings[0].find("single-class") != std::string::npos);
  }

  SUBCASE("duration validation uses log-RMSE, lower better") {
    const int n_subj = 10, rows = 60;
    std::vector<std::string> names = make_subjects(n_subj);
    ModelData data;
    data.X.resize(n_subj * rows, kNFeatures);
    data.y.resize(n_subj * rows);
    Rng rng(66);
    const double sigma = 0.3;
    int r = 0;
    for (int subj = 0; subj < n_subj; ++subj)
      for (int i = 0; i < rows; ++i, ++r) {
        data.X(r, 0) = 10.0 * rng.uniform();
        data.X(r, 1) = 7.0 * rng.uniform();
        data.X(r, 2) = 15.0 * rng.uniform();
        data.y(r) = 5.0 + 0.12 * data.X(r, 0) + sigma * rng.normal();
        data.subject_of_row.push_back(subj);
      }
    SmoothSpec spec;
    spec.feature = Feature::length;
    spec.n_splines = 6;
    SelectionResult frozen;
    frozen.frozen = true;
    frozen.chosen_lambda = 1.0;
    const CVPlan plan = group_kfold(names, 10, 5);
    const ValidationMetrics m = validate(Family::gaussian_log, {spec}, {},
                                         frozen, data, names, plan);
    CHECK(!m.higher_better);
    REQUIRE(m.fold_scores.size() == 10);
    // Held-out log-RMSE estimates the noise level.
    CHECK(m.mean_score > 0.25);
    CHECK(m.mean_score < 0.36);
  }

  SUBCASE("unfrozen selection rejected") {
    SelectionResult loose;
    loose.chosen_lambda = 1.0;
    ModelData data;
    data.X = Mat::Ones(10, kNFeatures);
    data.y = Vec::Zero(10);
    data.subject_of_row.assign(10, 0);
    const CVPlan plan = group_kfold(make_subjects(4), 2, 0);
    CHECK_THROWS_WITH_AS(validate(Family::binomial_logit, {}, {}, loose, data,
                                  make_subjects(1), plan),
                         doctest::Contains("frozen"), validation_error);
  }
}

TEST_CASE("final refit trains on every row with the frozen lambda") {
  const SyntheticData s = synth_skip(8, 40, 404);
  SmoothSpec spec;
  spec.feature = Feature::length;
  spec.n_splines = 6;
  const std::uint64_t before = fit_count();
  const FittedGAM model =
      final_refit(Family::binomial_logit, {spec}, {}, 10.0, s.data);
  CHECK(fit_count() == before + 1);
  CHECK(model.info.n_rows == s.data.X.rows());
  REQUIRE(model.smooths.size() == 1);
  CHECK(model.smooths[0].spec.lambda == 10.0);
}
