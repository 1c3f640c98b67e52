#ifndef ERTKIT_SELECTION_HPP
#define ERTKIT_SELECTION_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ertkit/gam.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Subject-wise cross-validation plan: every subject sits in exactly one
/// fold, fold sizes differ by at most one, and the shuffle is a pure
/// function of the seed.
struct CVPlan {
  int k = 0;
  std::uint64_t seed = 0;
  /// Subjects covered by this plan, in assignment order.
  std::vector<std::string> roster;
  std::unordered_map<std::string, int> fold_of;
  /// Shared smoothing grid, ascending.
  std::vector<double> lambda_grid;
};

/// 9 points, log-spaced 1e-3 .. 1e5.
std::vector<double> default_lambda_grid();

/// Deterministic shuffle by seed, then round-robin fold assignment.
CVPlan group_kfold(const std::vector<std::string>& subjects, int k,
                   std::uint64_t seed);

/// Seed-deterministic subject subsample for the first selection stage;
/// rounds half away from zero and returns the roster sorted.
std::vector<std::string> subsample_subjects(
    const std::vector<std::string>& subjects, double frac,
    std::uint64_t seed);

struct GridPointResult {
  double lambda = 0;
  double mean_score = 0;
  double se = 0;
  int n_folds = 0;   // folds that produced a score
  bool failed = false;
  bool chosen = false;
};

struct ValidationMetrics {
  bool higher_better = true;
  std::vector<double> fold_scores;
  double mean_score = 0;
  double se = 0;
  std::vector<std::string> warnings;
};

struct SelectionResult {
  Family family = Family::binomial_logit;
  bool higher_better = true;
  double chosen_lambda = 0;
  bool frozen = false;
  std::vector<GridPointResult> grid;
  std::vector<std::string> warnings;
};

struct SelectionOptions {
  /// Which terms take the grid value; frozen terms keep their own lambda.
  bool vary_smooths = true;
  bool vary_tensors = true;
  FitOptions fit;
};

/// The 1-SE rule on one grid axis: among points whose mean score is
/// within one standard error of the best, pick the largest lambda
/// (the smoothest model). Inputs are parallel arrays; failed points are
/// passed with usable=false and never chosen.
std::size_t choose_one_se(const std::vector<double>& lambdas,
                          const std::vector<double>& means,
                          const std::vector<double>& ses,
                          const std::vector<char>& usable,
                          bool higher_better);

/// Grid search over the plan's lambda grid with subject-wise CV on the
/// plan roster. Scores: AUC for binomial (higher better), log-RMSE for
/// gaussian (lower better). Grid points where every fold fails are
/// skipped with a warning; if all points fail, numeric_error. The result
/// is frozen.
SelectionResult grid_search(Family family,
                            const std::vector<SmoothSpec>& specs,
                            const std::vector<TensorSpec>& tensors,
                            const ModelData& data,
                            const std::vector<std::string>& subject_names,
                            const CVPlan& plan,
                            const SelectionOptions& opts = {});

/// K-fold metrics at the frozen lambda over the plan's roster. Folds
/// whose held-out labels contain a single class are skipped with a
/// warning. Requires a frozen SelectionResult.
ValidationMetrics validate(Family family,
                           const std::vector<SmoothSpec>& specs,
                           const std::vector<TensorSpec>& tensors,
                           const SelectionResult& selection,
                           const ModelData& data,
                           const std::vector<std::string>& subject_names,
                           const CVPlan& plan,
                           const SelectionOptions& opts = {});

/// Refit on all rows with the frozen lambda applied.
FittedGAM final_refit(Family family, std::vector<SmoothSpec> specs,
                      std::vector<TensorSpec> tensors, double frozen_lambda,
                      const ModelData& data,
                      const SelectionOptions& opts = {});

/// Rank-based (Mann-Whitney) AUC with average ranks for ties.
/// labels must be 0/1 with both classes present.
double auc(const Vec& labels, const Vec& scores);

}  // namespace ertkit

#endif
