#include "ertkit/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ertkit/rng.hpp"
#include "ertkit/stats.hpp"

namespace ertkit {

namespace {

std::string fmt_lambda(double lambda) {
  std::ostringstream os;
  os << lambda;
  return os.str();
}

/// Rows of `data` grouped by the plan's folds; rows whose subject is not
/// on the roster are dropped (that is what a stage-1 subsample means).
std::vector<std::vector<Index>> fold_rows(
    const ModelData& data, const std::vector<std::string>& subject_names,
    const CVPlan& plan) {
  std::vector<std::vector<Index>> folds(plan.k);
  for (Index r = 0; r < data.X.rows(); ++r) {
    const int subj = data.subject_of_row[static_cast<std::size_t>(r)];
    if (subj < 0 || subj >= static_cast<int>(subject_names.size()))
      throw validation_error("row subject index out of range");
    const auto it = plan.fold_of.find(subject_names[subj]);
    if (it == plan.fold_of.end()) continue;
    folds[it->second].push_back(r);
  }
  return folds;
}

struct Split {
  Mat X_train, X_test;
  Vec y_train, y_test;
};

Split make_split(const ModelData& data,
                 const std::vector<std::vector<Index>>& folds, int test) {
  std::vector<Index> train;
  for (int f = 0; f < static_cast<int>(folds.size()); ++f)
    if (f != test) train.insert(train.end(), folds[f].begin(), folds[f].end());
  Split s;
  s.X_train.resize(static_cast<Index>(train.size()), kNFeatures);
  s.y_train.resize(static_cast<Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    s.X_train.row(static_cast<Index>(i)) = data.X.row(train[i]);
    s.y_train(static_cast<Index>(i)) = data.y(train[i]);
  }
  const auto& te = folds[test];
  s.X_test.resize(static_cast<Index>(te.size()), kNFeatures);
  s.y_test.resize(static_cast<Index>(te.size()));
  for (std::size_t i = 0; i < te.size(); ++i) {
    s.X_test.row(static_cast<Index>(i)) = data.X.row(te[i]);
    s.y_test(static_cast<Index>(i)) = data.y(te[i]);
  }
  return s;
}

void apply_lambda(std::vector<SmoothSpec>& specs,
                  std::vector<TensorSpec>& tensors, double lambda,
                  const SelectionOptions& opts) {
  if (opts.vary_smooths)
    for (SmoothSpec& s : specs) s.lambda = lambda;
  if (opts.vary_tensors)
    for (TensorSpec& t : tensors) t.lambda = lambda;
}

double score_fold(Family family, const FittedGAM& model, const Split& s) {
  if (family == Family::binomial_logit)
    return auc(s.y_test, predict_skip(model, s.X_test));
  const Vec eta = predict_link(model, s.X_test);
  return std::sqrt((s.y_test - eta).squaredNorm() / s.y_test.size());
}

bool single_class(const Vec& y) {
  return y.size() == 0 || y.minCoeff() == y.maxCoeff();
}

}  // namespace

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -3; e <= 5; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

CVPlan group_kfold(const std::vector<std::string>& subjects, int k,
                   std::uint64_t seed) {
  if (k < 2) throw validation_error("group_kfold needs k >= 2");
  if (static_cast<int>(subjects.size()) < k)
    throw validation_error("group_kfold needs at least k subjects");
  CVPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.roster = subjects;
  Rng rng = Rng::derive(seed, 0x6b666f6c64);  // "kfold" tag
  rng.shuffle(plan.roster);
  for (std::size_t i = 0; i < plan.roster.size(); ++i) {
    const auto [it, fresh] =
        plan.fold_of.emplace(plan.roster[i], static_cast<int>(i % k));
    if (!fresh)
      throw validation_error("duplicate subject '" + plan.roster[i] + "'");
  }
  plan.lambda_grid = default_lambda_grid();
  return plan;
}

std::vector<std::string> subsample_subjects(
    const std::vector<std::string>& subjects, double frac,
    std::uint64_t seed) {
  if (!(frac > 0.0) || frac > 1.0)
    throw validation_error("subsample fraction must be in (0, 1]");
  std::vector<std::string> pool = subjects;
  Rng rng = Rng::derive(seed, 0x737562);  // "sub" tag
  rng.shuffle(pool);
  const auto keep = static_cast<std::size_t>(
      std::llround(frac * static_cast<double>(pool.size())));
  pool.resize(std::max<std::size_t>(keep, 1));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t choose_one_se(const std::vector<double>& lambdas,
                          const std::vector<double>& means,
                          const std::vector<double>& ses,
                          const std::vector<char>& usable,
                          bool higher_better) {
  std::size_t best = lambdas.size();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!usable[i]) continue;
    if (best == lambdas.size() ||
        (higher_better ? means[i] > means[best] : means[i] < means[best]))
      best = i;
  }
  if (best == lambdas.size())
    throw numeric_error("no usable grid point");
  const double bound =
      higher_better ? means[best] - ses[best] : means[best] + ses[best];
  std::size_t chosen = best;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!usable[i] || lambdas[i] <= lambdas[chosen]) continue;
    if (higher_better ? means[i] >= bound : means[i] <= bound) chosen = i;
  }
  return chosen;
}

SelectionResult grid_search(Family family,
                            const std::vector<SmoothSpec>& specs,
                            const std::vector<TensorSpec>& tensors,
                            const ModelData& data,
                            const std::vector<std::string>& subject_names,
                            const CVPlan& plan,
                            const SelectionOptions& opts) {
  if (plan.lambda_grid.empty())
    throw validation_error("empty lambda grid");
  if (!std::is_sorted(plan.lambda_grid.begin(), plan.lambda_grid.end()))
    throw validation_error("lambda grid must be ascending");

  const auto folds = fold_rows(data, subject_names, plan);
  SelectionResult res;
  res.family = family;
  res.higher_better = family == Family::binomial_logit;

  std::vector<Vec> warm(static_cast<std::size_t>(plan.k));
  std::vector<double> means, ses;
  std::vector<char> usable;
  for (const double lambda : plan.lambda_grid) {
    std::vector<SmoothSpec> sp = specs;
    std::vector<TensorSpec> tp = tensors;
    apply_lambda(sp, tp, lambda, opts);

    std::vector<double> scores;
    for (int f = 0; f < plan.k; ++f) {
      const Split s = make_split(data, folds, f);
      if (s.y_train.size() == 0 || s.y_test.size() == 0) {
        res.warnings.push_back("fold " + std::to_string(f) +
                               " has no data; skipped");
        continue;
      }
      if (family == Family::binomial_logit && single_class(s.y_test)) {
        res.warnings.push_back("fold " + std::to_string(f) +
                               " held-out labels are single-class; skipped");
        continue;
      }
      try {
        FitOptions fo = opts.fit;
        fo.warm_start = warm[static_cast<std::size_t>(f)];
        const FittedGAM model = fit(family, sp, tp, s.X_train, s.y_train, fo);
        if (!model.info.converged)
          throw numeric_error("fit did not converge");
        warm[static_cast<std::size_t>(f)] = model.packed_params;
        scores.push_back(score_fold(family, model, s));
      } catch (const std::runtime_error& e) {
        res.warnings.push_back("lambda=" + fmt_lambda(lambda) + " fold " +
                               std::to_string(f) + ": " + e.what());
      }
    }

    GridPointResult gp;
    gp.lambda = lambda;
    gp.n_folds = static_cast<int>(scores.size());
    if (scores.empty()) {
      gp.failed = true;
      res.warnings.push_back("lambda=" + fmt_lambda(lambda) +
                             ": every fold failed; grid point skipped");
    } else {
      gp.mean_score = mean(scores);
      gp.se = sample_sd(scores) /
              std::sqrt(static_cast<double>(scores.size()));
    }
    res.grid.push_back(gp);
    means.push_back(gp.mean_score);
    ses.push_back(gp.se);
    usable.push_back(gp.failed ? 0 : 1);
  }

  const std::size_t chosen = choose_one_se(plan.lambda_grid, means, ses,
                                           usable, res.higher_better);
  res.grid[chosen].chosen = true;
  res.chosen_lambda = plan.lambda_grid[chosen];
  res.frozen = true;
  return res;
}

ValidationMetrics validate(Family family,
                           const std::vector<SmoothSpec>& specs,
                           const std::vector<TensorSpec>& tensors,
                           const SelectionResult& selection,
                           const ModelData& data,
                           const std::vector<std::string>& subject_names,
                           const CVPlan& plan,
                           const SelectionOptions& opts) {
  if (!selection.frozen)
    throw validation_error("validate requires a frozen selection result");
  std::vector<SmoothSpec> sp = specs;
  std::vector<TensorSpec> tp = tensors;
  apply_lambda(sp, tp, selection.chosen_lambda, opts);

  const auto folds = fold_rows(data, subject_names, plan);
  ValidationMetrics m;
  m.higher_better = family == Family::binomial_logit;
  for (int f = 0; f < plan.k; ++f) {
    const Split s = make_split(data, folds, f);
    if (s.y_train.size() == 0 || s.y_test.size() == 0) {
      m.warnings.push_back("fold " + std::to_string(f) +
                           " has no data; skipped");
      continue;
    }
    if (family == Family::binomial_logit && single_class(s.y_test)) {
      m.warnings.push_back("fold " + std::to_string(f) +
                           " held-out labels are single-class; skipped");
      continue;
    }
    try {
      const FittedGAM model =
          fit(family, sp, tp, s.X_train, s.y_train, opts.fit);
      m.fold_scores.push_back(score_fold(family, model, s));
    } catch (const std::runtime_error& e) {
      m.warnings.push_back("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  if (m.fold_scores.empty())
    throw numeric_error("validation failed in every fold");
  m.mean_score = mean(m.fold_scores);
  m.se = sample_sd(m.fold_scores) /
         std::sqrt(static_cast<double>(m.fold_scores.size()));
  return m;
}

FittedGAM final_refit(Family family, std::vector<SmoothSpec> specs,
                      std::vector<TensorSpec> tensors, double frozen_lambda,
                      const ModelData& data, const SelectionOptions& opts) {
  apply_lambda(specs, tensors, frozen_lambda, opts);
  return fit(family, specs, tensors, data.X, data.y, opts.fit);
}

double auc(const Vec& labels, const Vec& scores) {
  const Index n = labels.size();
  if (scores.size() != n)
    throw validation_error("labels and scores must have equal length");
  Index n1 = 0;
  for (Index i = 0; i < n; ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0)
      throw validation_error("labels must be 0 or 1");
    if (labels(i) == 1.0) ++n1;
  }
  const Index n0 = n - n1;
  if (n0 == 0 || n1 == 0)
    throw validation_error("AUC needs both classes present");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores(a) < scores(b); });

  // Average ranks over tied score runs, 1-based.
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores(order[j + 1]) == scores(order[i]))
      ++j;
    const double avg_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j + 1)) /
                            2.0;
    for (std::size_t t = i; t <= j; ++t)
      if (labels(order[t]) == 1.0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) /
                       2.0;
  return u / (static_cast<double>(n0) * static_cast<double>(n1));
}

}  // namespace ertkit
