#include "banditsim/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "banditsim/errors.hpp"
#include "banditsim/numeric.hpp"

namespace banditsim {

DesignMatrix::DesignMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DesignMatrix DesignMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  DesignMatrix x(rows.size(), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != p) throw DomainError("DesignMatrix: ragged rows");
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rows[i][j];
  }
  return x;
}

DesignMatrix DesignMatrix::subset(std::span<const std::size_t> row_indices) const {
  DesignMatrix out(row_indices.size(), cols_);
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t i = 0; i < row_indices.size(); ++i) out(i, j) = (*this)(row_indices[i], j);
  }
  return out;
}

std::size_t LassoPath::nnz(std::size_t k) const {
  return static_cast<std::size_t>(
      std::count_if(coefs.at(k).begin(), coefs.at(k).end(), [](double v) { return v != 0.0; }));
}

namespace {

void check_inputs(const DesignMatrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw DomainError("lasso: X rows do not match length of y");
  if (x.rows() == 0) throw DomainError("lasso: no rows");
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw DomainError("lasso: responses must be 0 or 1");
  }
}

double mean_of(std::span<const double> y) { return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()); }

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

/// -(1/n) loglik for the linear predictor eta.
double mean_nll(std::span<const double> eta, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) s += log1p_exp(eta[i]) - y[i] * eta[i];
  return s / static_cast<double>(eta.size());
}

double l1(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

void linear_predictor(const DesignMatrix& x, double b0, std::span<const double> w, std::vector<double>& eta) {
  eta.assign(x.rows(), b0);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (w[j] == 0.0) continue;
    const auto col = x.column(j);
    for (std::size_t i = 0; i < x.rows(); ++i) eta[i] += col[i] * w[j];
  }
}

double intercept_only(double ybar) {
  const double clamped = std::clamp(ybar, 1e-9, 1.0 - 1e-9);
  return std::log(clamped / (1.0 - clamped));
}

/// Minimizes -(1/n) loglik + lambda ||w||_1 starting from (b0, w); updates in place.
void solve_one(const DesignMatrix& x, std::span<const double> y, double lambda, const LassoOptions& opt, double& b0,
               std::vector<double>& w) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> eta, weight(n), resid(n), cand_w(p), trial_w(p), trial_eta, xwx(p);
  std::vector<std::size_t> all_cols(p), active;
  std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});

  linear_predictor(x, b0, w, eta);
  double f_cur = mean_nll(eta, y) + lambda * l1(w);

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    // Quadratic model: weighted least squares on the working response.
    for (std::size_t i = 0; i < n; ++i) {
      const double pr = logistic(eta[i]);
      weight[i] = std::max(pr * (1.0 - pr), 1e-5);
      resid[i] = (y[i] - pr) / weight[i];  // z - eta_candidate, candidate starts at current
    }
    double cand_b0 = b0;
    cand_w = w;
    const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const auto col = x.column(j);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += weight[i] * col[i] * col[i];
      xwx[j] = s * inv_n;
    }

    // One coordinate pass over `cols` (plus the intercept); returns the largest
    // curvature-weighted squared change, xwx_j * delta_j^2.
    auto sweep = [&](const std::vector<std::size_t>& cols) {
      double max_change = 0.0;
      double shift = 0.0;
      for (std::size_t i = 0; i < n; ++i) shift += weight[i] * resid[i];
      shift /= wsum;
      if (shift != 0.0) {
        cand_b0 += shift;
        for (std::size_t i = 0; i < n; ++i) resid[i] -= shift;
        max_change = wsum * inv_n * shift * shift;
      }
      for (std::size_t j : cols) {
        if (xwx[j] <= 0.0) continue;
        const auto col = x.column(j);
        double xwr = 0.0;
        for (std::size_t i = 0; i < n; ++i) xwr += weight[i] * col[i] * resid[i];
        xwr *= inv_n;
        const double updated = soft_threshold(xwr + xwx[j] * cand_w[j], lambda) / xwx[j];
        const double delta = updated - cand_w[j];
        if (delta != 0.0) {
          for (std::size_t i = 0; i < n; ++i) resid[i] -= col[i] * delta;
          cand_w[j] = updated;
          max_change = std::max(max_change, xwx[j] * delta * delta);
        }
      }
      return max_change;
    };

    // Full passes alternate with passes over the current nonzero set until a full pass is quiet.
    int sweeps = 0;
    while (sweeps < opt.max_sweeps) {
      ++sweeps;
      if (sweep(all_cols) < opt.inner_tolerance) break;
      active.clear();
      for (std::size_t j = 0; j < p; ++j) {
        if (cand_w[j] != 0.0) active.push_back(j);
      }
      while (sweeps < opt.max_sweeps) {
        ++sweeps;
        if (sweep(active) < opt.inner_tolerance) break;
      }
    }

    // Backtracking on the true penalized objective.
    double t = 1.0;
    double trial_b0 = b0;
    double f_trial = f_cur;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial_b0 = b0 + t * (cand_b0 - b0);
      for (std::size_t j = 0; j < p; ++j) trial_w[j] = w[j] + t * (cand_w[j] - w[j]);
      linear_predictor(x, trial_b0, trial_w, trial_eta);
      f_trial = mean_nll(trial_eta, y) + lambda * l1(trial_w);
      if (f_trial <= f_cur + 1e-15 * std::abs(f_cur)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    double step = std::abs(trial_b0 - b0);
    for (std::size_t j = 0; j < p; ++j) step = std::max(step, std::abs(trial_w[j] - w[j]));
    b0 = trial_b0;
    w = trial_w;
    eta.swap(trial_eta);
    f_cur = f_trial;
    if (step < opt.tolerance) return;
  }
}

double resolve_ratio(const DesignMatrix& x, const LassoOptions& opt) {
  if (opt.lambda_min_ratio > 0.0) return opt.lambda_min_ratio;
  return x.rows() > x.cols() ? 1e-4 : 1e-2;
}

}  // namespace

double lambda_max(const DesignMatrix& x, std::span<const double> y01) {
  check_inputs(x, y01);
  const double ybar = mean_of(y01);
  double best = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto col = x.column(j);
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += col[i] * (y01[i] - ybar);
    best = std::max(best, std::abs(s));
  }
  return best / static_cast<double>(x.rows());
}

std::vector<double> lambda_grid(double lmax, int n_lambda, double lambda_min_ratio) {
  if (n_lambda < 1) throw DomainError("lambda_grid: n_lambda must be at least 1");
  if (!(lmax > 0.0)) throw DomainError("lambda_grid: lambda_max must be positive");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw DomainError("lambda_grid: lambda_min_ratio must lie in (0,1)");
  }
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  const double log_step = n_lambda > 1 ? std::log(lambda_min_ratio) / (n_lambda - 1) : 0.0;
  for (int k = 0; k < n_lambda; ++k) grid[static_cast<std::size_t>(k)] = lmax * std::exp(log_step * k);
  grid.front() = lmax;
  return grid;
}

double mean_deviance(const DesignMatrix& x, std::span<const double> y01, double intercept,
                     std::span<const double> coefs) {
  std::vector<double> eta;
  linear_predictor(x, intercept, coefs, eta);
  return 2.0 * mean_nll(eta, y01);
}

LassoPath lasso_fit_grid(const DesignMatrix& x, std::span<const double> y01, const std::vector<double>& lambdas,
                         const LassoOptions& options) {
  check_inputs(x, y01);
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    if (!(lambdas[k] < lambdas[k - 1])) throw DomainError("lasso: lambda grid must be strictly decreasing");
  }
  LassoPath path;
  path.lambdas = lambdas;
  const double ybar = mean_of(y01);
  path.degenerate = ybar == 0.0 || ybar == 1.0;
  const double lmax = lambda_max(x, y01);

  double b0 = intercept_only(ybar);
  std::vector<double> w(x.cols(), 0.0);
  for (double lambda : lambdas) {
    if (path.degenerate || lambda >= lmax) {
      // Exact solution: the null model satisfies the subgradient condition.
      b0 = intercept_only(ybar);
      std::fill(w.begin(), w.end(), 0.0);
    } else {
      solve_one(x, y01, lambda, options, b0, w);
    }
    path.intercepts.push_back(b0);
    path.coefs.push_back(w);
    path.train_deviance.push_back(mean_deviance(x, y01, b0, w));
  }
  return path;
}

LassoPath lasso_path(const DesignMatrix& x, std::span<const double> y01, const LassoOptions& options) {
  check_inputs(x, y01);
  double lmax = lambda_max(x, y01);
  // Degenerate responses have lambda_max = 0; the grid is kept only for shape.
  if (!(lmax > 0.0)) lmax = 1.0;
  return lasso_fit_grid(x, y01, lambda_grid(lmax, options.n_lambda, resolve_ratio(x, options)), options);
}

std::vector<int> stratified_folds(std::span<const double> y01, int k_folds, Rng& rng) {
  if (k_folds < 2) throw DomainError("cv: need at least 2 folds");
  if (static_cast<std::size_t>(k_folds) > y01.size()) throw DomainError("cv: more folds than rows");
  std::vector<int> fold(y01.size(), 0);
  std::size_t dealt = 0;
  for (double cls : {0.0, 1.0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y01.size(); ++i) {
      if (y01[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k_folds));
  }
  return fold;
}

CvSelection cv_select(const DesignMatrix& x, std::span<const double> y01, int k_folds, Rng& rng,
                      const LassoOptions& options) {
  CvSelection sel;
  sel.path = lasso_path(x, y01, options);
  const std::size_t n_lambda = sel.path.lambdas.size();
  if (sel.path.degenerate) {
    sel.path.cv_mean.assign(n_lambda, 0.0);
    sel.path.cv_se.assign(n_lambda, 0.0);
    sel.lambda_min = sel.lambda_1se = sel.path.lambdas.front();
    return sel;
  }

  const auto fold = stratified_folds(y01, k_folds, rng);
  std::vector<std::vector<double>> fold_dev(static_cast<std::size_t>(k_folds));
  for (int f = 0; f < k_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    std::vector<double> y_train, y_test;
    for (auto i : train) y_train.push_back(y01[i]);
    for (auto i : test) y_test.push_back(y01[i]);
    const double ybar = mean_of(y_train);
    if (ybar == 0.0 || ybar == 1.0) {
      throw DomainError("cv: a training split contains a single outcome class; cannot stratify");
    }
    const DesignMatrix x_train = x.subset(train);
    const DesignMatrix x_test = x.subset(test);
    const LassoPath fit = lasso_fit_grid(x_train, y_train, sel.path.lambdas, options);
    auto& dev = fold_dev[static_cast<std::size_t>(f)];
    for (std::size_t k = 0; k < n_lambda; ++k) {
      dev.push_back(mean_deviance(x_test, y_test, fit.intercepts[k], fit.coefs[k]));
    }
  }

  const double kf = static_cast<double>(k_folds);
  for (std::size_t k = 0; k < n_lambda; ++k) {
    double mean = 0.0;
    for (const auto& d : fold_dev) mean += d[k];
    mean /= kf;
    double var = 0.0;
    for (const auto& d : fold_dev) var += (d[k] - mean) * (d[k] - mean);
    var /= (kf - 1.0);
    sel.path.cv_mean.push_back(mean);
    sel.path.cv_se.push_back(std::sqrt(var / kf));
  }

  sel.index_min = static_cast<std::size_t>(
      std::min_element(sel.path.cv_mean.begin(), sel.path.cv_mean.end()) - sel.path.cv_mean.begin());
  const double bound = sel.path.cv_mean[sel.index_min] + sel.path.cv_se[sel.index_min];
  sel.index_1se = sel.index_min;
  for (std::size_t k = 0; k <= sel.index_min; ++k) {
    if (sel.path.cv_mean[k] <= bound) {
      sel.index_1se = k;
      break;
    }
  }
  sel.lambda_min = sel.path.lambdas[sel.index_min];
  sel.lambda_1se = sel.path.lambdas[sel.index_1se];
  const auto& w = sel.path.coefs[sel.index_1se];
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) sel.selected.push_back(j);
  }
  return sel;
}

}  // namespace banditsim
