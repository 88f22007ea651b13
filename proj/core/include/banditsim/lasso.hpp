#pragma once

#include <span>
#include <string>
#include <vector>

#include "banditsim/rng.hpp"

namespace banditsim {

/// Dense column-major design matrix without an intercept column.
class DesignMatrix {
 public:
  DesignMatrix(std::size_t rows, std::size_t cols);
  static DesignMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  std::span<const double> column(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  /// Rows selected by index, in the given order.
  DesignMatrix subset(std::span<const std::size_t> row_indices) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct LassoOptions {
  int n_lambda = 25;
  /// Smallest lambda as a fraction of lambda_max; <= 0 picks 1e-4 when n > p, else 1e-2.
  double lambda_min_ratio = 0.0;
  double tolerance = 1e-7;       ///< outer convergence: max coefficient change
  double inner_tolerance = 1e-13;
  int max_outer = 200;
  int max_sweeps = 10000;
};

/// Penalized fits along a decreasing lambda grid. The objective at each lambda is
///   -(1/n) loglik(b0, w) + lambda * ||w||_1   (intercept b0 unpenalized).
struct LassoPath {
  std::vector<double> lambdas;
  std::vector<double> intercepts;
  std::vector<std::vector<double>> coefs;
  std::vector<double> train_deviance;  ///< mean binomial deviance per row
  std::vector<double> cv_mean;         ///< filled by cv_select
  std::vector<double> cv_se;
  bool degenerate = false;             ///< all responses identical: intercept-only path

  std::size_t nnz(std::size_t k) const;
};

/// (1/n) max_j |x_j^T (y - ybar)|: the smallest lambda with an all-zero penalized solution.
double lambda_max(const DesignMatrix& x, std::span<const double> y01);

/// Log-spaced grid from lambda_max down to lambda_max * ratio.
std::vector<double> lambda_grid(double lambda_max, int n_lambda, double lambda_min_ratio);

/// Mean binomial deviance -2/n sum [y log p + (1-y) log(1-p)] of a linear predictor.
double mean_deviance(const DesignMatrix& x, std::span<const double> y01, double intercept,
                     std::span<const double> coefs);

/// Fits the whole grid with warm starts (proximal Newton, soft-threshold coordinate descent).
LassoPath lasso_path(const DesignMatrix& x, std::span<const double> y01, const LassoOptions& options = {});
LassoPath lasso_fit_grid(const DesignMatrix& x, std::span<const double> y01, const std::vector<double>& lambdas,
                         const LassoOptions& options = {});

/// Fold id per row: each outcome class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(std::span<const double> y01, int k_folds, Rng& rng);

struct CvSelection {
  LassoPath path;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::vector<std::size_t> selected;  ///< nonzero columns at lambda_1se in the full-data fit
};

/// k-fold CV over the full-data grid; lambda_1se is the largest lambda whose mean
/// held-out deviance is within one standard error of the minimum.
CvSelection cv_select(const DesignMatrix& x, std::span<const double> y01, int k_folds, Rng& rng,
                      const LassoOptions& options = {});

}  // namespace banditsim
