#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "vminpred/errors.hpp"

namespace vminpred::num {

/// Dense row-major matrix of doubles. Entries must stay finite; every
/// operation in this module rejects NaN/Inf inputs.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }

  void append_row(std::span<const double> row);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Reciprocal-condition cutoff for the least-squares solver: estimates
/// below this raise RankDeficient instead of returning garbage.
inline constexpr double kRankTolerance = 1e-10;

/// Minimizes ||t - A c||_2 over c via Householder QR with column pivoting.
/// Requires n >= d >= 1. The reciprocal condition estimate min|R_kk|/max|R_kk|
/// must stay above kRankTolerance, otherwise RankDeficient is thrown.
std::vector<double> solve_least_squares(const Matrix& a, const std::vector<double>& t);

struct Centered {
  Matrix centered;           // each column has zero mean
  std::vector<double> mean;  // the removed column means
};

/// Removes column means; returns the centered matrix and the mean vector.
Centered centralize(const Matrix& m);

/// sqrt(mean of squared entries), in the unit of the residuals (volts here).
double rmse(const std::vector<double>& residuals);

/// Pearson correlation coefficient, clamped to [-1, 1] against roundoff.
double pearson(const std::vector<double>& u, const std::vector<double>& v);

/// Coefficient of determination 1 - SS_res/SS_tot. Not clamped below.
double r_squared(const std::vector<double>& y_true, const std::vector<double>& y_pred);

double dot(std::span<const double> a, std::span<const double> b);
double mean(const std::vector<double>& v);

/// Throws NonFiniteValue if any entry is NaN or infinite.
void check_finite(std::span<const double> values, const char* what);
void check_finite(const Matrix& m, const char* what);

}  // namespace vminpred::num
