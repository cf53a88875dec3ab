#include "vminpred/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vminpred::num {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  for (const auto& r : rows) {
    if (m.rows_ == 0) {
      m.cols_ = r.size();
    } else if (r.size() != m.cols_) {
      throw ShapeMismatch("ragged initializer rows");
    }
    m.data_.insert(m.data_.end(), r.begin(), r.end());
    ++m.rows_;
  }
  return m;
}

void Matrix::append_row(std::span<const double> row) {
  if (rows_ == 0 && cols_ == 0) {
    cols_ = row.size();
  } else if (row.size() != cols_) {
    throw ShapeMismatch("appended row has wrong width");
  }
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteValue(std::string(what) + " contains a NaN or infinite entry");
    }
  }
}

void check_finite(const Matrix& m, const char* what) {
  check_finite(std::span<const double>(m.data()), what);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw EmptyInput("mean of empty vector");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> solve_least_squares(const Matrix& a, const std::vector<double>& t) {
  const std::size_t n = a.rows();
  const std::size_t d = a.cols();
  if (d < 1) throw ShapeMismatch("solve_least_squares: matrix has no columns");
  if (t.size() != n) throw ShapeMismatch("solve_least_squares: rhs length != row count");
  if (n < d) throw ShapeMismatch("solve_least_squares: fewer rows than columns");
  check_finite(a, "design matrix");
  check_finite(t, "target vector");

  // Householder QR with column pivoting; rhs is reduced in lockstep so Q is
  // never formed. Column norms are recomputed each step (d is small here).
  Matrix r = a;
  std::vector<double> qtb = t;
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::size_t k = 0; k < d; ++k) {
    std::size_t pivot = k;
    double best = -1.0;
    for (std::size_t j = k; j < d; ++j) {
      double norm2 = 0.0;
      for (std::size_t i = k; i < n; ++i) norm2 += r(i, j) * r(i, j);
      if (norm2 > best) {
        best = norm2;
        pivot = j;
      }
    }
    if (pivot != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(r(i, k), r(i, pivot));
      std::swap(perm[k], perm[pivot]);
    }

    double normx = std::sqrt(best);
    if (normx == 0.0) {
      // remaining block is exactly zero; diagonal entry stays 0 and the
      // condition check below reports rank deficiency
      continue;
    }
    const double alpha = r(k, k) >= 0 ? -normx : normx;
    // Householder vector v = x - alpha*e1, stored below the diagonal
    std::vector<double> v(n - k);
    v[0] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i - k] = r(i, k);
    const double vtv = dot(v, v);
    r(k, k) = alpha;
    for (std::size_t i = k + 1; i < n; ++i) r(i, k) = 0.0;
    if (vtv == 0.0) continue;

    for (std::size_t j = k + 1; j < d; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < n; ++i) proj += v[i - k] * r(i, j);
      proj *= 2.0 / vtv;
      for (std::size_t i = k; i < n; ++i) r(i, j) -= proj * v[i - k];
    }
    double proj = 0.0;
    for (std::size_t i = k; i < n; ++i) proj += v[i - k] * qtb[i];
    proj *= 2.0 / vtv;
    for (std::size_t i = k; i < n; ++i) qtb[i] -= proj * v[i - k];
  }

  double dmin = std::abs(r(0, 0));
  double dmax = dmin;
  for (std::size_t k = 1; k < d; ++k) {
    dmin = std::min(dmin, std::abs(r(k, k)));
    dmax = std::max(dmax, std::abs(r(k, k)));
  }
  const double rcond = dmax == 0.0 ? 0.0 : dmin / dmax;
  if (rcond < kRankTolerance) {
    throw RankDeficient("reciprocal condition estimate " + std::to_string(rcond) +
                        " below threshold; features are collinear");
  }

  std::vector<double> z(d, 0.0);
  for (std::size_t l = d; l-- > 0;) {
    double s = qtb[l];
    for (std::size_t j = l + 1; j < d; ++j) s -= r(l, j) * z[j];
    z[l] = s / r(l, l);
  }
  std::vector<double> x(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) x[perm[k]] = z[k];
  return x;
}

Centered centralize(const Matrix& m) {
  if (m.rows() == 0) throw EmptyInput("centralize: matrix has no rows");
  check_finite(m, "centralize input");
  Centered out;
  out.mean.assign(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.mean[j] += m(i, j);
  for (double& v : out.mean) v /= static_cast<double>(m.rows());
  out.centered = Matrix(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.centered(i, j) = m(i, j) - out.mean[j];
  return out;
}

double rmse(const std::vector<double>& residuals) {
  if (residuals.empty()) throw EmptyInput("rmse of empty residual vector");
  check_finite(residuals, "residuals");
  double ss = 0.0;
  for (double r : residuals) ss += r * r;
  return std::sqrt(ss / static_cast<double>(residuals.size()));
}

double pearson(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw ShapeMismatch("pearson: length mismatch");
  if (u.size() < 2) throw ShapeMismatch("pearson: need at least 2 samples");
  check_finite(u, "pearson u");
  check_finite(v, "pearson v");
  const double mu = mean(u);
  const double mv = mean(v);
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  if (suu == 0.0 || svv == 0.0) throw ZeroVariance("pearson: constant input");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

double r_squared(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size()) throw ShapeMismatch("r_squared: length mismatch");
  if (y_true.size() < 2) throw ShapeMismatch("r_squared: need at least 2 samples");
  check_finite(y_true, "r_squared y_true");
  check_finite(y_pred, "r_squared y_pred");
  const double my = mean(y_true);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    const double dev = y_true[i] - my;
    ss_res += e * e;
    ss_tot += dev * dev;
  }
  if (ss_tot == 0.0) throw ZeroVariance("r_squared: y_true is constant");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace vminpred::num
