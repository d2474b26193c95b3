#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fairmarket/errors.hpp"
#include "fairmarket/lp.hpp"

namespace fm {

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

std::size_t numeric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-10 * s(0)) ++r;
  }
  return r;
}

// Advances `idx` (strictly increasing, values < n) to the next combination.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<std::vector<double>> enumerate_vertices(const Matrix& a, const std::vector<double>& b,
                                                    const VertexOptions& options) {
  const std::size_t m = b.size();
  const std::size_t n = a.cols();
  if (a.rows() != m) throw ModelError("constraint matrix and right-hand side disagree");
  if (n > options.max_variables) {
    throw SizeGuardError("vertex enumeration limited to " + std::to_string(options.max_variables) +
                         " variables, got " + std::to_string(n));
  }
  std::vector<std::vector<double>> out;
  if (m == 0) {
    out.emplace_back(n, 0.0);
    return out;
  }

  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd B(m);
  for (std::size_t i = 0; i < m; ++i) {
    B(static_cast<Eigen::Index>(i)) = b[i];
    for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
  }
  const std::size_t r = numeric_rank(A);
  Eigen::MatrixXd Ab(m, n + 1);
  Ab << A, B;
  if (numeric_rank(Ab) > r) return out;  // inconsistent system
  const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
  if (r == 0) {
    if (B.cwiseAbs().maxCoeff() <= options.tolerance * scale) out.emplace_back(n, 0.0);
    return out;
  }
  if (binomial(n, r) > static_cast<double>(options.max_bases)) {
    throw SizeGuardError("vertex enumeration would visit " + std::to_string(binomial(n, r)) + " bases");
  }

  auto is_new = [&](const std::vector<double>& x) {
    for (const auto& v : out) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::fabs(v[j] - x[j]));
      if (d <= options.tolerance) return false;
    }
    return true;
  };

  // Keep r independent rows so every basis is a square r x r system.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rows_qr(A.transpose());
  rows_qr.setThreshold(1e-10);
  const auto& perm = rows_qr.colsPermutation().indices();
  Eigen::MatrixXd Ar(r, n);
  Eigen::VectorXd Br(r);
  for (std::size_t k = 0; k < r; ++k) {
    Ar.row(static_cast<Eigen::Index>(k)) = A.row(perm(static_cast<Eigen::Index>(k)));
    Br(static_cast<Eigen::Index>(k)) = B(perm(static_cast<Eigen::Index>(k)));
  }

  std::vector<std::size_t> cols(r);
  for (std::size_t k = 0; k < r; ++k) cols[k] = k;
  Eigen::MatrixXd basis(r, r);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(r, r);
  lu.setThreshold(1e-10);
  Eigen::VectorXd xb(r);
  std::vector<double> x(n);
  do {
    for (std::size_t k = 0; k < r; ++k) basis.col(static_cast<Eigen::Index>(k)) = Ar.col(static_cast<Eigen::Index>(cols[k]));
    lu.compute(basis);
    if (static_cast<std::size_t>(lu.rank()) < r) continue;
    xb = lu.solve(Br);
    if (xb.minCoeff() < -options.tolerance) continue;
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k = 0; k < r; ++k) x[cols[k]] = std::max(0.0, xb(static_cast<Eigen::Index>(k)));
    // The dropped rows are implied by the kept ones; check the full system anyway.
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
    if ((A * xv - B).cwiseAbs().maxCoeff() > options.tolerance * scale) continue;
    if (is_new(x)) out.push_back(x);
  } while (next_combination(cols, n));
  return out;
}

}  // namespace fm
