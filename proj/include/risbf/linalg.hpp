#pragma once

#include <cmath>

#include "risbf/metrics.hpp"
#include "risbf/types.hpp"

namespace risbf::linalg {

/// (M + M^H) / 2
inline CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

/// log det of a Hermitian positive definite matrix via Cholesky
/// (2 * sum log diag(L)). The argument is symmetrized first.
inline double logdet_hpd(const CMat& m, Tally tally = {}) {
  tally.add(count_cubic(static_cast<std::uint64_t>(m.rows())));
  Eigen::LLT<CMat> llt(hermitian_part(m));
  if (llt.info() != Eigen::Success) throw DomainError("logdet_hpd: matrix is not positive definite");
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

inline CMat inverse_hpd(const CMat& m, Tally tally = {}) {
  tally.add(count_cubic(static_cast<std::uint64_t>(m.rows())));
  Eigen::LLT<CMat> llt(hermitian_part(m));
  if (llt.info() != Eigen::Success) throw DomainError("inverse_hpd: matrix is not positive definite");
  return llt.solve(CMat::Identity(m.rows(), m.cols()));
}

/// Solves M X = B for Hermitian positive definite M.
inline CMat solve_hpd(const CMat& m, const CMat& b, Tally tally = {}) {
  tally.add(count_cubic(static_cast<std::uint64_t>(m.rows())) +
            count_matmul(m.rows(), m.rows(), b.cols()));
  Eigen::LLT<CMat> llt(hermitian_part(m));
  if (llt.info() != Eigen::Success) throw DomainError("solve_hpd: matrix is not positive definite");
  return llt.solve(b);
}

/// Product with cost accounting.
inline CMat mul(const CMat& a, const CMat& b, Tally tally = {}) {
  tally.add(count_matmul(a.rows(), a.cols(), b.cols()));
  return a * b;
}

/// A A^H with cost accounting. Only the lower triangle is computed (m(m+1)/2
/// inner products); the result is exactly Hermitian.
inline CMat gram(const CMat& a, Tally tally = {}) {
  const Eigen::Index m = a.rows();
  tally.add(static_cast<std::uint64_t>(m) * (m + 1) / 2 * a.cols());
  CMat lower = CMat::Zero(m, m);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(a);
  return lower.selfadjointView<Eigen::Lower>();
}

}  // namespace risbf::linalg
