#include "spdhg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "spdhg/rng.hpp"

namespace spdhg {

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2_sq(const Vec& v) {
  double acc = 0.0;
  for (double e : v) acc += e * e;
  return acc;
}

double norm2(const Vec& v) { return std::sqrt(norm2_sq(v)); }

double norm1(const Vec& v) {
  double acc = 0.0;
  for (double e : v) acc += std::abs(e);
  return acc;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("axpy: length mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(const Vec& v) {
  for (double e : v) {
    if (!std::isfinite(e)) return false;
  }
  return true;
}

CsrMatrix::CsrMatrix() : rows_(0), cols_(0), row_offsets_{0} {}

CsrMatrix::CsrMatrix(std::int64_t rows, std::int64_t cols,
                     std::vector<std::int64_t> row_offsets,
                     std::vector<std::int64_t> col_indices,
                     std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void CsrMatrix::validate() const {
  if (rows_ < 0 || cols_ < 0) {
    throw std::invalid_argument("CsrMatrix: negative dimension");
  }
  if (row_offsets_.size() != static_cast<std::size_t>(rows_) + 1) {
    throw std::invalid_argument("CsrMatrix: row_offsets must have rows+1 entries");
  }
  if (row_offsets_.front() != 0) {
    throw std::invalid_argument("CsrMatrix: row_offsets must start at 0");
  }
  if (row_offsets_.back() != static_cast<std::int64_t>(values_.size()) ||
      col_indices_.size() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: offset/entry count mismatch");
  }
  for (std::int64_t r = 0; r < rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) {
      throw std::invalid_argument("CsrMatrix: row_offsets must be non-decreasing");
    }
    for (std::int64_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      if (col_indices_[p] < 0 || col_indices_[p] >= cols_) {
        throw std::invalid_argument("CsrMatrix: column index out of range");
      }
      if (p > row_offsets_[r] && col_indices_[p] <= col_indices_[p - 1]) {
        throw std::invalid_argument(
            "CsrMatrix: column indices must be strictly increasing within a row");
      }
      if (!std::isfinite(values_[p]) || values_[p] == 0.0) {
        throw std::invalid_argument("CsrMatrix: values must be finite and non-zero");
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::int64_t rows, std::int64_t cols,
                                   std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::invalid_argument("from_triplets: coordinate out of range");
    }
    if (!std::isfinite(t.value)) {
      throw std::invalid_argument("from_triplets: non-finite value");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });

  std::vector<std::int64_t> offsets(rows + 1, 0);
  std::vector<std::int64_t> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(entries.size());
  vals_out.reserve(entries.size());

  std::size_t i = 0;
  for (std::int64_t r = 0; r < rows; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      const std::int64_t c = entries[i].col;
      double v = 0.0;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
        v += entries[i].value;  // duplicates merge by addition
        ++i;
      }
      if (v != 0.0) {
        cols_out.push_back(c);
        vals_out.push_back(v);
      }
    }
    offsets[r + 1] = static_cast<std::int64_t>(vals_out.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(cols_out),
                   std::move(vals_out));
}

CsrMatrix CsrMatrix::identity(std::int64_t n) {
  std::vector<std::int64_t> offsets(n + 1);
  std::vector<std::int64_t> cols(n);
  std::vector<double> vals(n, 1.0);
  for (std::int64_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::int64_t i = 0; i < n; ++i) cols[i] = i;
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

double CsrMatrix::row_norm_sq(std::int64_t row) const {
  double acc = 0.0;
  for (std::int64_t p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
    acc += values_[p] * values_[p];
  }
  return acc;
}

double CsrMatrix::row_dot(std::int64_t row, const Vec& v) const {
  double acc = 0.0;
  for (std::int64_t p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
    acc += values_[p] * v[col_indices_[p]];
  }
  return acc;
}

Vec matvec(const CsrMatrix& m, const Vec& v) {
  if (static_cast<std::int64_t>(v.size()) != m.cols()) {
    throw std::invalid_argument(
        "matvec: vector length " + std::to_string(v.size()) +
        " does not match matrix columns " + std::to_string(m.cols()));
  }
  Vec out(m.rows());
  for (std::int64_t r = 0; r < m.rows(); ++r) out[r] = m.row_dot(r, v);
  return out;
}

Vec matvec_transpose(const CsrMatrix& m, const Vec& v) {
  if (static_cast<std::int64_t>(v.size()) != m.rows()) {
    throw std::invalid_argument(
        "matvec_transpose: vector length " + std::to_string(v.size()) +
        " does not match matrix rows " + std::to_string(m.rows()));
  }
  Vec out(m.cols(), 0.0);
  const auto& offsets = m.row_offsets();
  const auto& cols = m.col_indices();
  const auto& vals = m.values();
  for (std::int64_t r = 0; r < m.rows(); ++r) {
    const double vr = v[r];
    for (std::int64_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      out[cols[p]] += vals[p] * vr;
    }
  }
  return out;
}

double spectral_norm_sq(const CsrMatrix& m, double tol, std::int64_t max_iters,
                        std::uint64_t seed) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw std::invalid_argument("spectral_norm_sq: matrix must be non-empty");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("spectral_norm_sq: tol must be positive");
  }
  if (m.nnz() == 0) return 0.0;

  Rng rng(seed);
  Vec v(m.cols());
  double vn = 0.0;
  while (vn == 0.0) {
    for (double& e : v) e = rng.next_gaussian();
    vn = norm2(v);
  }
  for (double& e : v) e /= vn;

  double estimate = 0.0;
  double previous = -1.0;
  for (std::int64_t it = 0; it < max_iters; ++it) {
    Vec w = matvec_transpose(m, matvec(m, v));
    estimate = dot(v, w);  // Rayleigh quotient, ||v|| = 1
    const double wn = norm2(w);
    if (wn == 0.0) return 0.0;  // v landed in the null space
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
    if (previous >= 0.0 &&
        std::abs(estimate - previous) <= tol * std::max(estimate, 1e-300)) {
      return estimate;
    }
    previous = estimate;
  }
  throw SpectralNormError(
      "spectral_norm_sq: no convergence after " + std::to_string(max_iters) +
          " iterations (last estimate " + std::to_string(estimate) + ")",
      estimate);
}

}  // namespace spdhg
