#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdhg {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm2_sq(const Vec& v);
double norm1(const Vec& v);
// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);
bool all_finite(const Vec& v);

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

// Immutable CSR matrix. Within each row the column indices are strictly
// increasing and every stored value is finite and non-zero; row_offsets has
// length rows+1, starts at 0 and is non-decreasing. The constructor rejects
// anything else.
class CsrMatrix {
 public:
  CsrMatrix();
  CsrMatrix(std::int64_t rows, std::int64_t cols,
            std::vector<std::int64_t> row_offsets,
            std::vector<std::int64_t> col_indices,
            std::vector<double> values);

  // Builds from coordinate triplets; duplicate coordinates are merged by
  // addition and entries that cancel to exactly zero are dropped.
  static CsrMatrix from_triplets(std::int64_t rows, std::int64_t cols,
                                 std::vector<Triplet> entries);
  static CsrMatrix identity(std::int64_t n);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<std::int64_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::int64_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  double row_norm_sq(std::int64_t row) const;
  // Dot product of one row with a dense vector, sequential within the row.
  double row_dot(std::int64_t row, const Vec& v) const;

 private:
  void validate() const;

  std::int64_t rows_;
  std::int64_t cols_;
  std::vector<std::int64_t> row_offsets_;
  std::vector<std::int64_t> col_indices_;
  std::vector<double> values_;
};

// result_i = sum_j m[i,j] v_j; summation is sequential left-to-right within
// each row so repeated runs are bit-identical.
Vec matvec(const CsrMatrix& m, const Vec& v);

// result = m^T v, accumulated row by row in storage order.
Vec matvec_transpose(const CsrMatrix& m, const Vec& v);

// Thrown when power iteration runs out of budget; carries the last estimate.
class SpectralNormError : public std::runtime_error {
 public:
  SpectralNormError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

// Largest eigenvalue of m^T m by power iteration, i.e. the squared spectral
// norm of m. Converged when successive Rayleigh quotients differ relatively
// by less than tol. Deterministic for a given seed.
double spectral_norm_sq(const CsrMatrix& m, double tol, std::int64_t max_iters,
                        std::uint64_t seed);

}  // namespace spdhg
