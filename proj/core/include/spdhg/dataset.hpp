#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "spdhg/linalg.hpp"

namespace spdhg {

// Binary classification data: a sparse n x d feature matrix and labels
// in {-1, +1}.
struct Dataset {
  CsrMatrix features;
  std::vector<double> labels;

  std::int64_t n() const { return features.rows(); }
  std::int64_t dim() const { return features.cols(); }
};

void validate_dataset(const Dataset& ds);

struct SplitDataset {
  Dataset train;
  Dataset test;
  std::uint64_t split_seed = 0;
};

// Parses libsvm text: one sample per line, "label idx:val idx:val ...",
// 1-based strictly increasing indices, blank lines skipped. Two distinct raw
// labels are mapped onto {-1, +1} with the numerically smaller one becoming
// -1. The feature dimension defaults to the largest index seen; `dimension`
// may widen it (files that omit trailing zero features). Malformed input
// raises std::runtime_error naming the offending line.
Dataset parse_libsvm(std::istream& in,
                     std::optional<std::int64_t> dimension = std::nullopt);

// File variant; transparently inflates gzip when the name ends in ".gz".
Dataset load_libsvm_file(const std::string& path,
                         std::optional<std::int64_t> dimension = std::nullopt);

std::string serialize_libsvm(const Dataset& ds);

// Deterministic shuffle-split: floor(n * train_fraction) training rows.
// Throws if either part would be empty.
SplitDataset split(const Dataset& ds, double train_fraction,
                   std::uint64_t seed);

// 0.25 * max_i ||a_i||^2, the classical smoothness bound for the logistic
// loss over raw (unnormalized) rows.
double lipschitz_upper_bound(const Dataset& ds);

}  // namespace spdhg
