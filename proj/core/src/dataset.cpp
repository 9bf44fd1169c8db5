#include "spdhg/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spdhg/rng.hpp"
#include "spdhg/trace.hpp"

namespace spdhg {

namespace {

[[noreturn]] void parse_fail(std::int64_t line, const std::string& what) {
  throw std::runtime_error("libsvm parse error at line " +
                           std::to_string(line) + ": " + what);
}

bool parse_full_double(const std::string& tok, double* out) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty() || errno == ERANGE) {
    return false;
  }
  *out = v;
  return true;
}

bool parse_full_int(const std::string& tok, std::int64_t* out) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty() || errno == ERANGE) {
    return false;
  }
  *out = v;
  return true;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

Dataset subset_rows(const Dataset& ds, const std::vector<std::int64_t>& rows) {
  const auto& offsets = ds.features.row_offsets();
  const auto& cols = ds.features.col_indices();
  const auto& vals = ds.features.values();

  std::vector<std::int64_t> out_offsets(rows.size() + 1, 0);
  std::vector<std::int64_t> out_cols;
  std::vector<double> out_vals;
  std::vector<double> out_labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::int64_t r = rows[i];
    for (std::int64_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      out_cols.push_back(cols[p]);
      out_vals.push_back(vals[p]);
    }
    out_offsets[i + 1] = static_cast<std::int64_t>(out_vals.size());
    out_labels[i] = ds.labels[r];
  }
  Dataset out{CsrMatrix(static_cast<std::int64_t>(rows.size()), ds.dim(),
                        std::move(out_offsets), std::move(out_cols),
                        std::move(out_vals)),
              std::move(out_labels)};
  return out;
}

std::string read_gzip_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw std::runtime_error("cannot open gzip file: " + path);
  }
  std::string content;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) {
    content.append(buf, static_cast<std::size_t>(n));
  }
  const bool bad = n < 0;
  gzclose(f);
  if (bad) {
    throw std::runtime_error("gzip read error in: " + path);
  }
  return content;
}

}  // namespace

void validate_dataset(const Dataset& ds) {
  if (ds.n() < 1) throw std::invalid_argument("dataset: need at least one sample");
  if (ds.dim() < 1) throw std::invalid_argument("dataset: need at least one feature");
  if (static_cast<std::int64_t>(ds.labels.size()) != ds.n()) {
    throw std::invalid_argument("dataset: label count does not match rows");
  }
  for (double b : ds.labels) {
    if (b != -1.0 && b != 1.0) {
      throw std::invalid_argument("dataset: labels must be -1 or +1");
    }
  }
}

Dataset parse_libsvm(std::istream& in, std::optional<std::int64_t> dimension) {
  std::vector<Triplet> entries;
  std::vector<double> raw_labels;
  std::vector<double> distinct;
  std::int64_t max_index = 0;
  std::int64_t lineno = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;  // blank line

    double label;
    if (!parse_full_double(toks[0], &label) || !std::isfinite(label)) {
      parse_fail(lineno, "malformed label '" + toks[0] + "'");
    }
    if (std::find(distinct.begin(), distinct.end(), label) == distinct.end()) {
      distinct.push_back(label);
      if (distinct.size() > 2) {
        parse_fail(lineno, "more than two distinct labels");
      }
    }
    const std::int64_t row = static_cast<std::int64_t>(raw_labels.size());
    raw_labels.push_back(label);

    std::int64_t prev_index = 0;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const std::string& tok = toks[i];
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || tok.find(':', colon + 1) != std::string::npos) {
        parse_fail(lineno, "malformed feature token '" + tok + "'");
      }
      std::int64_t index;
      if (!parse_full_int(tok.substr(0, colon), &index) || index < 1) {
        parse_fail(lineno, "malformed feature index in '" + tok + "'");
      }
      if (index <= prev_index) {
        parse_fail(lineno, "feature indices must be strictly increasing ('" +
                               tok + "')");
      }
      double value;
      if (!parse_full_double(tok.substr(colon + 1), &value) ||
          !std::isfinite(value)) {
        parse_fail(lineno, "non-numeric feature value in '" + tok + "'");
      }
      entries.push_back({row, index - 1, value});
      prev_index = index;
      max_index = std::max(max_index, index);
    }
  }

  const std::int64_t n = static_cast<std::int64_t>(raw_labels.size());
  if (n == 0) throw std::runtime_error("libsvm parse error: no samples");

  std::int64_t dim = max_index;
  if (dimension) {
    if (*dimension < max_index) {
      throw std::invalid_argument(
          "parse_libsvm: dimension override " + std::to_string(*dimension) +
          " is below the largest index seen (" + std::to_string(max_index) + ")");
    }
    dim = *dimension;
  }
  if (dim < 1) {
    throw std::runtime_error(
        "libsvm parse error: no feature indices and no dimension override");
  }

  // Numerically smaller raw label becomes -1, the larger +1. A single-class
  // file is accepted only when it already uses -1/+1.
  std::vector<double> labels(raw_labels.size());
  if (distinct.size() == 2) {
    const double lo = std::min(distinct[0], distinct[1]);
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      labels[i] = raw_labels[i] == lo ? -1.0 : 1.0;
    }
  } else {
    if (distinct[0] != -1.0 && distinct[0] != 1.0) {
      throw std::runtime_error(
          "libsvm parse error: single label value " +
          std::to_string(distinct[0]) + " is not -1 or +1");
    }
    labels.assign(raw_labels.size(), distinct[0]);
  }

  Dataset ds{CsrMatrix::from_triplets(n, dim, std::move(entries)),
             std::move(labels)};
  validate_dataset(ds);
  return ds;
}

Dataset load_libsvm_file(const std::string& path,
                         std::optional<std::int64_t> dimension) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    std::istringstream in(read_gzip_file(path));
    return parse_libsvm(in, dimension);
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path);
  }
  return parse_libsvm(in, dimension);
}

std::string serialize_libsvm(const Dataset& ds) {
  const auto& offsets = ds.features.row_offsets();
  const auto& cols = ds.features.col_indices();
  const auto& vals = ds.features.values();
  std::string out;
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    out += ds.labels[r] > 0 ? "+1" : "-1";
    for (std::int64_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      out += ' ';
      out += std::to_string(cols[p] + 1);
      out += ':';
      out += format_double(vals[p]);
    }
    out += '\n';
  }
  return out;
}

SplitDataset split(const Dataset& ds, double train_fraction,
                   std::uint64_t seed) {
  validate_dataset(ds);
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1)");
  }
  const std::int64_t n = ds.n();
  if (n < 2) throw std::invalid_argument("split: need at least two samples");

  const std::int64_t n_train = static_cast<std::int64_t>(
      std::floor(static_cast<double>(n) * train_fraction));
  if (n_train < 1 || n_train >= n) {
    throw std::invalid_argument("split: degenerate split (" +
                                std::to_string(n_train) + "/" +
                                std::to_string(n - n_train) + ")");
  }

  std::vector<std::int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::int64_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.next_index(i + 1)]);
  }

  SplitDataset out;
  out.train = subset_rows(
      ds, std::vector<std::int64_t>(perm.begin(), perm.begin() + n_train));
  out.test = subset_rows(
      ds, std::vector<std::int64_t>(perm.begin() + n_train, perm.end()));
  out.split_seed = seed;
  return out;
}

double lipschitz_upper_bound(const Dataset& ds) {
  validate_dataset(ds);
  double max_sq = 0.0;
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    max_sq = std::max(max_sq, ds.features.row_norm_sq(r));
  }
  return 0.25 * max_sq;
}

}  // namespace spdhg
