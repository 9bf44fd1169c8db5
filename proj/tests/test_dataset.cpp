#include "spdhg/dataset.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdhg/rng.hpp"
#include "support/synth.hpp"

namespace spdhg {
namespace {

Dataset parse(const std::string& text,
              std::optional<std::int64_t> dim = std::nullopt) {
  std::istringstream in(text);
  return parse_libsvm(in, dim);
}

TEST(ParseLibsvm, BasicFile) {
  const Dataset ds = parse("+1 1:0.5 3:-2\n-1 2:1\n");
  EXPECT_EQ(ds.n(), 2);
  EXPECT_EQ(ds.dim(), 3);
  EXPECT_EQ(ds.labels, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(matvec(ds.features, {1.0, 1.0, 1.0}), Vec({-1.5, 1.0}));
}

TEST(ParseLibsvm, LabelMapping) {
  const Dataset zero_one = parse("0 1:1\n1 1:2\n");
  EXPECT_EQ(zero_one.labels, (std::vector<double>{-1.0, 1.0}));

  const Dataset one_two = parse("2 1:1\n1 1:2\n");
  EXPECT_EQ(one_two.labels, (std::vector<double>{1.0, -1.0}));

  // single-class files are only accepted with native -1/+1 labels
  EXPECT_EQ(parse("+1 1:1\n").labels, (std::vector<double>{1.0}));
  EXPECT_THROW(parse("0 1:1\n"), std::runtime_error);
}

TEST(ParseLibsvm, BlankLinesAndDimensionOverride) {
  const Dataset ds = parse("\n+1 1:1\n\n-1 2:1\n", 10);
  EXPECT_EQ(ds.n(), 2);
  EXPECT_EQ(ds.dim(), 10);
  EXPECT_THROW(parse("+1 5:1\n-1 1:1\n", 3), std::invalid_argument);
}

TEST(ParseLibsvm, ErrorsNameTheLine) {
  const std::pair<const char*, const char*> cases[] = {
      {"+1 1:1\n-1 1:oops\n", "line 2"},
      {"+1 3:1 2:1\n", "line 1"},
      {"+1 1:1\nbad 1:1\nx\n", "line 2"},
      {"+1 nocolon\n", "line 1"},
      {"0 1:1\n1 1:1\n2 1:1\n", "line 3"},
      {"+1 0:1\n", "line 1"},
  };
  for (const auto& [text, expect] : cases) {
    try {
      parse(text);
      FAIL() << "expected parse error for: " << text;
    } catch (const std::runtime_error& e) {
      EXPECT_NE(std::string(e.what()).find(expect), std::string::npos)
          << e.what();
    }
  }
}

TEST(ParseLibsvm, SpliceShapedFile) {
  const Dataset ds = parse(synth::make_splice_like_text(9));
  EXPECT_EQ(ds.n(), 1000);
  EXPECT_EQ(ds.dim(), 60);
}

TEST(ParseLibsvm, RoundTrip) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset ds = synth::make_dataset(5 + trial, 4, 100 + trial);
    const Dataset back = parse(serialize_libsvm(ds));
    EXPECT_EQ(back.labels, ds.labels);
    EXPECT_EQ(back.features.row_offsets(), ds.features.row_offsets());
    EXPECT_EQ(back.features.col_indices(), ds.features.col_indices());
    EXPECT_EQ(back.features.values(), ds.features.values());
  }
}

TEST(LoadLibsvmFile, GzipInput) {
  const std::string text = "+1 1:0.5\n-1 2:1\n";
  const std::string path = ::testing::TempDir() + "tiny.libsvm.gz";
  gzFile f = gzopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);

  const Dataset ds = load_libsvm_file(path);
  EXPECT_EQ(ds.n(), 2);
  EXPECT_EQ(ds.dim(), 2);
  std::remove(path.c_str());
}

TEST(LoadLibsvmFile, MissingFileNamesPath) {
  try {
    load_libsvm_file("/nonexistent/nope.libsvm");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/nope.libsvm"),
              std::string::npos);
  }
}

TEST(Split, FloorArithmeticAndDeterminism) {
  const Dataset ds = synth::make_dataset(10, 3, 5);
  const SplitDataset sp = split(ds, 0.8, 77);
  EXPECT_EQ(sp.train.n(), 8);
  EXPECT_EQ(sp.test.n(), 2);
  EXPECT_EQ(sp.train.dim(), sp.test.dim());

  const SplitDataset again = split(ds, 0.8, 77);
  EXPECT_EQ(again.train.labels, sp.train.labels);
  EXPECT_EQ(again.train.features.values(), sp.train.features.values());

  const Dataset two = synth::make_dataset(2, 3, 6);
  const SplitDataset half = split(two, 0.5, 1);
  EXPECT_EQ(half.train.n(), 1);
  EXPECT_EQ(half.test.n(), 1);

  EXPECT_THROW(split(two, 0.1, 1), std::invalid_argument);  // empty train
}

// train + test rows form a permutation of the input rows.
TEST(Split, IsAPartition) {
  const Dataset ds = synth::make_dataset(23, 4, 8);
  const SplitDataset sp = split(ds, 0.7, 3);
  ASSERT_EQ(sp.train.n() + sp.test.n(), ds.n());

  auto row_signature = [](const Dataset& d, std::int64_t r) {
    std::string sig = std::to_string(d.labels[r]);
    for (std::int64_t p = d.features.row_offsets()[r];
         p < d.features.row_offsets()[r + 1]; ++p) {
      sig += "|" + std::to_string(d.features.col_indices()[p]) + ":" +
             std::to_string(d.features.values()[p]);
    }
    return sig;
  };
  std::vector<std::string> original, recombined;
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    original.push_back(row_signature(ds, r));
  }
  for (std::int64_t r = 0; r < sp.train.n(); ++r) {
    recombined.push_back(row_signature(sp.train, r));
  }
  for (std::int64_t r = 0; r < sp.test.n(); ++r) {
    recombined.push_back(row_signature(sp.test, r));
  }
  std::sort(original.begin(), original.end());
  std::sort(recombined.begin(), recombined.end());
  EXPECT_EQ(original, recombined);
}

TEST(LipschitzUpperBound, FixedAndOracle) {
  const Dataset fixed = parse("+1 1:1 2:1\n-1 1:2\n");
  EXPECT_EQ(lipschitz_upper_bound(fixed), 1.0);  // 0.25 * max(2, 4)

  // a single all-zero row has zero norm
  const Dataset zero{CsrMatrix::from_triplets(1, 2, {}), {1.0}};
  EXPECT_EQ(lipschitz_upper_bound(zero), 0.0);

  const Dataset ds = synth::make_dataset(5, 3, 17);
  double max_sq = 0.0;
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    double acc = 0.0;
    for (std::int64_t p = ds.features.row_offsets()[r];
         p < ds.features.row_offsets()[r + 1]; ++p) {
      acc += ds.features.values()[p] * ds.features.values()[p];
    }
    max_sq = std::max(max_sq, acc);
  }
  EXPECT_DOUBLE_EQ(lipschitz_upper_bound(ds), 0.25 * max_sq);
}

TEST(LipschitzUpperBound, RowPermutationInvariant) {
  const Dataset ds = synth::make_dataset(12, 4, 21);
  const SplitDataset sp = split(ds, 0.5, 9);  // shuffled halves
  double full = lipschitz_upper_bound(ds);
  double parts = std::max(lipschitz_upper_bound(sp.train),
                          lipschitz_upper_bound(sp.test));
  EXPECT_DOUBLE_EQ(full, parts);
}

}  // namespace
}  // namespace spdhg
