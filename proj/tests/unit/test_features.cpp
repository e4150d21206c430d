#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "gbal/error.hpp"
#include "gbal/features.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace gbal;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "gbal_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FeatureMatrix, RejectsZeroNormRows) {
  EXPECT_THROW(FeatureMatrix(2, 2, {1.0, 0.0, 0.0, 0.0}), InvalidInput);
}

TEST(FeatureMatrix, RejectsNonFinite) {
  EXPECT_THROW(FeatureMatrix(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
  EXPECT_THROW(FeatureMatrix(1, 2, {1.0, std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST(FeatureMatrix, RejectsShapeMismatch) { EXPECT_THROW(FeatureMatrix(2, 2, {1.0, 2.0, 3.0}), InvalidInput); }

TEST(FeatureIo, CsvWithHeaderAndLabelColumn) {
  auto path = temp_file("with_header.csv");
  {
    std::ofstream out(path);
    out << "x,y,label\n1.5,2,0\n-3,4.25,1\n";
  }
  auto lf = read_features_csv(path, true);
  ASSERT_EQ(lf.features.n_points(), 2u);
  ASSERT_EQ(lf.features.dim(), 2u);
  EXPECT_DOUBLE_EQ(lf.features.row(1)[1], 4.25);
  ASSERT_TRUE(lf.labels);
  EXPECT_EQ(*lf.labels, (std::vector<int>{0, 1}));
}

TEST(FeatureIo, CsvRaggedRowsRejected) {
  auto path = temp_file("ragged.csv");
  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  EXPECT_THROW(read_features_csv(path), InvalidInput);
}

TEST(FeatureIo, BinaryLayoutIsBitExact) {
  auto path = temp_file("layout.bin");
  write_features_binary(path, FeatureMatrix(2, 3, {1, 2, 3, 4, 5, 6}));
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  ASSERT_EQ(bytes.size(), 4u + 4u + 8u + 8u + 6u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GBAL");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // n_points
  EXPECT_EQ(bytes[16], 3);  // dim
  // 1.0f = 0x3f800000 little-endian
  EXPECT_EQ(bytes[24], 0x00);
  EXPECT_EQ(bytes[27], 0x3f);
  EXPECT_EQ(bytes[26], 0x80);
}

TEST(FeatureIo, RoundTripsPreserveValues) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = oracle::random_features(17 + trial, 1 + trial, rng);
    auto bin = temp_file("rt.bin"), csv = temp_file("rt.csv");
    write_features_binary(bin, f);
    write_features_csv(csv, f);
    auto from_bin = read_features(bin).features;
    auto from_csv = read_features(csv).features;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      EXPECT_EQ(from_bin.values()[i], static_cast<double>(static_cast<float>(f.values()[i])));
      EXPECT_EQ(from_csv.values()[i], f.values()[i]);
    }
  }
}

TEST(FeatureIo, BinaryRejectsBadMagicAndVersion) {
  auto path = temp_file("bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "GBAX";
  }
  EXPECT_THROW(read_features_binary(path), InvalidInput);
  {
    std::ofstream out(path, std::ios::binary);
    out.write("GBAL", 4);
    std::uint32_t v = 7;
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  EXPECT_THROW(read_features_binary(path), InvalidInput);
}

TEST(FeatureIo, LabelFilesAcceptPlainAndPairs) {
  auto plain = temp_file("plain_labels.csv"), pairs = temp_file("pair_labels.csv");
  {
    std::ofstream a(plain), b(pairs);
    a << "label\n1\n0\n2\n";
    b << "id,label\n2,5\n0,3\n1,4\n";
  }
  EXPECT_EQ(read_labels_csv(plain), (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(read_labels_csv(pairs), (std::vector<int>{3, 4, 5}));
}
