// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <doctest.h>

#include "eegcrypt/data.hpp"
#include "eegcrypt/errors.hpp"
#include "support/oracles.hpp"

using namespace eegcrypt;
using namespace eegcrypt::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "eegcrypt_test_data";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

Dataset tiny() {
  Dataset ds;
  ds.features = Matrix(4, 3);
  ds.features.data = {1, 10, 5, 2, 20, 5, 3, 30, 5, 4, 41, 5};
  ds.labels = {1, 2, 3, 4};
  ds.channel_names = {"a", "b", "c"};
  return ds;
}

}  // namespace

TEST_CASE("CSV round trip preserves values exactly") {
  Dataset ds = make_blobs(200, 7, 4, 1.0, 5);
  const fs::path p = scratch("round.csv");
  write_csv(ds, p);
  const Dataset back = load_csv(p);
  CHECK(back.channel_names == ds.channel_names);
  CHECK(back.labels == ds.labels);
  CHECK(back.features == ds.features);
}

TEST_CASE("CSV errors name the row") {
  const fs::path p = scratch("bad.csv");
  write_file(p, "x,y,label\n1,2,1\n3,,2\n");
  try {
    load_csv(p);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  write_file(p, "x,y,label\n1,2,1\n3,4,7\n");
  CHECK_NOTHROW(load_csv(p));
  CHECK_THROWS_AS(load_csv(p, "label", 4), DataError);
  write_file(p, "x,y,label\n1,abc,1\n");
  CHECK_THROWS_AS(load_csv(p), DataError);
  write_file(p, "x,y,label\n1,2,0\n");
  CHECK_THROWS_AS(load_csv(p), DataError);
  write_file(p, "x,y\n1,2\n");
  CHECK_THROWS_AS(load_csv(p), DataError);
  CHECK_THROWS_AS(load_csv(scratch("missing.csv")), DataError);
}

TEST_CASE("full-size fixture: 12800 samples, 64 channels and a label") {
  const Dataset ds = make_blobs(12800, 64, 4, 0.5, 6);
  const fs::path p = scratch("full.csv");
  write_csv(ds, p);
  const Dataset back = load_csv(p, "label", 4);
  CHECK(back.size() == 12800);
  CHECK(back.channels() == 64);
  CHECK(back.max_label() == 4);
  CHECK(back.features == ds.features);
}

TEST_CASE("pearson") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 6, 8, 10}, down = {10, 8, 6, 4, 2};
  CHECK(pearson(x, up) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, down) == doctest::Approx(-1.0).epsilon(1e-15));
  // Symmetric around the mean: r = 0.
  CHECK(std::abs(pearson(std::vector<double>{-2, -1, 0, 1, 2}, std::vector<double>{4, 1, 0, 1, 4})) <
        1e-15);
  CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 3.0)), UndefinedCorrelation);
  CHECK_THROWS_AS(pearson(std::vector<double>(5, 3.0), x), UndefinedCorrelation);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), DataError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), DataError);

  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
      a[i] = nd(gen);
      b[i] = 0.3 * a[i] + nd(gen);
    }
    const double r = pearson(a, b);
    worst = std::max(worst, std::abs(r - oracles::pearson_two_pass(a, b)));

    // Invariant under positive affine maps, flips sign under negative ones.
    std::vector<double> affine(a.size()), neg(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      affine[i] = 3.5 * a[i] + 100.0;
      neg[i] = -2.0 * a[i] + 1.0;
    }
    CHECK(pearson(affine, b) == doctest::Approx(r).epsilon(1e-12));
    CHECK(pearson(neg, b) == doctest::Approx(-r).epsilon(1e-12));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("select_channels ranks by absolute correlation") {
  const Dataset ds = tiny();
  const auto [sel, ranking] = select_channels(ds, 2);
  CHECK(sel.channel_names.size() == 2);
  REQUIRE(ranking.channels.size() == 3);
  CHECK(ranking.channels[0].name == "a");  // exactly linear in the label
  CHECK(ranking.channels[1].name == "b");
  CHECK(ranking.channels[2].name == "c");  // constant: ranked last, undefined r
  CHECK_FALSE(ranking.channels[2].r.has_value());
  CHECK(*ranking.channels[0].r == doctest::Approx(1.0));
  CHECK(sel.features(3, 0) == 4.0);
  CHECK(sel.features(3, 1) == 41.0);
  CHECK_THROWS_AS(select_channels(ds, 0), UsageError);
  CHECK_THROWS_AS(select_channels(ds, 4), UsageError);
  const auto [all, r3] = select_channels(ds, 3);
  CHECK(all.channels() == 3);

  const Dataset by_name = select_by_name(ds, {"c", "a"});
  CHECK(by_name.channel_names == std::vector<std::string>{"c", "a"});
  CHECK(by_name.features(1, 1) == 2.0);
  CHECK_THROWS_AS(select_by_name(ds, {"zz"}), DataError);
}

TEST_CASE("normalize") {
  const Dataset ds = tiny();
  const auto [norm, stats] = normalize(ds);
  CHECK(stats.min == std::vector<double>{1, 10, 5});
  CHECK(stats.max == std::vector<double>{4, 41, 5});
  CHECK(norm.features(0, 0) == 0.0);
  CHECK(norm.features(3, 0) == 1.0);
  CHECK(norm.features(1, 0) == doctest::Approx(1.0 / 3.0));
  for (std::size_t r = 0; r < 4; ++r) CHECK(norm.features(r, 2) == 0.5);

  SUBCASE("stored statistics reproduce the result bit for bit") {
    const Dataset again = apply_normalization(stats, ds);
    CHECK(again.features == norm.features);
    std::vector<double> row = {ds.features(2, 0), ds.features(2, 1), ds.features(2, 2)};
    apply_normalization(stats, row);
    CHECK(row == std::vector<double>{norm.features(2, 0), norm.features(2, 1), norm.features(2, 2)});
  }
  SUBCASE("values outside the training range are clamped") {
    std::vector<double> row = {-100.0, 1000.0, 9.0};
    apply_normalization(stats, row);
    CHECK(row == std::vector<double>{0.0, 1.0, 0.5});
  }
  SUBCASE("width mismatch") {
    std::vector<double> row = {1.0};
    CHECK_THROWS_AS(apply_normalization(stats, row), DataError);
  }
}

TEST_CASE("split") {
  const Dataset ds = make_blobs(12800, 3, 4, 1.0, 8);
  const auto [train, test] = split(ds, 0.8, 99);
  CHECK(train.size() == 10240);
  CHECK(test.size() == 2560);

  const auto [train2, test2] = split(ds, 0.8, 99);
  CHECK(train2.features == train.features);
  CHECK(test2.labels == test.labels);
  const auto [train3, test3] = split(ds, 0.8, 100);
  CHECK_FALSE(train3.features == train.features);

  // The two parts partition the original rows: first features are unique here.
  std::multiset<double> original, parts;
  for (std::size_t r = 0; r < ds.size(); ++r) original.insert(ds.features(r, 0));
  for (std::size_t r = 0; r < train.size(); ++r) parts.insert(train.features(r, 0));
  for (std::size_t r = 0; r < test.size(); ++r) parts.insert(test.features(r, 0));
  CHECK(parts == original);

  CHECK_THROWS_AS(split(ds, 0.0, 1), UsageError);
  CHECK_THROWS_AS(split(ds, 1.0, 1), UsageError);
  CHECK_THROWS_AS(split(tiny(), 0.01, 1), DataError);
}

TEST_CASE("slice and blobs") {
  const Dataset ds = make_blobs(40, 5, 4, 2.0, 9);
  CHECK(ds.labels[0] == 1);
  CHECK(ds.labels[5] == 2);
  CHECK(ds.max_label() == 4);
  const Dataset s = slice(ds, 10, 5);
  CHECK(s.size() == 5);
  CHECK(s.features(0, 3) == ds.features(10, 3));
  CHECK(make_blobs(40, 5, 4, 2.0, 9).features == ds.features);
  CHECK(slice(ds, 38, 5).size() == 2);  // clamped to the available rows
}
