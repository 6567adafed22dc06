#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fairshift/dataset.hpp"
#include "fairshift/metrics.hpp"
#include "fairshift/report.hpp"
#include "fairshift/rng.hpp"
#include "test_util.hpp"

using namespace fairshift;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  write_text_file(path, content);
  return path;
}

const std::string kToySchema =
    "delimiter = comma\n"
    "label_column = y\n"
    "positive_label = yes\n"
    "negative_label = no\n"
    "protected_column = g\n"
    "protected_value = B\n"
    "column = v numeric\n"
    "column = c categorical\n"
    "column = g categorical\n"
    "column = y categorical\n";

}  // namespace

TEST_CASE("schema: parse, validate, round-trip") {
  const auto schema = DatasetSchema::parse(kToySchema);
  CHECK(schema.delimiter == ',');
  CHECK(schema.columns.size() == 4);
  CHECK(schema.columns[1].kind == ColumnKind::Categorical);
  CHECK(schema.label_column == "y");
  CHECK(schema.protected_rule.equals.value() == "B");
  CHECK_FALSE(schema.frozen());

  const auto again = DatasetSchema::parse(schema.to_config());
  CHECK(again.to_config() == schema.to_config());

  CHECK_THROWS_AS(DatasetSchema::parse("column = a numeric\n"), Error);  // no label
  CHECK_THROWS_AS(DatasetSchema::parse(kToySchema + "protected_less_than = 3\n"), Error);
}

TEST_CASE("load_dataset: one-hot encoding matches the hand encoding") {
  // 4 rows, one categorical column with 3 values; block built by hand.
  const auto path = write_temp("fairshift_toy.csv",
                               "1.5,red,A,yes\n"
                               "2.0,green,B,no\n"
                               "0.5,blue,B,yes\n"
                               "1.0,red,A,no\n");
  const auto loaded = load_dataset(path, DatasetSchema::parse(kToySchema));
  const Dataset& ds = loaded.data;
  CHECK(ds.n() == 4);
  // v + (red,green,blue) + (A,B) = 6 encoded columns.
  CHECK(ds.dim() == 6);
  const Matrix expected = [] {
    Matrix m(4, 6);
    m << 1.5, 1, 0, 0, 1, 0,
         2.0, 0, 1, 0, 0, 1,
         0.5, 0, 0, 1, 0, 1,
         1.0, 1, 0, 0, 1, 0;
    return m;
  }();
  CHECK((ds.x - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ds.labels == std::vector<int>{+1, -1, +1, -1});
  CHECK(ds.protected_mask == std::vector<std::uint8_t>{0, 1, 1, 0});

  // Encoding round-trip on every row and categorical column.
  for (int r = 0; r < 4; ++r) {
    const auto c = decode_categorical(ds, "c", r);
    const auto g = decode_categorical(ds, "g", r);
    CHECK((c == "red" || c == "green" || c == "blue"));
    CHECK((g == "A" || g == "B"));
  }
  CHECK(decode_categorical(ds, "c", 2) == "blue");
  CHECK(loaded.fitted_schema.frozen());
}

TEST_CASE("load_dataset: error paths") {
  const auto empty = write_temp("fairshift_empty.csv", "");
  CHECK_THROWS_WITH_AS(load_dataset(empty, DatasetSchema::parse(kToySchema)),
                       doctest::Contains("empty file"), Error);

  // Frozen schema rejects unknown categorical values.
  auto frozen = DatasetSchema::parse(kToySchema + "categories = c red green\ncategories = g A B\n");
  const auto bad = write_temp("fairshift_unknown.csv", "1.0,blue,A,yes\n1,red,B,no\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad, frozen), doctest::Contains("unknown categorical"), Error);

  // Label outside {positive, negative}.
  const auto badlabel = write_temp("fairshift_badlabel.csv", "1.0,red,A,maybe\n1,red,B,no\n");
  CHECK_THROWS_AS(load_dataset(badlabel, DatasetSchema::parse(kToySchema)), Error);
}

TEST_CASE("load_dataset: missing-value policies") {
  const std::string schema_text = kToySchema + "missing_token = ?\n";
  const auto path = write_temp("fairshift_missing.csv",
                               "1.0,red,A,yes\n"
                               "?,red,B,no\n"
                               "3.0,?,B,yes\n"
                               "5.0,green,A,no\n");
  auto drop_schema = DatasetSchema::parse(schema_text + "missing_policy = drop\n");
  const auto dropped = load_dataset(path, drop_schema);
  CHECK(dropped.data.n() == 2);
  CHECK(dropped.stats.rows_dropped == 2);

  auto impute_schema = DatasetSchema::parse(schema_text + "missing_policy = impute\n");
  const auto imputed = load_dataset(path, impute_schema);
  CHECK(imputed.data.n() == 4);
  CHECK(imputed.stats.cells_imputed == 2);
  // Numeric mean of observed v = (1+3+5)/3 = 3; categorical mode of c = red.
  CHECK(imputed.data.x(1, 0) == doctest::Approx(3.0));
  CHECK(decode_categorical(imputed.data, "c", 2) == "red");
}

TEST_CASE("load_dataset: whitespace delimiter and numeric protected rule") {
  // Credit-file shape: coded tokens, space separated, protected = age < 25.
  const std::string schema_text =
      "delimiter = whitespace\n"
      "label_column = risk\n"
      "positive_label = 1\n"
      "negative_label = 2\n"
      "protected_column = age\n"
      "protected_less_than = 25\n"
      "column = status categorical\n"
      "column = duration numeric\n"
      "column = age numeric\n"
      "column = risk categorical\n";
  const auto path = write_temp("fairshift_credit.txt",
                               "A11 6 67 1\n"
                               "A12 48 22 2\n"
                               "A14 12 24 1\n"
                               "A11 42 25 2\n");
  const auto loaded = load_dataset(path, DatasetSchema::parse(schema_text));
  CHECK(loaded.data.n() == 4);
  CHECK(loaded.data.labels == std::vector<int>{+1, -1, +1, -1});
  // Strictly-below threshold: ages 22 and 24 are protected, 25 is not.
  CHECK(loaded.data.protected_mask == std::vector<std::uint8_t>{0, 1, 1, 0});

  // A label token outside {1, 2} is rejected.
  const auto bad = write_temp("fairshift_credit_bad.txt", "A11 6 30 3\nA11 6 31 1\n");
  CHECK_THROWS_AS(load_dataset(bad, DatasetSchema::parse(schema_text)), Error);
}

TEST_CASE("load_dataset: comment prefix and label suffix stripping") {
  const std::string schema_text =
      "delimiter = comma\n"
      "comment_prefix = |\n"
      "label_strip_suffix = .\n"
      "label_column = y\n"
      "positive_label = yes\n"
      "negative_label = no\n"
      "protected_column = g\n"
      "protected_value = B\n"
      "column = v numeric\n"
      "column = g categorical\n"
      "column = y categorical\n";
  const auto path = write_temp("fairshift_suffix.csv",
                               "|header chatter to skip\n"
                               "1.0, A, yes.\n"
                               "2.0, B, no.\n"
                               "3.0, B, yes\n");
  const auto loaded = load_dataset(path, DatasetSchema::parse(schema_text));
  CHECK(loaded.data.n() == 3);
  CHECK(loaded.stats.rows_read == 3);
  CHECK(loaded.data.labels == std::vector<int>{+1, -1, +1});
}

TEST_CASE("split: exact sizes, determinism, empties") {
  Rng rng(7);
  const auto ds = testutil::random_dataset(rng, 100, 3);

  const auto t = split(ds, {0.5, 0.25, 0.25}, 7, false);
  CHECK(t.train.n() == 50);
  CHECK(t.model_select.n() == 25);
  CHECK(t.test.n() == 25);

  const auto t2 = split(ds, {0.5, 0.25, 0.25}, 7, false);
  CHECK(t.train_idx == t2.train_idx);
  CHECK(t.select_idx == t2.select_idx);
  CHECK(t.test_idx == t2.test_idx);

  // Disjoint and exhaustive.
  std::vector<int> all;
  all.insert(all.end(), t.train_idx.begin(), t.train_idx.end());
  all.insert(all.end(), t.select_idx.begin(), t.select_idx.end());
  all.insert(all.end(), t.test_idx.begin(), t.test_idx.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 100; ++i) CHECK(all[i] == i);

  const auto t3 = split(ds, {0.5, 0.25, 0.25}, 8, false);
  CHECK(t.train_idx != t3.train_idx);

  Rng rng2(9);
  const auto tiny = testutil::random_dataset(rng2, 10, 2);
  CHECK_THROWS_WITH_AS(split(tiny, {0.98, 0.01, 0.01}, 1, false), doctest::Contains("empty"),
                       Error);
  CHECK_THROWS_AS(split(ds, {0.5, 0.3, 0.3}, 1, false), Error);
}

TEST_CASE("split: train-split standardization statistics") {
  Rng rng(21);
  const auto ds = testutil::random_dataset(rng, 400, 4);
  const auto t = split(ds, {0.5, 0.25, 0.25}, 3);
  for (long c = 0; c < t.train.x.cols(); ++c) {
    if (t.train.features[c].kind != FeatureKind::Numeric) continue;
    const double mean = t.train.x.col(c).mean();
    const double var =
        (t.train.x.col(c).array() - mean).square().sum() / double(t.train.n() - 1);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
  // Same transform applied to the other splits (not refitted there).
  CHECK(t.standardizer.mean.size() == t.train.x.cols());
}

TEST_CASE("inject_random_bias: rule cases and rate") {
  Rng rng(3);
  const auto ds = testutil::random_dataset(rng, 300, 2);

  SUBCASE("eta 0 keeps every label") {
    const auto b = inject_random_bias(ds, 0.0, 11);
    CHECK(b.flipped_rows.empty());
    CHECK(b.data.labels == ds.labels);
    CHECK(b.data.dim() == ds.dim() + 1);
    CHECK(b.data.features.back().name == "bias_bit");
  }

  SUBCASE("deterministic given the seed") {
    const auto b1 = inject_random_bias(ds, 0.3, 42);
    const auto b2 = inject_random_bias(ds, 0.3, 42);
    CHECK(b1.bit == b2.bit);
    CHECK(b1.flipped_rows == b2.flipped_rows);
    CHECK(b1.data.labels == b2.data.labels);
    const auto b3 = inject_random_bias(ds, 0.3, 43);
    CHECK(b1.bit != b3.bit);
  }

  SUBCASE("flips only bit=0 positives, never the reverse") {
    const auto b = inject_random_bias(ds, 0.4, 5);
    for (int i = 0; i < ds.n(); ++i) {
      if (b.data.labels[i] != ds.labels[i]) {
        CHECK(b.bit[i] == 0);
        CHECK(ds.labels[i] == +1);
        CHECK(b.data.labels[i] == -1);
      }
      if (b.bit[i] == 1) CHECK(b.data.labels[i] == ds.labels[i]);
      CHECK(b.data.protected_mask[i] == (b.bit[i] == 0 ? 1 : 0));
      CHECK(b.data.x(i, ds.dim()) == double(b.bit[i]));
    }
    for (int row : b.flipped_rows) {
      CHECK(b.bit[row] == 0);
      CHECK(ds.labels[row] == +1);
    }
  }

  SUBCASE("empirical flip rate on an all-positive population") {
    const int n = 100000;
    std::vector<std::vector<double>> rows(n, {0.0});
    std::vector<int> labels(n, +1);
    std::vector<std::uint8_t> mask(n, 0);
    const auto all_pos = testutil::make_dataset(rows, labels, mask);
    const auto b = inject_random_bias(all_pos, 0.2, 123);
    long zero_bits = std::count(b.bit.begin(), b.bit.end(), std::uint8_t{0});
    const double rate = double(b.flipped_rows.size()) / double(zero_bits);
    CHECK(rate == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +- 0.01
    CHECK(std::abs(rate - 0.2) < 0.01);
  }

  SUBCASE("bit independent of the label") {
    Rng big_rng(17);
    const auto big = testutil::random_dataset(big_rng, 50000, 2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto b = inject_random_bias(big, 0.0, seed);
      double mean_b = 0.0, mean_l = 0.0;
      for (int i = 0; i < big.n(); ++i) {
        mean_b += b.bit[i];
        mean_l += big.labels[i];
      }
      mean_b /= big.n();
      mean_l /= big.n();
      double cov = 0.0, var_b = 0.0, var_l = 0.0;
      for (int i = 0; i < big.n(); ++i) {
        cov += (b.bit[i] - mean_b) * (big.labels[i] - mean_l);
        var_b += (b.bit[i] - mean_b) * (b.bit[i] - mean_b);
        var_l += (big.labels[i] - mean_l) * (big.labels[i] - mean_l);
      }
      const double corr = cov / std::sqrt(var_b * var_l);
      CHECK(std::abs(corr) < 0.02);
    }
  }

  CHECK_THROWS_AS(inject_random_bias(ds, 0.5, 1), Error);
  CHECK_THROWS_AS(inject_random_bias(ds, -0.1, 1), Error);
}

TEST_CASE("rng: derivation and bounded draws") {
  CHECK(derive_seed(1, Stream::Trial, 0) != derive_seed(1, Stream::Trial, 1));
  CHECK(derive_seed(1, Stream::Trial, 0) != derive_seed(2, Stream::Trial, 0));
  CHECK(derive_seed(1, Stream::Trial, 0) != derive_seed(1, Stream::Split, 0));
  CHECK(derive_seed(1, Stream::Trial, 3) == derive_seed(1, Stream::Trial, 3));

  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
}
