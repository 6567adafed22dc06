#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairshift/common.hpp"
#include "fairshift/schema.hpp"

namespace fairshift {

enum class FeatureKind {
  Numeric,  // standardized with train-split statistics
  OneHot,   // one column of a one-hot block; left as 0/1
  Binary,   // standalone 0/1 column (e.g. the synthetic bias bit)
};

struct FeatureInfo {
  std::string name;       // "age", "workclass=Private", "bias_bit"
  FeatureKind kind = FeatureKind::Numeric;
  int source_column = -1;  // schema column index; -1 for synthetic columns
  std::string category;    // set for OneHot
};

/// Encoded dataset: numeric feature matrix, labels in {-1,+1} and the
/// protected-membership mask. Immutable after construction by convention;
/// all transformations return new instances.
struct Dataset {
  Matrix x;
  std::vector<int> labels;
  std::vector<std::uint8_t> protected_mask;
  std::vector<FeatureInfo> features;
  std::string source;

  int n() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(x.cols()); }
  long protected_count() const;
  long positive_count() const;
  /// Structural invariants: sizes agree, labels are only -1/+1.
  void check() const;
};

struct LoadStats {
  std::size_t rows_read = 0;     // data rows seen (after comment skipping)
  std::size_t rows_dropped = 0;  // removed under the Drop missing policy
  std::size_t cells_imputed = 0;
};

struct LoadResult {
  Dataset data;
  DatasetSchema fitted_schema;  // categories frozen by the scan pass
  LoadStats stats;
};

/// Two-pass load: scan fits categorical vocabularies and imputation
/// statistics, encode emits one-hot blocks and raw numeric columns.
/// Numeric standardization happens later, in split(), with train statistics.
LoadResult load_dataset(const std::vector<std::string>& paths, const DatasetSchema& schema);
LoadResult load_dataset(const std::string& path, const DatasetSchema& schema);

Dataset subset(const Dataset& ds, const std::vector<int>& rows);

/// Recovers the categorical value encoded in row `row`'s one-hot block for
/// the given schema column.
std::string decode_categorical(const Dataset& ds, const std::string& column_name, int row);

/// Columnwise affine transform fitted on a reference split. Non-numeric
/// columns get mean 0 / scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  bool identity = true;
  void apply(Matrix& x) const;
};
Standardizer fit_standardizer(const Matrix& x, const std::vector<FeatureInfo>& features);

struct SplitTriple {
  Dataset train;
  Dataset model_select;
  Dataset test;
  std::vector<int> train_idx, select_idx, test_idx;  // into the source dataset
  std::array<double, 3> ratios{};
  std::uint64_t seed = 0;
  Standardizer standardizer;  // fitted on train, applied to all three
};

/// Seeded uniform random partition; sizes are floor(r0*n), floor(r1*n) and
/// the remainder. Index sets are a pure function of (n, ratios, seed).
SplitTriple split(const Dataset& ds, const std::array<double, 3>& ratios, std::uint64_t seed,
                  bool standardize = true);

/// Result of the synthetic bias process: a fresh uniform bit per row, and
/// positive labels in the bit==0 group flipped to -1 with probability eta.
/// The returned dataset has the bit appended as a feature column and the
/// protected mask REPLACED by (bit == 0), so downstream fairness machinery
/// protects the synthetic group.
struct BiasedDataset {
  Dataset data;
  std::vector<int> original_labels;
  std::vector<std::uint8_t> bit;
  std::vector<int> flipped_rows;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

BiasedDataset inject_random_bias(const Dataset& ds, double eta, std::uint64_t seed);

}  // namespace fairshift
