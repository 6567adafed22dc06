#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fairshift {

enum class ColumnKind { Numeric, Categorical };
enum class MissingPolicy { Drop, Impute };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  /// Admissible values for a categorical column. Empty means "fit on scan";
  /// non-empty freezes the column and unknown values become load errors.
  std::vector<std::string> categories;
};

/// Membership rule for the protected group: either a categorical value match
/// or a strict numeric upper bound (value < less_than).
struct ProtectedRule {
  std::string column;
  std::optional<std::string> equals;
  std::optional<double> less_than;
};

/// Declarative description of a delimited text dataset. Parsed from a small
/// key-value config file; the grammar is documented in the README.
struct DatasetSchema {
  std::vector<ColumnSpec> columns;  // in file order
  char delimiter = ',';             // '\0' means "any whitespace run"
  std::string comment_prefix;       // data lines starting with this are skipped
  std::string missing_token;        // e.g. "?"; empty disables missing handling
  MissingPolicy missing_policy = MissingPolicy::Drop;
  std::string label_column;
  std::string positive_label;
  std::optional<std::string> negative_label;  // when set, other values are errors
  std::string label_strip_suffix;             // e.g. "." for files with dotted labels
  ProtectedRule protected_rule;
  bool protected_as_feature = true;

  static DatasetSchema parse(const std::string& text);
  static DatasetSchema load_file(const std::string& path);

  int column_index(const std::string& name) const;  // -1 when absent
  /// Throws unless there is exactly one label column and one protected rule
  /// and all referenced columns exist.
  void validate() const;
  /// True once every categorical column carries its admissible values.
  bool frozen() const;
  /// Canonical config text; parse(to_config()) reproduces the schema.
  std::string to_config() const;
};

}  // namespace fairshift
