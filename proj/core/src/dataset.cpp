#include "fairshift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fairshift/rng.hpp"

namespace fairshift {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  if (delimiter == '\0') {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) cells.push_back(tok);
    return cells;
  }
  std::string cur;
  for (char c : line) {
    if (c == delimiter) {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

struct RawRow {
  std::vector<std::string> cells;
};

struct ColumnScan {
  std::vector<std::string> categories;          // fitted or frozen, in first-seen order
  std::map<std::string, int> category_index;
  double numeric_sum = 0.0;
  std::size_t numeric_count = 0;
  std::map<std::string, std::size_t> value_counts;  // for mode imputation
  double mean() const { return numeric_count ? numeric_sum / double(numeric_count) : 0.0; }
  std::string mode() const {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [v, c] : value_counts) {
      if (c > best_count) {
        best = v;
        best_count = c;
      }
    }
    return best;
  }
};

double parse_numeric(const std::string& cell, const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("numeric column '" + column + "': cannot parse value '" + cell + "'");
  }
}

}  // namespace

long Dataset::protected_count() const {
  return std::count(protected_mask.begin(), protected_mask.end(), std::uint8_t{1});
}

long Dataset::positive_count() const { return std::count(labels.begin(), labels.end(), +1); }

void Dataset::check() const {
  if (static_cast<int>(labels.size()) != x.rows() ||
      protected_mask.size() != labels.size() ||
      static_cast<int>(features.size()) != x.cols()) {
    throw Error("dataset: size mismatch between matrix, labels, mask and feature info");
  }
  for (int v : labels) {
    if (v != -1 && v != +1) throw Error("dataset: label outside {-1,+1}");
  }
}

LoadResult load_dataset(const std::string& path, const DatasetSchema& schema) {
  return load_dataset(std::vector<std::string>{path}, schema);
}

LoadResult load_dataset(const std::vector<std::string>& paths, const DatasetSchema& schema) {
  schema.validate();
  const std::size_t ncols = schema.columns.size();
  const int label_idx = schema.column_index(schema.label_column);
  const int prot_idx = schema.column_index(schema.protected_rule.column);

  // Pass 1: read rows, fit vocabularies and imputation statistics.
  std::vector<RawRow> rows;
  LoadStats stats;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file: " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (!schema.comment_prefix.empty() && line.rfind(schema.comment_prefix, 0) == 0) continue;
      if (trim(line).empty()) continue;
      auto cells = split_line(line, schema.delimiter);
      if (cells.size() != ncols) {
        throw Error(path + ": expected " + std::to_string(ncols) + " columns, got " +
                    std::to_string(cells.size()) + " in line: " + line.substr(0, 80));
      }
      ++stats.rows_read;
      rows.push_back(RawRow{std::move(cells)});
    }
  }
  if (rows.empty()) throw Error("empty file: no data rows in " + paths.front());

  std::vector<ColumnScan> scans(ncols);
  const bool frozen = schema.frozen();
  for (std::size_t c = 0; c < ncols; ++c) {
    scans[c].categories = schema.columns[c].categories;
    for (std::size_t k = 0; k < scans[c].categories.size(); ++k) {
      scans[c].category_index[scans[c].categories[k]] = static_cast<int>(k);
    }
  }

  auto is_missing = [&](const std::string& cell) {
    return !schema.missing_token.empty() && cell == schema.missing_token;
  };

  for (const auto& row : rows) {
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string& cell = row.cells[c];
      if (is_missing(cell) || static_cast<int>(c) == label_idx) continue;
      if (schema.columns[c].kind == ColumnKind::Numeric) {
        scans[c].numeric_sum += parse_numeric(cell, schema.columns[c].name);
        ++scans[c].numeric_count;
      } else {
        ++scans[c].value_counts[cell];
        if (!scans[c].category_index.count(cell)) {
          if (frozen && !schema.columns[c].categories.empty()) {
            throw Error("column '" + schema.columns[c].name + "': unknown categorical value '" +
                        cell + "' (schema is frozen)");
          }
          scans[c].category_index[cell] = static_cast<int>(scans[c].categories.size());
          scans[c].categories.push_back(cell);
        }
      }
    }
  }

  // Feature layout.
  std::vector<FeatureInfo> features;
  std::vector<int> feature_offset(ncols, -1);
  for (std::size_t c = 0; c < ncols; ++c) {
    if (static_cast<int>(c) == label_idx) continue;
    if (static_cast<int>(c) == prot_idx && !schema.protected_as_feature) continue;
    feature_offset[c] = static_cast<int>(features.size());
    if (schema.columns[c].kind == ColumnKind::Numeric) {
      features.push_back({schema.columns[c].name, FeatureKind::Numeric, static_cast<int>(c), ""});
    } else {
      for (const auto& v : scans[c].categories) {
        features.push_back(
            {schema.columns[c].name + "=" + v, FeatureKind::OneHot, static_cast<int>(c), v});
      }
    }
  }

  auto parse_label = [&](std::string cell) -> int {
    if (!schema.label_strip_suffix.empty() && cell.size() >= schema.label_strip_suffix.size() &&
        cell.compare(cell.size() - schema.label_strip_suffix.size(),
                     schema.label_strip_suffix.size(), schema.label_strip_suffix) == 0) {
      cell.erase(cell.size() - schema.label_strip_suffix.size());
    }
    if (cell == schema.positive_label) return +1;
    if (schema.negative_label && cell != *schema.negative_label) {
      throw Error("label value '" + cell + "' is neither '" + schema.positive_label + "' nor '" +
                  *schema.negative_label + "'");
    }
    return -1;
  };

  // Pass 2: encode.
  const std::size_t dim = features.size();
  std::vector<std::vector<double>> encoded;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
  encoded.reserve(rows.size());

  for (const auto& row : rows) {
    // A missing label or protected cell always drops the row; imputing the
    // target or the group membership would be meaningless.
    bool drop = false;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (!is_missing(row.cells[c])) continue;
      if (static_cast<int>(c) == label_idx || static_cast<int>(c) == prot_idx ||
          schema.missing_policy == MissingPolicy::Drop) {
        drop = true;
      }
    }
    if (drop) {
      ++stats.rows_dropped;
      continue;
    }

    std::vector<double> feat(dim, 0.0);
    for (std::size_t c = 0; c < ncols; ++c) {
      if (feature_offset[c] < 0 && static_cast<int>(c) != prot_idx) continue;
      std::string cell = row.cells[c];
      if (is_missing(cell)) {
        ++stats.cells_imputed;
        if (schema.columns[c].kind == ColumnKind::Numeric) {
          if (feature_offset[c] >= 0) feat[feature_offset[c]] = scans[c].mean();
          continue;
        }
        cell = scans[c].mode();
      }
      if (feature_offset[c] >= 0) {
        if (schema.columns[c].kind == ColumnKind::Numeric) {
          feat[feature_offset[c]] = parse_numeric(cell, schema.columns[c].name);
        } else {
          feat[feature_offset[c] + scans[c].category_index.at(cell)] = 1.0;
        }
      }
    }

    labels.push_back(parse_label(row.cells[label_idx]));
    const std::string& pcell = row.cells[prot_idx];
    bool is_protected;
    if (schema.protected_rule.equals) {
      is_protected = (pcell == *schema.protected_rule.equals);
    } else {
      is_protected = parse_numeric(pcell, schema.protected_rule.column) < *schema.protected_rule.less_than;
    }
    mask.push_back(is_protected ? 1 : 0);
    encoded.push_back(std::move(feat));
  }

  if (encoded.empty()) throw Error("empty file: every row was dropped from " + paths.front());

  Dataset ds;
  ds.x.resize(static_cast<long>(encoded.size()), static_cast<long>(dim));
  for (std::size_t r = 0; r < encoded.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) ds.x(static_cast<long>(r), static_cast<long>(c)) = encoded[r][c];
  }
  ds.labels = std::move(labels);
  ds.protected_mask = std::move(mask);
  ds.features = std::move(features);
  ds.source = paths.front() + (paths.size() > 1 ? " (+" + std::to_string(paths.size() - 1) + ")" : "");
  ds.check();

  LoadResult result;
  result.data = std::move(ds);
  result.fitted_schema = schema;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (schema.columns[c].kind == ColumnKind::Categorical && static_cast<int>(c) != label_idx) {
      result.fitted_schema.columns[c].categories = scans[c].categories;
    }
  }
  result.stats = stats;
  return result;
}

Dataset subset(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.x.resize(static_cast<long>(rows.size()), ds.x.cols());
  out.labels.reserve(rows.size());
  out.protected_mask.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<long>(i)) = ds.x.row(rows[i]);
    out.labels.push_back(ds.labels[rows[i]]);
    out.protected_mask.push_back(ds.protected_mask[rows[i]]);
  }
  out.features = ds.features;
  out.source = ds.source;
  return out;
}

std::string decode_categorical(const Dataset& ds, const std::string& column_name, int row) {
  for (std::size_t c = 0; c < ds.features.size(); ++c) {
    const auto& f = ds.features[c];
    if (f.kind == FeatureKind::OneHot && f.name.rfind(column_name + "=", 0) == 0 &&
        ds.x(row, static_cast<long>(c)) == 1.0) {
      return f.category;
    }
  }
  throw Error("decode_categorical: no active one-hot column for '" + column_name + "' in row " +
              std::to_string(row));
}

void Standardizer::apply(Matrix& x) const {
  if (identity) return;
  x.rowwise() -= mean.transpose();
  x.array().rowwise() /= scale.transpose().array();
}

Standardizer fit_standardizer(const Matrix& x, const std::vector<FeatureInfo>& features) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(x.cols());
  s.scale = Eigen::VectorXd::Ones(x.cols());
  s.identity = false;
  const double n = static_cast<double>(x.rows());
  for (long c = 0; c < x.cols(); ++c) {
    if (features[static_cast<std::size_t>(c)].kind != FeatureKind::Numeric) continue;
    const double mean = x.col(c).mean();
    // Unbiased variance so the standardized train column has sample variance 1.
    const double var = n > 1 ? (x.col(c).array() - mean).square().sum() / (n - 1.0) : 0.0;
    s.mean[c] = mean;
    s.scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

SplitTriple split(const Dataset& ds, const std::array<double, 3>& ratios, std::uint64_t seed,
                  bool standardize) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (ratios[0] <= 0 || ratios[1] <= 0 || ratios[2] <= 0 || std::abs(sum - 1.0) > 1e-9) {
    throw Error("split: ratios must be positive and sum to 1");
  }
  const int n = ds.n();
  const int n_train = static_cast<int>(std::floor(ratios[0] * n));
  const int n_select = static_cast<int>(std::floor(ratios[1] * n));
  const int n_test = n - n_train - n_select;
  if (n_train < 1 || n_select < 1 || n_test < 1) {
    throw Error("split: a split would be empty (n=" + std::to_string(n) + ", sizes " +
                std::to_string(n_train) + "/" + std::to_string(n_select) + "/" +
                std::to_string(n_test) + ")");
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  SplitTriple t;
  t.train_idx.assign(perm.begin(), perm.begin() + n_train);
  t.select_idx.assign(perm.begin() + n_train, perm.begin() + n_train + n_select);
  t.test_idx.assign(perm.begin() + n_train + n_select, perm.end());
  std::sort(t.train_idx.begin(), t.train_idx.end());
  std::sort(t.select_idx.begin(), t.select_idx.end());
  std::sort(t.test_idx.begin(), t.test_idx.end());

  t.train = subset(ds, t.train_idx);
  t.model_select = subset(ds, t.select_idx);
  t.test = subset(ds, t.test_idx);
  t.ratios = ratios;
  t.seed = seed;

  if (standardize) {
    t.standardizer = fit_standardizer(t.train.x, t.train.features);
    t.standardizer.apply(t.train.x);
    t.standardizer.apply(t.model_select.x);
    t.standardizer.apply(t.test.x);
  }
  return t;
}

BiasedDataset inject_random_bias(const Dataset& ds, double eta, std::uint64_t seed) {
  if (eta < 0.0 || eta >= 0.5) throw Error("inject_random_bias: eta must be in [0, 1/2)");
  BiasedDataset out;
  out.eta = eta;
  out.seed = seed;
  out.original_labels = ds.labels;
  out.bit.resize(ds.labels.size());

  Rng rng(seed);
  std::vector<int> labels = ds.labels;
  for (int i = 0; i < ds.n(); ++i) {
    out.bit[i] = static_cast<std::uint8_t>(rng.next() & 1u);
    if (out.bit[i] == 0 && labels[i] == +1 && rng.bernoulli(eta)) {
      labels[i] = -1;
      out.flipped_rows.push_back(i);
    }
  }

  Dataset biased;
  biased.x.resize(ds.x.rows(), ds.x.cols() + 1);
  biased.x.leftCols(ds.x.cols()) = ds.x;
  for (int i = 0; i < ds.n(); ++i) biased.x(i, ds.x.cols()) = static_cast<double>(out.bit[i]);
  biased.labels = std::move(labels);
  biased.protected_mask.resize(out.bit.size());
  for (std::size_t i = 0; i < out.bit.size(); ++i) biased.protected_mask[i] = out.bit[i] == 0 ? 1 : 0;
  biased.features = ds.features;
  biased.features.push_back({"bias_bit", FeatureKind::Binary, -1, ""});
  biased.source = ds.source;
  out.data = std::move(biased);
  return out;
}

}  // namespace fairshift
