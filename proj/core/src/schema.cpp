#include "fairshift/schema.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fairshift/common.hpp"

namespace fairshift {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("schema: bad boolean for '" + key + "': " + v);
}

}  // namespace

DatasetSchema DatasetSchema::parse(const std::string& text) {
  DatasetSchema schema;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("schema line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "delimiter") {
      if (value == "comma") {
        schema.delimiter = ',';
      } else if (value == "whitespace") {
        schema.delimiter = '\0';
      } else if (value.size() == 1) {
        schema.delimiter = value[0];
      } else {
        throw Error("schema: delimiter must be 'comma', 'whitespace' or one character");
      }
    } else if (key == "comment_prefix") {
      schema.comment_prefix = value;
    } else if (key == "missing_token") {
      schema.missing_token = value;
    } else if (key == "missing_policy") {
      if (value == "drop") {
        schema.missing_policy = MissingPolicy::Drop;
      } else if (value == "impute") {
        schema.missing_policy = MissingPolicy::Impute;
      } else {
        throw Error("schema: missing_policy must be drop or impute, got " + value);
      }
    } else if (key == "label_column") {
      if (!schema.label_column.empty()) throw Error("schema: duplicate label_column");
      schema.label_column = value;
    } else if (key == "positive_label") {
      schema.positive_label = value;
    } else if (key == "negative_label") {
      schema.negative_label = value;
    } else if (key == "label_strip_suffix") {
      schema.label_strip_suffix = value;
    } else if (key == "protected_column") {
      if (!schema.protected_rule.column.empty()) throw Error("schema: duplicate protected_column");
      schema.protected_rule.column = value;
    } else if (key == "protected_value") {
      schema.protected_rule.equals = value;
    } else if (key == "protected_less_than") {
      schema.protected_rule.less_than = std::stod(value);
    } else if (key == "protected_as_feature") {
      schema.protected_as_feature = parse_bool(value, key);
    } else if (key == "column") {
      const auto parts = split_ws(value);
      if (parts.size() != 2) {
        throw Error("schema line " + std::to_string(lineno) + ": column wants '<name> <numeric|categorical>'");
      }
      ColumnSpec col;
      col.name = parts[0];
      if (parts[1] == "numeric") {
        col.kind = ColumnKind::Numeric;
      } else if (parts[1] == "categorical") {
        col.kind = ColumnKind::Categorical;
      } else {
        throw Error("schema: unknown column kind " + parts[1]);
      }
      schema.columns.push_back(std::move(col));
    } else if (key == "categories") {
      auto parts = split_ws(value);
      if (parts.size() < 2) throw Error("schema: categories wants '<column> v1 [v2 ...]'");
      const std::string col_name = parts[0];
      const int idx = schema.column_index(col_name);
      if (idx < 0) throw Error("schema: categories for unknown column " + col_name);
      parts.erase(parts.begin());
      schema.columns[idx].categories = std::move(parts);
    } else {
      throw Error("schema line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  schema.validate();
  return schema;
}

DatasetSchema DatasetSchema::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

int DatasetSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void DatasetSchema::validate() const {
  if (columns.empty()) throw Error("schema: no columns declared");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      if (columns[i].name == columns[j].name) {
        throw Error("schema: duplicate column name " + columns[i].name);
      }
    }
  }
  if (label_column.empty()) throw Error("schema: label_column is required");
  if (column_index(label_column) < 0) throw Error("schema: label_column not in column list: " + label_column);
  if (positive_label.empty()) throw Error("schema: positive_label is required");
  if (protected_rule.column.empty()) throw Error("schema: protected_column is required");
  const int pidx = column_index(protected_rule.column);
  if (pidx < 0) throw Error("schema: protected_column not in column list: " + protected_rule.column);
  const bool has_eq = protected_rule.equals.has_value();
  const bool has_lt = protected_rule.less_than.has_value();
  if (has_eq == has_lt) {
    throw Error("schema: exactly one of protected_value / protected_less_than is required");
  }
  if (has_lt && columns[pidx].kind != ColumnKind::Numeric) {
    throw Error("schema: protected_less_than needs a numeric protected column");
  }
  if (protected_rule.column == label_column) {
    throw Error("schema: protected column must differ from the label column");
  }
}

bool DatasetSchema::frozen() const {
  return std::all_of(columns.begin(), columns.end(), [&](const ColumnSpec& c) {
    // The label column's values are constrained by positive/negative_label,
    // not by a category list.
    return c.kind != ColumnKind::Categorical || c.name == label_column || !c.categories.empty();
  });
}

std::string DatasetSchema::to_config() const {
  std::ostringstream out;
  if (delimiter == '\0') {
    out << "delimiter = whitespace\n";
  } else if (delimiter == ',') {
    out << "delimiter = comma\n";
  } else {
    out << "delimiter = " << delimiter << "\n";
  }
  if (!comment_prefix.empty()) out << "comment_prefix = " << comment_prefix << "\n";
  if (!missing_token.empty()) {
    out << "missing_token = " << missing_token << "\n";
    out << "missing_policy = " << (missing_policy == MissingPolicy::Drop ? "drop" : "impute") << "\n";
  }
  out << "label_column = " << label_column << "\n";
  out << "positive_label = " << positive_label << "\n";
  if (negative_label) out << "negative_label = " << *negative_label << "\n";
  if (!label_strip_suffix.empty()) out << "label_strip_suffix = " << label_strip_suffix << "\n";
  out << "protected_column = " << protected_rule.column << "\n";
  if (protected_rule.equals) out << "protected_value = " << *protected_rule.equals << "\n";
  if (protected_rule.less_than) out << "protected_less_than = " << *protected_rule.less_than << "\n";
  if (!protected_as_feature) out << "protected_as_feature = false\n";
  for (const auto& col : columns) {
    out << "column = " << col.name << " " << (col.kind == ColumnKind::Numeric ? "numeric" : "categorical")
        << "\n";
  }
  for (const auto& col : columns) {
    if (!col.categories.empty()) {
      out << "categories = " << col.name;
      for (const auto& v : col.categories) out << " " << v;
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace fairshift
