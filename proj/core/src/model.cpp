#include "fairshift/model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace fairshift {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<long>(i)] = a[i].get<double>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, long cols_hint = 0) {
  const long nr = static_cast<long>(rows.size());
  const long nc = nr > 0 ? static_cast<long>(rows[0].size()) : cols_hint;
  Matrix m(nr, nc);
  for (long r = 0; r < nr; ++r) {
    for (long c = 0; c < nc; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Boost: return "boost";
    case LearnerKind::Svm: return "svm";
    case LearnerKind::LogReg: return "logreg";
  }
  throw Error("unknown learner kind");
}

LearnerKind learner_from_string(const std::string& name) {
  if (name == "boost" || name == "adaboost" || name == "ab") return LearnerKind::Boost;
  if (name == "svm") return LearnerKind::Svm;
  if (name == "logreg" || name == "lr") return LearnerKind::LogReg;
  throw Error("unknown learner: " + name);
}

LearnerKind ConfidenceModel::kind() const {
  if (std::holds_alternative<BoostModel>(model_)) return LearnerKind::Boost;
  if (std::holds_alternative<SvmModel>(model_)) return LearnerKind::Svm;
  return LearnerKind::LogReg;
}

double ConfidenceModel::confidence_row(RowRef row) const {
  return std::visit([&](const auto& m) { return m.confidence_row(row); }, model_);
}

std::vector<double> ConfidenceModel::confidences(const Matrix& x) const {
  return std::visit([&](const auto& m) { return m.confidences(x); }, model_);
}

std::vector<int> ConfidenceModel::predict(const Matrix& x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model_);
}

json ConfidenceModel::to_json() const {
  json j;
  j["kind"] = to_string(kind());
  j["scale"] = {{"min_conf", scale.min_conf}, {"max_conf", scale.max_conf}};
  json p;
  switch (kind()) {
    case LearnerKind::Boost: {
      const auto& m = boost();
      json stumps = json::array();
      for (const auto& s : m.stumps) {
        stumps.push_back({{"feature", s.feature}, {"threshold", s.threshold}, {"polarity", s.polarity}});
      }
      p["stumps"] = std::move(stumps);
      p["alphas"] = m.alphas;
      p["round_errors"] = m.round_errors;
      p["fwl_bias_weight"] = m.fwl_bias_weight;
      break;
    }
    case LearnerKind::Svm: {
      const auto& m = svm();
      p["kernel"] = m.kernel.kind == KernelSpec::Kind::Linear ? "linear" : "gaussian";
      p["gamma"] = m.kernel.gamma;
      p["C"] = m.C;
      p["intercept"] = m.intercept;
      p["coef"] = m.coef;
      p["support_vectors"] = matrix_to_json(m.support_vectors);
      p["confidence_scale"] = m.confidence_scale;
      p["converged"] = m.converged;
      break;
    }
    case LearnerKind::LogReg: {
      const auto& m = logreg();
      p["w"] = vector_to_json(m.w);
      p["intercept"] = m.intercept;
      p["reg"] = m.reg;
      p["converged"] = m.converged;
      break;
    }
  }
  j["params"] = std::move(p);
  return j;
}

ConfidenceModel ConfidenceModel::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const json& p = j.at("params");
  std::optional<ConfidenceModel> out;
  if (kind == "boost") {
    BoostModel m;
    for (const auto& s : p.at("stumps")) {
      m.stumps.push_back(Stump{s.at("feature").get<int>(), s.at("threshold").get<double>(),
                               s.at("polarity").get<int>()});
    }
    m.alphas = p.at("alphas").get<std::vector<double>>();
    m.round_errors = p.at("round_errors").get<std::vector<double>>();
    m.fwl_bias_weight = p.value("fwl_bias_weight", 0.0);
    m.alpha_sum = 0.0;
    for (double a : m.alphas) m.alpha_sum += a;
    out.emplace(std::move(m));
  } else if (kind == "svm") {
    SvmModel m;
    m.kernel.kind = p.at("kernel").get<std::string>() == "linear" ? KernelSpec::Kind::Linear
                                                                  : KernelSpec::Kind::Gaussian;
    m.kernel.gamma = p.at("gamma").get<double>();
    m.C = p.at("C").get<double>();
    m.intercept = p.at("intercept").get<double>();
    m.coef = p.at("coef").get<std::vector<double>>();
    m.support_vectors = matrix_from_json(p.at("support_vectors"));
    m.confidence_scale = p.value("confidence_scale", 1.0);
    m.converged = p.value("converged", true);
    out.emplace(std::move(m));
  } else if (kind == "logreg") {
    LinModel m;
    m.w = vector_from_json(p.at("w"));
    m.intercept = p.at("intercept").get<double>();
    m.reg = p.value("reg", 0.0);
    m.converged = p.value("converged", true);
    out.emplace(std::move(m));
  } else {
    throw Error("model document: unknown kind " + kind);
  }
  if (j.contains("scale")) {
    out->scale.min_conf = j["scale"].value("min_conf", 0.0);
    out->scale.max_conf = j["scale"].value("max_conf", 0.0);
  }
  return std::move(*out);
}

void ModelDocument::save(const std::string& path) const {
  json j;
  j["format_version"] = kFormatVersion;
  j["model"] = model.to_json();
  j["schema"] = schema.to_config();
  json std_j;
  std_j["identity"] = standardizer.identity;
  if (!standardizer.identity) {
    std_j["mean"] = vector_to_json(standardizer.mean);
    std_j["scale"] = vector_to_json(standardizer.scale);
  }
  j["standardizer"] = std::move(std_j);
  json feats = json::array();
  for (const auto& f : features) {
    feats.push_back({{"name", f.name},
                     {"kind", f.kind == FeatureKind::Numeric ? "numeric"
                              : f.kind == FeatureKind::OneHot ? "onehot"
                                                              : "binary"},
                     {"source_column", f.source_column},
                     {"category", f.category}});
  }
  j["features"] = std::move(feats);
  j["fairness"] = {{"method", fairness.method},
                   {"lambda", fairness.lambda},
                   {"shift_complement", fairness.shift_complement},
                   {"flip_p", fairness.flip_p},
                   {"rr_seed", fairness.rr_seed}};
  j["provenance"] = {{"config", provenance.config},
                     {"config_hash", provenance.config_hash},
                     {"master_seed", provenance.master_seed},
                     {"trial", provenance.trial}};

  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

ModelDocument ModelDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  json j;
  in >> j;
  const int version = j.value("format_version", -1);
  if (version != kFormatVersion) {
    throw Error("model document: unsupported format_version " + std::to_string(version));
  }
  ModelDocument doc{ConfidenceModel::from_json(j.at("model")),
                    DatasetSchema::parse(j.at("schema").get<std::string>()),
                    Standardizer{},
                    {},
                    FairnessAttachment{},
                    Provenance{}};
  const json& std_j = j.at("standardizer");
  doc.standardizer.identity = std_j.at("identity").get<bool>();
  if (!doc.standardizer.identity) {
    doc.standardizer.mean = vector_from_json(std_j.at("mean"));
    doc.standardizer.scale = vector_from_json(std_j.at("scale"));
  }
  for (const auto& f : j.at("features")) {
    FeatureInfo info;
    info.name = f.at("name").get<std::string>();
    const std::string kind = f.at("kind").get<std::string>();
    info.kind = kind == "numeric" ? FeatureKind::Numeric
                : kind == "onehot" ? FeatureKind::OneHot
                                   : FeatureKind::Binary;
    info.source_column = f.at("source_column").get<int>();
    info.category = f.at("category").get<std::string>();
    doc.features.push_back(std::move(info));
  }
  const json& fj = j.at("fairness");
  doc.fairness.method = fj.at("method").get<std::string>();
  doc.fairness.lambda = fj.at("lambda").get<double>();
  doc.fairness.shift_complement = fj.at("shift_complement").get<bool>();
  doc.fairness.flip_p = fj.at("flip_p").get<double>();
  doc.fairness.rr_seed = fj.at("rr_seed").get<std::uint64_t>();
  if (j.contains("provenance")) {
    const json& pj = j["provenance"];
    doc.provenance.config = pj.value("config", "");
    doc.provenance.config_hash = pj.value("config_hash", std::uint64_t{0});
    doc.provenance.master_seed = pj.value("master_seed", std::uint64_t{0});
    doc.provenance.trial = pj.value("trial", 0);
  }
  return doc;
}

}  // namespace fairshift
