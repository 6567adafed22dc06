#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace fairshift {

// Row-major so one example is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Prediction from a signed confidence. A confidence of exactly zero
/// resolves to +1 everywhere in the toolkit.
inline int predict_from_confidence(double conf) { return conf >= 0.0 ? +1 : -1; }

/// 0 = errors only, 1 = warnings (default), 2 = progress info.
void set_verbosity(int level);
int verbosity();
void warn(const std::string& message);
void info(const std::string& message);

}  // namespace fairshift
