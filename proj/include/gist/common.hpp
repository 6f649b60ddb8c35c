#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown for all recoverable library errors (parse failures, shape
/// mismatches, violated preconditions).
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Largest node count for which dense N x N operators (and dense
/// eigendecompositions) may be materialized. Large-N paths are sparse only.
inline constexpr Index kDefaultOracleCap = 2048;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw error(msg);
}

} // namespace gist
