#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace volcast {

struct ForestParams {
  int trees = 500;
  int z = 8;          // random candidates per split, on top of the forced columns
  int max_depth = 0;  // 0 grows until the leaf-size limit stops it
  int min_leaf = 10;
  std::vector<int> forced;  // columns considered at every split
};

/// Regression tree stored as a flat node array.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  [[nodiscard]] double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] int depth() const;

 private:
  friend class RandomForest;
  std::vector<Node> nodes_;
};

/// Bagged regression trees with squared-error splits. Each split looks at
/// the forced columns plus `z` columns drawn from the rest.
class RandomForest {
 public:
  /// Tree b uses a bootstrap sample and split candidates drawn from a
  /// generator seeded by (seed, b) only. When `bootstrap` is given it
  /// replaces the drawn samples (one index list per tree).
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
           std::uint64_t seed, const std::vector<std::vector<int>>* bootstrap = nullptr);

  [[nodiscard]] double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// Mean squared out-of-bag error over rows left out by at least one tree.
  [[nodiscard]] double oob_mse() const { return oob_mse_; }
  [[nodiscard]] const std::vector<RegressionTree>& trees() const { return trees_; }
  /// z after clamping to the number of non-forced columns.
  [[nodiscard]] int effective_z() const { return effective_z_; }

 private:
  std::vector<RegressionTree> trees_;
  double oob_mse_ = 0.0;
  int effective_z_ = 0;
};

/// Seed for one (base seed, model, origin) task; independent of the stock.
std::uint64_t task_seed(std::uint64_t seed, const std::string& model, long origin);

}  // namespace volcast
