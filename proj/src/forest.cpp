#include "volcast/forest.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace volcast {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Builder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const ForestParams& params;
  int z;
  std::vector<int> optional;  // non-forced columns
  std::mt19937_64 rng;
  std::vector<std::pair<double, double>> scratch;

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  std::vector<int> candidates() {
    std::vector<int> c = params.forced;
    for (int i = 0; i < z; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), optional.size() - 1);
      std::swap(optional[static_cast<std::size_t>(i)], optional[pick(rng)]);
      c.push_back(optional[static_cast<std::size_t>(i)]);
    }
    return c;
  }

  Split best_split(const int* idx, int n, double sum) {
    Split best;
    const double parent = sum * sum / n;
    best.score = parent;
    for (int f : candidates()) {
      scratch.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = {x(idx[i], f), y(idx[i])};
      std::sort(scratch.begin(), scratch.end());
      double left = 0.0;
      for (int i = 0; i < n - 1; ++i) {
        left += scratch[static_cast<std::size_t>(i)].second;
        const int nl = i + 1;
        if (nl < params.min_leaf) continue;
        if (n - nl < params.min_leaf) break;
        const double a = scratch[static_cast<std::size_t>(i)].first;
        const double b = scratch[static_cast<std::size_t>(i) + 1].first;
        if (!(a < b)) continue;
        const double right = sum - left;
        const double score = left * left / nl + right * right / (n - nl);
        if (score > best.score * (1.0 + 1e-12) + 1e-300) {
          best = {f, 0.5 * (a + b), score};
          if (!(best.threshold > a && best.threshold <= b)) best.threshold = a;
        }
      }
    }
    return best;
  }

  void grow(std::vector<RegressionTree::Node>& nodes, std::vector<int>& idx) {
    struct Item {
      int node, lo, hi, depth;
    };
    nodes.clear();
    nodes.push_back({});
    std::vector<Item> stack{{0, 0, static_cast<int>(idx.size()), 0}};
    while (!stack.empty()) {
      const Item it = stack.back();
      stack.pop_back();
      const int n = it.hi - it.lo;
      double sum = 0.0;
      for (int i = it.lo; i < it.hi; ++i) sum += y(idx[static_cast<std::size_t>(i)]);
      nodes[static_cast<std::size_t>(it.node)].value = sum / n;
      if (n < 2 * params.min_leaf || (params.max_depth > 0 && it.depth >= params.max_depth)) continue;
      const Split s = best_split(idx.data() + it.lo, n, sum);
      if (s.feature < 0) continue;
      const auto mid = std::partition(idx.begin() + it.lo, idx.begin() + it.hi,
                                      [&](int r) { return x(r, s.feature) <= s.threshold; });
      const int cut = static_cast<int>(mid - idx.begin());
      const int left = static_cast<int>(nodes.size());
      nodes.push_back({});
      nodes.push_back({});
      auto& node = nodes[static_cast<std::size_t>(it.node)];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, cut, it.hi, it.depth + 1});
      stack.push_back({left, it.lo, cut, it.depth + 1});
    }
  }
};

}  // namespace

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(k)];
    k = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(k)].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].feature < 0) continue;
    d[static_cast<std::size_t>(nodes_[k].left)] = d[k] + 1;
    d[static_cast<std::size_t>(nodes_[k].right)] = d[k] + 1;
    deepest = std::max(deepest, d[k] + 1);
  }
  return deepest;
}

void RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                       std::uint64_t seed, const std::vector<std::vector<int>>* bootstrap) {
  const auto n = static_cast<int>(x.rows());
  if (n != y.size() || n < 1) throw std::invalid_argument("RandomForest: bad training data");
  if (params.trees < 1 || params.min_leaf < 1 || params.z < 0 || params.max_depth < 0) {
    throw std::invalid_argument("RandomForest: bad parameters");
  }
  if (bootstrap && static_cast<int>(bootstrap->size()) != params.trees) {
    throw std::invalid_argument("RandomForest: need one bootstrap sample per tree");
  }
  std::vector<int> optional;
  std::vector<bool> is_forced(static_cast<std::size_t>(x.cols()), false);
  for (int f : params.forced) {
    if (f < 0 || f >= x.cols()) throw std::invalid_argument("RandomForest: forced column out of range");
    is_forced[static_cast<std::size_t>(f)] = true;
  }
  for (int f = 0; f < x.cols(); ++f) {
    if (!is_forced[static_cast<std::size_t>(f)]) optional.push_back(f);
  }
  effective_z_ = std::min<int>(params.z, static_cast<int>(optional.size()));

  trees_.assign(static_cast<std::size_t>(params.trees), {});
  Eigen::VectorXd oob_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXi oob_count = Eigen::VectorXi::Zero(n);
  std::vector<char> in_bag(static_cast<std::size_t>(n));
  for (int b = 0; b < params.trees; ++b) {
    const std::uint64_t tree_seed = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(b) + 1));
    std::vector<int> idx;
    if (bootstrap) {
      idx = (*bootstrap)[static_cast<std::size_t>(b)];
    } else {
      std::mt19937_64 draw(tree_seed);
      std::uniform_int_distribution<int> pick(0, n - 1);
      idx.resize(static_cast<std::size_t>(n));
      for (auto& i : idx) i = pick(draw);
    }
    if (idx.empty()) throw std::invalid_argument("RandomForest: empty bootstrap sample");
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (int i : idx) in_bag[static_cast<std::size_t>(i)] = 1;
    Builder builder{x, y, params, effective_z_, optional, std::mt19937_64(splitmix(tree_seed)), {}};
    builder.grow(trees_[static_cast<std::size_t>(b)].nodes_, idx);
    for (int i = 0; i < n; ++i) {
      if (in_bag[static_cast<std::size_t>(i)]) continue;
      oob_sum(i) += trees_[static_cast<std::size_t>(b)].predict(x.row(i));
      ++oob_count(i);
    }
  }
  double se = 0.0;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    if (oob_count(i) == 0) continue;
    const double e = y(i) - oob_sum(i) / oob_count(i);
    se += e * e;
    ++used;
  }
  oob_mse_ = used > 0 ? se / used : 0.0;
}

double RandomForest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (trees_.empty()) throw std::logic_error("RandomForest: not fitted");
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return s / static_cast<double>(trees_.size());
}

std::uint64_t task_seed(std::uint64_t seed, const std::string& model, long origin) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : model) h = (h ^ c) * 1099511628211ULL;
  return splitmix(splitmix(seed) ^ splitmix(h) ^ splitmix(static_cast<std::uint64_t>(origin)));
}

}  // namespace volcast
