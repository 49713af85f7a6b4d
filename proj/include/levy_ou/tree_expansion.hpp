#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "levy_ou/levy_core.hpp"
#include "levy_ou/noise_field.hpp"
#include "levy_ou/ou_process.hpp"

namespace levy_ou {

enum class NodeKind { noise_leaf, init_leaf, inner };

struct TreeNode {
  NodeKind kind = NodeKind::noise_leaf;
  std::vector<TreeNode> children;  // exactly `arity` entries for inner nodes

  static TreeNode noise() { return {NodeKind::noise_leaf, {}}; }
  static TreeNode init() { return {NodeKind::init_leaf, {}}; }
  static TreeNode inner(std::vector<TreeNode> children) {
    return {NodeKind::inner, std::move(children)};
  }

  bool operator==(const TreeNode&) const = default;
};

/// Plane rooted tree whose inner vertices all have `arity` children and whose
/// leaves are either noise leaves or initial-condition leaves. The root vertex
/// is implicit: it attaches by one edge to `root()`.
class Tree {
 public:
  Tree(TreeNode root, int arity);

  const TreeNode& root() const { return root_; }
  int arity() const { return arity_; }
  int inner_count() const { return inner_count_; }
  int leaf_count() const { return leaf_count_; }

  bool operator==(const Tree&) const = default;

 private:
  TreeNode root_;
  int arity_;
  int inner_count_;
  int leaf_count_;
};

/// All plane trees with i inner vertices of arity p and two leaf types,
/// in canonical order (noise before init, lexicographic by children).
std::vector<Tree> enumerate_trees(int p, int i);

/// "x-" followed by the node grammar: o (noise), # (init), *(c1,...,cp) (inner).
std::string render_tree(const Tree& tree);
Tree parse_tree(std::string_view text, int arity);

/// Evaluates trees on one noise path by the Feynman rule: one Green kernel per
/// edge, the noise convolution for noise leaves, e^{-ms} x0 for init leaves,
/// and (-lambda) times the time integral over each inner vertex.
/// Subtree values on the grid are cached, so one evaluator serves a whole series.
class TreeEvaluator {
 public:
  TreeEvaluator(const OUParams& params, double lambda, const NoisePath& path, double t);

  /// Value of the subtree rooted at `node`, on grid nodes 0..index(t).
  const std::vector<double>& values(const TreeNode& node);
  double value(const Tree& tree);

  std::size_t end_index() const { return end_; }

 private:
  std::vector<double> compute(const TreeNode& node);

  double m_;
  double x0_;
  double lambda_;
  const NoisePath& path_;
  std::size_t end_;
  std::map<std::string, std::vector<double>> cache_;
};

double evaluate_tree(const Tree& tree, const OUParams& params, double lambda,
                     const NoisePath& path, double t);

/// sum_k exp(-m (s - t_k - dt/2)) dL_k over t_k < s, for s = t_{index}.
double noise_convolution(double m, const NoisePath& path, std::size_t index);

struct SeriesReport {
  int order = 0;
  std::vector<double> order_sums;     // order i -> sum over trees with i inner vertices
  std::vector<double> partial_errors; // |sum_{i' <= i} order_sums - oracle|
  std::vector<std::size_t> tree_counts;
  double total = 0.0;
  double oracle = 0.0;
  double error = 0.0;
};

void to_json(nlohmann::json& j, const SeriesReport& report);

/// Tree series truncated after N inner vertices, with the RK4 oracle filled in.
SeriesReport truncated_series(const OUParams& params, const LevyTriplet& triplet, double lambda,
                              int p, int N, const NoisePath& path, double t, int refine = 8);

/// RK4 solution of x' = -m x - lambda x^p + dL_k / dt (piecewise constant per
/// cell), `refine` steps per cell. Throws NumericalFailure on overflow.
double reference_solution(const OUParams& params, double lambda, int p, const NoisePath& path,
                          double t, int refine);

struct OrderCheck {
  std::vector<double> lambdas;
  std::vector<double> errors;
  double slope = 0.0;
  int expected = 0;  // N + 1
};

void to_json(nlohmann::json& j, const OrderCheck& check);

/// Truncation error of the order-N series against the oracle for each lambda,
/// with the fitted log-log slope.
OrderCheck order_check(const OUParams& params, const LevyTriplet& triplet, int p, int N,
                       const NoisePath& path, double t, const std::vector<double>& lambdas,
                       int refine = 8);

}  // namespace levy_ou
