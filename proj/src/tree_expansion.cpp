#include "levy_ou/tree_expansion.hpp"

#include <cmath>

#include "levy_ou/errors.hpp"
#include "levy_ou/stats.hpp"

namespace levy_ou {

namespace {

void count_nodes(const TreeNode& node, int arity, int& inner, int& leaves) {
  if (node.kind == NodeKind::inner) {
    if (static_cast<int>(node.children.size()) != arity) {
      throw InvalidInput("tree: inner vertex must have exactly " + std::to_string(arity) + " children");
    }
    ++inner;
    for (const auto& c : node.children) count_nodes(c, arity, inner, leaves);
  } else {
    if (!node.children.empty()) throw InvalidInput("tree: leaf with children");
    ++leaves;
  }
}

void render_node(const TreeNode& node, std::string& out) {
  switch (node.kind) {
    case NodeKind::noise_leaf:
      out += 'o';
      return;
    case NodeKind::init_leaf:
      out += '#';
      return;
    case NodeKind::inner:
      out += "*(";
      for (std::size_t c = 0; c < node.children.size(); ++c) {
        if (c) out += ',';
        render_node(node.children[c], out);
      }
      out += ')';
      return;
  }
}

std::string node_key(const TreeNode& node) {
  std::string s;
  render_node(node, s);
  return s;
}

// Odometer over compositions of `total` into `parts` nonnegative integers,
// in lexicographic order.
std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(parts, 0);
  const auto recurse = [&](auto&& self, int slot, int remaining) -> void {
    if (slot == parts - 1) {
      current[slot] = remaining;
      out.push_back(current);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      current[slot] = v;
      self(self, slot + 1, remaining - v);
    }
  };
  recurse(recurse, 0, total);
  return out;
}

// Memo is a map so references to finished levels stay valid while deeper ones are built.
const std::vector<TreeNode>& nodes_with_inner(int p, int i, std::map<int, std::vector<TreeNode>>& memo) {
  if (auto it = memo.find(i); it != memo.end()) return it->second;
  std::vector<TreeNode> out;
  if (i == 0) {
    out = {TreeNode::noise(), TreeNode::init()};
  } else {
    for (const auto& parts : compositions(i - 1, p)) {
      std::vector<const std::vector<TreeNode>*> pools;
      for (int part : parts) pools.push_back(&nodes_with_inner(p, part, memo));
      std::vector<std::size_t> pick(p, 0);
      while (true) {
        std::vector<TreeNode> children;
        children.reserve(p);
        for (int c = 0; c < p; ++c) children.push_back((*pools[c])[pick[c]]);
        out.push_back(TreeNode::inner(std::move(children)));
        int c = p - 1;
        while (c >= 0 && ++pick[c] == pools[c]->size()) pick[c--] = 0;
        if (c < 0) break;
      }
    }
  }
  return memo.emplace(i, std::move(out)).first->second;
}

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  TreeNode parse() {
    if (text_.substr(0, 2) != "x-") fail("expected root marker \"x-\"");
    pos_ = 2;
    TreeNode node = parse_node();
    if (pos_ != text_.size()) fail("trailing characters");
    return node;
  }

 private:
  TreeNode parse_node() {
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_++];
    if (c == 'o') return TreeNode::noise();
    if (c == '#') return TreeNode::init();
    if (c != '*') fail(std::string("unexpected '") + c + "'");
    expect('(');
    std::vector<TreeNode> children;
    children.push_back(parse_node());
    while (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      children.push_back(parse_node());
    }
    expect(')');
    return TreeNode::inner(std::move(children));
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("parse_tree: " + what + " at offset " + std::to_string(pos_) + " in \"" +
                       std::string(text_) + "\"");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double ipow(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

void check_scalar(const OUParams& params, const NoisePath& path) {
  validate(params);
  if (params.dim() != 1 || path.dim() != 1) {
    throw InvalidInput("tree expansion: one-dimensional process required");
  }
}

}  // namespace

Tree::Tree(TreeNode root, int arity) : root_(std::move(root)), arity_(arity) {
  if (arity_ < 2) throw InvalidInput("tree: arity must be >= 2");
  int inner = 0;
  int leaves = 0;
  count_nodes(root_, arity_, inner, leaves);
  inner_count_ = inner;
  leaf_count_ = leaves;
}

std::vector<Tree> enumerate_trees(int p, int i) {
  if (p < 2) throw InvalidInput("enumerate_trees: p must be >= 2");
  if (i < 0) throw InvalidInput("enumerate_trees: i must be >= 0");
  std::map<int, std::vector<TreeNode>> memo;
  std::vector<Tree> out;
  for (const auto& node : nodes_with_inner(p, i, memo)) out.emplace_back(node, p);
  return out;
}

std::string render_tree(const Tree& tree) {
  std::string out = "x-";
  render_node(tree.root(), out);
  return out;
}

Tree parse_tree(std::string_view text, int arity) { return Tree(TreeParser(text).parse(), arity); }

double noise_convolution(double m, const NoisePath& path, std::size_t index) {
  const double dt = path.grid.dt();
  const double s = path.grid.node(index);
  double acc = 0.0;
  for (std::size_t k = 0; k < index; ++k) {
    const double tk = path.grid.node(k);
    const double w = std::exp(-m * (s - tk - 0.5 * dt));
    acc += w * path.increments(0, static_cast<Eigen::Index>(k));
  }
  return acc;
}

TreeEvaluator::TreeEvaluator(const OUParams& params, double lambda, const NoisePath& path, double t)
    : m_(params.m), x0_(0.0), lambda_(lambda), path_(path), end_(0) {
  check_scalar(params, path);
  x0_ = params.x0(0);
  const auto idx = path.grid.index_of(t);
  if (!idx) throw InvalidInput("evaluate_tree: t is not a node of the noise grid");
  end_ = *idx;
}

const std::vector<double>& TreeEvaluator::values(const TreeNode& node) {
  const std::string key = node_key(node);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto computed = compute(node);
  return cache_.emplace(key, std::move(computed)).first->second;
}

double TreeEvaluator::value(const Tree& tree) { return values(tree.root()).back(); }

std::vector<double> TreeEvaluator::compute(const TreeNode& node) {
  std::vector<double> v(end_ + 1, 0.0);
  switch (node.kind) {
    case NodeKind::noise_leaf:
      for (std::size_t j = 0; j <= end_; ++j) v[j] = noise_convolution(m_, path_, j);
      return v;
    case NodeKind::init_leaf:
      for (std::size_t j = 0; j <= end_; ++j) v[j] = std::exp(-m_ * path_.grid.node(j)) * x0_;
      return v;
    case NodeKind::inner:
      break;
  }
  std::vector<double> product(end_ + 1, 1.0);
  for (const auto& child : node.children) {
    const auto& cv = values(child);
    for (std::size_t j = 0; j <= end_; ++j) product[j] *= cv[j];
  }
  // Trapezoid of int_0^s e^{-m(s-u)} product(u) du, advanced node by node.
  const double dt = path_.grid.dt();
  const double decay = std::exp(-m_ * dt);
  double integral = 0.0;
  for (std::size_t j = 0; j < end_; ++j) {
    integral = decay * integral + 0.5 * dt * (decay * product[j] + product[j + 1]);
    v[j + 1] = -lambda_ * integral;
  }
  return v;
}

double evaluate_tree(const Tree& tree, const OUParams& params, double lambda,
                     const NoisePath& path, double t) {
  TreeEvaluator evaluator(params, lambda, path, t);
  return evaluator.value(tree);
}

double reference_solution(const OUParams& params, double lambda, int p, const NoisePath& path,
                          double t, int refine) {
  check_scalar(params, path);
  if (refine < 1) throw InvalidInput("reference_solution: refine must be >= 1");
  if (p < 1) throw InvalidInput("reference_solution: p must be >= 1");
  const auto end = path.grid.index_of(t);
  if (!end) throw InvalidInput("reference_solution: t is not a node of the noise grid");
  const double m = params.m;
  const double dt = path.grid.dt();
  const double h = dt / refine;
  double x = params.x0(0);
  for (std::size_t k = 0; k < *end; ++k) {
    const double g = path.increments(0, static_cast<Eigen::Index>(k)) / dt;
    const auto rhs = [&](double y) { return -m * y - lambda * ipow(y, p) + g; };
    for (int r = 0; r < refine; ++r) {
      const double k1 = rhs(x);
      const double k2 = rhs(x + 0.5 * h * k1);
      const double k3 = rhs(x + 0.5 * h * k2);
      const double k4 = rhs(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!std::isfinite(x)) {
      throw NumericalFailure("reference_solution: overflow at t = " +
                             std::to_string(path.grid.node(k + 1)) + " (lambda too large)");
    }
  }
  return x;
}

SeriesReport truncated_series(const OUParams& params, const LevyTriplet& triplet, double lambda,
                              int p, int N, const NoisePath& path, double t, int refine) {
  validate(triplet);
  if (triplet.dim != 1) throw InvalidInput("truncated_series: one-dimensional triplet required");
  if (N < 0) throw InvalidInput("truncated_series: N must be >= 0");
  TreeEvaluator evaluator(params, lambda, path, t);
  SeriesReport report;
  report.order = N;
  for (int i = 0; i <= N; ++i) {
    double sum = 0.0;
    const auto trees = enumerate_trees(p, i);
    for (const auto& tree : trees) sum += evaluator.value(tree);
    report.order_sums.push_back(sum);
    report.tree_counts.push_back(trees.size());
  }
  report.oracle = reference_solution(params, lambda, p, path, t, refine);
  double partial = 0.0;
  for (double s : report.order_sums) {
    partial += s;
    report.partial_errors.push_back(std::abs(partial - report.oracle));
  }
  report.total = partial;
  report.error = std::abs(report.total - report.oracle);
  return report;
}

OrderCheck order_check(const OUParams& params, const LevyTriplet& triplet, int p, int N,
                       const NoisePath& path, double t, const std::vector<double>& lambdas,
                       int refine) {
  if (lambdas.size() < 2) throw InvalidInput("order_check: need at least two lambdas");
  OrderCheck check;
  check.lambdas = lambdas;
  check.expected = N + 1;
  for (double lambda : lambdas) {
    check.errors.push_back(truncated_series(params, triplet, lambda, p, N, path, t, refine).error);
  }
  check.slope = loglog_slope(check.lambdas, check.errors);
  return check;
}

void to_json(nlohmann::json& j, const SeriesReport& r) {
  j = {{"order", r.order},         {"order_sums", r.order_sums},
       {"tree_counts", r.tree_counts}, {"partial_errors", r.partial_errors},
       {"total", r.total},         {"oracle", r.oracle},
       {"error", r.error}};
}

void to_json(nlohmann::json& j, const OrderCheck& c) {
  j = {{"lambdas", c.lambdas}, {"errors", c.errors}, {"slope", c.slope}, {"expected_slope", c.expected}};
}

}  // namespace levy_ou
