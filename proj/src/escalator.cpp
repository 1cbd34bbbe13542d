#include "trisq/escalator.hpp"

#include <algorithm>
#include <set>

#include "trisq/parallel.hpp"

namespace trisq {

namespace {

// The tree is finite; anything deeper signals a classification cap that is far too small.
constexpr int kMaxDepth = 16;

void check_cap(Integer cap) {
  if (cap < kMinClassifyCap)
    throw std::invalid_argument("classification cap must be at least " + std::to_string(kMinClassifyCap));
}

void expand(EscalatorNode& node, Integer cap, bool prune_euler, unsigned threads) {
  if (node.status != NodeStatus::non_universal) return;
  if (node.depth >= kMaxDepth) throw ResourceLimitError("escalator tree exceeded depth " + std::to_string(kMaxDepth));

  for (PolygonalSum& s : children(node.sum, node.truant)) {
    EscalatorNode child;
    child.sum = std::move(s);
    child.depth = node.depth + 1;
    node.children.push_back(std::move(child));
  }
  parallel_for(node.children.size(), threads, [&](std::size_t i) {
    EscalatorNode& child = node.children[i];
    if (prune_euler && is_euler_duplicate(child.sum)) {
      child.status = NodeStatus::pruned;
      child.pruned_reason = "represents the same integers as P3+P3";
      return;
    }
    Classification c = classify(child.sum, cap);
    child.status = c.status;
    child.truant = c.truant;
    child.certificate = std::move(c.certificate);
  });
  for (EscalatorNode& child : node.children) expand(child, cap, prune_euler, threads);
}

}  // namespace

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::universal: return "universal";
    case NodeStatus::non_universal: return "non-universal";
    case NodeStatus::pruned: return "pruned";
  }
  return "?";
}

std::string to_string(CertificateMethod m) {
  switch (m) {
    case CertificateMethod::brute_force: return "brute-force-to-bound";
    case CertificateMethod::family_escape: return "parent-family-escape";
    case CertificateMethod::cited: return "cited";
  }
  return "?";
}

std::vector<PolygonalSum> children(const PolygonalSum& parent, Integer truant) {
  if (truant < 1) throw std::invalid_argument("truant must be positive");
  std::vector<PolygonalSum> out;
  const Integer first = parent.empty() ? 1 : parent.terms().back().coefficient;
  const int last_order = parent.empty() ? 3 : parent.terms().back().order;
  for (Integer a = first; a <= truant; ++a) {
    for (int m = 3; m <= 4; ++m) {
      if (!parent.empty() && a == first && m < last_order) continue;
      out.push_back(parent.with(Term{a, m}));
    }
  }
  return out;
}

bool is_euler_duplicate(const PolygonalSum& sum) {
  static const PolygonalSum euler({{1, 4}, {2, 3}});
  return sum == euler;
}

Classification classify(const PolygonalSum& sum, Integer cap) {
  check_cap(cap);
  Classification c;
  if (auto t = truant(sum, cap)) {
    c.status = NodeStatus::non_universal;
    c.truant = *t;
  } else {
    c.status = NodeStatus::universal;
    c.certificate = UniversalityCertificate{cap, CertificateMethod::brute_force, {}};
  }
  return c;
}

EscalatorNode build_subtree(const PolygonalSum& root, Integer cap, bool prune_euler, unsigned threads) {
  check_cap(cap);
  EscalatorNode node;
  node.sum = root;
  node.depth = static_cast<int>(root.size());
  if (root.empty()) {
    node.status = NodeStatus::non_universal;
    node.truant = 1;
  } else {
    Classification c = classify(root, cap);
    node.status = c.status;
    node.truant = c.truant;
    node.certificate = std::move(c.certificate);
  }
  expand(node, cap, prune_euler, threads);
  return node;
}

EscalatorNode build_tree(Integer cap, bool prune_euler, unsigned threads) {
  return build_subtree(PolygonalSum{}, cap, prune_euler, threads);
}

void for_each_node(const EscalatorNode& tree, const std::function<void(const EscalatorNode&)>& fn) {
  fn(tree);
  for (const EscalatorNode& c : tree.children) for_each_node(c, fn);
}

std::vector<TruantEntry> truant_table(const EscalatorNode& tree, int depth) {
  std::vector<TruantEntry> out;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.depth == depth && n.status == NodeStatus::non_universal) out.push_back({n.sum, n.truant});
  });
  std::sort(out.begin(), out.end(), [](const TruantEntry& a, const TruantEntry& b) { return a.sum < b.sum; });
  return out;
}

std::vector<Integer> truant_set(const EscalatorNode& tree) {
  std::set<Integer> s;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.status == NodeStatus::non_universal) s.insert(n.truant);
  });
  return {s.begin(), s.end()};
}

}  // namespace trisq
