#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trisq/polygonal.hpp"

namespace trisq {

enum class NodeStatus { universal, non_universal, pruned };

enum class CertificateMethod { brute_force, family_escape, cited };

std::string to_string(NodeStatus s);
std::string to_string(CertificateMethod m);

/// What backs a "universal" label. A brute-force certificate only asserts
/// that every n in [1, checked_bound] is represented.
struct UniversalityCertificate {
  Integer checked_bound = 0;
  CertificateMethod method = CertificateMethod::brute_force;
  std::string citation;
};

struct Classification {
  NodeStatus status = NodeStatus::non_universal;
  Integer truant = 0;  // set iff non_universal
  std::optional<UniversalityCertificate> certificate;
};

struct EscalatorNode {
  PolygonalSum sum;
  int depth = 0;
  NodeStatus status = NodeStatus::non_universal;
  Integer truant = 0;
  std::optional<UniversalityCertificate> certificate;
  std::string pruned_reason;
  std::vector<EscalatorNode> children;
};

/// Smallest cap accepted by classify/build_tree: the largest critical truant.
inline constexpr Integer kMinClassifyCap = 48;
inline constexpr Integer kDefaultClassifyCap = 100'000;

/// Escalations of a non-universal sum with the given truant: every
/// sum + a P_m with last coefficient <= a <= truant, m in {3, 4}, and
/// m >= last order when a equals the last coefficient. Canonical order.
std::vector<PolygonalSum> children(const PolygonalSum& parent, Integer truant);

/// The node P4+2P3, which represents the same integers as P3+P3.
bool is_euler_duplicate(const PolygonalSum& sum);

Classification classify(const PolygonalSum& sum, Integer cap);

/// Builds the escalator tree for sums of triangular numbers and squares.
/// Sibling subtrees are classified in parallel; the tree is identical for any thread count.
EscalatorNode build_tree(Integer cap, bool prune_euler = true, unsigned threads = 1);

/// Builds the subtree rooted at an arbitrary sum (used for the Euler comparison).
EscalatorNode build_subtree(const PolygonalSum& root, Integer cap, bool prune_euler = true, unsigned threads = 1);

struct TruantEntry {
  PolygonalSum sum;
  Integer truant = 0;

  bool operator==(const TruantEntry&) const = default;
};

/// Non-universal nodes of the given depth with their truants, canonically ordered.
std::vector<TruantEntry> truant_table(const EscalatorNode& tree, int depth);

/// Preorder traversal.
void for_each_node(const EscalatorNode& tree, const std::function<void(const EscalatorNode&)>& fn);

/// Set of truants over all non-universal nodes, ascending.
std::vector<Integer> truant_set(const EscalatorNode& tree);

}  // namespace trisq
