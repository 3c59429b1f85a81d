#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bts/atom.hpp"

namespace bts {

/// Node return signal. Every tick of every node yields exactly one of these.
enum class Status { Success, Failure, Running };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Success: return "SUCCESS";
    case Status::Failure: return "FAILURE";
    default: return "RUNNING";
  }
}

enum class NodeKind { Sequence, Fallback, Parallel, Condition, Action };

class BtNode;
using NodePtr = std::shared_ptr<const BtNode>;

/// Immutable behavior-tree node. Control nodes (sequence, fallback, parallel)
/// route ticks to their children; leaves check a condition or run an action.
///
/// Trees are values: edit operations build a new tree that shares every
/// untouched subtree with the original, so an edit costs O(path to the edit),
/// not O(tree size). Immutability also makes a tree safe to share across
/// threads; per-run state lives in TickSession.
///
/// Factories accept child lists that violate the structural invariants
/// (for instance an empty sequence) so that validate() has something to
/// report; everything downstream requires validate() to come back empty.
class BtNode {
 public:
  static NodePtr sequence(std::vector<NodePtr> children) {
    return make(NodeKind::Sequence, 0, Atom{}, std::move(children));
  }
  static NodePtr fallback(std::vector<NodePtr> children) {
    return make(NodeKind::Fallback, 0, Atom{}, std::move(children));
  }
  static NodePtr parallel(int threshold, std::vector<NodePtr> children) {
    return make(NodeKind::Parallel, threshold, Atom{}, std::move(children));
  }
  static NodePtr condition(Atom a) {
    return make(NodeKind::Condition, 0, std::move(a), {});
  }
  static NodePtr action(Atom a) {
    return make(NodeKind::Action, 0, std::move(a), {});
  }

  NodeKind kind() const { return kind_; }
  bool is_leaf() const {
    return kind_ == NodeKind::Condition || kind_ == NodeKind::Action;
  }
  bool is_control() const { return !is_leaf(); }

  /// Leaf payload; meaningless for control nodes.
  const Atom& atom() const { return atom_; }

  /// Parallel success threshold M; meaningless for other kinds.
  int threshold() const { return threshold_; }

  const std::vector<NodePtr>& children() const { return children_; }

  struct Internal {};  // construction goes through the factories
  explicit BtNode(Internal) {}

 private:
  static NodePtr make(NodeKind k, int threshold, Atom a, std::vector<NodePtr> ch) {
    for (const auto& c : ch)
      if (!c) throw std::invalid_argument("null child node");
    auto n = std::make_shared<BtNode>(Internal{});
    n->kind_ = k;
    n->threshold_ = threshold;
    n->atom_ = std::move(a);
    n->children_ = std::move(ch);
    return n;
  }

  NodeKind kind_ = NodeKind::Condition;
  int threshold_ = 0;
  Atom atom_;
  std::vector<NodePtr> children_;
};

/// Child-index route from the root; the empty path addresses the root itself.
using NodePath = std::vector<std::size_t>;

inline std::string to_string(const NodePath& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(p[i]);
  }
  return out + "]";
}

struct Violation {
  NodePath path;
  std::string message;
};

/// Raised by tree edits when a path does not address a node.
struct PathError : std::runtime_error {
  NodePath path;
  std::size_t bad_index_pos;  // offset into path of the first bad index

  PathError(NodePath p, std::size_t pos)
      : std::runtime_error("invalid path " + bts::to_string(p) + ": index #" +
                           std::to_string(pos) + " out of range"),
        path(std::move(p)),
        bad_index_pos(pos) {}
};

/// Raised by tree edits whose result would violate a structural invariant.
struct TreeEditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Returns every violated structural invariant with the offending node's path.
/// Empty result means the tree is valid.
inline std::vector<Violation> validate(const NodePtr& root) {
  std::vector<Violation> out;
  if (!root) {
    out.push_back({{}, "tree is null"});
    return out;
  }
  NodePath path;
  auto walk = [&](auto&& self, const BtNode& n) -> void {
    switch (n.kind()) {
      case NodeKind::Condition:
      case NodeKind::Action:
        if (!n.children().empty())
          out.push_back({path, "leaf node has children"});
        break;
      case NodeKind::Parallel:
        if (n.threshold() < 1 ||
            n.threshold() > static_cast<int>(n.children().size()))
          out.push_back({path, "parallel threshold " + std::to_string(n.threshold()) +
                                   " outside 1.." + std::to_string(n.children().size())});
        [[fallthrough]];
      case NodeKind::Sequence:
      case NodeKind::Fallback:
        if (n.children().empty())
          out.push_back({path, "control node has no children"});
        break;
    }
    for (std::size_t i = 0; i < n.children().size(); ++i) {
      path.push_back(i);
      self(self, *n.children()[i]);
      path.pop_back();
    }
  };
  walk(walk, *root);
  return out;
}

inline std::size_t node_count(const NodePtr& root) {
  std::size_t n = 1;
  for (const auto& c : root->children()) n += node_count(c);
  return n;
}

/// Longest root-to-leaf chain; a lone leaf has depth 1.
inline std::size_t depth(const NodePtr& root) {
  std::size_t best = 0;
  for (const auto& c : root->children()) best = std::max(best, depth(c));
  return 1 + best;
}

inline bool structural_equal(const NodePtr& a, const NodePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind() != b->kind()) return false;
  if (a->is_leaf()) return a->atom() == b->atom();
  if (a->kind() == NodeKind::Parallel && a->threshold() != b->threshold()) return false;
  if (a->children().size() != b->children().size()) return false;
  for (std::size_t i = 0; i < a->children().size(); ++i)
    if (!structural_equal(a->children()[i], b->children()[i])) return false;
  return true;
}

/// All node paths in preorder; front() is the root's empty path.
inline std::vector<NodePath> all_paths(const NodePtr& root) {
  std::vector<NodePath> out;
  NodePath cur;
  auto walk = [&](auto&& self, const BtNode& n) -> void {
    out.push_back(cur);
    for (std::size_t i = 0; i < n.children().size(); ++i) {
      cur.push_back(i);
      self(self, *n.children()[i]);
      cur.pop_back();
    }
  };
  walk(walk, *root);
  return out;
}

inline NodePtr get_subtree(const NodePtr& root, const NodePath& path) {
  NodePtr cur = root;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= cur->children().size()) throw PathError(path, i);
    cur = cur->children()[path[i]];
  }
  return cur;
}

namespace detail {

inline NodePtr rebuild_with_children(const BtNode& n, std::vector<NodePtr> ch) {
  switch (n.kind()) {
    case NodeKind::Sequence: return BtNode::sequence(std::move(ch));
    case NodeKind::Fallback: return BtNode::fallback(std::move(ch));
    case NodeKind::Parallel: return BtNode::parallel(n.threshold(), std::move(ch));
    default: throw TreeEditError("leaf nodes have no children to rebuild");
  }
}

inline NodePtr replace_at(const NodePtr& cur, const NodePath& path, std::size_t pos,
                          const NodePtr& node) {
  if (pos == path.size()) return node;
  if (path[pos] >= cur->children().size()) throw PathError(path, pos);
  auto ch = cur->children();
  ch[path[pos]] = replace_at(ch[path[pos]], path, pos + 1, node);
  return rebuild_with_children(*cur, std::move(ch));
}

inline void require_valid(const NodePtr& root, const char* op) {
  auto violations = validate(root);
  if (!violations.empty())
    throw TreeEditError(std::string(op) + " produced an invalid tree: " +
                        violations.front().message + " at " +
                        bts::to_string(violations.front().path));
}

}  // namespace detail

/// Returns a tree identical to `root` except the node at `path` is `node`.
/// The input tree is never mutated.
inline NodePtr replace_subtree(const NodePtr& root, const NodePath& path, NodePtr node) {
  if (!node) throw std::invalid_argument("replacement node is null");
  NodePtr out = detail::replace_at(root, path, 0, node);
  detail::require_valid(out, "replace_subtree");
  return out;
}

/// Inserts `child` at `index` under the control node addressed by `path`.
inline NodePtr insert_child(const NodePtr& root, const NodePath& path, std::size_t index,
                            NodePtr child) {
  if (!child) throw std::invalid_argument("inserted node is null");
  NodePtr parent = get_subtree(root, path);
  if (parent->is_leaf()) throw TreeEditError("cannot insert a child under a leaf");
  if (index > parent->children().size())
    throw TreeEditError("insert index " + std::to_string(index) + " out of range");
  auto ch = parent->children();
  ch.insert(ch.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
  NodePtr out = detail::replace_at(root, path, 0, detail::rebuild_with_children(*parent, std::move(ch)));
  detail::require_valid(out, "insert_child");
  return out;
}

/// Removes the node at `path` and its subtree. A control node left childless
/// is removed as well, cascading upward; deleting everything is an error.
inline NodePtr delete_node(const NodePtr& root, const NodePath& path) {
  if (path.empty()) throw TreeEditError("cannot delete the entire tree");
  get_subtree(root, path);  // surfaces PathError before any work
  NodePath parent_path = path;
  std::size_t index = parent_path.back();
  parent_path.pop_back();
  for (;;) {
    NodePtr parent = get_subtree(root, parent_path);
    if (parent->children().size() > 1) {
      auto ch = parent->children();
      ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(index));
      NodePtr out = detail::replace_at(root, parent_path, 0,
                                       detail::rebuild_with_children(*parent, std::move(ch)));
      detail::require_valid(out, "delete_node");
      return out;
    }
    // Sole child: the parent empties, so the parent goes too.
    if (parent_path.empty()) throw TreeEditError("cannot delete the entire tree");
    index = parent_path.back();
    parent_path.pop_back();
  }
}

}  // namespace bts
