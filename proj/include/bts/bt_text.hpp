#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bts/bt.hpp"
#include "bts/errors.hpp"

namespace bts {

enum class BtParseKind {
  BadIndent,
  UnknownKeyword,
  BadAtom,
  BadThreshold,
  EmptyControl,
  EmptyInput,
};

inline const char* to_string(BtParseKind k) {
  switch (k) {
    case BtParseKind::BadIndent: return "BAD_INDENT";
    case BtParseKind::UnknownKeyword: return "UNKNOWN_KEYWORD";
    case BtParseKind::BadAtom: return "BAD_ATOM";
    case BtParseKind::BadThreshold: return "BAD_THRESHOLD";
    case BtParseKind::EmptyControl: return "EMPTY_CONTROL";
    default: return "EMPTY_INPUT";
  }
}

struct BtParseError : TextError {
  BtParseKind kind;

  BtParseError(BtParseKind k, int line, int column, const std::string& msg)
      : TextError(line, column, std::string(to_string(k)) + ": " + msg), kind(k) {}
};

namespace detail {

struct BtLine {
  int number = 0;       // 1-based
  std::size_t depth = 0;
  std::string_view text;  // content after the indent
};

// Grammar: IDENT "(" [IDENT ("," IDENT)*] ")", no spaces inside.
inline Atom parse_atom_token(std::string_view s, int line, int col0) {
  auto fail = [&](std::size_t at, const std::string& msg) -> Atom {
    throw BtParseError(BtParseKind::BadAtom, line, col0 + static_cast<int>(at), msg);
  };
  std::size_t open = s.find('(');
  if (open == std::string_view::npos) return fail(s.size(), "expected '(' in atom");
  std::string_view name = s.substr(0, open);
  if (!is_identifier(name)) return fail(0, "bad atom name '" + std::string(name) + "'");
  if (s.back() != ')') return fail(s.size(), "expected ')' at end of atom");
  std::string_view inner = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> args;
  if (!inner.empty()) {
    std::size_t pos = 0;
    for (;;) {
      std::size_t comma = inner.find(',', pos);
      std::string_view tok = inner.substr(pos, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - pos);
      if (!is_identifier(tok))
        return fail(open + 1 + pos, "bad atom argument '" + std::string(tok) + "'");
      args.emplace_back(tok);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return Atom(std::string(name), std::move(args));
}

struct BtParser {
  const std::vector<BtLine>& lines;
  std::size_t pos = 0;

  NodePtr parse_node(std::size_t depth) {
    const BtLine& ln = lines[pos];
    int col = static_cast<int>(2 * ln.depth) + 1;
    std::string_view text = ln.text;
    std::size_t sp = text.find(' ');
    std::string_view kw = text.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : text.substr(sp + 1);
    int rest_col = col + static_cast<int>(sp) + 1;
    ++pos;

    if (kw == "condition" || kw == "action") {
      if (rest.empty())
        throw BtParseError(BtParseKind::BadAtom, ln.number, col, "missing atom after '" + std::string(kw) + "'");
      Atom a = parse_atom_token(rest, ln.number, rest_col);
      NodePtr leaf = kw == "condition" ? BtNode::condition(std::move(a))
                                       : BtNode::action(std::move(a));
      if (pos < lines.size() && lines[pos].depth > depth)
        throw BtParseError(BtParseKind::BadIndent, lines[pos].number,
                           static_cast<int>(2 * lines[pos].depth) + 1,
                           "leaf nodes take no children");
      return leaf;
    }

    int threshold = 0;
    if (kw == "parallel") {
      if (rest.empty())
        throw BtParseError(BtParseKind::BadThreshold, ln.number, col, "missing parallel threshold");
      for (char c : rest)
        if (c < '0' || c > '9')
          throw BtParseError(BtParseKind::BadThreshold, ln.number, rest_col,
                             "bad threshold '" + std::string(rest) + "'");
      threshold = 0;
      for (char c : rest) {
        threshold = threshold * 10 + (c - '0');
        if (threshold > 1000000)
          throw BtParseError(BtParseKind::BadThreshold, ln.number, rest_col, "threshold too large");
      }
      if (threshold < 1)
        throw BtParseError(BtParseKind::BadThreshold, ln.number, rest_col, "threshold must be positive");
    } else if (kw == "sequence" || kw == "fallback") {
      if (!rest.empty())
        throw BtParseError(BtParseKind::UnknownKeyword, ln.number, rest_col,
                           "unexpected text after '" + std::string(kw) + "'");
    } else {
      throw BtParseError(BtParseKind::UnknownKeyword, ln.number, col,
                         "unknown keyword '" + std::string(kw) + "'");
    }

    std::vector<NodePtr> children;
    while (pos < lines.size() && lines[pos].depth > depth) {
      if (lines[pos].depth != depth + 1)
        throw BtParseError(BtParseKind::BadIndent, lines[pos].number,
                           static_cast<int>(2 * lines[pos].depth) + 1,
                           "indent jumps more than one level");
      children.push_back(parse_node(depth + 1));
    }
    if (children.empty())
      throw BtParseError(BtParseKind::EmptyControl, ln.number, col,
                         "'" + std::string(kw) + "' has no children");
    if (kw == "parallel" && threshold > static_cast<int>(children.size()))
      throw BtParseError(BtParseKind::BadThreshold, ln.number, rest_col,
                         "threshold " + std::to_string(threshold) + " exceeds " +
                             std::to_string(children.size()) + " children");
    if (kw == "sequence") return BtNode::sequence(std::move(children));
    if (kw == "fallback") return BtNode::fallback(std::move(children));
    return BtNode::parallel(threshold, std::move(children));
  }
};

}  // namespace detail

/// Parses the line-oriented BT grammar: one node per line, keyword plus
/// payload, children indented by exactly two more spaces than their parent.
/// Throws BtParseError with the position and kind of the first problem.
inline NodePtr parse_bt(std::string_view text) {
  std::vector<detail::BtLine> lines;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    bool last = end == std::string_view::npos;
    std::string_view raw = text.substr(start, last ? text.size() - start : end - start);
    ++number;
    if (last && raw.empty()) break;  // text ended with '\n'
    std::size_t indent = 0;
    while (indent < raw.size() && raw[indent] == ' ') ++indent;
    if (indent < raw.size() && (raw[indent] == '\t' || raw[indent] == '\r'))
      throw BtParseError(BtParseKind::BadIndent, number, static_cast<int>(indent) + 1,
                         "tabs and carriage returns are not allowed");
    if (indent == raw.size()) {
      if (raw.empty()) {
        throw BtParseError(BtParseKind::UnknownKeyword, number, 1, "empty line");
      }
      throw BtParseError(BtParseKind::UnknownKeyword, number, static_cast<int>(indent) + 1,
                         "missing keyword");
    }
    if (indent % 2)
      throw BtParseError(BtParseKind::BadIndent, number, static_cast<int>(indent) + 1,
                         "indent must be a multiple of two spaces");
    lines.push_back({number, indent / 2, raw.substr(indent)});
    if (last) break;
    start = end + 1;
  }
  if (lines.empty())
    throw BtParseError(BtParseKind::EmptyInput, 1, 1, "no nodes in input");
  if (lines.front().depth != 0)
    throw BtParseError(BtParseKind::BadIndent, lines.front().number,
                       static_cast<int>(2 * lines.front().depth) + 1,
                       "root must not be indented");
  detail::BtParser parser{lines};
  NodePtr root = parser.parse_node(0);
  if (parser.pos != lines.size())
    throw BtParseError(BtParseKind::BadIndent, lines[parser.pos].number, 1,
                       "trailing node outside the root tree");
  return root;
}

namespace detail {

inline void require_valid_tree(const NodePtr& root, const char* what) {
  auto violations = validate(root);
  if (!violations.empty())
    throw std::invalid_argument(std::string(what) + ": invalid tree: " +
                                violations.front().message + " at " +
                                bts::to_string(violations.front().path));
}

}  // namespace detail

/// Canonical form: two-space indentation, one node per line, trailing
/// newline. parse_bt(serialize_bt(t)) reproduces t structurally.
inline std::string serialize_bt(const NodePtr& root) {
  detail::require_valid_tree(root, "serialize_bt");
  std::string out;
  auto emit = [&](auto&& self, const BtNode& n, std::size_t depth) -> void {
    out.append(2 * depth, ' ');
    switch (n.kind()) {
      case NodeKind::Sequence: out += "sequence"; break;
      case NodeKind::Fallback: out += "fallback"; break;
      case NodeKind::Parallel:
        out += "parallel ";
        out += std::to_string(n.threshold());
        break;
      case NodeKind::Condition:
        out += "condition ";
        out += to_string(n.atom());
        break;
      case NodeKind::Action:
        out += "action ";
        out += to_string(n.atom());
        break;
    }
    out += '\n';
    for (const auto& c : n.children()) self(self, *c, depth + 1);
  };
  emit(emit, *root, 0);
  return out;
}

/// Graphviz export. Node identifiers derive from paths, so output is
/// deterministic for a given tree.
inline std::string export_dot(const NodePtr& root) {
  detail::require_valid_tree(root, "export_dot");
  std::string nodes, edges;
  auto id_of = [](const NodePath& p) {
    std::string id = "n";
    for (std::size_t i : p) id += "_" + std::to_string(i);
    return id;
  };
  NodePath path;
  auto walk = [&](auto&& self, const BtNode& n) -> void {
    std::string id = id_of(path);
    std::string label, shape;
    switch (n.kind()) {
      case NodeKind::Sequence: label = "→"; shape = "box"; break;
      case NodeKind::Fallback: label = "?"; shape = "box"; break;
      case NodeKind::Parallel:
        label = "⇉" + std::to_string(n.threshold());
        shape = "box";
        break;
      case NodeKind::Condition: label = to_string(n.atom()) + "?"; shape = "ellipse"; break;
      case NodeKind::Action: label = to_string(n.atom()) + "!"; shape = "box"; break;
    }
    nodes += "  " + id + " [shape=" + shape + ", label=\"" + label + "\"];\n";
    for (std::size_t i = 0; i < n.children().size(); ++i) {
      path.push_back(i);
      edges += "  " + id + " -> " + id_of(path) + ";\n";
      self(self, *n.children()[i]);
      path.pop_back();
    }
  };
  walk(walk, *root);
  return "digraph bt {\n" + nodes + edges + "}\n";
}

}  // namespace bts
