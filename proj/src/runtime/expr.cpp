#include "cpm/runtime/expr.hpp"

#include <cstdlib>
#include <map>

namespace cpm::rt::expr {

namespace {

int binary_precedence(const std::string& op) {
  static const std::map<std::string, int> table = {
      {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},  {"&", 5},  {"==", 6}, {"!=", 6},
      {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8}, {"+", 9},
      {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10}};
  const auto it = table.find(op);
  return it == table.end() ? -1 : it->second;
}

Value parse_integer(const std::string& lexeme) {
  std::string digits = lexeme;
  while (!digits.empty() && (digits.back() == 'u' || digits.back() == 'U' ||
                             digits.back() == 'l' || digits.back() == 'L')) {
    digits.pop_back();
  }
  if (digits.empty()) throw ExprError("malformed number '" + lexeme + "'");
  char* end = nullptr;
  const long long v = std::strtoll(digits.c_str(), &end, 0);
  if (end != digits.c_str() + digits.size()) {
    throw ExprError("unsupported number literal '" + lexeme + "'");
  }
  return v;
}

std::string unquote(const std::string& lexeme) {
  if (lexeme.size() < 2 || lexeme.back() != lexeme.front()) {
    throw ExprError("unterminated literal " + lexeme);
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
    char c = lexeme[i];
    if (c == '\\' && i + 2 < lexeme.size()) {
      c = lexeme[++i];
      switch (c) {
        case 'n': c = '\n'; break;
        case 't': c = '\t'; break;
        case '0': c = '\0'; break;
        default: break;
      }
    }
    out += c;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  NodePtr parse_all() {
    if (toks_.empty()) throw ExprError("empty expression");
    NodePtr n = conditional();
    if (pos_ != toks_.size()) throw ExprError("unexpected '" + toks_[pos_].lexeme + "'");
    return n;
  }

 private:
  bool at_punct(std::string_view p) const {
    return pos_ < toks_.size() && toks_[pos_].is(TokenKind::kPunctuator, p);
  }
  void expect(std::string_view p) {
    if (!at_punct(p)) {
      throw ExprError("expected '" + std::string(p) + "'" +
                      (pos_ < toks_.size() ? " before '" + toks_[pos_].lexeme + "'" : " at end"));
    }
    ++pos_;
  }

  static NodePtr make(NodeKind kind, std::string text, std::vector<NodePtr> kids = {},
                      Value number = 0) {
    return std::make_shared<const Node>(Node{kind, std::move(text), number, std::move(kids)});
  }

  NodePtr conditional() {
    NodePtr cond = binary(1);
    if (!at_punct("?")) return cond;
    ++pos_;
    NodePtr yes = conditional();
    expect(":");
    NodePtr no = conditional();
    return make(NodeKind::kConditional, "?:", {cond, yes, no});
  }

  NodePtr binary(int min_prec) {
    NodePtr lhs = unary();
    while (pos_ < toks_.size() && toks_[pos_].kind == TokenKind::kPunctuator) {
      const std::string op = toks_[pos_].lexeme;
      const int prec = binary_precedence(op);
      if (prec < min_prec) break;
      ++pos_;
      NodePtr rhs = binary(prec + 1);
      lhs = make(NodeKind::kBinary, op, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr unary() {
    if (pos_ < toks_.size() && toks_[pos_].kind == TokenKind::kPunctuator) {
      const std::string op = toks_[pos_].lexeme;
      if (op == "-" || op == "+" || op == "!" || op == "~") {
        ++pos_;
        return make(NodeKind::kUnary, op, {unary()});
      }
    }
    return primary();
  }

  NodePtr primary() {
    if (pos_ >= toks_.size()) throw ExprError("unexpected end of expression");
    const Token& t = toks_[pos_];
    if (t.is(TokenKind::kPunctuator, "(")) {
      ++pos_;
      NodePtr inner = conditional();
      expect(")");
      return inner;
    }
    if (t.kind == TokenKind::kNumber) {
      ++pos_;
      return make(NodeKind::kNumber, t.lexeme, {}, parse_integer(t.lexeme));
    }
    if (t.kind == TokenKind::kString) {
      ++pos_;
      if (t.lexeme.front() == '\'') {
        const std::string c = unquote(t.lexeme);
        if (c.size() != 1) throw ExprError("unsupported character literal " + t.lexeme);
        return make(NodeKind::kNumber, t.lexeme, {}, static_cast<unsigned char>(c[0]));
      }
      return make(NodeKind::kString, unquote(t.lexeme));
    }
    if (t.kind == TokenKind::kIdentifier) {
      ++pos_;
      if (!at_punct("(")) return make(NodeKind::kIdentifier, t.lexeme);
      ++pos_;
      std::vector<NodePtr> args;
      if (!at_punct(")")) {
        args.push_back(conditional());
        while (at_punct(",")) {
          ++pos_;
          args.push_back(conditional());
        }
      }
      expect(")");
      return make(NodeKind::kCall, t.lexeme, std::move(args));
    }
    throw ExprError("unexpected '" + t.lexeme + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

Value apply_binary(const std::string& op, Value a, Value b) {
  if (op == "+") return a + b;
  if (op == "-") return a - b;
  if (op == "*") return a * b;
  if (op == "/" || op == "%") {
    if (b == 0) throw ExprError("division by zero");
    return op == "/" ? a / b : a % b;
  }
  if (op == "<<") return a << b;
  if (op == ">>") return a >> b;
  if (op == "<") return a < b;
  if (op == ">") return a > b;
  if (op == "<=") return a <= b;
  if (op == ">=") return a >= b;
  if (op == "==") return a == b;
  if (op == "!=") return a != b;
  if (op == "&") return a & b;
  if (op == "^") return a ^ b;
  if (op == "|") return a | b;
  throw ExprError("unsupported operator '" + op + "'");
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::kIdentifier) out.insert(n.text);
  for (const auto& c : n.children) collect(*c, out);
}

}  // namespace

NodePtr parse(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::vector<Token> sig;
  for (std::size_t k = begin; k < end && k < tokens.size(); ++k) {
    if (tokens[k].significant()) sig.push_back(tokens[k]);
  }
  return Parser(std::move(sig)).parse_all();
}

NodePtr parse(std::string_view source) {
  if (source.find('\n') != std::string_view::npos) {
    throw ExprError("expression spans several lines");
  }
  const auto tokens = tokenize_line(source);
  return parse(tokens, 0, tokens.size());
}

Value evaluate(const Node& node, Environment& env) {
  switch (node.kind) {
    case NodeKind::kNumber: return node.number;
    case NodeKind::kString: throw ExprError("string literal used as a number");
    case NodeKind::kIdentifier: return env.identifier(node.text);
    case NodeKind::kCall: return env.call(node.text, node.children);
    case NodeKind::kUnary: {
      const Value v = evaluate(*node.children[0], env);
      if (node.text == "-") return -v;
      if (node.text == "!") return !v;
      if (node.text == "~") return ~v;
      return v;
    }
    case NodeKind::kConditional:
      return evaluate(*node.children[0], env) ? evaluate(*node.children[1], env)
                                              : evaluate(*node.children[2], env);
    case NodeKind::kBinary: {
      if (node.text == "&&") {
        return evaluate(*node.children[0], env) && evaluate(*node.children[1], env);
      }
      if (node.text == "||") {
        return evaluate(*node.children[0], env) || evaluate(*node.children[1], env);
      }
      const Value a = evaluate(*node.children[0], env);
      const Value b = evaluate(*node.children[1], env);
      return apply_binary(node.text, a, b);
    }
  }
  throw ExprError("corrupt expression tree");
}

std::set<std::string> identifiers(const Node& node) {
  std::set<std::string> out;
  collect(node, out);
  return out;
}

std::string to_source(const Node& node) {
  switch (node.kind) {
    case NodeKind::kNumber: return node.text;
    case NodeKind::kString: return "\"" + node.text + "\"";
    case NodeKind::kIdentifier: return node.text;
    case NodeKind::kUnary: return node.text + to_source(*node.children[0]);
    case NodeKind::kConditional:
      return "(" + to_source(*node.children[0]) + " ? " + to_source(*node.children[1]) + " : " +
             to_source(*node.children[2]) + ")";
    case NodeKind::kBinary:
      return "(" + to_source(*node.children[0]) + " " + node.text + " " +
             to_source(*node.children[1]) + ")";
    case NodeKind::kCall: {
      std::string s = node.text + "(";
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) s += ", ";
        s += to_source(*node.children[i]);
      }
      return s + ")";
    }
  }
  return {};
}

}  // namespace cpm::rt::expr
