#pragma once

// Abstract syntax, parser, printer and scope checker for prioritized
// asynchronous programs (.ap files).
//
//   program  := "global" IDENT ";" method+
//   method   := "meth" IDENT "(" IDENT ")" block
//   block    := "{" stmt* "}"
//   stmt     := IDENT ":=" expr ";" | "provided" expr ";"
//             | "if" expr block "else" block | "while" expr block
//             | "run" IDENT "(" expr ")" ";" | "return" "(" ")" ";"
//             | "synch" "(" IDENT "(" expr ")" "," prio ")" ";"
//   prio     := "high" | "medium" | "low"
//
// Expression precedence, loosest first: or, and, == !=, < <= > >=, + -,
// * / %, unary - !.

#include <cctype>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace asynchp {

enum class Priority : std::uint8_t { high = 1, medium = 2, low = 3 };

inline constexpr int rank(Priority p) { return static_cast<int>(p); }

inline constexpr std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::high: return "high";
    case Priority::medium: return "medium";
    case Priority::low: return "low";
  }
  return "?";
}

inline std::optional<Priority> priority_from_string(std::string_view s) {
  if (s == "high") return Priority::high;
  if (s == "medium") return Priority::medium;
  if (s == "low") return Priority::low;
  return std::nullopt;
}

// 1-based source position. {0,0} marks a synthesized node.
struct Pos {
  int line = 0;
  int col = 0;
};

inline std::string to_string(Pos p) {
  return std::to_string(p.line) + ":" + std::to_string(p.col);
}

// ---------------------------------------------------------------------------
// Expressions

enum class UnaryOp : std::uint8_t { negate, logical_not };

enum class BinaryOp : std::uint8_t {
  add, sub, mul, div, mod,
  eq, ne, lt, le, gt, ge,
  logical_and, logical_or,
};

inline constexpr std::string_view to_string(UnaryOp op) {
  return op == UnaryOp::negate ? "-" : "!";
}

inline constexpr std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::mod: return "%";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::logical_and: return "and";
    case BinaryOp::logical_or: return "or";
  }
  return "?";
}

// Binding strength used by both the parser and the printer.
inline constexpr int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::logical_or: return 1;
    case BinaryOp::logical_and: return 2;
    case BinaryOp::eq: case BinaryOp::ne: return 3;
    case BinaryOp::lt: case BinaryOp::le:
    case BinaryOp::gt: case BinaryOp::ge: return 4;
    case BinaryOp::add: case BinaryOp::sub: return 5;
    case BinaryOp::mul: case BinaryOp::div: case BinaryOp::mod: return 6;
  }
  return 0;
}
inline constexpr int kUnaryPrecedence = 7;
inline constexpr int kAtomPrecedence = 8;

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct IntLit {
  std::int64_t value = 0;
};
struct Var {
  std::string name;
};
struct Unary {
  UnaryOp op;
  ExprRef operand;
};
struct Binary {
  BinaryOp op;
  ExprRef left;
  ExprRef right;
};

// Trees are immutable once built and children are shared, so copying an
// Expr is cheap. Equality is structural and ignores positions.
struct Expr {
  Pos pos;
  std::variant<IntLit, Var, Unary, Binary> node;

  friend bool operator==(const Expr& a, const Expr& b);
};

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* x = std::get_if<IntLit>(&a.node)) return x->value == std::get<IntLit>(b.node).value;
  if (auto* x = std::get_if<Var>(&a.node)) return x->name == std::get<Var>(b.node).name;
  if (auto* x = std::get_if<Unary>(&a.node)) {
    const auto& y = std::get<Unary>(b.node);
    return x->op == y.op && *x->operand == *y.operand;
  }
  const auto& x = std::get<Binary>(a.node);
  const auto& y = std::get<Binary>(b.node);
  return x.op == y.op && *x.left == *y.left && *x.right == *y.right;
}

inline ExprRef make_int(std::int64_t v, Pos p = {}) {
  return std::make_shared<const Expr>(Expr{p, IntLit{v}});
}
inline ExprRef make_var(std::string name, Pos p = {}) {
  return std::make_shared<const Expr>(Expr{p, Var{std::move(name)}});
}
inline ExprRef make_unary(UnaryOp op, ExprRef e, Pos p = {}) {
  return std::make_shared<const Expr>(Expr{p, Unary{op, std::move(e)}});
}
inline ExprRef make_binary(BinaryOp op, ExprRef l, ExprRef r, Pos p = {}) {
  return std::make_shared<const Expr>(Expr{p, Binary{op, std::move(l), std::move(r)}});
}

// ---------------------------------------------------------------------------
// Statements

struct Stmt;
using StmtRef = std::shared_ptr<const Stmt>;

struct Seq {
  std::vector<Stmt> body;
};
struct AssignGlobal {
  std::string name;
  ExprRef value;
};
struct AssignLocal {
  std::string name;
  ExprRef value;
};
struct Provided {
  ExprRef cond;
};
struct If {
  ExprRef cond;
  StmtRef then_branch;
  StmtRef else_branch;
};
struct While {
  ExprRef cond;
  StmtRef body;
};
struct Run {
  std::string method;
  ExprRef arg;
};
struct Return {};
struct Synch {
  std::string method;
  ExprRef arg;
  Priority priority;
};

struct Stmt {
  Pos pos;
  std::variant<Seq, AssignGlobal, AssignLocal, Provided, If, While, Run, Return, Synch> node;

  friend bool operator==(const Stmt& a, const Stmt& b);
};

inline bool operator==(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Seq>) {
          return x.body == y.body;
        } else if constexpr (std::is_same_v<T, AssignGlobal> || std::is_same_v<T, AssignLocal>) {
          return x.name == y.name && *x.value == *y.value;
        } else if constexpr (std::is_same_v<T, Provided>) {
          return *x.cond == *y.cond;
        } else if constexpr (std::is_same_v<T, If>) {
          return *x.cond == *y.cond && *x.then_branch == *y.then_branch &&
                 *x.else_branch == *y.else_branch;
        } else if constexpr (std::is_same_v<T, While>) {
          return *x.cond == *y.cond && *x.body == *y.body;
        } else if constexpr (std::is_same_v<T, Run>) {
          return x.method == y.method && *x.arg == *y.arg;
        } else if constexpr (std::is_same_v<T, Return>) {
          return true;
        } else {
          return x.method == y.method && x.priority == y.priority && *x.arg == *y.arg;
        }
      },
      a.node);
}

struct Method {
  Pos pos;
  std::string name;
  std::string local;
  Stmt body;  // always a Seq when produced by the parser

  friend bool operator==(const Method& a, const Method& b) {
    return a.name == b.name && a.local == b.local && a.body == b.body;
  }
};

struct Program {
  std::string global;
  std::vector<Method> methods;

  const Method* find_method(std::string_view name) const {
    for (const auto& m : methods)
      if (m.name == name) return &m;
    return nullptr;
  }

  friend bool operator==(const Program& a, const Program& b) {
    return a.global == b.global && a.methods == b.methods;
  }
};

// ---------------------------------------------------------------------------
// Errors

class ParseError : public std::runtime_error {
 public:
  ParseError(Pos where, std::vector<std::string> expected, std::string found)
      : std::runtime_error(render(where, expected, found)),
        where_(where),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  // Free-form diagnostic (bad character, literal out of range, ...).
  ParseError(Pos where, const std::string& message)
      : std::runtime_error(to_string(where) + " " + message), where_(where) {}

  Pos where() const { return where_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  static std::string render(Pos where, const std::vector<std::string>& expected,
                            const std::string& found) {
    std::string out = to_string(where) + " expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) out += i + 1 == expected.size() ? " or " : ", ";
      out += expected[i];
    }
    if (!found.empty()) out += ", found " + found;
    return out;
  }

  Pos where_;
  std::vector<std::string> expected_;
  std::string found_;
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok : std::uint8_t {
  end, ident, integer,
  kw_global, kw_meth, kw_provided, kw_if, kw_else, kw_while, kw_run,
  kw_return, kw_synch, kw_high, kw_medium, kw_low, kw_and, kw_or,
  semi, comma, lparen, rparen, lbrace, rbrace, assign,
  plus, minus, star, slash, percent, bang,
  eq, ne, lt, le, gt, ge,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  Pos pos;
};

inline std::optional<Tok> keyword(std::string_view s) {
  static constexpr std::pair<std::string_view, Tok> table[] = {
      {"global", Tok::kw_global}, {"meth", Tok::kw_meth},
      {"provided", Tok::kw_provided}, {"if", Tok::kw_if},
      {"else", Tok::kw_else}, {"while", Tok::kw_while},
      {"run", Tok::kw_run}, {"return", Tok::kw_return},
      {"synch", Tok::kw_synch}, {"high", Tok::kw_high},
      {"medium", Tok::kw_medium}, {"low", Tok::kw_low},
      {"and", Tok::kw_and}, {"or", Tok::kw_or},
  };
  for (auto [word, tok] : table)
    if (word == s) return tok;
  return std::nullopt;
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident_start = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  };
  auto is_ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Pos start{line, col};
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      advance(j - i);
      auto kw = keyword(word);
      out.push_back({kw.value_or(Tok::ident), std::move(word), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string digits(src.substr(i, j - i));
      advance(j - i);
      out.push_back({Tok::integer, std::move(digits), start});
      continue;
    }
    auto two = src.substr(i, 2);
    Tok kind;
    std::size_t len = 2;
    if (two == ":=") kind = Tok::assign;
    else if (two == "==") kind = Tok::eq;
    else if (two == "!=") kind = Tok::ne;
    else if (two == "<=") kind = Tok::le;
    else if (two == ">=") kind = Tok::ge;
    else {
      len = 1;
      switch (c) {
        case ';': kind = Tok::semi; break;
        case ',': kind = Tok::comma; break;
        case '(': kind = Tok::lparen; break;
        case ')': kind = Tok::rparen; break;
        case '{': kind = Tok::lbrace; break;
        case '}': kind = Tok::rbrace; break;
        case '+': kind = Tok::plus; break;
        case '-': kind = Tok::minus; break;
        case '*': kind = Tok::star; break;
        case '/': kind = Tok::slash; break;
        case '%': kind = Tok::percent; break;
        case '!': kind = Tok::bang; break;
        case '<': kind = Tok::lt; break;
        case '>': kind = Tok::gt; break;
        default: {
          std::ostringstream msg;
          if (std::isprint(static_cast<unsigned char>(c)))
            msg << "unexpected character '" << c << "'";
          else
            msg << "unexpected byte 0x" << std::hex << (static_cast<unsigned>(c) & 0xff);
          throw ParseError(start, msg.str());
        }
      }
    }
    out.push_back({kind, std::string(src.substr(i, len)), start});
    advance(len);
  }
  out.push_back({Tok::end, "", {line, col}});
  return out;
}

inline std::optional<BinaryOp> binary_op(Tok t) {
  switch (t) {
    case Tok::plus: return BinaryOp::add;
    case Tok::minus: return BinaryOp::sub;
    case Tok::star: return BinaryOp::mul;
    case Tok::slash: return BinaryOp::div;
    case Tok::percent: return BinaryOp::mod;
    case Tok::eq: return BinaryOp::eq;
    case Tok::ne: return BinaryOp::ne;
    case Tok::lt: return BinaryOp::lt;
    case Tok::le: return BinaryOp::le;
    case Tok::gt: return BinaryOp::gt;
    case Tok::ge: return BinaryOp::ge;
    case Tok::kw_and: return BinaryOp::logical_and;
    case Tok::kw_or: return BinaryOp::logical_or;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  // Blocks and parenthesized expressions nest at most this deep.
  static constexpr int kMaxDepth = 200;

  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Program program() {
    Program p;
    expect(Tok::kw_global, "'global'");
    p.global = expect(Tok::ident, "identifier").text;
    expect(Tok::semi, "';'");
    if (peek().kind != Tok::kw_meth) fail({"'meth'"});
    while (peek().kind == Tok::kw_meth) p.methods.push_back(method(p.global));
    if (peek().kind != Tok::end) fail({"'meth'", "end of input"});
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::end) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.pos, std::move(expected), std::move(found));
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail({what});
    return take();
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) throw ParseError(p.peek().pos, "nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  Method method(const std::string& global) {
    Method m;
    m.pos = expect(Tok::kw_meth, "'meth'").pos;
    m.name = expect(Tok::ident, "method name").text;
    expect(Tok::lparen, "'('");
    m.local = expect(Tok::ident, "local variable name").text;
    expect(Tok::rparen, "')'");
    m.body = block(global);
    return m;
  }

  Stmt block(const std::string& global) {
    DepthGuard guard(*this);
    Stmt s{expect(Tok::lbrace, "'{'").pos, Seq{}};
    auto& seq = std::get<Seq>(s.node);
    while (peek().kind != Tok::rbrace) seq.body.push_back(statement(global));
    take();
    return s;
  }

  StmtRef block_ref(const std::string& global) {
    return std::make_shared<const Stmt>(block(global));
  }

  Stmt statement(const std::string& global) {
    const Token& t = peek();
    Pos at = t.pos;
    switch (t.kind) {
      case Tok::ident: {
        std::string name = take().text;
        expect(Tok::assign, "':='");
        ExprRef e = expr();
        expect(Tok::semi, "';'");
        if (name == global) return {at, AssignGlobal{std::move(name), std::move(e)}};
        return {at, AssignLocal{std::move(name), std::move(e)}};
      }
      case Tok::kw_provided: {
        take();
        ExprRef e = expr();
        expect(Tok::semi, "';'");
        return {at, Provided{std::move(e)}};
      }
      case Tok::kw_if: {
        take();
        ExprRef c = expr();
        StmtRef then_branch = block_ref(global);
        expect(Tok::kw_else, "'else'");
        StmtRef else_branch = block_ref(global);
        return {at, If{std::move(c), std::move(then_branch), std::move(else_branch)}};
      }
      case Tok::kw_while: {
        take();
        ExprRef c = expr();
        return {at, While{std::move(c), block_ref(global)}};
      }
      case Tok::kw_run: {
        take();
        std::string name = expect(Tok::ident, "method name").text;
        expect(Tok::lparen, "'('");
        ExprRef arg = expr();
        expect(Tok::rparen, "')'");
        expect(Tok::semi, "';'");
        return {at, Run{std::move(name), std::move(arg)}};
      }
      case Tok::kw_return: {
        take();
        expect(Tok::lparen, "'('");
        expect(Tok::rparen, "')'");
        expect(Tok::semi, "';'");
        return {at, Return{}};
      }
      case Tok::kw_synch: {
        take();
        expect(Tok::lparen, "'('");
        std::string name = expect(Tok::ident, "method name").text;
        expect(Tok::lparen, "'('");
        ExprRef arg = expr();
        expect(Tok::rparen, "')'");
        expect(Tok::comma, "','");
        Priority prio;
        switch (peek().kind) {
          case Tok::kw_high: prio = Priority::high; break;
          case Tok::kw_medium: prio = Priority::medium; break;
          case Tok::kw_low: prio = Priority::low; break;
          default: fail({"'high'", "'medium'", "'low'"});
        }
        take();
        expect(Tok::rparen, "')'");
        expect(Tok::semi, "';'");
        return {at, Synch{std::move(name), std::move(arg), prio}};
      }
      default:
        fail({"'}'", "statement"});
    }
  }

  ExprRef expr(int min_prec = 1) {
    ExprRef lhs = unary();
    for (;;) {
      auto op = binary_op(peek().kind);
      if (!op || precedence(*op) < min_prec) return lhs;
      Pos at = take().pos;
      ExprRef rhs = expr(precedence(*op) + 1);
      lhs = make_binary(*op, std::move(lhs), std::move(rhs), at);
    }
  }

  ExprRef unary() {
    const Token& t = peek();
    if (t.kind == Tok::minus || t.kind == Tok::bang) {
      DepthGuard guard(*this);
      Pos at = take().pos;
      UnaryOp op = t.kind == Tok::minus ? UnaryOp::negate : UnaryOp::logical_not;
      return make_unary(op, unary(), at);
    }
    return atom();
  }

  ExprRef atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::integer: {
        Pos at = t.pos;
        std::int64_t v = 0;
        for (char d : t.text) {
          if (v > (std::numeric_limits<std::int64_t>::max() - (d - '0')) / 10)
            throw ParseError(at, "integer literal out of range");
          v = v * 10 + (d - '0');
        }
        take();
        return make_int(v, at);
      }
      case Tok::ident: {
        Pos at = t.pos;
        return make_var(take().text, at);
      }
      case Tok::lparen: {
        DepthGuard guard(*this);
        take();
        ExprRef e = expr();
        expect(Tok::rparen, "')'");
        return e;
      }
      default:
        fail({"expression"});
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace detail

// Parses a complete program. Throws ParseError on any syntax violation.
inline Program parse_program(std::string_view source) {
  return detail::Parser(source).program();
}

// ---------------------------------------------------------------------------
// Printer

namespace detail {

inline void print_expr(std::ostream& os, const Expr& e, int context_prec) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          os << n.value;
        } else if constexpr (std::is_same_v<T, Var>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, Unary>) {
          bool parens = context_prec > kUnaryPrecedence;
          if (parens) os << '(';
          os << to_string(n.op);
          print_expr(os, *n.operand, kUnaryPrecedence);
          if (parens) os << ')';
        } else {
          int prec = precedence(n.op);
          bool parens = context_prec > prec;
          if (parens) os << '(';
          // Left-associative: the right operand needs parens at equal strength.
          print_expr(os, *n.left, prec);
          os << ' ' << to_string(n.op) << ' ';
          print_expr(os, *n.right, prec + 1);
          if (parens) os << ')';
        }
      },
      e.node);
}

inline void print_block(std::ostream& os, const Stmt& s, int indent);

inline void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          // Bare blocks are not statements; print the body inline.
          for (const auto& child : n.body) print_stmt(os, child, indent);
        } else if constexpr (std::is_same_v<T, AssignGlobal> || std::is_same_v<T, AssignLocal>) {
          os << pad << n.name << " := ";
          print_expr(os, *n.value, 0);
          os << ";\n";
        } else if constexpr (std::is_same_v<T, Provided>) {
          os << pad << "provided ";
          print_expr(os, *n.cond, 0);
          os << ";\n";
        } else if constexpr (std::is_same_v<T, If>) {
          os << pad << "if ";
          print_expr(os, *n.cond, 0);
          os << ' ';
          print_block(os, *n.then_branch, indent);
          os << " else ";
          print_block(os, *n.else_branch, indent);
          os << '\n';
        } else if constexpr (std::is_same_v<T, While>) {
          os << pad << "while ";
          print_expr(os, *n.cond, 0);
          os << ' ';
          print_block(os, *n.body, indent);
          os << '\n';
        } else if constexpr (std::is_same_v<T, Run>) {
          os << pad << "run " << n.method << '(';
          print_expr(os, *n.arg, 0);
          os << ");\n";
        } else if constexpr (std::is_same_v<T, Return>) {
          os << pad << "return();\n";
        } else {
          os << pad << "synch(" << n.method << '(';
          print_expr(os, *n.arg, 0);
          os << "), " << to_string(n.priority) << ");\n";
        }
      },
      s.node);
}

inline void print_block(std::ostream& os, const Stmt& s, int indent) {
  const auto* seq = std::get_if<Seq>(&s.node);
  if (seq && seq->body.empty()) {
    os << "{}";
    return;
  }
  os << "{\n";
  print_stmt(os, s, indent + 1);
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << '}';
}

}  // namespace detail

inline std::string to_source(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, 0);
  return os.str();
}

// Canonical text. Reparsing it yields a structurally equal program for any
// program in the parser's image (non-negative literals, Seq-only blocks).
inline std::string pretty_print(const Program& p) {
  std::ostringstream os;
  os << "global " << p.global << ";\n";
  for (const auto& m : p.methods) {
    os << "\nmeth " << m.name << '(' << m.local << ") ";
    detail::print_block(os, m.body, 0);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Scope validation

enum class ScopeErrorKind : std::uint8_t {
  unknown_variable,
  unknown_method,
  global_local_clash,
  duplicate_method,
};

inline constexpr std::string_view to_string(ScopeErrorKind k) {
  switch (k) {
    case ScopeErrorKind::unknown_variable: return "unknown-variable";
    case ScopeErrorKind::unknown_method: return "unknown-method";
    case ScopeErrorKind::global_local_clash: return "global-local-clash";
    case ScopeErrorKind::duplicate_method: return "duplicate-method";
  }
  return "?";
}

struct ScopeError {
  ScopeErrorKind kind;
  std::string name;
  Pos where;

  std::string message() const {
    return to_string(where) + " " + std::string(to_string(kind)) + " '" + name + "'";
  }
};

namespace detail {

class ScopeChecker {
 public:
  explicit ScopeChecker(const Program& p) : program_(p) {
    for (const auto& m : p.methods) names_.insert(m.name);
  }

  std::vector<ScopeError> run() {
    std::set<std::string, std::less<>> seen;
    for (const auto& m : program_.methods) {
      if (!seen.insert(m.name).second)
        errors_.push_back({ScopeErrorKind::duplicate_method, m.name, m.pos});
      if (m.local == program_.global)
        errors_.push_back({ScopeErrorKind::global_local_clash, m.local, m.pos});
      local_ = &m.local;
      stmt(m.body);
    }
    return std::move(errors_);
  }

 private:
  void expr(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Var>) {
            if (n.name != program_.global && n.name != *local_)
              errors_.push_back({ScopeErrorKind::unknown_variable, n.name, e.pos});
          } else if constexpr (std::is_same_v<T, Unary>) {
            expr(*n.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            expr(*n.left);
            expr(*n.right);
          }
        },
        e.node);
  }

  void target(const std::string& name, Pos at) {
    if (!names_.contains(name)) errors_.push_back({ScopeErrorKind::unknown_method, name, at});
  }

  void stmt(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Seq>) {
            for (const auto& child : n.body) stmt(child);
          } else if constexpr (std::is_same_v<T, AssignGlobal>) {
            if (n.name != program_.global)
              errors_.push_back({ScopeErrorKind::unknown_variable, n.name, s.pos});
            expr(*n.value);
          } else if constexpr (std::is_same_v<T, AssignLocal>) {
            if (n.name != *local_)
              errors_.push_back({ScopeErrorKind::unknown_variable, n.name, s.pos});
            expr(*n.value);
          } else if constexpr (std::is_same_v<T, Provided>) {
            expr(*n.cond);
          } else if constexpr (std::is_same_v<T, If>) {
            expr(*n.cond);
            stmt(*n.then_branch);
            stmt(*n.else_branch);
          } else if constexpr (std::is_same_v<T, While>) {
            expr(*n.cond);
            stmt(*n.body);
          } else if constexpr (std::is_same_v<T, Run> || std::is_same_v<T, Synch>) {
            target(n.method, s.pos);
            expr(*n.arg);
          }
        },
        s.node);
  }

  const Program& program_;
  std::set<std::string, std::less<>> names_;
  const std::string* local_ = nullptr;
  std::vector<ScopeError> errors_;
};

}  // namespace detail

// Returns every scope violation in source order; empty means the program is
// well scoped.
inline std::vector<ScopeError> validate_scopes(const Program& p) {
  return detail::ScopeChecker(p).run();
}

}  // namespace asynchp
