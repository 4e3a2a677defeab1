#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gi/minilang.hpp"

namespace gi {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

enum class Tok {
  End,
  Ident,
  Int,
  // keywords
  Fn,
  Let,
  If,
  Else,
  While,
  For,
  Break,
  Continue,
  Return,
  True,
  False,
  KwInt,
  KwBool,
  KwVoid,
  // punctuation
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Arrow,
  Assign,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Bang,
  AndAnd,
  OrOr,
};

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  int line = 1;
  int column = 1;
};

Tok keyword_or_ident(std::string_view word) {
  static constexpr std::pair<std::string_view, Tok> kKeywords[] = {
      {"fn", Tok::Fn},         {"let", Tok::Let},       {"if", Tok::If},
      {"else", Tok::Else},     {"while", Tok::While},   {"for", Tok::For},
      {"break", Tok::Break},   {"continue", Tok::Continue},
      {"return", Tok::Return}, {"true", Tok::True},     {"false", Tok::False},
      {"int", Tok::KwInt},     {"bool", Tok::KwBool},   {"void", Tok::KwVoid},
  };
  for (const auto& [text, kind] : kKeywords) {
    if (text == word) return kind;
  }
  return Tok::Ident;
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const int start_line = line;
      const int start_col = col;
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw ParseError(start_line, start_col, "unterminated comment");
      advance(2);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      tok.text = src.substr(start, j - start);
      tok.kind = keyword_or_ident(tok.text);
      advance(j - i);
      out.push_back(tok);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.text = src.substr(start, j - start);
      tok.kind = Tok::Int;
      advance(j - i);
      out.push_back(tok);
      continue;
    }
    auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
    std::size_t len = 1;
    switch (c) {
      case '(': tok.kind = Tok::LParen; break;
      case ')': tok.kind = Tok::RParen; break;
      case '{': tok.kind = Tok::LBrace; break;
      case '}': tok.kind = Tok::RBrace; break;
      case '[': tok.kind = Tok::LBracket; break;
      case ']': tok.kind = Tok::RBracket; break;
      case ',': tok.kind = Tok::Comma; break;
      case ';': tok.kind = Tok::Semi; break;
      case ':': tok.kind = Tok::Colon; break;
      case '+': tok.kind = Tok::Plus; break;
      case '*': tok.kind = Tok::Star; break;
      case '/': tok.kind = Tok::Slash; break;
      case '%': tok.kind = Tok::Percent; break;
      case '-':
        if (two('>')) {
          tok.kind = Tok::Arrow;
          len = 2;
        } else {
          tok.kind = Tok::Minus;
        }
        break;
      case '=':
        if (two('=')) {
          tok.kind = Tok::EqEq;
          len = 2;
        } else {
          tok.kind = Tok::Assign;
        }
        break;
      case '!':
        if (two('=')) {
          tok.kind = Tok::NotEq;
          len = 2;
        } else {
          tok.kind = Tok::Bang;
        }
        break;
      case '<':
        if (two('=')) {
          tok.kind = Tok::Le;
          len = 2;
        } else {
          tok.kind = Tok::Lt;
        }
        break;
      case '>':
        if (two('=')) {
          tok.kind = Tok::Ge;
          len = 2;
        } else {
          tok.kind = Tok::Gt;
        }
        break;
      case '&':
        if (!two('&')) throw ParseError(line, col, "unexpected character '&'");
        tok.kind = Tok::AndAnd;
        len = 2;
        break;
      case '|':
        if (!two('|')) throw ParseError(line, col, "unexpected character '|'");
        tok.kind = Tok::OrOr;
        len = 2;
        break;
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    tok.text = src.substr(start, len);
    advance(len);
    out.push_back(tok);
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

int binary_precedence(Tok t) {
  switch (t) {
    case Tok::OrOr: return 1;
    case Tok::AndAnd: return 2;
    case Tok::EqEq:
    case Tok::NotEq: return 3;
    case Tok::Lt:
    case Tok::Le:
    case Tok::Gt:
    case Tok::Ge: return 4;
    case Tok::Plus:
    case Tok::Minus: return 5;
    case Tok::Star:
    case Tok::Slash:
    case Tok::Percent: return 6;
    default: return 0;
  }
}

Op binary_op(Tok t) {
  switch (t) {
    case Tok::OrOr: return Op::Or;
    case Tok::AndAnd: return Op::And;
    case Tok::EqEq: return Op::Eq;
    case Tok::NotEq: return Op::Ne;
    case Tok::Lt: return Op::Lt;
    case Tok::Le: return Op::Le;
    case Tok::Gt: return Op::Gt;
    case Tok::Ge: return Op::Ge;
    case Tok::Plus: return Op::Add;
    case Tok::Minus: return Op::Sub;
    case Tok::Star: return Op::Mul;
    case Tok::Slash: return Op::Div;
    default: return Op::Mod;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  std::vector<Function> program() {
    std::vector<Function> fns;
    while (!at(Tok::End)) fns.push_back(function());
    return fns;
  }

  Stmt standalone_block() {
    Stmt b = block();
    expect(Tok::End, "end of input");
    return b;
  }

  Expr standalone_expr() {
    Expr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + std::string(t.text) + "'";
    throw ParseError(t.line, t.column, "expected " + what + " but found " + found);
  }

  const Token& expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return next();
  }

  std::string ident(const std::string& what) { return std::string(expect(Tok::Ident, what).text); }

  Type type() {
    if (accept(Tok::KwBool)) return Type::Bool;
    if (accept(Tok::KwVoid)) return Type::Void;
    if (accept(Tok::KwInt)) {
      if (accept(Tok::LBracket)) {
        expect(Tok::RBracket, "']'");
        return Type::IntArray;
      }
      return Type::Int;
    }
    fail("a type");
  }

  Function function() {
    expect(Tok::Fn, "'fn'");
    Function fn;
    fn.name = ident("function name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      do {
        Param p;
        p.name = ident("parameter name");
        expect(Tok::Colon, "':'");
        p.type = type();
        if (p.type == Type::Void) fail("a non-void parameter type");
        fn.params.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    if (accept(Tok::Arrow)) fn.return_type = type();
    fn.body = block();
    return fn;
  }

  Stmt block() {
    expect(Tok::LBrace, "'{'");
    Stmt b = Stmt::block();
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail("'}'");
      b.children.push_back(statement());
    }
    next();
    return b;
  }

  Stmt statement() {
    switch (peek().kind) {
      case Tok::LBrace: return block();
      case Tok::If: return if_statement();
      case Tok::While: {
        next();
        Stmt s;
        s.kind = Stmt::Kind::While;
        expect(Tok::LParen, "'('");
        s.expr = expr();
        expect(Tok::RParen, "')'");
        s.children.push_back(block());
        return s;
      }
      case Tok::For: return for_statement();
      case Tok::Break:
      case Tok::Continue: {
        const Stmt::Kind k = next().kind == Tok::Break ? Stmt::Kind::Break : Stmt::Kind::Continue;
        expect(Tok::Semi, "';'");
        return Stmt::jump(k);
      }
      case Tok::Return: {
        next();
        std::optional<Expr> value;
        if (!at(Tok::Semi)) {
          if (at(Tok::RBrace) || at(Tok::End)) fail("';'");
          value = expr();
        }
        expect(Tok::Semi, "';'");
        return Stmt::return_stmt(std::move(value));
      }
      default: {
        Stmt s = simple_statement();
        expect(Tok::Semi, "';'");
        return s;
      }
    }
  }

  Stmt if_statement() {
    expect(Tok::If, "'if'");
    Stmt s;
    s.kind = Stmt::Kind::If;
    expect(Tok::LParen, "'('");
    s.expr = expr();
    expect(Tok::RParen, "')'");
    s.children.push_back(block());
    if (accept(Tok::Else)) {
      if (at(Tok::If)) {
        s.children.push_back(if_statement());
      } else {
        s.children.push_back(block());
      }
    }
    return s;
  }

  Stmt for_statement() {
    expect(Tok::For, "'for'");
    Stmt s;
    s.kind = Stmt::Kind::For;
    expect(Tok::LParen, "'('");
    if (!at(Tok::Semi)) s.init.push_back(simple_statement());
    expect(Tok::Semi, "';'");
    if (!at(Tok::Semi)) s.expr = expr();
    expect(Tok::Semi, "';'");
    if (!at(Tok::RParen)) {
      if (at(Tok::Let)) fail("an assignment or expression");
      s.update.push_back(simple_statement());
    }
    expect(Tok::RParen, "')'");
    s.children.push_back(block());
    return s;
  }

  // let-declaration, assignment or expression, without the trailing ';'.
  Stmt simple_statement() {
    Stmt s;
    if (accept(Tok::Let)) {
      s.kind = Stmt::Kind::Let;
      s.name = ident("variable name");
      if (accept(Tok::Colon)) {
        s.declared_type = type();
        if (*s.declared_type == Type::Void) fail("a non-void variable type");
      }
      expect(Tok::Assign, "'='");
      s.expr = expr();
      return s;
    }
    Expr e = expr();
    if (accept(Tok::Assign)) {
      s.kind = Stmt::Kind::Assign;
      if (e.kind == Expr::Kind::Var) {
        s.name = e.name;
      } else if (e.kind == Expr::Kind::Index && e.operands[0].kind == Expr::Kind::Var) {
        s.name = e.operands[0].name;
        s.index = std::move(e.operands[1]);
      } else {
        const Token& t = toks_[pos_ - 1];
        throw ParseError(t.line, t.column, "invalid assignment target");
      }
      s.expr = expr();
      return s;
    }
    s.kind = Stmt::Kind::ExprStmt;
    s.expr = std::move(e);
    return s;
  }

  Expr expr(int min_prec = 1) {
    Expr lhs = unary();
    while (true) {
      const int prec = binary_precedence(peek().kind);
      if (prec == 0 || prec < min_prec) break;
      const Op op = binary_op(next().kind);
      Expr rhs = expr(prec + 1);
      Expr b;
      b.kind = Expr::Kind::Binary;
      b.op = op;
      b.operands.push_back(std::move(lhs));
      b.operands.push_back(std::move(rhs));
      lhs = std::move(b);
    }
    return lhs;
  }

  Expr unary() {
    if (at(Tok::Minus) || at(Tok::Bang)) {
      const Op op = next().kind == Tok::Minus ? Op::Neg : Op::Not;
      Expr u;
      u.kind = Expr::Kind::Unary;
      u.op = op;
      u.operands.push_back(unary());
      return u;
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (accept(Tok::LBracket)) {
      Expr idx;
      idx.kind = Expr::Kind::Index;
      idx.operands.push_back(std::move(e));
      idx.operands.push_back(expr());
      expect(Tok::RBracket, "']'");
      e = std::move(idx);
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        next();
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
          throw ParseError(t.line, t.column, "integer literal out of range");
        }
        return Expr::int_lit(v);
      }
      case Tok::True:
        next();
        return Expr::bool_lit(true);
      case Tok::False:
        next();
        return Expr::bool_lit(false);
      case Tok::Ident: {
        next();
        if (accept(Tok::LParen)) {
          Expr call;
          call.kind = Expr::Kind::Call;
          call.name = std::string(t.text);
          if (!at(Tok::RParen)) {
            do {
              call.operands.push_back(expr());
            } while (accept(Tok::Comma));
          }
          expect(Tok::RParen, "')'");
          return call;
        }
        return Expr::var(std::string(t.text));
      }
      case Tok::LParen: {
        next();
        Expr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBracket: {
        next();
        Expr arr;
        arr.kind = Expr::Kind::ArrayLit;
        if (!at(Tok::RBracket)) {
          do {
            arr.operands.push_back(expr());
          } while (accept(Tok::Comma));
        }
        expect(Tok::RBracket, "']'");
        return arr;
      }
      default:
        fail("an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SourceUnit parse_source(std::string_view text, std::string name) {
  Parser p(text);
  return SourceUnit(std::move(name), p.program());
}

Stmt parse_block(std::string_view text) {
  try {
    Parser p(text);
    return p.standalone_block();
  } catch (const ParseError& first) {
    std::string wrapped = "{\n";
    wrapped.append(text);
    wrapped.append("\n}");
    try {
      Parser p(wrapped);
      return p.standalone_block();
    } catch (const ParseError&) {
      throw first;
    }
  }
}

Expr parse_expression(std::string_view text) {
  Parser p(text);
  return p.standalone_expr();
}

}  // namespace gi
