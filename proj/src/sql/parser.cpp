// SPDX-License-Identifier: Apache-2.0
#include "trajsql/sql/parser.h"

#include <algorithm>
#include <array>
#include <cctype>

#include "trajsql/core/error.h"

namespace trajsql::sql {

namespace {

enum class T {
  Word,        // bare identifier or keyword
  QuotedName,  // `x`, [x], or "x" outside MySQL
  DQuoted,     // "x" as identifier (flagged)
  String,
  Number,
  LParen,
  RParen,
  Comma,
  Dot,
  Semi,
  Star,
  Plus,
  Minus,
  Slash,
  Percent,
  Concat,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  End,
};

struct Tok {
  T kind;
  std::string text;
  SourcePos pos;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view src, Dialect dialect) : src_(src), dialect_(dialect) {}

  std::vector<Tok> run() {
    std::vector<Tok> out;
    while (true) {
      skip();
      const SourcePos pos{line_, col_};
      if (i_ >= src_.size()) {
        out.push_back({T::End, "", pos});
        return out;
      }
      const char c = src_[i_];
      if (c == '\'') {
        out.push_back({T::String, quoted('\''), pos});
      } else if (c == '"') {
        std::string text = quoted('"');
        out.push_back({dialect_ == Dialect::MySQL ? T::String : T::DQuoted, std::move(text), pos});
      } else if (c == '`') {
        out.push_back({T::QuotedName, quoted('`'), pos});
      } else if (c == '[' && dialect_ == Dialect::SQLite) {
        advance();
        std::string text;
        while (i_ < src_.size() && src_[i_] != ']') text += advance();
        if (i_ >= src_.size()) throw SyntaxError(pos, "`]`", "end of input");
        advance();
        out.push_back({T::QuotedName, text, pos});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        out.push_back({T::Number, number(), pos});
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string text;
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_' || src_[i_] == '$')) {
          text += advance();
        }
        out.push_back({T::Word, text, pos});
      } else {
        out.push_back(punct(pos));
      }
    }
  }

 private:
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && i_ + 1 < src_.size() && src_[i_ + 1] == '-') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '*') {
        advance();
        advance();
        while (i_ + 1 < src_.size() && !(src_[i_] == '*' && src_[i_ + 1] == '/')) advance();
        if (i_ + 1 >= src_.size()) throw SyntaxError({line_, col_}, "`*/`", "end of input");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string quoted(char q) {
    const SourcePos pos{line_, col_};
    advance();
    std::string text;
    while (true) {
      if (i_ >= src_.size()) throw SyntaxError(pos, std::string("closing ") + q, "end of input");
      const char c = advance();
      if (c == q) {
        if (i_ < src_.size() && src_[i_] == q) {
          text += advance();
          continue;
        }
        return text;
      }
      text += c;
    }
  }

  std::string number() {
    std::string text;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) text += advance();
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      text += advance();
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
        while (i_ < j) text += advance();
        digits();
      }
    }
    return text;
  }

  Tok punct(SourcePos pos) {
    const char c = advance();
    const char n = i_ < src_.size() ? src_[i_] : '\0';
    auto two = [&](T kind, const char* text) {
      advance();
      return Tok{kind, text, pos};
    };
    switch (c) {
      case '(': return {T::LParen, "(", pos};
      case ')': return {T::RParen, ")", pos};
      case ',': return {T::Comma, ",", pos};
      case '.': return {T::Dot, ".", pos};
      case ';': return {T::Semi, ";", pos};
      case '*': return {T::Star, "*", pos};
      case '+': return {T::Plus, "+", pos};
      case '-': return {T::Minus, "-", pos};
      case '/': return {T::Slash, "/", pos};
      case '%': return {T::Percent, "%", pos};
      case '|':
        if (n == '|') return two(T::Concat, "||");
        break;
      case '=':
        if (n == '=') return two(T::Eq, "==");
        return {T::Eq, "=", pos};
      case '!':
        if (n == '=') return two(T::Ne, "!=");
        break;
      case '<':
        if (n == '=') return two(T::Le, "<=");
        if (n == '>') return two(T::Ne, "<>");
        return {T::Lt, "<", pos};
      case '>':
        if (n == '=') return two(T::Ge, ">=");
        return {T::Gt, ">", pos};
      default:
        break;
    }
    throw SyntaxError(pos, "SQL token", std::string(1, c));
  }

  std::string_view src_;
  Dialect dialect_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

bool is_sql_keyword(std::string_view word) {
  static const std::array<const char*, 44> kReserved = {
      "SELECT", "FROM",   "WHERE",  "GROUP",  "BY",     "HAVING", "ORDER",    "LIMIT",  "OFFSET",
      "UNION",  "ALL",    "INTERSECT", "EXCEPT", "JOIN", "INNER", "LEFT",     "RIGHT",  "FULL",
      "OUTER",  "CROSS",  "NATURAL", "ON",    "USING",  "AND",    "OR",       "NOT",    "IN",
      "IS",     "NULL",   "LIKE",   "BETWEEN", "AS",    "ASC",    "DESC",     "DISTINCT", "CASE",
      "WHEN",   "THEN",   "ELSE",   "END",    "EXISTS", "CAST",   "WITH",     "WINDOW"};
  const std::string u = upper(word);
  return std::any_of(kReserved.begin(), kReserved.end(), [&](const char* k) { return u == k; });
}

namespace {

bool is_reserved(std::string_view word) { return is_sql_keyword(word); }

class Parser {
 public:
  explicit Parser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  Select statement() {
    if (at("WITH")) throw UnsupportedSql("common table expressions (WITH) are not supported");
    Select s = select();
    while (peek().kind == T::Semi) take();
    expect_end();
    return s;
  }

  SqlExpr lone_expression() {
    SqlExpr e = expr();
    expect_end();
    return e;
  }

 private:
  const Tok& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  const Tok& take() {
    const Tok& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool at(std::string_view kw, std::size_t k = 0) const {
    const Tok& t = peek(k);
    return t.kind == T::Word && upper(t.text) == kw;
  }
  bool accept(std::string_view kw) {
    if (!at(kw)) return false;
    take();
    return true;
  }
  void keyword(std::string_view kw) {
    if (!accept(kw)) throw SyntaxError(peek().pos, std::string(kw), describe(peek()));
  }
  void expect(T kind, const std::string& what) {
    if (peek().kind != kind) throw SyntaxError(peek().pos, what, describe(peek()));
    take();
  }
  void expect_end() {
    if (peek().kind != T::End) throw SyntaxError(peek().pos, "end of statement", describe(peek()));
  }
  static std::string describe(const Tok& t) {
    if (t.kind == T::End) return "end of input";
    if (t.kind == T::String) return "'" + t.text + "'";
    return "`" + t.text + "`";
  }

  bool at_name() const {
    const Tok& t = peek();
    return t.kind == T::QuotedName || t.kind == T::DQuoted || (t.kind == T::Word && !is_reserved(t.text));
  }
  std::string name(const std::string& what) {
    if (!at_name()) throw SyntaxError(peek().pos, what, describe(peek()));
    return take().text;
  }

  // -- statements -------------------------------------------------------------

  Select select() {
    Select s;
    s.core = core();
    while (true) {
      std::optional<SetOp> op;
      if (accept("UNION")) {
        op = accept("ALL") ? SetOp::UnionAll : SetOp::Union;
      } else if (accept("INTERSECT")) {
        op = SetOp::Intersect;
      } else if (accept("EXCEPT")) {
        op = SetOp::Except;
      }
      if (!op) break;
      s.compounds.push_back({*op, core()});
    }
    if (accept("ORDER")) {
      keyword("BY");
      do {
        OrderItem item{expr(), false};
        if (accept("DESC")) {
          item.desc = true;
        } else {
          accept("ASC");
        }
        s.order_by.push_back(std::move(item));
      } while (comma());
    }
    if (accept("LIMIT")) {
      const std::int64_t first = integer("limit count");
      if (accept("OFFSET")) {
        s.limit = first;
        s.offset = integer("offset");
      } else if (comma()) {
        s.offset = first;
        s.limit = integer("limit count");
      } else {
        s.limit = first;
      }
    }
    return s;
  }

  bool comma() {
    if (peek().kind != T::Comma) return false;
    take();
    return true;
  }

  std::int64_t integer(const std::string& what) {
    const Tok& t = peek();
    if (t.kind != T::Number || t.text.find_first_not_of("0123456789") != std::string::npos) {
      throw SyntaxError(t.pos, what + " (integer literal)", describe(t));
    }
    take();
    return std::stoll(t.text);
  }

  SelectCore core() {
    SelectCore c;
    keyword("SELECT");
    if (accept("DISTINCT")) {
      c.distinct = true;
    } else {
      accept("ALL");
    }
    do {
      c.items.push_back(select_item());
    } while (comma());
    if (accept("FROM")) {
      c.from = table_ref();
      while (true) {
        if (comma()) {
          c.joins.push_back({JoinType::Comma, table_ref(), std::nullopt});
          continue;
        }
        if (at("NATURAL")) throw UnsupportedSql("NATURAL JOIN is not supported");
        std::optional<JoinType> type;
        if (at("JOIN")) {
          type = JoinType::Inner;
        } else if (accept("INNER")) {
          type = JoinType::Inner;
        } else if (accept("CROSS")) {
          type = JoinType::Cross;
        } else if (accept("LEFT")) {
          accept("OUTER");
          type = JoinType::Left;
        } else if (accept("RIGHT")) {
          accept("OUTER");
          type = JoinType::Right;
        } else if (accept("FULL")) {
          accept("OUTER");
          type = JoinType::Full;
        }
        if (!type) break;
        keyword("JOIN");
        Join j{*type, table_ref(), std::nullopt};
        if (at("USING")) throw UnsupportedSql("JOIN ... USING is not supported");
        if (accept("ON")) j.on = expr();
        c.joins.push_back(std::move(j));
      }
    }
    if (accept("WHERE")) c.where = expr();
    if (accept("GROUP")) {
      keyword("BY");
      do {
        c.group_by.push_back(expr());
      } while (comma());
    }
    if (accept("HAVING")) c.having = expr();
    if (at("WINDOW")) throw UnsupportedSql("window clauses are not supported");
    return c;
  }

  SelectItem select_item() {
    if (peek().kind == T::Star) {
      take();
      return {SqlExpr{SqlStar{}}, ""};
    }
    if (at_name() && peek(1).kind == T::Dot && peek(2).kind == T::Star) {
      std::string table = take().text;
      take();
      take();
      return {SqlExpr{SqlStar{table}}, ""};
    }
    SelectItem item{expr(), ""};
    if (accept("AS")) {
      item.alias = alias_name();
    } else if (at_name() || peek().kind == T::String) {
      item.alias = alias_name();
    }
    return item;
  }

  std::string alias_name() {
    if (peek().kind == T::String) return take().text;
    return name("alias");
  }

  TableRef table_ref() {
    if (peek().kind == T::LParen) throw UnsupportedSql("derived tables in FROM are not supported");
    TableRef t{name("table name"), ""};
    if (peek().kind == T::Dot) {
      // schema-qualified names keep only the table part
      take();
      t.name = name("table name");
    }
    if (accept("AS")) {
      t.alias = name("table alias");
    } else if (at_name()) {
      t.alias = take().text;
    }
    return t;
  }

  // -- expressions ------------------------------------------------------------

  static SqlExpr bin(BinaryOp op, SqlExpr a, SqlExpr b) {
    return SqlExpr{SqlBinary{op, std::move(a), std::move(b)}};
  }

  SqlExpr expr() { return disjunction(); }

  SqlExpr disjunction() {
    SqlExpr lhs = conjunction();
    while (accept("OR")) lhs = bin(BinaryOp::Or, std::move(lhs), conjunction());
    return lhs;
  }

  SqlExpr conjunction() {
    SqlExpr lhs = negation();
    while (accept("AND")) lhs = bin(BinaryOp::And, std::move(lhs), negation());
    return lhs;
  }

  SqlExpr negation() {
    if (at("NOT") && !at("EXISTS", 1)) {
      take();
      return SqlExpr{SqlUnary{UnaryOp::Not, negation()}};
    }
    return comparison();
  }

  SqlExpr comparison() {
    SqlExpr lhs = additive();
    while (true) {
      const Tok& t = peek();
      std::optional<BinaryOp> op;
      switch (t.kind) {
        case T::Eq: op = BinaryOp::Eq; break;
        case T::Ne: op = BinaryOp::Ne; break;
        case T::Lt: op = BinaryOp::Lt; break;
        case T::Le: op = BinaryOp::Le; break;
        case T::Gt: op = BinaryOp::Gt; break;
        case T::Ge: op = BinaryOp::Ge; break;
        default: break;
      }
      if (op) {
        take();
        lhs = bin(*op, std::move(lhs), additive());
        continue;
      }
      bool negated = false;
      if (at("NOT") && (at("IN", 1) || at("LIKE", 1) || at("BETWEEN", 1))) {
        take();
        negated = true;
      }
      if (accept("LIKE")) {
        SqlExpr pattern = additive();
        if (negated) {
          lhs = SqlExpr{SqlNotLike{std::move(lhs), std::move(pattern)}};
        } else {
          lhs = bin(BinaryOp::Like, std::move(lhs), std::move(pattern));
        }
        continue;
      }
      if (accept("BETWEEN")) {
        SqlExpr low = additive();
        keyword("AND");
        SqlExpr high = additive();
        lhs = SqlExpr{SqlBetween{std::move(lhs), std::move(low), std::move(high), negated}};
        continue;
      }
      if (accept("IN")) {
        SqlIn in{std::move(lhs), {}, std::nullopt, negated};
        expect(T::LParen, "`(` after IN");
        if (at("SELECT")) {
          in.subquery = Box<Select>(select());
        } else {
          do {
            in.list.push_back(expr());
          } while (comma());
        }
        expect(T::RParen, "`)` closing IN");
        lhs = SqlExpr{std::move(in)};
        continue;
      }
      if (negated) throw SyntaxError(peek().pos, "IN, LIKE or BETWEEN after NOT", describe(peek()));
      if (accept("IS")) {
        const bool not_null = accept("NOT");
        keyword("NULL");
        lhs = SqlExpr{SqlIsNull{std::move(lhs), not_null}};
        continue;
      }
      return lhs;
    }
  }

  SqlExpr additive() {
    SqlExpr lhs = multiplicative();
    while (peek().kind == T::Plus || peek().kind == T::Minus) {
      const BinaryOp op = take().kind == T::Plus ? BinaryOp::Add : BinaryOp::Sub;
      lhs = bin(op, std::move(lhs), multiplicative());
    }
    return lhs;
  }

  SqlExpr multiplicative() {
    SqlExpr lhs = concat();
    while (peek().kind == T::Star || peek().kind == T::Slash || peek().kind == T::Percent) {
      const T k = take().kind;
      const BinaryOp op = k == T::Star ? BinaryOp::Mul : k == T::Slash ? BinaryOp::Div : BinaryOp::Mod;
      lhs = bin(op, std::move(lhs), concat());
    }
    return lhs;
  }

  SqlExpr concat() {
    SqlExpr lhs = unary();
    while (peek().kind == T::Concat) {
      take();
      lhs = bin(BinaryOp::Concat, std::move(lhs), unary());
    }
    return lhs;
  }

  SqlExpr unary() {
    if (peek().kind == T::Minus) {
      take();
      if (peek().kind == T::Number) {
        return SqlExpr{SqlLiteral{Literal::number("-" + take().text)}};
      }
      return SqlExpr{SqlUnary{UnaryOp::Neg, unary()}};
    }
    if (peek().kind == T::Plus) {
      take();
      return unary();
    }
    return primary();
  }

  SqlExpr primary() {
    const Tok t = peek();
    switch (t.kind) {
      case T::Number:
        take();
        return SqlExpr{SqlLiteral{Literal::number(t.text)}};
      case T::String:
        take();
        return SqlExpr{SqlLiteral{Literal::string(t.text)}};
      case T::LParen: {
        take();
        if (at("SELECT")) {
          Select sub = select();
          expect(T::RParen, "`)` closing subquery");
          return SqlExpr{SqlSubquery{std::move(sub)}};
        }
        SqlExpr inner = expr();
        expect(T::RParen, "`)`");
        return inner;
      }
      case T::Star:
        take();
        return SqlExpr{SqlStar{}};
      case T::Word:
        return word(t);
      case T::QuotedName:
      case T::DQuoted:
        return column_ref();
      default:
        break;
    }
    throw SyntaxError(t.pos, "expression", describe(t));
  }

  SqlExpr word(const Tok& t) {
    const std::string u = upper(t.text);
    if (u == "NULL") {
      take();
      return SqlExpr{SqlNull{}};
    }
    if (u == "EXISTS" || (u == "NOT" && at("EXISTS", 1))) {
      take();
      const bool negated = u == "NOT";
      if (negated) take();
      expect(T::LParen, "`(` after EXISTS");
      Select sub = select();
      expect(T::RParen, "`)` closing EXISTS");
      return SqlExpr{SqlExists{std::move(sub), negated}};
    }
    if (u == "CASE") return case_expr();
    if (u == "CAST" && peek(1).kind == T::LParen) {
      take();
      take();
      SqlExpr arg = expr();
      keyword("AS");
      std::string type = upper(name("type name"));
      if (peek().kind == T::LParen) {
        take();
        type += "(" + std::to_string(integer("type length"));
        if (comma()) type += "," + std::to_string(integer("type scale"));
        type += ")";
        expect(T::RParen, "`)`");
      }
      expect(T::RParen, "`)` closing CAST");
      return SqlExpr{SqlCast{std::move(arg), type}};
    }
    if (peek(1).kind == T::LParen && !is_reserved(t.text)) return call();
    if (is_reserved(t.text)) throw SyntaxError(t.pos, "expression", describe(t));
    return column_ref();
  }

  SqlExpr call() {
    SqlCall c;
    c.name = upper(take().text);
    take();  // (
    if (peek().kind == T::Star) {
      take();
      c.args.push_back(SqlExpr{SqlStar{}});
    } else if (peek().kind != T::RParen) {
      if (accept("DISTINCT")) c.distinct = true;
      do {
        c.args.push_back(expr());
      } while (comma());
    }
    expect(T::RParen, "`)` closing call");
    if (at("OVER")) throw UnsupportedSql("window function " + c.name + "(...) OVER is not supported");
    if (at("FILTER")) throw UnsupportedSql("aggregate FILTER clauses are not supported");
    return SqlExpr{std::move(c)};
  }

  SqlExpr case_expr() {
    take();
    SqlCase c;
    if (!at("WHEN")) c.operand = Box<SqlExpr>(expr());
    while (accept("WHEN")) {
      SqlExpr cond = expr();
      keyword("THEN");
      c.whens.push_back({std::move(cond), expr()});
    }
    if (c.whens.empty()) throw SyntaxError(peek().pos, "WHEN", describe(peek()));
    if (accept("ELSE")) c.otherwise = Box<SqlExpr>(expr());
    keyword("END");
    return SqlExpr{std::move(c)};
  }

  SqlExpr column_ref() {
    const Tok first = take();
    if (peek().kind == T::Dot) {
      take();
      const Tok& second = peek();
      if (second.kind != T::Word && second.kind != T::QuotedName && second.kind != T::DQuoted) {
        throw SyntaxError(second.pos, "column name", describe(second));
      }
      take();
      return SqlExpr{SqlColumn{first.text, second.text, false}};
    }
    return SqlExpr{SqlColumn{"", first.text, first.kind == T::DQuoted}};
  }

  std::vector<Tok> toks_;
  std::size_t i_ = 0;
};

}  // namespace

SqlQuery parse_sql(std::string_view text, Dialect dialect) {
  Parser p(Lexer(text, dialect).run());
  SqlQuery q;
  q.text = std::string(text);
  q.ast = p.statement();
  q.dialect = dialect;
  return q;
}

SqlExpr parse_sql_expression(std::string_view text, Dialect dialect) {
  Parser p(Lexer(text, dialect).run());
  return p.lone_expression();
}

}  // namespace trajsql::sql
