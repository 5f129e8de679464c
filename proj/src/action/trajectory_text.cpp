// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/trajectory_text.h"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <stdexcept>

#include "trajsql/action/action_space.h"
#include "trajsql/core/error.h"

namespace trajsql {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident,
  QuotedIdent,  // `...`
  Number,
  String,   // '...'
  DString,  // "..."
  Date,     // bare 1980-01-01 (filter text only)
  LParen,
  RParen,
  Comma,
  Dot,
  Assign,  // =
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  Ne,
  Newline,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Newline: return "end of line";
    case Tok::String: return "'" + t.text + "'";
    case Tok::DString: return "\"" + t.text + "\"";
    default: return "`" + t.text + "`";
  }
}

std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string upper(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view src, SourcePos origin) : src_(src), line_(origin.line), col_(origin.column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      if (i_ >= src_.size()) break;
      const SourcePos pos{line_, col_};
      const char c = src_[i_];
      if (c == '\n') {
        advance();
        out.push_back({Tok::Newline, "\n", pos});
      } else if (c == '\'' || c == '"') {
        out.push_back({c == '\'' ? Tok::String : Tok::DString, quoted(c), pos});
      } else if (c == '`') {
        advance();
        std::string text;
        while (i_ < src_.size() && src_[i_] != '`' && src_[i_] != '\n') text += advance();
        if (i_ >= src_.size() || src_[i_] != '`') throw SyntaxError(pos, "closing backtick", "");
        advance();
        out.push_back({Tok::QuotedIdent, text, pos});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number(pos));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string text;
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
          text += advance();
        }
        out.push_back({Tok::Ident, text, pos});
      } else {
        out.push_back(punct(pos));
      }
    }
    out.push_back({Tok::End, "", {line_, col_}});
    return out;
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

  void skip_blank() {
    while (i_ < src_.size() && (src_[i_] == ' ' || src_[i_] == '\t' || src_[i_] == '\r')) advance();
  }

  std::string quoted(char q) {
    const SourcePos pos{line_, col_};
    advance();
    std::string text;
    while (true) {
      if (i_ >= src_.size() || src_[i_] == '\n') {
        throw SyntaxError(pos, std::string("closing ") + q, "end of line");
      }
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

  Token number(SourcePos pos) {
    // Date literal: dddd-dd-dd not followed by an identifier character.
    if (i_ + 10 <= src_.size() && looks_like_date(src_.substr(i_, 10)) &&
        (i_ + 10 == src_.size() ||
         !(std::isalnum(static_cast<unsigned char>(src_[i_ + 10])) || src_[i_ + 10] == '_'))) {
      std::string text(src_.substr(i_, 10));
      for (int k = 0; k < 10; ++k) advance();
      return {Tok::Date, text, pos};
    }
    std::string text;
    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) text += advance();
    if (i_ + 1 < src_.size() && src_[i_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[i_ + 1]))) {
      text += advance();
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        text += advance();
      }
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
        while (i_ < j) text += advance();
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
          text += advance();
        }
      }
    }
    if (i_ < src_.size() &&
        (std::isalpha(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      throw SyntaxError(pos, "number", text + src_[i_]);
    }
    return {Tok::Number, text, pos};
  }

  Token punct(SourcePos pos) {
    const char c = advance();
    const char next = i_ < src_.size() ? src_[i_] : '\0';
    switch (c) {
      case '(': return {Tok::LParen, "(", pos};
      case ')': return {Tok::RParen, ")", pos};
      case ',': return {Tok::Comma, ",", pos};
      case '.': return {Tok::Dot, ".", pos};
      case '+': return {Tok::Plus, "+", pos};
      case '-': return {Tok::Minus, "-", pos};
      case '*': return {Tok::Star, "*", pos};
      case '/': return {Tok::Slash, "/", pos};
      case '=':
        if (next == '=') {
          advance();
          return {Tok::Assign, "==", pos};
        }
        return {Tok::Assign, "=", pos};
      case '<':
        if (next == '=') {
          advance();
          return {Tok::Le, "<=", pos};
        }
        if (next == '>') {
          advance();
          return {Tok::Ne, "<>", pos};
        }
        return {Tok::Lt, "<", pos};
      case '>':
        if (next == '=') {
          advance();
          return {Tok::Ge, ">=", pos};
        }
        return {Tok::Gt, ">", pos};
      case '!':
        if (next == '=') {
          advance();
          return {Tok::Ne, "!=", pos};
        }
        break;
      default:
        break;
    }
    throw SyntaxError(pos, "token", std::string(1, c));
  }

  std::string_view src_;
  std::size_t i_ = 0;
  std::size_t line_;
  std::size_t col_;
};

// ---------------------------------------------------------------------------
// Parser

bool is_filter_keyword(std::string_view word) {
  static const char* const kKeywords[] = {"between", "and", "or", "in", "not", "is", "null", "like"};
  const std::string w = lower(word);
  for (const char* k : kKeywords) {
    if (w == k) return true;
  }
  return false;
}

bool is_binding_like(std::string_view word) {
  static const std::regex kBinding("df[0-9]*|res");
  return std::regex_match(word.begin(), word.end(), kBinding);
}

// Bare word in filter text that reads back as a string literal.
bool is_bare_word(std::string_view s) {
  return is_simple_identifier(s) && !is_filter_keyword(s) && !is_binding_like(s);
}

/// Argument value before interpretation by the action builder.
struct ArgValue {
  enum class Kind { Expr, Word, Text } kind;
  Expression expr{StarExpr{}};
  std::string text;  // Word: identifier; Text: string-literal content
  SourcePos pos;
  SourcePos text_origin;  // position of the first content character (Text)
};

struct Arg {
  std::optional<std::string> key;
  ArgValue value;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, bool filter_mode)
      : toks_(std::move(tokens)), filter_mode_(filter_mode) {}

  Trajectory trajectory() {
    std::vector<TrajectoryStep> steps;
    skip_newlines();
    while (peek().kind != Tok::End) {
      steps.push_back(step());
      if (peek().kind != Tok::End) expect(Tok::Newline, "end of line");
      skip_newlines();
    }
    if (steps.empty()) throw SyntaxError(peek().pos, "trajectory step", "end of input");
    return Trajectory::make(std::move(steps));
  }

  Expression single_expression() {
    Expression e = expression();
    skip_newlines();
    expect(Tok::End, "end of expression");
    return e;
  }

  QualifiedColumn single_column() {
    const Token& t = peek();
    Expression e = expression();
    expect(Tok::End, "end of column");
    const auto* col = e.as<ColumnExpr>();
    if (!col) throw SyntaxError(t.pos, "qualified column", describe(t));
    return col->ref;
  }

  // Filter text: predicate tail for a known element.
  FilterCondition predicate_tail() {
    FilterCondition f = condition_tail(/*allow_bare=*/true);
    expect(Tok::End, "end of filter");
    return f;
  }

  // Filter text without an element: boolean expression over atoms.
  Condition compound() {
    Condition c = or_expr();
    expect(Tok::End, "end of filter");
    return c;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(i_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& take() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) throw SyntaxError(peek().pos, what, describe(peek()));
    return take();
  }
  bool at_word(std::string_view w) const {
    return peek().kind == Tok::Ident && lower(peek().text) == w;
  }
  void skip_newlines() {
    while (peek().kind == Tok::Newline) take();
  }
  std::string identifier(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident && t.kind != Tok::QuotedIdent) {
      throw SyntaxError(t.pos, what, describe(t));
    }
    take();
    return t.text;
  }

  TrajectoryStep step() {
    TrajectoryStep s;
    s.binding = identifier("binding name");
    expect(Tok::Assign, "`=` after binding");
    s.receiver = identifier("receiver frame");
    if (peek().kind != Tok::Dot) throw SyntaxError(peek().pos, "`.action(...)`", describe(peek()));
    while (peek().kind == Tok::Dot) {
      take();
      s.chain.push_back(action());
    }
    return s;
  }

  Action action() {
    const Token name = peek();
    if (name.kind != Tok::Ident) throw SyntaxError(name.pos, "action name", describe(name));
    take();
    const ActionSpaceEntry* entry = ActionSpace::instance().find(name.text);
    if (!entry) {
      throw UnknownAction("line " + std::to_string(name.pos.line) + ", column " +
                          std::to_string(name.pos.column) + ": `" + name.text +
                          "` is not in the action space");
    }
    expect(Tok::LParen, "`(` after action name");
    std::vector<Arg> args;
    bool distinct = false;
    if (entry->kind == ActionKind::AggregateChain && at_word("distinct") &&
        peek(1).kind != Tok::LParen && peek(1).kind != Tok::Dot && peek(1).kind != Tok::Assign) {
      take();
      distinct = true;
    }
    if (peek().kind != Tok::RParen) {
      args.push_back(arg());
      while (peek().kind == Tok::Comma) {
        take();
        args.push_back(arg());
      }
    }
    expect(Tok::RParen, "`,` or `)`");
    return build(*entry, args, distinct, name.pos);
  }

  Arg arg() {
    Arg a;
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Assign && peek(1).text == "=") {
      a.key = lower(take().text);
      take();
    }
    a.value = value();
    return a;
  }

  ArgValue value() {
    const Token& t = peek();
    ArgValue v;
    v.pos = t.pos;
    if (t.kind == Tok::Ident && peek(1).kind != Tok::Dot && peek(1).kind != Tok::LParen) {
      take();
      v.kind = ArgValue::Kind::Word;
      v.text = t.text;
      return v;
    }
    if (t.kind == Tok::String && peek(1).kind != Tok::Plus && peek(1).kind != Tok::Minus &&
        peek(1).kind != Tok::Star && peek(1).kind != Tok::Slash) {
      take();
      v.kind = ArgValue::Kind::Text;
      v.text = t.text;
      v.text_origin = {t.pos.line, t.pos.column + 1};
      return v;
    }
    v.kind = ArgValue::Kind::Expr;
    v.expr = expression();
    return v;
  }

  // -- Expressions ----------------------------------------------------------

  Expression expression() {
    Expression lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const ArithOp op = take().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
      Expression rhs = term();
      lhs = Expression{ArithmeticExpr{op, std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Expression term() {
    Expression lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const ArithOp op = take().kind == Tok::Star ? ArithOp::Mul : ArithOp::Div;
      Expression rhs = unary();
      lhs = Expression{ArithmeticExpr{op, std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Expression unary() {
    if (peek().kind == Tok::Minus && peek(1).kind == Tok::Number) {
      take();
      return Expression::literal(Literal::number("-" + take().text));
    }
    return primary();
  }

  Expression primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        take();
        return Expression::literal(Literal::number(t.text));
      case Tok::String:
      case Tok::DString:
        take();
        return Expression::literal(Literal::string(t.text));
      case Tok::Date:
        if (!filter_mode_) break;
        take();
        return Expression::literal(Literal::string(t.text));
      case Tok::Star:
        take();
        return Expression::star();
      case Tok::LParen: {
        take();
        Expression inner = expression();
        expect(Tok::RParen, "`)`");
        return inner;
      }
      case Tok::Ident:
      case Tok::QuotedIdent:
        return named(t);
      default:
        break;
    }
    throw SyntaxError(t.pos, "expression", describe(t));
  }

  Expression named(const Token& t) {
    take();
    if (t.kind == Tok::Ident && peek().kind == Tok::LParen) return call(t);
    if (peek().kind == Tok::Dot) {
      take();
      const Token& c = peek();
      if (c.kind != Tok::Ident && c.kind != Tok::QuotedIdent) {
        throw SyntaxError(c.pos, "column name after `.`", describe(c));
      }
      take();
      if (!is_valid_identifier(t.text) || !is_valid_identifier(c.text)) {
        throw SyntaxError(t.pos, "valid identifier", t.text + "." + c.text);
      }
      return Expression::column(t.text, c.text);
    }
    if (filter_mode_ && t.kind == Tok::Ident) {
      if (is_binding_like(t.text)) return Expression{SubqueryExpr{t.text}};
      if (!is_filter_keyword(t.text)) return Expression::literal(Literal::string(t.text));
    }
    throw SyntaxError(t.pos, "qualified column `table.column`", describe(t));
  }

  Expression call(const Token& name) {
    expect(Tok::LParen, "`(`");
    const std::string fn = lower(name.text);
    if (auto agg = aggregate_from_name(fn)) {
      bool distinct = false;
      if (at_word("distinct") && peek(1).kind != Tok::LParen && peek(1).kind != Tok::Dot) {
        take();
        distinct = true;
      }
      Expression arg = expression();
      if (peek().kind == Tok::RParen) {
        take();
        return Expression::aggregate(*agg, std::move(arg), distinct);
      }
      if (distinct || (*agg != AggregateKind::Min && *agg != AggregateKind::Max)) {
        throw SyntaxError(peek().pos, "`)` closing aggregate", describe(peek()));
      }
      // Multi-argument min/max are scalar functions.
      FunctionExpr f{fn, {std::move(arg)}};
      while (peek().kind == Tok::Comma) {
        take();
        f.args.push_back(expression());
      }
      expect(Tok::RParen, "`)`");
      return Expression{std::move(f)};
    }
    if (fn == "cast") {
      Expression arg = expression();
      expect(Tok::Comma, "`,` before cast type");
      const std::string type = identifier("type name");
      expect(Tok::RParen, "`)`");
      return Expression{CastExpr{std::move(arg), upper(type)}};
    }
    if (fn == "substr" || fn == "substring") {
      Expression arg = expression();
      expect(Tok::Comma, "`,` before start position");
      const std::int64_t start = integer("start position");
      std::optional<std::int64_t> len;
      if (peek().kind == Tok::Comma) {
        take();
        len = integer("substring length");
      }
      expect(Tok::RParen, "`)`");
      if (start < 1 || (len && *len < 1)) {
        throw SyntaxError(name.pos, "substr positions >= 1", "");
      }
      return Expression{SubstrExpr{std::move(arg), start, len}};
    }
    FunctionExpr f{fn, {}};
    if (peek().kind != Tok::RParen) {
      f.args.push_back(expression());
      while (peek().kind == Tok::Comma) {
        take();
        f.args.push_back(expression());
      }
    }
    expect(Tok::RParen, "`,` or `)`");
    return Expression{std::move(f)};
  }

  std::int64_t integer(const std::string& what) {
    bool neg = false;
    if (peek().kind == Tok::Minus) {
      take();
      neg = true;
    }
    const Token& t = expect(Tok::Number, what);
    if (t.text.find_first_not_of("0123456789") != std::string::npos) {
      throw SyntaxError(t.pos, what + " (integer)", t.text);
    }
    const std::int64_t v = std::stoll(t.text);
    return neg ? -v : v;
  }

  // -- Filter mini-grammar --------------------------------------------------

  Expression operand() { return expression(); }

  std::vector<Expression> in_list() {
    std::vector<Expression> items;
    if (peek().kind == Tok::Ident && is_binding_like(peek().text)) {
      items.push_back(Expression{SubqueryExpr{take().text}});
      return items;
    }
    expect(Tok::LParen, "`(` opening in-list");
    items.push_back(operand());
    while (peek().kind == Tok::Comma) {
      take();
      items.push_back(operand());
    }
    expect(Tok::RParen, "`)` closing in-list");
    return items;
  }

  FilterCondition condition_tail(bool allow_bare) {
    FilterCondition f;
    const Token start = peek();
    if (start.kind == Tok::End) throw SyntaxError(start.pos, "filter condition", "empty filter");
    if (at_word("between")) {
      take();
      f.comparator = Comparator::Between;
      f.operands.push_back(operand());
      if (!at_word("and")) throw SyntaxError(peek().pos, "`and` in between", describe(peek()));
      take();
      f.operands.push_back(operand());
    } else if (at_word("like")) {
      take();
      f.comparator = Comparator::Like;
      f.operands.push_back(operand());
    } else if (at_word("in")) {
      take();
      f.comparator = Comparator::In;
      f.operands = in_list();
    } else if (at_word("not")) {
      take();
      if (!at_word("in")) throw SyntaxError(peek().pos, "`in` after `not`", describe(peek()));
      take();
      f.comparator = Comparator::NotIn;
      f.operands = in_list();
    } else if (at_word("is")) {
      take();
      f.comparator = Comparator::IsNull;
      if (at_word("not")) {
        take();
        f.comparator = Comparator::IsNotNull;
      }
      if (!at_word("null")) throw SyntaxError(peek().pos, "`null`", describe(peek()));
      take();
    } else if (auto cmp = comparator_token(start.kind)) {
      take();
      f.comparator = *cmp;
      f.operands.push_back(operand());
    } else if (allow_bare) {
      f.comparator = Comparator::Eq;
      f.operands.push_back(operand());
    } else {
      throw SyntaxError(start.pos, "comparator", describe(start));
    }
    try {
      check_filter(f);
    } catch (const std::invalid_argument& e) {
      throw SyntaxError(start.pos, "well-formed filter", e.what());
    }
    return f;
  }

  static std::optional<Comparator> comparator_token(Tok kind) {
    switch (kind) {
      case Tok::Assign: return Comparator::Eq;
      case Tok::Ne: return Comparator::Ne;
      case Tok::Lt: return Comparator::Lt;
      case Tok::Le: return Comparator::Le;
      case Tok::Gt: return Comparator::Gt;
      case Tok::Ge: return Comparator::Ge;
      default: return std::nullopt;
    }
  }

  Condition or_expr() {
    Condition first = and_expr();
    if (!at_word("or")) return first;
    Condition out;
    out.kind = Condition::Kind::Or;
    out.terms.push_back(std::move(first));
    while (at_word("or")) {
      take();
      out.terms.push_back(and_expr());
    }
    return out;
  }

  Condition and_expr() {
    Condition first = atom();
    if (!at_word("and")) return first;
    Condition out;
    out.kind = Condition::Kind::And;
    out.terms.push_back(std::move(first));
    while (at_word("and")) {
      take();
      out.terms.push_back(atom());
    }
    return out;
  }

  Condition atom() {
    if (peek().kind == Tok::LParen) {
      const std::size_t save = i_;
      try {
        take();
        Condition inner = or_expr();
        expect(Tok::RParen, "`)`");
        return inner;
      } catch (const SyntaxError&) {
        i_ = save;  // parenthesized arithmetic operand instead
      }
    }
    Expression element = operand();
    FilterCondition f = condition_tail(/*allow_bare=*/false);
    return Condition::predicate(std::move(element), std::move(f));
  }

  // -- Action construction --------------------------------------------------

  Action build(const ActionSpaceEntry& entry, std::vector<Arg>& args, bool distinct,
               SourcePos pos) {
    switch (entry.kind) {
      case ActionKind::Select: {
        SelectAction a{expressions(args, {"element", "elements"}, pos, "select element")};
        return {std::move(a)};
      }
      case ActionKind::GroupBy: {
        GroupByAction a{expressions(args, {"element", "elements"}, pos, "groupby element")};
        return {std::move(a)};
      }
      case ActionKind::Distinct: {
        DistinctAction a{expressions(args, {"element", "elements"}, pos, "distinct element")};
        return {std::move(a)};
      }
      case ActionKind::Where:
        return {WhereAction{condition(args, pos)}};
      case ActionKind::Having:
        return {HavingAction{condition(args, pos)}};
      case ActionKind::OrderBy:
        return {order_by(args, pos)};
      case ActionKind::Limit:
        return {limit(args, pos)};
      case ActionKind::Union:
      case ActionKind::Intersect:
      case ActionKind::Except: {
        if (args.size() != 1 || args[0].value.kind != ArgValue::Kind::Word) {
          throw SyntaxError(pos, "one binding argument to " + entry.name, "");
        }
        const SetOpKind op = entry.kind == ActionKind::Union       ? SetOpKind::Union
                             : entry.kind == ActionKind::Intersect ? SetOpKind::Intersect
                                                                   : SetOpKind::Except;
        return {SetOpAction{op, args[0].value.text}};
      }
      case ActionKind::AggregateChain: {
        if (args.size() != 1) throw SyntaxError(pos, "one element for " + entry.name, "");
        AggregateChainAction a;
        a.kind = *aggregate_from_name(entry.name);
        a.distinct = distinct;
        a.arg = as_expression(args[0].value, "aggregate element");
        return {std::move(a)};
      }
      case ActionKind::Cast: {
        if (args.size() != 2 || args[1].value.kind != ArgValue::Kind::Word) {
          throw SyntaxError(pos, "cast(element, type)", "");
        }
        return {CastAction{as_expression(args[0].value, "cast element"), upper(args[1].value.text)}};
      }
      case ActionKind::Substr: {
        if (args.size() < 2 || args.size() > 3) throw SyntaxError(pos, "substr(element, piv[, len])", "");
        SubstrAction a;
        a.element = as_expression(args[0].value, "substr element");
        a.start = int_arg(args[1].value, "substr start");
        if (args.size() == 3) a.length = int_arg(args[2].value, "substr length");
        if (a.start < 1 || (a.length && *a.length < 1)) throw SyntaxError(pos, "positions >= 1", "");
        return {std::move(a)};
      }
      case ActionKind::Calculation:
        break;
    }
    throw UnknownAction("`" + entry.name + "` cannot be used as a chain action");
  }

  static Expression as_expression(const ArgValue& v, const std::string& what) {
    switch (v.kind) {
      case ArgValue::Kind::Expr: return v.expr;
      case ArgValue::Kind::Text: return Expression::literal(Literal::string(v.text));
      case ArgValue::Kind::Word: break;
    }
    throw SyntaxError(v.pos, what + " (qualified column or expression)", "`" + v.text + "`");
  }

  static std::int64_t int_arg(const ArgValue& v, const std::string& what) {
    if (v.kind == ArgValue::Kind::Expr) {
      if (const auto* lit = v.expr.as<Literal>(); lit && lit->kind == LiteralKind::Integer) {
        return std::stoll(lit->text);
      }
    }
    throw SyntaxError(v.pos, what + " (integer)", v.text);
  }

  static std::vector<Expression> expressions(const std::vector<Arg>& args,
                                             std::initializer_list<std::string_view> keys,
                                             SourcePos pos, const std::string& what) {
    std::vector<Expression> out;
    for (const auto& a : args) {
      if (a.key && std::find(keys.begin(), keys.end(), *a.key) == keys.end()) {
        throw SyntaxError(a.value.pos, what + " parameter", "`" + *a.key + "`");
      }
      out.push_back(as_expression(a.value, what));
    }
    if (out.empty()) throw SyntaxError(pos, "at least one " + what, "");
    return out;
  }

  Condition condition(std::vector<Arg>& args, SourcePos pos) {
    const ArgValue* element = nullptr;
    const ArgValue* filter = nullptr;
    std::size_t positional = 0;
    for (const auto& a : args) {
      const std::string key = a.key ? *a.key : (positional++ == 0 && args.size() == 2 ? "element" : "filter");
      if (key == "element" || key == "elements") {
        element = &a.value;
      } else if (key == "filter" || key == "condition") {
        filter = &a.value;
      } else {
        throw SyntaxError(a.value.pos, "`element` or `filter`", "`" + key + "`");
      }
    }
    if (!filter) throw SyntaxError(pos, "`filter` argument", "");
    if (!element) {
      if (filter->kind != ArgValue::Kind::Text) throw SyntaxError(filter->pos, "quoted compound filter", "");
      Parser sub(Lexer(filter->text, filter->text_origin).run(), true);
      return sub.compound();
    }
    Expression el = as_expression(*element, "filtered element");
    return Condition::predicate(std::move(el), filter_value(*filter));
  }

  static FilterCondition filter_value(const ArgValue& v) {
    if (v.kind == ArgValue::Kind::Expr) {
      const auto* lit = v.expr.as<Literal>();
      if (lit && lit->is_numeric()) return {Comparator::Eq, {v.expr}};
      throw SyntaxError(v.pos, "number or quoted filter text", "expression");
    }
    if (v.kind == ArgValue::Kind::Word) throw SyntaxError(v.pos, "number or quoted filter text", "`" + v.text + "`");
    Parser sub(Lexer(v.text, v.text_origin).run(), true);
    return sub.predicate_tail();
  }

  static OrderByAction order_by(const std::vector<Arg>& args, SourcePos pos) {
    OrderByAction a;
    bool have_by = false;
    bool have_order = false;
    for (const auto& arg : args) {
      const ArgValue& v = arg.value;
      const bool is_order_word =
          v.kind == ArgValue::Kind::Word && (lower(v.text) == "asc" || lower(v.text) == "desc");
      if ((arg.key && *arg.key == "order") || (!arg.key && is_order_word && have_by)) {
        if (!is_order_word) throw SyntaxError(v.pos, "ASC or DESC", v.text);
        a.order = lower(v.text) == "desc" ? SortOrder::Desc : SortOrder::Asc;
        have_order = true;
      } else if (!arg.key || *arg.key == "by" || *arg.key == "element") {
        if (have_by) throw SyntaxError(v.pos, "single orderby element", "");
        a.by = as_expression(v, "orderby element");
        have_by = true;
      } else {
        throw SyntaxError(v.pos, "`by` or `order`", "`" + *arg.key + "`");
      }
    }
    (void)have_order;
    if (!have_by) throw SyntaxError(pos, "orderby element", "");
    return a;
  }

  static LimitAction limit(const std::vector<Arg>& args, SourcePos pos) {
    if (args.empty() || args.size() > 2) throw SyntaxError(pos, "limit(n) or limit(offset, n)", "");
    LimitAction a;
    if (args.size() == 1) {
      a.count = int_arg(args[0].value, "limit count");
    } else {
      a.offset = int_arg(args[0].value, "limit offset");
      a.count = int_arg(args[1].value, "limit count");
      if (*a.offset < 0) throw SyntaxError(args[0].value.pos, "offset >= 0", "");
    }
    if (a.count < 1) throw SyntaxError(pos, "limit count >= 1", std::to_string(a.count));
    return a;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  bool filter_mode_;
};

// ---------------------------------------------------------------------------
// Renderer

std::string quote_ident(const std::string& name) {
  if (is_simple_identifier(name)) return name;
  return "`" + name + "`";
}

std::string quote(const std::string& s, char q) {
  std::string out(1, q);
  for (char c : s) {
    out += c;
    if (c == q) out += q;
  }
  out += q;
  return out;
}

int precedence(const Expression& e) {
  if (const auto* a = e.as<ArithmeticExpr>()) {
    return (a->op == ArithOp::Add || a->op == ArithOp::Sub) ? 1 : 2;
  }
  return 3;
}

class Renderer {
 public:
  Renderer(const RenderOptions& options, bool filter_mode) : opt_(options), filter_(filter_mode) {}

  std::string expr(const Expression& e) const {
    return std::visit(
        Overloaded{
            [&](const ColumnExpr& c) {
              return opt_.column_hook ? opt_.column_hook(c.ref) : render_column(c.ref);
            },
            [&](const Literal& l) { return literal(l); },
            [](const StarExpr&) { return std::string("*"); },
            [&](const AggregateExpr& a) {
              return std::string(aggregate_name(a.kind)) + "(" + (a.distinct ? "distinct " : "") +
                     expr(*a.arg) + ")";
            },
            [&](const CastExpr& c) { return "cast(" + expr(*c.arg) + ", " + c.type + ")"; },
            [&](const ArithmeticExpr& a) {
              const int p = precedence(e);
              std::string lhs = expr(*a.lhs);
              std::string rhs = expr(*a.rhs);
              if (precedence(*a.lhs) < p) lhs = "(" + lhs + ")";
              if (precedence(*a.rhs) <= p) rhs = "(" + rhs + ")";
              return lhs + " " + arith_symbol(a.op) + " " + rhs;
            },
            [&](const SubstrExpr& s) {
              std::string out = "substr(" + expr(*s.arg) + ", " + std::to_string(s.start);
              if (s.length) out += ", " + std::to_string(*s.length);
              return out + ")";
            },
            [&](const FunctionExpr& f) {
              std::string out = f.name + "(";
              for (std::size_t i = 0; i < f.args.size(); ++i) {
                if (i) out += ", ";
                out += expr(f.args[i]);
              }
              return out + ")";
            },
            [](const SubqueryExpr& s) { return s.binding; },
        },
        e.node);
  }

  std::string literal(const Literal& l) const {
    if (l.is_numeric()) return l.text;
    if (filter_) {
      if (l.kind == LiteralKind::Date) return l.text;
      if (is_bare_word(l.text)) return l.text;
      return quote(l.text, '"');
    }
    return quote(l.text, '\'');
  }

  std::string filter_text(const FilterCondition& f) const {
    auto ops = [&](std::string sep) {
      std::string out;
      for (std::size_t i = 0; i < f.operands.size(); ++i) {
        if (i) out += sep;
        out += expr(f.operands[i]);
      }
      return out;
    };
    auto list = [&]() {
      if (f.operands.size() == 1 && f.operands[0].as<SubqueryExpr>()) return ops("");
      return "(" + ops(", ") + ")";
    };
    switch (f.comparator) {
      case Comparator::Eq: return ops("");
      case Comparator::Ne: return "!= " + ops("");
      case Comparator::Lt: return "< " + ops("");
      case Comparator::Le: return "<= " + ops("");
      case Comparator::Gt: return "> " + ops("");
      case Comparator::Ge: return ">= " + ops("");
      case Comparator::Like: return "like " + ops("");
      case Comparator::In: return "in " + list();
      case Comparator::NotIn: return "not in " + list();
      case Comparator::Between: return "between " + ops(" and ");
      case Comparator::IsNull: return "is null";
      case Comparator::IsNotNull: return "is not null";
    }
    return ops("");
  }

  // Atom inside a compound filter: comparator is always explicit.
  std::string atom(const Condition& c) const {
    std::string out = expr(c.element) + " ";
    if (c.filter.comparator == Comparator::Eq) out += "= ";
    return out + filter_text(c.filter);
  }

  std::string compound(const Condition& c) const {
    if (c.kind == Condition::Kind::Predicate) return atom(c);
    const char* sep = c.kind == Condition::Kind::And ? " and " : " or ";
    std::string out;
    for (std::size_t i = 0; i < c.terms.size(); ++i) {
      if (i) out += sep;
      const Condition& t = c.terms[i];
      if (t.compound()) {
        out += "(" + compound(t) + ")";
      } else {
        out += atom(t);
      }
    }
    return out;
  }

 private:
  const RenderOptions& opt_;
  bool filter_;
};

std::string render_condition(const Condition& c, const RenderOptions& options) {
  const Renderer top(options, false);
  const Renderer filt(options, true);
  if (c.compound()) return "filter = " + quote(filt.compound(c), '\'');
  std::string out = "element = " + top.expr(c.element) + ", filter = ";
  const auto& f = c.filter;
  if (f.comparator == Comparator::Eq && f.operands.size() == 1) {
    if (const auto* lit = f.operands[0].as<Literal>(); lit && lit->is_numeric()) {
      return out + lit->text;
    }
  }
  return out + quote(filt.filter_text(f), '\'');
}

}  // namespace

Trajectory parse_trajectory(std::string_view text) {
  Parser p(Lexer(text, {1, 1}).run(), false);
  return p.trajectory();
}

Expression parse_expression(std::string_view text) {
  Parser p(Lexer(text, {1, 1}).run(), false);
  return p.single_expression();
}

QualifiedColumn parse_qualified_column(std::string_view text) {
  Parser p(Lexer(text, {1, 1}).run(), false);
  return p.single_column();
}

std::string render_column(const QualifiedColumn& c) {
  return quote_ident(c.table) + "." + quote_ident(c.column);
}

std::string render_expression(const Expression& e, const RenderOptions& options) {
  return Renderer(options, false).expr(e);
}

std::string render_filter_text(const FilterCondition& f, const RenderOptions& options) {
  return Renderer(options, true).filter_text(f);
}

std::string render_action(const Action& action, const RenderOptions& options) {
  const Renderer r(options, false);
  auto list = [&](const std::vector<Expression>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += r.expr(items[i]);
    }
    return out;
  };
  return std::visit(
      Overloaded{
          [&](const SelectAction& a) { return "select(" + list(a.elements) + ")"; },
          [&](const WhereAction& a) { return "where(" + render_condition(a.condition, options) + ")"; },
          [&](const GroupByAction& a) { return "groupby(" + list(a.elements) + ")"; },
          [&](const HavingAction& a) { return "having(" + render_condition(a.condition, options) + ")"; },
          [&](const OrderByAction& a) {
            return "orderby(by = " + r.expr(a.by) + ", " +
                   (a.order == SortOrder::Desc ? "desc" : "asc") + ")";
          },
          [&](const LimitAction& a) {
            if (a.offset) return "limit(" + std::to_string(*a.offset) + ", " + std::to_string(a.count) + ")";
            return "limit(" + std::to_string(a.count) + ")";
          },
          [&](const DistinctAction& a) { return "distinct(" + list(a.elements) + ")"; },
          [&](const SetOpAction& a) {
            return std::string(action_kind_name(action.kind())) + "(" + a.other + ")";
          },
          [&](const AggregateChainAction& a) {
            return std::string(aggregate_name(a.kind)) + "(" + (a.distinct ? "distinct " : "") +
                   r.expr(a.arg) + ")";
          },
          [&](const CastAction& a) { return "cast(" + r.expr(a.element) + ", " + a.type + ")"; },
          [&](const SubstrAction& a) {
            std::string out = "substr(" + r.expr(a.element) + ", " + std::to_string(a.start);
            if (a.length) out += ", " + std::to_string(*a.length);
            return out + ")";
          },
      },
      action.payload);
}

std::string render_step(const TrajectoryStep& step, const RenderOptions& options) {
  std::string out = step.binding + " = " + step.receiver;
  for (const auto& action : step.chain) out += "." + render_action(action, options);
  return out;
}

std::string render_trajectory(const Trajectory& t, const RenderOptions& options) {
  std::string out;
  for (const auto& step : t.steps()) out += render_step(step, options) + "\n";
  return out;
}

}  // namespace trajsql
