#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <string>

#include "sigkern/kernel_ast.hpp"

namespace sigkern {

namespace {

enum class Tk { Ident, Int, Float, Punct, Macro, End };

struct Token {
  Tk kind;
  std::string text;
  std::int64_t ival = 0;
  double fval = 0;
  std::size_t pos = 0;
};

const char* kMultiPunct[] = {"%{", "%}", "**", "=>", "->", "++", "--", "+=",
                             "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=",
                             "&&", "||", "<<", ">>"};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto syntax = [&](const std::string& msg) {
    fail(Errc::SyntaxError, msg + " at offset " + std::to_string(i));
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      i += 2;
      while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) ++i;
      if (i + 1 >= s.size()) syntax("unterminated block comment");
      i += 2;
      continue;
    }
    if (ident_char(c) && !std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < s.size() && ident_char(s[i])) ++i;
      std::string word = s.substr(start, i - start);
      if (word == "PDL_COMMENT") {
        // nest-safe comment idiom: PDL_COMMENT("...") vanishes entirely
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size() || s[i] != '(') syntax("PDL_COMMENT without (");
        int depth = 0;
        bool in_str = false;
        for (; i < s.size(); ++i) {
          if (in_str) {
            if (s[i] == '\\') ++i;
            else if (s[i] == '"') in_str = false;
          } else if (s[i] == '"') {
            in_str = true;
          } else if (s[i] == '(') {
            ++depth;
          } else if (s[i] == ')') {
            if (--depth == 0) { ++i; break; }
          }
        }
        if (depth != 0) syntax("unterminated PDL_COMMENT");
        continue;
      }
      out.push_back({Tk::Ident, word, 0, 0, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() &&
         std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t start = i;
      bool flt = false;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        flt = true;
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        flt = true;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      std::string num = s.substr(start, i - start);
      Token t;
      t.pos = start;
      t.text = num;
      if (flt) {
        t.kind = Tk::Float;
        t.fval = std::strtod(num.c_str(), nullptr);
      } else {
        t.kind = Tk::Int;
        t.ival = std::strtoll(num.c_str(), nullptr, 10);
      }
      out.push_back(std::move(t));
      continue;
    }
    if (c == '$') {
      std::size_t start = ++i;
      while (i < s.size() && ident_char(s[i])) ++i;
      if (i == start) syntax("'$' without a macro name");
      out.push_back({Tk::Macro, s.substr(start, i - start), 0, 0, start - 1});
      continue;
    }
    bool matched = false;
    for (const char* mp : kMultiPunct) {
      if (s.compare(i, 2, mp) == 0) {
        out.push_back({Tk::Punct, mp, 0, 0, i});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("+-*/%<>=!&|^~?:;,(){}[]").find(c) != std::string::npos) {
      out.push_back({Tk::Punct, std::string(1, c), 0, 0, i});
      ++i;
      continue;
    }
    syntax(std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tk::End, "", 0, 0, s.size()});
  return out;
}

const std::set<std::string> kBuiltins = {"sqrt", "pow",   "sin",   "cos", "log",
                                        "exp",  "fabs",  "floor", "ceil"};
const std::set<std::string> kMetaFields = {"ndims", "dims", "dimincs", "datatype"};

bool is_type_letters(const std::string& w) {
  if (w.size() < 2 || w[0] != 'T') return false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (std::string("BSULNIQFD").find(w[i]) == std::string::npos) return false;
  }
  return true;
}

ExprPtr mk(ExprKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

StmtPtr mks(StmtKind k) {
  auto s = std::make_shared<Stmt>();
  s->kind = k;
  return s;
}

struct Parser {
  std::vector<Token> toks;
  std::size_t ti = 0;
  const Signature& sig;
  const std::vector<std::string>& comp_names;
  KernelContext ctx;
  std::vector<std::string> declared;

  const Token& cur() const { return toks[ti]; }
  const Token& ahead(std::size_t k) const {
    return toks[std::min(ti + k, toks.size() - 1)];
  }
  bool at_punct(const char* p) const {
    return cur().kind == Tk::Punct && cur().text == p;
  }
  bool at_ident(const char* w) const {
    return cur().kind == Tk::Ident && cur().text == w;
  }
  bool accept_punct(const char* p) {
    if (at_punct(p)) { ++ti; return true; }
    return false;
  }
  [[noreturn]] void syntax(const std::string& msg) {
    fail(Errc::SyntaxError, msg + " near offset " + std::to_string(cur().pos));
  }
  void expect_punct(const char* p) {
    if (!accept_punct(p)) syntax(std::string("expected '") + p + "'");
  }
  std::string expect_ident() {
    if (cur().kind != Tk::Ident) syntax("expected identifier");
    return toks[ti++].text;
  }

  bool is_dtype_word(const std::string& w) const {
    try {
      dtype_from_name(w);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  // --- expressions ------------------------------------------------------

  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    ExprPtr lhs = parse_ternary();
    static const char* ops[] = {"=", "+=", "-=", "*=", "/=", "%="};
    for (const char* op : ops) {
      if (at_punct(op)) {
        ++ti;
        auto e = mk(ExprKind::Assign);
        e->assign_op = op;
        e->a = lhs;
        e->b = parse_assign();
        return e;
      }
    }
    return lhs;
  }

  ExprPtr parse_ternary() {
    ExprPtr c = parse_binary(0);
    if (accept_punct("?")) {
      auto e = mk(ExprKind::Ternary);
      e->a = c;
      e->b = parse_assign();
      expect_punct(":");
      e->c = parse_ternary();
      return e;
    }
    return c;
  }

  struct OpInfo { const char* text; BinOp op; int prec; };
  static const OpInfo* binop_at(const Token& t) {
    static const OpInfo table[] = {
        {"||", BinOp::LOr, 1},  {"&&", BinOp::LAnd, 2}, {"|", BinOp::BOr, 3},
        {"^", BinOp::BXor, 4},  {"&", BinOp::BAnd, 5},  {"==", BinOp::Eq, 6},
        {"!=", BinOp::Ne, 6},   {"<", BinOp::Lt, 7},    {">", BinOp::Gt, 7},
        {"<=", BinOp::Le, 7},   {">=", BinOp::Ge, 7},   {"<<", BinOp::Shl, 8},
        {">>", BinOp::Shr, 8},  {"+", BinOp::Add, 9},   {"-", BinOp::Sub, 9},
        {"*", BinOp::Mul, 10},  {"/", BinOp::Div, 10},  {"%", BinOp::Mod, 10},
    };
    if (t.kind != Tk::Punct) return nullptr;
    for (const auto& o : table) {
      if (t.text == o.text) return &o;
    }
    return nullptr;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_pow();
    while (const OpInfo* o = binop_at(cur())) {
      if (o->prec < min_prec) break;
      ++ti;
      ExprPtr rhs = parse_binary(o->prec + 1);
      auto e = mk(ExprKind::Binary);
      e->binop = o->op;
      e->a = lhs;
      e->b = rhs;
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_pow() {
    ExprPtr base = parse_unary();
    if (accept_punct("**")) {
      auto e = mk(ExprKind::Binary);
      e->binop = BinOp::Pow;
      e->a = base;
      e->b = parse_pow();
      return e;
    }
    return base;
  }

  ExprPtr parse_unary() {
    if (at_punct("-") || at_punct("+") || at_punct("!") || at_punct("~")) {
      std::string op = toks[ti++].text;
      auto e = mk(ExprKind::Unary);
      e->unop = op == "-"   ? UnOp::Neg
                : op == "+" ? UnOp::Pos
                : op == "!" ? UnOp::LNot
                            : UnOp::BNot;
      e->a = parse_unary();
      return e;
    }
    if (at_punct("++") || at_punct("--")) {
      bool inc = cur().text == "++";
      ++ti;
      auto e = mk(ExprKind::IncDec);
      e->prefix = true;
      e->increment = inc;
      e->a = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (at_punct("++") || at_punct("--")) {
      bool inc = cur().text == "++";
      ++ti;
      auto p = mk(ExprKind::IncDec);
      p->prefix = false;
      p->increment = inc;
      p->a = e;
      e = p;
    }
    return e;
  }

  // true when '(' at the current position starts a cast
  bool cast_ahead() const {
    if (!at_punct("(")) return false;
    const Token& t1 = ahead(1);
    if (t1.kind == Tk::Ident) {
      bool named = false;
      try {
        dtype_from_name(t1.text);
        named = true;
      } catch (const Error&) {}
      return named && ahead(2).kind == Tk::Punct && ahead(2).text == ")";
    }
    if (t1.kind == Tk::Macro && t1.text == "GENERIC") {
      return ahead(2).text == "(" && ahead(3).text == ")" && ahead(4).text == ")";
    }
    return false;
  }

  ExprPtr parse_primary() {
    if (cur().kind == Tk::Int) {
      auto e = mk(ExprKind::IntLit);
      e->ival = toks[ti++].ival;
      return e;
    }
    if (cur().kind == Tk::Float) {
      auto e = mk(ExprKind::FloatLit);
      e->fval = toks[ti++].fval;
      return e;
    }
    if (cast_ahead()) {
      expect_punct("(");
      TypeSpec ts;
      if (cur().kind == Tk::Macro) {
        ts.kind = TypeSpecKind::Generic;
        ++ti;
        expect_punct("(");
        expect_punct(")");
      } else {
        ts.kind = TypeSpecKind::Named;
        ts.named = dtype_from_name(expect_ident());
      }
      expect_punct(")");
      auto e = mk(ExprKind::Cast);
      e->cast_type = ts;
      e->a = parse_unary();
      return e;
    }
    if (accept_punct("(")) {
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (cur().kind == Tk::Ident) {
      std::string w = toks[ti++].text;
      if (w == "NAN") return mk(ExprKind::NanLit);
      if (at_punct("(")) {
        if (!kBuiltins.count(w)) {
          fail(Errc::UnknownBuiltin, "unknown function '" + w + "'");
        }
        ++ti;
        auto e = mk(ExprKind::Call);
        e->name = w;
        if (!accept_punct(")")) {
          do {
            e->args.push_back(parse_assign());
          } while (accept_punct(","));
          expect_punct(")");
        }
        return e;
      }
      auto e = mk(ExprKind::Ident);
      e->name = w;
      return e;
    }
    if (cur().kind == Tk::Macro) return parse_macro_expr();
    syntax("expected expression");
  }

  ExprPtr parse_macro_expr() {
    std::string m = toks[ti++].text;
    if (m == "SIZE") {
      expect_punct("(");
      auto e = mk(ExprKind::SizeOf);
      e->name = expect_ident();
      if (!sig.dim_names.count(e->name)) {
        fail(Errc::UnknownDim, "$SIZE names unknown dim '" + e->name + "'");
      }
      expect_punct(")");
      return e;
    }
    if (m == "COMP") {
      expect_punct("(");
      auto e = mk(ExprKind::CompRef);
      e->name = expect_ident();
      bool known = false;
      for (const auto& n : comp_names) {
        if (n == e->name) known = true;
      }
      if (!known) {
        fail(Errc::UnknownCompField, "unknown $COMP field '" + e->name + "'");
      }
      expect_punct(")");
      return e;
    }
    if (m == "GENERIC") {
      syntax("$GENERIC() is a type, valid only in casts and declarations");
    }
    if (m == "PDL") {
      expect_punct("(");
      std::string p = expect_ident();
      if (!sig.find(p)) fail(Errc::UnknownParam, "$PDL names unknown parameter '" + p + "'");
      expect_punct(")");
      expect_punct("->");
      auto e = mk(ExprKind::MetaRef);
      e->name = p;
      e->meta_field = expect_ident();
      if (!kMetaFields.count(e->meta_field)) {
        syntax("unknown $PDL field '" + e->meta_field + "'");
      }
      if (e->meta_field == "dims" || e->meta_field == "dimincs") {
        expect_punct("(");
        e->index = parse_expr();
        expect_punct(")");
      }
      return e;
    }
    if (m == "ISBAD" || m == "ISGOOD") {
      bool bad = m == "ISBAD";
      expect_punct("(");
      auto e = mk(bad ? ExprKind::IsBad : ExprKind::IsGood);
      e->a = parse_param_access_arg();
      expect_punct(")");
      return e;
    }
    if (m == "ISBADVAR" || m == "ISGOODVAR" || m == "SETBADVAR") {
      expect_punct("(");
      auto e = mk(m == "ISBADVAR"    ? ExprKind::IsBad
                  : m == "ISGOODVAR" ? ExprKind::IsGood
                                     : ExprKind::SetBadVar);
      e->var = expect_ident();
      expect_punct(",");
      e->name = expect_ident();
      if (!sig.find(e->name)) {
        fail(Errc::UnknownParam, "$" + m + " names unknown parameter '" + e->name + "'");
      }
      expect_punct(")");
      return e;
    }
    if (m == "EquivCPOffs" || m == "EquivCPTrunc") {
      expect_punct("(");
      auto e = mk(ExprKind::Call);
      e->name = m;
      do {
        e->args.push_back(parse_assign());
      } while (accept_punct(","));
      expect_punct(")");
      std::size_t want = m == "EquivCPOffs" ? 2 : 3;
      if (e->args.size() != want) syntax("$" + m + " takes " + std::to_string(want) + " arguments");
      return e;
    }
    if (is_type_letters(m) && ahead(0).text == "(") {
      auto e = mk(ExprKind::TypeSwitch);
      e->letters = m.substr(1);
      expect_punct("(");
      do {
        e->args.push_back(parse_assign());
      } while (accept_punct(","));
      expect_punct(")");
      if (e->args.size() != e->letters.size()) {
        syntax("$" + m + " has " + std::to_string(e->args.size()) +
               " alternatives for " + std::to_string(e->letters.size()) + " letters");
      }
      return e;
    }
    // $name(...): parameter access, or meta shorthand $PARENT(ndims) etc.
    if (!sig.find(m)) fail(Errc::UnknownParam, "unknown parameter '$" + m + "'");
    expect_punct("(");
    if (cur().kind == Tk::Ident && kMetaFields.count(cur().text)) {
      auto e = mk(ExprKind::MetaRef);
      e->name = m;
      e->meta_field = expect_ident();
      if (accept_punct("[")) {
        e->index = parse_expr();
        expect_punct("]");
      }
      expect_punct(")");
      return e;
    }
    auto e = mk(ExprKind::ParamAccess);
    e->name = m;
    if (!accept_punct(")")) {
      do {
        DimBinding b;
        b.dim = expect_ident();
        expect_punct("=>");
        b.index = parse_assign();
        const ParamSpec* p = sig.find(m);
        bool have = false;
        for (const auto& d : p->active_dims) {
          if (d.name == b.dim) have = true;
        }
        if (!have) {
          fail(Errc::UnknownDim,
               "parameter '" + m + "' has no dim '" + b.dim + "'");
        }
        for (const auto& prev : e->bindings) {
          if (prev.dim == b.dim) syntax("dim '" + b.dim + "' bound twice");
        }
        e->bindings.push_back(std::move(b));
      } while (accept_punct(","));
      expect_punct(")");
    }
    return e;
  }

  // argument of $ISBAD/$ISGOOD/$SETBAD: a param access written with or
  // without the leading '$'
  ExprPtr parse_param_access_arg() {
    if (cur().kind == Tk::Macro) {
      ExprPtr e = parse_macro_expr();
      if (e->kind != ExprKind::ParamAccess) syntax("expected a parameter access");
      return e;
    }
    std::string p = expect_ident();
    if (!sig.find(p)) fail(Errc::UnknownParam, "unknown parameter '" + p + "'");
    expect_punct("(");
    auto e = mk(ExprKind::ParamAccess);
    e->name = p;
    if (!accept_punct(")")) {
      do {
        DimBinding b;
        b.dim = expect_ident();
        expect_punct("=>");
        b.index = parse_assign();
        const ParamSpec* ps = sig.find(p);
        bool have = false;
        for (const auto& d : ps->active_dims) {
          if (d.name == b.dim) have = true;
        }
        if (!have) fail(Errc::UnknownDim, "parameter '" + p + "' has no dim '" + b.dim + "'");
        e->bindings.push_back(std::move(b));
      } while (accept_punct(","));
      expect_punct(")");
    }
    return e;
  }

  // --- statements -------------------------------------------------------

  bool declare_ahead() const {
    if (cur().kind == Tk::Ident) {
      bool named = false;
      try {
        dtype_from_name(cur().text);
        named = true;
      } catch (const Error&) {}
      return named && ahead(1).kind == Tk::Ident;
    }
    if (cur().kind == Tk::Macro && cur().text == "GENERIC") {
      return ahead(1).text == "(" && ahead(2).text == ")";
    }
    return false;
  }

  StmtPtr parse_stmt() {
    if (accept_punct(";")) return mks(StmtKind::Empty);
    if (accept_punct("{")) {
      auto s = mks(StmtKind::Block);
      while (!accept_punct("}")) {
        if (cur().kind == Tk::End) syntax("unterminated '{'");
        s->body.push_back(parse_stmt());
      }
      return s;
    }
    if (declare_ahead()) return parse_declare();
    if (at_ident("if")) {
      ++ti;
      expect_punct("(");
      auto s = mks(StmtKind::If);
      s->e = parse_expr();
      expect_punct(")");
      s->body.push_back(parse_stmt());
      if (at_ident("else")) {
        ++ti;
        s->else_body.push_back(parse_stmt());
      }
      return s;
    }
    if (at_ident("for")) {
      ++ti;
      expect_punct("(");
      auto s = mks(StmtKind::For);
      if (!accept_punct(";")) {
        if (declare_ahead()) {
          s->init = parse_declare();
        } else {
          auto es = mks(StmtKind::ExprStmt);
          es->e = parse_expr();
          s->init = es;
          expect_punct(";");
        }
      }
      if (!at_punct(";")) s->cond = parse_expr();
      expect_punct(";");
      if (!at_punct(")")) s->step = parse_expr();
      expect_punct(")");
      s->body.push_back(parse_stmt());
      return s;
    }
    if (at_ident("while")) {
      ++ti;
      expect_punct("(");
      auto s = mks(StmtKind::While);
      s->e = parse_expr();
      expect_punct(")");
      s->body.push_back(parse_stmt());
      return s;
    }
    if (at_ident("do")) {
      ++ti;
      auto s = mks(StmtKind::DoWhile);
      s->body.push_back(parse_stmt());
      if (!at_ident("while")) syntax("expected 'while' after do-body");
      ++ti;
      expect_punct("(");
      s->e = parse_expr();
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (at_ident("loop")) {
      ++ti;
      expect_punct("(");
      auto s = mks(StmtKind::LoopOver);
      s->dim = expect_ident();
      if (!sig.dim_names.count(s->dim)) {
        fail(Errc::UnknownDim, "loop() names unknown dim '" + s->dim + "'");
      }
      expect_punct(")");
      expect_punct("%{");
      while (!accept_punct("%}")) {
        if (cur().kind == Tk::End) syntax("unterminated loop body");
        s->body.push_back(parse_stmt());
      }
      return s;
    }
    if (at_ident("threadloop")) {
      ++ti;
      auto s = mks(StmtKind::ThreadLoop);
      expect_punct("%{");
      while (!accept_punct("%}")) {
        if (cur().kind == Tk::End) syntax("unterminated threadloop body");
        s->body.push_back(parse_stmt());
      }
      return s;
    }
    if (cur().kind == Tk::Macro) {
      const std::string& m = cur().text;
      if (m == "SETBAD") {
        ++ti;
        expect_punct("(");
        auto s = mks(StmtKind::SetBad);
        s->e = parse_param_access_arg();
        expect_punct(")");
        expect_punct(";");
        return s;
      }
      if (m == "PDLSTATESETBAD" || m == "PDLSTATESETGOOD") {
        bool bad = m == "PDLSTATESETBAD";
        ++ti;
        expect_punct("(");
        auto s = mks(bad ? StmtKind::StateSetBad : StmtKind::StateSetGood);
        s->param = expect_ident();
        if (!sig.find(s->param)) {
          fail(Errc::UnknownParam, "$" + m + " names unknown parameter '" + s->param + "'");
        }
        expect_punct(")");
        expect_punct(";");
        return s;
      }
      if (m == "SETNDIMS") {
        ++ti;
        expect_punct("(");
        auto s = mks(StmtKind::SetNdims);
        s->e = parse_expr();
        expect_punct(")");
        expect_punct(";");
        return s;
      }
      if (m == "SETDIMS" || m == "DOCOMPDIMS") {
        bool dims = m == "SETDIMS";
        ++ti;
        expect_punct("(");
        expect_punct(")");
        expect_punct(";");
        return mks(dims ? StmtKind::SetDims : StmtKind::DoCompDims);
      }
    }
    auto s = mks(StmtKind::ExprStmt);
    s->e = parse_expr();
    expect_punct(";");
    return s;
  }

  StmtPtr parse_declare() {
    auto s = mks(StmtKind::Declare);
    if (cur().kind == Tk::Macro) {
      ++ti;
      expect_punct("(");
      expect_punct(")");
      s->decl_type.kind = TypeSpecKind::Generic;
    } else {
      s->decl_type.kind = TypeSpecKind::Named;
      s->decl_type.named = dtype_from_name(expect_ident());
    }
    do {
      std::string name = expect_ident();
      ExprPtr init;
      if (accept_punct("=")) init = parse_assign();
      declared.push_back(name);
      s->decls.emplace_back(std::move(name), init);
    } while (accept_punct(","));
    expect_punct(";");
    return s;
  }

  KernelAst parse() {
    KernelAst k;
    while (cur().kind != Tk::End) k.statements.push_back(parse_stmt());
    k.declared_vars = declared;
    return k;
  }
};

// --- post-parse validation ----------------------------------------------

struct Validator {
  const Signature& sig;
  KernelContext ctx;
  bool thread_seen = false;

  [[noreturn]] void reject(Errc c, const std::string& msg) { fail(c, msg); }

  void check_param_access(const Expr& e, const std::set<std::string>& loopdims) {
    if (ctx == KernelContext::RedoDims || ctx == KernelContext::FlowRedoDims) {
      reject(Errc::ElementAccessInRedoDims,
             "element access on '" + e.name + "' is unavailable while computing dims");
    }
    if (ctx == KernelContext::MakeComp) {
      reject(Errc::KernelValidationError,
             "element access on '" + e.name + "' is unavailable in MakeComp");
    }
    const ParamSpec* p = sig.find(e.name);
    for (const auto& d : p->active_dims) {
      bool bound = loopdims.count(d.name) != 0;
      for (const auto& b : e.bindings) {
        if (b.dim == d.name) bound = true;
      }
      if (!bound) {
        reject(Errc::UnboundDim, "dim '" + d.name + "' of parameter '" + e.name +
                                     "' is not bound here");
      }
    }
  }

  void walk_expr(const Expr& e, const std::set<std::string>& loopdims,
                 bool as_target) {
    switch (e.kind) {
      case ExprKind::SizeOf:
        if ((ctx == KernelContext::RedoDims || ctx == KernelContext::FlowRedoDims) &&
            !as_target) {
          reject(Errc::SizeReadInRedoDims,
                 "$SIZE(" + e.name + ") is write-only while computing dims");
        }
        if (ctx != KernelContext::RedoDims && as_target) {
          reject(Errc::KernelValidationError,
                 "$SIZE(" + e.name + ") is read-only outside RedoDimsCode");
        }
        break;
      case ExprKind::ParamAccess:
        check_param_access(e, loopdims);
        for (const auto& b : e.bindings) walk_expr(*b.index, loopdims, false);
        break;
      case ExprKind::MetaRef:
        if (ctx == KernelContext::Code && as_target) {
          reject(Errc::KernelValidationError,
                 "metadata of '" + e.name + "' is read-only in Code");
        }
        if (e.index) walk_expr(*e.index, loopdims, false);
        break;
      case ExprKind::Call:
        if ((e.name == "EquivCPOffs" || e.name == "EquivCPTrunc") &&
            ctx != KernelContext::EquivCP) {
          reject(Errc::KernelValidationError,
                 "$" + e.name + " is valid only in EquivCPOffsCode");
        }
        for (const auto& a : e.args) walk_expr(*a, loopdims, false);
        break;
      case ExprKind::TypeSwitch:
        for (const auto& a : e.args) walk_expr(*a, loopdims, false);
        break;
      case ExprKind::Assign: {
        const Expr& t = *e.a;
        if (t.kind != ExprKind::Ident && t.kind != ExprKind::ParamAccess &&
            t.kind != ExprKind::SizeOf && t.kind != ExprKind::MetaRef &&
            t.kind != ExprKind::CompRef) {
          reject(Errc::SyntaxError, "assignment target is not an lvalue");
        }
        walk_expr(t, loopdims, true);
        walk_expr(*e.b, loopdims, false);
        break;
      }
      case ExprKind::IsBad:
      case ExprKind::IsGood:
      case ExprKind::SetBadVar:
        if (e.a) walk_expr(*e.a, loopdims, e.kind == ExprKind::SetBadVar);
        break;
      case ExprKind::IncDec:
        walk_expr(*e.a, loopdims, true);
        break;
      case ExprKind::Unary:
      case ExprKind::Cast:
        walk_expr(*e.a, loopdims, false);
        break;
      case ExprKind::Binary:
        walk_expr(*e.a, loopdims, false);
        walk_expr(*e.b, loopdims, false);
        break;
      case ExprKind::Ternary:
        walk_expr(*e.a, loopdims, false);
        walk_expr(*e.b, loopdims, false);
        walk_expr(*e.c, loopdims, false);
        break;
      default:
        break;
    }
  }

  void walk_stmts(const std::vector<StmtPtr>& body, std::set<std::string> loopdims,
                  bool in_thread) {
    for (const auto& sp : body) walk_stmt(*sp, loopdims, in_thread);
  }

  void walk_stmt(const Stmt& s, std::set<std::string>& loopdims, bool in_thread) {
    switch (s.kind) {
      case StmtKind::LoopOver: {
        if (ctx != KernelContext::Code) {
          reject(Errc::KernelValidationError, "loop() is unavailable in this block");
        }
        auto inner = loopdims;
        inner.insert(s.dim);
        walk_stmts(s.body, inner, in_thread);
        break;
      }
      case StmtKind::ThreadLoop:
        if (ctx != KernelContext::Code) {
          reject(Errc::KernelValidationError, "threadloop is unavailable in this block");
        }
        if (in_thread) reject(Errc::KernelValidationError, "threadloop may not nest");
        if (thread_seen) {
          reject(Errc::KernelValidationError, "at most one threadloop per kernel");
        }
        thread_seen = true;
        walk_stmts(s.body, loopdims, true);
        break;
      case StmtKind::SetNdims:
      case StmtKind::SetDims:
        if (ctx != KernelContext::FlowRedoDims) {
          reject(Errc::KernelValidationError,
                 "$SETNDIMS/$SETDIMS are valid only in dataflow RedoDims");
        }
        if (s.e) walk_expr(*s.e, loopdims, false);
        break;
      case StmtKind::SetBad:
        walk_expr(*s.e, loopdims, true);
        break;
      case StmtKind::If:
        walk_expr(*s.e, loopdims, false);
        walk_stmts(s.body, loopdims, in_thread);
        walk_stmts(s.else_body, loopdims, in_thread);
        break;
      case StmtKind::While:
      case StmtKind::DoWhile:
        walk_expr(*s.e, loopdims, false);
        walk_stmts(s.body, loopdims, in_thread);
        break;
      case StmtKind::For:
        if (s.init) walk_stmt(*s.init, loopdims, in_thread);
        if (s.cond) walk_expr(*s.cond, loopdims, false);
        if (s.step) walk_expr(*s.step, loopdims, false);
        walk_stmts(s.body, loopdims, in_thread);
        break;
      case StmtKind::Block:
        walk_stmts(s.body, loopdims, in_thread);
        break;
      case StmtKind::Declare:
        for (const auto& [n, init] : s.decls) {
          if (init) walk_expr(*init, loopdims, false);
        }
        break;
      case StmtKind::ExprStmt:
        walk_expr(*s.e, loopdims, false);
        break;
      default:
        break;
    }
  }
};

}  // namespace

KernelAst parse_kernel(const std::string& text, const Signature& sig,
                       const std::vector<std::string>& otherpars,
                       KernelContext ctx) {
  Parser p{tokenize(text), 0, sig, otherpars, ctx, {}};
  KernelAst k = p.parse();
  Validator v{sig, ctx};
  v.walk_stmts(k.statements, {}, false);
  return k;
}

}  // namespace sigkern
