#include <charconv>

#include "sigkern/kernel_ast.hpp"

namespace sigkern {

namespace {

std::string fmt_float(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";  // keep the literal a float on reparse
  }
  return s;
}

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Pow: return "**";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::LAnd: return "&&";
    case BinOp::LOr: return "||";
    case BinOp::BAnd: return "&";
    case BinOp::BOr: return "|";
    case BinOp::BXor: return "^";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
  }
  return "?";
}

std::string type_text(const TypeSpec& t) {
  return t.kind == TypeSpecKind::Generic ? "$GENERIC()" : dtype_name(t.named);
}

std::string fmt(const Expr& e);

std::string fmt_param_access(const Expr& e) {
  std::string out = "$" + e.name + "(";
  for (std::size_t i = 0; i < e.bindings.size(); ++i) {
    if (i) out += ", ";
    out += e.bindings[i].dim + " => " + fmt(*e.bindings[i].index);
  }
  return out + ")";
}

std::string fmt(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: return std::to_string(e.ival);
    case ExprKind::FloatLit: return fmt_float(e.fval);
    case ExprKind::NanLit: return "NAN";
    case ExprKind::Ident: return e.name;
    case ExprKind::ParamAccess: return fmt_param_access(e);
    case ExprKind::SizeOf: return "$SIZE(" + e.name + ")";
    case ExprKind::CompRef: return "$COMP(" + e.name + ")";
    case ExprKind::MetaRef: {
      std::string out = "$PDL(" + e.name + ")->" + e.meta_field;
      if (e.index) out += "(" + fmt(*e.index) + ")";
      return out;
    }
    case ExprKind::TypeSwitch: {
      std::string out = "$T" + e.letters + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += fmt(*e.args[i]);
      }
      return out + ")";
    }
    case ExprKind::Call: {
      bool macro = e.name == "EquivCPOffs" || e.name == "EquivCPTrunc";
      std::string out = (macro ? "$" : "") + e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += fmt(*e.args[i]);
      }
      return out + ")";
    }
    case ExprKind::Unary: {
      const char* op = e.unop == UnOp::Neg   ? "-"
                       : e.unop == UnOp::Pos ? "+"
                       : e.unop == UnOp::LNot ? "!"
                                              : "~";
      return std::string("(") + op + fmt(*e.a) + ")";
    }
    case ExprKind::Binary:
      return "(" + fmt(*e.a) + " " + binop_text(e.binop) + " " + fmt(*e.b) + ")";
    case ExprKind::Ternary:
      return "(" + fmt(*e.a) + " ? " + fmt(*e.b) + " : " + fmt(*e.c) + ")";
    case ExprKind::Assign:
      return fmt(*e.a) + " " + e.assign_op + " " + fmt(*e.b);
    case ExprKind::IncDec: {
      const char* op = e.increment ? "++" : "--";
      return e.prefix ? op + fmt(*e.a) : fmt(*e.a) + op;
    }
    case ExprKind::Cast:
      return "((" + type_text(e.cast_type) + ")(" + fmt(*e.a) + "))";
    case ExprKind::IsBad:
      if (!e.var.empty()) return "$ISBADVAR(" + e.var + ", " + e.name + ")";
      return "$ISBAD(" + fmt(*e.a) + ")";
    case ExprKind::IsGood:
      if (!e.var.empty()) return "$ISGOODVAR(" + e.var + ", " + e.name + ")";
      return "$ISGOOD(" + fmt(*e.a) + ")";
    case ExprKind::SetBadVar:
      return "$SETBADVAR(" + e.var + ", " + e.name + ")";
  }
  return "?";
}

void fmt_stmts(const std::vector<StmtPtr>& body, int indent, std::string& out);

std::string fmt_stmt_inline(const Stmt& s) {
  if (s.kind == StmtKind::Declare) {
    std::string out = type_text(s.decl_type) + " ";
    for (std::size_t i = 0; i < s.decls.size(); ++i) {
      if (i) out += ", ";
      out += s.decls[i].first;
      if (s.decls[i].second) out += " = " + fmt(*s.decls[i].second);
    }
    return out + ";";
  }
  if (s.kind == StmtKind::ExprStmt) return fmt(*s.e) + ";";
  return ";";
}

// a statement-list slot that the grammar stores as a single child: print
// a Block's contents directly so braces stay canonical
void fmt_body(const std::vector<StmtPtr>& body, int indent, std::string& out) {
  if (body.size() == 1 && body[0]->kind == StmtKind::Block) {
    fmt_stmts(body[0]->body, indent, out);
  } else {
    fmt_stmts(body, indent, out);
  }
}

void fmt_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(indent * 2, ' ');
  switch (s.kind) {
    case StmtKind::Declare:
    case StmtKind::ExprStmt:
      out += pad + fmt_stmt_inline(s) + "\n";
      break;
    case StmtKind::Empty:
      out += pad + ";\n";
      break;
    case StmtKind::Block:
      out += pad + "{\n";
      fmt_stmts(s.body, indent + 1, out);
      out += pad + "}\n";
      break;
    case StmtKind::If:
      out += pad + "if (" + fmt(*s.e) + ") {\n";
      fmt_body(s.body, indent + 1, out);
      if (!s.else_body.empty()) {
        out += pad + "} else {\n";
        fmt_body(s.else_body, indent + 1, out);
      }
      out += pad + "}\n";
      break;
    case StmtKind::For: {
      std::string head = s.init ? fmt_stmt_inline(*s.init) : ";";
      head += s.cond ? " " + fmt(*s.cond) + ";" : " ;";
      if (s.step) head += " " + fmt(*s.step);
      out += pad + "for (" + head + ") {\n";
      fmt_body(s.body, indent + 1, out);
      out += pad + "}\n";
      break;
    }
    case StmtKind::While:
      out += pad + "while (" + fmt(*s.e) + ") {\n";
      fmt_body(s.body, indent + 1, out);
      out += pad + "}\n";
      break;
    case StmtKind::DoWhile:
      out += pad + "do {\n";
      fmt_body(s.body, indent + 1, out);
      out += pad + "} while (" + fmt(*s.e) + ");\n";
      break;
    case StmtKind::LoopOver:
      out += pad + "loop(" + s.dim + ") %{\n";
      fmt_stmts(s.body, indent + 1, out);
      out += pad + "%}\n";
      break;
    case StmtKind::ThreadLoop:
      out += pad + "threadloop %{\n";
      fmt_stmts(s.body, indent + 1, out);
      out += pad + "%}\n";
      break;
    case StmtKind::SetBad:
      out += pad + "$SETBAD(" + fmt(*s.e) + ");\n";
      break;
    case StmtKind::StateSetBad:
      out += pad + "$PDLSTATESETBAD(" + s.param + ");\n";
      break;
    case StmtKind::StateSetGood:
      out += pad + "$PDLSTATESETGOOD(" + s.param + ");\n";
      break;
    case StmtKind::SetNdims:
      out += pad + "$SETNDIMS(" + fmt(*s.e) + ");\n";
      break;
    case StmtKind::SetDims:
      out += pad + "$SETDIMS();\n";
      break;
    case StmtKind::DoCompDims:
      out += pad + "$DOCOMPDIMS();\n";
      break;
  }
}

void fmt_stmts(const std::vector<StmtPtr>& body, int indent, std::string& out) {
  for (const auto& sp : body) fmt_stmt(*sp, indent, out);
}

}  // namespace

std::string format_expr(const Expr& e) { return fmt(e); }

std::string format_kernel(const KernelAst& k) {
  std::string out;
  fmt_stmts(k.statements, 0, out);
  return out;
}

}  // namespace sigkern
