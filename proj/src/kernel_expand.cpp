#include <charconv>

#include "sigkern/kernel_ast.hpp"

namespace sigkern {

namespace {

struct Lower {
  const Signature& sig;
  Dtype generic;
  Variant variant;
  bool bounds;

  Dtype exec_dtype(const std::string& param) const {
    const ParamSpec* p = sig.find(param);
    if (p && p->forced_dtype) {
      if (p->plus_flag) return promote(*p->forced_dtype, generic);
      return *p->forced_dtype;
    }
    return generic;
  }

  std::string num(double v) const {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) {
      s += ".0";
    }
    return s;
  }

  std::string offset_expr(const Expr& pa) const {
    std::string off = "_off_" + pa.name;
    for (const auto& b : pa.bindings) {
      off += " + (" + lower(*b.index) + ") * _inc_" + pa.name + "_" + b.dim;
    }
    const ParamSpec* p = sig.find(pa.name);
    for (const auto& d : p->active_dims) {
      bool explicit_bound = false;
      for (const auto& b : pa.bindings) {
        if (b.dim == d.name) explicit_bound = true;
      }
      if (!explicit_bound) {
        // bound by an enclosing loop over the same-named index variable
        off += " + " + d.name + " * _inc_" + pa.name + "_" + d.name;
      }
    }
    return off;
  }

  std::string access(const Expr& pa) const {
    std::string off = offset_expr(pa);
    if (bounds) return "P_" + pa.name + "[_ck(" + off + ", _n_" + pa.name + ")]";
    return "P_" + pa.name + "[" + off + "]";
  }

  std::string bad_test(const std::string& access_text, const std::string& param) const {
    if (is_float_dtype(exec_dtype(param))) return "isnan(" + access_text + ")";
    return "(" + access_text + " == _bad_" + param + ")";
  }

  std::string type_switch(const Expr& e) const {
    char want = letter_of(generic);
    for (std::size_t i = 0; i < e.letters.size(); ++i) {
      if (letter_matches(generic, e.letters[i])) return lower(*e.args[i]);
    }
    fail(Errc::TypeSwitchMissingLetter,
         std::string("letter '") + want + "' absent from $T" + e.letters);
  }

  std::string lower(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::IntLit: return std::to_string(e.ival);
      case ExprKind::FloatLit: return num(e.fval);
      case ExprKind::NanLit: return "NAN";
      case ExprKind::Ident: return e.name;
      case ExprKind::ParamAccess: return access(e);
      case ExprKind::SizeOf: return "_size_" + e.name;
      case ExprKind::CompRef: return "_comp_" + e.name;
      case ExprKind::MetaRef: {
        if (e.meta_field == "ndims") return "_ndims_" + e.name;
        if (e.meta_field == "datatype") return "_datatype_" + e.name;
        return "_" + e.meta_field + "_" + e.name + "[" + lower(*e.index) + "]";
      }
      case ExprKind::TypeSwitch: return type_switch(e);
      case ExprKind::Call: {
        if (e.name == "EquivCPOffs") {
          return "_equiv_cp(" + lower(*e.args[0]) + ", " + lower(*e.args[1]) + ")";
        }
        if (e.name == "EquivCPTrunc") {
          return "_equiv_cp_oob(" + lower(*e.args[0]) + ", " + lower(*e.args[1]) +
                 ", " + lower(*e.args[2]) + ")";
        }
        std::string out = e.name + "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out += ", ";
          out += lower(*e.args[i]);
        }
        return out + ")";
      }
      case ExprKind::Unary: {
        const char* op = e.unop == UnOp::Neg    ? "-"
                         : e.unop == UnOp::Pos  ? "+"
                         : e.unop == UnOp::LNot ? "!"
                                                : "~";
        return std::string("(") + op + lower(*e.a) + ")";
      }
      case ExprKind::Binary: {
        if (e.binop == BinOp::Pow) {
          return "pow(" + lower(*e.a) + ", " + lower(*e.b) + ")";
        }
        static const char* txt[] = {"+",  "-",  "*",  "/",  "%",  "**", "<",
                                    ">",  "<=", ">=", "==", "!=", "&&", "||",
                                    "&",  "|",  "^",  "<<", ">>"};
        return "(" + lower(*e.a) + " " + txt[static_cast<int>(e.binop)] + " " +
               lower(*e.b) + ")";
      }
      case ExprKind::Ternary:
        return "(" + lower(*e.a) + " ? " + lower(*e.b) + " : " + lower(*e.c) + ")";
      case ExprKind::Assign:
        return lower(*e.a) + " " + e.assign_op + " " + lower(*e.b);
      case ExprKind::IncDec: {
        const char* op = e.increment ? "++" : "--";
        return e.prefix ? op + lower(*e.a) : lower(*e.a) + op;
      }
      case ExprKind::Cast: {
        std::string t = e.cast_type.kind == TypeSpecKind::Generic
                            ? dtype_name(generic)
                            : dtype_name(e.cast_type.named);
        return "((" + t + ")(" + lower(*e.a) + "))";
      }
      case ExprKind::IsBad:
        if (variant == Variant::Good) return "0";
        if (!e.var.empty()) return bad_test(e.var, e.name);
        return bad_test(access(*e.a), e.a->name);
      case ExprKind::IsGood:
        if (variant == Variant::Good) return "1";
        if (!e.var.empty()) return "!" + bad_test(e.var, e.name);
        return "!" + bad_test(access(*e.a), e.a->name);
      case ExprKind::SetBadVar:
        return "(" + e.var + " = _bad_" + e.name + " /* sets badflag of " +
               e.name + " */)";
    }
    return "?";
  }

  void stmts(const std::vector<StmtPtr>& body, int indent, std::string& out) const {
    for (const auto& sp : body) stmt(*sp, indent, out);
  }

  void body_of(const std::vector<StmtPtr>& body, int indent, std::string& out) const {
    if (body.size() == 1 && body[0]->kind == StmtKind::Block) {
      stmts(body[0]->body, indent, out);
    } else {
      stmts(body, indent, out);
    }
  }

  std::string inline_stmt(const Stmt& s) const {
    if (s.kind == StmtKind::Declare) {
      std::string t = s.decl_type.kind == TypeSpecKind::Generic
                          ? dtype_name(generic)
                          : dtype_name(s.decl_type.named);
      std::string out = t + " ";
      for (std::size_t i = 0; i < s.decls.size(); ++i) {
        if (i) out += ", ";
        out += s.decls[i].first;
        if (s.decls[i].second) out += " = " + lower(*s.decls[i].second);
      }
      return out + ";";
    }
    if (s.kind == StmtKind::ExprStmt) return lower(*s.e) + ";";
    return ";";
  }

  void emit_thread_sweep(const std::vector<StmtPtr>& body, int indent,
                         std::string& out) const {
    std::string pad(indent * 2, ' ');
    out += pad + "for (indx _t = 0; _t < _nthread; _t++) {\n";
    stmts(body, indent + 1, out);
    std::string pad1((indent + 1) * 2, ' ');
    for (const auto& p : sig.params) {
      out += pad1 + "_off_" + p.name + " += _tinc_" + p.name + ";\n";
    }
    out += pad + "}\n";
  }

  void stmt(const Stmt& s, int indent, std::string& out) const {
    std::string pad(indent * 2, ' ');
    switch (s.kind) {
      case StmtKind::Declare:
      case StmtKind::ExprStmt:
        out += pad + inline_stmt(s) + "\n";
        break;
      case StmtKind::Empty:
        out += pad + ";\n";
        break;
      case StmtKind::Block:
        out += pad + "{\n";
        stmts(s.body, indent + 1, out);
        out += pad + "}\n";
        break;
      case StmtKind::If:
        out += pad + "if (" + lower(*s.e) + ") {\n";
        body_of(s.body, indent + 1, out);
        if (!s.else_body.empty()) {
          out += pad + "} else {\n";
          body_of(s.else_body, indent + 1, out);
        }
        out += pad + "}\n";
        break;
      case StmtKind::For: {
        std::string head = s.init ? inline_stmt(*s.init) : ";";
        head += s.cond ? " " + lower(*s.cond) + ";" : " ;";
        if (s.step) head += " " + lower(*s.step);
        out += pad + "for (" + head + ") {\n";
        body_of(s.body, indent + 1, out);
        out += pad + "}\n";
        break;
      }
      case StmtKind::While:
        out += pad + "while (" + lower(*s.e) + ") {\n";
        body_of(s.body, indent + 1, out);
        out += pad + "}\n";
        break;
      case StmtKind::DoWhile:
        out += pad + "do {\n";
        body_of(s.body, indent + 1, out);
        out += pad + "} while (" + lower(*s.e) + ");\n";
        break;
      case StmtKind::LoopOver:
        out += pad + "for (indx " + s.dim + " = 0; " + s.dim + " < _size_" +
               s.dim + "; " + s.dim + "++) {\n";
        stmts(s.body, indent + 1, out);
        out += pad + "}\n";
        break;
      case StmtKind::ThreadLoop:
        emit_thread_sweep(s.body, indent, out);
        break;
      case StmtKind::SetBad: {
        std::string lhs = access(*s.e);
        out += pad + lhs + " = _bad_" + s.e->name + "; /* sets badflag of " +
               s.e->name + " */\n";
        break;
      }
      case StmtKind::StateSetBad:
        out += pad + "_badflag_" + s.param + " = 1;\n";
        break;
      case StmtKind::StateSetGood:
        out += pad + "_badflag_" + s.param + " = 0;\n";
        break;
      case StmtKind::SetNdims:
        out += pad + "_set_ndims(" + lower(*s.e) + ");\n";
        break;
      case StmtKind::SetDims:
        out += pad + "_set_dims();\n";
        break;
      case StmtKind::DoCompDims:
        out += pad + ";\n";
        break;
    }
  }
};

bool has_threadloop(const std::vector<StmtPtr>& body) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::ThreadLoop) return true;
    if (!s->body.empty() && has_threadloop(s->body)) return true;
    if (!s->else_body.empty() && has_threadloop(s->else_body)) return true;
  }
  return false;
}

}  // namespace

std::string expand_kernel(const KernelAst& k, const Signature& sig, Dtype generic,
                          Variant variant, bool bounds) {
  Lower lo{sig, generic, variant, bounds};
  std::string out;
  out += "/* generic=" + std::string(dtype_name(generic)) +
         " variant=" + (variant == Variant::Good ? "good" : "bad") +
         " bounds=" + (bounds ? "on" : "off") + " */\n";
  for (const auto& p : sig.params) {
    std::string line = dtype_name(lo.exec_dtype(p.name));
    line += " *P_" + p.name + "; /* dims:";
    if (p.active_dims.empty()) {
      line += " (scalar)";
    } else {
      for (const auto& d : p.active_dims) line += " " + d.name;
    }
    line += " */";
    out += line + "\n";
  }
  if (has_threadloop(k.statements)) {
    lo.stmts(k.statements, 0, out);
  } else {
    lo.emit_thread_sweep(k.statements, 0, out);
  }
  return out;
}

}  // namespace sigkern
