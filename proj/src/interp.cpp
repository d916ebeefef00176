#include <cmath>

#include "sigkern/interp.hpp"

namespace sigkern {

Stats& stats() {
  static Stats s;
  return s;
}

Value eval_binary_value(BinOp op, const Value& a, const Value& b) {
  bool flt = a.flt || b.flt;
  switch (op) {
    case BinOp::Pow:
      return Value::of_float(std::pow(a.as_double(), b.as_double()));
    case BinOp::Add:
      if (flt) return Value::of_float(a.as_double() + b.as_double());
      return Value::of_int(static_cast<std::int64_t>(
          static_cast<std::uint64_t>(a.i) + static_cast<std::uint64_t>(b.i)));
    case BinOp::Sub:
      if (flt) return Value::of_float(a.as_double() - b.as_double());
      return Value::of_int(static_cast<std::int64_t>(
          static_cast<std::uint64_t>(a.i) - static_cast<std::uint64_t>(b.i)));
    case BinOp::Mul:
      if (flt) return Value::of_float(a.as_double() * b.as_double());
      return Value::of_int(static_cast<std::int64_t>(
          static_cast<std::uint64_t>(a.i) * static_cast<std::uint64_t>(b.i)));
    case BinOp::Div:
      if (flt) return Value::of_float(a.as_double() / b.as_double());
      if (b.i == 0) {
        ++stats().int_div_by_zero;
        return Value::of_int(0);
      }
      if (a.i == INT64_MIN && b.i == -1) return Value::of_int(INT64_MIN);
      return Value::of_int(a.i / b.i);
    case BinOp::Mod:
      if (flt) return Value::of_float(std::fmod(a.as_double(), b.as_double()));
      if (b.i == 0) {
        ++stats().int_div_by_zero;
        return Value::of_int(0);
      }
      if (a.i == INT64_MIN && b.i == -1) return Value::of_int(0);
      return Value::of_int(a.i % b.i);
    case BinOp::Lt:
      return Value::of_int(flt ? a.as_double() < b.as_double() : a.i < b.i);
    case BinOp::Gt:
      return Value::of_int(flt ? a.as_double() > b.as_double() : a.i > b.i);
    case BinOp::Le:
      return Value::of_int(flt ? a.as_double() <= b.as_double() : a.i <= b.i);
    case BinOp::Ge:
      return Value::of_int(flt ? a.as_double() >= b.as_double() : a.i >= b.i);
    case BinOp::Eq:
      return Value::of_int(flt ? a.as_double() == b.as_double() : a.i == b.i);
    case BinOp::Ne:
      return Value::of_int(flt ? a.as_double() != b.as_double() : a.i != b.i);
    case BinOp::LAnd:
      return Value::of_int(a.truthy() && b.truthy());
    case BinOp::LOr:
      return Value::of_int(a.truthy() || b.truthy());
    case BinOp::BAnd:
      return Value::of_int(a.as_int() & b.as_int());
    case BinOp::BOr:
      return Value::of_int(a.as_int() | b.as_int());
    case BinOp::BXor:
      return Value::of_int(a.as_int() ^ b.as_int());
    case BinOp::Shl:
      return Value::of_int(static_cast<std::int64_t>(
          static_cast<std::uint64_t>(a.as_int()) << (b.as_int() & 63)));
    case BinOp::Shr:
      return Value::of_int(a.as_int() >> (b.as_int() & 63));
  }
  return Value();
}

namespace {

struct Var {
  Dtype type = Dtype::Double;
  Value v;
};

struct Exec {
  InterpContext& ctx;
  std::vector<std::map<std::string, Var>> scopes;
  std::vector<std::int64_t> cur_off;  // per-param thread offset

  explicit Exec(InterpContext& c) : ctx(c), cur_off(c.params.size(), 0) {
    scopes.emplace_back();
    for (const auto& [name, v] : ctx.preset_vars) {
      scopes.back()[name] = Var{v.flt ? Dtype::Double : Dtype::LongLong, v};
    }
  }

  ParamBinding& param(const std::string& name) {
    for (std::size_t i = 0; i < ctx.params.size(); ++i) {
      if (ctx.params[i].name == name) return ctx.params[i];
    }
    fail(Errc::UnknownParam, "parameter '" + name + "' not bound");
  }

  std::size_t param_index(const std::string& name) {
    for (std::size_t i = 0; i < ctx.params.size(); ++i) {
      if (ctx.params[i].name == name) return i;
    }
    fail(Errc::UnknownParam, "parameter '" + name + "' not bound");
  }

  Var* find_var(const std::string& name) {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  // --- element addressing ----------------------------------------------

  std::int64_t access_offset(const Expr& pa) {
    std::size_t pi = param_index(pa.name);
    const ParamBinding& pb = ctx.params[pi];
    std::int64_t off = cur_off[pi];
    const ParamSpec* ps = ctx.sig.find(pa.name);
    for (const auto& d : ps->active_dims) {
      const Expr* bound = nullptr;
      for (const auto& b : pa.bindings) {
        if (b.dim == d.name) bound = b.index.get();
      }
      std::int64_t idx;
      if (bound) {
        idx = eval(*bound).as_int();
      } else {
        Var* v = find_var(d.name);
        if (!v) {
          fail(Errc::UnboundDim, "dim '" + d.name + "' has no index here");
        }
        idx = v->v.as_int();
      }
      auto it = pb.active_strides.find(d.name);
      std::int64_t stride = it == pb.active_strides.end() ? 0 : it->second;
      if (ctx.bounds) {
        auto sz = ctx.dim_sizes.find(d.name);
        if (sz != ctx.dim_sizes.end() && (idx < 0 || idx >= sz->second)) {
          fail(Errc::IndexOutOfBounds,
               "index " + std::to_string(idx) + " outside dim '" + d.name +
                   "' of size " + std::to_string(sz->second));
        }
      }
      off += idx * stride;
    }
    return off;
  }

  Value read_param(const Expr& pa) {
    const ParamBinding& pb = param(pa.name);
    return pb.arr->get_elem_unchecked(access_offset(pa));
  }

  void write_param(const Expr& pa, const Value& v) {
    ParamBinding& pb = param(pa.name);
    pb.arr->set_elem_unchecked(access_offset(pa), v);
  }

  // --- metadata ---------------------------------------------------------

  Value read_meta(const Expr& e) {
    if (ctx.child_stash && e.name == ctx.child_param) {
      ChildShapeStash& st = *ctx.child_stash;
      if (e.meta_field == "ndims") return Value::of_int(st.ndims);
      if (e.meta_field == "datatype") {
        return Value::of_int(st.datatype ? static_cast<int>(*st.datatype) : 0);
      }
      std::int64_t i = eval(*e.index).as_int();
      auto& vec = e.meta_field == "dims" ? st.dims : st.dimincs;
      if (i < 0 || i >= static_cast<std::int64_t>(vec.size())) {
        fail(Errc::IndexOutOfBounds, "shape index " + std::to_string(i));
      }
      return Value::of_int(vec[i]);
    }
    const ParamBinding& pb = param(e.name);
    const NdArray& a = *pb.arr;
    if (e.meta_field == "ndims") return Value::of_int(a.ndims());
    if (e.meta_field == "datatype") return Value::of_int(static_cast<int>(a.dtype()));
    std::int64_t i = eval(*e.index).as_int();
    const auto& vec = e.meta_field == "dims" ? a.dims() : a.dimincs();
    if (i < 0 || i >= static_cast<std::int64_t>(vec.size())) {
      fail(Errc::IndexOutOfBounds, "shape index " + std::to_string(i) +
                                       " outside ndims " + std::to_string(a.ndims()));
    }
    return Value::of_int(vec[i]);
  }

  void write_meta(const Expr& e, const Value& v) {
    if (!ctx.child_stash || e.name != ctx.child_param) {
      fail(Errc::KernelValidationError,
           "metadata of '" + e.name + "' is not assignable");
    }
    ChildShapeStash& st = *ctx.child_stash;
    if (e.meta_field == "ndims") {
      st.ndims = v.as_int();
      st.dims.assign(st.ndims, 0);
      st.dimincs.assign(st.ndims, 0);
      return;
    }
    if (e.meta_field == "datatype") {
      std::int64_t code = v.as_int();
      if (code < 0 || code > 7) fail(Errc::UnknownType, "bad datatype code");
      st.datatype = static_cast<Dtype>(code);
      return;
    }
    std::int64_t i = eval(*e.index).as_int();
    auto& vec = e.meta_field == "dims" ? st.dims : st.dimincs;
    if (i < 0 || i >= static_cast<std::int64_t>(vec.size())) {
      fail(Errc::IndexOutOfBounds,
           "shape index " + std::to_string(i) + " outside ndims " +
               std::to_string(st.ndims) + " (call $SETNDIMS first)");
    }
    vec[i] = v.as_int();
  }

  // --- expressions ------------------------------------------------------

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return Value::of_int(e.ival);
      case ExprKind::FloatLit: return Value::of_float(e.fval);
      case ExprKind::NanLit: return Value::of_float(std::nan(""));
      case ExprKind::Ident: {
        Var* v = find_var(e.name);
        if (!v) {
          fail(Errc::KernelValidationError, "undeclared variable '" + e.name + "'");
        }
        return v->v;
      }
      case ExprKind::ParamAccess: return read_param(e);
      case ExprKind::SizeOf: {
        auto it = ctx.dim_sizes.find(e.name);
        if (it == ctx.dim_sizes.end()) {
          fail(Errc::UnboundDim, "no size bound for dim '" + e.name + "'");
        }
        return Value::of_int(it->second);
      }
      case ExprKind::CompRef: {
        auto it = ctx.comp.find(e.name);
        if (it == ctx.comp.end()) {
          fail(Errc::UnknownCompField, "no value for $COMP(" + e.name + ")");
        }
        return it->second;
      }
      case ExprKind::MetaRef: return read_meta(e);
      case ExprKind::TypeSwitch: {
        for (std::size_t i = 0; i < e.letters.size(); ++i) {
          if (letter_matches(ctx.generic, e.letters[i])) return eval(*e.args[i]);
        }
        fail(Errc::TypeSwitchMissingLetter,
             std::string("letter '") + letter_of(ctx.generic) +
                 "' absent from $T" + e.letters);
      }
      case ExprKind::Call: return eval_call(e);
      case ExprKind::Unary: {
        Value a = eval(*e.a);
        switch (e.unop) {
          case UnOp::Neg:
            return a.flt ? Value::of_float(-a.f) : Value::of_int(-a.i);
          case UnOp::Pos: return a;
          case UnOp::LNot: return Value::of_int(!a.truthy());
          case UnOp::BNot: return Value::of_int(~a.as_int());
        }
        return Value();
      }
      case ExprKind::Binary: {
        if (e.binop == BinOp::LAnd) {
          if (!eval(*e.a).truthy()) return Value::of_int(0);
          return Value::of_int(eval(*e.b).truthy());
        }
        if (e.binop == BinOp::LOr) {
          if (eval(*e.a).truthy()) return Value::of_int(1);
          return Value::of_int(eval(*e.b).truthy());
        }
        return eval_binary_value(e.binop, eval(*e.a), eval(*e.b));
      }
      case ExprKind::Ternary:
        return eval(*e.a).truthy() ? eval(*e.b) : eval(*e.c);
      case ExprKind::Assign: return eval_assign(e);
      case ExprKind::IncDec: {
        Value old = eval_lvalue_read(*e.a);
        Value stepped = eval_binary_value(
            e.increment ? BinOp::Add : BinOp::Sub, old, Value::of_int(1));
        store(*e.a, stepped);
        return e.prefix ? eval_lvalue_read(*e.a) : old;
      }
      case ExprKind::Cast: {
        Dtype t = e.cast_type.kind == TypeSpecKind::Generic ? ctx.generic
                                                            : e.cast_type.named;
        return cast_value(eval(*e.a), t);
      }
      case ExprKind::IsBad: return eval_badtest(e, true);
      case ExprKind::IsGood: return eval_badtest(e, false);
      case ExprKind::SetBadVar: {
        ParamBinding& pb = param(e.name);
        Value bad = pb.arr->badvalue();
        Var* v = find_var(e.var);
        if (!v) {
          fail(Errc::KernelValidationError, "undeclared variable '" + e.var + "'");
        }
        v->v = cast_value(bad, v->type);
        ctx.flagged_bad.insert(e.name);
        return v->v;
      }
    }
    return Value();
  }

  Value eval_badtest(const Expr& e, bool want_bad) {
    if (ctx.variant == Variant::Good) return Value::of_int(want_bad ? 0 : 1);
    bool isbad;
    if (!e.var.empty()) {
      Var* v = find_var(e.var);
      if (!v) {
        fail(Errc::KernelValidationError, "undeclared variable '" + e.var + "'");
      }
      ParamBinding& pb = param(e.name);
      isbad = value_is_bad(v->v, pb.arr->dtype(), pb.arr->badvalue());
    } else {
      ParamBinding& pb = param(e.a->name);
      Value val = read_param(*e.a);
      isbad = value_is_bad(val, pb.arr->dtype(), pb.arr->badvalue());
    }
    return Value::of_int(isbad == want_bad);
  }

  Value eval_call(const Expr& e) {
    if (e.name == "EquivCPOffs" || e.name == "EquivCPTrunc") {
      if (!ctx.equiv_cp) {
        fail(Errc::KernelValidationError, "$" + e.name + " outside EquivCPOffsCode");
      }
      std::int64_t pi = eval(*e.args[0]).as_int();
      std::int64_t ci = eval(*e.args[1]).as_int();
      bool oob = e.name == "EquivCPTrunc" && eval(*e.args[2]).truthy();
      ctx.equiv_cp(pi, ci, oob);
      return Value::of_int(0);
    }
    if (e.name == "pow") {
      return Value::of_float(
          std::pow(eval(*e.args[0]).as_double(), eval(*e.args[1]).as_double()));
    }
    double x = eval(*e.args[0]).as_double();
    if (e.name == "sqrt") return Value::of_float(std::sqrt(x));
    if (e.name == "sin") return Value::of_float(std::sin(x));
    if (e.name == "cos") return Value::of_float(std::cos(x));
    if (e.name == "log") return Value::of_float(std::log(x));
    if (e.name == "exp") return Value::of_float(std::exp(x));
    if (e.name == "fabs") return Value::of_float(std::fabs(x));
    if (e.name == "floor") return Value::of_float(std::floor(x));
    if (e.name == "ceil") return Value::of_float(std::ceil(x));
    fail(Errc::UnknownBuiltin, "unknown function '" + e.name + "'");
  }

  Value eval_lvalue_read(const Expr& t) {
    switch (t.kind) {
      case ExprKind::Ident: {
        Var* v = find_var(t.name);
        if (!v) {
          fail(Errc::KernelValidationError, "undeclared variable '" + t.name + "'");
        }
        return v->v;
      }
      case ExprKind::ParamAccess: return read_param(t);
      case ExprKind::CompRef: return eval(t);
      case ExprKind::MetaRef: return read_meta(t);
      default:
        fail(Errc::SyntaxError, "not an lvalue");
    }
  }

  void store(const Expr& t, const Value& v) {
    switch (t.kind) {
      case ExprKind::Ident: {
        Var* var = find_var(t.name);
        if (!var) {
          fail(Errc::KernelValidationError, "undeclared variable '" + t.name + "'");
        }
        var->v = cast_value(v, var->type);
        return;
      }
      case ExprKind::ParamAccess:
        write_param(t, v);
        return;
      case ExprKind::SizeOf: {
        if (!ctx.size_out) {
          fail(Errc::KernelValidationError, "$SIZE is read-only here");
        }
        std::int64_t n = v.as_int();
        if (n < 0) {
          fail(Errc::NegativeAssignedSize,
               "$SIZE(" + t.name + ") assigned " + std::to_string(n));
        }
        (*ctx.size_out)[t.name] = n;
        return;
      }
      case ExprKind::CompRef:
        ctx.comp[t.name] = v;
        return;
      case ExprKind::MetaRef:
        write_meta(t, v);
        return;
      default:
        fail(Errc::SyntaxError, "assignment target is not an lvalue");
    }
  }

  Value eval_assign(const Expr& e) {
    Value rhs = eval(*e.b);
    Value out;
    if (e.assign_op == "=") {
      out = rhs;
    } else {
      Value old = eval_lvalue_read(*e.a);
      BinOp op = e.assign_op == "+="   ? BinOp::Add
                 : e.assign_op == "-=" ? BinOp::Sub
                 : e.assign_op == "*=" ? BinOp::Mul
                 : e.assign_op == "/=" ? BinOp::Div
                                       : BinOp::Mod;
      out = eval_binary_value(op, old, rhs);
    }
    store(*e.a, out);
    return out;
  }

  // --- statements -------------------------------------------------------

  void exec_block(const std::vector<StmtPtr>& body) {
    scopes.emplace_back();
    for (const auto& s : body) exec(*s);
    scopes.pop_back();
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Declare: {
        Dtype t = s.decl_type.kind == TypeSpecKind::Generic ? ctx.generic
                                                            : s.decl_type.named;
        for (const auto& [name, init] : s.decls) {
          Value v = init ? cast_value(eval(*init), t)
                         : (is_float_dtype(t) ? Value::of_float(0) : Value::of_int(0));
          scopes.back()[name] = Var{t, v};
        }
        break;
      }
      case StmtKind::ExprStmt:
        eval(*s.e);
        break;
      case StmtKind::If:
        if (eval(*s.e).truthy()) {
          exec_block(s.body);
        } else {
          exec_block(s.else_body);
        }
        break;
      case StmtKind::For: {
        scopes.emplace_back();
        if (s.init) exec(*s.init);
        while (!s.cond || eval(*s.cond).truthy()) {
          exec_block(s.body);
          if (s.step) eval(*s.step);
        }
        scopes.pop_back();
        break;
      }
      case StmtKind::While:
        while (eval(*s.e).truthy()) exec_block(s.body);
        break;
      case StmtKind::DoWhile:
        do {
          exec_block(s.body);
        } while (eval(*s.e).truthy());
        break;
      case StmtKind::Block:
        exec_block(s.body);
        break;
      case StmtKind::LoopOver: {
        auto it = ctx.dim_sizes.find(s.dim);
        if (it == ctx.dim_sizes.end()) {
          fail(Errc::UnboundDim, "no size bound for dim '" + s.dim + "'");
        }
        scopes.emplace_back();
        scopes.back()[s.dim] = Var{Dtype::Indx, Value::of_int(0)};
        for (std::int64_t i = 0; i < it->second; ++i) {
          scopes.back()[s.dim].v = Value::of_int(i);
          exec_block(s.body);
        }
        scopes.pop_back();
        break;
      }
      case StmtKind::ThreadLoop:
        sweep(s.body);
        break;
      case StmtKind::SetBad: {
        ParamBinding& pb = param(s.e->name);
        write_param(*s.e, pb.arr->badvalue());
        ctx.flagged_bad.insert(s.e->name);
        break;
      }
      case StmtKind::StateSetBad:
        ctx.flagged_bad.insert(s.param);
        ctx.flagged_good.erase(s.param);
        break;
      case StmtKind::StateSetGood:
        ctx.flagged_good.insert(s.param);
        ctx.flagged_bad.erase(s.param);
        break;
      case StmtKind::SetNdims: {
        if (!ctx.child_stash) {
          fail(Errc::KernelValidationError, "$SETNDIMS outside dataflow RedoDims");
        }
        std::int64_t n = eval(*s.e).as_int();
        if (n < 0) fail(Errc::NegativeAssignedSize, "$SETNDIMS assigned negative");
        ctx.child_stash->ndims = n;
        ctx.child_stash->dims.assign(n, 0);
        ctx.child_stash->dimincs.assign(n, 0);
        break;
      }
      case StmtKind::SetDims:
        if (!ctx.child_stash) {
          fail(Errc::KernelValidationError, "$SETDIMS outside dataflow RedoDims");
        }
        ctx.child_stash->setdims_called = true;
        break;
      case StmtKind::DoCompDims:
      case StmtKind::Empty:
        break;
    }
  }

  // --- thread tuple sweep ----------------------------------------------

  void set_tuple_offsets(std::int64_t linear) {
    std::int64_t rem = linear;
    std::vector<std::int64_t> t(ctx.thread_dims.size());
    for (std::size_t k = 0; k < ctx.thread_dims.size(); ++k) {
      std::int64_t d = ctx.thread_dims[k];
      t[k] = d > 0 ? rem % d : 0;
      rem = d > 0 ? rem / d : rem;
    }
    for (std::size_t p = 0; p < ctx.params.size(); ++p) {
      std::int64_t off = 0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        off += t[k] * ctx.params[p].thread_strides[k];
      }
      cur_off[p] = off;
    }
  }

  void sweep(const std::vector<StmtPtr>& body) {
    std::int64_t n = 1;
    for (auto d : ctx.thread_dims) n *= d;
    for (std::int64_t step = 0; step < n; ++step) {
      std::int64_t linear = ctx.reverse_sweep ? n - 1 - step : step;
      set_tuple_offsets(linear);
      exec_block(body);
    }
    for (auto& o : cur_off) o = 0;
  }

  void run(const KernelAst& k) {
    bool restricted = ctx.size_out || ctx.child_stash || ctx.equiv_cp ||
                      ctx.params.empty();
    bool explicit_tl = false;
    std::function<void(const std::vector<StmtPtr>&)> scan =
        [&](const std::vector<StmtPtr>& body) {
          for (const auto& s : body) {
            if (s->kind == StmtKind::ThreadLoop) explicit_tl = true;
            scan(s->body);
            scan(s->else_body);
          }
        };
    scan(k.statements);
    if (restricted || explicit_tl) {
      for (const auto& s : k.statements) exec(*s);
    } else {
      sweep(k.statements);
    }
  }
};

}  // namespace

void interpret_kernel(const KernelAst& k, InterpContext& ctx) {
  ++stats().kernel_executions;
  Exec ex(ctx);
  ex.run(k);
}

}  // namespace sigkern
