#include <algorithm>

#include "sigkern/dataflow.hpp"
#include "sigkern/engine.hpp"
#include "sigkern/opdef_file.hpp"

namespace sigkern {

std::vector<std::string> comp_names_of(const OpDef& def) {
  std::vector<std::string> names;
  for (const auto& p : def.otherpars) names.push_back(p.name);
  for (const auto& p : def.comp) names.push_back(p.name);
  return names;
}

Dtype resolve_generic(const Signature& sig,
                      const std::vector<std::optional<Dtype>>& arg_dtypes,
                      const GenericList& gl) {
  Dtype folded = Dtype::Byte;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (sig.params[i].forced_dtype) continue;
    if (i < arg_dtypes.size() && arg_dtypes[i]) {
      folded = promote(folded, *arg_dtypes[i]);
    }
  }
  return select_generic(folded, gl);
}

// --- registry ------------------------------------------------------------

static void validate_opdef(const OpDef& def) {
  validate_signature(def.sig);
  if (def.handlebad == HandleBad::Handle && !def.badcode && !def.equivcpoffs &&
      !def.native_affine) {
    fail(Errc::KernelValidationError,
         "op '" + def.name + "' handles bad values but has no bad-path kernel");
  }
  if (def.inplace) {
    const ParamSpec* a = def.sig.find(def.inplace->first);
    const ParamSpec* b = def.sig.find(def.inplace->second);
    if (!a || !b) {
      fail(Errc::KernelValidationError,
           "op '" + def.name + "': inplace pair names unknown parameters");
    }
    if (!b->has(ParamFlag::O)) {
      fail(Errc::KernelValidationError,
           "op '" + def.name + "': inplace output lacks the [o] flag");
    }
    bool same = a->active_dims.size() == b->active_dims.size();
    for (std::size_t i = 0; same && i < a->active_dims.size(); ++i) {
      same = a->active_dims[i].name == b->active_dims[i].name;
    }
    if (!same) {
      fail(Errc::KernelValidationError,
           "op '" + def.name + "': inplace pair dim lists differ");
    }
  }
  if (!def.code && !def.equivcpoffs && !def.native_affine && !def.defaultflow) {
    fail(Errc::KernelValidationError, "op '" + def.name + "' has no Code");
  }
}

void Registry::register_op(OpDef def) {
  if (ops_.count(def.name)) {
    fail(Errc::DuplicateOpName, "op '" + def.name + "' already registered");
  }
  validate_opdef(def);
  ops_.emplace(def.name, std::move(def));
}

const OpDef& Registry::get(const std::string& name) const {
  auto it = ops_.find(name);
  if (it == ops_.end()) fail(Errc::UnknownOp, "no op named '" + name + "'");
  return it->second;
}

bool Registry::has(const std::string& name) const { return ops_.count(name) != 0; }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, d] : ops_) out.push_back(n);
  return out;
}

Registry Registry::with_base() {
  Registry r;
  r.register_op(native_slice_opdef());
  return r;
}

Registry Registry::with_corpus() {
  Registry r = with_base();
  for (auto& def : parse_opdef_text(corpus_opdefs_text())) {
    r.register_op(std::move(def));
  }
  return r;
}

// --- planning ------------------------------------------------------------

BroadcastPlan make_plan(const OpDef& def, const std::vector<ArrayPtr>& args,
                        const std::map<std::string, std::int64_t>* sizes_override) {
  const Signature& sig = def.sig;
  if (args.size() != sig.params.size()) {
    fail(Errc::MissingInput, "op '" + def.name + "' takes " +
                                 std::to_string(sig.params.size()) +
                                 " arguments, got " + std::to_string(args.size()));
  }
  auto supplied = [&](std::size_t i) {
    return args[i] && !args[i]->is_null();
  };

  BroadcastPlan plan;
  std::set<std::string> fixed_dims;
  for (const auto& p : sig.params) {
    for (const auto& d : p.active_dims) {
      if (d.fixed_size) {
        plan.dim_sizes[d.name] = *d.fixed_size;
        fixed_dims.insert(d.name);
      }
    }
  }
  if (sizes_override) {
    for (const auto& [name, sz] : *sizes_override) {
      auto it = plan.dim_sizes.find(name);
      if (it != plan.dim_sizes.end() && fixed_dims.count(name) && it->second != sz) {
        fail(Errc::FixedSizeMismatch,
             "dim '" + name + "' is fixed to " + std::to_string(it->second) +
                 " but computed as " + std::to_string(sz));
      }
      plan.dim_sizes[name] = sz;
    }
  }

  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const ParamSpec& ps = sig.params[i];
    if (ps.is_input() && !supplied(i)) {
      fail(Errc::MissingInput, "input parameter '" + ps.name + "' not supplied");
    }
    if (!supplied(i)) continue;
    const NdArray& a = *args[i];
    auto na = static_cast<std::int64_t>(ps.active_dims.size());
    if (a.ndims() == 0 && na > 0) {
      // a scalar repeats along every active dim; it binds nothing but
      // defaults any otherwise-unbound dim to size 1
      for (const auto& d : ps.active_dims) {
        plan.dim_sizes.emplace(d.name, 1);
      }
      continue;
    }
    if (a.ndims() < na) {
      fail(Errc::ActiveDimMismatch,
           "parameter '" + ps.name + "' needs " + std::to_string(na) +
               " dims, argument has " + std::to_string(a.ndims()));
    }
    for (std::int64_t j = 0; j < na; ++j) {
      const std::string& dn = ps.active_dims[j].name;
      std::int64_t sz = a.dims()[j];
      auto it = plan.dim_sizes.find(dn);
      if (it == plan.dim_sizes.end()) {
        plan.dim_sizes[dn] = sz;
      } else if (it->second != sz) {
        if (fixed_dims.count(dn)) {
          fail(Errc::FixedSizeMismatch,
               "dim '" + dn + "' is fixed to " + std::to_string(it->second) +
                   ", argument '" + ps.name + "' has " + std::to_string(sz));
        }
        fail(Errc::ActiveDimMismatch,
             "dim '" + dn + "' bound to both " + std::to_string(it->second) +
                 " and " + std::to_string(sz) + " (parameter '" + ps.name + "')");
      }
    }
  }

  // thread dims under the three rules: missing dims count as size 1 (rule 1),
  // size 1 repeats via stride 0 (rule 2), other sizes must match (rule 3)
  std::size_t maxt = 0;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (!supplied(i)) continue;
    auto nd = static_cast<std::size_t>(args[i]->ndims());
    std::size_t na = sig.params[i].active_dims.size();
    if (nd > na) maxt = std::max(maxt, nd - na);
  }
  plan.thread_dims.assign(maxt, 1);
  for (std::size_t k = 0; k < maxt; ++k) {
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      if (!supplied(i)) continue;
      std::size_t idx = sig.params[i].active_dims.size() + k;
      if (idx >= static_cast<std::size_t>(args[i]->ndims())) continue;
      std::int64_t s = args[i]->dims()[idx];
      if (s == 1) continue;
      if (plan.thread_dims[k] != 1 && plan.thread_dims[k] != s) {
        fail(Errc::ThreadDimMismatch,
             "rule 3: thread dim " + std::to_string(k) + " has sizes " +
                 std::to_string(plan.thread_dims[k]) + " and " +
                 std::to_string(s) + " (parameter '" + sig.params[i].name + "')");
      }
      plan.thread_dims[k] = s;
    }
  }

  std::vector<std::optional<Dtype>> arg_dtypes(sig.params.size());
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (supplied(i)) arg_dtypes[i] = args[i]->dtype();
  }
  plan.generic = resolve_generic(sig, arg_dtypes, def.generictypes);

  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const ParamSpec& ps = sig.params[i];
    ParamPlan pp;
    if (ps.forced_dtype) {
      pp.exec_dtype = ps.plus_flag ? promote(*ps.forced_dtype, plan.generic)
                                   : *ps.forced_dtype;
    } else {
      pp.exec_dtype = plan.generic;
    }
    for (const auto& d : ps.active_dims) {
      auto it = plan.dim_sizes.find(d.name);
      if (it == plan.dim_sizes.end()) {
        fail(Errc::UnboundDim, "dim '" + d.name + "' of parameter '" + ps.name +
                                   "' has no size");
      }
      pp.create_dims.push_back(it->second);
    }
    pp.autocreate = !supplied(i);
    std::vector<std::int64_t> full_dims = pp.create_dims;
    if (!ps.is_temp()) {
      if (pp.autocreate) {
        for (auto d : plan.thread_dims) full_dims.push_back(d);
        pp.create_dims = full_dims;
      } else {
        full_dims = args[i]->dims();
      }
    }
    auto incs = canonical_dimincs(full_dims);
    for (std::size_t j = 0; j < ps.active_dims.size(); ++j) {
      pp.active_strides[ps.active_dims[j].name] = j < incs.size() ? incs[j] : 0;
    }
    pp.thread_strides.assign(maxt, 0);
    if (!ps.is_temp()) {
      for (std::size_t k = 0; k < maxt; ++k) {
        std::size_t idx = ps.active_dims.size() + k;
        if (idx < full_dims.size() && full_dims[idx] != 1) {
          pp.thread_strides[k] = incs[idx];
        }
      }
    }
    plan.params.push_back(std::move(pp));
  }
  return plan;
}

Variant choose_code_path(const OpDef& def, const std::vector<ArrayPtr>& args) {
  bool any = false;
  for (std::size_t i = 0; i < def.sig.params.size(); ++i) {
    if (!def.sig.params[i].is_input()) continue;
    if (i < args.size() && args[i] && !args[i]->is_null() && args[i]->badflag()) {
      any = true;
    }
  }
  if (any && def.handlebad == HandleBad::Forbid) {
    fail(Errc::BadValuesForbidden,
         "op '" + def.name + "' does not accept bad values");
  }
  return (any && def.handlebad == HandleBad::Handle) ? Variant::Bad : Variant::Good;
}

std::map<std::string, Value> otherpar_values_to_comp(
    const OpDef& def, const std::vector<OtherParValue>& otherpars) {
  std::map<std::string, Value> comp;
  for (const auto& decl : def.otherpars) {
    const OtherParValue* v = nullptr;
    for (const auto& given : otherpars) {
      if (given.name == decl.name) v = &given;
    }
    if (!v) {
      fail(Errc::BadOtherPar, "missing value for '" + decl.name + "'");
    }
    if (v->kind != decl.kind) {
      fail(Errc::BadOtherPar, "'" + decl.name + "' has the wrong kind");
    }
    switch (decl.kind) {
      case OtherParKind::Int: comp[decl.name] = Value::of_int(v->i); break;
      case OtherParKind::Float: comp[decl.name] = Value::of_float(v->f); break;
      default:
        // strings and lists stay in the trans stash; they have no scalar view
        break;
    }
  }
  for (const auto& given : otherpars) {
    bool known = false;
    for (const auto& decl : def.otherpars) {
      if (decl.name == given.name) known = true;
    }
    if (!known) fail(Errc::BadOtherPar, "undeclared parameter '" + given.name + "'");
  }
  return comp;
}

std::map<std::string, std::int64_t> run_redodims(
    const OpDef& def, const std::vector<ArrayPtr>& args,
    const std::vector<OtherParValue>& otherpars) {
  if (!def.redodimscode) return {};
  InterpContext ctx{def.sig};
  ctx.comp = otherpar_values_to_comp(def, otherpars);
  std::map<std::string, std::int64_t> sizes;
  ctx.size_out = &sizes;
  for (std::size_t i = 0; i < def.sig.params.size(); ++i) {
    ParamBinding pb;
    pb.name = def.sig.params[i].name;
    pb.arr = (i < args.size() && args[i]) ? args[i] : NdArray::make_null();
    ctx.params.push_back(std::move(pb));
  }
  interpret_kernel(*def.redodimscode, ctx);
  return sizes;
}

namespace {

bool is_canonical(const NdArray& a) {
  return a.origin() == 0 && a.dimincs() == canonical_dimincs(a.dims());
}

// elementwise copy of src into dst (same dims; dst dtype wins)
void copy_into(NdArray& dst, const NdArray& src) {
  std::vector<std::int64_t> idx(dst.dims().size(), 0);
  for (std::int64_t i = 0; i < dst.nvals(); ++i) {
    std::int64_t soff = 0, doff = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      soff += idx[k] * src.dimincs()[k];
      doff += idx[k] * dst.dimincs()[k];
    }
    dst.set_elem_unchecked(doff, src.get_elem_unchecked(soff));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < dst.dims()[k]) break;
      idx[k] = 0;
    }
  }
}

}  // namespace

std::vector<ArrayPtr> run_op(const OpDef& def, const std::vector<ArrayPtr>& args,
                             const std::vector<OtherParValue>& otherpars,
                             const RunOptions& opts) {
  const Signature& sig = def.sig;
  if (args.size() != sig.params.size()) {
    fail(Errc::MissingInput, "op '" + def.name + "' takes " +
                                 std::to_string(sig.params.size()) +
                                 " arguments, got " + std::to_string(args.size()));
  }
  if (def.native_affine) {
    fail(Errc::NotAFlowOp,
         "op '" + def.name + "' builds a view; use the slice interface");
  }
  if (def.defaultflow && !def.code) {
    fail(Errc::NotAFlowOp, "op '" + def.name + "' is a dataflow op; use connect");
  }

  auto comp = otherpar_values_to_comp(def, otherpars);

  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const ParamSpec& ps = sig.params[i];
    bool given = args[i] && !args[i]->is_null();
    if (ps.is_input() && !args[i]) {
      fail(Errc::NullInput, "input parameter '" + ps.name + "' is null");
    }
    if (ps.is_input() && !given) {
      fail(Errc::NullInput, "input parameter '" + ps.name + "' is null");
    }
    if (ps.has(ParamFlag::Oca) && given) {
      fail(Errc::SuppliedOcaParam,
           "parameter '" + ps.name + "' is always autocreated; pass null");
    }
    if (ps.is_output() && ps.has(ParamFlag::Nc) && !given) {
      fail(Errc::MissingNcOutput,
           "output parameter '" + ps.name + "' is never autocreated; supply it");
    }
    if (ps.is_temp() && given) {
      fail(Errc::MissingInput,
           "temporary parameter '" + ps.name + "' may not be supplied");
    }
    if (given && ps.has(ParamFlag::Phys)) make_physical(args[i]);
    if (given && ps.is_input()) make_physical(args[i]);
  }

  auto sizes = run_redodims(def, args, otherpars);
  BroadcastPlan plan = make_plan(def, args, sizes.empty() ? nullptr : &sizes);
  Variant variant = choose_code_path(def, args);
  bool any_input_bad = false;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (sig.params[i].is_input() && args[i] && !args[i]->is_null() &&
        args[i]->badflag()) {
      any_input_bad = true;
    }
  }

  // in-place request: the op declares a pair and the input's flag is set
  bool inplace_active = false;
  std::size_t ip_in = 0, ip_out = 0;
  if (def.inplace) {
    ip_in = sig.index_of(def.inplace->first);
    ip_out = sig.index_of(def.inplace->second);
    if (args[ip_in] && args[ip_in]->state.inplace) {
      if (args[ip_out] && !args[ip_out]->is_null()) {
        fail(Errc::InplaceShapeMismatch,
             "in-place call also supplied output '" + def.inplace->second + "'");
      }
      inplace_active = true;
    }
  }

  std::vector<ArrayPtr> work(sig.params.size());
  std::vector<ArrayPtr> writeback(sig.params.size());  // supplied outputs
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const ParamSpec& ps = sig.params[i];
    const ParamPlan& pp = plan.params[i];
    bool given = args[i] && !args[i]->is_null();

    if (ps.is_temp()) {
      work[i] = NdArray::new_filled(pp.exec_dtype, pp.create_dims, Value::of_int(0));
      continue;
    }
    if (inplace_active && i == ip_out) continue;  // aliased below
    if (!given) {
      work[i] = NdArray::new_filled(pp.exec_dtype, pp.create_dims, Value::of_int(0));
      continue;
    }
    if (ps.is_output()) {
      std::vector<std::int64_t> want = pp.create_dims;
      if (pp.autocreate) {
        // unreachable: given
      }
      std::vector<std::int64_t> full = want;
      for (auto d : plan.thread_dims) full.push_back(d);
      if (args[i]->dims() != full) {
        fail(Errc::OutputShapeMismatch,
             "supplied output '" + ps.name + "' has the wrong dims");
      }
    }
    if (inplace_active && i == ip_in) {
      if (args[i]->dtype() != pp.exec_dtype || !is_canonical(*args[i])) {
        args[i]->take_data(*args[i]->convert_dtype(pp.exec_dtype));
      }
      work[i] = args[i];
      continue;
    }
    if (args[i]->dtype() == pp.exec_dtype && is_canonical(*args[i]) &&
        !ps.is_output()) {
      work[i] = args[i];
    } else {
      work[i] = args[i]->convert_dtype(pp.exec_dtype);
      if (ps.is_output()) writeback[i] = args[i];
    }
  }
  if (inplace_active) {
    const ParamPlan& po = plan.params[ip_out];
    std::vector<std::int64_t> full = po.create_dims;
    if (work[ip_in]->dims() != full) {
      fail(Errc::InplaceShapeMismatch,
           "in-place pair '" + def.inplace->first + "'/'" + def.inplace->second +
               "' dims disagree at runtime");
    }
    work[ip_out] = work[ip_in];
  }

  const KernelAst* kernel = nullptr;
  if (variant == Variant::Bad && def.badcode) {
    kernel = &*def.badcode;
  } else if (def.code) {
    kernel = &*def.code;
  } else {
    fail(Errc::KernelValidationError, "op '" + def.name + "' has no Code");
  }

  InterpContext ctx{sig};
  ctx.generic = plan.generic;
  ctx.variant = variant;
  ctx.bounds = def.boundscheck || opts.check_bounds;
  ctx.reverse_sweep = opts.reverse_sweep;
  ctx.dim_sizes = plan.dim_sizes;
  ctx.thread_dims = plan.thread_dims;
  ctx.comp = comp;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    ParamBinding pb;
    pb.name = sig.params[i].name;
    pb.arr = work[i];
    pb.active_strides = plan.params[i].active_strides;
    pb.thread_strides = plan.params[i].thread_strides;
    ctx.params.push_back(std::move(pb));
  }
  interpret_kernel(*kernel, ctx);

  std::vector<ArrayPtr> outputs;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const ParamSpec& ps = sig.params[i];
    if (!ps.is_output()) continue;
    ArrayPtr out = work[i];
    bool flag = ctx.flagged_bad.count(ps.name) != 0 ||
                (def.handlebad == HandleBad::Ignore && any_input_bad);
    if (ctx.flagged_good.count(ps.name)) flag = false;
    out->set_badflag(flag);
    if (writeback[i]) {
      // computed in a converted work array; land it back in the caller's
      auto conv = out->convert_dtype(writeback[i]->dtype());
      copy_into(*writeback[i], *conv);
      writeback[i]->set_badflag(flag);
      out = writeback[i];
    }
    outputs.push_back(out);
    if (out == args[i] || writeback[i]) mark_changed(out);
  }
  if (inplace_active) {
    args[ip_in]->state.inplace = false;
    mark_changed(args[ip_in]);
  }
  return outputs;
}

}  // namespace sigkern
