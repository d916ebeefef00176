#include <algorithm>

#include "sigkern/dataflow.hpp"

namespace sigkern {

namespace {

// which two params play parent and child for a flow op
std::pair<std::size_t, std::size_t> flow_param_indices(const OpDef& op) {
  int pi = op.sig.index_of("PARENT");
  int ci = op.sig.index_of("CHILD");
  if (pi >= 0 && ci >= 0) return {static_cast<std::size_t>(pi),
                                  static_cast<std::size_t>(ci)};
  if (op.sig.params.size() == 2) return {0, 1};
  fail(Errc::NotAFlowOp, "op '" + op.name + "' has no parent/child parameter pair");
}

std::shared_ptr<Trans> trans_of(const ArrayPtr& a) {
  return a ? a->trans_parent : nullptr;
}

void prune_children(NdArray& a) {
  auto& v = a.trans_children;
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](const std::weak_ptr<Trans>& w) { return w.expired(); }),
          v.end());
}

void mark_descendants(NdArray& a, const Trans* skip) {
  prune_children(a);
  for (auto& w : a.trans_children) {
    auto t = w.lock();
    if (!t || t.get() == skip) continue;
    if (auto child = t->child.lock()) {
      child->state.parent_data_changed = true;
      mark_descendants(*child, nullptr);
    }
  }
}

InterpContext flow_context(Trans& t, const ArrayPtr& child, Variant variant) {
  auto [pi, ci] = flow_param_indices(t.op);
  InterpContext ctx{t.op.sig};
  ctx.generic = t.parent->dtype();
  ctx.variant = variant;
  ctx.comp = t.comp;
  ctx.thread_dims = t.parent->dims();
  for (std::size_t i = 0; i < t.op.sig.params.size(); ++i) {
    ParamBinding pb;
    pb.name = t.op.sig.params[i].name;
    pb.arr = i == pi ? t.parent : child;
    pb.thread_strides = pb.arr->dimincs();
    pb.thread_strides.resize(ctx.thread_dims.size(), 0);
    ctx.params.push_back(std::move(pb));
  }
  return ctx;
}

void flow(Trans& t, bool forward) {
  if (t.affine) return;  // shared buffer, nothing to move
  auto child = t.child.lock();
  if (!child) return;
  if (t.op.equivcpoffs) {
    equiv_cp_flow(t, forward);
    return;
  }
  bool bad = t.op.handlebad == HandleBad::Handle &&
             (forward ? t.parent->badflag() : child->badflag());
  const std::optional<KernelAst>* k;
  if (forward) {
    k = bad && t.op.badcode ? &t.op.badcode : &t.op.code;
  } else {
    k = bad && t.op.badbackcode ? &t.op.badbackcode : &t.op.backcode;
  }
  if (!*k) {
    fail(Errc::KernelValidationError,
         "op '" + t.op.name + "' lacks a " +
             (forward ? "forward" : "backward") + " kernel");
  }
  InterpContext ctx = flow_context(t, child, bad ? Variant::Bad : Variant::Good);
  interpret_kernel(**k, ctx);
  auto [pi, ci] = flow_param_indices(t.op);
  const std::string& pname = t.op.sig.params[pi].name;
  const std::string& cname = t.op.sig.params[ci].name;
  if (forward) {
    child->set_badflag(t.parent->badflag() || ctx.flagged_bad.count(cname));
  } else {
    t.parent->set_badflag(child->badflag() || ctx.flagged_bad.count(pname));
  }
}

void default_redodims(const ArrayPtr& parent, ChildShapeStash& st) {
  st.ndims = parent->ndims();
  st.dims = parent->dims();
  st.dimincs.assign(st.ndims, 0);
  st.datatype = parent->dtype();
  st.setdims_called = true;
}

}  // namespace

ArrayPtr connect(const OpDef& op, const ArrayPtr& parent,
                 const std::vector<OtherParValue>& otherpars) {
  if (!op.defaultflow && !op.native_affine) {
    fail(Errc::NotAFlowOp, "op '" + op.name + "' is not a dataflow op");
  }
  if (!parent || parent->is_null()) {
    fail(Errc::NullInput, "cannot connect to a null array");
  }
  // defensive ancestry walk; also rejects malformed looping graphs
  std::set<const NdArray*> seen;
  for (ArrayPtr a = parent; a;) {
    if (!seen.insert(a.get()).second) {
      fail(Errc::CycleDetected, "dataflow ancestry loops");
    }
    auto t = trans_of(a);
    a = t ? t->parent : nullptr;
  }

  auto [pi, ci] = flow_param_indices(op);
  auto t = std::make_shared<Trans>();
  t->op = op;
  t->parent = parent;
  t->reversible = op.reversible;
  t->otherpars = otherpars;
  t->comp = otherpar_values_to_comp(op, otherpars);

  if (op.makecomp) {
    InterpContext ctx{op.sig};
    ctx.preset_vars = t->comp;
    ctx.comp = t->comp;
    ParamBinding pb;
    pb.name = op.sig.params[pi].name;
    pb.arr = parent;
    ctx.params.push_back(pb);
    interpret_kernel(*op.makecomp, ctx);
    t->comp = ctx.comp;
  }

  ChildShapeStash st;
  const std::string child_name = op.sig.params[ci].name;
  if (op.redodims) {
    InterpContext ctx{op.sig};
    ctx.comp = t->comp;
    ctx.child_stash = &st;
    ctx.child_param = child_name;
    for (std::size_t i = 0; i < op.sig.params.size(); ++i) {
      ParamBinding pb;
      pb.name = op.sig.params[i].name;
      pb.arr = i == pi ? parent : NdArray::make_null();
      ctx.params.push_back(std::move(pb));
    }
    interpret_kernel(*op.redodims, ctx);
    if (!st.setdims_called) {
      fail(Errc::MissingRedoDimsMetadata,
           "RedoDims of '" + op.name + "' ended without $SETDIMS()");
    }
  } else {
    default_redodims(parent, st);
  }

  auto child = std::make_shared<NdArray>();
  bool explicit_incs =
      std::any_of(st.dimincs.begin(), st.dimincs.end(),
                  [](std::int64_t v) { return v != 0; });
  Dtype ct = st.datatype.value_or(parent->dtype());
  if (explicit_incs) {
    child->allocate(ct, st.dims, &st.dimincs);
  } else {
    child->allocate(ct, st.dims);
  }
  child->fill(Value::of_int(0));

  t->child = child;
  child->trans_parent = t;
  parent->trans_children.push_back(t);
  parent->state.dataflow_f = true;
  if (op.reversible) parent->state.dataflow_b = true;
  child->state.parent_data_changed = true;
  return child;
}

void make_physical(const ArrayPtr& a) {
  if (!a) return;
  auto t = trans_of(a);
  if (!t) return;
  if (!a->state.any_changed()) return;
  make_physical(t->parent);
  flow(*t, true);
  a->state.parent_data_changed = false;
  a->state.parent_dims_changed = false;
  a->state.parent_repr_changed = false;
}

void mark_changed(const ArrayPtr& a) {
  if (!a) return;
  auto t = trans_of(a);
  if (t) {
    if (t->affine) {
      // data already landed in the shared buffer
      mark_descendants(*t->parent, t.get());
      mark_changed(t->parent);
      return;
    }
    if (!t->reversible) {
      fail(Errc::IrreversibleWrite,
           "array is a child of a one-way '" + t->op.name + "' link");
    }
    flow(*t, false);
    mark_descendants(*t->parent, t.get());
    // continue up the chain from the parent
    if (trans_of(t->parent)) mark_changed(t->parent);
  }
  mark_descendants(*a, nullptr);
}

void equiv_cp_flow(Trans& t, bool forward) {
  auto child = t.child.lock();
  if (!child) return;
  if (!t.op.equivcpoffs) {
    fail(Errc::KernelValidationError,
         "op '" + t.op.name + "' has no EquivCPOffsCode");
  }
  auto [pi, ci_] = flow_param_indices(t.op);
  ArrayPtr parent = t.parent;
  bool handle = t.op.handlebad == HandleBad::Handle;

  InterpContext ctx{t.op.sig};
  ctx.generic = parent->dtype();
  ctx.comp = t.comp;
  for (std::size_t i = 0; i < t.op.sig.params.size(); ++i) {
    ParamBinding pb;
    pb.name = t.op.sig.params[i].name;
    pb.arr = i == pi ? parent : child;
    ctx.params.push_back(std::move(pb));
  }
  ctx.equiv_cp = [&](std::int64_t p, std::int64_t c, bool oob) {
    if (c < 0 || c >= child->nvals()) {
      fail(Errc::IndexOutOfBounds, "child offset " + std::to_string(c));
    }
    if (!oob && (p < 0 || p >= parent->nvals())) {
      fail(Errc::IndexOutOfBounds, "parent offset " + std::to_string(p));
    }
    if (forward) {
      if (oob) {
        if (handle) {
          child->set_elem_bad(c);
          child->set_badflag(true);
        } else {
          child->set_elem_unchecked(c, Value::of_int(0));
        }
      } else {
        child->set_elem_unchecked(c, parent->get_elem_unchecked(p));
        ++stats().element_copies;
      }
    } else {
      if (!oob) {
        parent->set_elem_unchecked(p, child->get_elem_unchecked(c));
        ++stats().element_copies;
      }
    }
  };
  interpret_kernel(*t.op.equivcpoffs, ctx);
  if (forward && parent->badflag()) child->set_badflag(true);
}

OpDef native_slice_opdef() {
  OpDef def;
  def.name = "slice";
  def.sig = parse_signature("PARENT(); [oca]CHILD()");
  def.defaultflow = true;
  def.p2child = true;
  def.reversible = true;
  def.native_affine = true;
  def.otherpars = {{"start", OtherParKind::IntList},
                   {"end", OtherParKind::IntList},
                   {"step", OtherParKind::IntList}};
  return def;
}

ArrayPtr slice_affine(const ArrayPtr& parent, const std::vector<SliceDim>& spec) {
  if (!parent || parent->is_null()) {
    fail(Errc::NullInput, "cannot slice a null array");
  }
  if (static_cast<std::int64_t>(spec.size()) != parent->ndims()) {
    fail(Errc::SliceOutOfRange, "slice spec has " + std::to_string(spec.size()) +
                                    " dims for a " +
                                    std::to_string(parent->ndims()) + "-dim array");
  }
  make_physical(parent);

  std::int64_t offset = 0;
  std::vector<std::int64_t> dims, incs;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const SliceDim& s = spec[k];
    std::int64_t dk = parent->dims()[k];
    if (s.step == 0) fail(Errc::ZeroStep, "step 0 in slice dim " + std::to_string(k));
    if (s.start < 0 || s.start >= dk || s.end < 0 || s.end >= dk) {
      fail(Errc::SliceOutOfRange,
           "slice range " + std::to_string(s.start) + ":" + std::to_string(s.end) +
               " outside dim " + std::to_string(k) + " of size " + std::to_string(dk));
    }
    if ((s.end - s.start) * (s.step > 0 ? 1 : -1) < 0) {
      fail(Errc::SliceOutOfRange, "slice range runs against its step");
    }
    std::int64_t n = (s.end - s.start) / s.step + 1;
    offset += s.start * parent->dimincs()[k];
    dims.push_back(n);
    incs.push_back(s.step * parent->dimincs()[k]);
  }

  auto t = std::make_shared<Trans>();
  t->op = native_slice_opdef();
  t->parent = parent;
  t->reversible = true;
  t->affine = Trans::Affine{offset, incs};

  auto child = std::make_shared<NdArray>();
  child->adopt_view(parent->dtype(), dims, incs, parent->buffer(),
                    parent->origin() + offset);
  child->set_badflag(parent->badflag());
  child->badvalue_override = parent->badvalue_override;

  t->child = child;
  child->trans_parent = t;
  parent->trans_children.push_back(t);
  parent->state.dataflow_f = true;
  parent->state.dataflow_b = true;
  return child;
}

void sever(const ArrayPtr& a) {
  if (!a) return;
  auto t = trans_of(a);
  if (!t) return;
  make_physical(a);
  if (t->affine) {
    auto owned = a->copy();
    a->take_data(*owned);
  }
  auto& siblings = t->parent->trans_children;
  siblings.erase(std::remove_if(siblings.begin(), siblings.end(),
                                [&](const std::weak_ptr<Trans>& w) {
                                  auto s = w.lock();
                                  return !s || s == t;
                                }),
                 siblings.end());
  a->trans_parent.reset();
  a->state.dataflow_f = false;
  a->state.dataflow_b = false;
}

}  // namespace sigkern
