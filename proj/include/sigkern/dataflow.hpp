#pragma once

#include "sigkern/engine.hpp"

namespace sigkern {

// Link object between a parent and a child array. Ownership: the child
// holds the trans alive (trans_parent), the trans holds the parent alive;
// the reverse edges are weak so graphs never cycle in memory.
class Trans {
 public:
  OpDef op;  // snapshot of the definition
  ArrayPtr parent;
  std::weak_ptr<NdArray> child;
  std::map<std::string, Value> comp;
  std::vector<OtherParValue> otherpars;
  bool reversible = false;

  struct Affine {
    std::int64_t offset = 0;
    std::vector<std::int64_t> incs;  // child dim strides into the parent buffer
  };
  std::optional<Affine> affine;
};

// Builds the trans for a dataflow op: runs MakeComp, then RedoDims (or the
// default dims copy), allocates the child, and leaves it lazily pending.
ArrayPtr connect(const OpDef& op, const ArrayPtr& parent,
                 const std::vector<OtherParValue>& otherpars = {});

// Materializes pending parent changes into `a` (recursively up the chain).
// No-op without a pending change marker.
void make_physical(const ArrayPtr& a);

// Declares that `a` was mutated in place: descendants become pending; a
// reversible parent link flows the change back immediately.
void mark_changed(const ArrayPtr& a);

void equiv_cp_flow(Trans& t, bool forward);

struct SliceDim {
  std::int64_t start = 0;
  std::int64_t end = 0;  // inclusive
  std::int64_t step = 1;
};

// Zero-copy strided view sharing the parent's buffer through an affine trans.
ArrayPtr slice_affine(const ArrayPtr& parent, const std::vector<SliceDim>& spec);

// Breaks the parent link: physicalize, take ownership of the data, detach.
void sever(const ArrayPtr& a);

// The built-in slice definition registered under the name "slice".
OpDef native_slice_opdef();

}  // namespace sigkern
