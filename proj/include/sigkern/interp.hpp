#pragma once

#include <functional>
#include <map>
#include <set>

#include "sigkern/ndarray.hpp"
#include "sigkern/opdef.hpp"

namespace sigkern {

// Instrumentation shared by the engine and the dataflow layer.
struct Stats {
  std::uint64_t kernel_executions = 0;
  std::uint64_t element_copies = 0;
  std::uint64_t int_div_by_zero = 0;

  void reset() { *this = Stats{}; }
};

Stats& stats();

struct ParamBinding {
  std::string name;
  ArrayPtr arr;  // already at its execution dtype
  std::map<std::string, std::int64_t> active_strides;
  std::vector<std::int64_t> thread_strides;  // aligned with thread_dims
};

// Shape metadata for the dataflow RedoDims dialect: the child is described
// here before it has a buffer.
struct ChildShapeStash {
  std::int64_t ndims = 0;
  std::vector<std::int64_t> dims;
  std::vector<std::int64_t> dimincs;
  std::optional<Dtype> datatype;
  bool setdims_called = false;
};

struct InterpContext {
  const Signature& sig;
  Dtype generic = Dtype::Double;
  Variant variant = Variant::Good;
  bool bounds = false;
  bool reverse_sweep = false;

  std::vector<ParamBinding> params;  // signature order
  std::map<std::string, std::int64_t> dim_sizes;
  std::vector<std::int64_t> thread_dims;
  std::map<std::string, Value> comp;
  // variables seeded into the outermost scope (MakeComp sees otherpars as
  // bare names)
  std::map<std::string, Value> preset_vars;

  // set by $PDLSTATESETBAD/-GOOD and by $SETBAD stores during the run
  std::set<std::string> flagged_bad;
  std::set<std::string> flagged_good;

  // RedoDimsCode mode: $SIZE(name) = expr lands here; element access is
  // rejected at parse time
  std::map<std::string, std::int64_t>* size_out = nullptr;

  // dataflow RedoDims mode
  ChildShapeStash* child_stash = nullptr;
  std::string child_param;  // which param the stash describes

  // EquivCPOffsCode mode: receives (parent_off, child_off, oob)
  std::function<void(std::int64_t, std::int64_t, bool)> equiv_cp;
};

// Runs a kernel. In Code mode this sweeps the thread tuples (wrapping the
// whole body unless the kernel places threadloop itself); in the restricted
// modes it executes the statements once.
void interpret_kernel(const KernelAst& k, InterpContext& ctx);

// The shared arithmetic rule: integer-kind operands use 64-bit signed
// arithmetic, any float operand promotes to double, ** always goes through
// pow. Integer division/modulo by zero yields 0 (counted in stats).
Value eval_binary_value(BinOp op, const Value& a, const Value& b);

}  // namespace sigkern
