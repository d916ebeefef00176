#pragma once

#include <map>

#include "sigkern/interp.hpp"

namespace sigkern {

struct ParamPlan {
  Dtype exec_dtype = Dtype::Double;
  std::map<std::string, std::int64_t> active_strides;
  std::vector<std::int64_t> thread_strides;  // aligned with thread_dims
  bool autocreate = false;
  std::vector<std::int64_t> create_dims;  // active dims (++ thread dims for outputs)
};

struct BroadcastPlan {
  Dtype generic = Dtype::Double;
  std::map<std::string, std::int64_t> dim_sizes;
  std::vector<std::int64_t> thread_dims;
  std::vector<ParamPlan> params;  // signature order
};

// Generic-type resolution over the supplied argument dtypes (nullopt for
// autocreated/temporary slots): fold the promotion ladder over parameters
// without a forced dtype, then pick the smallest GenericList member of at
// least that rank, clamping to the largest member.
Dtype resolve_generic(const Signature& sig,
                      const std::vector<std::optional<Dtype>>& arg_dtypes,
                      const GenericList& gl);

class Registry {
 public:
  void register_op(OpDef def);
  const OpDef& get(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<std::string> names() const;

  // just the native affine slice op
  static Registry with_base();
  // base plus every op from the embedded corpus definitions
  static Registry with_corpus();

 private:
  std::map<std::string, OpDef> ops_;
};

// The corpus definition text compiled into the library (same content as the
// shipped .ops file).
const char* corpus_opdefs_text();

BroadcastPlan make_plan(const OpDef& def, const std::vector<ArrayPtr>& args,
                        const std::map<std::string, std::int64_t>* sizes_override =
                            nullptr);

Variant choose_code_path(const OpDef& def, const std::vector<ArrayPtr>& args);

std::map<std::string, std::int64_t> run_redodims(
    const OpDef& def, const std::vector<ArrayPtr>& args,
    const std::vector<OtherParValue>& otherpars);

struct RunOptions {
  bool reverse_sweep = false;
  bool check_bounds = false;
};

// Runs a registered-op definition over its arguments. `args` is in signature
// order; temporaries and [oca] slots must be null. Returns the output
// parameters in signature order.
std::vector<ArrayPtr> run_op(const OpDef& def, const std::vector<ArrayPtr>& args,
                             const std::vector<OtherParValue>& otherpars = {},
                             const RunOptions& opts = {});

std::map<std::string, Value> otherpar_values_to_comp(
    const OpDef& def, const std::vector<OtherParValue>& otherpars);

}  // namespace sigkern
