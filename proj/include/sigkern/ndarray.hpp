#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "sigkern/dtype.hpp"

namespace sigkern {

class Trans;

// State flags carried by every array (a bit field in the original layout;
// plain bools here).
struct StateFlags {
  bool allocated = false;
  bool parent_data_changed = false;
  bool parent_dims_changed = false;
  bool parent_repr_changed = false;
  bool dataflow_f = false;
  bool dataflow_b = false;
  bool nomydims = false;  // null array
  bool badval = false;
  bool inplace = false;

  bool any_changed() const {
    return parent_data_changed || parent_dims_changed || parent_repr_changed;
  }
};

// A strided, typed n-dimensional array. Dim 0 is fastest-varying; dimincs
// caches element strides so that the offset of an index tuple is the
// stride-weighted sum. Views created by affine slicing share the parent's
// buffer and carry a nonzero origin; their dimincs deliberately break the
// fresh-array stride recurrence.
class NdArray {
 public:
  using Buffer = std::vector<std::byte>;

  // null array: NOMYDIMS set, no dims, no data.
  NdArray();

  static std::shared_ptr<NdArray> make_null();
  static std::shared_ptr<NdArray> new_filled(Dtype t,
                                             const std::vector<std::int64_t>& dims,
                                             const Value& fill);

  bool is_null() const { return state.nomydims; }
  Dtype dtype() const { return dtype_; }
  const std::vector<std::int64_t>& dims() const { return dims_; }
  const std::vector<std::int64_t>& dimincs() const { return dimincs_; }
  std::int64_t ndims() const { return static_cast<std::int64_t>(dims_.size()); }
  std::int64_t nvals() const { return nvals_; }
  std::int64_t origin() const { return origin_; }

  // Replaces the whole shape/buffer (used by output autocreation and by
  // dataflow child allocation). Strides are the canonical recurrence unless
  // explicit dimincs are given, in which case the buffer spans the maximum
  // reachable offset.
  void allocate(Dtype t, const std::vector<std::int64_t>& dims,
                const std::vector<std::int64_t>* dimincs = nullptr);

  // Installs a view onto another array's buffer.
  void adopt_view(Dtype t, std::vector<std::int64_t> dims,
                  std::vector<std::int64_t> dimincs,
                  std::shared_ptr<Buffer> buffer, std::int64_t origin);

  // Element offset of an index tuple; bounds-checked per `check`.
  std::int64_t offset_of(const std::vector<std::int64_t>& indices,
                         bool check = true) const;

  Value get_elem(std::int64_t offset) const;
  void set_elem(std::int64_t offset, const Value& v);
  // As above but skipping the [0, nvals) range check: views address their
  // parent's buffer through strides, so the raw buffer extent is the bound.
  Value get_elem_unchecked(std::int64_t offset) const;
  void set_elem_unchecked(std::int64_t offset, const Value& v);

  void fill(const Value& v);

  // The bad value in effect for this array.
  Value badvalue() const;
  bool elem_is_bad(std::int64_t offset) const;
  void set_elem_bad(std::int64_t offset);

  void set_badflag(bool v);
  bool badflag() const { return state.badval; }

  // New array, same dims, elements cast to t; bad elements re-encoded as
  // t's bad value when the badflag is set.
  std::shared_ptr<NdArray> convert_dtype(Dtype t) const;

  // Deep copy with canonical strides.
  std::shared_ptr<NdArray> copy() const;

  // Takes over another array's shape and storage, leaving flags and links
  // untouched (used for in-place dtype conversion).
  void take_data(const NdArray& src);

  const std::shared_ptr<Buffer>& buffer() const { return buffer_; }

  StateFlags state;
  std::optional<Value> badvalue_override;

  // dataflow links (see sigkern/dataflow.hpp)
  std::shared_ptr<Trans> trans_parent;
  std::vector<std::weak_ptr<Trans>> trans_children;

 private:
  Dtype dtype_ = Dtype::Double;
  std::vector<std::int64_t> dims_;
  std::vector<std::int64_t> dimincs_;
  std::int64_t nvals_ = 0;
  std::int64_t origin_ = 0;
  std::shared_ptr<Buffer> buffer_;

  void check_readable(std::int64_t offset) const;
};

using ArrayPtr = std::shared_ptr<NdArray>;

std::vector<std::int64_t> canonical_dimincs(const std::vector<std::int64_t>& dims);
std::int64_t product_of_dims(const std::vector<std::int64_t>& dims);

}  // namespace sigkern
