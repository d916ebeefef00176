#include "sigkern/ndarray.hpp"

#include <cstring>

namespace sigkern {

std::vector<std::int64_t> canonical_dimincs(const std::vector<std::int64_t>& dims) {
  std::vector<std::int64_t> incs(dims.size());
  std::int64_t acc = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    incs[k] = acc;
    acc *= dims[k];
  }
  return incs;
}

std::int64_t product_of_dims(const std::vector<std::int64_t>& dims) {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

NdArray::NdArray() { state.nomydims = true; }

ArrayPtr NdArray::make_null() { return std::make_shared<NdArray>(); }

ArrayPtr NdArray::new_filled(Dtype t, const std::vector<std::int64_t>& dims,
                             const Value& fill) {
  auto a = std::make_shared<NdArray>();
  a->allocate(t, dims);
  a->fill(fill);
  return a;
}

void NdArray::allocate(Dtype t, const std::vector<std::int64_t>& dims,
                       const std::vector<std::int64_t>* dimincs) {
  dtype_ = t;
  dims_ = dims;
  nvals_ = product_of_dims(dims);
  origin_ = 0;
  std::int64_t span = nvals_;
  if (dimincs) {
    dimincs_ = *dimincs;
    if (nvals_ > 0) {
      span = 1;
      for (std::size_t k = 0; k < dims_.size(); ++k) {
        span += (dims_[k] - 1) * std::abs(dimincs_[k]);
      }
    }
  } else {
    dimincs_ = canonical_dimincs(dims);
  }
  buffer_ = std::make_shared<Buffer>(static_cast<std::size_t>(span) * dtype_size(t));
  state.nomydims = false;
  state.allocated = true;
}

void NdArray::adopt_view(Dtype t, std::vector<std::int64_t> dims,
                         std::vector<std::int64_t> dimincs,
                         std::shared_ptr<Buffer> buffer, std::int64_t origin) {
  dtype_ = t;
  dims_ = std::move(dims);
  dimincs_ = std::move(dimincs);
  nvals_ = product_of_dims(dims_);
  buffer_ = std::move(buffer);
  origin_ = origin;
  state.nomydims = false;
  state.allocated = true;
}

std::int64_t NdArray::offset_of(const std::vector<std::int64_t>& indices,
                                bool check) const {
  if (indices.size() != dims_.size()) {
    fail(Errc::IndexOutOfBounds, "index tuple length " +
                                     std::to_string(indices.size()) +
                                     " does not match ndims " +
                                     std::to_string(dims_.size()));
  }
  std::int64_t off = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (check && (indices[k] < 0 || indices[k] >= dims_[k])) {
      fail(Errc::IndexOutOfBounds,
           "index " + std::to_string(indices[k]) + " outside dim " +
               std::to_string(k) + " of size " + std::to_string(dims_[k]));
    }
    off += indices[k] * dimincs_[k];
  }
  return off;
}

void NdArray::check_readable(std::int64_t) const {
  if (is_null() || !buffer_) {
    fail(Errc::NullArrayAccess, "element access on a null array");
  }
}

Value NdArray::get_elem_unchecked(std::int64_t offset) const {
  check_readable(offset);
  const std::byte* p = buffer_->data() + (origin_ + offset) * static_cast<std::int64_t>(dtype_size(dtype_));
  switch (dtype_) {
    case Dtype::Byte: {
      std::uint8_t v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_int(v);
    }
    case Dtype::Short: {
      std::int16_t v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_int(v);
    }
    case Dtype::UShort: {
      std::uint16_t v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_int(v);
    }
    case Dtype::Int: {
      std::int32_t v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_int(v);
    }
    case Dtype::Indx:
    case Dtype::LongLong: {
      std::int64_t v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_int(v);
    }
    case Dtype::Float: {
      float v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_float(v);
    }
    case Dtype::Double: {
      double v;
      std::memcpy(&v, p, sizeof v);
      return Value::of_float(v);
    }
  }
  return Value();
}

void NdArray::set_elem_unchecked(std::int64_t offset, const Value& v) {
  check_readable(offset);
  std::byte* p = buffer_->data() + (origin_ + offset) * static_cast<std::int64_t>(dtype_size(dtype_));
  switch (dtype_) {
    case Dtype::Byte: {
      auto x = static_cast<std::uint8_t>(v.as_int());
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::Short: {
      auto x = static_cast<std::int16_t>(v.as_int());
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::UShort: {
      auto x = static_cast<std::uint16_t>(v.as_int());
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::Int: {
      auto x = static_cast<std::int32_t>(v.as_int());
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::Indx:
    case Dtype::LongLong: {
      std::int64_t x = v.as_int();
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::Float: {
      auto x = static_cast<float>(v.as_double());
      std::memcpy(p, &x, sizeof x);
      break;
    }
    case Dtype::Double: {
      double x = v.as_double();
      std::memcpy(p, &x, sizeof x);
      break;
    }
  }
}

Value NdArray::get_elem(std::int64_t offset) const {
  check_readable(offset);
  if (offset < 0 || offset >= nvals_) {
    fail(Errc::IndexOutOfBounds, "offset " + std::to_string(offset) +
                                     " outside [0, " + std::to_string(nvals_) + ")");
  }
  return get_elem_unchecked(offset);
}

void NdArray::set_elem(std::int64_t offset, const Value& v) {
  check_readable(offset);
  if (offset < 0 || offset >= nvals_) {
    fail(Errc::IndexOutOfBounds, "offset " + std::to_string(offset) +
                                     " outside [0, " + std::to_string(nvals_) + ")");
  }
  set_elem_unchecked(offset, v);
}

void NdArray::fill(const Value& v) {
  for (std::int64_t i = 0; i < nvals_; ++i) set_elem_unchecked(i, v);
}

void NdArray::set_badflag(bool v) { state.badval = v; }

Value NdArray::badvalue() const {
  return badvalue_override ? *badvalue_override : default_badvalue(dtype_);
}

bool NdArray::elem_is_bad(std::int64_t offset) const {
  return value_is_bad(get_elem_unchecked(offset), dtype_, badvalue());
}

void NdArray::set_elem_bad(std::int64_t offset) {
  set_elem_unchecked(offset, badvalue());
}

ArrayPtr NdArray::convert_dtype(Dtype t) const {
  if (is_null()) fail(Errc::NullArrayAccess, "cannot convert a null array");
  auto out = std::make_shared<NdArray>();
  out->allocate(t, dims_);
  out->state.badval = state.badval;
  const Value src_bad = badvalue();
  const Value dst_bad = default_badvalue(t);
  // iterate index space so views convert correctly
  std::vector<std::int64_t> idx(dims_.size(), 0);
  for (std::int64_t i = 0; i < nvals_; ++i) {
    std::int64_t soff = 0, doff = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      soff += idx[k] * dimincs_[k];
      doff += idx[k] * out->dimincs_[k];
    }
    Value v = get_elem_unchecked(soff);
    if (state.badval && value_is_bad(v, dtype_, src_bad)) {
      out->set_elem_unchecked(doff, dst_bad);
    } else {
      out->set_elem_unchecked(doff, v);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < dims_[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

ArrayPtr NdArray::copy() const {
  if (is_null()) return make_null();
  auto out = std::make_shared<NdArray>();
  out->allocate(dtype_, dims_);
  out->state.badval = state.badval;
  out->badvalue_override = badvalue_override;
  std::vector<std::int64_t> idx(dims_.size(), 0);
  for (std::int64_t i = 0; i < nvals_; ++i) {
    std::int64_t soff = 0, doff = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      soff += idx[k] * dimincs_[k];
      doff += idx[k] * out->dimincs_[k];
    }
    out->set_elem_unchecked(doff, get_elem_unchecked(soff));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < dims_[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

void NdArray::take_data(const NdArray& src) {
  dtype_ = src.dtype_;
  dims_ = src.dims_;
  dimincs_ = src.dimincs_;
  nvals_ = src.nvals_;
  origin_ = src.origin_;
  buffer_ = src.buffer_;
  state.nomydims = false;
  state.allocated = true;
}

}  // namespace sigkern
