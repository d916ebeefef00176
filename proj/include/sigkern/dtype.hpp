#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sigkern/error.hpp"

namespace sigkern {

// Element types, listed in promotion order. The integer value of each
// enumerator is its rank on the ladder.
enum class Dtype : int {
  Byte = 0,
  Short,
  UShort,
  Int,
  Indx,  // 64-bit signed index type
  LongLong,
  Float,
  Double,
};

inline constexpr int kNumDtypes = 8;

inline int rank_of(Dtype t) { return static_cast<int>(t); }

const char* dtype_name(Dtype t);
Dtype dtype_from_name(const std::string& name);  // UnknownDtypeName
bool is_float_dtype(Dtype t);
bool is_signed_dtype(Dtype t);
std::size_t dtype_size(Dtype t);

// A runtime scalar: 64-bit signed integer or 64-bit float. Arithmetic in
// kernels happens in one of these two representations; stores cast to the
// destination element type.
struct Value {
  bool flt = false;
  std::int64_t i = 0;
  double f = 0.0;

  Value() = default;
  static Value of_int(std::int64_t v) {
    Value x;
    x.flt = false;
    x.i = v;
    return x;
  }
  static Value of_float(double v) {
    Value x;
    x.flt = true;
    x.f = v;
    return x;
  }
  double as_double() const { return flt ? f : static_cast<double>(i); }
  std::int64_t as_int() const;
  bool truthy() const { return flt ? (f != 0.0) : (i != 0); }
};

// Truncating double -> int64 conversion that never traps; NaN and values
// outside the representable range collapse to 0.
std::int64_t truncate_to_int64(double v);

// Casts a Value to dtype t and back to a Value holding exactly what an
// element of that type would store (wrapping integers, narrowing floats).
Value cast_value(const Value& v, Dtype t);

// --- promotion and letters ------------------------------------------------

Dtype promote(Dtype a, Dtype b);

// Canonical one-letter code for each dtype: B S U L N Q F D.
char letter_of(Dtype t);
// Accepts the canonical letters plus 'I' as an alias for Indx.
Dtype dtype_of_letter(char c);  // UnknownTypeLetter
// True when c selects t in a $T form (Indx matches both 'N' and 'I').
bool letter_matches(Dtype t, char c);

// Default in-band bad value: signed integer minimum, unsigned maximum,
// NaN for the float types.
Value default_badvalue(Dtype t);
// Bad test for a stored element value under dtype t (is-NaN for floats).
bool value_is_bad(const Value& v, Dtype t, const Value& badval);

// --- generic-type lists ---------------------------------------------------

// The ordered set of dtypes an operator is compiled/executed for.
class GenericList {
 public:
  GenericList();  // all eight types
  explicit GenericList(std::vector<Dtype> types);  // sorted, deduplicated
  static GenericList from_letters(const std::string& letters);  // "F,D"

  const std::vector<Dtype>& types() const { return types_; }
  bool contains(Dtype t) const;
  std::string to_letters() const;

 private:
  std::vector<Dtype> types_;
};

// Folds promote() over the unforced argument types and picks the execution
// dtype from gl: the smallest member at or above the fold, clamped to the
// largest member when the fold exceeds them all.
Dtype select_generic(Dtype folded, const GenericList& gl);

}  // namespace sigkern
