#include "sigkern/dtype.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sigkern {

namespace {

const char* kNames[kNumDtypes] = {"byte",     "short", "ushort",
                                  "int",      "indx",  "longlong",
                                  "float",    "double"};

const char kLetters[kNumDtypes] = {'B', 'S', 'U', 'L', 'N', 'Q', 'F', 'D'};

}  // namespace

const char* dtype_name(Dtype t) { return kNames[rank_of(t)]; }

Dtype dtype_from_name(const std::string& name) {
  for (int i = 0; i < kNumDtypes; ++i) {
    if (name == kNames[i]) return static_cast<Dtype>(i);
  }
  fail(Errc::UnknownDtypeName, "no dtype named '" + name + "'");
}

bool is_float_dtype(Dtype t) { return t == Dtype::Float || t == Dtype::Double; }

bool is_signed_dtype(Dtype t) {
  switch (t) {
    case Dtype::Byte:
    case Dtype::UShort:
      return false;
    default:
      return true;
  }
}

std::size_t dtype_size(Dtype t) {
  switch (t) {
    case Dtype::Byte:
      return 1;
    case Dtype::Short:
    case Dtype::UShort:
      return 2;
    case Dtype::Int:
      return 4;
    case Dtype::Indx:
    case Dtype::LongLong:
      return 8;
    case Dtype::Float:
      return 4;
    case Dtype::Double:
      return 8;
  }
  return 8;
}

std::int64_t truncate_to_int64(double v) {
  if (std::isnan(v)) return 0;
  if (v >= 9.223372036854775e18) return std::numeric_limits<std::int64_t>::max();
  if (v <= -9.223372036854775e18) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(v);  // truncates toward zero
}

std::int64_t Value::as_int() const { return flt ? truncate_to_int64(f) : i; }

Value cast_value(const Value& v, Dtype t) {
  switch (t) {
    case Dtype::Byte:
      return Value::of_int(static_cast<std::uint8_t>(v.as_int()));
    case Dtype::Short:
      return Value::of_int(static_cast<std::int16_t>(v.as_int()));
    case Dtype::UShort:
      return Value::of_int(static_cast<std::uint16_t>(v.as_int()));
    case Dtype::Int:
      return Value::of_int(static_cast<std::int32_t>(v.as_int()));
    case Dtype::Indx:
    case Dtype::LongLong:
      return Value::of_int(v.as_int());
    case Dtype::Float:
      return Value::of_float(static_cast<float>(v.as_double()));
    case Dtype::Double:
      return Value::of_float(v.as_double());
  }
  return v;
}

Dtype promote(Dtype a, Dtype b) { return rank_of(a) >= rank_of(b) ? a : b; }

char letter_of(Dtype t) { return kLetters[rank_of(t)]; }

Dtype dtype_of_letter(char c) {
  if (c == 'I') return Dtype::Indx;
  for (int i = 0; i < kNumDtypes; ++i) {
    if (kLetters[i] == c) return static_cast<Dtype>(i);
  }
  fail(Errc::UnknownTypeLetter, std::string("no dtype with letter '") + c + "'");
}

bool letter_matches(Dtype t, char c) {
  if (t == Dtype::Indx) return c == 'N' || c == 'I';
  return letter_of(t) == c;
}

Value default_badvalue(Dtype t) {
  switch (t) {
    case Dtype::Byte:
      return Value::of_int(255);
    case Dtype::Short:
      return Value::of_int(-32768);
    case Dtype::UShort:
      return Value::of_int(65535);
    case Dtype::Int:
      return Value::of_int(std::numeric_limits<std::int32_t>::min());
    case Dtype::Indx:
    case Dtype::LongLong:
      return Value::of_int(std::numeric_limits<std::int64_t>::min());
    case Dtype::Float:
    case Dtype::Double:
      return Value::of_float(std::numeric_limits<double>::quiet_NaN());
  }
  return Value::of_int(0);
}

bool value_is_bad(const Value& v, Dtype t, const Value& badval) {
  if (is_float_dtype(t)) {
    if (std::isnan(badval.as_double())) return std::isnan(v.as_double());
    return v.as_double() == badval.as_double();
  }
  return v.as_int() == badval.as_int();
}

GenericList::GenericList() {
  for (int i = 0; i < kNumDtypes; ++i) types_.push_back(static_cast<Dtype>(i));
}

GenericList::GenericList(std::vector<Dtype> types) : types_(std::move(types)) {
  if (types_.empty()) fail(Errc::EmptyGenericList, "generic list is empty");
  std::sort(types_.begin(), types_.end(),
            [](Dtype a, Dtype b) { return rank_of(a) < rank_of(b); });
  types_.erase(std::unique(types_.begin(), types_.end()), types_.end());
}

GenericList GenericList::from_letters(const std::string& letters) {
  std::vector<Dtype> ts;
  for (char c : letters) {
    if (c == ',' || c == ' ' || c == '\t') continue;
    ts.push_back(dtype_of_letter(c));
  }
  return GenericList(std::move(ts));
}

bool GenericList::contains(Dtype t) const {
  return std::find(types_.begin(), types_.end(), t) != types_.end();
}

std::string GenericList::to_letters() const {
  std::string s;
  for (Dtype t : types_) {
    if (!s.empty()) s += ',';
    s += letter_of(t);
  }
  return s;
}

Dtype select_generic(Dtype folded, const GenericList& gl) {
  for (Dtype t : gl.types()) {
    if (rank_of(t) >= rank_of(folded)) return t;
  }
  return gl.types().back();  // clamp: a version always runs
}

}  // namespace sigkern
